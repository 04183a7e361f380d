//! Scene geometry, fading channels and the bounded jammer-channel uncertainty model.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, CVec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("distance {0} m is below the 1 m reference distance")]
    BelowReferenceDistance(f64),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("config parse error: {0}")]
    Parse(String),
}

/// Power ratio in dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Amplitude gain from dB (20 log10 convention).
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(a: f64) -> f64 {
    20.0 * a.log10()
}

/// Log-distance path loss `L0 d^-eta`.
pub fn path_loss_gain(d: f64, eta: f64, l0: f64) -> Result<f64, SceneError> {
    if !(d >= 1.0) {
        return Err(SceneError::BelowReferenceDistance(d));
    }
    if !(eta > 0.0 && l0 > 0.0) {
        return Err(SceneError::Invalid("path-loss exponent and reference gain must be positive".into()));
    }
    Ok(l0 * d.powf(-eta))
}

/// Scene parameters in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub pos_s: [f64; 2],
    pub pos_d: [f64; 2],
    pub pos_j: [f64; 2],
    /// x, y and height of the surface.
    pub pos_r: [f64; 3],
    pub n_s: usize,
    pub n_d: usize,
    pub n_j: usize,
    /// Surface elements; zero means no surface.
    pub n: usize,
    pub p_s_max: f64,
    pub p_j_max: f64,
    pub p_r_max: f64,
    pub lambda_max: f64,
    pub sigma_r2: f64,
    pub sigma_d2: f64,
    pub c_s: f64,
    pub c_j: f64,
    pub eta_ground: f64,
    pub eta_ris: f64,
    pub l0: f64,
    pub rician_k: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            pos_s: [0.0, 100.0],
            pos_d: [400.0, 0.0],
            pos_j: [100.0, 400.0],
            pos_r: [200.0, 0.0, 200.0],
            n_s: 4,
            n_d: 2,
            n_j: 4,
            n: 20,
            p_s_max: 5.0,
            p_j_max: 10.0,
            p_r_max: dbm_to_watts(20.0),
            lambda_max: db_to_amplitude(10.0),
            sigma_r2: db_to_linear(-140.0),
            sigma_d2: db_to_linear(-140.0),
            c_s: 2.0,
            c_j: 3.0,
            eta_ground: 3.5,
            eta_ris: 2.3,
            l0: db_to_linear(-20.0),
            rician_k: 10.0,
            delta: 0.05,
            seed: 0,
        }
    }
}

/// On-disk form: log units for powers, gains and noise.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfigFile {
    #[serde(rename = "pos_S")]
    pub pos_s: [f64; 2],
    #[serde(rename = "pos_D")]
    pub pos_d: [f64; 2],
    #[serde(rename = "pos_J")]
    pub pos_j: [f64; 2],
    #[serde(rename = "pos_R")]
    pub pos_r: [f64; 3],
    #[serde(rename = "N_S")]
    pub n_s: usize,
    #[serde(rename = "N_D")]
    pub n_d: usize,
    #[serde(rename = "N_J")]
    pub n_j: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "P_S_max")]
    pub p_s_max: f64,
    #[serde(rename = "P_J_max")]
    pub p_j_max: f64,
    #[serde(rename = "P_R_max_dBm")]
    pub p_r_max_dbm: f64,
    #[serde(rename = "lambda_max_dB")]
    pub lambda_max_db: f64,
    #[serde(rename = "sigma_R2_dBW")]
    pub sigma_r2_dbw: f64,
    #[serde(rename = "sigma_D2_dBW")]
    pub sigma_d2_dbw: f64,
    #[serde(rename = "c_S")]
    pub c_s: f64,
    #[serde(rename = "c_J")]
    pub c_j: f64,
    pub eta_ground: f64,
    pub eta_ris: f64,
    #[serde(rename = "L0_dB")]
    pub l0_db: f64,
    #[serde(rename = "rician_K")]
    pub rician_k: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for SceneConfigFile {
    fn default() -> Self {
        SceneConfig::default().to_file()
    }
}

impl SceneConfigFile {
    pub fn into_config(self) -> Result<SceneConfig, SceneError> {
        let cfg = SceneConfig {
            pos_s: self.pos_s,
            pos_d: self.pos_d,
            pos_j: self.pos_j,
            pos_r: self.pos_r,
            n_s: self.n_s,
            n_d: self.n_d,
            n_j: self.n_j,
            n: self.n,
            p_s_max: self.p_s_max,
            p_j_max: self.p_j_max,
            p_r_max: dbm_to_watts(self.p_r_max_dbm),
            lambda_max: db_to_amplitude(self.lambda_max_db),
            sigma_r2: db_to_linear(self.sigma_r2_dbw),
            sigma_d2: db_to_linear(self.sigma_d2_dbw),
            c_s: self.c_s,
            c_j: self.c_j,
            eta_ground: self.eta_ground,
            eta_ris: self.eta_ris,
            l0: db_to_linear(self.l0_db),
            rician_k: self.rician_k,
            delta: self.delta,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: &str| Err(SceneError::Invalid(m.to_string()));
        if self.n_s == 0 || self.n_d == 0 || self.n_j == 0 {
            return bad("antenna counts must be at least 1");
        }
        let positive = [
            ("P_S_max", self.p_s_max),
            ("P_J_max", self.p_j_max),
            ("P_R_max", self.p_r_max),
            ("lambda_max", self.lambda_max),
            ("sigma_R2", self.sigma_r2),
            ("sigma_D2", self.sigma_d2),
            ("c_S", self.c_s),
            ("c_J", self.c_j),
            ("eta_ground", self.eta_ground),
            ("eta_ris", self.eta_ris),
            ("L0", self.l0),
            ("rician_K", self.rician_k),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return bad(&format!("{name} must be positive"));
            }
            if name != "rician_K" && !v.is_finite() {
                return bad(&format!("{name} must be finite"));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta must be a finite nonnegative number");
        }
        let coords = self.pos_s.iter().chain(&self.pos_d).chain(&self.pos_j).chain(&self.pos_r);
        if coords.into_iter().any(|c| !c.is_finite()) {
            return bad("positions must be finite");
        }
        // Every link must span at least the reference distance.
        let g = Geometry::from_config(self);
        for (name, d) in g.link_distances(self.n > 0) {
            if d < 1.0 {
                return bad(&format!("link {name} is shorter than 1 m"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<SceneConfig, SceneError> {
        let f: SceneConfigFile = serde_json::from_str(s).map_err(|e| SceneError::Parse(e.to_string()))?;
        f.into_config()
    }

    pub fn to_file(&self) -> SceneConfigFile {
        SceneConfigFile {
            pos_s: self.pos_s,
            pos_d: self.pos_d,
            pos_j: self.pos_j,
            pos_r: self.pos_r,
            n_s: self.n_s,
            n_d: self.n_d,
            n_j: self.n_j,
            n: self.n,
            p_s_max: self.p_s_max,
            p_j_max: self.p_j_max,
            p_r_max_dbm: watts_to_dbm(self.p_r_max),
            lambda_max_db: amplitude_to_db(self.lambda_max),
            sigma_r2_dbw: linear_to_db(self.sigma_r2),
            sigma_d2_dbw: linear_to_db(self.sigma_d2),
            c_s: self.c_s,
            c_j: self.c_j,
            eta_ground: self.eta_ground,
            eta_ris: self.eta_ris,
            l0_db: linear_to_db(self.l0),
            rician_k: self.rician_k,
            delta: self.delta,
            seed: self.seed,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("config serializes")
    }
}

/// 3-D node positions; ground nodes sit at height zero.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub s: [f64; 3],
    pub d: [f64; 3],
    pub j: [f64; 3],
    pub r: [f64; 3],
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl Geometry {
    pub fn from_config(cfg: &SceneConfig) -> Self {
        Self {
            s: [cfg.pos_s[0], cfg.pos_s[1], 0.0],
            d: [cfg.pos_d[0], cfg.pos_d[1], 0.0],
            j: [cfg.pos_j[0], cfg.pos_j[1], 0.0],
            r: cfg.pos_r,
        }
    }

    fn link_distances(&self, with_ris: bool) -> Vec<(&'static str, f64)> {
        let mut v = vec![("S-D", dist(self.s, self.d)), ("J-D", dist(self.j, self.d))];
        if with_ris {
            v.extend([("S-R", dist(self.s, self.r)), ("R-D", dist(self.r, self.d)), ("J-R", dist(self.j, self.r))]);
        }
        v
    }
}

/// Half-wavelength ULA response along the x axis for direction cosine `ux`.
pub fn ula_steering(n: usize, ux: f64) -> CVec {
    DVector::from_fn(n, |k, _| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 * ux))
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill order keeps draws reproducible independent of nalgebra internals.
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(re * s, im * s);
        }
    }
    m
}

/// The five true channel matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannels {
    pub h_sd: CMat,
    pub h_sr: CMat,
    pub h_rd: CMat,
    pub h_jd: CMat,
    pub h_jr: CMat,
}

/// True channels, jammer-channel estimates and squared-Frobenius uncertainty radii.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_sd: CMat,
    pub h_sr: CMat,
    pub h_rd: CMat,
    pub h_jd: CMat,
    pub h_jr: CMat,
    pub hhat_jd: CMat,
    pub hhat_jr: CMat,
    pub eps_jd: f64,
    pub eps_jr: f64,
}

/// Line-of-sight matrix for a link from `tx` (n_tx elements) to `rx` (n_rx elements).
fn los(n_rx: usize, n_tx: usize, tx: [f64; 3], rx: [f64; 3]) -> CMat {
    let d = dist(tx, rx);
    let ux = (rx[0] - tx[0]) / d;
    let a_tx = ula_steering(n_tx, ux);
    let a_rx = ula_steering(n_rx, -ux);
    &a_rx * a_tx.adjoint()
}

fn rician<R: Rng + ?Sized>(
    rng: &mut R,
    n_rx: usize,
    n_tx: usize,
    tx: [f64; 3],
    rx: [f64; 3],
    gain: f64,
    k: f64,
) -> CMat {
    let amp = Complex64::new(gain.sqrt(), 0.0);
    let scatter = complex_gaussian(rng, n_rx, n_tx);
    let h_los = los(n_rx, n_tx, tx, rx);
    if k.is_infinite() {
        return h_los * amp;
    }
    let a = Complex64::new((k / (k + 1.0)).sqrt(), 0.0);
    let b = Complex64::new((1.0 / (k + 1.0)).sqrt(), 0.0);
    (h_los * a + scatter * b) * amp
}

/// Draws the five true channels. Ground links are drawn before surface links so they do not
/// depend on the element count.
pub fn draw_channels<R: Rng + ?Sized>(cfg: &SceneConfig, rng: &mut R) -> Result<LinkChannels, SceneError> {
    cfg.validate()?;
    let g = Geometry::from_config(cfg);
    let pl = |a, b, eta| path_loss_gain(dist(a, b), eta, cfg.l0);
    let amp = |x: f64| Complex64::new(x.sqrt(), 0.0);
    let h_sd = complex_gaussian(rng, cfg.n_d, cfg.n_s) * amp(pl(g.s, g.d, cfg.eta_ground)?);
    let h_jd = complex_gaussian(rng, cfg.n_d, cfg.n_j) * amp(pl(g.j, g.d, cfg.eta_ground)?);
    let (h_sr, h_rd, h_jr) = if cfg.n == 0 {
        (DMatrix::zeros(0, cfg.n_s), DMatrix::zeros(cfg.n_d, 0), DMatrix::zeros(0, cfg.n_j))
    } else {
        let k = cfg.rician_k;
        let h_sr = rician(rng, cfg.n, cfg.n_s, g.s, g.r, pl(g.s, g.r, cfg.eta_ris)?, k);
        let h_rd = rician(rng, cfg.n_d, cfg.n, g.r, g.d, pl(g.r, g.d, cfg.eta_ris)?, k);
        let h_jr = rician(rng, cfg.n, cfg.n_j, g.j, g.r, pl(g.j, g.r, cfg.eta_ris)?, k);
        (h_sr, h_rd, h_jr)
    };
    Ok(LinkChannels { h_sd, h_sr, h_rd, h_jd, h_jr })
}

/// Estimate and radius for one jammer channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Uncertain {
    pub estimate: CMat,
    pub radius: f64,
}

/// Draws `Delta` with `||Delta||_F = delta ||H||_F` in a uniform direction and returns `H - Delta`.
pub fn make_uncertainty<R: Rng + ?Sized>(truth: &CMat, delta: f64, rng: &mut R) -> Uncertain {
    let size = delta * truth.norm();
    let dir = complex_gaussian(rng, truth.nrows(), truth.ncols());
    let dn = dir.norm();
    if size == 0.0 || dn == 0.0 {
        return Uncertain { estimate: truth.clone(), radius: 0.0 };
    }
    let err = dir * Complex64::new(size / dn, 0.0);
    Uncertain { estimate: truth - err, radius: size * size }
}

/// Builds the full channel set for `cfg.seed`. Channels and uncertainty use separate RNG
/// streams, and the direct-link error is drawn first, so ground links and their estimates are
/// shared by scenes that differ only in the element count.
pub fn draw_scene(cfg: &SceneConfig) -> Result<ChannelSet, SceneError> {
    let mut ch_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    ch_rng.set_stream(0);
    let links = draw_channels(cfg, &mut ch_rng)?;
    let mut unc_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    unc_rng.set_stream(1);
    let jd = make_uncertainty(&links.h_jd, cfg.delta, &mut unc_rng);
    let jr = make_uncertainty(&links.h_jr, cfg.delta, &mut unc_rng);
    Ok(ChannelSet {
        h_sd: links.h_sd,
        h_sr: links.h_sr,
        h_rd: links.h_rd,
        h_jd: links.h_jd,
        h_jr: links.h_jr,
        hhat_jd: jd.estimate,
        hhat_jr: jr.estimate,
        eps_jd: jd.radius,
        eps_jr: jr.radius,
    })
}

/// Unit-variance Rayleigh channels of the given sizes with uncertainty `delta`, for
/// scale-free tests and oracles.
pub fn random_channel_set<R: Rng + ?Sized>(
    rng: &mut R,
    n_s: usize,
    n_d: usize,
    n_j: usize,
    n: usize,
    delta: f64,
) -> ChannelSet {
    let h_sd = complex_gaussian(rng, n_d, n_s);
    let h_sr = complex_gaussian(rng, n, n_s);
    let h_rd = complex_gaussian(rng, n_d, n);
    let h_jd = complex_gaussian(rng, n_d, n_j);
    let h_jr = complex_gaussian(rng, n, n_j);
    let jd = make_uncertainty(&h_jd, delta, rng);
    let jr = make_uncertainty(&h_jr, delta, rng);
    ChannelSet {
        h_sd,
        h_sr,
        h_rd,
        h_jd,
        h_jr,
        hhat_jd: jd.estimate,
        hhat_jr: jr.estimate,
        eps_jd: jd.radius,
        eps_jr: jr.radius,
    }
}

impl ChannelSet {
    pub fn n_s(&self) -> usize {
        self.h_sd.ncols()
    }

    pub fn n_d(&self) -> usize {
        self.h_sd.nrows()
    }

    pub fn n_j(&self) -> usize {
        self.h_jd.ncols()
    }

    /// Surface element count.
    pub fn n(&self) -> usize {
        self.h_sr.nrows()
    }

    pub fn check_shapes(&self) -> Result<(), SceneError> {
        let (ns, nd, nj, n) = (self.n_s(), self.n_d(), self.n_j(), self.n());
        let ok = self.h_sd.shape() == (nd, ns)
            && self.h_sr.shape() == (n, ns)
            && self.h_rd.shape() == (nd, n)
            && self.h_jd.shape() == (nd, nj)
            && self.h_jr.shape() == (n, nj)
            && self.hhat_jd.shape() == (nd, nj)
            && self.hhat_jr.shape() == (n, nj);
        if ok && self.eps_jd >= 0.0 && self.eps_jr >= 0.0 {
            Ok(())
        } else {
            Err(SceneError::Invalid("channel shapes or radii are inconsistent".into()))
        }
    }

    /// The same scene with the surface removed.
    pub fn without_surface(&self) -> ChannelSet {
        let (ns, nd, nj) = (self.n_s(), self.n_d(), self.n_j());
        ChannelSet {
            h_sd: self.h_sd.clone(),
            h_sr: DMatrix::zeros(0, ns),
            h_rd: DMatrix::zeros(nd, 0),
            h_jd: self.h_jd.clone(),
            h_jr: DMatrix::zeros(0, nj),
            hhat_jd: self.hhat_jd.clone(),
            hhat_jr: DMatrix::zeros(0, nj),
            eps_jd: self.eps_jd,
            eps_jr: 0.0,
        }
    }
}
