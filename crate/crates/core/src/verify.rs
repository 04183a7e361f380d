//! Solver-free oracles: brute-force follower search, uncertainty-ball sampling
//! and trace monotonicity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::game::{jammer_best_response, rd_theta, GameError, JammerStrategy, LeaderStrategy};
use crate::linalg::{herm_row, normalized, random_unit_vector, CMat, CVec};
use crate::scene::{ChannelSet, SceneConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub power_grid: usize,
    pub directions: usize,
    pub boundary_samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { power_grid: 512, directions: 10_000, boundary_samples: 10_000, tolerance: 1e-6, seed: 0 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.power_grid < 1 || self.directions < 1 || self.boundary_samples < 1 {
            return Err("oracle sample counts must be at least 1".into());
        }
        if !(self.tolerance >= 0.0) {
            return Err("oracle tolerance must be nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerOracleResult {
    pub p_j: f64,
    pub w_j: CVec,
    pub u_j: f64,
    /// Best utility over the sampled grid alone, without the closed-form candidate.
    pub grid_u_j: f64,
}

struct FollowerTerms {
    signal_power: f64,
    noise: f64,
    /// `w_D^H Ht_JD` as a column.
    row: CVec,
}

fn follower_terms(ch: &ChannelSet, leader: &LeaderStrategy, cfg: &SceneConfig) -> FollowerTerms {
    // Direct loops so the oracle does not lean on the model code it checks.
    let (nd, n) = (ch.n_d(), ch.n());
    let ht_sd = cascade_with(&ch.h_sd, &ch.h_rd, &leader.theta, &ch.h_sr);
    let ht_jd = cascade_with(&ch.h_jd, &ch.h_rd, &leader.theta, &ch.h_jr);
    let s = leader.w_d.dotc(&(&ht_sd * &leader.w_s));
    let mut ris = 0.0;
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..nd {
            acc += leader.w_d[i].conj() * ch.h_rd[(i, k)];
        }
        ris += (acc * leader.theta[k]).norm_sqr();
    }
    FollowerTerms {
        signal_power: leader.p_s * s.norm_sqr(),
        noise: cfg.sigma_r2 * ris + cfg.sigma_d2,
        row: herm_row(&leader.w_d, &ht_jd),
    }
}

/// `direct + H_RD diag(theta) incident` by explicit summation.
fn cascade_with(direct: &CMat, h_rd: &CMat, theta: &CVec, incident: &CMat) -> CMat {
    let mut out = direct.clone();
    for i in 0..direct.nrows() {
        for c in 0..direct.ncols() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..theta.len() {
                acc += h_rd[(i, k)] * theta[k] * incident[(k, c)];
            }
            out[(i, c)] += acc;
        }
    }
    out
}

/// Grid search over jamming power times random unit directions.
pub fn follower_oracle(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    cfg: &SceneConfig,
    oc: &OracleConfig,
) -> Result<FollowerOracleResult, GameError> {
    let t = follower_terms(ch, leader, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(oc.seed);
    let powers: Vec<f64> = if oc.power_grid == 1 {
        vec![0.0]
    } else {
        (0..oc.power_grid).map(|k| cfg.p_j_max * k as f64 / (oc.power_grid - 1) as f64).collect()
    };
    let utility = |p: f64, amp: f64| -t.signal_power / (p * amp + t.noise) - cfg.c_j * p;

    let mut best = (f64::NEG_INFINITY, 0.0, CVec::zeros(ch.n_j()));
    let consider = |w: CVec, best: &mut (f64, f64, CVec)| {
        let amp = t.row.dot(&w).norm_sqr();
        for &p in &powers {
            let u = utility(p, amp);
            if u > best.0 {
                *best = (u, p, w.clone());
            }
        }
    };
    if let Some(mrc) = normalized(&t.row.conjugate()) {
        consider(mrc, &mut best);
    }
    for _ in 0..oc.directions {
        consider(random_unit_vector(&mut rng, ch.n_j()), &mut best);
    }
    let grid_u_j = best.0;

    let star = jammer_best_response(ch, leader, cfg)?;
    let u_star = utility(star.p_j, t.row.dot(&star.w_j).norm_sqr());
    let (u_j, p_j, w_j) = if u_star >= best.0 { (u_star, star.p_j, star.w_j) } else { best };
    Ok(FollowerOracleResult { p_j, w_j, u_j, grid_u_j })
}

/// Sampled extrema over the two uncertainty balls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseSample {
    /// Largest sampled `||w_D^H (H_JD + H_RD Theta H_JR)||^2`.
    pub max_jam_gain: f64,
    /// Smallest sampled value of the same quantity.
    pub min_jam_gain: f64,
    /// Largest sampled `||Theta H_JR w_J||^2`.
    pub max_surface_jam: f64,
}

/// Certified bounds to be checked against sampled extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificates {
    pub psi_jd: f64,
    pub phi_jd: f64,
    pub psi_jr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateViolations {
    pub psi_jd: f64,
    pub phi_jd: f64,
    pub psi_jr: f64,
}

impl CertificateViolations {
    pub fn worst(&self) -> f64 {
        self.psi_jd.max(self.phi_jd).max(self.psi_jr)
    }
}

impl WorstCaseSample {
    /// Positive entries are violations, measured relative to `max(1, |certificate|)`
    /// after dividing by `scale`.
    pub fn violations(&self, cert: &Certificates, scale: f64) -> CertificateViolations {
        let rel = |excess: f64, c: f64| excess / scale / (c.abs() / scale).max(1.0);
        CertificateViolations {
            psi_jd: rel(self.max_jam_gain - cert.psi_jd, cert.psi_jd),
            phi_jd: rel(cert.phi_jd - self.min_jam_gain, cert.phi_jd),
            psi_jr: rel(self.max_surface_jam - cert.psi_jr, cert.psi_jr),
        }
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Point in the Frobenius ball of squared radius `eps`: on the sphere when
/// `boundary`, otherwise at radius `sqrt(eps) u^(1/dim)`.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, eps: f64, boundary: bool) -> CMat {
    if rows * cols == 0 || eps <= 0.0 {
        return DMatrix::zeros(rows, cols);
    }
    let g = gaussian_matrix(rng, rows, cols);
    let norm = g.norm();
    if norm == 0.0 {
        return DMatrix::zeros(rows, cols);
    }
    let mut r = eps.sqrt();
    if !boundary {
        let dim = (2 * rows * cols) as f64;
        r *= rng.random::<f64>().powf(1.0 / dim);
    }
    g * Complex64::new(r / norm, 0.0)
}

/// Samples `oc.boundary_samples` boundary points and as many interior points of
/// each ball, jointly, around the estimates in `ch`.
pub fn worst_case_sampler(
    w_d: &CVec,
    theta: &CVec,
    w_j: &CVec,
    ch: &ChannelSet,
    oc: &OracleConfig,
) -> WorstCaseSample {
    let mut rng = ChaCha8Rng::seed_from_u64(oc.seed ^ 0x5eed_ba11);
    let (nd, nj, n) = (ch.n_d(), ch.n_j(), ch.n());
    // u = w_D^H H_RD diag(theta), as a column
    let u = if n == 0 { CVec::zeros(0) } else { herm_row(w_d, &rd_theta(&ch.h_rd, theta)) };
    let base = herm_row(w_d, &ch.hhat_jd) + if n == 0 { CVec::zeros(nj) } else { ch.hhat_jr.transpose() * &u };
    let surface = |h_jr: &CMat| {
        let hw = h_jr * w_j;
        hw.iter().zip(theta.iter()).map(|(a, t)| (a * t).norm_sqr()).sum::<f64>()
    };
    let nominal = base.norm_squared();
    let nominal_jr = surface(&ch.hhat_jr);
    let mut out = WorstCaseSample { max_jam_gain: nominal, min_jam_gain: nominal, max_surface_jam: nominal_jr };
    let total = 2 * oc.boundary_samples;
    for k in 0..total {
        let boundary = k < oc.boundary_samples;
        let d_jd = sample_ball(&mut rng, nd, nj, ch.eps_jd, boundary);
        let d_jr = sample_ball(&mut rng, n, nj, ch.eps_jr, boundary);
        let mut row = base.clone() + herm_row(w_d, &d_jd);
        if n > 0 {
            row += d_jr.transpose() * &u;
        }
        let g = row.norm_squared();
        out.max_jam_gain = out.max_jam_gain.max(g);
        out.min_jam_gain = out.min_jam_gain.min(g);
        if n > 0 {
            out.max_surface_jam = out.max_surface_jam.max(surface(&(&ch.hhat_jr + &d_jr)));
        }
    }
    out
}

/// Index of the first `k` with `trace[k] < trace[k-1] - slack`, if any.
pub fn monotonicity_check(trace: &[f64], slack: f64) -> Result<(), usize> {
    match trace.windows(2).position(|w| !(w[1] >= w[0] - slack)) {
        Some(k) => Err(k + 1),
        None => Ok(()),
    }
}

/// Smallest `x` in `[lo, hi]` with `feasible(x)`, assuming feasibility is monotone in `x`.
pub fn bisect_min(feasible: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest `x` in `[lo, hi]` with `feasible(x)`, assuming feasibility is antitone in `x`.
pub fn bisect_max(feasible: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Follower-side convenience: the closed-form response's utility gap to the oracle grid.
pub fn follower_gap(
    ch: &ChannelSet,
    leader: &LeaderStrategy,
    cfg: &SceneConfig,
    oc: &OracleConfig,
) -> Result<(JammerStrategy, f64), GameError> {
    let r = follower_oracle(ch, leader, cfg, oc)?;
    let star = jammer_best_response(ch, leader, cfg)?;
    let t = follower_terms(ch, leader, cfg);
    let u_star = -t.signal_power / (star.p_j * t.row.dot(&star.w_j).norm_sqr() + t.noise) - cfg.c_j * star.p_j;
    Ok((star, r.grid_u_j - u_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonicity_examples() {
        assert_eq!(monotonicity_check(&[1.0, 2.0, 3.0], 0.0), Ok(()));
        assert_eq!(monotonicity_check(&[1.0, 0.5], 1e-6), Err(1));
        assert_eq!(monotonicity_check(&[], 0.0), Ok(()));
        assert_eq!(monotonicity_check(&[1.0, 1.0 - 1e-7], 1e-6), Ok(()));
        assert_eq!(monotonicity_check(&[0.0, f64::NAN], 1e-6), Err(1));
    }

    #[test]
    fn ball_samples_respect_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let b = sample_ball(&mut rng, 3, 2, 0.25, true);
            assert!((b.norm_squared() - 0.25).abs() < 1e-12);
            let i = sample_ball(&mut rng, 3, 2, 0.25, false);
            assert!(i.norm_squared() <= 0.25 + 1e-12);
        }
        assert_eq!(sample_ball(&mut rng, 2, 2, 0.0, true), DMatrix::zeros(2, 2));
    }
}
