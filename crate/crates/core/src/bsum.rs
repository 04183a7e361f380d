//! Leader-side block solver: power allocation, transmit and receive beamforming and
//! surface reflection, cycled until the leader objective stops improving.
//!
//! All programs are built on a normalized copy of the leader's channel view in which
//! the destination noise is one and the surface-side links have unit mean power, so
//! every conic program sees quantities of moderate size. Results are mapped back to
//! physical units before they leave this module.

use std::fmt;
use std::time::{Duration, Instant};

use antijam_conic::{solve, CExpr, ComplexVar, ConicProgram, HermAffine, LinExpr, SolveResult, VarId};
use nalgebra::DVector;
use num_complex::Complex64;

use crate::game::{
    best_response_sinr, effective_channels, jammer_best_response, link_gains, rd_theta, utility_jammer, utility_leader_exact,
    JammerStrategy, LeaderStrategy,
};
use crate::linalg::{dominant_left_singular, herm_row, normalized, real, unit, CMat, CVec};
use crate::lmi::{certify_all, certify_psi_jd, lmi_phi_jd, lmi_psi_jd, lmi_psi_jr, LmiError, Operand, PhiMode, RobustAuxiliaries};
use crate::scene::{ChannelSet, SceneConfig};

/// Denominator floor for certificates and auxiliary expansion points.
const FLOOR: f64 = 1e-12;
/// Slack allowed when checking constraints of accepted iterates (normalized units).
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsumOptions {
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for BsumOptions {
    fn default() -> Self {
        Self { outer_tol: 1e-4, inner_tol: 1e-5, max_outer: 50, max_inner: 30 }
    }
}

/// Which channels the leader plans with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Estimates plus uncertainty radii.
    Robust,
    /// True jammer channels, no uncertainty.
    Perfect,
    /// Estimates treated as exact.
    NonRobust,
    /// Robust planning without the surface.
    NoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Robust, Scheme::Perfect, Scheme::NonRobust, Scheme::NoRis];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Robust => "robust",
            Scheme::Perfect => "perfect",
            Scheme::NonRobust => "nonrobust",
            Scheme::NoRis => "noris",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "robust" => Ok(Scheme::Robust),
            "perfect" => Ok(Scheme::Perfect),
            "nonrobust" => Ok(Scheme::NonRobust),
            "noris" => Ok(Scheme::NoRis),
            other => Err(format!("unknown scheme '{other}' (expected robust, perfect, nonrobust or noris)")),
        }
    }
}

/// Channel set the leader plans with under `scheme`. The true jammer-channel fields
/// are overwritten with the planning channels so nothing downstream can read the truth.
pub fn leader_view(ch: &ChannelSet, scheme: Scheme) -> ChannelSet {
    let mut v = match scheme {
        Scheme::Robust => ch.clone(),
        Scheme::NoRis => ch.without_surface(),
        Scheme::Perfect => ChannelSet { hhat_jd: ch.h_jd.clone(), hhat_jr: ch.h_jr.clone(), eps_jd: 0.0, eps_jr: 0.0, ..ch.clone() },
        Scheme::NonRobust => ChannelSet { eps_jd: 0.0, eps_jr: 0.0, ..ch.clone() },
    };
    v.h_jd = v.hhat_jd.clone();
    v.h_jr = v.hhat_jr.clone();
    v
}

/// True channels the strategy is evaluated on.
pub fn realization_channels(ch: &ChannelSet, scheme: Scheme) -> ChannelSet {
    match scheme {
        Scheme::NoRis => ch.without_surface(),
        _ => ch.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BsumError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("initialization failed: {0}")]
    Init(String),
    #[error("{block} block failed: {message}")]
    Block { block: &'static str, message: String },
}

impl From<LmiError> for BsumError {
    fn from(e: LmiError) -> Self {
        BsumError::Block { block: "certificate", message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// A block failed; the last consistent strategy is returned.
    BlockFailure { block: &'static str, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimes {
    pub power: Duration,
    pub transmit: Duration,
    pub receive: Duration,
    pub jammer: Duration,
    pub reflection: Duration,
    pub certify: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub outer_iterations: usize,
    pub receive_iterations: Vec<usize>,
    pub reflection_iterations: Vec<usize>,
    /// Leader objective after initialization and after every outer pass.
    pub utility_trace: Vec<f64>,
    pub receive_traces: Vec<Vec<f64>>,
    pub reflection_traces: Vec<Vec<f64>>,
    pub stage_times: StageTimes,
    pub termination: Termination,
    /// Whether the planned jamming power equals the anticipated best response (relative 1e-4).
    pub jamming_power_tight: bool,
    pub warnings: Vec<String>,
    /// Wall time of each surrogate iteration, build and solve, by block.
    pub receive_solve_times: Vec<Duration>,
    pub reflection_solve_times: Vec<Duration>,
}

impl SolverReport {
    fn new() -> Self {
        Self {
            outer_iterations: 0,
            receive_iterations: Vec::new(),
            reflection_iterations: Vec::new(),
            utility_trace: Vec::new(),
            receive_traces: Vec::new(),
            reflection_traces: Vec::new(),
            stage_times: StageTimes::default(),
            termination: Termination::MaxIterations,
            jamming_power_tight: false,
            warnings: Vec::new(),
            receive_solve_times: Vec::new(),
            reflection_solve_times: Vec::new(),
        }
    }
}

/// Solved leader problem in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderSolution {
    pub leader: LeaderStrategy,
    /// Follower strategy the leader anticipates on its own channel view.
    pub anticipated: JammerStrategy,
    /// Jamming power the leader plans for in the surface power budget.
    pub planned_p_j: f64,
    pub certificates: RobustAuxiliaries,
    /// Leader objective `sqrt(c_J P_S) |s| / sqrt(psi_JD) - c_S P_S`.
    pub objective: f64,
    /// Best-response SINR at the certified jamming gain, minus the power cost.
    pub worst_case_utility: f64,
    pub report: SolverReport,
}

/// Scales that bring a channel view to unit noise and unit surface-link power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    /// Applied to every path into the destination.
    pub total: f64,
    /// Applied to the links into the surface.
    pub incident: f64,
}

impl Normalizer {
    pub fn new(view: &ChannelSet, cfg: &SceneConfig) -> Self {
        let total = 1.0 / cfg.sigma_d2.sqrt();
        let count = (view.h_sr.len() + view.hhat_jr.len()) as f64;
        let power = view.h_sr.norm_squared() + view.hhat_jr.norm_squared();
        let incident = if count > 0.0 && power > 0.0 { (count / power).sqrt() } else { 1.0 };
        Self { total, incident }
    }

    pub fn channels(&self, v: &ChannelSet) -> ChannelSet {
        let (t, k) = (real(self.total), real(self.incident));
        ChannelSet {
            h_sd: &v.h_sd * t,
            h_sr: &v.h_sr * k,
            h_rd: &v.h_rd * real(self.total / self.incident),
            h_jd: &v.h_jd * t,
            h_jr: &v.h_jr * k,
            hhat_jd: &v.hhat_jd * t,
            hhat_jr: &v.hhat_jr * k,
            eps_jd: v.eps_jd * self.total * self.total,
            eps_jr: v.eps_jr * self.incident * self.incident,
        }
    }

    pub fn config(&self, cfg: &SceneConfig) -> SceneConfig {
        let k2 = self.incident * self.incident;
        SceneConfig {
            sigma_d2: cfg.sigma_d2 * self.total * self.total,
            sigma_r2: cfg.sigma_r2 * k2,
            p_r_max: cfg.p_r_max * k2,
            ..cfg.clone()
        }
    }

    /// Certificates back to physical units.
    pub fn unscale(&self, a: &RobustAuxiliaries) -> RobustAuxiliaries {
        let t2 = self.total * self.total;
        let k2 = self.incident * self.incident;
        RobustAuxiliaries {
            psi_jd: a.psi_jd / t2,
            phi_jd: a.phi_jd / t2,
            psi_jr: a.psi_jr / k2,
            rho1: a.rho1 / t2,
            rho2: a.rho2 / t2,
            ..*a
        }
    }
}

/// Current leader iterate with its planning quantities (normalized units).
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub leader: LeaderStrategy,
    pub p_j: f64,
    pub w_j: CVec,
    pub aux: RobustAuxiliaries,
}

/// Normalized problem data shared by all blocks.
#[derive(Debug, Clone)]
pub struct Context {
    pub view: ChannelSet,
    pub cfg: SceneConfig,
    pub opts: BsumOptions,
}

impl Context {
    pub fn new(view: &ChannelSet, cfg: &SceneConfig, opts: &BsumOptions) -> (Self, Normalizer) {
        let nz = Normalizer::new(view, cfg);
        (Self { view: nz.channels(view), cfg: nz.config(cfg), opts: *opts }, nz)
    }

    pub fn effective_source(&self, theta: &CVec) -> CMat {
        effective_channels(&self.view, theta).expect("shapes checked at entry").ht_sd
    }

    pub fn signal(&self, l: &LeaderStrategy) -> Complex64 {
        l.w_d.dotc(&(self.effective_source(&l.theta) * &l.w_s))
    }

    /// Noise at the destination, homogeneous in `w_D`.
    pub fn noise(&self, w_d: &CVec, theta: &CVec) -> f64 {
        let ris = if theta.is_empty() { 0.0 } else { herm_row(w_d, &rd_theta(&self.view.h_rd, theta)).norm_squared() };
        self.cfg.sigma_r2 * ris + self.cfg.sigma_d2 * w_d.norm_squared()
    }

    /// `||diag(H_SR w_S) theta||^2`
    pub fn incident(&self, w_s: &CVec, theta: &CVec) -> f64 {
        if theta.is_empty() {
            return 0.0;
        }
        let a = &self.view.h_sr * w_s;
        a.iter().zip(theta.iter()).map(|(x, t)| (x * t).norm_sqr()).sum()
    }

    pub fn surface_load(&self, it: &Iterate) -> f64 {
        let th = &it.leader.theta;
        it.leader.p_s * self.incident(&it.leader.w_s, th)
            + it.p_j * it.aux.psi_jr
            + self.cfg.sigma_r2 * th.norm_squared()
    }

    /// Largest best-response power the jammer may use over the uncertainty set.
    pub fn bracket(&self, it: &Iterate) -> f64 {
        let s = self.signal(&it.leader).norm();
        (it.leader.p_s.sqrt() * s) / (self.cfg.c_j.sqrt() * it.aux.phi_jd.max(FLOOR).sqrt())
            - self.noise(&it.leader.w_d, &it.leader.theta) / it.aux.psi_jd.max(FLOOR)
    }

    /// Leader objective `sqrt(c_J P_S) |s| / sqrt(psi_JD) - c_S P_S`.
    pub fn objective(&self, it: &Iterate) -> f64 {
        let s = self.signal(&it.leader).norm();
        (self.cfg.c_j * it.leader.p_s).sqrt() * s / it.aux.psi_jd.max(FLOOR).sqrt() - self.cfg.c_s * it.leader.p_s
    }

    /// Checks every planning constraint; the error names the first violated one.
    pub fn check(&self, it: &Iterate) -> Result<(), String> {
        let c = &self.cfg;
        let l = &it.leader;
        let tol = |x: f64| FEAS_TOL * x.abs().max(1.0);
        if l.p_s < -tol(0.0) || l.p_s > c.p_s_max + tol(c.p_s_max) {
            return Err(format!("source power {} outside [0, {}]", l.p_s, c.p_s_max));
        }
        if it.p_j < -tol(0.0) || it.p_j > c.p_j_max + tol(c.p_j_max) {
            return Err(format!("planned jamming power {} outside [0, {}]", it.p_j, c.p_j_max));
        }
        if let Some(t) = l.theta.iter().find(|t| t.norm() > c.lambda_max + tol(c.lambda_max)) {
            return Err(format!("reflection amplitude {} above {}", t.norm(), c.lambda_max));
        }
        let load = self.surface_load(it);
        if load > c.p_r_max + tol(c.p_r_max) {
            return Err(format!("surface power {load} above {}", c.p_r_max));
        }
        let b = self.bracket(it);
        if b > it.p_j + tol(it.p_j) {
            return Err(format!("anticipated jamming power {b} above planned {}", it.p_j));
        }
        Ok(())
    }

    pub fn certify(&self, l: &LeaderStrategy, w_j: &CVec) -> Result<RobustAuxiliaries, BsumError> {
        Ok(certify_all(&l.w_d, &l.theta, w_j, &self.view)?)
    }

    /// Follower direction the leader anticipates on its view.
    pub fn anticipated_direction(&self, l: &LeaderStrategy) -> CVec {
        let ht = effective_channels(&self.view, &l.theta).expect("shapes checked at entry").ht_jd;
        normalized(&ht.ad_mul(&l.w_d)).unwrap_or_else(|| unit(self.view.n_j(), 0))
    }

    /// Largest planned jamming power the surface budget admits, capped at `P_J_max`.
    pub fn largest_planned_power(&self, it: &Iterate) -> f64 {
        let l = &it.leader;
        let rest = self.cfg.p_r_max - l.p_s * self.incident(&l.w_s, &l.theta) - self.cfg.sigma_r2 * l.theta.norm_squared();
        if it.aux.psi_jr <= 0.0 {
            return if rest >= 0.0 { self.cfg.p_j_max } else { 0.0 };
        }
        (rest / it.aux.psi_jr).clamp(0.0, self.cfg.p_j_max)
    }
}

/// Rebuilds the normalized iterate of a solution on the view it was solved on.
pub fn iterate_at(ctx: &Context, sol: &LeaderSolution) -> Result<Iterate, BsumError> {
    let w_j = ctx.anticipated_direction(&sol.leader);
    let aux = ctx.certify(&sol.leader, &w_j)?;
    Ok(Iterate { leader: sol.leader.clone(), p_j: sol.planned_p_j, w_j, aux })
}

fn block_err(block: &'static str, message: impl Into<String>) -> BsumError {
    BsumError::Block { block, message: message.into() }
}

fn add<T>(block: &'static str, r: Result<T, antijam_conic::ConicError>) -> Result<T, BsumError> {
    r.map_err(|e| block_err(block, e.to_string()))
}

fn v(x: VarId) -> LinExpr {
    LinExpr::var(x)
}

fn k(c: f64) -> LinExpr {
    LinExpr::constant(c)
}

/// Outcome of the power-allocation block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub p_s: f64,
    pub p_j: f64,
    pub gamma: f64,
    pub objective: f64,
}

/// Optimal source power for fixed beamformers, reflection and certificates, with the
/// planned jamming power set to the largest value the surface budget admits.
pub fn power_allocation(ctx: &Context, it: &Iterate) -> Result<PowerAllocation, BsumError> {
    const B: &str = "power";
    let c = &ctx.cfg;
    let l = &it.leader;
    let s = ctx.signal(l).norm();
    let psi = it.aux.psi_jd.max(FLOOR);
    let phi = it.aux.phi_jd.max(FLOOR);
    let n = ctx.noise(&l.w_d, &l.theta);
    let a = c.c_j.sqrt() * s / psi.sqrt();
    let incident = ctx.incident(&l.w_s, &l.theta);
    let fixed_load = c.sigma_r2 * l.theta.norm_squared();
    if s <= FLOOR {
        // objective is -c_S P_S: stay silent
        let mut next = it.clone();
        next.leader.p_s = 0.0;
        let p_j = ctx.largest_planned_power(&next);
        return Ok(PowerAllocation { p_s: 0.0, p_j, gamma: 0.0, objective: 0.0 });
    }

    let mut p = ConicProgram::new();
    let gamma = p.add_var("gamma");
    let q = p.add_var("q");
    let pj = p.add_var("p_j");
    add(B, p.add_rotated_soc("q>=gamma^2", v(q) * 0.5, k(1.0), vec![v(gamma)]))?;
    add(B, p.add_ge("gamma>=0", v(gamma), k(0.0)))?;
    add(B, p.add_le("q<=P_S_max", v(q), k(c.p_s_max)))?;
    add(B, p.add_ge("p_j>=0", v(pj), k(0.0)))?;
    add(B, p.add_le("p_j<=P_J_max", v(pj), k(c.p_j_max)))?;
    add(B, p.add_le("surface", v(q) * incident + v(pj) * it.aux.psi_jr, k(c.p_r_max - fixed_load)))?;
    add(B, p.add_ge("bracket", v(pj), v(gamma) * (s / (c.c_j.sqrt() * phi.sqrt())) - n / psi))?;
    p.maximize(v(gamma) * a - v(q) * c.c_s);
    let r = solve(&p);
    if !r.is_optimal() {
        return Err(block_err(B, format!("solver status {}", r.status)));
    }
    let g = r.value(gamma).max(0.0);
    let p_s = (g * g).min(c.p_s_max);
    let mut next = it.clone();
    next.leader.p_s = p_s;
    let p_j = ctx.largest_planned_power(&next).max(0.0);
    Ok(PowerAllocation { p_s, p_j, gamma: g, objective: a * g - c.c_s * p_s })
}

/// Maximum-ratio transmit beamformer, or `e1` with a degeneracy flag.
pub fn transmit_beamforming(w_d: &CVec, ht_sd: &CMat) -> (CVec, bool) {
    match normalized(&ht_sd.ad_mul(w_d)) {
        Some(w) => (w, false),
        None => (unit(ht_sd.ncols(), 0), true),
    }
}

/// Expansion points and auxiliaries of the receive-beamforming surrogate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReceiveState {
    pub w_d0: CVec,
    pub mu0: f64,
    pub xi0: f64,
    pub psi_jd0: f64,
    pub psi_d0: f64,
    pub phi_d0: f64,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub phi_d: f64,
    pub psi_d: f64,
    /// Lifted `W_D` from the last surrogate solve.
    pub w_lifted: CMat,
}

/// Expansion points and auxiliaries of the reflection surrogate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReflectionState {
    pub theta0: CVec,
    pub mu0: f64,
    pub xi0: f64,
    pub psi_jd0: f64,
    pub psi_t0: f64,
    pub phi_t0: f64,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub phi_t: f64,
    pub psi_t: f64,
    /// Per-element signal coefficients `alpha_n = (w_D^H H_RD)_n (H_SR w_S)_n`.
    pub alpha: CVec,
    /// Direct-link signal `w_D^H H_SD w_S`.
    pub beta: Complex64,
    /// Per-element surface-noise weights `|(w_D^H H_RD)_n|^2`.
    pub e: DVector<f64>,
}

/// One inner loop's result.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub iterate: Iterate,
    /// Leader objective at the start followed by each surrogate optimum, in objective units.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub solve_times: Vec<Duration>,
    pub warning: Option<String>,
}

/// Auxiliary variables common to both surrogates.
struct RatioVars {
    psi: VarId,
    phi: VarId,
    num: VarId,
    den: VarId,
    mu: VarId,
    nu: VarId,
    xi: VarId,
}

struct Expansion {
    s0: Complex64,
    psi0: f64,
    noise0: f64,
}

impl Expansion {
    fn mu0(&self) -> f64 {
        self.s0.norm().sqrt().max(FLOOR)
    }
    fn den0(&self) -> f64 {
        self.psi0.max(FLOOR).sqrt()
    }
    fn xi0(&self) -> f64 {
        self.noise0.max(0.0).sqrt()
    }
}

/// Adds the ratio surrogate shared by both SCA blocks and sets the objective.
///
/// `s` is the affine signal, `noise_lin` an affine lower bound on the noise and
/// `psi`/`phi` the certificate variables, already tied to their robust blocks.
fn add_ratio_surrogate(
    p: &mut ConicProgram,
    block: &'static str,
    ctx: &Context,
    it: &Iterate,
    s: &CExpr,
    noise_lin: LinExpr,
    psi: VarId,
    phi: VarId,
    ex: &Expansion,
) -> Result<RatioVars, BsumError> {
    let c = &ctx.cfg;
    let num = p.add_var("phi_num");
    let z = p.add_var("z");
    let den = p.add_var("psi_den");
    let mu = p.add_var("mu");
    let nu = p.add_var("nu");
    let q = p.add_var("q");
    let xi = p.add_var("xi");
    let (mu0, den0, xi0, psi0) = (ex.mu0(), ex.den0(), ex.xi0(), ex.psi0.max(FLOOR));
    // num^4 <= 2 Re(conj(s0) s) - |s0|^2 <= |s|^2
    let lin_s = s.scale(ex.s0.conj()).re() * 2.0 - ex.s0.norm_sqr();
    add(block, p.add_rotated_soc("num^2<=z", v(z) * 0.5, k(1.0), vec![v(num)]))?;
    add(block, p.add_rotated_soc("z^2<=|s|^2", lin_s * 0.5, k(1.0), vec![v(z)]))?;
    // den^2 >= psi through its tangent
    add(block, p.add_ge("den^2>=psi", v(den) * (2.0 * den0) - den0 * den0, v(psi)))?;
    // mu^2 >= |s|
    add(block, p.add_soc("mu^2>=|s|", v(mu) * (2.0 * mu0) - mu0 * mu0, vec![s.re(), s.im()]))?;
    // nu^2 <= phi
    add(block, p.add_rotated_soc("nu^2<=phi", v(phi) * 0.5, k(1.0), vec![v(nu)]))?;
    // q >= mu^2 / nu >= |s| / sqrt(phi)
    add(block, p.add_rotated_soc("q>=mu^2/nu", v(q) * 0.5, v(nu), vec![v(mu)]))?;
    // xi^2 <= noise
    add(block, p.add_rotated_soc("xi^2<=noise", noise_lin * 0.5, k(1.0), vec![v(xi)]))?;
    // planned power covers the anticipated response: P_J >= sqrt(P_S/c_J) q - xi^2/psi
    let tangent = (v(xi) * (2.0 * xi0 * psi0) - v(psi) * (xi0 * xi0)) * (1.0 / (psi0 * psi0));
    add(block, p.add_ge("bracket", k(it.p_j), v(q) * (it.leader.p_s / c.c_j).sqrt() - tangent))?;
    // tangent of num^2 / den at the expansion point
    let phi0 = mu0;
    p.maximize((v(num) * (2.0 * phi0 * den0) - v(den) * (phi0 * phi0)) * (1.0 / (den0 * den0)));
    Ok(RatioVars { psi, phi, num, den, mu, nu, xi })
}

/// Converts a surrogate objective (a bound on `|s| / sqrt(psi)`) to objective units.
fn ratio_to_objective(ctx: &Context, it: &Iterate, ratio: f64) -> f64 {
    (ctx.cfg.c_j * it.leader.p_s).sqrt() * ratio - ctx.cfg.c_s * it.leader.p_s
}

/// Solves and records the time since `started`, which covers building the surrogate.
fn timed_solve(p: &ConicProgram, started: Instant, times: &mut Vec<Duration>) -> SolveResult {
    let r = solve(p);
    times.push(started.elapsed());
    r
}

fn hermitian_var(p: &mut ConicProgram, name: &str, n: usize) -> (Vec<Vec<CExpr>>, Vec<VarId>) {
    let mut m = vec![vec![CExpr::zero(); n]; n];
    let mut diag = Vec::new();
    for i in 0..n {
        let d = p.add_var(format!("{name}{i}{i}"));
        diag.push(d);
        m[i][i] = CExpr::term(d, real(1.0));
        for j in i + 1..n {
            let re = p.add_var(format!("{name}{i}{j}.re"));
            let im = p.add_var(format!("{name}{i}{j}.im"));
            let e = CExpr::term(re, real(1.0)) + CExpr::term(im, Complex64::new(0.0, 1.0));
            m[j][i] = e.conj();
            m[i][j] = e;
        }
    }
    (m, diag)
}

fn signal_expr_receive(w: &ComplexVar, h: &CVec) -> CExpr {
    let mut s = CExpr::zero();
    for i in 0..w.len() {
        s.add_scaled(&w.entry(i).conj(), h[i]);
    }
    s.compact()
}

/// Receive-beamforming surrogate loop for fixed powers, transmit beamformer,
/// reflection and jammer direction.
pub fn receive_beamforming_sca(
    ctx: &Context,
    start: &Iterate,
    state: &mut ReceiveState,
    max_inner: usize,
) -> Result<BlockOutcome, BsumError> {
    const B: &str = "receive";
    let mut cur = start.clone();
    let mut trace = vec![ctx.objective(&cur)];
    let mut times = Vec::new();
    let mut warning = None;
    let mut iterations = 0;
    if cur.leader.p_s <= 0.0 || ctx.signal(&cur.leader).norm() <= FLOOR {
        return Ok(BlockOutcome { iterate: cur, trace, iterations, solve_times: times, warning });
    }
    let nd = ctx.view.n_d();
    let h = ctx.effective_source(&cur.leader.theta) * &cur.leader.w_s;
    let rt = rd_theta(&ctx.view.h_rd, &cur.leader.theta);
    let g = &rt * rt.adjoint();
    while iterations < max_inner {
        let started = Instant::now();
        let w0 = cur.leader.w_d.clone();
        let ex = Expansion { s0: w0.dotc(&h), psi0: cur.aux.psi_jd, noise0: ctx.noise(&w0, &cur.leader.theta) };
        let mut p = ConicProgram::new();
        let w = p.add_complex("w_d", nd);
        let (wl, wl_diag) = hermitian_var(&mut p, "W", nd);
        let mut lift = HermAffine::zeros(nd + 1);
        for i in 0..nd {
            for j in i..nd {
                lift.set_herm(i, j, wl[i][j].clone());
            }
            lift.set_herm(i, nd, w.entry(i));
        }
        lift.set(nd, nd, CExpr::real(1.0));
        add(B, p.add_herm_psd("lift", &lift))?;
        let trace_w = wl_diag.iter().fold(LinExpr::zero(), |acc, d| acc + v(*d));
        add(B, p.add_eq("trace(W)=1", trace_w, k(1.0)))?;
        let psi = p.add_var("psi_jd");
        let phi = p.add_var("phi_jd");
        lmi_psi_jd(&mut p, "psi_jd", Operand::Var(&w), Operand::Fixed(&cur.leader.theta), &ctx.view, &v(psi))?;
        lmi_phi_jd(
            &mut p,
            "phi_jd",
            Operand::Var(&w),
            Operand::Fixed(&cur.leader.theta),
            PhiMode::ScaReceive { w0: &w0 },
            &ctx.view,
            &v(phi),
        )?;
        let s = signal_expr_receive(&w, &h);
        // tangent of the convex noise sigma_R^2 w^H G w + sigma_D^2 ||w||^2 at w0
        let gw0 = &g * &w0;
        let mut lin = CExpr::zero();
        for i in 0..nd {
            lin.add_scaled(&w.entry(i), (gw0[i] * ctx.cfg.sigma_r2 + w0[i] * ctx.cfg.sigma_d2).conj());
        }
        let noise0 = ctx.cfg.sigma_r2 * w0.dotc(&gw0).re + ctx.cfg.sigma_d2 * w0.norm_squared();
        let noise_lin = lin.re() * 2.0 - noise0;
        let rv = add_ratio_surrogate(&mut p, B, ctx, &cur, &s, noise_lin, psi, phi, &ex)?;
        let r = timed_solve(&p, started, &mut times);
        if !r.is_optimal() {
            warning = Some(format!("receive surrogate ended with status {}", r.status));
            break;
        }
        let w_raw = r.complex_value(&w);
        let scale = w_raw.norm_squared();
        if !(scale > FLOOR) {
            warning = Some("receive surrogate returned a vanishing beamformer".into());
            break;
        }
        let mut next = cur.clone();
        next.leader.w_d = w_raw.unscale(scale.sqrt());
        next.aux.psi_jd = r.value(rv.psi) / scale;
        next.aux.phi_jd = (r.value(rv.phi) / scale).max(0.0);
        let surrogate = ratio_to_objective(ctx, &cur, r.objective);
        let prev = *trace.last().unwrap();
        if let Err(e) = ctx.check(&next) {
            warning = Some(format!("receive iterate rejected: {e}"));
            break;
        }
        if surrogate < prev - 1e-9 * prev.abs().max(1.0) {
            warning = Some(format!("receive surrogate decreased ({surrogate} < {prev})"));
            break;
        }
        iterations += 1;
        trace.push(surrogate);
        *state = ReceiveState {
            w_d0: w0,
            mu0: ex.mu0(),
            xi0: ex.xi0(),
            psi_jd0: ex.psi0,
            psi_d0: ex.den0(),
            phi_d0: ex.mu0(),
            mu: r.value(rv.mu),
            nu: r.value(rv.nu),
            xi: r.value(rv.xi),
            phi_d: r.value(rv.num),
            psi_d: r.value(rv.den),
            w_lifted: nalgebra::DMatrix::from_fn(nd, nd, |i, j| wl[i][j].eval(&r.values)),
        };
        cur = next;
        if (surrogate - prev).abs() < ctx.opts.inner_tol {
            break;
        }
    }
    Ok(BlockOutcome { iterate: cur, trace, iterations, solve_times: times, warning })
}

/// Reflection surrogate loop for fixed powers and beamformers.
pub fn reflection_sca(
    ctx: &Context,
    start: &Iterate,
    state: &mut ReflectionState,
    max_inner: usize,
) -> Result<BlockOutcome, BsumError> {
    const B: &str = "reflection";
    let mut cur = start.clone();
    let mut trace = vec![ctx.objective(&cur)];
    let mut times = Vec::new();
    let mut warning = None;
    let mut iterations = 0;
    let n = ctx.view.n();
    if n == 0 || cur.leader.p_s <= 0.0 {
        return Ok(BlockOutcome { iterate: cur, trace, iterations, solve_times: times, warning });
    }
    let c = &ctx.cfg;
    let l = &cur.leader;
    let r_row = herm_row(&l.w_d, &ctx.view.h_rd);
    let a = &ctx.view.h_sr * &l.w_s;
    let alpha = r_row.component_mul(&a);
    let beta = l.w_d.dotc(&(&ctx.view.h_sd * &l.w_s));
    let e = r_row.map(|x| x.norm_sqr());
    let weights: Vec<f64> = a.iter().map(|x| (l.p_s * x.norm_sqr() + c.sigma_r2).sqrt()).collect();
    while iterations < max_inner {
        let started = Instant::now();
        let t0 = cur.leader.theta.clone();
        let ex = Expansion {
            s0: ctx.signal(&cur.leader),
            psi0: cur.aux.psi_jd,
            noise0: ctx.noise(&cur.leader.w_d, &t0),
        };
        if ex.s0.norm() <= FLOOR {
            break;
        }
        let mut p = ConicProgram::new();
        let th = p.add_complex("theta", n);
        for i in 0..n {
            add(B, p.add_soc("|theta|<=lambda", k(c.lambda_max), vec![v(th.re[i]), v(th.im[i])]))?;
        }
        let psi = p.add_var("psi_jd");
        let phi = p.add_var("phi_jd");
        let psi_jr = p.add_var("psi_jr");
        lmi_psi_jd(&mut p, "psi_jd", Operand::Fixed(&cur.leader.w_d), Operand::Var(&th), &ctx.view, &v(psi))?;
        lmi_phi_jd(
            &mut p,
            "phi_jd",
            Operand::Fixed(&cur.leader.w_d),
            Operand::Var(&th),
            PhiMode::ScaReflection { theta0: &t0 },
            &ctx.view,
            &v(phi),
        )?;
        lmi_psi_jr(&mut p, "psi_jr", Operand::Var(&th), &cur.w_j, &ctx.view, &v(psi_jr))?;
        let x: Vec<LinExpr> = (0..n)
            .flat_map(|i| [v(th.re[i]) * weights[i], v(th.im[i]) * weights[i]])
            .collect();
        add(B, p.add_rotated_soc("surface", (k(c.p_r_max) - v(psi_jr) * cur.p_j) * 0.5, k(1.0), x))?;
        let mut s = CExpr::constant(beta);
        for i in 0..n {
            s.add_scaled(&th.entry(i), alpha[i]);
        }
        let s = s.compact();
        let mut lin = CExpr::zero();
        for i in 0..n {
            lin.add_scaled(&th.entry(i), t0[i].conj() * (c.sigma_r2 * e[i]));
        }
        let ris0: f64 = (0..n).map(|i| e[i] * t0[i].norm_sqr()).sum();
        let noise_lin = lin.re() * 2.0 - c.sigma_r2 * ris0 + c.sigma_d2 * cur.leader.w_d.norm_squared();
        let rv = add_ratio_surrogate(&mut p, B, ctx, &cur, &s, noise_lin, psi, phi, &ex)?;
        let r = timed_solve(&p, started, &mut times);
        if !r.is_optimal() {
            warning = Some(format!("reflection surrogate ended with status {}", r.status));
            break;
        }
        let mut next = cur.clone();
        next.leader.theta = r.complex_value(&th);
        // Clip solver round-off on the amplitude bound.
        for t in next.leader.theta.iter_mut() {
            if t.norm() > c.lambda_max {
                *t *= c.lambda_max / t.norm();
            }
        }
        next.aux.psi_jd = r.value(rv.psi);
        next.aux.phi_jd = r.value(rv.phi).max(0.0);
        next.aux.psi_jr = r.value(psi_jr).max(0.0);
        let surrogate = ratio_to_objective(ctx, &cur, r.objective);
        let prev = *trace.last().unwrap();
        if let Err(e) = ctx.check(&next) {
            warning = Some(format!("reflection iterate rejected: {e}"));
            break;
        }
        if surrogate < prev - 1e-9 * prev.abs().max(1.0) {
            warning = Some(format!("reflection surrogate decreased ({surrogate} < {prev})"));
            break;
        }
        iterations += 1;
        trace.push(surrogate);
        *state = ReflectionState {
            theta0: t0,
            mu0: ex.mu0(),
            xi0: ex.xi0(),
            psi_jd0: ex.psi0,
            psi_t0: ex.den0(),
            phi_t0: ex.mu0(),
            mu: r.value(rv.mu),
            nu: r.value(rv.nu),
            xi: r.value(rv.xi),
            phi_t: r.value(rv.num),
            psi_t: r.value(rv.den),
            alpha: alpha.clone(),
            beta,
            e: e.clone(),
        };
        cur = next;
        if (surrogate - prev).abs() < ctx.opts.inner_tol {
            break;
        }
    }
    Ok(BlockOutcome { iterate: cur, trace, iterations, solve_times: times, warning })
}

/// Deterministic feasible starting point.
pub fn initialize(ctx: &Context) -> Result<Iterate, BsumError> {
    let ch = &ctx.view;
    let c = &ctx.cfg;
    let n = ch.n();
    let w_d = dominant_left_singular(&ch.h_sd);
    let (w_s, _) = transmit_beamforming(&w_d, &ch.h_sd);
    let amp = c.lambda_max / std::f64::consts::SQRT_2;
    let mut theta = CVec::from_element(n, real(amp));
    if n > 0 {
        let direct = w_d.dotc(&(&ch.h_sd * &w_s));
        let r_row = herm_row(&w_d, &ch.h_rd);
        let a = &ch.h_sr * &w_s;
        for i in 0..n {
            let alpha = r_row[i] * a[i];
            if alpha.norm() > 0.0 {
                let phase = if direct.norm() > 0.0 { direct.arg() } else { 0.0 } - alpha.arg();
                theta[i] = Complex64::from_polar(amp, phase);
            }
        }
    }
    let mut p_s = c.p_s_max / 2.0;
    for _ in 0..60 {
        let ht = effective_channels(ch, &theta).map_err(|e| BsumError::Init(e.to_string()))?.ht_sd;
        let w_d = dominant_left_singular(&ht);
        let (w_s, _) = transmit_beamforming(&w_d, &ht);
        let leader = LeaderStrategy { p_s, w_s, w_d, theta: theta.clone() };
        let w_j = ctx.anticipated_direction(&leader);
        let aux = ctx.certify(&leader, &w_j)?;
        let mut it = Iterate { leader, p_j: 0.0, w_j, aux };
        it.p_j = ctx.largest_planned_power(&it);
        if ctx.check(&it).is_ok() {
            return Ok(it);
        }
        p_s *= 0.5;
        theta *= real(0.5);
    }
    Err(BsumError::Init("no feasible starting point after 60 halvings".into()))
}

/// Runs the block cycle on the leader's channel view.
pub fn solve_leader(view: &ChannelSet, cfg: &SceneConfig, opts: &BsumOptions) -> Result<LeaderSolution, BsumError> {
    view.check_shapes().map_err(|e| BsumError::Input(e.to_string()))?;
    cfg.validate().map_err(|e| BsumError::Input(e.to_string()))?;
    if view.n() != cfg.n && view.n() != 0 {
        return Err(BsumError::Input(format!("view has {} surface elements, config {}", view.n(), cfg.n)));
    }
    let (ctx, nz) = Context::new(view, cfg, opts);
    let mut report = SolverReport::new();
    let t = Instant::now();
    let mut cur = initialize(&ctx)?;
    report.stage_times.certify += t.elapsed();
    report.utility_trace.push(ctx.objective(&cur));
    let mut rstate = ReceiveState::default();
    let mut tstate = ReflectionState::default();
    report.termination = Termination::MaxIterations;
    for _ in 0..opts.max_outer {
        match outer_pass(&ctx, &cur, &mut rstate, &mut tstate, &mut report) {
            Ok(next) => cur = next,
            Err(BsumError::Block { block, message }) => {
                report.termination = Termination::BlockFailure { block, message };
                break;
            }
            Err(e) => return Err(e),
        }
        report.outer_iterations += 1;
        let u = ctx.objective(&cur);
        let prev = *report.utility_trace.last().unwrap();
        report.utility_trace.push(u);
        if (u - prev).abs() < opts.outer_tol {
            report.termination = Termination::Converged;
            break;
        }
    }
    let bracket = ctx.bracket(&cur).max(0.0);
    report.jamming_power_tight = (cur.p_j - bracket).abs() <= 1e-4 * cur.p_j.abs().max(FLOOR);
    let objective = ctx.objective(&cur);
    let s = ctx.signal(&cur.leader).norm();
    let n = ctx.noise(&cur.leader.w_d, &cur.leader.theta);
    let worst = best_response_sinr(cur.leader.p_s, s, cur.aux.psi_jd, n, ctx.cfg.c_j, ctx.cfg.p_j_max)
        - ctx.cfg.c_s * cur.leader.p_s;
    // anticipated follower response on the leader's (physical) view
    let anticipated = jammer_best_response(view, &cur.leader, cfg).map_err(|e| BsumError::Input(e.to_string()))?;
    Ok(LeaderSolution {
        leader: cur.leader,
        anticipated,
        planned_p_j: cur.p_j,
        certificates: nz.unscale(&cur.aux),
        objective,
        worst_case_utility: worst,
        report,
    })
}

fn outer_pass(
    ctx: &Context,
    start: &Iterate,
    rstate: &mut ReceiveState,
    tstate: &mut ReflectionState,
    report: &mut SolverReport,
) -> Result<Iterate, BsumError> {
    let mut cur = start.clone();

    let t = Instant::now();
    let pa = power_allocation(ctx, &cur)?;
    let mut next = cur.clone();
    next.leader.p_s = pa.p_s;
    next.p_j = pa.p_j;
    if ctx.check(&next).is_ok() && ctx.objective(&next) >= ctx.objective(&cur) - 1e-9 {
        cur = next;
    } else {
        report.warnings.push("power allocation result rejected".into());
    }
    report.stage_times.power += t.elapsed();

    let t = Instant::now();
    let ht = ctx.effective_source(&cur.leader.theta);
    let (w_s, degenerate) = transmit_beamforming(&cur.leader.w_d, &ht);
    if !degenerate {
        let mut next = cur.clone();
        next.leader.w_s = w_s;
        if ctx.check(&next).is_ok() {
            cur = next;
        }
    }
    report.stage_times.transmit += t.elapsed();

    let before_receive = cur.clone();
    let t = Instant::now();
    let out = receive_beamforming_sca(ctx, &cur, rstate, ctx.opts.max_inner)?;
    if let Some(w) = out.warning.clone() {
        report.warnings.push(w);
    }
    report.receive_iterations.push(out.iterations);
    report.receive_traces.push(out.trace.clone());
    report.receive_solve_times.extend(out.solve_times.iter().copied());
    cur = out.iterate;
    report.stage_times.receive += t.elapsed();
    let t = Instant::now();
    if out.iterations > 0 {
        cur.aux = tighter(&cur.aux, &ctx.certify(&cur.leader, &cur.w_j)?);
    }
    report.stage_times.certify += t.elapsed();

    let t = Instant::now();
    let mut next = cur.clone();
    next.w_j = ctx.anticipated_direction(&cur.leader);
    report.stage_times.jammer += t.elapsed();
    let t = Instant::now();
    next.aux = ctx.certify(&next.leader, &next.w_j)?;
    report.stage_times.certify += t.elapsed();
    next.p_j = next.p_j.min(ctx.largest_planned_power(&next));
    if ctx.check(&next).is_ok() {
        cur = next;
    } else {
        report.warnings.push("jammer refresh infeasible; receive block reverted".into());
        cur = before_receive;
    }

    let t = Instant::now();
    let out = reflection_sca(ctx, &cur, tstate, ctx.opts.max_inner)?;
    if let Some(w) = out.warning.clone() {
        report.warnings.push(w);
    }
    report.reflection_iterations.push(out.iterations);
    report.reflection_traces.push(out.trace.clone());
    report.reflection_solve_times.extend(out.solve_times.iter().copied());
    cur = out.iterate;
    report.stage_times.reflection += t.elapsed();
    let t = Instant::now();
    if out.iterations > 0 {
        cur.aux = tighter(&cur.aux, &ctx.certify(&cur.leader, &cur.w_j)?);
    }
    report.stage_times.certify += t.elapsed();
    Ok(cur)
}

/// Keeps the sharper of two valid certificate sets, entry by entry.
fn tighter(a: &RobustAuxiliaries, b: &RobustAuxiliaries) -> RobustAuxiliaries {
    let pick_min = |x: f64, y: f64| if y < x { y } else { x };
    let pick_max = |x: f64, y: f64| if y > x { y } else { x };
    RobustAuxiliaries {
        psi_jd: pick_min(a.psi_jd, b.psi_jd),
        phi_jd: pick_max(a.phi_jd, b.phi_jd),
        psi_jr: pick_min(a.psi_jr, b.psi_jr),
        ..*b
    }
}

/// Strategy profile evaluated on the true channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub leader: LeaderStrategy,
    pub jammer: JammerStrategy,
    pub u_l: f64,
    pub u_j: f64,
    pub u_l_worst: f64,
    pub sinr: f64,
    /// `|P_J realized - P_J anticipated|`
    pub delta_p_j: f64,
    /// `|w_J^H w_J anticipated|`
    pub direction_overlap: f64,
}

/// Realizes the follower's true best response and evaluates both utilities.
///
/// `truth` carries the scene's estimates and radii next to the true channels; the
/// worst-case utility is certified over that uncertainty set for every scheme.
pub fn assemble_equilibrium(sol: &LeaderSolution, truth: &ChannelSet, cfg: &SceneConfig) -> Result<Equilibrium, BsumError> {
    let err = |e: crate::game::GameError| BsumError::Input(e.to_string());
    let jammer = jammer_best_response(truth, &sol.leader, cfg).map_err(err)?;
    let u_l = utility_leader_exact(truth, &sol.leader, &jammer, cfg).map_err(err)?;
    let u_j = utility_jammer(truth, &sol.leader, &jammer, cfg).map_err(err)?;
    let gains = link_gains(truth, &sol.leader, cfg.sigma_r2, cfg.sigma_d2).map_err(err)?;
    let (psi_jd, _) = certify_psi_jd(&sol.leader.w_d, &sol.leader.theta, truth)?;
    let p_s = sol.leader.p_s;
    let u_l_worst = best_response_sinr(p_s, gains.signal, psi_jd, gains.noise, cfg.c_j, cfg.p_j_max) - cfg.c_s * p_s;
    Ok(Equilibrium {
        sinr: u_l + cfg.c_s * p_s,
        delta_p_j: (jammer.p_j - sol.anticipated.p_j).abs(),
        direction_overlap: jammer.w_j.dotc(&sol.anticipated.w_j).norm(),
        leader: sol.leader.clone(),
        jammer,
        u_l,
        u_j,
        u_l_worst,
    })
}

/// Plans on the scheme's view and realizes on its true channels.
pub fn run_scheme(
    ch: &ChannelSet,
    cfg: &SceneConfig,
    scheme: Scheme,
    opts: &BsumOptions,
) -> Result<(LeaderSolution, Equilibrium), BsumError> {
    let view = leader_view(ch, scheme);
    let cfg_s = if scheme == Scheme::NoRis { SceneConfig { n: 0, ..cfg.clone() } } else { cfg.clone() };
    let sol = solve_leader(&view, &cfg_s, opts)?;
    let eq = assemble_equilibrium(&sol, &realization_channels(ch, scheme), &cfg_s)?;
    Ok((sol, eq))
}
