//! Verification suite: each check runs one end-to-end property at a chosen scale.

use std::fmt;
use std::time::Duration;

use antijam_conic::{residual_check, ConicProgram, LinExpr};
use antijam_core::bsum::{
    initialize, iterate_at, leader_view, receive_beamforming_sca, reflection_sca, run_scheme, solve_leader,
    BsumOptions, Context, ReceiveState, ReflectionState, Scheme,
};
use antijam_core::game::LeaderStrategy;
use antijam_core::linalg::{min_eig_herm, random_unit_vector, CVec};
use antijam_core::lmi::{certify_all, lmi_phi_jd, lmi_psi_jd, lmi_psi_jr, Operand, PhiMode, StackedJammerChannel};
use antijam_core::scene::{draw_scene, ChannelSet, SceneConfig};
use antijam_core::verify::{bisect_max, bisect_min, follower_gap, monotonicity_check, worst_case_sampler, Certificates, OracleConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::{run_experiment, ExperimentOutput, ExperimentSpec, Sweep};

/// Sizes of every check.
#[derive(Debug, Clone)]
pub struct CheckProfile {
    pub follower_scenes: usize,
    pub oracle: OracleConfig,
    pub soundness_instances: usize,
    pub soundness_n: usize,
    pub collapse_draws: usize,
    pub convergence_scenes: usize,
    pub fixed_point_seeds: Vec<u64>,
    pub trend_trials: usize,
    pub trend_base_n: usize,
    pub trend_values: [Vec<f64>; 4],
    pub complexity_sizes: Vec<usize>,
    /// Timed solves per size; the fastest median is kept.
    pub complexity_repeats: usize,
    pub consistency_draws: usize,
}

impl CheckProfile {
    /// Counts used by the acceptance run.
    pub fn full() -> Self {
        Self {
            follower_scenes: 100,
            oracle: OracleConfig::default(),
            soundness_instances: 50,
            soundness_n: 8,
            collapse_draws: 5,
            convergence_scenes: 100,
            fixed_point_seeds: vec![42],
            trend_trials: 20,
            trend_base_n: 8,
            trend_values: [vec![1.0, 3.0, 5.0], vec![1.0, 3.0, 5.0], vec![4.0, 8.0, 16.0], vec![0.0, 200.0, 400.0]],
            complexity_sizes: vec![8, 16, 32],
            complexity_repeats: 5,
            consistency_draws: 10,
        }
    }

    /// A few minutes on one core; used by the `verify` subcommand.
    pub fn quick() -> Self {
        Self {
            follower_scenes: 20,
            oracle: OracleConfig { directions: 2_000, boundary_samples: 2_000, ..OracleConfig::default() },
            soundness_instances: 3,
            soundness_n: 4,
            collapse_draws: 1,
            convergence_scenes: 3,
            fixed_point_seeds: vec![42],
            trend_trials: 3,
            trend_base_n: 4,
            trend_values: [vec![1.0, 5.0], vec![1.0, 5.0], vec![4.0, 8.0], vec![0.0, 400.0]],
            complexity_sizes: vec![8, 16, 32],
            complexity_repeats: 2,
            consistency_draws: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Labels of failed sub-properties, for checks that have them.
    pub failed_parts: Vec<&'static str>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {} {}: {verdict} ({})", self.id, self.name, self.detail)
    }
}

fn outcome(id: u32, name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { id, name, passed, detail, failed_parts: Vec::new() }
}

fn scene(seed: u64, n: usize) -> (ChannelSet, SceneConfig) {
    let cfg = SceneConfig { seed, n, ..SceneConfig::default() };
    (draw_scene(&cfg).expect("default geometry is valid"), cfg)
}

fn random_leader(rng: &mut ChaCha8Rng, cfg: &SceneConfig) -> LeaderStrategy {
    LeaderStrategy {
        p_s: cfg.p_s_max * rng.random::<f64>(),
        w_s: random_unit_vector(rng, cfg.n_s),
        w_d: random_unit_vector(rng, cfg.n_d),
        theta: CVec::from_fn(cfg.n, |_, _| {
            Complex64::from_polar(cfg.lambda_max * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>())
        }),
    }
}

/// Closed-form follower response against the brute-force oracle.
pub fn follower_dominance(p: &CheckProfile) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf011);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for seed in 0..p.follower_scenes as u64 {
        let (ch, cfg) = scene(1000 + seed, 8);
        let leader = random_leader(&mut rng, &cfg);
        let oc = OracleConfig { seed, ..p.oracle.clone() };
        match follower_gap(&ch, &leader, &cfg, &oc) {
            Ok((_, gap)) => {
                worst = worst.max(gap);
                if gap > 1e-6 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        1,
        "follower closed-form dominance",
        failures == 0,
        format!("{} scenes, largest oracle excess {worst:.3e}, {failures} over 1e-6", p.follower_scenes),
    )
}

/// Certificates of solved robust instances against sampled channel errors.
pub fn certificate_soundness(p: &CheckProfile) -> CheckOutcome {
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for k in 0..p.soundness_instances as u64 {
        let (ch, cfg) = scene(2000 + k, p.soundness_n);
        let view = leader_view(&ch, Scheme::Robust);
        let sol = match solve_leader(&view, &cfg, &BsumOptions::default()) {
            Ok(s) => s,
            Err(e) => {
                bad.push(format!("seed {}: {e}", 2000 + k));
                continue;
            }
        };
        // compare in normalized units so the tolerance is relative to the noise floor
        let (ctx, nz) = Context::new(&view, &cfg, &BsumOptions::default());
        let w_j = ctx.anticipated_direction(&sol.leader);
        let c = &sol.certificates;
        let (t2, k2) = (nz.total * nz.total, nz.incident * nz.incident);
        let cert = Certificates { psi_jd: c.psi_jd * t2, phi_jd: c.phi_jd * t2, psi_jr: c.psi_jr * k2 };
        let oc = OracleConfig { seed: k, ..p.oracle.clone() };
        let s = worst_case_sampler(&sol.leader.w_d, &sol.leader.theta, &w_j, &ctx.view, &oc);
        let v = s.violations(&cert, 1.0).worst();
        worst = worst.max(v);
        if v > 1e-6 {
            bad.push(format!("seed {}: violation {v:.3e}", 2000 + k));
        }
    }
    outcome(
        2,
        "robust certificate soundness",
        bad.is_empty(),
        format!("{} instances, worst relative violation {worst:.3e}{}", p.soundness_instances, list(&bad)),
    )
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; {}", items.iter().take(5).cloned().collect::<Vec<_>>().join("; "))
    }
}

/// With zero radius every certificate is the nominal value and robust planning is perfect planning.
pub fn zero_radius_collapse(p: &CheckProfile) -> CheckOutcome {
    let mut lmi_err = 0.0f64;
    let mut util_err = 0.0f64;
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2e50);
    for k in 0..p.collapse_draws as u64 {
        let cfg = SceneConfig { seed: 3000 + k, delta: 0.0, ..SceneConfig::default() };
        let ch = draw_scene(&cfg).expect("default geometry is valid");
        let view = leader_view(&ch, Scheme::Robust);
        let (ctx, _) = Context::new(&view, &cfg, &BsumOptions::default());
        let nch = &ctx.view;
        let leader = random_leader(&mut rng, &cfg);
        let w_j = random_unit_vector(&mut rng, cfg.n_j);
        let g = StackedJammerChannel::new(&leader.w_d, &leader.theta, nch).nominal_gain();
        let hw = &nch.hhat_jr * &w_j;
        let gr: f64 = hw.iter().zip(leader.theta.iter()).map(|(a, t)| (a * t).norm_sqr()).sum();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        match bisection_values(&leader, &w_j, nch) {
            Some((bp, bf, br)) => lmi_err = lmi_err.max(rel(bp, g)).max(rel(bf, g)).max(rel(br, gr)),
            None => notes.push(format!("seed {}: block construction failed", 3000 + k)),
        }
        match certify_all(&leader.w_d, &leader.theta, &w_j, nch) {
            Ok(a) => lmi_err = lmi_err.max(rel(a.psi_jd, g)).max(rel(a.phi_jd, g)).max(rel(a.psi_jr, gr)),
            Err(e) => notes.push(format!("seed {}: {e}", 3000 + k)),
        }
        let robust = run_scheme(&ch, &cfg, Scheme::Robust, &BsumOptions::default());
        let perfect = run_scheme(&ch, &cfg, Scheme::Perfect, &BsumOptions::default());
        match (robust, perfect) {
            (Ok((_, r)), Ok((_, q))) => util_err = util_err.max((r.u_l - q.u_l).abs()),
            _ => notes.push(format!("seed {}: solve failed", 3000 + k)),
        }
    }
    outcome(
        3,
        "zero-radius collapse",
        notes.is_empty() && lmi_err <= 1e-6 && util_err <= 1e-4,
        format!("{} draws, certificate error {lmi_err:.3e} (<= 1e-6), utility gap {util_err:.3e} (<= 1e-4){}", p.collapse_draws, list(&notes)),
    )
}

/// Smallest feasible upper bounds and largest feasible lower bound, by bisection on
/// each block's eigenvalues or residuals.
fn bisection_values(leader: &LeaderStrategy, w_j: &CVec, ch: &ChannelSet) -> Option<(f64, f64, f64)> {
    let (w, th) = (&leader.w_d, &leader.theta);
    let g = StackedJammerChannel::new(w, th, ch).nominal_gain();
    let mut p = ConicProgram::new();
    let x = p.add_var("psi");
    let blk = lmi_psi_jd(&mut p, "psi", Operand::Fixed(w), Operand::Fixed(th), ch, &LinExpr::var(x)).ok()?;
    let hi = 10.0 * g + 1.0;
    let bp = bisect_min(|v| min_eig_herm(&blk.block.eval(&[v])) >= 0.0, 0.0, hi, 100);

    let mut p = ConicProgram::new();
    let x = p.add_var("jr");
    let blk = lmi_psi_jr(&mut p, "jr", Operand::Fixed(th), w_j, ch, &LinExpr::var(x)).ok()?;
    let hw = &ch.hhat_jr * w_j;
    let gr: f64 = hw.iter().zip(th.iter()).map(|(a, t)| (a * t).norm_sqr()).sum();
    let br = bisect_min(|v| min_eig_herm(&blk.block.eval(&[v])) >= 0.0, 0.0, 10.0 * gr + 1.0, 100);

    let mut p = ConicProgram::new();
    let x = p.add_var("phi");
    lmi_phi_jd(&mut p, "phi", Operand::Fixed(w), Operand::Fixed(th), PhiMode::Exact, ch, &LinExpr::var(x)).ok()?;
    let bf = bisect_max(|v| residual_check(&p, &[v]).0 <= 0.0, 0.0, hi, 100);
    Some((bp, bf, br))
}

/// Outer utility traces of robust solves on seeded default scenes.
pub fn monotone_convergence(p: &CheckProfile) -> CheckOutcome {
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..p.convergence_scenes as u64 {
        let (ch, cfg) = scene(seed, SceneConfig::default().n);
        match solve_leader(&leader_view(&ch, Scheme::Robust), &cfg, &BsumOptions::default()) {
            Ok(sol) => {
                let r = &sol.report;
                let mono = monotonicity_check(&r.utility_trace, 1e-6);
                let done = matches!(r.termination, antijam_core::bsum::Termination::Converged) && r.outer_iterations <= 50;
                if mono.is_ok() && done {
                    good += 1;
                } else {
                    notes.push(format!("seed {seed}: monotone {:?}, {:?} after {}", mono, r.termination, r.outer_iterations));
                }
            }
            Err(e) => notes.push(format!("seed {seed}: {e}")),
        }
    }
    let need = (p.convergence_scenes * 95).div_ceil(100);
    outcome(
        4,
        "BSUM monotone convergence",
        good >= need,
        format!("{good}/{} scenes monotone and converged (need {need}){}", p.convergence_scenes, list(&notes)),
    )
}

/// Inner surrogate traces and the fixed-point property at converged block solutions.
pub fn inner_loops(p: &CheckProfile) -> CheckOutcome {
    let tight = BsumOptions { inner_tol: 1e-10, max_inner: 200, ..BsumOptions::default() };
    let mut notes = Vec::new();
    let mut worst_move = 0.0f64;
    let mut traces = 0;
    for &seed in &p.fixed_point_seeds {
        let (ch, cfg) = scene(seed, SceneConfig::default().n);
        let view = leader_view(&ch, Scheme::Robust);
        let sol = match solve_leader(&view, &cfg, &BsumOptions::default()) {
            Ok(s) => s,
            Err(e) => {
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        for (k, t) in sol.report.receive_traces.iter().chain(&sol.report.reflection_traces).enumerate() {
            traces += 1;
            if let Err(i) = monotonicity_check(t, 1e-9 * t[0].abs().max(1.0)) {
                notes.push(format!("seed {seed}: inner trace {k} drops at step {i}"));
            }
        }
        let (ctx, _) = Context::new(&view, &cfg, &tight);
        let Ok(start) = iterate_at(&ctx, &sol).or_else(|_| initialize(&ctx)) else {
            notes.push(format!("seed {seed}: cannot rebuild the iterate"));
            continue;
        };
        // run each block to its own fixed point, then re-solve once there
        let rx = receive_beamforming_sca(&ctx, &start, &mut ReceiveState::default(), 200);
        let at = rx.and_then(|o| {
            let mut it = o.iterate;
            it.aux = ctx.certify(&it.leader, &it.w_j)?;
            let again = receive_beamforming_sca(&ctx, &it, &mut ReceiveState::default(), 1)?;
            worst_move = worst_move.max((again.trace.last().unwrap() - again.trace[0]).abs());
            Ok(it)
        });
        let th = at.and_then(|it| {
            let o = reflection_sca(&ctx, &it, &mut ReflectionState::default(), 200)?;
            let mut it = o.iterate;
            it.aux = ctx.certify(&it.leader, &it.w_j)?;
            let again = reflection_sca(&ctx, &it, &mut ReflectionState::default(), 1)?;
            worst_move = worst_move.max((again.trace.last().unwrap() - again.trace[0]).abs());
            Ok(())
        });
        if let Err(e) = th {
            notes.push(format!("seed {seed}: {e}"));
        }
    }
    outcome(
        5,
        "SCA inner monotonicity and fixed point",
        notes.is_empty() && worst_move < 1e-6,
        format!("{traces} inner traces monotone, largest fixed-point move {worst_move:.3e} (< 1e-6){}", list(&notes)),
    )
}

/// The four sweeps used by the trend and paradox checks.
#[derive(Debug, Clone)]
pub struct TrendData {
    pub runs: Vec<(Sweep, ExperimentOutput)>,
}

impl TrendData {
    pub fn get(&self, sweep: Sweep) -> &ExperimentOutput {
        &self.runs.iter().find(|r| r.0 == sweep).expect("every sweep is run").1
    }
}

pub fn trend_runs(p: &CheckProfile) -> Result<TrendData, crate::experiment::HarnessError> {
    let mut runs = Vec::new();
    for (i, sweep) in Sweep::ALL.into_iter().enumerate() {
        let mut spec = ExperimentSpec::new(sweep);
        spec.values = p.trend_values[i].clone();
        spec.trials = p.trend_trials;
        spec.base = SceneConfig { n: p.trend_base_n, ..SceneConfig::default() };
        runs.push((sweep, run_experiment(&spec)?));
    }
    Ok(TrendData { runs })
}

fn series(out: &ExperimentOutput, scheme: Scheme, metric: fn(&crate::experiment::ResultRow) -> f64) -> Vec<(f64, f64)> {
    out.means().filter(|r| r.scheme == scheme.name()).map(|r| (r.value, metric(r))).collect()
}

fn increasing(s: &[(f64, f64)]) -> bool {
    s.windows(2).all(|w| w[1].1 >= w[0].1) && s.last().map(|l| l.1 > s[0].1).unwrap_or(false)
}

fn decreasing(s: &[(f64, f64)]) -> bool {
    s.windows(2).all(|w| w[1].1 <= w[0].1) && s.last().map(|l| l.1 < s[0].1).unwrap_or(false)
}

fn show(s: &[(f64, f64)]) -> String {
    s.iter().map(|(v, m)| format!("{v}:{m:.4}")).collect::<Vec<_>>().join(" ")
}

/// Direction and ordering of paired means across the four sweeps.
pub fn trend_reproduction(d: &TrendData) -> CheckOutcome {
    let ul = |r: &crate::experiment::ResultRow| r.u_l;
    let uj = |r: &crate::experiment::ResultRow| r.u_j;
    let mut failed: Vec<(&'static str, String)> = Vec::new();
    let aris = [Scheme::Robust, Scheme::Perfect, Scheme::NonRobust];
    for s in Scheme::ALL {
        let cj = d.get(Sweep::Cj);
        if !increasing(&series(cj, s, ul)) {
            failed.push(("a", format!("u_L vs c_J {s}: {}", show(&series(cj, s, ul)))));
        }
        if !decreasing(&series(cj, s, uj)) {
            failed.push(("a", format!("u_J vs c_J {s}: {}", show(&series(cj, s, uj)))));
        }
        let cs = d.get(Sweep::Cs);
        if !decreasing(&series(cs, s, ul)) {
            failed.push(("b", format!("u_L vs c_S {s}: {}", show(&series(cs, s, ul)))));
        }
        let xj = d.get(Sweep::Xj);
        if !decreasing(&series(xj, s, ul)) {
            failed.push(("e", format!("u_L vs x_J {s}: {}", show(&series(xj, s, ul)))));
        }
    }
    let n = d.get(Sweep::N);
    for s in aris {
        if !increasing(&series(n, s, ul)) {
            failed.push(("d", format!("u_L vs N {s}: {}", show(&series(n, s, ul)))));
        }
        if !decreasing(&series(n, s, uj)) {
            failed.push(("d", format!("u_J vs N {s}: {}", show(&series(n, s, uj)))));
        }
    }
    for metric in [ul, uj] {
        let flat = series(n, Scheme::NoRis, metric);
        let spread = flat.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max)
            - flat.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        if spread > 1e-9 * flat.iter().map(|x| x.1.abs()).fold(1.0, f64::max) {
            failed.push(("d", format!("noris not flat in N: {}", show(&flat))));
        }
    }
    let mut points = 0;
    let mut worst_case_order = 0;
    for (sweep, out) in &d.runs {
        for v in out.means().filter(|r| r.scheme == Scheme::Robust.name()).map(|r| r.value) {
            points += 1;
            let m = |s: Scheme| out.mean(v, s).map(|r| r.u_l).unwrap_or(f64::NAN);
            let w = |s: Scheme| out.mean(v, s).map(|r| r.u_l_worst).unwrap_or(f64::NAN);
            if w(Scheme::Robust) >= w(Scheme::NonRobust) {
                worst_case_order += 1;
            }
            let (p, r, nr, no) = (m(Scheme::Perfect), m(Scheme::Robust), m(Scheme::NonRobust), m(Scheme::NoRis));
            if !(p >= r && r >= nr && r >= no) {
                failed.push((
                    "c",
                    format!(
                        "{sweep}={v}: perfect {p:.4} robust {r:.4} nonrobust {nr:.4} noris {no:.4} (worst-case robust {:.4} nonrobust {:.4})",
                        w(Scheme::Robust),
                        w(Scheme::NonRobust)
                    ),
                ));
            }
        }
    }
    let mut parts: Vec<&'static str> = failed.iter().map(|f| f.0).collect();
    parts.dedup();
    let summary = ["a", "b", "c", "d", "e"]
        .iter()
        .map(|p| format!("({p}) {}", if parts.contains(p) { "fail" } else { "ok" }))
        .collect::<Vec<_>>()
        .join(" ");
    let detail = format!(
        "{summary}; {points} sweep points; certified worst-case u_L robust >= nonrobust at {worst_case_order}/{points}{}",
        if failed.is_empty() {
            String::new()
        } else {
            format!("; {}", failed.iter().map(|f| format!("({}) {}", f.0, f.1)).collect::<Vec<_>>().join("; "))
        }
    );
    let mut o = outcome(6, "trend reproduction", failed.is_empty(), detail);
    o.failed_parts = parts;
    o
}

/// Mean jammer utility of robust versus non-robust planning over the c_J sweep.
pub fn nonrobust_paradox(d: &TrendData) -> CheckOutcome {
    let cj = d.get(Sweep::Cj);
    let uj = |r: &crate::experiment::ResultRow| r.u_j;
    let r = series(cj, Scheme::Robust, uj);
    let n = series(cj, Scheme::NonRobust, uj);
    let mean = |s: &[(f64, f64)]| s.iter().map(|x| x.1).sum::<f64>() / s.len().max(1) as f64;
    let (mr, mn) = (mean(&r), mean(&n));
    outcome(
        7,
        "non-robust paradox",
        mr >= mn,
        format!("mean u_J robust {mr:.4} vs nonrobust {mn:.4}; per point robust [{}] nonrobust [{}]", show(&r), show(&n)),
    )
}

/// Median wall time of one reflection surrogate solve against the problem dimension.
pub fn complexity_sanity(p: &CheckProfile) -> CheckOutcome {
    let opts = BsumOptions { max_outer: 2, ..BsumOptions::default() };
    let mut best = vec![f64::INFINITY; p.complexity_sizes.len()];
    let mut notes = Vec::new();
    // Sizes are interleaved within each repeat so slow periods hit every size alike.
    for _ in 0..p.complexity_repeats.max(1) {
        for (k, &n) in p.complexity_sizes.iter().enumerate() {
            let (ch, cfg) = scene(77, n);
            match solve_leader(&leader_view(&ch, Scheme::Robust), &cfg, &opts) {
                Ok(sol) if !sol.report.reflection_solve_times.is_empty() => {
                    best[k] = best[k].min(median(&sol.report.reflection_solve_times));
                }
                Ok(_) => notes.push(format!("N={n}: no reflection solves recorded")),
                Err(e) => notes.push(format!("N={n}: {e}")),
            }
        }
    }
    notes.dedup();
    let d = SceneConfig::default();
    let pts: Vec<(f64, f64)> = p
        .complexity_sizes
        .iter()
        .zip(&best)
        .filter(|(_, t)| t.is_finite())
        .map(|(&n, &t)| ((d.n_j * (n + d.n_d) + 1) as f64, t))
        .collect();
    let slope = loglog_slope(&pts);
    let shown: Vec<String> = pts.iter().map(|(d, t)| format!("n={d}: {:.1} ms", t * 1e3)).collect();
    outcome(
        8,
        "complexity sanity",
        notes.is_empty() && (2.0..=4.5).contains(&slope),
        format!("log-log slope {slope:.2} in [2, 4.5]; {}{}", shown.join(", "), list(&notes)),
    )
}

fn median(v: &[Duration]) -> f64 {
    let mut x: Vec<f64> = v.iter().map(Duration::as_secs_f64).collect();
    x.sort_by(f64::total_cmp);
    x[x.len() / 2]
}

/// Least-squares slope of `ln t` against `ln n`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Anticipated and realized follower strategies under perfect information.
pub fn equilibrium_consistency(p: &CheckProfile) -> CheckOutcome {
    let mut worst_dp = 0.0f64;
    let mut worst_overlap = 1.0f64;
    let mut notes = Vec::new();
    let mut p_j_max = 0.0;
    for k in 0..p.consistency_draws as u64 {
        let (ch, cfg) = scene(4000 + k, SceneConfig::default().n);
        p_j_max = cfg.p_j_max;
        match run_scheme(&ch, &cfg, Scheme::Perfect, &BsumOptions::default()) {
            Ok((_, eq)) => {
                worst_dp = worst_dp.max(eq.delta_p_j);
                worst_overlap = worst_overlap.min(eq.direction_overlap);
            }
            Err(e) => notes.push(format!("seed {}: {e}", 4000 + k)),
        }
    }
    outcome(
        9,
        "equilibrium consistency",
        notes.is_empty() && worst_dp <= 1e-4 * p_j_max && worst_overlap >= 1.0 - 1e-6,
        format!(
            "{} draws, max |dP_J| {worst_dp:.3e} (<= {:.1e}), min overlap {worst_overlap:.9}{}",
            p.consistency_draws,
            1e-4 * p_j_max,
            list(&notes)
        ),
    )
}

/// Runs every check in order.
pub fn run_all(p: &CheckProfile) -> Vec<CheckOutcome> {
    let mut out = vec![
        follower_dominance(p),
        certificate_soundness(p),
        zero_radius_collapse(p),
        monotone_convergence(p),
        inner_loops(p),
    ];
    match trend_runs(p) {
        Ok(d) => {
            out.push(trend_reproduction(&d));
            out.push(nonrobust_paradox(&d));
        }
        Err(e) => {
            out.push(outcome(6, "trend reproduction", false, e.to_string()));
            out.push(outcome(7, "non-robust paradox", false, e.to_string()));
        }
    }
    out.push(complexity_sanity(p));
    out.push(equilibrium_consistency(p));
    out
}
