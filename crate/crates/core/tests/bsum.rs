use antijam_core::bsum::{
    assemble_equilibrium, initialize, leader_view, power_allocation, realization_channels, receive_beamforming_sca,
    reflection_sca, run_scheme, solve_leader, transmit_beamforming, BsumOptions, Context, Iterate, LeaderSolution,
    ReceiveState, ReflectionState, Scheme,
};
use antijam_core::game::{best_response_sinr, jammer_best_response, link_gains, utility_leader_exact};
use antijam_core::linalg::{random_unit_vector, unit, CMat};
use antijam_core::lmi::certify_all;
use antijam_core::scene::{draw_scene, random_channel_set, ChannelSet, SceneConfig};
use antijam_core::verify::monotonicity_check;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_scene(seed: u64) -> (ChannelSet, SceneConfig) {
    let cfg = SceneConfig { seed, ..SceneConfig::default() };
    (draw_scene(&cfg).unwrap(), cfg)
}

fn tight() -> BsumOptions {
    BsumOptions { inner_tol: 1e-10, max_inner: 200, ..BsumOptions::default() }
}

fn started(view: &ChannelSet, cfg: &SceneConfig, opts: &BsumOptions) -> (Context, Iterate) {
    let (ctx, _) = Context::new(view, cfg, opts);
    let it = initialize(&ctx).unwrap();
    (ctx, it)
}

fn recertified(ctx: &Context, it: &Iterate) -> Iterate {
    let mut it = it.clone();
    it.aux = ctx.certify(&it.leader, &it.w_j).unwrap();
    it
}

#[test]
fn scheme_names_round_trip() {
    for s in Scheme::ALL {
        assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        assert_eq!(s.to_string(), s.name());
    }
    assert!("robustt".parse::<Scheme>().is_err());
}

#[test]
fn leader_views_hide_the_truth() {
    let (ch, _) = default_scene(3);
    let r = leader_view(&ch, Scheme::Robust);
    assert_eq!(r.h_jd, ch.hhat_jd);
    assert_eq!(r.h_jr, ch.hhat_jr);
    assert_eq!(r.eps_jd, ch.eps_jd);
    let p = leader_view(&ch, Scheme::Perfect);
    assert_eq!(p.hhat_jd, ch.h_jd);
    assert_eq!(p.eps_jr, 0.0);
    let nr = leader_view(&ch, Scheme::NonRobust);
    assert_eq!(nr.hhat_jd, ch.hhat_jd);
    assert_eq!(nr.eps_jd, 0.0);
    let no = leader_view(&ch, Scheme::NoRis);
    assert_eq!(no.n(), 0);
    assert_eq!(no.h_jd, ch.hhat_jd);
    assert_eq!(realization_channels(&ch, Scheme::NoRis).h_jd, ch.h_jd);
    assert_eq!(realization_channels(&ch, Scheme::NoRis).n(), 0);
}

#[test]
fn power_allocation_interior_optimum_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ch = random_channel_set(&mut rng, 3, 2, 2, 4, 0.1);
    let cfg = SceneConfig {
        n: 4,
        p_s_max: 1e3,
        p_j_max: 1e6,
        p_r_max: 1e9,
        sigma_d2: 1.0,
        sigma_r2: 0.1,
        c_s: 1.0,
        c_j: 0.5,
        ..SceneConfig::default()
    };
    let (ctx, it) = started(&ch, &cfg, &BsumOptions::default());
    let pa = power_allocation(&ctx, &it).unwrap();
    let s = ctx.signal(&it.leader).norm();
    let a = ctx.cfg.c_j.sqrt() * s / it.aux.psi_jd.sqrt();
    let want = a / (2.0 * ctx.cfg.c_s);
    assert!((pa.gamma - want).abs() <= 1e-6 * want.max(1.0), "{} vs {want}", pa.gamma);
    assert!((pa.p_s - want * want).abs() <= 1e-5 * (want * want).max(1.0));

    // 100 x 100 grid over (gamma, P_J) honouring every constraint of the block
    let phi = it.aux.phi_jd;
    let noise = ctx.noise(&it.leader.w_d, &it.leader.theta);
    let inc = ctx.incident(&it.leader.w_s, &it.leader.theta);
    let fixed = ctx.cfg.sigma_r2 * it.leader.theta.norm_squared();
    let g_hi = ctx.cfg.p_s_max.sqrt().min(4.0 * want);
    let mut best = f64::NEG_INFINITY;
    for i in 0..100 {
        let g = g_hi * i as f64 / 99.0;
        for j in 0..100 {
            let pj = ctx.cfg.p_j_max * j as f64 / 99.0;
            let ok = pj >= g * s / (ctx.cfg.c_j.sqrt() * phi.sqrt()) - noise / it.aux.psi_jd
                && g * g * inc + pj * it.aux.psi_jr + fixed <= ctx.cfg.p_r_max;
            if ok {
                best = best.max(a * g - ctx.cfg.c_s * g * g);
            }
        }
    }
    assert!(pa.objective >= best - 1e-6, "{} < grid {best}", pa.objective);
}

#[test]
fn power_allocation_with_no_signal_is_silent() {
    let (ch, cfg) = default_scene(5);
    let (ctx, mut it) = started(&leader_view(&ch, Scheme::Robust), &cfg, &BsumOptions::default());
    // a receive beamformer orthogonal to the effective source channel
    let h = ctx.effective_source(&it.leader.theta) * &it.leader.w_s;
    let mut w = unit(h.len(), 0);
    if h.len() > 1 {
        w = antijam_core::linalg::CVec::from_fn(h.len(), |i, _| match i {
            0 => -h[1].conj(),
            1 => h[0].conj(),
            _ => num_complex::Complex64::new(0.0, 0.0),
        });
        w /= num_complex::Complex64::new(w.norm(), 0.0);
    }
    it.leader.w_d = w;
    assert!(ctx.signal(&it.leader).norm() < 1e-12);
    it = recertified(&ctx, &it);
    let pa = power_allocation(&ctx, &it).unwrap();
    assert_eq!(pa.gamma, 0.0);
    assert_eq!(pa.p_s, 0.0);
}

#[test]
fn power_allocation_fills_the_surface_budget_when_binding() {
    let (ch, base) = default_scene(7);
    let cfg = SceneConfig { p_r_max: base.p_r_max * 1e-4, ..base };
    let (ctx, it) = started(&leader_view(&ch, Scheme::Robust), &cfg, &BsumOptions::default());
    let pa = power_allocation(&ctx, &it).unwrap();
    let mut next = it.clone();
    next.leader.p_s = pa.p_s;
    next.p_j = pa.p_j;
    assert!(pa.p_j < ctx.cfg.p_j_max, "budget should bind before the jamming cap");
    let load = ctx.surface_load(&next);
    assert!((load - ctx.cfg.p_r_max).abs() <= 1e-6 * ctx.cfg.p_r_max, "{load} vs {}", ctx.cfg.p_r_max);
    ctx.check(&next).unwrap();
}

#[test]
fn transmit_beamforming_is_maximum_ratio() {
    let e1 = unit(3, 0);
    let (w, degenerate) = transmit_beamforming(&e1, &CMat::identity(3, 3));
    assert!(!degenerate);
    assert_eq!(w, e1);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_channel_set(&mut rng, 4, 3, 1, 0, 0.0).h_sd;
    let w_d = random_unit_vector(&mut rng, 3);
    let (w_s, _) = transmit_beamforming(&w_d, &h);
    let gain = |w: &antijam_core::linalg::CVec| w_d.dotc(&(&h * w)).norm();
    let bound = h.ad_mul(&w_d).norm();
    assert!((gain(&w_s) - bound).abs() <= 1e-12 * bound);
    for _ in 0..10_000 {
        assert!(gain(&random_unit_vector(&mut rng, 4)) <= gain(&w_s) + 1e-12);
    }

    let (w, degenerate) = transmit_beamforming(&e1, &CMat::zeros(3, 2));
    assert!(degenerate);
    assert_eq!(w, unit(2, 0));
}

#[test]
fn receive_block_is_monotone_unit_norm_and_a_fixed_point() {
    let (ch, cfg) = default_scene(42);
    let (ctx, it) = started(&leader_view(&ch, Scheme::Robust), &cfg, &tight());
    let out = receive_beamforming_sca(&ctx, &it, &mut ReceiveState::default(), 200).unwrap();
    assert!(out.iterations > 0);
    monotonicity_check(&out.trace, 1e-9).unwrap();
    assert!(out.trace.last().unwrap() >= &out.trace[0]);
    assert!((out.iterate.leader.w_d.norm() - 1.0).abs() < 1e-9);
    ctx.check(&out.iterate).unwrap();

    let at = recertified(&ctx, &out.iterate);
    let again = receive_beamforming_sca(&ctx, &at, &mut ReceiveState::default(), 1).unwrap();
    let moved = again.trace.last().unwrap() - again.trace[0];
    assert!(moved.abs() < 1e-6, "re-solve moved the objective by {moved}");
}

#[test]
fn reflection_block_is_monotone_feasible_and_a_fixed_point() {
    let (ch, cfg) = default_scene(42);
    let (ctx, it) = started(&leader_view(&ch, Scheme::Robust), &cfg, &tight());
    let mut state = ReflectionState::default();
    let out = reflection_sca(&ctx, &it, &mut state, 200).unwrap();
    assert!(out.iterations > 0);
    monotonicity_check(&out.trace, 1e-9).unwrap();
    let th = &out.iterate.leader.theta;
    assert!(th.iter().all(|t| t.norm() <= ctx.cfg.lambda_max));
    let load = ctx.surface_load(&out.iterate);
    assert!(load <= ctx.cfg.p_r_max + 1e-6 * ctx.cfg.p_r_max.max(1.0));
    assert_eq!(state.alpha.len(), ctx.view.n());

    let at = recertified(&ctx, &out.iterate);
    let again = reflection_sca(&ctx, &at, &mut ReflectionState::default(), 1).unwrap();
    let moved = again.trace.last().unwrap() - again.trace[0];
    assert!(moved.abs() < 1e-6, "re-solve moved the objective by {moved}");
}

#[test]
fn vanishing_amplitude_leaves_the_direct_link() {
    let (ch, base) = default_scene(4);
    let cfg = SceneConfig { lambda_max: 1e-9, ..base };
    let (ctx, it) = started(&leader_view(&ch, Scheme::Robust), &cfg, &BsumOptions::default());
    let out = reflection_sca(&ctx, &it, &mut ReflectionState::default(), 30).unwrap();
    let l = &out.iterate.leader;
    assert!(l.theta.norm() <= 1e-9 * (ctx.view.n() as f64).sqrt() * (1.0 + 1e-9));
    let direct = l.w_d.dotc(&(&ctx.view.h_sd * &l.w_s)).norm();
    assert!((ctx.signal(l).norm() - direct).abs() <= 1e-6 * direct);
}

fn solved(scheme: Scheme, seed: u64) -> (ChannelSet, SceneConfig, LeaderSolution) {
    let (ch, cfg) = default_scene(seed);
    let (sol, _) = run_scheme(&ch, &cfg, scheme, &BsumOptions::default()).unwrap();
    (ch, cfg, sol)
}

#[test]
fn default_scene_trace_is_monotone_and_terminates() {
    let (_, _, sol) = solved(Scheme::Robust, 42);
    let r = &sol.report;
    assert!(r.outer_iterations <= 50);
    assert!(matches!(r.termination, antijam_core::bsum::Termination::Converged), "{:?}", r.termination);
    monotonicity_check(&r.utility_trace, 1e-6).unwrap();
    for t in r.receive_traces.iter().chain(&r.reflection_traces) {
        monotonicity_check(t, 1e-9).unwrap();
    }
    assert_eq!(r.receive_iterations.len(), r.outer_iterations);
    assert!(sol.certificates.is_valid());
}

#[test]
fn no_surface_scheme_plays_the_direct_link_game() {
    let (ch, cfg) = default_scene(42);
    let (sol, eq) = run_scheme(&ch, &cfg, Scheme::NoRis, &BsumOptions::default()).unwrap();
    assert_eq!(sol.leader.theta.len(), 0);
    let direct = ch.without_surface();
    let jam = jammer_best_response(&direct, &sol.leader, &cfg).unwrap();
    let u = utility_leader_exact(&direct, &sol.leader, &jam, &cfg).unwrap();
    assert!((eq.u_l - u).abs() <= 1e-12 * u.abs().max(1.0));
}

#[test]
fn perfect_information_does_at_least_as_well_as_robust() {
    let (ch, cfg) = default_scene(42);
    let (_, perfect) = run_scheme(&ch, &cfg, Scheme::Perfect, &BsumOptions::default()).unwrap();
    let (_, robust) = run_scheme(&ch, &cfg, Scheme::Robust, &BsumOptions::default()).unwrap();
    assert!(perfect.u_l >= robust.u_l - 1e-6, "{} < {}", perfect.u_l, robust.u_l);
}

#[test]
fn perfect_scheme_anticipates_the_realized_follower() {
    let (ch, cfg, sol) = solved(Scheme::Perfect, 42);
    let eq = assemble_equilibrium(&sol, &ch, &cfg).unwrap();
    assert!(eq.delta_p_j <= 1e-4 * cfg.p_j_max, "{}", eq.delta_p_j);
    assert!(eq.direction_overlap >= 1.0 - 1e-6, "{}", eq.direction_overlap);
}

#[test]
fn silent_leader_meets_a_silent_jammer() {
    let (ch, cfg, mut sol) = solved(Scheme::Robust, 8);
    sol.leader.p_s = 0.0;
    let eq = assemble_equilibrium(&sol, &ch, &cfg).unwrap();
    assert_eq!(eq.jammer.p_j, 0.0);
}

#[test]
fn realized_utility_clears_the_certified_worst_case() {
    for seed in [42, 43] {
        let (ch, cfg, sol) = solved(Scheme::Robust, seed);
        let eq = assemble_equilibrium(&sol, &ch, &cfg).unwrap();
        assert!(eq.u_l >= eq.u_l_worst - 1e-6, "{} < {}", eq.u_l, eq.u_l_worst);
        // the solver's own bound agrees with the one recomputed from the scene
        assert!((eq.u_l_worst - sol.worst_case_utility).abs() <= 1e-5 * sol.worst_case_utility.abs().max(1.0));
    }
}

#[test]
fn zero_radius_robust_matches_perfect() {
    let cfg = SceneConfig { delta: 0.0, seed: 9, ..SceneConfig::default() };
    let ch = draw_scene(&cfg).unwrap();
    let (_, r) = run_scheme(&ch, &cfg, Scheme::Robust, &BsumOptions::default()).unwrap();
    let (_, p) = run_scheme(&ch, &cfg, Scheme::Perfect, &BsumOptions::default()).unwrap();
    assert!((r.u_l - p.u_l).abs() <= 1e-4, "{} vs {}", r.u_l, p.u_l);
}

#[test]
fn certificates_are_reported_in_physical_units() {
    let (ch, cfg, sol) = solved(Scheme::Robust, 42);
    let view = leader_view(&ch, Scheme::Robust);
    let direct = certify_all(&sol.leader.w_d, &sol.leader.theta, &sol.anticipated.w_j, &view).unwrap();
    assert!((sol.certificates.psi_jd - direct.psi_jd).abs() <= 1e-5 * direct.psi_jd);
    let g = link_gains(&view, &sol.leader, cfg.sigma_r2, cfg.sigma_d2).unwrap();
    let w = best_response_sinr(sol.leader.p_s, g.signal, sol.certificates.psi_jd, g.noise, cfg.c_j, cfg.p_j_max)
        - cfg.c_s * sol.leader.p_s;
    assert!((w - sol.worst_case_utility).abs() <= 1e-6 * w.abs().max(1.0));
}

#[test]
fn bad_inputs_are_rejected() {
    let (ch, cfg) = default_scene(1);
    let wrong = SceneConfig { n: ch.n() + 1, ..cfg.clone() };
    assert!(solve_leader(&ch, &wrong, &BsumOptions::default()).is_err());
    let bad = SceneConfig { c_j: -1.0, ..cfg };
    assert!(solve_leader(&ch, &bad, &BsumOptions::default()).is_err());
}
