use antijam_conic::{solve, ConicProgram, LinExpr};
use antijam_core::linalg::{min_eig_herm, random_unit_vector, real, CVec};
use antijam_core::lmi::{
    certify_all, certify_phi_jd, certify_phi_jd_full, certify_psi_jd, certify_psi_jr, lmi_phi_jd, lmi_psi_jd,
    lmi_psi_jr, LmiError, Operand, PhiMode, StackedJammerChannel,
};
use antijam_core::scene::{random_channel_set, ChannelSet};
use antijam_core::verify::{bisect_max, bisect_min, worst_case_sampler, Certificates, OracleConfig};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_theta(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> CVec {
    DVector::from_fn(n, |_, _| Complex64::from_polar(amp * rng.random::<f64>(), 6.283 * rng.random::<f64>()))
}

fn nominal_gain(w: &CVec, theta: &CVec, ch: &ChannelSet) -> f64 {
    StackedJammerChannel::new(w, theta, ch).nominal_gain()
}

fn nominal_surface(theta: &CVec, w_j: &CVec, ch: &ChannelSet) -> f64 {
    let k = &ch.hhat_jr * w_j;
    k.iter().zip(theta.iter()).map(|(a, t)| (a * t).norm_sqr()).sum()
}

struct Instance {
    ch: ChannelSet,
    w: CVec,
    theta: CVec,
    w_j: CVec,
}

fn instance(seed: u64, n: usize, delta: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = random_channel_set(&mut rng, 2, 2, 3, n, delta);
    let w = random_unit_vector(&mut rng, 2);
    let theta = random_theta(&mut rng, n, 1.5);
    let w_j = random_unit_vector(&mut rng, 3);
    Instance { ch, w, theta, w_j }
}

#[test]
fn kronecker_identity_matches_direct_norm() {
    for seed in 0..20 {
        let inst = instance(seed, 4, 0.1);
        let s = StackedJammerChannel::new(&inst.w, &inst.theta, &inst.ch);
        let h = s.vec_h();
        let quad = h.dotc(&(s.lifted() * &h)).re;
        let direct = (inst.w.adjoint() * (&inst.ch.hhat_jd + &inst.ch.h_rd * nalgebra::DMatrix::from_diagonal(&inst.theta) * &inst.ch.hhat_jr)).norm_squared();
        assert!((quad - direct).abs() <= 1e-10 * direct.max(1.0), "{quad} vs {direct}");
        assert!((s.nominal_gain() - direct).abs() <= 1e-10 * direct.max(1.0));
    }
}

#[test]
fn selectors_are_complementary_projections() {
    let inst = instance(1, 3, 0.1);
    let s = StackedJammerChannel::new(&inst.w, &inst.theta, &inst.ch);
    let (a, b) = s.selectors();
    assert!((&a * &a - &a).norm() < 1e-15);
    assert!((&b * &b - &b).norm() < 1e-15);
    let eye = nalgebra::DMatrix::<Complex64>::identity(a.nrows(), a.nrows());
    assert!((&a + &b - eye).norm() < 1e-15);
    let lifted = s.lifted();
    assert!((&lifted - lifted.adjoint()).norm() < 1e-12);
    assert!(min_eig_herm(&lifted) > -1e-10);
}

#[test]
fn zero_radius_certificates_collapse_to_nominal() {
    for seed in 0..6 {
        let inst = instance(seed, 5, 0.0);
        let g = nominal_gain(&inst.w, &inst.theta, &inst.ch);
        let (psi, _) = certify_psi_jd(&inst.w, &inst.theta, &inst.ch).unwrap();
        let (phi, _) = certify_phi_jd(&inst.w, &inst.theta, &inst.ch).unwrap();
        let (psi_jr, _) = certify_psi_jr(&inst.theta, &inst.w_j, &inst.ch).unwrap();
        let gr = nominal_surface(&inst.theta, &inst.w_j, &inst.ch);
        assert!((psi - g).abs() <= 1e-7 * g.max(1.0), "psi {psi} vs {g}");
        assert!((phi - g).abs() <= 1e-7 * g.max(1.0), "phi {phi} vs {g}");
        assert!((psi_jr - gr).abs() <= 1e-7 * gr.max(1.0), "psi_jr {psi_jr} vs {gr}");
    }
}

#[test]
fn zero_radius_blocks_match_bisection() {
    let inst = instance(9, 4, 0.0);
    let g = nominal_gain(&inst.w, &inst.theta, &inst.ch);
    let mut p = ConicProgram::new();
    let psi = p.add_var("psi");
    let blk = lmi_psi_jd(&mut p, "psi", Operand::Fixed(&inst.w), Operand::Fixed(&inst.theta), &inst.ch, &LinExpr::var(psi)).unwrap();
    assert!(blk.multipliers.is_empty());
    let b = bisect_min(|x| min_eig_herm(&blk.block.eval(&[x])) >= 0.0, 0.0, 10.0 * g + 1.0, 80);
    assert!((b - g).abs() <= 1e-7 * g.max(1.0), "{b} vs {g}");

    let gr = nominal_surface(&inst.theta, &inst.w_j, &inst.ch);
    let mut p = ConicProgram::new();
    let psi = p.add_var("psi");
    let blk = lmi_psi_jr(&mut p, "jr", Operand::Fixed(&inst.theta), &inst.w_j, &inst.ch, &LinExpr::var(psi)).unwrap();
    let b = bisect_min(|x| min_eig_herm(&blk.block.eval(&[x])) >= 0.0, 0.0, 10.0 * gr + 1.0, 80);
    assert!((b - gr).abs() <= 1e-7 * gr.max(1.0), "{b} vs {gr}");

    // With every radius zero the lower bound is a plain linear constraint.
    let mut p = ConicProgram::new();
    let phi = p.add_var("phi");
    lmi_phi_jd(&mut p, "phi", Operand::Fixed(&inst.w), Operand::Fixed(&inst.theta), PhiMode::Exact, &inst.ch, &LinExpr::var(phi)).unwrap();
    let b = bisect_max(|x| antijam_conic::residual_check(&p, &[x]).0 <= 0.0, 0.0, 10.0 * g + 1.0, 80);
    assert!((b - g).abs() <= 1e-7 * g.max(1.0), "{b} vs {g}");
}

#[test]
fn zero_channels_certify_zero() {
    let mut inst = instance(2, 3, 0.0);
    inst.ch.hhat_jd.fill(real(0.0));
    inst.ch.hhat_jr.fill(real(0.0));
    assert_eq!(certify_psi_jd(&inst.w, &inst.theta, &inst.ch).unwrap().0, 0.0);
    let zero = CVec::zeros(3);
    assert_eq!(certify_psi_jr(&zero, &inst.w_j, &inst.ch).unwrap().0, 0.0);
}

#[test]
fn certificates_bound_sampled_worst_case() {
    let oc = OracleConfig { boundary_samples: 10_000, ..OracleConfig::default() };
    for seed in 0..4 {
        let inst = instance(100 + seed, 4, 0.2);
        let aux = certify_all(&inst.w, &inst.theta, &inst.w_j, &inst.ch).unwrap();
        assert!(aux.is_valid());
        assert!(aux.phi_jd <= aux.psi_jd);
        let s = worst_case_sampler(&inst.w, &inst.theta, &inst.w_j, &inst.ch, &oc);
        let cert = Certificates { psi_jd: aux.psi_jd, phi_jd: aux.phi_jd, psi_jr: aux.psi_jr };
        let v = s.violations(&cert, 1.0);
        assert!(v.worst() <= 1e-6, "seed {seed}: {v:?} {s:?} {cert:?}");
        // The sampled gap is real but bounded: robust bounds are not vacuous.
        assert!(aux.psi_jd < 10.0 * s.max_jam_gain);
    }
}

#[test]
fn lifted_and_compact_lower_bounds_agree() {
    for seed in 0..3 {
        let inst = instance(200 + seed, 3, 0.15);
        let (a, _) = certify_phi_jd(&inst.w, &inst.theta, &inst.ch).unwrap();
        let (b, _) = certify_phi_jd_full(&inst.w, &inst.theta, &inst.ch).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }
}

fn surrogate_phi(inst: &Instance, w_at: &CVec, w0: &CVec) -> f64 {
    let mut p = ConicProgram::new();
    let w = p.add_complex("w", w_at.len());
    for k in 0..w_at.len() {
        p.add_eq("fix.re", LinExpr::var(w.re[k]), LinExpr::constant(w_at[k].re)).unwrap();
        p.add_eq("fix.im", LinExpr::var(w.im[k]), LinExpr::constant(w_at[k].im)).unwrap();
    }
    let phi = p.add_var("phi");
    lmi_phi_jd(&mut p, "phi", Operand::Var(&w), Operand::Fixed(&inst.theta), PhiMode::ScaReceive { w0 }, &inst.ch, &LinExpr::var(phi)).unwrap();
    p.maximize(LinExpr::var(phi));
    let r = solve(&p);
    assert!(r.is_optimal(), "{:?}", r.status);
    r.value(phi)
}

fn surrogate_phi_theta(inst: &Instance, t_at: &CVec, t0: &CVec) -> f64 {
    let mut p = ConicProgram::new();
    let t = p.add_complex("theta", t_at.len());
    for k in 0..t_at.len() {
        p.add_eq("fix.re", LinExpr::var(t.re[k]), LinExpr::constant(t_at[k].re)).unwrap();
        p.add_eq("fix.im", LinExpr::var(t.im[k]), LinExpr::constant(t_at[k].im)).unwrap();
    }
    let phi = p.add_var("phi");
    lmi_phi_jd(&mut p, "phi", Operand::Fixed(&inst.w), Operand::Var(&t), PhiMode::ScaReflection { theta0: t0 }, &inst.ch, &LinExpr::var(phi)).unwrap();
    p.maximize(LinExpr::var(phi));
    let r = solve(&p);
    assert!(r.is_optimal(), "{:?}", r.status);
    r.value(phi)
}

#[test]
fn surrogates_are_tight_at_the_expansion_point_and_conservative_elsewhere() {
    let inst = instance(300, 3, 0.1);
    let (exact, _) = certify_phi_jd(&inst.w, &inst.theta, &inst.ch).unwrap();
    let tight = surrogate_phi(&inst, &inst.w, &inst.w);
    assert!((tight - exact).abs() <= 1e-6 * exact.max(1.0), "{tight} vs {exact}");
    let tight_t = surrogate_phi_theta(&inst, &inst.theta, &inst.theta);
    assert!((tight_t - exact).abs() <= 1e-6 * exact.max(1.0), "{tight_t} vs {exact}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let w0 = random_unit_vector(&mut rng, 2);
        let s = surrogate_phi(&inst, &inst.w, &w0);
        assert!(s <= exact + 1e-6 * exact.max(1.0), "{s} > {exact}");
        let t0 = random_theta(&mut rng, 3, 1.5);
        let s = surrogate_phi_theta(&inst, &inst.theta, &t0);
        assert!(s <= exact + 1e-6 * exact.max(1.0), "{s} > {exact}");
    }
}

#[test]
fn builder_rejects_bad_operands() {
    let inst = instance(4, 3, 0.1);
    let mut p = ConicProgram::new();
    let w = p.add_complex("w", 2);
    let t = p.add_complex("t", 3);
    let psi = LinExpr::var(p.add_var("psi"));
    let e = lmi_psi_jd(&mut p, "x", Operand::Var(&w), Operand::Var(&t), &inst.ch, &psi).unwrap_err();
    assert_eq!(e, LmiError::BothSymbolic);
    let e = lmi_phi_jd(&mut p, "x", Operand::Var(&w), Operand::Fixed(&inst.theta), PhiMode::Exact, &inst.ch, &psi).unwrap_err();
    assert!(matches!(e, LmiError::ModeMismatch(_)));
    let e = lmi_phi_jd(
        &mut p,
        "x",
        Operand::Fixed(&inst.w),
        Operand::Fixed(&inst.theta),
        PhiMode::ScaReflection { theta0: &inst.theta },
        &inst.ch,
        &psi,
    )
    .unwrap_err();
    assert!(matches!(e, LmiError::ModeMismatch(_)));
    let short = CVec::zeros(2);
    let e = lmi_psi_jd(&mut p, "x", Operand::Fixed(&inst.w), Operand::Fixed(&short), &inst.ch, &psi).unwrap_err();
    assert!(matches!(e, LmiError::Shape(_)));
}

#[test]
fn symbolic_blocks_evaluate_to_fixed_blocks() {
    // A block built with a symbolic beamformer, evaluated at a point, equals the fixed-data block.
    let inst = instance(6, 3, 0.1);
    let mut p = ConicProgram::new();
    let psi = p.add_var("psi");
    let w = p.add_complex("w", 2);
    let sym = lmi_psi_jd(&mut p, "s", Operand::Var(&w), Operand::Fixed(&inst.theta), &inst.ch, &LinExpr::var(psi)).unwrap();
    let mut q = ConicProgram::new();
    let psi2 = q.add_var("psi");
    let fixed = lmi_psi_jd(&mut q, "f", Operand::Fixed(&inst.w), Operand::Fixed(&inst.theta), &inst.ch, &LinExpr::var(psi2)).unwrap();
    let mut x = vec![0.0; p.num_vars()];
    x[psi.0] = 0.7;
    for k in 0..2 {
        x[w.re[k].0] = inst.w[k].re;
        x[w.im[k].0] = inst.w[k].im;
    }
    x[sym.multipliers[0].0] = 0.1;
    x[sym.multipliers[1].0] = 0.2;
    let mut y = vec![0.0; q.num_vars()];
    y[psi2.0] = 0.7;
    y[fixed.multipliers[0].0] = 0.1;
    y[fixed.multipliers[1].0] = 0.2;
    assert!((sym.block.eval(&x) - fixed.block.eval(&y)).norm() < 1e-12);
}
