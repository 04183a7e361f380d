use antijam_conic::{
    herm_embed, residual_check, solve, CExpr, ConicProgram, HermAffine, LinExpr, SolveStatus, SymAffine,
};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: antijam_conic::VarId) -> LinExpr {
    LinExpr::var(x)
}

fn k(c: f64) -> LinExpr {
    LinExpr::constant(c)
}

#[test]
fn maximize_bounded_scalar() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_le("cap", v(x), k(3.0)).unwrap();
    p.maximize(v(x));
    let r = solve(&p);
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective - 3.0).abs() < 1e-7, "{}", r.objective);
}

#[test]
fn two_by_two_lmi() {
    let mut p = ConicProgram::new();
    let t = p.add_var("t");
    let mut s = SymAffine::new(2);
    s.add(0, 0, &k(1.0));
    s.add(1, 1, &k(1.0));
    s.add(0, 1, &v(t));
    p.add_psd("lmi", s).unwrap();
    p.maximize(v(t));
    let r = solve(&p);
    assert!(r.is_optimal());
    assert!((r.value(t) - 1.0).abs() < 1e-7);
}

#[test]
fn quad_over_linear_through_rotated_cone() {
    // minimize q with q * nu >= mu^2 at mu = 2, nu = 4
    let mut p = ConicProgram::new();
    let q = p.add_var("q");
    let mu = p.add_var("mu");
    let nu = p.add_var("nu");
    p.add_eq("mu", v(mu), k(2.0)).unwrap();
    p.add_eq("nu", v(nu), k(4.0)).unwrap();
    p.add_rotated_soc("qol", v(q) * 0.5, v(nu), vec![v(mu)]).unwrap();
    p.maximize(-v(q));
    let r = solve(&p);
    assert!(r.is_optimal());
    assert!((r.value(q) - 1.0).abs() < 1e-7, "{}", r.value(q));
}

#[test]
fn second_order_cone_disc() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    let y = p.add_var("y");
    p.add_soc("disc", k(1.0), vec![v(x), v(y)]).unwrap();
    p.maximize(v(x) + v(y));
    let r = solve(&p);
    assert!(r.is_optimal());
    assert!((r.objective - 2f64.sqrt()).abs() < 1e-7);
}

#[test]
fn detects_infeasible_bounds() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_ge("lo", v(x), k(1.0)).unwrap();
    p.add_le("hi", v(x), k(0.0)).unwrap();
    p.maximize(v(x));
    assert_eq!(solve(&p).status, SolveStatus::Infeasible);
}

#[test]
fn detects_inconsistent_equalities() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_eq("a", v(x), k(1.0)).unwrap();
    p.add_eq("b", v(x) * 2.0, k(3.0)).unwrap();
    p.add_ge("pos", v(x), k(0.0)).unwrap();
    assert_eq!(solve(&p).status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_objective_is_not_optimal() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_ge("pos", v(x), k(0.0)).unwrap();
    p.maximize(v(x));
    let r = solve(&p);
    assert!(matches!(r.status, SolveStatus::Unbounded | SolveStatus::NumericalFailure), "{:?}", r.status);
}

#[test]
fn free_objective_variable_is_unbounded() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    let y = p.add_var("y");
    p.add_ge("pos", v(x), k(0.0)).unwrap();
    p.maximize(v(y) - v(x));
    assert_eq!(solve(&p).status, SolveStatus::Unbounded);
}

#[test]
fn redundant_equalities_are_dropped() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    let y = p.add_var("y");
    p.add_eq("a", v(x) + v(y), k(1.0)).unwrap();
    p.add_eq("b", v(x) * 2.0 + v(y) * 2.0, k(2.0)).unwrap();
    p.add_ge("x", v(x), k(0.0)).unwrap();
    p.add_ge("y", v(y), k(0.0)).unwrap();
    p.maximize(v(x) * 2.0 + v(y));
    let r = solve(&p);
    assert!(r.is_optimal());
    assert!((r.objective - 2.0).abs() < 1e-7);
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn hermitian_min_eigenvalue_through_lmi() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 3, 6] {
        let m = random_hermitian(&mut rng, n);
        let exact = SymmetricEigen::new(m.clone()).eigenvalues.min();
        let mut p = ConicProgram::new();
        let t = p.add_var("t");
        let mut h = HermAffine::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut e = CExpr::constant(m[(i, j)]);
                if i == j {
                    e = e - CExpr::term(t, Complex64::new(1.0, 0.0));
                }
                h.set_herm(i, j, e);
            }
        }
        p.add_herm_psd("shift", &h).unwrap();
        p.maximize(v(t));
        let r = solve(&p);
        assert!(r.is_optimal());
        assert!((r.value(t) - exact).abs() < 1e-7, "n={n}: {} vs {exact}", r.value(t));
    }
}

#[test]
fn embedding_spectrum_matches_complex_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..6 {
        let m = random_hermitian(&mut rng, n);
        let mut h = HermAffine::zeros(n);
        h.set_block_const(0, 0, &m);
        let e = herm_embed(&h).unwrap().eval(&[]);
        let a = SymmetricEigen::new(m).eigenvalues.min();
        let b = SymmetricEigen::new(e).eigenvalues.min();
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn optimal_results_pass_independent_residual_check() {
    // A small mixed program touching every cone type.
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    let y = p.add_var("y");
    let z = p.add_var("z");
    let w = p.add_var("w");
    p.add_soc("soc", v(z), vec![v(x) - 0.3, v(y)]).unwrap();
    p.add_rotated_soc("rsoc", v(w), k(0.5), vec![v(x)]).unwrap();
    p.add_le("budget", v(z) + v(w), k(2.0)).unwrap();
    let mut s = SymAffine::new(3);
    s.add(0, 0, &k(2.0));
    s.add(1, 1, &(k(1.0) - v(y)));
    s.add(2, 2, &(k(1.0) + v(x)));
    s.add(0, 1, &v(x));
    s.add(1, 2, &(v(y) * 0.5));
    p.add_psd("lmi", s).unwrap();
    p.add_eq("link", v(x) - v(y) * 2.0, k(0.1)).unwrap();
    p.maximize(v(x) + v(y) * 0.5);
    let r = solve(&p);
    assert!(r.is_optimal(), "{:?}", r.status);
    let (viol, _) = residual_check(&p, &r.values);
    assert!(viol <= 1e-7);
    assert_eq!(viol, r.max_violation);
}

#[test]
fn dump_round_trip_solves_identically() {
    let mut p = ConicProgram::new();
    let t = p.add_var("t");
    let mut s = SymAffine::new(2);
    s.add(0, 0, &k(3.0));
    s.add(1, 1, &k(1.0));
    s.add(0, 1, &v(t));
    p.add_psd("lmi", s).unwrap();
    p.maximize(v(t));
    let q = ConicProgram::parse_dump(&p.dump()).unwrap();
    let (a, b) = (solve(&p), solve(&q));
    assert!((a.objective - 3f64.sqrt()).abs() < 1e-7);
    assert!((a.objective - b.objective).abs() < 1e-12);
}

#[test]
fn larger_random_sdp_matches_eigenvalue_bound() {
    // maximize sum_i t_i s.t. A - diag(t) >= 0 is a diagonal-scaling bound; check against a
    // brute certificate: at the optimum A - diag(t) is singular.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 24;
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let a = &g * g.transpose() + DMatrix::identity(n, n);
    let mut p = ConicProgram::new();
    let t = p.add_vars("t", n);
    let mut s = SymAffine::new(n);
    for i in 0..n {
        for j in i..n {
            let mut e = k(a[(i, j)]);
            if i == j {
                e = e - v(t[i]);
            }
            s.add(i, j, &e);
        }
    }
    p.add_psd("lmi", s).unwrap();
    p.maximize(t.iter().fold(LinExpr::zero(), |acc, x| acc + v(*x)));
    let r = solve(&p);
    assert!(r.is_optimal(), "{:?}", r.status);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= r.value(t[i]);
    }
    let ev = SymmetricEigen::new(m).eigenvalues;
    assert!(ev.min() > -1e-6 && ev.min() < 1e-5, "{}", ev.min());
}
