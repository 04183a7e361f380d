use antijam_core::bsum::Scheme;
use antijam_core::scene::SceneConfig;
use antijam_harness::experiment::{read_csv, read_rows, write_rows, CSV_HEADER};
use antijam_harness::{parse_schemes, parse_values, run_experiment, ExperimentFile, ExperimentSpec, Sweep};
use proptest::prelude::*;

fn small_spec(sweep: Sweep, values: Vec<f64>, schemes: Vec<Scheme>, trials: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(sweep);
    spec.values = values;
    spec.schemes = schemes;
    spec.trials = trials;
    spec.base = SceneConfig { n: 4, ..SceneConfig::default() };
    spec.seed = 7;
    spec
}

#[test]
fn one_point_one_trial_gives_data_and_mean_row() {
    let spec = small_spec(Sweep::Cj, vec![3.0], vec![Scheme::Robust], 1);
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.rows.len(), 2);
    assert!(!out.rows[0].is_mean());
    assert!(out.rows[1].is_mean());
    assert!(out.failures.is_empty());
    let (d, m) = (&out.rows[0], &out.rows[1]);
    assert_eq!(d.u_l, m.u_l);
    assert_eq!(d.u_j, m.u_j);
    assert_eq!(d.p_s, m.p_s);
}

#[test]
fn rows_are_deterministic_except_timing() {
    let spec = small_spec(Sweep::Cs, vec![1.0, 2.0], vec![Scheme::Robust, Scheme::NoRis], 2);
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        let (mut x, mut y) = (x.clone(), y.clone());
        x.ms = 0.0;
        y.ms = 0.0;
        assert_eq!(x, y);
    }
}

#[test]
fn data_rows_count_points_trials_schemes() {
    let spec = small_spec(Sweep::Cj, vec![1.0, 2.0, 3.0], vec![Scheme::Robust], 2);
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.rows.iter().filter(|r| !r.is_mean()).count(), 6);
    assert_eq!(out.means().count(), 3);
}

#[test]
fn trials_share_scene_across_points() {
    let spec = small_spec(Sweep::Cj, vec![1.0, 2.0], vec![Scheme::NoRis], 3);
    let out = run_experiment(&spec).unwrap();
    let seeds = |v: f64| -> Vec<String> {
        out.rows.iter().filter(|r| r.value == v && !r.is_mean()).map(|r| r.trial.clone()).collect()
    };
    assert_eq!(seeds(1.0), seeds(2.0));
    assert_eq!(seeds(1.0).len(), 3);
}

#[test]
fn zero_surface_robust_matches_noris() {
    let mut spec = small_spec(Sweep::N, vec![0.0], vec![Scheme::Robust, Scheme::NoRis], 1);
    spec.base = SceneConfig::default();
    let out = run_experiment(&spec).unwrap();
    let r = out.mean(0.0, Scheme::Robust).unwrap();
    let n = out.mean(0.0, Scheme::NoRis).unwrap();
    assert!((r.u_l - n.u_l).abs() <= 1e-9 * n.u_l.abs().max(1.0), "{} vs {}", r.u_l, n.u_l);
    assert!((r.u_j - n.u_j).abs() <= 1e-9 * n.u_j.abs().max(1.0));
}

#[test]
fn csv_round_trip_and_header() {
    let spec = small_spec(Sweep::Xj, vec![100.0], vec![Scheme::Perfect], 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut spec = spec;
    spec.out = Some(path.clone());
    let out = run_experiment(&spec).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert!(!text.contains('\r'));
    assert_eq!(read_csv(&path).unwrap(), out.rows);
}

#[test]
fn failure_rows_round_trip_as_nan() {
    let spec = small_spec(Sweep::Cj, vec![1.0], vec![Scheme::NoRis], 1);
    let mut rows = run_experiment(&spec).unwrap().rows;
    for r in &mut rows {
        r.u_l = f64::NAN;
        r.u_j = f64::NAN;
    }
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows).unwrap();
    let back = read_rows(buf.as_slice()).unwrap();
    assert!(back.iter().all(|r| r.is_failure() && r.u_j.is_nan()));
}

#[test]
fn wrong_header_is_rejected() {
    let text = "a,b,c\n1,2,3\n";
    assert!(read_rows(text.as_bytes()).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    let base = small_spec(Sweep::Cj, vec![1.0], vec![Scheme::Robust], 1);
    let mut s = base.clone();
    s.trials = 0;
    assert!(s.validate().is_err());
    let mut s = base.clone();
    s.values.clear();
    assert!(s.validate().is_err());
    let mut s = base.clone();
    s.schemes.clear();
    assert!(s.validate().is_err());
    let mut s = base.clone();
    s.values = vec![-1.0];
    assert!(s.validate().is_err());
    let mut s = small_spec(Sweep::Xj, vec![500.0], vec![Scheme::Robust], 1);
    assert!(s.validate().is_err());
    s.values = vec![400.0];
    assert!(s.validate().is_ok());
    let s = small_spec(Sweep::N, vec![2.5], vec![Scheme::Robust], 1);
    assert!(s.validate().is_err());
}

#[test]
fn sweep_names_round_trip() {
    for s in Sweep::ALL {
        assert_eq!(s.name().parse::<Sweep>().unwrap(), s);
        assert!(!s.default_values().is_empty());
    }
    assert!("delta".parse::<Sweep>().is_err());
}

#[test]
fn default_grids() {
    assert_eq!(Sweep::Cj.default_values().len(), 10);
    assert_eq!(Sweep::N.default_values(), (1..=10).map(|k| 4.0 * k as f64).collect::<Vec<_>>());
    assert_eq!(Sweep::Xj.default_values().first(), Some(&0.0));
    assert_eq!(Sweep::Xj.default_values().last(), Some(&400.0));
}

#[test]
fn scheme_list_parsing() {
    assert_eq!(parse_schemes("robust,noris").unwrap(), vec![Scheme::Robust, Scheme::NoRis]);
    assert!(parse_schemes("robust,robust").is_err());
    assert!(parse_schemes("robust,bogus").is_err());
    assert!(parse_schemes("").is_err());
}

#[test]
fn value_list_errors() {
    assert!(parse_values("").is_err());
    assert!(parse_values("1,,2").is_err());
    assert!(parse_values("1,nan").is_err());
    assert!(parse_values("1,inf").is_err());
    assert_eq!(parse_values(" 1 , 2.5").unwrap(), vec![1.0, 2.5]);
}

#[test]
fn experiment_file_applies_over_defaults() {
    let f = ExperimentFile::from_json_str(
        r#"{"sweep":"n","values":[4,8],"schemes":["perfect"],"trials":3,"seed":11,"scene":{"N":8,"c_J":2.0}}"#,
    )
    .unwrap();
    let mut spec = ExperimentSpec::new(Sweep::Cj);
    f.apply_to(&mut spec).unwrap();
    assert_eq!(spec.sweep, Sweep::N);
    assert_eq!(spec.values, vec![4.0, 8.0]);
    assert_eq!(spec.schemes, vec![Scheme::Perfect]);
    assert_eq!((spec.trials, spec.seed), (3, 11));
    assert_eq!(spec.base.c_j, 2.0);
    assert!(ExperimentFile::from_json_str(r#"{"sweeps":"n"}"#).is_err());
    let bad = ExperimentFile::from_json_str(r#"{"scene":{"N_S":0}}"#).unwrap();
    assert!(bad.apply_to(&mut ExperimentSpec::new(Sweep::Cj)).is_err());
}

proptest! {
    #[test]
    fn value_lists_round_trip(v in prop::collection::vec(-1e6f64..1e6, 1..20)) {
        let text = v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_values(&text).unwrap(), v);
    }

    #[test]
    fn value_parser_never_panics(s in ".{0,64}") {
        if let Ok(v) = parse_values(&s) {
            prop_assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn trial_seeds_are_distinct(seed in any::<u64>()) {
        let spec = ExperimentSpec { seed, ..ExperimentSpec::new(Sweep::Cj) };
        let s: std::collections::HashSet<u64> = (0..64).map(|t| spec.trial_seed(t)).collect();
        prop_assert_eq!(s.len(), 64);
    }
}
