use antijam_core::scene::{
    amplitude_to_db, db_to_amplitude, db_to_linear, dbm_to_watts, draw_channels, draw_scene, linear_to_db,
    make_uncertainty, path_loss_gain, watts_to_dbm, SceneConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn same_seed_same_scene() {
    let cfg = SceneConfig { seed: 17, ..SceneConfig::default() };
    assert_eq!(draw_scene(&cfg).unwrap(), draw_scene(&cfg).unwrap());
    let other = SceneConfig { seed: 18, ..cfg.clone() };
    assert_ne!(draw_scene(&cfg).unwrap(), draw_scene(&other).unwrap());
}

#[test]
fn ground_link_power_matches_path_loss() {
    let cfg = SceneConfig { n: 2, ..SceneConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 10_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += draw_channels(&cfg, &mut rng).unwrap().h_sd[(0, 0)].norm_sqr();
    }
    let d = ((400.0f64).powi(2) + 100.0f64.powi(2)).sqrt();
    let want = path_loss_gain(d, cfg.eta_ground, cfg.l0).unwrap();
    assert!((acc / draws as f64 / want - 1.0).abs() < 0.05);
}

#[test]
fn surface_link_power_matches_path_loss() {
    let cfg = SceneConfig { n: 2, ..SceneConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draws = 10_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += draw_channels(&cfg, &mut rng).unwrap().h_sr[(1, 2)].norm_sqr();
    }
    let d = (200.0f64.powi(2) + 100.0f64.powi(2) + 200.0f64.powi(2)).sqrt();
    let want = path_loss_gain(d, cfg.eta_ris, cfg.l0).unwrap();
    assert!((acc / draws as f64 / want - 1.0).abs() < 0.05);
}

#[test]
fn truth_lies_on_its_uncertainty_sphere() {
    for seed in 0..10 {
        let ch = draw_scene(&SceneConfig { seed, ..SceneConfig::default() }).unwrap();
        ch.check_shapes().unwrap();
        let djd = (&ch.h_jd - &ch.hhat_jd).norm_squared();
        let djr = (&ch.h_jr - &ch.hhat_jr).norm_squared();
        assert!((djd - ch.eps_jd).abs() <= 1e-12 * ch.eps_jd);
        assert!((djr - ch.eps_jr).abs() <= 1e-12 * ch.eps_jr);
        assert!((ch.eps_jd - (0.05 * ch.h_jd.norm()).powi(2)).abs() <= 1e-12 * ch.eps_jd);
    }
}

#[test]
fn element_count_leaves_ground_links_unchanged() {
    let a = draw_scene(&SceneConfig { n: 8, seed: 3, ..SceneConfig::default() }).unwrap();
    let b = draw_scene(&SceneConfig { n: 0, seed: 3, ..SceneConfig::default() }).unwrap();
    assert_eq!(a.h_sd, b.h_sd);
    assert_eq!(a.h_jd, b.h_jd);
    assert_eq!(a.hhat_jd, b.hhat_jd);
    assert_eq!(b.n(), 0);
    assert_eq!(a.without_surface().h_sd, a.h_sd);
}

#[test]
fn json_config_uses_log_units() {
    let c = SceneConfig::from_json_str(r#"{"P_R_max_dBm": 30, "sigma_D2_dBW": -100, "lambda_max_dB": 0, "L0_dB": -30}"#).unwrap();
    assert!((c.p_r_max - 1.0).abs() < 1e-12);
    assert!((c.sigma_d2 - 1e-10).abs() < 1e-22);
    assert!((c.lambda_max - 1.0).abs() < 1e-12);
    assert!((c.l0 - 1e-3).abs() < 1e-15);
    let back = SceneConfig::from_json_str(&c.to_json_string()).unwrap();
    assert!((back.p_r_max - c.p_r_max).abs() < 1e-12 * c.p_r_max);
    assert_eq!(back.n, c.n);
    assert!(SceneConfig::from_json_str(r#"{"delta": -1}"#).is_err());
    assert!(SceneConfig::from_json_str(r#"{"c_S": 0}"#).is_err());
    assert!(SceneConfig::from_json_str("not json").is_err());
}

proptest! {
    #[test]
    fn db_round_trips(x in -200.0f64..200.0) {
        prop_assert!((linear_to_db(db_to_linear(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert!((amplitude_to_db(db_to_amplitude(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn path_loss_decreases_with_distance(d in 1.0f64..1e4, extra in 0.001f64..100.0, eta in 0.5f64..5.0) {
        let a = path_loss_gain(d, eta, 1e-2).unwrap();
        let b = path_loss_gain(d + extra, eta, 1e-2).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn uncertainty_radius_is_exact(seed in 0u64..500, delta in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = antijam_core::scene::random_channel_set(&mut rng, 1, 2, 3, 0, 0.0).h_jd;
        let u = make_uncertainty(&h, delta, &mut rng);
        let d = (&h - &u.estimate).norm_squared();
        prop_assert!((d - u.radius).abs() <= 1e-12 * u.radius.max(1e-300));
        prop_assert!((u.radius - (delta * h.norm()).powi(2)).abs() <= 1e-12 * u.radius.max(1e-300));
    }
}
