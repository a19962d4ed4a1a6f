use aen_shaping::{
    db_to_linear, gen_log, gen_martinez, gen_uniform, gray_labels, mi_bicm_mc, mi_bicm_quadrature,
    mi_cm_mc, mi_cm_quadrature, Constellation,
};

fn families(m: usize) -> Vec<Constellation> {
    vec![
        gen_uniform(m).unwrap(),
        gen_martinez(m, 1.618).unwrap(),
        gen_log(m).unwrap(),
    ]
}

#[test]
fn binary_set_at_ten_matches_exact_sum() {
    // {0, 2} at γ = 10: symbol 0 is confused only when n > 2.
    let gamma = 10.0f64;
    let p = (-2.0 * gamma).exp();
    let d = p.ln_1p();
    let exact = 1.0
        - 0.5 * (d / std::f64::consts::LN_2)
        - 0.5 * p * (2.0 * gamma + d) / std::f64::consts::LN_2;
    let q = mi_cm_quadrature(&gen_uniform(2).unwrap(), gamma, 512).unwrap();
    assert!((q.value - exact).abs() < 1e-15, "{} vs {exact}", q.value);
}

#[test]
fn monte_carlo_matches_quadrature_off_saturation() {
    // 10^6 samples; points where every symbol pair is crossed often enough
    // for the sample variance to reflect the spread of the estimate.
    for m in [2usize, 4, 8, 16] {
        let lab = gray_labels(m).unwrap();
        for c in families(m) {
            for gamma in [1.0, 10.0] {
                if m == 2 && gamma == 10.0 {
                    continue;
                }
                let mc = mi_cm_mc(&c, gamma, 1_000_000, 2).unwrap();
                let q = mi_cm_quadrature(&c, gamma, 64).unwrap();
                assert!(
                    (mc.value - q.value).abs() <= 3.0 * mc.std_error,
                    "cm {:?} M={m} γ={gamma}: {} vs {} (se {})",
                    c.family(),
                    mc.value,
                    q.value,
                    mc.std_error
                );
                let mc = mi_bicm_mc(&c, &lab, gamma, 1_000_000, 2).unwrap();
                let q = mi_bicm_quadrature(&c, &lab, gamma, 64).unwrap();
                assert!(
                    (mc.value - q.value).abs() <= 3.0 * mc.std_error,
                    "bicm {:?} M={m} γ={gamma}: {} vs {} (se {})",
                    c.family(),
                    mc.value,
                    q.value,
                    mc.std_error
                );
            }
        }
    }
}

#[test]
fn log4_bicm_at_ten_with_ten_million_samples() {
    let c = gen_log(4).unwrap();
    let lab = gray_labels(4).unwrap();
    let mc = mi_bicm_mc(&c, &lab, 10.0, 10_000_000, 9).unwrap();
    let q = mi_bicm_quadrature(&c, &lab, 10.0, 512).unwrap();
    assert!((mc.value - q.value).abs() <= 3.0 * mc.std_error);
    assert!(mc.std_error > 0.0);
}

#[test]
fn estimates_respect_bounds() {
    for m in [4usize, 16, 64] {
        let lab = gray_labels(m).unwrap();
        for c in families(m) {
            for db in [-10.0, 0.0, 10.0, 20.0, 40.0] {
                let g = db_to_linear(db);
                let ceiling = (m as f64).log2();
                for e in [
                    mi_cm_mc(&c, g, 100_000, 4).unwrap(),
                    mi_bicm_mc(&c, &lab, g, 100_000, 4).unwrap(),
                ] {
                    assert!(e.value >= -3.0 * e.std_error);
                    assert!(e.value <= ceiling + 3.0 * e.std_error);
                    assert!(e.std_error >= 0.0);
                }
            }
        }
    }
}

#[test]
fn common_random_numbers_give_monotone_curves() {
    let grid: Vec<f64> = (0..=40).map(|i| -5.0 + 0.5 * i as f64).collect();
    for c in [gen_log(16).unwrap(), gen_martinez(64, 1.618).unwrap()] {
        let lab = gray_labels(c.len()).unwrap();
        let cm: Vec<f64> = grid
            .iter()
            .map(|&db| mi_cm_mc(&c, db_to_linear(db), 200_000, 8).unwrap().value)
            .collect();
        let bicm: Vec<f64> = grid
            .iter()
            .map(|&db| {
                mi_bicm_mc(&c, &lab, db_to_linear(db), 200_000, 8)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(cm.windows(2).all(|w| w[1] >= w[0]), "{cm:?}");
        assert!(bicm.windows(2).all(|w| w[1] >= w[0]), "{bicm:?}");
    }
}

#[test]
fn shard_boundaries_do_not_matter_for_worker_count() {
    let c = gen_log(128).unwrap();
    let lab = gray_labels(128).unwrap();
    let n = 3 * aen_shaping::SHARD_LEN + 17;
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| mi_bicm_mc(&c, &lab, 20.0, n, 77).unwrap());
    let b = four.install(|| mi_bicm_mc(&c, &lab, 20.0, n, 77).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.n_samples, n);
}
