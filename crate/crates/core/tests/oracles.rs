use tiltlab_core::oracles::{fixed_end_chi, oriented_alpha, oriented_pcl, oriented_pt, GaltonWatson};

/// Ball sum of `p^{d(v,u)} (d-1)^{λ (h(u) - h(v))}` on the fixed-end `d`-regular tree.
fn fixed_end_chi_by_enumeration(d: u32, p: f64, lambda: f64, r: i32) -> f64 {
    let b = f64::from(d - 1);
    let mut total = 0.0;
    for up in 0..=r {
        for down in 0..=(r - up) {
            let count = match (up, down) {
                (_, 0) => 1.0,
                (0, _) => b.powi(down),
                _ => (b - 1.0) * b.powi(down - 1),
            };
            total += count * p.powi(up + down) * b.powf(lambda * f64::from(up - down));
        }
    }
    total
}

#[test]
fn fixed_end_chi_agrees_with_direct_enumeration() {
    for (d, p, lambda) in [(4, 0.2, 0.0), (4, 0.1, 0.5), (3, 0.3, 0.25), (5, 0.15, 0.8), (4, 0.2, -0.3)] {
        let exact = fixed_end_chi(d, p, lambda).unwrap();
        let ball = fixed_end_chi_by_enumeration(d, p, lambda, 200);
        assert!((exact.value - ball).abs() <= 1e-9 * ball + exact.error_bound, "d={d} p={p} λ={lambda}");
    }
}

#[test]
fn critical_cluster_size_tail_has_slope_minus_one_half() {
    let dist = GaltonWatson::tree_cluster(4, 1.0 / 3.0).size_distribution(10_000);
    let ns: Vec<usize> = (0..=20).map(|i| (100.0 * 100f64.powf(f64::from(i) / 20.0)).round() as usize).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| dist.survival(n).value.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 21.0, ys.iter().sum::<f64>() / 21.0);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 0.5).abs() <= 0.02, "slope {slope}");
}

#[test]
fn critical_survival_to_generation_k_decays_like_one_over_k() {
    let gw = GaltonWatson::tree_cluster(4, 1.0 / 3.0);
    let scaled = |k: u32| f64::from(k) * gw.reach_generation(k).value;
    let (a, b) = (scaled(2_000), scaled(4_000));
    assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
    // Kolmogorov: each root child's line survives with probability ~ 2 / (σ² k),
    // σ² = 2/3, and the root has 4/3 children on average.
    assert!((b / 4.0 - 1.0).abs() < 0.01, "{b}");
}

#[test]
fn subcritical_and_trivial_branching() {
    let dead = GaltonWatson::tree_cluster(4, 0.0);
    assert_eq!(dead.extinction_probability().value, 1.0);
    assert_eq!(dead.size_distribution(5).pmf(1).value, 1.0);
    let gw = GaltonWatson::tree_cluster(4, 0.25);
    assert!((gw.size_distribution(3).pmf(1).value - 0.75f64.powi(4)).abs() < 1e-15);
    assert_eq!(gw.extinction_probability().value, 1.0);
    let super_ = GaltonWatson::tree_cluster(4, 0.5);
    let q = super_.offspring_extinction().value;
    assert!((q - (5f64.sqrt() - 2.0)).abs() < 1e-12, "{q}");
}

#[test]
fn oriented_thresholds_are_consistent() {
    let pt = oriented_pt().value;
    let half = oriented_pcl(0.5).unwrap().value;
    assert!((half - pt).abs() < 1e-12);
    assert!((half - 0.3664).abs() < 5e-5, "{half}");
    for lambda in [0.0, 0.2, 0.35] {
        let a = oriented_pcl(lambda).unwrap().value;
        let b = oriented_pcl(1.0 - lambda).unwrap().value;
        assert!((a - b).abs() < 1e-12);
        let alpha = oriented_alpha(a).unwrap();
        assert!((alpha.value - (1.0 - lambda)).abs() <= 1e-9 + alpha.error_bound, "λ={lambda}: {alpha:?}");
    }
}
