use tiltlab_core::estimators::{
    beta_from_downward, estimate_alpha, estimate_beta, estimate_beta_downward, estimate_chi, estimate_chi_many,
    estimate_layer_count, estimate_magnetization, estimate_peak_survival, estimate_slab_crossing, estimate_tail,
    estimate_triangle, magnetization_profile, DepthRule, FitOptions, McConfig,
};
use tiltlab_core::oracles::{ball_brute_force, BallIntegrand};
use tiltlab_core::{GraphModel, PercConfig, SlabSpec};

const TREE4: GraphModel = GraphModel::FixedEndTree { k: 4 };
const PRODUCT41: GraphModel = GraphModel::TreeTimesLattice { k: 4, d: 1 };

fn mc(model: GraphModel, p: f64, samples: u64, seed: u64) -> McConfig {
    McConfig::new(PercConfig::isotropic(model, p, seed).unwrap(), samples)
}

fn assert_within(x: f64, target: f64, se: f64, k: f64, what: &str) {
    assert!((x - target).abs() <= k * se, "{what}: {x} vs {target} (se {se})");
}

/// Susceptibility of the 4-regular tree at `λ = 0`: `(1 + p) / (1 - 3p)`.
fn tree_chi_untilted(p: f64) -> f64 {
    (1.0 + p) / (1.0 - 3.0 * p)
}

/// `Σ_u p^{d(v,u)} 3^{λ (h(u) - h(v))}` over the radius-`r` ball of the
/// fixed-end 4-regular tree: `a` steps toward the end then `b` away from it.
fn tree_chi_ball(p: f64, lambda: f64, r: i32) -> f64 {
    let mut total = 0.0;
    for a in 0..=r {
        for b in 0..=(r - a) {
            let count = match (a, b) {
                (_, 0) => 1.0,
                (0, _) => 3f64.powi(b),
                _ => 2.0 * 3f64.powi(b - 1),
            };
            total += count * p.powi(a + b) * 3f64.powf(lambda * f64::from(a - b));
        }
    }
    total
}

#[test]
fn chi_matches_the_tree_formula() {
    let r = estimate_chi(&mc(TREE4, 0.2, 100_000, 1), 0.0).unwrap();
    assert!((tree_chi_untilted(0.2) - 3.0).abs() < 1e-12);
    assert_within(r.mean, 3.0, r.std_error, 3.0, "chi");
    assert_eq!(r.truncation_fraction, 0.0);
}

#[test]
fn tilted_chi_matches_ball_enumeration() {
    let exact = tree_chi_ball(0.1, 0.5, 14);
    let tail = tree_chi_ball(0.1, 0.5, 40) - exact;
    assert!(tail < 1e-6, "tail {tail}");
    let r = estimate_chi(&mc(TREE4, 0.1, 100_000, 2), 0.5).unwrap();
    assert_within(r.mean, exact, r.std_error, 3.0, "tilted chi");
}

#[test]
fn zero_probability_gives_exactly_the_origin() {
    for model in [TREE4, PRODUCT41, GraphModel::OrientedTree112, GraphModel::Grandparent { k: 3 }] {
        for r in estimate_chi_many(&mc(model, 0.0, 200, 3), &[-1.0, 0.0, 0.7]).unwrap() {
            assert_eq!((r.mean, r.std_error), (1.0, 0.0), "{model}");
        }
        let b = estimate_beta(&mc(model, 0.0, 200, 3), 3, DepthRule::Fixed(2), FitOptions::default()).unwrap();
        assert!(b.points.iter().all(|pt| pt.value == 0.0));
        assert_eq!(estimate_triangle(&mc(model, 0.0, 200, 3)).unwrap().mean, 1.0);
    }
}

#[test]
fn slab_crossing_follows_the_ancestor_chain() {
    let slab = SlabSpec::bounded(0, 6).unwrap();
    let r = estimate_slab_crossing(&mc(TREE4, 0.5, 100_000, 4), slab, 6).unwrap();
    assert_within(r.mean, 0.5f64.powi(6), r.std_error, 3.0, "crossing");
    assert_eq!(estimate_slab_crossing(&mc(TREE4, 0.5, 500, 4), slab, 0).unwrap().mean, 1.0);
    assert_eq!(estimate_slab_crossing(&mc(TREE4, 1.0, 50, 4), slab, 6).unwrap().mean, 1.0);
}

#[test]
fn alpha_on_the_tree() {
    let log3 = |x: f64| x.ln() / 3f64.ln();
    for (p, target) in [(0.5, log3(2.0)), (1.0 / 3.0, 1.0)] {
        let s = estimate_alpha(&mc(TREE4, p, 40_000, 5), 8, FitOptions::default()).unwrap();
        let (rate, se) = (s.fitted_rate.unwrap(), s.rate_std_error.unwrap());
        assert!((rate - target).abs() <= 3.0 * se + 0.01, "p={p}: {rate} ± {se} vs {target}");
    }
    let s = estimate_alpha(&mc(TREE4, 1.0, 20, 5), 6, FitOptions::default()).unwrap();
    assert!(s.points.iter().all(|pt| pt.value == 1.0));
    assert_eq!(s.fitted_rate, Some(0.0));
}

#[test]
fn beta_on_the_tree_upward_and_downward() {
    let p: f64 = 0.4;
    let target = (1.0 / p).ln() / 3f64.ln();
    let m = mc(TREE4, p, 40_000, 6);
    let up = estimate_beta(&m, 8, DepthRule::Fixed(10), FitOptions::default()).unwrap();
    for pt in &up.points {
        assert_within(pt.value, p.powi(pt.n), pt.std_error, 3.5, "upward layer count");
    }
    let (rate, se) = (up.fitted_rate.unwrap(), up.rate_std_error.unwrap());
    assert_within(rate, target, se, 3.0, "beta");

    let down = estimate_beta_downward(&m, 6, 10, FitOptions::default()).unwrap();
    for pt in &down.points {
        assert_within(pt.value, 1.2f64.powi(pt.n), pt.std_error, 3.5, "downward layer count");
    }
    let (beta, _) = beta_from_downward(&down).unwrap();
    assert!((beta - target).abs() < 0.03, "{beta} vs {target}");
}

#[test]
fn markov_inequality_between_alpha_and_beta() {
    for (model, p) in [(TREE4, 0.4), (PRODUCT41, 0.2), (GraphModel::OrientedTree112, 0.2)] {
        let m = mc(model, p, 20_000, 7);
        let a = estimate_alpha(&m, 6, FitOptions::default()).unwrap();
        let b = estimate_beta(&m, 6, DepthRule::Fixed(8), FitOptions::default()).unwrap();
        let (ra, sa) = (a.fitted_rate.unwrap(), a.rate_std_error.unwrap());
        let (rb, sb) = (b.fitted_rate.unwrap(), b.rate_std_error.unwrap());
        assert!(ra >= rb - (sa + sb), "{model} p={p}: alpha {ra} ± {sa}, beta {rb} ± {sb}");
    }
}

#[test]
fn layer_counts_are_submultiplicative_on_a_product() {
    let count = |k: i32, seed: u64| {
        let r = estimate_layer_count(&mc(PRODUCT41, 0.2, 100_000, seed), SlabSpec::bounded(0, k).unwrap(), k).unwrap();
        (r.mean, r.std_error)
    };
    for (m, n) in [(1, 1), (1, 2), (2, 2)] {
        let (a, sa) = count(m, 10 + m as u64);
        let (b, sb) = count(n, 20 + n as u64);
        let (c, sc) = count(m + n, 30 + (m + n) as u64);
        let product_se = (b * sa).hypot(a * sb);
        assert!(c <= a * b + 3.0 * sc.hypot(product_se), "m={m} n={n}: {c} vs {a}·{b}");
    }
}

#[test]
fn coupled_estimates_increase_with_p() {
    let ps = [0.05, 0.1, 0.15, 0.2];
    let slab = SlabSpec::bounded(-3, 3).unwrap();
    let mut last = [f64::NEG_INFINITY; 4];
    for &p in &ps {
        let m = mc(PRODUCT41, p, 3_000, 8);
        let now = [
            estimate_chi(&m, 0.3).unwrap().mean,
            estimate_slab_crossing(&m, slab, 2).unwrap().mean,
            estimate_layer_count(&m, slab, 2).unwrap().mean,
            estimate_tail(&m, &[5], (5, 10)).unwrap().vertex_count[0].lower,
        ];
        for (i, (x, y)) in last.iter().zip(&now).enumerate() {
            assert!(y >= x, "statistic {i} decreased at p={p}: {x} -> {y}");
        }
        last = now;
    }
}

#[test]
fn lambda_symmetry_on_a_product() {
    let a = estimate_chi(&mc(PRODUCT41, 0.15, 50_000, 9), 0.2).unwrap();
    let b = estimate_chi(&mc(PRODUCT41, 0.15, 50_000, 10), 0.8).unwrap();
    assert_within(a.mean, b.mean, a.combined_se(&b), 3.0, "chi(0.2) vs chi(0.8)");
}

#[test]
fn triangle_matches_ball_oracle() {
    let oracle = ball_brute_force(TREE4, 0.15, 14, BallIntegrand::Triangle).unwrap();
    assert!(oracle.error_bound < 1e-6);
    let r = estimate_triangle(&mc(TREE4, 0.15, 100_000, 11)).unwrap();
    assert_within(r.mean, oracle.value, r.std_error, 3.0, "triangle");
}

#[test]
fn magnetization_limits_and_field_derivative() {
    let m = mc(TREE4, 0.25, 50_000, 12);
    let zero = estimate_magnetization(&m, 0.3, 0.0).unwrap();
    assert_eq!((zero.mean, zero.std_error), (0.0, 0.0));
    let large = estimate_magnetization(&m, 0.3, 1e3).unwrap();
    assert!(large.mean > 1.0 - 1e-12);
    let profile = magnetization_profile(&m, 0.3, 0.5, 1e-2).unwrap();
    let diff = profile.central_difference.mean - profile.chi_h.mean;
    assert!(diff.abs() <= 3.0 * profile.paired_difference.std_error + 1e-3, "{diff}");
}

/// `P(Z_k > 0)` for a Galton-Watson process with Binomial(3, p) offspring, by iteration.
fn reach(k: i32, p: f64) -> f64 {
    let f = |s: f64| (1.0 - p + p * s).powi(3);
    let mut s = 0.0;
    for _ in 0..k {
        s = f(s);
    }
    1.0 - s
}

#[test]
fn peak_survival_follows_the_downward_branching_process() {
    let p = 0.25;
    let peak = estimate_peak_survival(&mc(TREE4, p, 100_000, 13), 6, FitOptions::default()).unwrap();
    let k0 = &peak.series.points[0];
    assert_within(k0.value, 1.0 - p, k0.std_error, 3.0, "k=0");
    for pt in &peak.series.points {
        assert_within(pt.value, (1.0 - p) * reach(pt.n, p), pt.std_error, 3.5, "peak survival");
    }
    assert!((peak.ratio - 3.0 * p).abs() < 0.05, "ratio {}", peak.ratio);
}

#[test]
fn tail_starts_at_one() {
    let r = estimate_tail(&mc(TREE4, 1.0 / 3.0, 2_000, 14), &[1, 10], (1, 10)).unwrap();
    assert_eq!(r.vertex_count[0].lower, 1.0);
    assert!(r.extrinsic_radius[0].upper <= 1.0);
}
