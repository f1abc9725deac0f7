//! Exact ground truth for the tree models.
//!
//! Closed forms for the end-fixing and (1,1,2)-orientation automorphism
//! groups of regular trees, the three-equation linear system behind the
//! oriented-tree susceptibility, Galton–Watson generating-function
//! computations for tree clusters, and ball enumerations with certified tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphModel;

/// An exact quantity: the true value lies within `error_bound` of `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub error_bound: f64,
}

impl OracleValue {
    pub fn exact(value: f64) -> Self {
        OracleValue { value, error_bound: 0.0 }
    }
}

fn check_degree(d: u32) -> Result<f64> {
    if d < 3 {
        Err(Error::Domain(format!("tree degree must be at least 3, got {d}")))
    } else {
        Ok(f64::from(d - 1))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// `p_c(λ) = (d-1)^(-max(λ, 1-λ))` for the end-fixing group.
pub fn fixed_end_pcl(d: u32, lambda: f64) -> Result<OracleValue> {
    let b = check_degree(d)?;
    Ok(OracleValue::exact(b.powf(-lambda.max(1.0 - lambda))))
}

/// `α_p = β_p = log_{d-1}(1/p)`.
pub fn fixed_end_alpha(d: u32, p: f64) -> Result<OracleValue> {
    let b = check_degree(d)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("alpha needs p in (0, 1], got {p}")));
    }
    Ok(OracleValue::exact((1.0 / p).ln() / b.ln()))
}

/// Tilted susceptibility of the end-fixing group:
/// `(1 - p^2) / ((1 - (d-1)^(1-λ) p)(1 - (d-1)^λ p))`.
pub fn fixed_end_chi(d: u32, p: f64, lambda: f64) -> Result<OracleValue> {
    let b = check_degree(d)?;
    check_probability(p)?;
    let pc = fixed_end_pcl(d, lambda)?.value;
    if p >= pc {
        return Err(Error::Divergent(format!(
            "chi diverges for p = {p} >= p_c({lambda}) = {pc} on the {d}-regular tree"
        )));
    }
    let den = (1.0 - b.powf(1.0 - lambda) * p) * (1.0 - b.powf(lambda) * p);
    Ok(OracleValue::exact((1.0 - p * p) / den))
}

/// `p_c(λ)` for the (1,1,2)-orientation group.
pub fn oriented_pcl(lambda: f64) -> Result<OracleValue> {
    let a = 2f64.powf(lambda) + 2f64.powf(1.0 - lambda) + 1.0;
    let disc = a * a - 12.0;
    if disc < 0.0 {
        return Err(Error::Domain(format!("negative discriminant {disc} at lambda = {lambda}")));
    }
    // Rationalized form of (a - sqrt(a^2 - 12)) / 6 avoids cancellation.
    Ok(OracleValue::exact(2.0 / (a + disc.sqrt())))
}

/// `p_t` for the (1,1,2)-orientation group.
pub fn oriented_pt() -> OracleValue {
    oriented_pcl(0.5).expect("discriminant is positive at 1/2")
}

/// `α_p = log2((3p^2 - p + 1 + sqrt(9p^4 - 6p^3 - p^2 - 2p + 1)) / (2p))` for `p <= p_t`.
///
/// The discriminant factors as `(A - 2√2 p)(A + 2√2 p)` with `A = 3p^2 - p + 1`;
/// the first factor vanishes at `p_t`, where `α` has a square-root
/// singularity, so a first factor within rounding of zero is treated as zero
/// and the induced uncertainty is reported in the error bound.
pub fn oriented_alpha(p: f64) -> Result<OracleValue> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("alpha needs p in (0, 1], got {p}")));
    }
    let a = 3.0 * p * p - p + 1.0;
    let r = 2.0 * std::f64::consts::SQRT_2 * p;
    let (near, far) = (a - r, a + r);
    let noise = 8.0 * f64::EPSILON * a;
    if near < -noise {
        let disc = near * far;
        return Err(Error::Domain(format!("negative discriminant {disc} at p = {p} (p > p_t)")));
    }
    if near.abs() <= noise {
        let spread = (noise * far).sqrt() / (a * std::f64::consts::LN_2);
        return Ok(OracleValue { value: (a / (2.0 * p)).log2(), error_bound: spread });
    }
    Ok(OracleValue::exact(((a + (near * far).sqrt()) / (2.0 * p)).log2()))
}

/// Closed form `(1 - p^2) / (1 - (2^λ + 2^(1-λ) + 1) p + 3p^2)`.
pub fn oriented_chi_closed(p: f64, lambda: f64) -> Result<OracleValue> {
    check_probability(p)?;
    let pc = oriented_pcl(lambda)?.value;
    if p >= pc {
        return Err(Error::Divergent(format!("chi diverges for p = {p} >= p_c({lambda}) = {pc}")));
    }
    let a = 2f64.powf(lambda) + 2f64.powf(1.0 - lambda) + 1.0;
    Ok(OracleValue::exact((1.0 - p * p) / (1.0 - a * p + 3.0 * p * p)))
}

/// Solves for the three restricted susceptibilities `(χ+, χ0, χ-)` (cluster
/// of `v` with its outgoing, unoriented or one incoming edge removed) and
/// assembles `χ = 1 + 2^(1-λ) p χ+ + p χ0 + 2^λ p χ-`.
pub fn oriented_chi_system(p: f64, lambda: f64) -> Result<OracleValue> {
    check_probability(p)?;
    let pc = oriented_pcl(lambda)?.value;
    if p >= pc {
        return Err(Error::Divergent(format!("chi diverges for p = {p} >= p_c({lambda}) = {pc}")));
    }
    let down = 2f64.powf(-lambda) * p;
    let up = 2f64.powf(lambda) * p;
    let mut m = [
        [1.0 - 2.0 * down, -p, 0.0, 1.0],
        [-2.0 * down, 1.0, -up, 1.0],
        [-down, -p, 1.0 - up, 1.0],
    ];
    let [plus, flat, minus] = solve3(&mut m)
        .ok_or_else(|| Error::Divergent(format!("singular system at p = {p}, lambda = {lambda}")))?;
    if plus <= 0.0 || flat <= 0.0 || minus <= 0.0 {
        return Err(Error::Divergent(format!("non-positive solution at p = {p}, lambda = {lambda}")));
    }
    Ok(OracleValue::exact(1.0 + 2.0 * down * plus + p * flat + up * minus))
}

/// Gaussian elimination with partial pivoting on an augmented 3x4 matrix.
fn solve3(m: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    const PIVOT_FLOOR: f64 = 1e-13;
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < PIVOT_FLOOR {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][3] - tail) / m[row][row];
    }
    Some(x)
}

/// `Binomial(trials, p)` offspring law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binomial {
    pub trials: u32,
    pub p: f64,
}

impl Binomial {
    pub fn pgf(&self, s: f64) -> f64 {
        (1.0 - self.p + self.p * s).powi(self.trials as i32)
    }

    pub fn pgf_derivative(&self, s: f64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        f64::from(self.trials) * self.p * (1.0 - self.p + self.p * s).powi(self.trials as i32 - 1)
    }

    pub fn mean(&self) -> f64 {
        f64::from(self.trials) * self.p
    }
}

/// Galton–Watson tree whose root has its own offspring law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaltonWatson {
    pub root: Binomial,
    pub offspring: Binomial,
}

impl GaltonWatson {
    /// Percolation cluster of a vertex in the `k`-regular tree.
    pub fn tree_cluster(k: u32, p: f64) -> Self {
        GaltonWatson { root: Binomial { trials: k, p }, offspring: Binomial { trials: k - 1, p } }
    }

    /// Extinction probability of a line started by one non-root individual.
    pub fn offspring_extinction(&self) -> OracleValue {
        let f = self.offspring;
        if f.mean() <= 1.0 {
            return OracleValue::exact(1.0);
        }
        let mut q = 0.0;
        for _ in 0..1_000_000 {
            let next = f.pgf(q);
            let done = (next - q).abs() < 1e-15;
            q = next;
            if done {
                break;
            }
        }
        for _ in 0..8 {
            let g = f.pgf(q) - q;
            let dg = f.pgf_derivative(q) - 1.0;
            if dg.abs() < 1e-300 {
                break;
            }
            q = (q - g / dg).clamp(0.0, 1.0);
        }
        let residual = (f.pgf(q) - q).abs();
        let contraction = (1.0 - f.pgf_derivative(q)).max(1e-300);
        OracleValue { value: q, error_bound: residual / contraction + 4.0 * f64::EPSILON }
    }

    /// Extinction probability of the whole tree, root included.
    pub fn extinction_probability(&self) -> OracleValue {
        let q = self.offspring_extinction();
        let slope = self.root.pgf_derivative(1.0);
        OracleValue { value: self.root.pgf(q.value), error_bound: slope * q.error_bound + 4.0 * f64::EPSILON }
    }

    /// `P(Z_k > 0)` where generation 0 is the root.
    pub fn reach_generation(&self, k: u32) -> OracleValue {
        if k == 0 {
            return OracleValue::exact(1.0);
        }
        let mut s = 0.0;
        for _ in 1..k {
            s = self.offspring.pgf(s);
        }
        OracleValue { value: 1.0 - self.root.pgf(s), error_bound: 4.0 * f64::EPSILON * f64::from(k) }
    }

    /// Exact law of the total progeny `|K|` for sizes up to `n_max`.
    ///
    /// Power-series solution of `G(s) = s (q + p G(s))^m` with the root's
    /// series `s (q + p G(s))^m0`; `O(max(m, m0) n_max^2)`.
    pub fn size_distribution(&self, n_max: usize) -> SizeDistribution {
        assert!((self.root.p - self.offspring.p).abs() == 0.0, "root and offspring share p");
        let p = self.offspring.p;
        let q = 1.0 - p;
        let m = self.offspring.trials as usize;
        let m0 = self.root.trials as usize;
        let top = m.max(m0).max(1);
        // powers[j][i] = [s^i] H^j with H = q + p G; powers[0] = 1.
        let mut h = vec![0.0; n_max + 1];
        let mut powers: Vec<Vec<f64>> = vec![vec![0.0; n_max + 1]; top + 1];
        let mut pmf = vec![0.0; n_max + 1];
        h[0] = q;
        powers[0][0] = 1.0;
        for n in 1..=n_max {
            let i = n - 1;
            // H[i] is known (g_i was set last step); extend powers to index i.
            for j in 1..=top {
                let (lower, upper) = powers.split_at_mut(j);
                let prev = &lower[j - 1];
                let mut acc = 0.0;
                for l in 0..=i {
                    acc += h[l] * prev[i - l];
                }
                upper[0][i] = acc;
            }
            let g_n = if m == 0 { if n == 1 { 1.0 } else { 0.0 } } else { powers[m][i] };
            h[n] = p * g_n;
            pmf[n] = powers[m0][i];
        }
        SizeDistribution::new(pmf)
    }
}

/// `P(|K| = n)` for `n = 0..=n_max` (entry 0 is always zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SizeDistribution {
    pmf: Vec<f64>,
    survival: Vec<f64>,
}

impl SizeDistribution {
    fn new(pmf: Vec<f64>) -> Self {
        let mut survival = vec![1.0; pmf.len()];
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for n in 1..pmf.len() {
            // Neumaier summation of P(|K| < n).
            let x = pmf[n - 1];
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            survival[n] = 1.0 - (sum + comp);
        }
        SizeDistribution { pmf, survival }
    }

    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self, n: usize) -> OracleValue {
        OracleValue { value: self.pmf[n], error_bound: 8.0 * f64::EPSILON * self.pmf[n] * n as f64 }
    }

    /// `P(|K| >= n)`.
    pub fn survival(&self, n: usize) -> OracleValue {
        OracleValue { value: self.survival[n], error_bound: 16.0 * f64::EPSILON * n.max(1) as f64 }
    }
}

/// Summand of a ball enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BallIntegrand {
    /// `Σ_u τ(v,u) Δ(v,u)^λ`.
    Chi { lambda: f64 },
    /// `Σ_{x,y} τ(v,x) τ(x,y) τ(y,v)`.
    Triangle,
}

/// Sum over a tree ball with a certified tail, using `τ_p(u, v) = p^d(u,v)`.
///
/// Vertices are enumerated by geometric class with exact multiplicities: for
/// the susceptibility, the number of steps up toward the fixed end and then
/// down (`a + b <= radius`); for the triangle, the three legs of the tripod
/// spanned by `v, x, y` (`a + b + c <= radius`).
pub fn ball_brute_force(model: GraphModel, p: f64, radius: u32, integrand: BallIntegrand) -> Result<OracleValue> {
    check_probability(p)?;
    match (model, integrand) {
        (GraphModel::FixedEndTree { k }, BallIntegrand::Chi { lambda }) => chi_ball(k, p, radius, lambda),
        (GraphModel::FixedEndTree { k }, BallIntegrand::Triangle) => triangle_ball(k, p, radius),
        (GraphModel::OrientedTree112, BallIntegrand::Triangle) => triangle_ball(4, p, radius),
        (m, i) => Err(Error::Unsupported(format!("no ball oracle for {i:?} on {m}"))),
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Bound on `Σ_{s > radius} poly(s) r^s` given the first omitted term and a
/// ratio bound valid for every later term.
fn geometric_tail(first: f64, ratio: f64) -> Option<f64> {
    (ratio < 1.0).then(|| first / (1.0 - ratio))
}

fn chi_ball(k: u32, p: f64, radius: u32, lambda: f64) -> Result<OracleValue> {
    let b = check_degree(k)?;
    let up = p * b.powf(lambda);
    let down = p * b.powf(1.0 - lambda);
    let (lo, hi) = if up <= down { (up, down) } else { (down, up) };
    if hi >= 1.0 {
        return Err(Error::Divergent(format!(
            "ball tail does not converge: max(p (k-1)^λ, p (k-1)^(1-λ)) = {hi} at radius {radius}"
        )));
    }
    // Class (a, b) contributes at most up^a down^b, so shell s is bounded by
    // the complete homogeneous sum h_s(up, down); sum it over s > radius.
    let n = f64::from(radius) + 2.0;
    let tail = if hi - lo > 1e-6 * hi {
        (hi.powf(n) / (1.0 - hi) - lo.powf(n) / (1.0 - lo)) / (hi - lo)
    } else {
        hi.powf(n - 1.0) * (n / (1.0 - hi) + hi / ((1.0 - hi) * (1.0 - hi)))
    };
    let mut acc = Neumaier::default();
    for a in 0..=radius {
        for bb in 0..=radius - a {
            let mult = match (a, bb) {
                (_, 0) => 1.0,
                (0, _) => b.powi(bb as i32),
                _ => (b - 1.0) * b.powi(bb as i32 - 1),
            };
            let weight = b.powf(lambda * (f64::from(a) - f64::from(bb)));
            acc.add(mult * p.powi((a + bb) as i32) * weight);
        }
    }
    let value = acc.value();
    Ok(OracleValue { value, error_bound: tail + 8.0 * f64::EPSILON * value })
}

fn triangle_ball(d: u32, p: f64, radius: u32) -> Result<OracleValue> {
    let deg = f64::from(d);
    let b = check_degree(d)?;
    let leg = |len: u32, choices: f64| if len == 0 { 1.0 } else { choices * b.powi(len as i32 - 1) };
    let r = (deg - 1.0) * p * p;
    let rr = f64::from(radius);
    let first = (deg / b).powi(3) * (rr + 3.0) * (rr + 2.0) / 2.0 * r.powf(rr + 1.0);
    let tail = geometric_tail(first, r * (rr + 4.0) / (rr + 2.0)).ok_or_else(|| {
        Error::Divergent(format!("triangle tail does not converge: (d-1) p^2 = {r} at radius {radius}"))
    })?;
    let mut acc = Neumaier::default();
    for a in 0..=radius {
        let n_a = leg(a, deg);
        for bb in 0..=radius - a {
            let n_b = leg(bb, deg - f64::from(u8::from(a > 0)));
            for c in 0..=radius - a - bb {
                let n_c = leg(c, deg - f64::from(u8::from(a > 0)) - f64::from(u8::from(bb > 0)));
                acc.add(n_a * n_b * n_c * p.powi(2 * (a + bb + c) as i32));
            }
        }
    }
    let value = acc.value();
    Ok(OracleValue { value, error_bound: tail + 8.0 * f64::EPSILON * value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fixed_end_values() {
        assert!(close(fixed_end_chi(4, 0.2, 0.0).unwrap().value, 3.0, 1e-12));
        assert!(close(fixed_end_pcl(4, 0.0).unwrap().value, 1.0 / 3.0, 1e-15));
        assert!(close(fixed_end_pcl(4, 0.5).unwrap().value, 3f64.powf(-0.5), 1e-15));
        assert!(close(fixed_end_alpha(4, 1.0 / 3.0).unwrap().value, 1.0, 1e-12));
        assert!(close(fixed_end_alpha(4, 0.5).unwrap().value, 0.630_929_753_571_457_4, 1e-12));
        let near = fixed_end_chi(4, 3f64.powf(-0.5) - 1e-2, 0.5).unwrap().value;
        assert!(close(near, 2260.4, 0.1), "{near}");
        assert!(matches!(fixed_end_chi(4, 0.34, 0.0), Err(Error::Divergent(_))));
        assert!(fixed_end_chi(2, 0.1, 0.0).is_err());
    }

    #[test]
    fn lambda_zero_and_one_agree() {
        for i in 1..33 {
            let p = i as f64 / 100.0;
            let a = fixed_end_chi(4, p, 0.0).unwrap().value;
            let b = fixed_end_chi(4, p, 1.0).unwrap().value;
            assert!(close(a, b, 1e-12 * a));
        }
    }

    #[test]
    fn chi_at_half_diverges_like_inverse_square() {
        // The closed form's leading coefficient is (d-2)/(d-1)^2.
        for d in [3u32, 4, 6] {
            let pt = fixed_end_pcl(d, 0.5).unwrap().value;
            let eps = 1e-6;
            let scaled = fixed_end_chi(d, pt - eps, 0.5).unwrap().value * eps * eps;
            let want = f64::from(d - 2) / f64::from((d - 1) * (d - 1));
            assert!(close(scaled, want, 1e-4), "d={d}: {scaled} vs {want}");
        }
    }

    #[test]
    fn chi_below_threshold_has_mean_field_lower_bound() {
        for &lambda in &[0.0, 0.25, 0.75, 1.3] {
            let pc = fixed_end_pcl(4, lambda).unwrap().value;
            let eps: Vec<f64> = (0..=20).map(|i| 1e-3 * 100f64.powf(i as f64 / 20.0)).collect();
            let c = eps
                .iter()
                .map(|e| fixed_end_chi(4, pc - e, lambda).unwrap().value * e)
                .fold(f64::INFINITY, f64::min);
            assert!(c > 0.05, "lambda={lambda}: c = {c}");
        }
    }

    #[test]
    fn oriented_values() {
        assert!(close(oriented_chi_closed(0.2, 0.0).unwrap().value, 3.0, 1e-12));
        assert!(close(oriented_chi_system(0.2, 0.0).unwrap().value, 3.0, 1e-12));
        let want = (2.0 * 2f64.sqrt() + 1.0 - ((2.0 * 2f64.sqrt() + 1.0).powi(2) - 12.0).sqrt()) / 6.0;
        assert!(close(oriented_pcl(0.5).unwrap().value, want, 1e-14));
        assert!(close(oriented_pt().value, 0.366_406_859_784_108, 1e-12));
        assert!(close(oriented_pcl(0.0).unwrap().value, 1.0 / 3.0, 1e-14));
        assert!(matches!(oriented_chi_system(0.37, 0.5), Err(Error::Divergent(_))));
        assert!(matches!(oriented_alpha(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn oriented_pcl_symmetric_and_alpha_inverts_it() {
        for i in -12..=24 {
            let lambda = i as f64 / 12.0;
            let a = oriented_pcl(lambda).unwrap().value;
            let b = oriented_pcl(1.0 - lambda).unwrap().value;
            assert!(close(a, b, 1e-14));
            let alpha = oriented_alpha(a).unwrap().value;
            assert!(close(alpha, lambda.max(1.0 - lambda), 1e-8), "lambda={lambda}: {alpha}");
        }
    }

    #[test]
    fn extinction() {
        let gw = GaltonWatson::tree_cluster(4, 0.0);
        assert_eq!(gw.extinction_probability().value, 1.0);
        assert_eq!(gw.size_distribution(3).pmf(1).value, 1.0);
        let gw = GaltonWatson::tree_cluster(4, 0.6);
        let q = gw.offspring_extinction();
        let f = gw.offspring;
        assert!((q.value - f.pgf(q.value)).abs() < 1e-14);
        assert!(q.value < 1.0);
        assert!(GaltonWatson::tree_cluster(4, 1.0 / 3.0).offspring_extinction().value == 1.0);
    }

    #[test]
    fn isolated_origin_probability() {
        let gw = GaltonWatson::tree_cluster(4, 0.25);
        let dist = gw.size_distribution(10);
        assert!(close(dist.pmf(1).value, 0.75f64.powi(4), 1e-15));
        assert!(close(dist.survival(1).value, 1.0, 1e-15));
        assert!(close(dist.survival(2).value, 1.0 - 0.75f64.powi(4), 1e-14));
    }

    #[test]
    fn chi_ball_matches_closed_form() {
        let m = GraphModel::FixedEndTree { k: 4 };
        for &(lambda, radius) in &[(0.0, 40u32), (0.0, 60), (0.3, 60), (0.5, 80), (-0.4, 60)] {
            let ball = ball_brute_force(m, 0.2, radius, BallIntegrand::Chi { lambda }).unwrap();
            let exact = fixed_end_chi(4, 0.2, lambda).unwrap().value;
            assert!(close(ball.value, exact, ball.error_bound + 1e-13), "{lambda}: {ball:?} vs {exact}");
        }
        let tight = ball_brute_force(m, 0.2, 60, BallIntegrand::Chi { lambda: 0.0 }).unwrap();
        assert!(tight.error_bound < 1e-12, "{tight:?}");
        assert!(ball_brute_force(m, 0.34, 30, BallIntegrand::Chi { lambda: 0.0 }).is_err());
    }

    #[test]
    fn triangle_ball_basics() {
        let m = GraphModel::FixedEndTree { k: 4 };
        assert_eq!(ball_brute_force(m, 0.0, 5, BallIntegrand::Triangle).unwrap().value, 1.0);
        let t = ball_brute_force(m, 0.15, 14, BallIntegrand::Triangle).unwrap();
        assert!(t.error_bound < 1e-6);
        let more = ball_brute_force(m, 0.15, 30, BallIntegrand::Triangle).unwrap();
        assert!(close(t.value, more.value, t.error_bound));
        assert!(ball_brute_force(GraphModel::OrientedTree112, 0.15, 14, BallIntegrand::Triangle).unwrap().value
            == t.value);
        assert!(ball_brute_force(GraphModel::OrientedTree112, 0.2, 10, BallIntegrand::Chi { lambda: 0.0 }).is_err());
    }

    #[test]
    fn size_distribution_matches_hitting_time_formula() {
        use statrs::distribution::{Binomial as B, Discrete};
        for &(k, p) in &[(4u32, 0.25), (4, 1.0 / 3.0), (3, 0.4), (5, 0.1)] {
            let dist = GaltonWatson::tree_cluster(k, p).size_distribution(60);
            let q = 1.0 - p;
            let m = u64::from(k - 1);
            for n in 1..=60u64 {
                let want = if n == 1 {
                    q.powi(k as i32)
                } else {
                    let inner = B::new(p, m * (n - 1)).unwrap();
                    (1..=u64::from(k).min(n - 1))
                        .map(|j| {
                            let root = B::new(p, u64::from(k)).unwrap().pmf(j);
                            root * j as f64 / (n - 1) as f64 * inner.pmf(n - 1 - j)
                        })
                        .sum()
                };
                let got = dist.pmf(n as usize).value;
                assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-15, "k={k} p={p} n={n}: {got} vs {want}");
            }
        }
    }
}
