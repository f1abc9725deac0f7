//! Monte Carlo estimators built on cluster explorations.
//!
//! Every estimator is a pure function of its [`McConfig`]: samples are drawn
//! from per-index streams and reduced in a fixed order, so results do not
//! depend on the execution mode or thread count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{LayerFrame, SlabSpec};
use crate::parallel::{run_samples, Execution, Merge};
use crate::percolation::{
    explore_cluster_with, explore_from, sample_frame, Budget, ClusterSample, Exploration, ExploreOptions, PercConfig,
    Workspace,
};
use crate::rng::sample_seed;
use crate::stats::{weighted_line, Moments, MultiMoments};

/// Truncation fraction above which an estimate is flagged as biased.
pub const TRUNCATION_WARN: f64 = 1e-3;

const SERIES_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// Everything a Monte Carlo run needs besides the statistic itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub perc: PercConfig,
    pub samples: u64,
    pub budget: Budget,
    #[serde(skip)]
    pub execution: Execution,
}

impl McConfig {
    pub fn new(perc: PercConfig, samples: u64) -> Self {
        McConfig { perc, samples, budget: Budget::default(), execution: Execution::default() }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.perc = self.perc.with_seed(seed);
        self
    }

    pub fn seed(&self) -> u64 {
        self.perc.master_seed
    }

    /// Configuration for point `n` of a series: same everything, independent seed.
    fn for_point(&self, n: i32) -> Self {
        self.clone().with_seed(sample_seed(self.perc.master_seed ^ SERIES_SALT, n as i64 as u64))
    }

    fn metadata(&self) -> Metadata {
        Metadata {
            model: self.perc.model.to_string(),
            p: self.perc.label(),
            lambda: None,
            h: None,
            slab: None,
            target_layer: None,
            budget: self.budget,
        }
    }

    fn require_below_one(&self, what: &str) -> Result<()> {
        if self.perc.probabilities().iter().any(|&p| p >= 1.0) {
            return Err(Error::InvalidProbability(format!("{what} needs every edge probability below 1")));
        }
        Ok(())
    }
}

/// Parameters an estimate was computed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub model: String,
    pub p: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slab: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_layer: Option<i32>,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub statistic: String,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub truncation_fraction: f64,
    pub seed: u64,
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_bias_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimateResult {
    fn new(statistic: &str, m: &Moments, acc: &MultiMoments, mc: &McConfig, metadata: Metadata) -> Self {
        let truncation_fraction = acc.truncation_fraction();
        let mut warnings = Vec::new();
        if truncation_fraction > TRUNCATION_WARN {
            warnings.push(format!(
                "truncation fraction {truncation_fraction:.3e} exceeds {TRUNCATION_WARN:.0e}; estimate is biased"
            ));
        }
        EstimateResult {
            statistic: statistic.to_string(),
            mean: m.mean,
            std_error: m.std_error(),
            n_samples: m.count,
            truncation_fraction,
            seed: mc.seed(),
            metadata,
            truncation_bias_bound: None,
            warnings,
        }
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn combined_se(&self, other: &EstimateResult) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

fn unconstrained(skip_radii: bool) -> ExploreOptions {
    ExploreOptions { skip_radii, ..ExploreOptions::default() }
}

fn explore(ws: &mut Workspace, mc: &McConfig, slab: SlabSpec, i: u64, options: ExploreOptions) -> ClusterSample {
    let frame = sample_frame(&mc.perc, i);
    explore_cluster_with(ws, &frame, &mc.perc, slab, mc.budget, i, options)
}

/// Runs one exploration per sample and feeds `record` the sample and the
/// statistic slots.
fn accumulate<F>(mc: &McConfig, width: usize, slab: SlabSpec, options: ExploreOptions, record: F) -> MultiMoments
where
    F: Fn(&ClusterSample, &mut [Moments]) + Sync,
{
    run_samples(mc.execution, mc.perc.model, mc.samples, || MultiMoments::new(width), |ws, i, acc| {
        let sample = explore(ws, mc, slab, i, options);
        record(&sample, &mut acc.stats);
        acc.record(sample.truncated);
    })
}

/// `χ_{p,λ} = E Σ_{x ∈ K} Δ(v, x)^λ`, one result per `λ`, all from the same clusters.
pub fn estimate_chi_many(mc: &McConfig, lambdas: &[f64]) -> Result<Vec<EstimateResult>> {
    mc.require_below_one("the tilted susceptibility")?;
    let acc = accumulate(mc, lambdas.len(), SlabSpec::EVERYTHING, unconstrained(true), |s, stats| {
        for (st, &l) in stats.iter_mut().zip(lambdas) {
            st.push(s.tilted_volume(l));
        }
    });
    Ok(lambdas
        .iter()
        .zip(&acc.stats)
        .map(|(&lambda, m)| {
            let mut r = EstimateResult::new("chi", m, &acc, mc, Metadata { lambda: Some(lambda), ..mc.metadata() });
            if r.truncation_fraction > TRUNCATION_WARN {
                r.warnings.push("truncated clusters enter as lower bounds; chi is biased low".into());
            }
            r
        })
        .collect())
}

pub fn estimate_chi(mc: &McConfig, lambda: f64) -> Result<EstimateResult> {
    Ok(estimate_chi_many(mc, &[lambda])?.remove(0))
}

fn check_target(slab: SlabSpec, k: i32) -> Result<()> {
    if slab.contains(k) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("target layer {k} lies outside slab {slab}")))
    }
}

/// `P(v ↔ L_k inside the slab)`.
pub fn estimate_slab_crossing(mc: &McConfig, slab: SlabSpec, k: i32) -> Result<EstimateResult> {
    check_target(slab, k)?;
    let options =
        ExploreOptions { stop_at_layer: Some(k), skip_radii: true, toward_layer: Some(k), ..ExploreOptions::default() };
    let acc = accumulate(mc, 1, slab, options, |s, stats| stats[0].push(f64::from(u8::from(s.reaches_layer(k)))));
    let meta = Metadata { slab: Some(slab.to_string()), target_layer: Some(k), ..mc.metadata() };
    Ok(EstimateResult::new("slab_crossing", &acc.stats[0], &acc, mc, meta))
}

/// `E[X_k]` inside the slab.
pub fn estimate_layer_count(mc: &McConfig, slab: SlabSpec, k: i32) -> Result<EstimateResult> {
    check_target(slab, k)?;
    let options = ExploreOptions { skip_radii: true, toward_layer: Some(k), ..ExploreOptions::default() };
    let acc = accumulate(mc, 1, slab, options, |s, stats| stats[0].push(s.level_counts.get(k) as f64));
    let meta = Metadata { slab: Some(slab.to_string()), target_layer: Some(k), ..mc.metadata() };
    Ok(EstimateResult::new("layer_count", &acc.stats[0], &acc, mc, meta))
}

/// Which points of a series enter the rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Inclusive range of `n`; `None` uses every point.
    pub window: Option<(i32, i32)>,
    /// Points with `std_error / value` above this are left out.
    pub rel_se_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { window: None, rel_se_cap: 0.25 }
    }
}

impl FitOptions {
    pub fn window(lo: i32, hi: i32) -> Self {
        FitOptions { window: Some((lo, hi)), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: i32,
    pub value: f64,
    pub std_error: f64,
    /// `-logbar(value) / n`.
    pub rate: f64,
    pub n_samples: u64,
    pub truncation_fraction: f64,
    pub seed: u64,
}

/// A quantity indexed by layer distance `n`, with the slope of
/// `-logbar(value)` against `n` fitted by weighted least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub statistic: String,
    pub points: Vec<DecayPoint>,
    pub fitted_rate: Option<f64>,
    pub rate_std_error: Option<f64>,
    pub window: (i32, i32),
    pub fit_points: Vec<i32>,
    /// Points left out of the fit because nothing was observed.
    pub zero_points: Vec<i32>,
    pub seed: u64,
    pub metadata: Metadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<i32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DecaySeries {
    fn build(statistic: &str, points: Vec<DecayPoint>, t0: f64, fit: FitOptions, seed: u64, metadata: Metadata) -> Self {
        let lo = points.iter().map(|p| p.n).min().unwrap_or(0);
        let hi = points.iter().map(|p| p.n).max().unwrap_or(0);
        let window = fit.window.unwrap_or((lo, hi));
        let zero_points: Vec<i32> = points.iter().filter(|p| p.value <= 0.0).map(|p| p.n).collect();
        let used: Vec<&DecayPoint> = points
            .iter()
            .filter(|p| p.n >= window.0 && p.n <= window.1)
            .filter(|p| p.value > 0.0 && p.std_error <= fit.rel_se_cap * p.value)
            .collect();
        let line: Vec<(f64, f64, f64)> = used
            .iter()
            .map(|p| (f64::from(p.n), -p.value.ln() / t0, p.std_error / (p.value * t0)))
            .collect();
        let mut warnings = Vec::new();
        let fitted = weighted_line(&line);
        if fitted.is_none() {
            warnings.push(format!(
                "fewer than two usable points in window {}..={} (zero-count points: {:?}); no rate fitted",
                window.0, window.1, zero_points
            ));
        }
        if points.iter().any(|p| p.truncation_fraction > TRUNCATION_WARN) {
            warnings.push(format!("some points exceed truncation fraction {TRUNCATION_WARN:.0e}"));
        }
        DecaySeries {
            statistic: statistic.to_string(),
            fitted_rate: fitted.map(|f| f.1),
            rate_std_error: fitted.map(|f| f.2),
            window,
            fit_points: used.iter().map(|p| p.n).collect(),
            zero_points,
            seed,
            metadata,
            depth: None,
            warnings,
            points,
        }
    }

    /// Refits the same points with other options.
    pub fn refit(&self, fit: FitOptions, t0: f64) -> Self {
        let mut out = DecaySeries::build(&self.statistic, self.points.clone(), t0, fit, self.seed, self.metadata.clone());
        out.depth = self.depth;
        out.warnings.extend(self.warnings.iter().filter(|w| w.contains("depth")).cloned());
        out
    }

    pub fn point(&self, n: i32) -> Option<&DecayPoint> {
        self.points.iter().find(|p| p.n == n)
    }
}

fn decay_point(n: i32, r: &EstimateResult, t0: f64) -> DecayPoint {
    let rate = if n == 0 || r.mean <= 0.0 { f64::NAN } else { -r.mean.ln() / t0 / f64::from(n) };
    DecayPoint {
        n,
        value: r.mean,
        std_error: r.std_error,
        rate,
        n_samples: r.n_samples,
        truncation_fraction: r.truncation_fraction,
        seed: r.seed,
    }
}

/// `α_p`: decay rate of `P(v ↔ L_n inside L_{0,n})`, each `n` with its own seed.
pub fn estimate_alpha(mc: &McConfig, n_max: i32, fit: FitOptions) -> Result<DecaySeries> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("alpha needs n_max >= 1".into()));
    }
    let t0 = mc.perc.model.t0();
    let points = (1..=n_max)
        .map(|n| {
            let r = estimate_slab_crossing(&mc.for_point(n), SlabSpec::bounded(0, n)?, n)?;
            Ok(decay_point(n, &r, t0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecaySeries::build("alpha", points, t0, fit, mc.seed(), mc.metadata()))
}

/// Lower slab depth for half-space quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthRule {
    Fixed(i32),
    /// Double from `initial` until the statistic moves by less than a quarter
    /// standard error, giving up at `max` or when the deeper slab starts
    /// truncating (the shallower depth is kept).
    Adaptive { initial: i32, max: i32 },
}

impl Default for DepthRule {
    fn default() -> Self {
        DepthRule::Adaptive { initial: 2, max: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthChoice {
    pub depth: i32,
    pub stabilized: bool,
    /// Deepening stopped because the next slab truncated too often.
    pub budget_limited: bool,
}

/// Applies the depth rule to `E[X_n^{-D,n}]` at `n = n_ref` with coupled samples.
pub fn resolve_depth(mc: &McConfig, n_ref: i32, rule: DepthRule) -> Result<DepthChoice> {
    let (initial, max) = match rule {
        DepthRule::Fixed(d) => {
            if d < 0 {
                return Err(Error::InvalidArgument(format!("slab depth must be nonnegative, got {d}")));
            }
            return Ok(DepthChoice { depth: d, stabilized: true, budget_limited: false });
        }
        DepthRule::Adaptive { initial, max } => (initial.max(1), max.max(initial.max(1))),
    };
    let point = mc.for_point(n_ref);
    let mut depth = initial;
    let mut current = estimate_layer_count(&point, SlabSpec::bounded(-depth, n_ref)?, n_ref)?;
    while depth < max {
        let deeper = (depth * 2).min(max);
        let next = estimate_layer_count(&point, SlabSpec::bounded(-deeper, n_ref)?, n_ref)?;
        if next.truncation_fraction > TRUNCATION_WARN {
            return Ok(DepthChoice { depth, stabilized: false, budget_limited: true });
        }
        let moved = (next.mean - current.mean).abs();
        log::debug!("depth {depth} -> {deeper}: E moved by {moved:.3e} (se {:.3e})", next.std_error);
        depth = deeper;
        if moved < 0.25 * next.std_error || (moved == 0.0 && next.std_error == 0.0) {
            return Ok(DepthChoice { depth, stabilized: true, budget_limited: false });
        }
        current = next;
    }
    Ok(DepthChoice { depth, stabilized: false, budget_limited: false })
}

/// `β_p`: decay rate of `E[X_n^{-D,n}]`, each `n` with its own seed.
pub fn estimate_beta(mc: &McConfig, n_max: i32, depth: DepthRule, fit: FitOptions) -> Result<DecaySeries> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("beta needs n_max >= 1".into()));
    }
    let choice = resolve_depth(mc, n_max, depth)?;
    let t0 = mc.perc.model.t0();
    let points = (1..=n_max)
        .map(|n| {
            let r = estimate_layer_count(&mc.for_point(n), SlabSpec::bounded(-choice.depth, n)?, n)?;
            Ok(decay_point(n, &r, t0))
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = Metadata { slab: Some(format!("-{}:n", choice.depth)), ..mc.metadata() };
    let mut series = DecaySeries::build("beta", points, t0, fit, mc.seed(), meta);
    series.depth = Some(choice.depth);
    if choice.budget_limited {
        series.warnings.push(format!("slab depth held at {} because deeper slabs exceed the vertex budget", choice.depth));
    } else if !choice.stabilized {
        series.warnings.push(format!("slab depth did not stabilize by {}; beta may be biased", choice.depth));
    }
    Ok(series)
}

/// `E[X_{-n}^{-D,0}]` for `n = 1..=n_max` from one set of clusters. The
/// fitted rate is `β_p - 1` (see [`beta_from_downward`]). Points share
/// samples, so the rate's standard error is optimistic.
pub fn estimate_beta_downward(mc: &McConfig, n_max: i32, depth: i32, fit: FitOptions) -> Result<DecaySeries> {
    if n_max < 1 || depth < n_max {
        return Err(Error::InvalidArgument(format!("need 1 <= n_max <= depth, got n_max={n_max}, depth={depth}")));
    }
    let slab = SlabSpec::bounded(-depth, 0)?;
    let acc = accumulate(mc, n_max as usize, slab, unconstrained(true), |s, stats| {
        for (j, st) in stats.iter_mut().enumerate() {
            st.push(s.level_counts.get(-(j as i32) - 1) as f64);
        }
    });
    let t0 = mc.perc.model.t0();
    let meta = Metadata { slab: Some(slab.to_string()), ..mc.metadata() };
    let points = acc
        .stats
        .iter()
        .enumerate()
        .map(|(j, m)| decay_point(j as i32 + 1, &EstimateResult::new("layer_count", m, &acc, mc, meta.clone()), t0))
        .collect();
    let mut series = DecaySeries::build("beta_downward", points, t0, fit, mc.seed(), meta);
    series.depth = Some(depth);
    Ok(series)
}

/// `(β̂, se)` from a downward series.
pub fn beta_from_downward(series: &DecaySeries) -> Option<(f64, f64)> {
    Some((1.0 + series.fitted_rate?, series.rate_std_error?))
}

/// `∇_p(v) = Σ_{x,y} τ(v,x) τ(x,y) τ(y,v)` by the nested estimator: clusters
/// `K1`, `K3` of the origin in independent configurations, and for each
/// `x ∈ K1` a fresh configuration in which `|K(x) ∩ K3|` is counted. The
/// vertex budget bounds the inner work of one outer sample.
pub fn estimate_triangle(mc: &McConfig) -> Result<EstimateResult> {
    mc.require_below_one("the triangle estimator")?;
    let acc = run_samples(mc.execution, mc.perc.model, mc.samples, || MultiMoments::new(1), |ws, i, acc| {
        let (value, truncated) = triangle_sample(ws, mc, i);
        acc.stats[0].push(value);
        acc.record(truncated);
    });
    Ok(EstimateResult::new("triangle", &acc.stats[0], &acc, mc, mc.metadata()))
}

fn triangle_sample(ws: &mut Workspace, mc: &McConfig, i: u64) -> (f64, bool) {
    ws.registry.clear();
    let frame = LayerFrame::with_offset(&mc.perc.model, 0, 0.5);
    let base = mc.perc.stream(i);
    let job = |stream| Exploration {
        frame: &frame,
        probabilities: mc.perc.probabilities(),
        stream,
        slab: SlabSpec::EVERYTHING,
        budget: mc.budget,
        options: unconstrained(true),
    };
    let k3 = explore_from(ws, 0, &job(base.fork(3)));
    let mut truncated = k3.truncated;
    let mut in_k3 = vec![false; ws.registry.len()];
    for v in ws.explorer.visited() {
        in_k3[v as usize] = true;
    }
    let k1 = explore_from(ws, 0, &job(base.fork(1)));
    truncated |= k1.truncated;
    let k1_ids: Vec<u32> = ws.explorer.visited().collect();
    let omega2 = base.fork(2);
    let limit = u64::from(mc.budget.max_vertices);
    let (mut total, mut work) = (0u64, 0u64);
    for x in k1_ids {
        let stream = omega2.fork(ws.registry.canonical_hash(x));
        let inner = explore_from(ws, x, &job(stream));
        truncated |= inner.truncated;
        work += inner.vertex_count;
        total += ws.explorer.visited().filter(|&y| in_k3.get(y as usize).copied().unwrap_or(false)).count() as u64;
        if work > limit {
            truncated = true;
            break;
        }
    }
    (total as f64, truncated)
}

fn check_field(h: f64) -> Result<()> {
    if h >= 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("field h must be finite and nonnegative, got {h}")))
    }
}

/// `M_{p,λ,h} = E[1 - exp(-h |K|_λ)]`. Truncated clusters can only raise the
/// integrand, which is at most 1, so the bias is at most the truncation fraction.
pub fn estimate_magnetization(mc: &McConfig, lambda: f64, h: f64) -> Result<EstimateResult> {
    check_field(h)?;
    let acc = accumulate(mc, 1, SlabSpec::EVERYTHING, unconstrained(true), |s, stats| {
        stats[0].push(-(-h * s.tilted_volume(lambda)).exp_m1());
    });
    let meta = Metadata { lambda: Some(lambda), h: Some(h), ..mc.metadata() };
    let mut r = EstimateResult::new("magnetization", &acc.stats[0], &acc, mc, meta);
    r.truncation_bias_bound = Some(r.truncation_fraction);
    Ok(r)
}

/// `χ_{p,λ,h} = E[|K|_λ exp(-h |K|_λ)] = ∂M/∂h`.
pub fn estimate_truncated_chi(mc: &McConfig, lambda: f64, h: f64) -> Result<EstimateResult> {
    check_field(h)?;
    let acc = accumulate(mc, 1, SlabSpec::EVERYTHING, unconstrained(true), |s, stats| {
        let v = s.tilted_volume(lambda);
        stats[0].push(v * (-h * v).exp());
    });
    let meta = Metadata { lambda: Some(lambda), h: Some(h), ..mc.metadata() };
    Ok(EstimateResult::new("truncated_chi", &acc.stats[0], &acc, mc, meta))
}

/// Magnetization around `h` from one set of clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationProfile {
    pub delta: f64,
    pub m_minus: EstimateResult,
    pub m_center: EstimateResult,
    pub m_plus: EstimateResult,
    /// `(M(h+δ) - M(h-δ)) / 2δ`.
    pub central_difference: EstimateResult,
    pub chi_h: EstimateResult,
    /// Per-sample `central_difference - chi_h`.
    pub paired_difference: EstimateResult,
}

pub fn magnetization_profile(mc: &McConfig, lambda: f64, h: f64, delta: f64) -> Result<MagnetizationProfile> {
    check_field(h)?;
    if !(delta > 0.0 && delta <= h) {
        return Err(Error::InvalidArgument(format!("need 0 < delta <= h, got delta={delta}, h={h}")));
    }
    let acc = accumulate(mc, 6, SlabSpec::EVERYTHING, unconstrained(true), |s, stats| {
        let v = s.tilted_volume(lambda);
        let m = |f: f64| -(-f * v).exp_m1();
        let (lo, mid, hi) = (m(h - delta), m(h), m(h + delta));
        let diff = (hi - lo) / (2.0 * delta);
        let chi = v * (-h * v).exp();
        for (st, x) in stats.iter_mut().zip([lo, mid, hi, diff, chi, diff - chi]) {
            st.push(x);
        }
    });
    let at = |stat: &str, i: usize, field: f64| {
        let meta = Metadata { lambda: Some(lambda), h: Some(field), ..mc.metadata() };
        let mut r = EstimateResult::new(stat, &acc.stats[i], &acc, mc, meta);
        if stat == "magnetization" {
            r.truncation_bias_bound = Some(r.truncation_fraction);
        }
        r
    };
    Ok(MagnetizationProfile {
        delta,
        m_minus: at("magnetization", 0, h - delta),
        m_center: at("magnetization", 1, h),
        m_plus: at("magnetization", 2, h + delta),
        central_difference: at("central_difference", 3, h),
        chi_h: at("truncated_chi", 4, h),
        paired_difference: at("paired_difference", 5, h),
    })
}

/// `P(𝒫_v, v ↔ L_{-k})` for `k = 0..=k_max` plus the last per-level ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSeries {
    pub series: DecaySeries,
    /// `P̂(k_max) / P̂(k_max - 1)`.
    pub ratio: f64,
    pub ratio_std_error: f64,
}

/// Explores the whole cluster, stopping as soon as the origin is not its peak.
pub fn estimate_peak_survival(mc: &McConfig, k_max: i32, fit: FitOptions) -> Result<PeakSeries> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("peak survival needs k_max >= 1".into()));
    }
    if mc.budget.max_abs_height <= k_max {
        return Err(Error::InvalidArgument(format!(
            "height budget {} must exceed k_max = {k_max}",
            mc.budget.max_abs_height
        )));
    }
    let width = k_max as usize + 1;
    let options = ExploreOptions { stop_when_not_peak: true, skip_radii: true, ..ExploreOptions::default() };
    let acc = accumulate(mc, width, SlabSpec::EVERYTHING, options, |s, stats| {
        for (k, st) in stats.iter_mut().enumerate() {
            st.push(f64::from(u8::from(s.is_peak && s.reaches_layer(-(k as i32)))));
        }
    });
    let t0 = mc.perc.model.t0();
    let points: Vec<DecayPoint> = acc
        .stats
        .iter()
        .enumerate()
        .map(|(k, m)| decay_point(k as i32, &EstimateResult::new("peak_survival", m, &acc, mc, mc.metadata()), t0))
        .collect();
    let fit = FitOptions { window: fit.window.or(Some((1, k_max))), ..fit };
    let last = &acc.stats[k_max as usize];
    let prev = &acc.stats[k_max as usize - 1];
    let hits_prev = prev.mean * prev.count as f64;
    let (ratio, ratio_std_error) = if hits_prev > 0.0 {
        let r = last.mean / prev.mean;
        (r, (r * (1.0 - r) / hits_prev).max(0.0).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(PeakSeries { series: DecaySeries::build("peak_survival", points, t0, fit, mc.seed(), mc.metadata()), ratio, ratio_std_error })
}

/// Survival probability at one threshold, bracketed for truncated clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub threshold: u64,
    /// Truncated clusters count only if their partial value reaches the threshold.
    pub lower: f64,
    pub lower_se: f64,
    /// Truncated clusters always count.
    pub upper: f64,
    pub upper_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub vertex_count: Vec<TailPoint>,
    pub extrinsic_radius: Vec<TailPoint>,
    pub intrinsic_radius: Vec<TailPoint>,
    /// `E|K|^2 / E|K|` with a delta-method standard error (truncated sizes as recorded).
    pub moment_ratio: f64,
    pub moment_ratio_se: f64,
    /// Log-log slope of the lower vertex-count tail over `slope_window`.
    pub volume_slope: Option<f64>,
    pub volume_slope_se: Option<f64>,
    pub slope_window: (u64, u64),
    pub n_samples: u64,
    pub truncation_fraction: f64,
    pub seed: u64,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PowerSums {
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl Merge for PowerSums {
    fn merge(&mut self, o: Self) {
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
        self.s4 += o.s4;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct TailAcc {
    stats: MultiMoments,
    sums: PowerSums,
}

impl Merge for TailAcc {
    fn merge(&mut self, o: Self) {
        self.stats.merge(o.stats);
        self.sums.merge(o.sums);
    }
}

/// Empirical survival functions of `|K|` and both radii at `thresholds`.
pub fn estimate_tail(mc: &McConfig, thresholds: &[u64], slope_window: (u64, u64)) -> Result<TailReport> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument("tail needs at least one threshold".into()));
    }
    let t = thresholds.len();
    let acc = run_samples(
        mc.execution,
        mc.perc.model,
        mc.samples,
        || TailAcc { stats: MultiMoments::new(6 * t), sums: PowerSums::default() },
        |ws, i, acc| {
            let s = explore(ws, mc, SlabSpec::EVERYTHING, i, unconstrained(false));
            let values = [s.vertex_count, u64::from(s.extrinsic_radius), u64::from(s.intrinsic_radius)];
            for (q, &value) in values.iter().enumerate() {
                for (j, &th) in thresholds.iter().enumerate() {
                    let hit = value >= th;
                    acc.stats.stats[(2 * q) * t + j].push(f64::from(u8::from(hit)));
                    acc.stats.stats[(2 * q + 1) * t + j].push(f64::from(u8::from(hit || s.truncated)));
                }
            }
            let k = s.vertex_count as f64;
            acc.sums.merge(PowerSums { s1: k, s2: k * k, s3: k * k * k, s4: k * k * k * k });
            acc.stats.record(s.truncated);
        },
    );
    let points = |q: usize| -> Vec<TailPoint> {
        thresholds
            .iter()
            .enumerate()
            .map(|(j, &threshold)| {
                let lo = &acc.stats.stats[(2 * q) * t + j];
                let hi = &acc.stats.stats[(2 * q + 1) * t + j];
                TailPoint { threshold, lower: lo.mean, lower_se: lo.std_error(), upper: hi.mean, upper_se: hi.std_error() }
            })
            .collect()
    };
    let vertex_count = points(0);
    let n = acc.stats.samples as f64;
    let PowerSums { s1, s2, s3, s4 } = acc.sums;
    let (m1, m2, m3, m4) = (s1 / n, s2 / n, s3 / n, s4 / n);
    let moment_ratio = m2 / m1;
    // Delta method for g(a, b) = b / a with a = mean |K|, b = mean |K|^2.
    let (va, vb, cab) = (m2 - m1 * m1, m4 - m2 * m2, m3 - m1 * m2);
    let (ga, gb) = (-m2 / (m1 * m1), 1.0 / m1);
    let moment_ratio_se = ((ga * ga * va + gb * gb * vb + 2.0 * ga * gb * cab).max(0.0) / n).sqrt();
    let line: Vec<(f64, f64, f64)> = vertex_count
        .iter()
        .filter(|p| p.threshold >= slope_window.0 && p.threshold <= slope_window.1 && p.lower > 0.0)
        .map(|p| ((p.threshold as f64).ln(), p.lower.ln(), p.lower_se / p.lower))
        .collect();
    let fit = weighted_line(&line);
    Ok(TailReport {
        extrinsic_radius: points(1),
        intrinsic_radius: points(2),
        vertex_count,
        moment_ratio,
        moment_ratio_se,
        volume_slope: fit.map(|f| f.1),
        volume_slope_se: fit.map(|f| f.2),
        slope_window,
        n_samples: acc.stats.samples,
        truncation_fraction: acc.stats.truncation_fraction(),
        seed: mc.seed(),
        metadata: mc.metadata(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphModel;

    fn tree_mc(p: f64, samples: u64) -> McConfig {
        McConfig::new(PercConfig::isotropic(GraphModel::FixedEndTree { k: 4 }, p, 11).unwrap(), samples)
    }

    #[test]
    fn zero_probability_is_deterministic() {
        let mc = tree_mc(0.0, 500);
        for r in estimate_chi_many(&mc, &[0.0, 0.7]).unwrap() {
            assert_eq!((r.mean, r.std_error), (1.0, 0.0));
        }
        assert_eq!(estimate_triangle(&mc).unwrap().mean, 1.0);
        let beta = estimate_beta(&mc, 3, DepthRule::Fixed(2), FitOptions::default()).unwrap();
        assert!(beta.points.iter().all(|p| p.value == 0.0));
        assert!(beta.fitted_rate.is_none());
        assert_eq!(estimate_magnetization(&mc, 0.3, 0.0).unwrap().mean, 0.0);
    }

    #[test]
    fn crossing_edge_cases() {
        let mc = tree_mc(0.3, 200);
        let slab = SlabSpec::bounded(0, 4).unwrap();
        assert_eq!(estimate_slab_crossing(&mc, slab, 0).unwrap().mean, 1.0);
        assert!(estimate_slab_crossing(&mc, slab, 5).is_err());
        let full = tree_mc(1.0, 50);
        assert_eq!(estimate_slab_crossing(&full, slab, 4).unwrap().mean, 1.0);
        let alpha = estimate_alpha(&full, 4, FitOptions::default()).unwrap();
        assert_eq!(alpha.fitted_rate, Some(0.0));
    }

    #[test]
    fn chi_rejects_full_probability() {
        assert!(estimate_chi(&tree_mc(1.0, 10), 0.0).is_err());
        assert!(estimate_triangle(&tree_mc(1.0, 10)).is_err());
    }

    #[test]
    fn large_field_saturates_magnetization() {
        let r = estimate_magnetization(&tree_mc(0.2, 2000), 0.0, 1e3).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_depth_stops_on_tree() {
        let mc = tree_mc(0.4, 2000);
        let d = resolve_depth(&mc, 3, DepthRule::Adaptive { initial: 2, max: 32 }).unwrap();
        assert!(d.stabilized);
        assert_eq!(d.depth, 4);
    }

    #[test]
    fn execution_modes_agree() {
        let mc = tree_mc(0.25, 3000);
        let a = estimate_chi(&mc.clone().with_execution(Execution::Sequential), 0.3).unwrap();
        let b = estimate_chi(&mc.with_execution(Execution::Parallel), 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tail_bounds_are_ordered() {
        let mc = tree_mc(1.0 / 3.0, 2000).with_budget(Budget { max_vertices: 200, max_abs_height: 10_000 });
        let r = estimate_tail(&mc, &[1, 10, 100, 300], (10, 300)).unwrap();
        assert_eq!(r.vertex_count[0].lower, 1.0);
        for list in [&r.vertex_count, &r.extrinsic_radius, &r.intrinsic_radius] {
            for p in list.iter() {
                assert!(p.lower <= p.upper);
            }
        }
        assert_eq!(r.vertex_count[3].lower, 0.0);
        assert!(r.vertex_count[3].upper > 0.0);
        assert!(r.truncation_fraction > 0.0);
    }
}
