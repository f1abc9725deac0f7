//! Multi-point studies: the `p_c(λ)` curve tracer and the anisotropic phase sweep.
//!
//! Both rest on the slab expectation rate `β_p`: `χ_{p,λ} < ∞` exactly when
//! `β_p > max(λ, 1 - λ)`, so `p_c = β^{-1}(1)` and `p_t = β^{-1}(1/2)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_beta, DecaySeries, DepthRule, FitOptions, McConfig};
use crate::graph::{EdgeOrbit, GraphModel};
use crate::parallel::Execution;
use crate::percolation::{Budget, PercConfig};

/// Truncation fraction above which a sweep cell is not classified.
pub const CELL_TRUNCATION_LIMIT: f64 = 1e-2;

/// How `β̂` is measured at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaProbe {
    pub samples: u64,
    pub n_max: i32,
    pub depth: DepthRule,
    pub fit: FitOptions,
    pub budget: Budget,
    pub seed: u64,
    /// Classification margin in standard errors.
    pub margin: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for BetaProbe {
    fn default() -> Self {
        BetaProbe {
            samples: 20_000,
            n_max: 8,
            depth: DepthRule::default(),
            fit: FitOptions::default(),
            budget: Budget { max_vertices: 20_000, max_abs_height: 10_000 },
            seed: 1,
            margin: 3.0,
            execution: Execution::default(),
        }
    }
}

impl BetaProbe {
    fn run(&self, perc: PercConfig) -> Result<DecaySeries> {
        let mc = McConfig::new(perc.with_seed(self.seed), self.samples)
            .with_budget(self.budget)
            .with_execution(self.execution);
        estimate_beta(&mc, self.n_max, self.depth, self.fit)
    }
}

/// `(p, β̂, se)`; `β̂ = +∞` when every layer count was zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEvaluation {
    pub p: f64,
    pub beta: f64,
    pub se: f64,
}

fn summarize(p: f64, series: &DecaySeries) -> BetaEvaluation {
    match (series.fitted_rate, series.rate_std_error) {
        (Some(beta), Some(se)) => BetaEvaluation { p, beta, se },
        _ if series.points.iter().all(|pt| pt.value == 0.0) => BetaEvaluation { p, beta: f64::INFINITY, se: 0.0 },
        _ => BetaEvaluation { p, beta: f64::NAN, se: f64::NAN },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStatus {
    /// Both ends of the interval were certified by an evaluated point.
    Resolved,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub target_beta: f64,
    /// `p_c(λ)` lies in `[p_lo, p_hi]` given monotonicity of `β_p`.
    pub p_lo: f64,
    pub p_hi: f64,
    /// Midpoint of the final bisection bracket.
    pub p_hat: f64,
    pub status: CurveStatus,
    pub evaluations: Vec<BetaEvaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub probe: BetaProbe,
    /// Bisection stops once the bracket is this narrow.
    pub tolerance: f64,
    pub p_range: (f64, f64),
    pub max_evaluations: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { probe: BetaProbe::default(), tolerance: 0.02, p_range: (0.05, 0.9), max_evaluations: 12 }
    }
}

/// Bisects on `p` (isotropic) until `β̂_p` brackets `max(λ, 1 - λ)`.
///
/// Decisions follow the point estimate; the reported interval only uses
/// evaluations that cleared the target by `margin` standard errors.
pub fn trace_pcl_curve(model: GraphModel, lambdas: &[f64], opts: &TraceOptions) -> Result<Vec<CurvePoint>> {
    let (range_lo, range_hi) = opts.p_range;
    if !(0.0 < range_lo && range_lo < range_hi && range_hi < 1.0) {
        return Err(Error::InvalidArgument(format!("p range ({range_lo}, {range_hi}) must lie inside (0, 1)")));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let target = lambda.max(1.0 - lambda);
            let (mut lo, mut hi) = opts.p_range;
            let (mut ci_lo, mut ci_hi) = opts.p_range;
            let (mut lo_ok, mut hi_ok) = (false, false);
            let mut evaluations = Vec::new();
            while hi - lo > opts.tolerance / 4.0 && evaluations.len() < opts.max_evaluations {
                let mid = 0.5 * (lo + hi);
                let eval = summarize(mid, &opts.probe.run(PercConfig::isotropic(model, mid, 0)?)?);
                evaluations.push(eval);
                if eval.beta.is_nan() {
                    break;
                }
                let m = opts.probe.margin * eval.se;
                if eval.beta > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if eval.beta - m > target {
                    ci_lo = ci_lo.max(mid);
                    lo_ok = true;
                }
                if eval.beta + m < target {
                    ci_hi = ci_hi.min(mid);
                    hi_ok = true;
                }
            }
            let status = if lo_ok && hi_ok { CurveStatus::Resolved } else { CurveStatus::Unresolved };
            Ok(CurvePoint {
                lambda,
                target_beta: target,
                p_lo: ci_lo,
                p_hi: ci_hi,
                p_hat: 0.5 * (lo + hi),
                status,
                evaluations,
            })
        })
        .collect()
}

/// `β`-phase of a sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// `β̂ > 1`.
    #[serde(rename = "SUBCRITICAL")]
    Subcritical,
    /// `1/2 < β̂ < 1`: infinite clusters exist yet `χ_{p,1/2}` is finite.
    #[serde(rename = "NONUNIQUE-TILTABLE")]
    NonuniqueTiltable,
    /// `β̂ < 1/2`.
    #[serde(rename = "BEYOND-p_t")]
    BeyondPt,
    #[serde(rename = "UNRESOLVED")]
    Unresolved,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Subcritical => "SUBCRITICAL",
            Phase::NonuniqueTiltable => "NONUNIQUE-TILTABLE",
            Phase::BeyondPt => "BEYOND-p_t",
            Phase::Unresolved => "UNRESOLVED",
        }
    }

    /// Phases ordered along increasing `p`; `None` for unresolved cells.
    pub fn rank(self) -> Option<u8> {
        match self {
            Phase::Subcritical => Some(0),
            Phase::NonuniqueTiltable => Some(1),
            Phase::BeyondPt => Some(2),
            Phase::Unresolved => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Classifies `β̂` with a margin of `margin_se` standard errors.
///
/// Heavily truncated cells are unresolved, except that truncation only
/// removes vertices, lowering each `Ê[X_n]` and raising `β̂`; a truncated
/// cell that is still clearly below `1/2` is kept as `BEYOND-p_t`.
pub fn classify(beta: f64, se: f64, margin_se: f64, truncation: f64) -> Phase {
    if beta.is_nan() || se.is_nan() {
        return Phase::Unresolved;
    }
    let m = margin_se * se;
    let phase = if beta > 1.0 + m {
        Phase::Subcritical
    } else if beta > 0.5 + m && beta < 1.0 - m {
        Phase::NonuniqueTiltable
    } else if beta < 0.5 - m {
        Phase::BeyondPt
    } else {
        Phase::Unresolved
    };
    if truncation > CELL_TRUNCATION_LIMIT && phase != Phase::BeyondPt {
        Phase::Unresolved
    } else {
        phase
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub p_tree: f64,
    pub p_lattice: f64,
    pub beta: f64,
    pub beta_se: f64,
    /// Same points, second fit window.
    pub beta_alt: f64,
    pub beta_alt_se: f64,
    pub depth: Option<i32>,
    pub truncation_fraction: f64,
    pub class: Phase,
    pub seed: u64,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub probe: BetaProbe,
    /// Window for the second fit, reported to expose finite-size sensitivity.
    pub alt_fit: FitOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        let probe = BetaProbe::default();
        let alt_fit = FitOptions::window(probe.n_max / 2, probe.n_max);
        SweepOptions { probe, alt_fit }
    }
}

/// Cells are stored row by row: all `p_tree` values for the first `p_lattice`, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub model: String,
    pub p_tree: Vec<f64>,
    pub p_lattice: Vec<f64>,
    pub margin: f64,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn row(&self, lattice_index: usize) -> &[SweepCell] {
        let w = self.p_tree.len();
        &self.cells[lattice_index * w..(lattice_index + 1) * w]
    }
}

/// `β̂` over a `p_tree × p_lattice` grid on a tree-times-lattice product.
pub fn phase_sweep(model: GraphModel, p_tree: &[f64], p_lattice: &[f64], opts: &SweepOptions) -> Result<SweepGrid> {
    if !matches!(model, GraphModel::TreeTimesLattice { .. }) {
        return Err(Error::Unsupported(format!("phase sweeps need a tree-times-lattice model, got {model}")));
    }
    if let Some(p) = p_tree.iter().chain(p_lattice).find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::InvalidProbability(format!("sweep grid value {p} is outside (0, 1)")));
    }
    let t0 = model.t0();
    let mut cells = Vec::with_capacity(p_tree.len() * p_lattice.len());
    for &pl in p_lattice {
        for &pt in p_tree {
            let perc = PercConfig::anisotropic(model, &[(EdgeOrbit::Tree, pt), (EdgeOrbit::Lattice, pl)], 0)?;
            let series = opts.probe.run(perc)?;
            let main = summarize(pt, &series);
            let alt = summarize(pt, &series.refit(opts.alt_fit, t0));
            let truncation = series.points.iter().map(|p| p.truncation_fraction).fold(0.0, f64::max);
            log::debug!("cell tree={pt} lattice={pl}: beta {:.4} ± {:.4}", main.beta, main.se);
            cells.push(SweepCell {
                p_tree: pt,
                p_lattice: pl,
                beta: main.beta,
                beta_se: main.se,
                beta_alt: alt.beta,
                beta_alt_se: alt.se,
                depth: series.depth,
                truncation_fraction: truncation,
                class: classify(main.beta, main.se, opts.probe.margin, truncation),
                seed: opts.probe.seed,
                budget: opts.probe.budget,
            });
        }
    }
    Ok(SweepGrid {
        model: model.to_string(),
        p_tree: p_tree.to_vec(),
        p_lattice: p_lattice.to_vec(),
        margin: opts.probe.margin,
        cells,
    })
}

/// Where `β̂` falls through `target` along increasing `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub target: f64,
    /// Linear interpolation between the bracketing grid points.
    pub p_hat: f64,
    /// Largest `p <= p_hat` with `β̂` above target by the margin.
    pub p_lo: Option<f64>,
    /// Smallest `p >= p_hat` with `β̂` below target by the margin.
    pub p_hi: Option<f64>,
}

/// First downward crossing of `target` in a sequence of evaluations.
pub fn locate_crossing(points: &[BetaEvaluation], target: f64, margin_se: f64) -> Option<Crossing> {
    let mut pts: Vec<BetaEvaluation> = points.iter().copied().filter(|e| !e.beta.is_nan()).collect();
    pts.sort_by(|a, b| a.p.total_cmp(&b.p));
    let i = pts.windows(2).position(|w| w[0].beta > target && w[1].beta <= target)?;
    let (a, b) = (pts[i], pts[i + 1]);
    let p_hat = if a.beta.is_infinite() { b.p } else { a.p + (a.beta - target) / (a.beta - b.beta) * (b.p - a.p) };
    let p_lo = pts.iter().filter(|e| e.p <= p_hat && e.beta - margin_se * e.se > target).map(|e| e.p).reduce(f64::max);
    let p_hi = pts.iter().filter(|e| e.p >= p_hat && e.beta + margin_se * e.se < target).map(|e| e.p).reduce(f64::min);
    Some(Crossing { target, p_hat, p_lo, p_hi })
}

/// Crossings of `β̂ = 1` and `β̂ = 1/2` along one row of a sweep.
pub fn row_crossings(row: &[SweepCell], margin_se: f64) -> (Option<Crossing>, Option<Crossing>) {
    let evals: Vec<BetaEvaluation> =
        row.iter().map(|c| BetaEvaluation { p: c.p_tree, beta: c.beta, se: c.beta_se }).collect();
    (locate_crossing(&evals, 1.0, margin_se), locate_crossing(&evals, 0.5, margin_se))
}
