//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use tiltlab_core::checks;
use tiltlab_core::estimators::{
    beta_from_downward, estimate_alpha, estimate_beta, estimate_beta_downward, estimate_chi_many,
    estimate_layer_count, estimate_peak_survival, estimate_slab_crossing, estimate_tail, estimate_triangle,
    magnetization_profile, DecaySeries, DepthRule, EstimateResult, FitOptions, McConfig, TailPoint,
};
use tiltlab_core::experiments::{
    phase_sweep, row_crossings, trace_pcl_curve, BetaProbe, CurveStatus, SweepOptions, TraceOptions,
};
use tiltlab_core::oracles::{self, BallIntegrand, GaltonWatson, OracleValue};
use tiltlab_core::{Budget, GraphModel, PercConfig, SlabSpec};

use crate::config::{parse_depth, parse_list, FileConfig, Scalar, Values};
use crate::output::{json_bytes, num, opt_num, reproducible_args, Manifest, OutputDir, Table};
use crate::{Cli, Command, Common, OracleKind, ProbeArgs};

const DEFAULT_OUT: &str = "tiltlab-out";
const DEFAULT_MODEL: &str = "fixed-end-tree:k=4";
const DEFAULT_SWEEP_MODEL: &str = "tree-x-lattice:k=4,d=1";

/// Merges flag, file and default values and records what was used.
struct Resolver<'a> {
    file: &'a FileConfig,
    snapshot: BTreeMap<&'static str, Value>,
}

impl<'a> Resolver<'a> {
    fn new(file: &'a FileConfig) -> Self {
        Resolver { file, snapshot: BTreeMap::new() }
    }

    fn pick<T: Serialize>(&mut self, key: &'static str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let v = flag.or(file).unwrap_or(default);
        self.record(key, &v);
        v
    }

    fn record<T: Serialize + ?Sized>(&mut self, key: &'static str, value: &T) {
        self.snapshot.insert(key, serde_json::to_value(value).expect("plain data serializes"));
    }

    fn list(&mut self, key: &'static str, flag: Option<&String>, file: Option<&Values>, default: &str) -> Result<Vec<f64>> {
        let text = flag.cloned().or_else(|| file.map(Values::text)).unwrap_or_else(|| default.to_string());
        let values = parse_list(&text).with_context(|| format!("parsing --{}", key.replace('_', "-")))?;
        if values.is_empty() {
            bail!("--{} needs at least one value", key.replace('_', "-"));
        }
        self.record(key, &values);
        Ok(values)
    }

    fn model(&mut self, common: &Common, default: &str) -> Result<GraphModel> {
        let text = self.pick("model", common.model.clone(), self.file.model.clone(), default.to_string());
        Ok(text.parse::<GraphModel>()?)
    }

    fn seed(&mut self, common: &Common) -> u64 {
        self.pick("seed", common.seed, self.file.seed, 1)
    }

    fn samples(&mut self, common: &Common, default: u64) -> u64 {
        self.pick("samples", common.samples, self.file.samples, default)
    }

    fn budget(&mut self, common: &Common, default: Budget) -> Budget {
        Budget {
            max_vertices: self.pick("budget_vertices", common.budget_vertices, self.file.budget_vertices, default.max_vertices),
            max_abs_height: self.pick("budget_height", common.budget_height, self.file.budget_height, default.max_abs_height),
        }
    }

    fn lambda(&mut self, common: &Common, default: &str) -> Result<Vec<f64>> {
        let file = self.file.lambda.clone();
        self.list("lambda", common.lambda.as_ref(), file.as_ref(), default)
    }

    fn single_lambda(&mut self, common: &Common, default: f64) -> Result<f64> {
        let values = self.lambda(common, &default.to_string())?;
        match values[..] {
            [l] => Ok(l),
            _ => bail!("--lambda takes a single value here"),
        }
    }

    fn slab(&mut self, common: &Common) -> Result<Option<SlabSpec>> {
        let text = common.slab.clone().or_else(|| self.file.slab.clone());
        let slab = text.map(|t| t.parse::<SlabSpec>()).transpose()?;
        if let Some(s) = slab {
            self.record("slab", &s.to_string());
        }
        Ok(slab)
    }

    /// Model, probabilities, seed, samples and budgets.
    fn monte_carlo(&mut self, common: &Common, default_samples: u64) -> Result<McConfig> {
        let model = self.model(common, DEFAULT_MODEL)?;
        let seed = self.seed(common);
        let file_p = self.file.p.as_ref().map(Scalar::text);
        let p = self.pick("p", common.p.clone(), file_p, "0.2".to_string());
        let perc = PercConfig::parse(model, &p, seed)?;
        let samples = self.samples(common, default_samples);
        let budget = self.budget(common, Budget::default());
        Ok(McConfig::new(perc, samples).with_budget(budget))
    }

    fn n_max(&mut self, flag: Option<i32>, default: i32) -> i32 {
        self.pick("n_max", flag, self.file.n_max, default)
    }

    fn depth(&mut self, probe: &ProbeArgs) -> Result<DepthRule> {
        let file = self.file.depth.as_ref().map(Scalar::text);
        let text = self.pick("depth", probe.depth.clone(), file, "auto".to_string());
        parse_depth(&text)
    }

    fn probe(&mut self, common: &Common, args: &ProbeArgs, margin: Option<f64>) -> Result<BetaProbe> {
        let d = BetaProbe::default();
        Ok(BetaProbe {
            samples: self.samples(common, d.samples),
            n_max: self.n_max(args.n_max, d.n_max),
            depth: self.depth(args)?,
            fit: d.fit,
            budget: self.budget(common, d.budget),
            seed: self.seed(common),
            margin: self.pick("margin", margin, self.file.margin, d.margin),
            execution: d.execution,
        })
    }
}

/// Files produced by a subcommand, plus what goes to stdout.
#[derive(Default)]
struct Report {
    files: Vec<(String, Vec<u8>)>,
    stdout: String,
    seed: Option<u64>,
    /// Written to the default directory even without `--out`.
    writes_by_default: bool,
    failed: bool,
}

impl Report {
    fn estimates(seed: u64) -> Self {
        Report { seed: Some(seed), writes_by_default: true, ..Report::default() }
    }

    fn table<T: Serialize>(&mut self, stem: &str, table: &Table, sidecar: &T) -> Result<()> {
        let csv = table.to_csv()?;
        if self.stdout.is_empty() {
            self.stdout = String::from_utf8(csv.clone())?;
        }
        self.files.push((format!("{stem}.csv"), csv));
        self.files.push((format!("{stem}.json"), json_bytes(sidecar)?));
        Ok(())
    }
}

pub fn run(cli: Cli, args: &[String]) -> Result<ExitCode> {
    configure_threads(cli.common.threads)?;
    let file = match &cli.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut r = Resolver::new(&file);
    let c = &cli.common;
    let report = match &cli.command {
        Command::Verify => verify(&mut r, c)?,
        Command::Chi => chi(&mut r, c)?,
        Command::Alpha { n_max } => alpha(&mut r, c, *n_max)?,
        Command::Beta { probe, downward } => beta(&mut r, c, probe, *downward)?,
        Command::Triangle => triangle(&mut r, c)?,
        Command::Magnetization { delta } => magnetization(&mut r, c, *delta)?,
        Command::Tail { thresholds, slope_window } => tail(&mut r, c, thresholds.as_ref(), slope_window.clone())?,
        Command::Peak { k_max } => peak(&mut r, c, *k_max)?,
        Command::Sweep { probe, p_tree, p_lattice, margin } => {
            sweep(&mut r, c, probe, p_tree.as_ref(), p_lattice.as_ref(), *margin)?
        }
        Command::Trace { probe, lambdas, tolerance, margin } => {
            trace(&mut r, c, probe, lambdas.as_ref(), *tolerance, *margin)?
        }
        Command::Oracle { kind, d, k, n, radius } => oracle(&mut r, c, *kind, *d, *k, *n, *radius)?,
    };
    print!("{}", report.stdout);
    let dir = match (&c.out, report.writes_by_default) {
        (Some(dir), _) => Some(dir.clone()),
        (None, true) => Some(PathBuf::from(DEFAULT_OUT)),
        (None, false) => None,
    };
    if let Some(dir) = dir {
        let mut out = OutputDir::create(&dir)?;
        for (name, bytes) in &report.files {
            out.write(name, bytes)?;
        }
        let manifest = out.finish(Manifest::new(reproducible_args(args), report.seed, &r.snapshot))?;
        eprintln!("wrote {}", manifest.display());
    }
    Ok(if report.failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("TILTLAB_THREADS") {
            Ok(s) if !s.trim().is_empty() => {
                Some(s.trim().parse::<usize>().with_context(|| format!("TILTLAB_THREADS=`{s}` is not a count"))?)
            }
            _ => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        log::warn!("{w}");
    }
}

const ESTIMATE_HEADER: &[&str] = &[
    "statistic",
    "model",
    "p",
    "lambda",
    "h",
    "slab",
    "target_layer",
    "mean",
    "std_error",
    "n_samples",
    "truncation_fraction",
    "truncation_bias_bound",
    "seed",
    "budget_vertices",
    "budget_height",
];

fn estimate_row(e: &EstimateResult) -> Vec<String> {
    let m = &e.metadata;
    vec![
        e.statistic.clone(),
        m.model.clone(),
        m.p.clone(),
        opt_num(m.lambda),
        opt_num(m.h),
        m.slab.clone().unwrap_or_default(),
        m.target_layer.map(|k| k.to_string()).unwrap_or_default(),
        num(e.mean),
        num(e.std_error),
        e.n_samples.to_string(),
        num(e.truncation_fraction),
        opt_num(e.truncation_bias_bound),
        e.seed.to_string(),
        m.budget.max_vertices.to_string(),
        m.budget.max_abs_height.to_string(),
    ]
}

fn estimate_table(results: &[&EstimateResult]) -> Table {
    let mut t = Table::new(ESTIMATE_HEADER);
    for e in results {
        warn_all(&e.warnings);
        t.push(estimate_row(e));
    }
    t
}

const SERIES_HEADER: &[&str] = &[
    "statistic",
    "model",
    "p",
    "n",
    "value",
    "std_error",
    "rate",
    "n_samples",
    "truncation_fraction",
    "seed",
    "budget_vertices",
    "budget_height",
    "depth",
    "window_lo",
    "window_hi",
    "in_fit",
];

/// One row per layer plus a `<statistic>_rate` row carrying the fit.
fn push_series(t: &mut Table, s: &DecaySeries) {
    warn_all(&s.warnings);
    let m = &s.metadata;
    let depth = s.depth.map(|d| d.to_string()).unwrap_or_default();
    let (lo, hi) = (s.window.0.to_string(), s.window.1.to_string());
    for pt in &s.points {
        t.push(vec![
            s.statistic.clone(),
            m.model.clone(),
            m.p.clone(),
            pt.n.to_string(),
            num(pt.value),
            num(pt.std_error),
            num(pt.rate),
            pt.n_samples.to_string(),
            num(pt.truncation_fraction),
            pt.seed.to_string(),
            m.budget.max_vertices.to_string(),
            m.budget.max_abs_height.to_string(),
            depth.clone(),
            lo.clone(),
            hi.clone(),
            s.fit_points.contains(&pt.n).to_string(),
        ]);
    }
    if s.fitted_rate.is_none() {
        log::warn!("{}: too few nonzero layers for a fit; no rate reported", s.statistic);
    }
    let truncation = s.points.iter().map(|p| p.truncation_fraction).fold(0.0, f64::max);
    t.push(vec![
        format!("{}_rate", s.statistic),
        m.model.clone(),
        m.p.clone(),
        String::new(),
        opt_num(s.fitted_rate),
        opt_num(s.rate_std_error),
        opt_num(s.fitted_rate),
        s.points.iter().map(|p| p.n_samples).sum::<u64>().to_string(),
        num(truncation),
        s.seed.to_string(),
        m.budget.max_vertices.to_string(),
        m.budget.max_abs_height.to_string(),
        depth,
        lo,
        hi,
        String::new(),
    ]);
}

fn verify(r: &mut Resolver, c: &Common) -> Result<Report> {
    let seed = r.seed(c);
    let outcomes = checks::run_all(seed)?;
    let mut t = Table::new(&["check", "passed", "cases", "max_error", "tolerance", "detail"]);
    let mut report = Report { seed: Some(seed), ..Report::default() };
    let mut lines = String::new();
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        lines += &format!("[{tag}] {} ({} cases, max error {:.3e}, tolerance {:.0e})\n", o.name, o.cases, o.max_error, o.tolerance);
        report.failed |= !o.passed;
        t.push(vec![
            o.name.clone(),
            o.passed.to_string(),
            o.cases.to_string(),
            num(o.max_error),
            num(o.tolerance),
            o.detail.clone(),
        ]);
    }
    report.table("verify", &t, &outcomes)?;
    let failures = outcomes.iter().filter(|o| !o.passed).count();
    lines += &format!("{} checks, {failures} failed\n", outcomes.len());
    report.stdout = lines;
    Ok(report)
}

fn chi(r: &mut Resolver, c: &Common) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let lambdas = r.lambda(c, "0")?;
    let results = estimate_chi_many(&mc, &lambdas)?;
    let mut report = Report::estimates(mc.seed());
    report.table("chi", &estimate_table(&results.iter().collect::<Vec<_>>()), &results)?;
    Ok(report)
}

fn alpha(r: &mut Resolver, c: &Common, n_max: Option<i32>) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let n_max = r.n_max(n_max, 8);
    let slab = r.slab(c)?;
    let series = estimate_alpha(&mc, n_max, FitOptions::default())?;
    let mut t = Table::new(SERIES_HEADER);
    push_series(&mut t, &series);
    let mut report = Report::estimates(mc.seed());
    report.table("alpha", &t, &series)?;
    if let Some(slab) = slab {
        let mut crossings = Vec::new();
        for k in (1..=n_max).filter(|&k| slab.contains(k)) {
            crossings.push(estimate_slab_crossing(&mc, slab, k)?);
            crossings.push(estimate_layer_count(&mc, slab, k)?);
        }
        report.table("crossing", &estimate_table(&crossings.iter().collect::<Vec<_>>()), &crossings)?;
    }
    Ok(report)
}

fn beta(r: &mut Resolver, c: &Common, probe: &ProbeArgs, downward: bool) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let n_max = r.n_max(probe.n_max, 8);
    let depth = r.depth(probe)?;
    r.record("downward", &downward);
    let series = estimate_beta(&mc, n_max, depth, FitOptions::default())?;
    let mut t = Table::new(SERIES_HEADER);
    push_series(&mut t, &series);
    let mut sidecar = json!({ "upward": series });
    if downward {
        let d = series.depth.unwrap_or(n_max).max(n_max);
        let down = estimate_beta_downward(&mc, n_max, d, FitOptions::default())?;
        push_series(&mut t, &down);
        let implied = beta_from_downward(&down);
        sidecar["downward"] = serde_json::to_value(&down)?;
        sidecar["beta_from_downward"] = json!(implied.map(|(b, se)| json!({ "beta": b, "std_error": se })));
    }
    let mut report = Report::estimates(mc.seed());
    report.table("beta", &t, &sidecar)?;
    Ok(report)
}

fn triangle(r: &mut Resolver, c: &Common) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let result = estimate_triangle(&mc)?;
    let mut report = Report::estimates(mc.seed());
    report.table("triangle", &estimate_table(&[&result]), &result)?;
    Ok(report)
}

fn magnetization(r: &mut Resolver, c: &Common, delta: Option<f64>) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let lambda = r.single_lambda(c, 0.5)?;
    let h = r.pick("h", c.h, r.file.h, 0.5);
    let delta = r.pick("delta", delta, r.file.delta, 0.01);
    let profile = magnetization_profile(&mc, lambda, h, delta)?;
    let rows = [
        &profile.m_minus,
        &profile.m_center,
        &profile.m_plus,
        &profile.central_difference,
        &profile.chi_h,
        &profile.paired_difference,
    ];
    let mut report = Report::estimates(mc.seed());
    report.table("magnetization", &estimate_table(&rows), &profile)?;
    Ok(report)
}

fn parse_window(text: &str) -> Result<(u64, u64)> {
    let (lo, hi) = text.split_once(':').with_context(|| format!("window must be lo:hi, got `{text}`"))?;
    let lo: u64 = lo.trim().parse().with_context(|| format!("`{lo}` is not a count"))?;
    let hi: u64 = hi.trim().parse().with_context(|| format!("`{hi}` is not a count"))?;
    if lo == 0 || hi <= lo {
        bail!("window `{text}` needs 0 < lo < hi");
    }
    Ok((lo, hi))
}

fn tail(r: &mut Resolver, c: &Common, thresholds: Option<&String>, window: Option<String>) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let file = r.file.thresholds.clone();
    let raw = r.list("thresholds", thresholds, file.as_ref(), "1,10,100,1000,10000")?;
    let thresholds: Vec<u64> = raw
        .iter()
        .map(|&x| if x >= 1.0 && x.fract() == 0.0 { Ok(x as u64) } else { bail!("threshold {x} is not a positive integer") })
        .collect::<Result<_>>()?;
    let window = r.pick("slope_window", window, r.file.slope_window.clone(), "10:1000".to_string());
    let report_data = estimate_tail(&mc, &thresholds, parse_window(&window)?)?;
    let m = &report_data.metadata;
    let mut t = Table::new(&[
        "statistic",
        "model",
        "p",
        "threshold",
        "lower",
        "lower_se",
        "upper",
        "upper_se",
        "n_samples",
        "truncation_fraction",
        "seed",
        "budget_vertices",
        "budget_height",
    ]);
    let tail_row = |name: &str, threshold: String, lo: f64, lo_se: f64, hi: f64, hi_se: f64| {
        vec![
            name.to_string(),
            m.model.clone(),
            m.p.clone(),
            threshold,
            num(lo),
            num(lo_se),
            num(hi),
            num(hi_se),
            report_data.n_samples.to_string(),
            num(report_data.truncation_fraction),
            report_data.seed.to_string(),
            m.budget.max_vertices.to_string(),
            m.budget.max_abs_height.to_string(),
        ]
    };
    let groups: [(&str, &[TailPoint]); 3] = [
        ("vertex_count", &report_data.vertex_count),
        ("extrinsic_radius", &report_data.extrinsic_radius),
        ("intrinsic_radius", &report_data.intrinsic_radius),
    ];
    for (name, points) in groups {
        for pt in points {
            t.push(tail_row(name, pt.threshold.to_string(), pt.lower, pt.lower_se, pt.upper, pt.upper_se));
        }
    }
    let (mr, mr_se) = (report_data.moment_ratio, report_data.moment_ratio_se);
    t.push(tail_row("moment_ratio", String::new(), mr, mr_se, mr, mr_se));
    let slope = report_data.volume_slope.unwrap_or(f64::NAN);
    let slope_se = report_data.volume_slope_se.unwrap_or(f64::NAN);
    t.push(tail_row("volume_slope", window.clone(), slope, slope_se, slope, slope_se));
    let mut report = Report::estimates(mc.seed());
    report.table("tail", &t, &report_data)?;
    Ok(report)
}

fn peak(r: &mut Resolver, c: &Common, k_max: Option<i32>) -> Result<Report> {
    let mc = r.monte_carlo(c, 10_000)?;
    let k_max = r.pick("k_max", k_max, r.file.k_max, 6);
    let peak = estimate_peak_survival(&mc, k_max, FitOptions::default())?;
    let mut t = Table::new(SERIES_HEADER);
    push_series(&mut t, &peak.series);
    let s = &peak.series;
    let last = s.points.last().expect("k_max >= 1");
    t.push(vec![
        "peak_survival_ratio".into(),
        s.metadata.model.clone(),
        s.metadata.p.clone(),
        k_max.to_string(),
        num(peak.ratio),
        num(peak.ratio_std_error),
        String::new(),
        last.n_samples.to_string(),
        num(last.truncation_fraction),
        s.seed.to_string(),
        s.metadata.budget.max_vertices.to_string(),
        s.metadata.budget.max_abs_height.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let mut report = Report::estimates(mc.seed());
    report.table("peak", &t, &peak)?;
    Ok(report)
}

fn sweep(
    r: &mut Resolver,
    c: &Common,
    args: &ProbeArgs,
    p_tree: Option<&String>,
    p_lattice: Option<&String>,
    margin: Option<f64>,
) -> Result<Report> {
    let model = r.model(c, DEFAULT_SWEEP_MODEL)?;
    let file_tree = r.file.p_tree.clone();
    let file_lattice = r.file.p_lattice.clone();
    let p_tree = r.list("p_tree", p_tree, file_tree.as_ref(), "0.25:0.7:0.05")?;
    let p_lattice = r.list("p_lattice", p_lattice, file_lattice.as_ref(), "0.001")?;
    let probe = r.probe(c, args, margin)?;
    let opts = SweepOptions { alt_fit: FitOptions::window(probe.n_max / 2, probe.n_max), probe };
    let grid = phase_sweep(model, &p_tree, &p_lattice, &opts)?;
    let mut t = Table::new(&[
        "p_tree",
        "p_lattice",
        "beta_hat",
        "se",
        "class",
        "beta_hat_alt",
        "se_alt",
        "depth",
        "truncation_fraction",
        "samples",
        "n_max",
        "seed",
        "budget_vertices",
        "budget_height",
    ]);
    for cell in &grid.cells {
        t.push(vec![
            num(cell.p_tree),
            num(cell.p_lattice),
            num(cell.beta),
            num(cell.beta_se),
            cell.class.label().to_string(),
            num(cell.beta_alt),
            num(cell.beta_alt_se),
            cell.depth.map(|d| d.to_string()).unwrap_or_default(),
            num(cell.truncation_fraction),
            opts.probe.samples.to_string(),
            opts.probe.n_max.to_string(),
            cell.seed.to_string(),
            cell.budget.max_vertices.to_string(),
            cell.budget.max_abs_height.to_string(),
        ]);
    }
    let mut crossings = Table::new(&["p_lattice", "target", "p_hat", "p_lo", "p_hi"]);
    let mut crossing_json = Vec::new();
    for (i, &pl) in grid.p_lattice.iter().enumerate() {
        let (one, half) = row_crossings(grid.row(i), grid.margin);
        for x in [one, half].into_iter().flatten() {
            crossings.push(vec![num(pl), num(x.target), num(x.p_hat), opt_num(x.p_lo), opt_num(x.p_hi)]);
        }
        crossing_json.push(json!({ "p_lattice": pl, "beta_one": one, "beta_half": half }));
    }
    let mut report = Report::estimates(opts.probe.seed);
    report.table("grid", &t, &json!({ "options": opts, "grid": grid }))?;
    report.table("crossings", &crossings, &crossing_json)?;
    Ok(report)
}

fn trace(
    r: &mut Resolver,
    c: &Common,
    args: &ProbeArgs,
    lambdas: Option<&String>,
    tolerance: Option<f64>,
    margin: Option<f64>,
) -> Result<Report> {
    let model = r.model(c, DEFAULT_MODEL)?;
    let file = r.file.lambdas.clone();
    let lambdas = r.list("lambdas", lambdas, file.as_ref(), "0,0.25,0.5")?;
    let d = TraceOptions::default();
    let tolerance = r.pick("tolerance", tolerance, r.file.tolerance, d.tolerance);
    let probe = r.probe(c, args, margin)?;
    let opts = TraceOptions { probe, tolerance, ..d };
    let curve = trace_pcl_curve(model, &lambdas, &opts)?;
    let mut t = Table::new(&[
        "lambda",
        "target_beta",
        "p_lo",
        "p_hi",
        "p_hat",
        "status",
        "evaluations",
        "samples",
        "n_max",
        "seed",
        "budget_vertices",
        "budget_height",
    ]);
    for pt in &curve {
        let status = match pt.status {
            CurveStatus::Resolved => "resolved",
            CurveStatus::Unresolved => "unresolved",
        };
        t.push(vec![
            num(pt.lambda),
            num(pt.target_beta),
            num(pt.p_lo),
            num(pt.p_hi),
            num(pt.p_hat),
            status.to_string(),
            pt.evaluations.len().to_string(),
            opts.probe.samples.to_string(),
            opts.probe.n_max.to_string(),
            opts.probe.seed.to_string(),
            opts.probe.budget.max_vertices.to_string(),
            opts.probe.budget.max_abs_height.to_string(),
        ]);
    }
    let mut report = Report::estimates(opts.probe.seed);
    report.table("curve", &t, &json!({ "model": model.to_string(), "options": opts, "curve": curve }))?;
    Ok(report)
}

fn oracle(
    r: &mut Resolver,
    c: &Common,
    kind: OracleKind,
    d: Option<u32>,
    k: Option<u32>,
    n: Option<u32>,
    radius: Option<u32>,
) -> Result<Report> {
    let name = clap::ValueEnum::to_possible_value(&kind).expect("no skipped variants").get_name().to_string();
    r.record("kind", &name);
    let p = |r: &mut Resolver| -> Result<f64> {
        let file_p = r.file.p.as_ref().map(Scalar::text);
        let text = r.pick("p", c.p.clone(), file_p, "0.2".to_string());
        text.trim().parse::<f64>().with_context(|| format!("oracles take a single probability, got `{text}`"))
    };
    let d = |r: &mut Resolver| r.pick("d", d, None, 4);
    let k = |r: &mut Resolver| r.pick("k", k, None, 4);
    let n = |r: &mut Resolver| r.pick("n", n, None, 10);
    let value: OracleValue = match kind {
        OracleKind::FixedEndPcl => oracles::fixed_end_pcl(d(r), r.single_lambda(c, 0.0)?)?,
        OracleKind::FixedEndAlpha => oracles::fixed_end_alpha(d(r), p(r)?)?,
        OracleKind::FixedEndChi => {
            let (d, p) = (d(r), p(r)?);
            oracles::fixed_end_chi(d, p, r.single_lambda(c, 0.0)?)?
        }
        OracleKind::OrientedPcl => oracles::oriented_pcl(r.single_lambda(c, 0.0)?)?,
        OracleKind::OrientedPt => oracles::oriented_pt(),
        OracleKind::OrientedAlpha => oracles::oriented_alpha(p(r)?)?,
        OracleKind::OrientedChi => oracles::oriented_chi_closed(p(r)?, r.single_lambda(c, 0.0)?)?,
        OracleKind::OrientedChiSystem => oracles::oriented_chi_system(p(r)?, r.single_lambda(c, 0.0)?)?,
        OracleKind::GwExtinction => {
            let (k, p) = (k(r), p(r)?);
            gw(k, p)?.extinction_probability()
        }
        OracleKind::GwReach => {
            let (k, p, n) = (k(r), p(r)?, n(r));
            gw(k, p)?.reach_generation(n)
        }
        OracleKind::GwSurvival => {
            let (k, p, n) = (k(r), p(r)?, n(r) as usize);
            gw(k, p)?.size_distribution(n).survival(n)
        }
        OracleKind::BallChi | OracleKind::BallTriangle => {
            let model = r.model(c, DEFAULT_MODEL)?;
            let p = p(r)?;
            let radius = r.pick("radius", radius, None, 60);
            let integrand = match kind {
                OracleKind::BallChi => BallIntegrand::Chi { lambda: r.single_lambda(c, 0.0)? },
                _ => BallIntegrand::Triangle,
            };
            oracles::ball_brute_force(model, p, radius, integrand)?
        }
    };
    let body = json!({
        "oracle": name,
        "parameters": r.snapshot,
        "value": value.value,
        "error_bound": value.error_bound,
    });
    let bytes = json_bytes(&body)?;
    Ok(Report {
        stdout: String::from_utf8(bytes.clone())?,
        files: vec![("oracle.json".to_string(), bytes)],
        ..Report::default()
    })
}

fn gw(k: u32, p: f64) -> Result<GaltonWatson> {
    if k < 2 {
        bail!("branching-process oracles need degree k >= 2");
    }
    if !(0.0..=1.0).contains(&p) {
        bail!("probability {p} is outside [0, 1]");
    }
    Ok(GaltonWatson::tree_cluster(k, p))
}
