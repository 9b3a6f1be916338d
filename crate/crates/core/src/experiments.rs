//! Table runs: solve every scenario exactly, build the requested diffusion
//! densities, and collect metrics, errors and trend verdicts.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{build_density, compare, wasserstein, DensityVariant, GridSpec, RelativeErrors};
use crate::error::{GeoqError, Result};
use crate::markov::{exact_metrics, solve_queue, SolveOptions};
use crate::metrics::{MetricKind, Metrics};
use crate::model::{generate_scenarios, ArrivalModel, QueueParams, Regime, RegimeSpec};
use crate::sim::{simulate_census, SimConfig};

/// Rows with at least this many servers are skipped unless asked for.
pub const SLOW_SERVERS: u32 = 2900;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Exact,
    StateDependent,
    ConstantCoeff,
    Sim,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::StateDependent => "state_dependent",
            Variant::ConstantCoeff => "constant_coeff",
            Variant::Sim => "sim",
        }
    }

    fn density(self) -> Option<DensityVariant> {
        match self {
            Variant::StateDependent => Some(DensityVariant::StateDependent),
            Variant::ConstantCoeff => Some(DensityVariant::ConstantCoeff),
            _ => None,
        }
    }
}

/// Which error column a rendered table shows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBasis {
    /// |exact − approx| / √R
    Scaled,
    /// |exact − approx| / exact
    Relative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub label: String,
    pub params: QueueParams,
    pub slow: bool,
}

impl Scenario {
    pub fn new(label: impl Into<String>, params: QueueParams) -> Self {
        Scenario { label: label.into(), slow: params.n_servers() >= SLOW_SERVERS, params }
    }
}

/// How a builtin spec's rows follow from the regime relations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Origin {
    pub regime: RegimeSpec,
    pub base: QueueParams,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableSpec {
    pub name: String,
    pub title: String,
    pub scenarios: Vec<Scenario>,
    pub variants: BTreeSet<Variant>,
    /// Measures reported in the CSV; the first one is rendered.
    pub metrics: Vec<MetricKind>,
    pub wasserstein: bool,
    pub errors: bool,
    pub basis: ErrorBasis,
    pub origin: Option<Origin>,
}

impl TableSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(GeoqError::Config(format!("table {}: empty variant set", self.name)));
        }
        if self.scenarios.is_empty() {
            return Err(GeoqError::Config(format!("table {}: no scenarios", self.name)));
        }
        if self.metrics.is_empty() {
            return Err(GeoqError::Config(format!("table {}: no metrics selected", self.name)));
        }
        if (self.errors || self.wasserstein) && !self.variants.contains(&Variant::Exact) {
            return Err(GeoqError::Config(format!(
                "table {}: error columns need the exact variant",
                self.name
            )));
        }
        Ok(())
    }

    fn shown(&self) -> MetricKind {
        self.metrics[0]
    }
}

/// Knobs shared by every row of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub include_slow: bool,
    pub solve: SolveOptions,
    pub grid: GridSpec,
    pub sim_epochs: u64,
    pub sim_replications: u32,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            include_slow: false,
            solve: SolveOptions::default(),
            grid: GridSpec::default(),
            sim_epochs: 100_000,
            sim_replications: 8,
            seed: 0,
        }
    }
}

/// One approximation (or simulation) of one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantResult {
    pub variant: Variant,
    pub metrics: Metrics,
    pub scaled_error: Option<Metrics>,
    pub relative_error: Option<RelativeErrors>,
    pub wasserstein: Option<f64>,
    /// 95% half-widths, simulation only.
    pub half_width: Option<Metrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReport {
    pub label: String,
    pub params: QueueParams,
    pub exact: Option<Metrics>,
    pub results: Vec<VariantResult>,
    pub diagnostic: Option<String>,
    pub runtime_seconds: f64,
}

impl RowReport {
    pub fn result(&self, variant: Variant) -> Option<&VariantResult> {
        self.results.iter().find(|r| r.variant == variant)
    }

    /// Error of `variant` on `metric` in the given basis.
    pub fn error(&self, variant: Variant, metric: MetricKind, basis: ErrorBasis) -> Option<f64> {
        let r = self.result(variant)?;
        match basis {
            ErrorBasis::Scaled => r.scaled_error.map(|m| m.get(metric)),
            ErrorBasis::Relative => r.relative_error.and_then(|m| m.get(metric)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableReport {
    pub spec: TableSpec,
    pub rows: Vec<RowReport>,
    pub skipped: Vec<String>,
}

fn run_row(spec: &TableSpec, scenario: &Scenario, opts: &RunOptions) -> RowReport {
    let start = Instant::now();
    let mut row = RowReport {
        label: scenario.label.clone(),
        params: scenario.params,
        exact: None,
        results: Vec::new(),
        diagnostic: None,
        runtime_seconds: 0.0,
    };
    if let Err(e) = fill_row(spec, scenario, opts, &mut row) {
        row.diagnostic = Some(e.to_string());
    }
    row.runtime_seconds = start.elapsed().as_secs_f64();
    row
}

fn fill_row(spec: &TableSpec, scenario: &Scenario, opts: &RunOptions, row: &mut RowReport) -> Result<()> {
    let params = &scenario.params;
    let arrivals = ArrivalModel::poisson(params.arrival_rate())?;
    let pmf = if spec.variants.contains(&Variant::Exact) {
        Some(solve_queue(params, &arrivals, &opts.solve)?)
    } else {
        None
    };
    let exact = pmf.as_ref().map(|p| exact_metrics(p, params));
    row.exact = exact;
    for &variant in &spec.variants {
        if let Some(kind) = variant.density() {
            let density = build_density(params, &arrivals, kind, &opts.grid)?;
            let approx = crate::diffusion::approx_metrics(&density, params);
            let mut result = VariantResult {
                variant,
                metrics: approx,
                scaled_error: None,
                relative_error: None,
                wasserstein: None,
                half_width: None,
            };
            if let (Some(pmf), Some(exact)) = (&pmf, exact) {
                let w = if spec.wasserstein { wasserstein(pmf, &density, params) } else { f64::NAN };
                let report = compare(exact, approx, params, w);
                if spec.errors {
                    result.scaled_error = Some(report.scaled_error);
                    result.relative_error = Some(report.relative_error);
                }
                if spec.wasserstein {
                    result.wasserstein = Some(w);
                }
            }
            row.results.push(result);
        } else if variant == Variant::Sim {
            let cfg = SimConfig::for_params(params, opts.sim_epochs, opts.sim_replications, opts.seed);
            let sim = simulate_census(params, &arrivals, &cfg)?;
            let mut result = VariantResult {
                variant,
                metrics: sim.metrics,
                scaled_error: None,
                relative_error: None,
                wasserstein: None,
                half_width: Some(sim.half_width),
            };
            if let (true, Some(exact)) = (spec.errors, exact) {
                let report = compare(exact, sim.metrics, params, f64::NAN);
                result.scaled_error = Some(report.scaled_error);
                result.relative_error = Some(report.relative_error);
            }
            row.results.push(result);
        }
    }
    Ok(())
}

/// Runs every (non-skipped) row; a failing row keeps its diagnostic and the
/// rest of the table still runs.
pub fn run_table(spec: &TableSpec, opts: &RunOptions) -> Result<TableReport> {
    spec.validate()?;
    let (run, skipped): (Vec<&Scenario>, Vec<&Scenario>) =
        spec.scenarios.iter().partition(|s| opts.include_slow || !s.slow);
    let rows = run.par_iter().map(|s| run_row(spec, s, opts)).collect();
    Ok(TableReport {
        spec: spec.clone(),
        rows,
        skipped: skipped.into_iter().map(|s| s.label.clone()).collect(),
    })
}

fn push_opt(line: &mut String, v: Option<f64>) {
    match v {
        Some(x) => write!(line, ",{x}").unwrap(),
        None => line.push(','),
    }
}

impl TableReport {
    /// Long-format CSV, one line per scenario × variant. Runtimes are left
    /// out so reruns are byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,label,n_servers,offered_load,service_prob,variant");
        for m in MetricKind::ALL {
            write!(out, ",{}", m.name()).unwrap();
        }
        for m in MetricKind::ALL {
            write!(out, ",scaled_error_{}", m.name()).unwrap();
        }
        for m in MetricKind::ALL {
            write!(out, ",relative_error_{}", m.name()).unwrap();
        }
        out.push_str(",wasserstein,diagnostic\n");
        for row in &self.rows {
            let p = &row.params;
            let prefix = format!(
                "{},{},{},{},{}",
                self.spec.name,
                row.label,
                p.n_servers(),
                p.offered_load(),
                p.service_prob()
            );
            let diagnostic = row.diagnostic.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let mut lines = Vec::new();
            if let Some(exact) = row.exact {
                let mut line = format!("{prefix},exact");
                for m in MetricKind::ALL {
                    write!(line, ",{}", exact.get(m)).unwrap();
                }
                line.push_str(&",".repeat(9));
                lines.push(line);
            }
            for r in &row.results {
                let mut line = format!("{prefix},{}", r.variant.name());
                for m in MetricKind::ALL {
                    write!(line, ",{}", r.metrics.get(m)).unwrap();
                }
                for m in MetricKind::ALL {
                    push_opt(&mut line, r.scaled_error.map(|e| e.get(m)));
                }
                for m in MetricKind::ALL {
                    push_opt(&mut line, r.relative_error.and_then(|e| e.get(m)));
                }
                push_opt(&mut line, r.wasserstein);
                line.push(',');
                lines.push(line);
            }
            if lines.is_empty() {
                lines.push(format!("{prefix},{}", ",".repeat(14)));
            }
            for line in lines {
                out.push_str(&line);
                out.push_str(&diagnostic);
                out.push('\n');
            }
        }
        out
    }

    /// Sidecar record with the non-deterministic parts of the run.
    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "table": self.spec.name,
            "title": self.spec.title,
            "skipped": self.skipped,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "label": r.label,
                "runtime_seconds": r.runtime_seconds,
                "diagnostic": r.diagnostic,
            })).collect::<Vec<_>>(),
        })
    }

    /// Column layout comparable to the printed tables: two decimals for
    /// values, two decimals and a percent sign for errors.
    pub fn render(&self) -> String {
        let metric = self.spec.shown();
        let approx: Vec<Variant> = self
            .spec
            .variants
            .iter()
            .copied()
            .filter(|v| *v != Variant::Exact)
            .collect();
        let has_exact = self.spec.variants.contains(&Variant::Exact);
        let basis = match self.spec.basis {
            ErrorBasis::Scaled => "scaled",
            ErrorBasis::Relative => "relative",
        };
        let mut head = vec!["label".to_string(), "N".into(), "R".into(), "mu".into()];
        if has_exact {
            head.push("exact".into());
        }
        for v in &approx {
            head.push(v.name().into());
            if self.spec.errors {
                head.push(format!("{basis} err"));
            }
        }
        if self.spec.wasserstein {
            for v in &approx {
                if v.density().is_some() {
                    head.push(format!("W1 {}", v.name()));
                }
            }
        }
        let mut body = Vec::new();
        for row in &self.rows {
            let p = &row.params;
            let mut cells = vec![
                row.label.clone(),
                p.n_servers().to_string(),
                format!("{:.2}", p.offered_load()),
                format!("{:.3}", p.service_prob()),
            ];
            if let Some(d) = &row.diagnostic {
                cells.push(format!("failed: {d}"));
                body.push(cells);
                continue;
            }
            let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
            let pct = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
            if has_exact {
                cells.push(fmt(row.exact.map(|m| m.get(metric))));
            }
            for &v in &approx {
                cells.push(fmt(row.result(v).map(|r| r.metrics.get(metric))));
                if self.spec.errors {
                    cells.push(pct(row.error(v, metric, self.spec.basis)));
                }
            }
            if self.spec.wasserstein {
                for &v in &approx {
                    if v.density().is_some() {
                        cells.push(row.result(v).and_then(|r| r.wasserstein).map_or("-".into(), |w| format!("{w:.4}")));
                    }
                }
            }
            body.push(cells);
        }
        let cols = head.len();
        let mut widths: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
        for cells in &body {
            for (i, c) in cells.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
        let mut out = format!("{} ({})\n", self.spec.title, metric.name());
        let line = |cells: &[String]| {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:>w$}", w = widths.get(i).copied().unwrap_or(0)))
                .collect::<Vec<_>>()
                .join("  ")
        };
        out.push_str(&line(&head));
        out.push('\n');
        for cells in &body {
            out.push_str(&line(cells));
            out.push('\n');
        }
        if !self.skipped.is_empty() {
            writeln!(out, "skipped (slow): {}", self.skipped.join(", ")).unwrap();
        }
        out
    }

    /// The chosen error column in row order; `None` for failed rows.
    pub fn error_column(&self, variant: Variant, metric: MetricKind, basis: ErrorBasis) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.error(variant, metric, basis)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expectation {
    Decreasing,
    Increasing,
    BelowBound(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendVerdict {
    pub holds: bool,
    /// First offending pair of row indices; for a bound the index appears twice.
    pub offending: Option<(usize, usize)>,
}

/// Strict monotonicity (or a ceiling) on a column of at least three values.
pub fn trend_of(values: &[f64], expectation: Expectation) -> Result<TrendVerdict> {
    if values.len() < 3 {
        return Err(GeoqError::Config(format!(
            "trend check needs at least 3 rows, got {}",
            values.len()
        )));
    }
    let offending = match expectation {
        Expectation::Decreasing => (1..values.len()).find(|&i| !(values[i] < values[i - 1])).map(|i| (i - 1, i)),
        Expectation::Increasing => (1..values.len()).find(|&i| !(values[i] > values[i - 1])).map(|i| (i - 1, i)),
        Expectation::BelowBound(b) => values.iter().position(|&v| !(v <= b)).map(|i| (i, i)),
    };
    Ok(TrendVerdict { holds: offending.is_none(), offending })
}

/// Trend of one error column of a report; failed rows count as violations.
pub fn trend_check(
    report: &TableReport,
    variant: Variant,
    metric: MetricKind,
    expectation: Expectation,
) -> Result<TrendVerdict> {
    let column = report.error_column(variant, metric, report.spec.basis);
    if let Some(i) = column.iter().position(Option::is_none) {
        if column.len() < 3 {
            return trend_of(&[], expectation);
        }
        return Ok(TrendVerdict { holds: false, offending: Some((i, i)) });
    }
    let values: Vec<f64> = column.into_iter().flatten().collect();
    trend_of(&values, expectation)
}

// ---------------------------------------------------------------------------
// Builtin tables

const FIVE_THREE: f64 = 1.0 / 5.3;
const QED_BETA: f64 = 0.9994;
const QED_BASE_LOAD: f64 = 482.06;
const NDS_BETA: f64 = 13.0;
const QD_BETA: f64 = 0.099455;
const MULTIPLIERS: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0];

const QED_ROWS: [(u32, f64); 6] = [
    (504, 482.06),
    (995, 963.97),
    (1484, 1446.00),
    (1972, 1928.12),
    (2946, 2892.25),
    (3919, 3856.93),
];
const NDS_ROWS: [(u32, f64); 6] = [
    (495, 482.0),
    (977, 964.0),
    (1459, 1446.0),
    (1941, 1928.0),
    (2905, 2892.0),
    (3869, 3856.0),
];
const QD_ROWS: [(u32, f64); 6] = [
    (530, 482.06),
    (1061, 965.02),
    (1591, 1447.08),
    (2121, 1929.14),
    (3182, 2894.16),
    (4242, 3858.28),
];

/// Every name accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 23] = [
    "table1",
    "table2",
    "table3",
    "table3_qed_s_half",
    "table3_qed_s_one",
    "table4",
    "table4_nds_s_half",
    "table4_nds_s_one",
    "table5",
    "table6",
    "c7",
    "c8",
    "c8_qd_s_half",
    "c8_qd_s_one",
    "c9",
    "c9_qed_s_three_halves",
    "c9_nds_s_three_halves",
    "c10",
    "c11",
    "c12",
    "c13",
    "all",
    "default",
];

fn params(n: u32, r: f64, mu: f64) -> QueueParams {
    QueueParams::from_offered_load(n, r, mu).expect("builtin scenario is stable")
}

struct Family {
    beta: f64,
    rows: [(u32, f64); 6],
    base: QueueParams,
    multipliers: Vec<f64>,
}

fn family(regime: Regime) -> Family {
    match regime {
        Regime::Qed => Family {
            beta: QED_BETA,
            rows: QED_ROWS,
            base: params(504, QED_BASE_LOAD, FIVE_THREE),
            multipliers: MULTIPLIERS.to_vec(),
        },
        Regime::Nds => Family {
            beta: NDS_BETA,
            rows: NDS_ROWS,
            base: params(495, 482.0, FIVE_THREE),
            multipliers: MULTIPLIERS.to_vec(),
        },
        // the printed N values follow no integer-multiplier rule, so the
        // multipliers are the printed loads over the base load
        Regime::Qd => Family {
            beta: QD_BETA,
            rows: QD_ROWS,
            base: params(530, QED_BASE_LOAD, FIVE_THREE),
            multipliers: QD_ROWS.iter().map(|(_, r)| r / QED_BASE_LOAD).collect(),
        },
    }
}

fn regime_table(name: &str, title: &str, regime: Regime, s: f64, gamma: Option<f64>) -> TableSpec {
    let fam = family(regime);
    let scenarios = fam
        .rows
        .iter()
        .map(|&(n, r)| {
            let mu = match gamma {
                Some(g) => g * r.powf(-s),
                None => FIVE_THREE,
            };
            Scenario::new(format!("N={n}"), params(n, r, mu))
        })
        .collect();
    let shown = if regime == Regime::Qd { MetricKind::AdjQueueLen } else { MetricKind::QueueLen };
    TableSpec {
        name: name.into(),
        title: title.into(),
        scenarios,
        variants: [Variant::Exact, Variant::StateDependent].into(),
        metrics: vec![shown, MetricKind::QueueLen, MetricKind::AdjQueueLen, MetricKind::Busy, MetricKind::IdleProb]
            .into_iter()
            .fold(Vec::new(), |mut v, m| {
                if !v.contains(&m) {
                    v.push(m);
                }
                v
            }),
        wasserstein: true,
        errors: true,
        basis: ErrorBasis::Scaled,
        origin: Some(Origin {
            regime: RegimeSpec {
                regime,
                beta: fam.beta,
                gamma,
                s_exponent: s,
                load_multipliers: fam.multipliers,
            },
            base: fam.base,
        }),
    }
}

fn utilization_table(name: &str, n: u32, shown: MetricKind) -> TableSpec {
    let scenarios = [0.88, 0.90, 0.92, 0.94, 0.96]
        .iter()
        .map(|&rho| {
            let p = QueueParams::from_utilization(n, rho, FIVE_THREE).expect("builtin scenario is stable");
            Scenario::new(format!("rho={:.0}%", rho * 100.0), p)
        })
        .collect();
    small_system_table(name, format!("N = {n}, mu = 1/5.3, utilization sweep"), scenarios, shown)
}

fn service_sweep_table(name: &str, n: u32, load: f64) -> TableSpec {
    let scenarios = (2..=10)
        .map(|d| Scenario::new(format!("1/mu={d}"), params(n, load, 1.0 / d as f64)))
        .collect();
    small_system_table(name, format!("N = {n}, R = {load:.2}, service-time sweep"), scenarios, MetricKind::QueueLen)
}

fn small_system_table(name: &str, title: String, scenarios: Vec<Scenario>, shown: MetricKind) -> TableSpec {
    let mut metrics = vec![shown];
    metrics.extend(MetricKind::ALL.into_iter().filter(|m| *m != shown));
    TableSpec {
        name: name.into(),
        title,
        scenarios,
        variants: [Variant::Exact, Variant::StateDependent, Variant::ConstantCoeff].into(),
        metrics,
        wasserstein: true,
        errors: true,
        basis: ErrorBasis::Relative,
        origin: None,
    }
}

/// Builtin specs by name; grouped names expand to several specs.
pub fn builtin(name: &str) -> Result<Vec<TableSpec>> {
    let one = |s: TableSpec| Ok(vec![s]);
    match name {
        "table1" => one(regime_table("table1", "QED, beta = 0.9994, mu = 1/5.3", Regime::Qed, 0.0, None)),
        "table2" => one(regime_table("table2", "NDS, beta = 13, mu = 1/5.3", Regime::Nds, 0.0, None)),
        "table3_qed_s_half" => one(regime_table(
            "table3_qed_s_half",
            "QED, beta = 0.9994, mu = 4.1426/R^(1/2)",
            Regime::Qed,
            0.5,
            Some(4.1426),
        )),
        "table3_qed_s_one" => one(regime_table(
            "table3_qed_s_one",
            "QED, beta = 0.9994, mu = 90.9542/R",
            Regime::Qed,
            1.0,
            Some(90.9542),
        )),
        "table4_nds_s_half" => one(regime_table(
            "table4_nds_s_half",
            "NDS, beta = 13, mu = 4.1424/R^(1/2)",
            Regime::Nds,
            0.5,
            Some(4.1424),
        )),
        "table4_nds_s_one" => one(regime_table(
            "table4_nds_s_one",
            "NDS, beta = 13, mu = 90.9434/R",
            Regime::Nds,
            1.0,
            Some(90.9434),
        )),
        "table5" => one(utilization_table("table5", 18, MetricKind::QueueLen)),
        "table6" => one(utilization_table("table6", 66, MetricKind::QueueLen)),
        "c7" => one(regime_table("c7", "QD, beta = 0.0995, mu = 1/5.3", Regime::Qd, 0.0, None)),
        "c8_qd_s_half" => one(regime_table(
            "c8_qd_s_half",
            "QD, beta = 0.0995, mu = 4.1426/R^(1/2)",
            Regime::Qd,
            0.5,
            Some(4.1426),
        )),
        "c8_qd_s_one" => one(regime_table(
            "c8_qd_s_one",
            "QD, beta = 0.0995, mu = 90.9542/R",
            Regime::Qd,
            1.0,
            Some(90.9542),
        )),
        "c9_qed_s_three_halves" => one(regime_table(
            "c9_qed_s_three_halves",
            "QED, beta = 0.9994, mu = 1996.9729/R^(3/2)",
            Regime::Qed,
            1.5,
            Some(1996.9729),
        )),
        "c9_nds_s_three_halves" => one(regime_table(
            "c9_nds_s_three_halves",
            "NDS, beta = 13, mu = 1996.6166/R^(3/2)",
            Regime::Nds,
            1.5,
            Some(1996.6166),
        )),
        "c10" => one(utilization_table("c10", 132, MetricKind::AdjQueueLen)),
        "c11" => one(utilization_table("c11", 504, MetricKind::AdjQueueLen)),
        "c12" => one(service_sweep_table("c12", 18, 16.2)),
        "c13" => one(service_sweep_table("c13", 66, 59.4)),
        "table3" | "table4" | "c8" | "c9" => {
            let parts: &[&str] = match name {
                "table3" => &["table3_qed_s_half", "table3_qed_s_one"],
                "table4" => &["table4_nds_s_half", "table4_nds_s_one"],
                "c8" => &["c8_qd_s_half", "c8_qd_s_one"],
                _ => &["c9_qed_s_three_halves", "c9_nds_s_three_halves"],
            };
            expand(parts)
        }
        "all" | "default" => expand(&[
            "table1", "table2", "table3", "table4", "table5", "table6", "c7", "c8", "c9", "c10", "c11", "c12",
            "c13",
        ]),
        other => Err(GeoqError::Config(format!(
            "unknown table {other:?}; known: {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

fn expand(names: &[&str]) -> Result<Vec<TableSpec>> {
    let mut out = Vec::new();
    for n in names {
        out.extend(builtin(n)?);
    }
    Ok(out)
}

/// Regenerates a builtin spec's rows from its regime description and checks
/// that N matches exactly, R to the printed two decimals and μ to 1e-9
/// relative. Returns the first mismatch.
pub fn check_origin(spec: &TableSpec) -> Result<()> {
    let Some(origin) = &spec.origin else {
        return Ok(());
    };
    let generated = generate_scenarios(&origin.regime, &origin.base)?;
    if generated.len() != spec.scenarios.len() {
        return Err(GeoqError::Config(format!(
            "{}: {} generated rows for {} table rows",
            spec.name,
            generated.len(),
            spec.scenarios.len()
        )));
    }
    for (g, s) in generated.iter().zip(&spec.scenarios) {
        let t = &s.params;
        // μ is compared at the table's load, since R is printed rounded
        let mu_at_table_load = match origin.regime.gamma {
            Some(gamma) => gamma * t.offered_load().powf(-origin.regime.s_exponent),
            None => g.service_prob(),
        };
        let ok = g.n_servers() == t.n_servers()
            && (g.offered_load() - t.offered_load()).abs() <= 0.0051
            && (mu_at_table_load - t.service_prob()).abs() <= 1e-9 * t.service_prob()
            && (g.service_prob() - t.service_prob()).abs() <= 1e-4 * t.service_prob();
        if !ok {
            return Err(GeoqError::Config(format!(
                "{} row {}: generated (N={}, R={:.4}, mu={:.6}) vs table (N={}, R={:.4}, mu={:.6})",
                spec.name,
                s.label,
                g.n_servers(),
                g.offered_load(),
                g.service_prob(),
                t.n_servers(),
                t.offered_load(),
                t.service_prob()
            )));
        }
    }
    Ok(())
}
