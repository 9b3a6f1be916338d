//! `geoq`: exact and diffusion-approximate steady state of the GI/Geo/N queue.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure or a
//! failed verification.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geoq::config::ScenarioConfig;
use geoq::diffusion::{build_density, distance_report, DensityVariant, ErrorReport, GridSpec};
use geoq::experiments::{self, ErrorBasis, Origin, RunOptions, Scenario, TableSpec, Variant};
use geoq::markov::{check_bar, exact_metrics, solve_queue, verify_bounds, SolveOptions, TruncationPolicy};
use geoq::sim::{simulate_census, SimConfig};
use geoq::{ArrivalModel, GeoqError, MetricKind, QueueParams, Regime, RegimeSpec};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "geoq", version, about = "Steady-state analysis of the GI/Geo/N discrete-time queue")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact stationary distribution of the truncated chain.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stationary density of the diffusion approximation.
    Approx {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = VariantArg::StateDependent)]
        variant: VariantArg,
        #[arg(long, default_value_t = 1e-3)]
        grid_spacing: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact metrics next to both diffusion approximations.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regime sweep from a base scenario.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        regime: Option<Regime>,
        /// Inferred from the base scenario when absent.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Exponent in μ = γ R^{-s}.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        multipliers: Option<Vec<f64>>,
        /// Also report the constant-coefficient approximation.
        #[arg(long)]
        constant: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bound and identity checks on the solved distribution.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the census distribution.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Sampled epochs per replication.
        #[arg(long, default_value_t = 100_000)]
        epochs: u64,
        #[arg(long, default_value_t = 10)]
        replications: u32,
        /// Defaults to 50 mean service times.
        #[arg(long)]
        warmup: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Builtin tables by name (table1…table6, c7…c13, all).
    Tables {
        #[arg(default_value = "default")]
        names: Vec<String>,
        /// Also run rows with N ≥ 2900.
        #[arg(long)]
        include_slow: bool,
        /// Writes <dir>/<table>/report.csv and report.meta.
        #[arg(long, env = "GEOQ_OUT_DIR")]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// List the accepted names and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug, Clone)]
#[group(id = "scenario")]
struct ScenarioArgs {
    /// Scenario file (TOML); replaces the inline flags.
    #[arg(long, conflicts_with_all = ["servers", "arrival_rate", "load", "service_prob", "service_days"])]
    config: Option<PathBuf>,
    /// Number of servers N.
    #[arg(long)]
    servers: Option<u32>,
    /// Mean arrivals per epoch Λ.
    #[arg(long, conflicts_with = "load")]
    arrival_rate: Option<f64>,
    /// Utilization ρ = R/N, so Λ = ρNμ.
    #[arg(long)]
    load: Option<f64>,
    /// Per-epoch departure probability μ.
    #[arg(long, conflicts_with = "service_days")]
    service_prob: Option<f64>,
    /// Mean length of stay in epochs, μ = 1/d.
    #[arg(long)]
    service_days: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Fixed truncation level K; grown automatically when absent.
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long, value_enum, default_value_t = PolicyArg::LumpTop)]
    policy: PolicyArg,
    #[arg(long, default_value_t = geoq::markov::DEFAULT_TOLERANCE)]
    tol: f64,
    /// Pure power iteration from the heuristic start.
    #[arg(long)]
    power_only: bool,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    StateDependent,
    ConstantCoeff,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PolicyArg {
    LumpTop,
    Renormalize,
}

impl SolverArgs {
    fn options(&self) -> anyhow::Result<SolveOptions> {
        if !(self.tol > 0.0) {
            bail!(GeoqError::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(SolveOptions {
            tol: self.tol,
            truncation: self.truncation,
            policy: match self.policy {
                PolicyArg::LumpTop => TruncationPolicy::LumpTop,
                PolicyArg::Renormalize => TruncationPolicy::Renormalize,
            },
            direct_start: !self.power_only,
            ..SolveOptions::default()
        })
    }
}

impl ScenarioArgs {
    /// Resolves the inline flags or the config file into scenarios.
    fn resolve(&self) -> anyhow::Result<Vec<(QueueParams, ArrivalModel)>> {
        if let Some(path) = &self.config {
            return Ok(ScenarioConfig::load(path)?.scenarios()?);
        }
        Ok(vec![self.inline()?])
    }

    fn single(&self) -> anyhow::Result<(QueueParams, ArrivalModel)> {
        let mut all = self.resolve()?;
        if all.len() != 1 {
            bail!(GeoqError::Config(format!(
                "this command takes one scenario, the config describes {}",
                all.len()
            )));
        }
        Ok(all.remove(0))
    }

    fn config_file(&self) -> anyhow::Result<Option<ScenarioConfig>> {
        self.config.as_deref().map(ScenarioConfig::load).transpose().map_err(Into::into)
    }

    fn inline(&self) -> anyhow::Result<(QueueParams, ArrivalModel)> {
        let n = self
            .servers
            .ok_or_else(|| GeoqError::Config("--servers (or --config) is required".into()))?;
        let mu = match (self.service_prob, self.service_days) {
            (Some(mu), None) => mu,
            (None, Some(d)) => {
                if !(d > 1.0) {
                    bail!(GeoqError::InvalidParams(format!("--service-days must exceed 1, got {d}")));
                }
                1.0 / d
            }
            _ => bail!(GeoqError::Config("one of --service-prob or --service-days is required".into())),
        };
        let params = match (self.arrival_rate, self.load) {
            (Some(rate), None) => QueueParams::new(n, rate, mu)?,
            (None, Some(rho)) => QueueParams::from_utilization(n, rho, mu)?,
            _ => bail!(GeoqError::Config("one of --arrival-rate or --load is required".into())),
        };
        let arrivals = ArrivalModel::poisson(params.arrival_rate())?;
        Ok((params, arrivals))
    }
}

/// Sends text to `--out` or stdout.
fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn describe(p: &QueueParams) -> String {
    format!(
        "N={}  Lambda={:.6}  mu={:.6}  R={:.4}  rho={:.4}  zeta={:.6}",
        p.n_servers(),
        p.arrival_rate(),
        p.service_prob(),
        p.offered_load(),
        p.utilization(),
        p.zeta()
    )
}

fn pretty_json(value: &serde_json::Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_solve(scenario: &ScenarioArgs, solver: &SolverArgs, output: &OutputArgs) -> anyhow::Result<()> {
    let opts = solver.options()?;
    let (params, arrivals) = scenario.single()?;
    let pmf = solve_queue(&params, &arrivals, &opts)?;
    let metrics = exact_metrics(&pmf, &params);
    let text = match output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            pmf.write_csv(&mut buf)?;
            if let Some(path) = &output.out {
                emit(&Some(sidecar(path)), &pretty_json(&pmf.metadata())?)?;
            }
            String::from_utf8(buf)?
        }
        Format::Json => pretty_json(&json!({
            "params": params,
            "metrics": metrics,
            "solver": pmf.metadata(),
            "probs": pmf.probs,
        }))?,
        Format::Pretty => {
            let mut s = format!("{}\n", describe(&params));
            s += &format!(
                "K={}  iterations={}  residual={:.2e}  pi(K)={:.2e}\n",
                pmf.top_state(),
                pmf.iterations,
                pmf.residual,
                pmf.truncation_mass
            );
            for kind in MetricKind::ALL {
                s += &format!("{:>14}  {:.6}\n", kind.name(), metrics.get(kind));
            }
            s
        }
    };
    emit(&output.out, &text)
}

/// `report.csv` → `report.meta`.
fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

fn cmd_approx(scenario: &ScenarioArgs, variant: VariantArg, spacing: f64, output: &OutputArgs) -> anyhow::Result<()> {
    let (params, arrivals) = scenario.single()?;
    let kind = match variant {
        VariantArg::StateDependent => DensityVariant::StateDependent,
        VariantArg::ConstantCoeff => DensityVariant::ConstantCoeff,
    };
    let grid = GridSpec { spacing, ..GridSpec::default() };
    let density = build_density(&params, &arrivals, kind, &grid)?;
    let metrics = geoq::diffusion::approx_metrics(&density, &params);
    let text = match output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            density.write_csv(&mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json => pretty_json(&json!({
            "params": params,
            "variant": kind,
            "metrics": metrics,
            "kappa": density.kappa(),
            "grid": { "lo": density.grid()[0], "hi": density.grid().last(), "spacing": density.spacing() },
        }))?,
        Format::Pretty => {
            let mut s = format!("{}\n{kind:?} density, kappa={:.6e}\n", describe(&params), density.kappa());
            for k in MetricKind::ALL {
                s += &format!("{:>14}  {:.6}\n", k.name(), metrics.get(k));
            }
            s
        }
    };
    emit(&output.out, &text)
}

fn cmd_compare(scenario: &ScenarioArgs, solver: &SolverArgs, output: &OutputArgs) -> anyhow::Result<()> {
    let opts = solver.options()?;
    let (params, arrivals) = scenario.single()?;
    let pmf = solve_queue(&params, &arrivals, &opts)?;
    let mut reports: Vec<(DensityVariant, ErrorReport)> = Vec::new();
    for kind in [DensityVariant::StateDependent, DensityVariant::ConstantCoeff] {
        let density = build_density(&params, &arrivals, kind, &GridSpec::default())?;
        reports.push((kind, distance_report(&pmf, &density, &params)));
    }
    let exact = exact_metrics(&pmf, &params);
    let text = match output.format {
        Format::Json => pretty_json(&json!({
            "params": params,
            "exact": exact,
            "state_dependent": reports[0].1,
            "constant_coeff": reports[1].1,
        }))?,
        Format::Csv => {
            let mut s = String::from("metric,exact,state_dependent,scaled_error_sd,relative_error_sd,constant_coeff,scaled_error_cc,relative_error_cc\n");
            for k in MetricKind::ALL {
                s += &format!("{},{}", k.name(), exact.get(k));
                for (_, r) in &reports {
                    let rel = r.relative_error.get(k).map_or(String::new(), |v| v.to_string());
                    s += &format!(",{},{},{rel}", r.approx.get(k), r.scaled_error.get(k));
                }
                s.push('\n');
            }
            s += &format!("wasserstein,,{},,,{},,\n", reports[0].1.wasserstein, reports[1].1.wasserstein);
            s
        }
        Format::Pretty => {
            let mut s = format!("{}\n", describe(&params));
            s += &format!(
                "{:>14}  {:>10}  {:>10}  {:>9}  {:>9}  {:>10}  {:>9}  {:>9}\n",
                "metric", "Exact", "Stein", "rel err", "scaled", "Y0", "rel err", "scaled"
            );
            for k in MetricKind::ALL {
                s += &format!("{:>14}  {:>10.2}", k.name(), exact.get(k));
                for (_, r) in &reports {
                    let rel = r.relative_error.get(k).map_or("-".into(), |v| format!("{:.2}%", 100.0 * v));
                    s += &format!(
                        "  {:>10.2}  {:>9}  {:>8.2}%",
                        r.approx.get(k),
                        rel,
                        100.0 * r.scaled_error.get(k)
                    );
                }
                s.push('\n');
            }
            s += &format!(
                "{:>14}  {:>10}  {:>10.4}  {:>9}  {:>9}  {:>10.4}\n",
                "wasserstein", "", reports[0].1.wasserstein, "", "", reports[1].1.wasserstein
            );
            s
        }
    };
    emit(&output.out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    scenario: &ScenarioArgs,
    regime: Option<Regime>,
    beta: Option<f64>,
    gamma: Option<f64>,
    s: Option<f64>,
    multipliers: Option<Vec<f64>>,
    constant: bool,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    let file = scenario.config_file()?;
    let (base, file_spec) = match &file {
        Some(cfg) => (cfg.base()?.0, cfg.regime_spec()?),
        None => (scenario.inline()?.0, None),
    };
    let regime = regime
        .or(file_spec.as_ref().map(|r| r.regime))
        .ok_or_else(|| GeoqError::Config("sweep needs --regime (or a regime in the config)".into()))?;
    let mut spec = file_spec.unwrap_or_else(|| RegimeSpec::from_base(regime, &base, 0.0, vec![1.0]));
    spec.regime = regime;
    if let Some(b) = beta {
        spec.beta = b;
    } else if spec.beta.is_nan() || file.is_none() {
        spec.beta = regime.infer_beta(&base);
    }
    if gamma.is_some() {
        spec.gamma = gamma;
    }
    if let Some(s) = s {
        spec.s_exponent = s;
    }
    if let Some(m) = multipliers {
        spec.load_multipliers = m;
    }
    let rows = geoq::model::generate_scenarios(&spec, &base)?;
    let mut variants = vec![Variant::Exact, Variant::StateDependent];
    if constant {
        variants.push(Variant::ConstantCoeff);
    }
    let shown = if regime == Regime::Qd { MetricKind::AdjQueueLen } else { MetricKind::QueueLen };
    let mut metrics = vec![shown];
    metrics.extend(MetricKind::ALL.into_iter().filter(|m| *m != shown));
    let table = TableSpec {
        name: "sweep".into(),
        title: format!(
            "{regime} sweep, beta = {:.4}, s = {}, gamma = {:.4}",
            spec.beta,
            spec.s_exponent,
            spec.gamma_for(&base)
        ),
        scenarios: rows
            .iter()
            .zip(&spec.load_multipliers)
            .map(|(p, m)| Scenario { label: format!("m={m}"), params: *p, slow: false })
            .collect(),
        variants: variants.into_iter().collect(),
        metrics,
        wasserstein: true,
        errors: true,
        basis: ErrorBasis::Scaled,
        origin: Some(Origin { regime: spec, base }),
    };
    let report = experiments::run_table(&table, &RunOptions { include_slow: true, ..RunOptions::default() })?;
    let failed = report.rows.iter().any(|r| r.diagnostic.is_some());
    let text = match output.format {
        Format::Csv => report.to_csv(),
        Format::Json => pretty_json(&serde_json::to_value(&report)?)?,
        Format::Pretty => report.render(),
    };
    emit(&output.out, &text)?;
    if failed {
        bail!(GeoqError::Density("one or more sweep rows failed; see the diagnostic column".into()));
    }
    Ok(())
}

fn cmd_verify(scenario: &ScenarioArgs, solver: &SolverArgs, output: &OutputArgs) -> anyhow::Result<bool> {
    let opts = solver.options()?;
    let (params, arrivals) = scenario.single()?;
    let pmf = solve_queue(&params, &arrivals, &opts)?;
    let bounds = verify_bounds(&pmf, &params);
    let mut checks: Vec<(String, f64, f64, bool)> = bounds
        .checks
        .iter()
        .map(|c| (c.name.to_string(), c.lhs, c.rhs, c.holds))
        .collect();
    for (name, coeffs) in [("bar_constant", vec![1.0]), ("bar_linear", vec![0.0, 1.0]), ("bar_quadratic", vec![0.0, 0.0, 1.0])] {
        let r = check_bar(&pmf, &params, &arrivals, &coeffs)?;
        checks.push((name.into(), r, 1e-8, r < 1e-8));
    }
    let m = exact_metrics(&pmf, &params);
    let flow = (params.service_prob() * m.busy - params.arrival_rate()).abs();
    checks.push(("flow_balance".into(), flow, 1e-8, flow < 1e-8));
    let total = (pmf.total() - 1.0).abs();
    checks.push(("probability_sum".into(), total, 1e-10, total < 1e-10));
    let all = checks.iter().all(|c| c.3);
    let text = match output.format {
        Format::Json => pretty_json(&json!({
            "params": params,
            "all_pass": all,
            "checks": checks.iter().map(|(n, l, r, h)| json!({"name": n, "lhs": l, "rhs": r, "pass": h})).collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            let mut s = String::from("check,lhs,rhs,pass\n");
            for (n, l, r, h) in &checks {
                s += &format!("{n},{l},{r},{h}\n");
            }
            s
        }
        Format::Pretty => {
            let mut s = format!("{}\n", describe(&params));
            for (n, l, r, h) in &checks {
                s += &format!("{} {n:<22} lhs={l:.6e}  rhs={r:.6e}\n", if *h { "PASS" } else { "FAIL" });
            }
            s
        }
    };
    emit(&output.out, &text)?;
    Ok(all)
}

fn cmd_simulate(
    scenario: &ScenarioArgs,
    epochs: u64,
    replications: u32,
    warmup: Option<u64>,
    seed: u64,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    let (params, arrivals) = scenario.single()?;
    let mut cfg = SimConfig::for_params(&params, epochs, replications, seed);
    if let Some(w) = warmup {
        cfg.warmup_epochs = w;
    }
    let report = simulate_census(&params, &arrivals, &cfg)?;
    let text = match output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            if let Some(path) = &output.out {
                emit(&Some(sidecar(path)), &pretty_json(&report.metadata())?)?;
            }
            String::from_utf8(buf)?
        }
        Format::Json => pretty_json(&json!({
            "params": params,
            "metrics": report.metrics,
            "half_width": report.half_width,
            "departure_rate": report.departure_rate,
            "departure_half_width": report.departure_half_width,
            "meta": report.metadata(),
        }))?,
        Format::Pretty => {
            let mut s = format!(
                "{}\n{} replications x {} epochs (warmup {}), seed {}\n",
                describe(&params),
                cfg.replications,
                cfg.sample_epochs,
                cfg.warmup_epochs,
                cfg.seed
            );
            for k in MetricKind::ALL {
                s += &format!("{:>14}  {:.4} ± {:.4}\n", k.name(), report.metrics.get(k), report.half_width.get(k));
            }
            s += &format!(
                "{:>14}  {:.4} ± {:.4}  (Lambda = {:.4})\n",
                "departures",
                report.departure_rate,
                report.departure_half_width,
                params.arrival_rate()
            );
            s
        }
    };
    emit(&output.out, &text)
}

fn cmd_tables(names: &[String], include_slow: bool, out_dir: &Option<PathBuf>, format: Format, seed: u64) -> anyhow::Result<()> {
    let mut specs = Vec::new();
    for name in names {
        specs.extend(experiments::builtin(name)?);
    }
    let opts = RunOptions { include_slow, seed, ..RunOptions::default() };
    let mut failed = false;
    let mut stdout = io::stdout().lock();
    for spec in &specs {
        let report = experiments::run_table(spec, &opts)?;
        failed |= report.rows.iter().any(|r| r.diagnostic.is_some());
        if let Some(dir) = out_dir {
            let table_dir = dir.join(&spec.name);
            fs::create_dir_all(&table_dir).with_context(|| format!("creating {}", table_dir.display()))?;
            fs::write(table_dir.join("report.csv"), report.to_csv())?;
            fs::write(table_dir.join("report.meta"), pretty_json(&report.metadata())?)?;
        }
        match format {
            Format::Pretty => writeln!(stdout, "{}", report.render())?,
            Format::Csv => write!(stdout, "{}", report.to_csv())?,
            Format::Json => write!(stdout, "{}", pretty_json(&serde_json::to_value(&report)?)?)?,
        }
    }
    if failed {
        bail!(GeoqError::Density("one or more table rows failed; see the diagnostic column".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!(GeoqError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    match cli.command {
        Command::Solve { scenario, solver, output } => cmd_solve(&scenario, &solver, &output)?,
        Command::Approx { scenario, variant, grid_spacing, output } => {
            cmd_approx(&scenario, variant, grid_spacing, &output)?
        }
        Command::Compare { scenario, solver, output } => cmd_compare(&scenario, &solver, &output)?,
        Command::Sweep { scenario, regime, beta, gamma, s, multipliers, constant, output } => {
            cmd_sweep(&scenario, regime, beta, gamma, s, multipliers, constant, &output)?
        }
        Command::Verify { scenario, solver, output } => return cmd_verify(&scenario, &solver, &output),
        Command::Simulate { scenario, epochs, replications, warmup, seed, output } => {
            cmd_simulate(&scenario, epochs, replications, warmup, seed, &output)?
        }
        Command::Tables { names, include_slow, out_dir, format, seed, list } => {
            if list {
                emit(&None, &(experiments::BUILTIN_NAMES.join("\n") + "\n"))?;
            } else {
                cmd_tables(&names, include_slow, &out_dir, format, seed)?
            }
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<GeoqError>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("geoq: verification failed");
            ExitCode::from(2)
        }
        // a closed pipe (`geoq tables | head`) is not worth a message
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("geoq: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
