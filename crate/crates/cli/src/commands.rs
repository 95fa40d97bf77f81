use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fowler::erosion::{verify_erosion, ErosionConfig};
use fowler::fd::{self, FdConfig, FdReport, Model};
use fowler::kernel::{build_kernel, loglog_slope};
use fowler::nonlocal::{apply_I_definition, apply_I_formula, apply_I_spectral, Bump, Gaussian, SmoothProfile};
use fowler::presets::load_preset;
use fowler::spectral::{simulate as run_spectral, SimConfig, SimReport};
use fowler::symbol::{adjudicate, psi_closed, psi_oracle_nonlocal, SymbolConstants};
use fowler::{Error, Grid, SymbolTable};

use crate::output::{write_manifest, ConstantsProvenance, Outputs, RunManifest, Timings};
use crate::CliError;

pub(crate) struct Context {
    pub dir: PathBuf,
    pub subcommand: &'static str,
    pub arguments: Vec<String>,
    pub start: Instant,
}

impl Context {
    fn outputs(&self) -> Result<Outputs, CliError> {
        Outputs::create(self.dir.clone())
    }

    /// Write the manifest for `outputs` and return it.
    fn finish(
        &self,
        outputs: Outputs,
        stem: &str,
        config: &impl Serialize,
        results: Value,
        compute_seconds: f64,
        failed: bool,
    ) -> Result<(RunManifest, PathBuf), CliError> {
        let dir = outputs.dir().to_path_buf();
        let manifest = RunManifest {
            tool: "fowler".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: self.subcommand.into(),
            arguments: self.arguments.clone(),
            status: if failed { "numerical-failure" } else { "ok" }.into(),
            config: to_value(config)?,
            constants: provenance()?,
            timings: Timings {
                compute_seconds,
                write_seconds: (self.start.elapsed().as_secs_f64() - compute_seconds).max(0.0),
            },
            outputs: outputs.into_files(),
            results,
        };
        let path = write_manifest(&dir, stem, &manifest)?;
        Ok((manifest, path))
    }
}

fn to_value(v: &impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::numerical(format!("serialization failed: {e}")))
}

fn provenance() -> Result<ConstantsProvenance, CliError> {
    let adj = adjudicate(&SymbolConstants::candidates())?;
    let selected = adj
        .selected
        .clone()
        .ok_or_else(|| CliError::numerical("no candidate constant set matches the quadrature oracle".to_string()))?;
    Ok(ConstantsProvenance {
        name: selected.name.clone(),
        a: selected.a,
        b: selected.b,
        residuals: adj
            .candidates
            .iter()
            .map(|c| (c.constants.name.clone(), c.residual))
            .collect(),
    })
}

/// Read a JSON config, or the `config` block of a manifest written by the
/// same subcommand.
fn load_config<T: DeserializeOwned>(path: &Path, subcommand: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(None, format!("{}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("tool") && obj.contains_key("config") {
            let from = obj.get("subcommand").and_then(Value::as_str).unwrap_or("");
            if from != subcommand {
                return Err(CliError::config(
                    Some("subcommand"),
                    format!("{} is a `{from}` manifest, not `{subcommand}`", path.display()),
                ));
            }
            value = obj.remove("config").unwrap_or(Value::Null);
        }
    }
    serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        let key = message.split('`').nth(1).map(str::to_string);
        CliError::Config {
            key,
            message: format!("{}: {message}", path.display()),
        }
    })
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let (n, l) = s.split_once(',').ok_or_else(|| format!("expected N,L, got `{s}`"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("grid size `{n}`: {e}"))?;
    let l: f64 = l.trim().parse().map_err(|e| format!("grid length `{l}`: {e}"))?;
    Grid::new(l, n).map_err(|e| e.to_string())
}

fn one() -> f64 {
    1.0
}

// ---------------------------------------------------------------- symbol

#[derive(Debug, Args)]
pub struct SymbolArgs {
    /// Comma-separated frequencies.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "config"
    )]
    pub xi: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub viscosity: f64,
    /// JSON config (or a previous manifest) instead of flags.
    #[arg(long, conflicts_with = "xi")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolRun {
    xi: Vec<f64>,
    #[serde(default = "one")]
    viscosity: f64,
}

pub(crate) fn symbol(ctx: &Context, args: SymbolArgs) -> Result<RunManifest, CliError> {
    let run: SymbolRun = match &args.config {
        Some(p) => load_config(p, ctx.subcommand)?,
        None => SymbolRun {
            xi: args.xi,
            viscosity: args.viscosity,
        },
    };
    if !(run.viscosity.is_finite() && run.viscosity >= 0.0) {
        return Err(CliError::config(
            Some("viscosity"),
            format!("must be >= 0, got {}", run.viscosity),
        ));
    }
    let constants = fowler::symbol::canonical_constants()?;
    let mut rows = Vec::with_capacity(run.xi.len());
    let mut max_diff = 0.0f64;
    let mut max_oracle_error = 0.0f64;
    for &xi in &run.xi {
        let psi = psi_closed(xi, &constants, run.viscosity);
        let oracle = psi_oracle_nonlocal(xi)?;
        let reference = oracle.value + 4.0 * PI * PI * run.viscosity * xi * xi;
        let diff = (psi - reference).norm();
        max_diff = max_diff.max(diff);
        max_oracle_error = max_oracle_error.max(oracle.error);
        rows.push([xi, psi.re, psi.im, reference.re, reference.im, diff]);
    }
    let compute = ctx.start.elapsed().as_secs_f64();
    let mut out = ctx.outputs()?;
    out.csv(
        "symbol.csv",
        &["xi", "re_psi", "im_psi", "oracle_re", "oracle_im", "abs_diff"],
        &rows,
    )?;
    let results = json!({ "max_abs_diff": max_diff, "max_oracle_error": max_oracle_error });
    Ok(ctx.finish(out, "symbol", &run, results, compute, false)?.0)
}

// ---------------------------------------------------------------- nonlocal

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Gaussian,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Def,
    Formula,
    Spectral,
    All,
}

#[derive(Debug, Args)]
pub struct NonlocalArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub profile: ProfileKind,
    #[arg(long, value_enum, default_value = "all")]
    pub route: Route,
    /// Profile center; defaults to the middle of the grid.
    #[arg(long)]
    pub center: Option<f64>,
    /// Gaussian width or bump radius.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Grid as `N,L`.
    #[arg(long, value_parser = parse_grid, default_value = "512,30")]
    pub grid: Grid,
    #[arg(long, conflicts_with_all = ["center", "width", "amplitude"])]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ProfileSpec {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    Bump { center: f64, radius: f64, amplitude: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NonlocalRun {
    profile: ProfileSpec,
    routes: Vec<Route>,
    grid: Grid,
}

/// Column headers, rows, and a summary of the pairwise route differences.
type RouteTable = (Vec<String>, Vec<Vec<f64>>, Value);

fn route_table<P: SmoothProfile>(p: &P, run: &NonlocalRun) -> Result<RouteTable, CliError> {
    let grid = run.grid;
    let xs = grid.xs();
    let mut header = vec!["x".to_string()];
    let mut columns: Vec<Vec<f64>> = vec![xs.clone()];
    let mut extra = json!({});
    for route in &run.routes {
        let col = match route {
            Route::Def => xs
                .iter()
                .map(|&x| apply_I_definition(p, x))
                .collect::<Result<Vec<_>, _>>()?,
            Route::Formula => xs
                .iter()
                .map(|&x| apply_I_formula(p, x))
                .collect::<Result<Vec<_>, _>>()?,
            Route::Spectral => {
                let table = SymbolTable::new(grid, 1.0)?;
                let app = apply_I_spectral(&p.sample(grid)?, &table)?;
                extra = json!({ "seam_clearance": app.seam_clearance, "warnings": app.warnings });
                app.field.into_values()
            }
            Route::All => unreachable!("expanded before evaluation"),
        };
        header.push(format!("{route:?}").to_lowercase());
        columns.push(col);
    }
    let rows = (0..xs.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let mut diffs = serde_json::Map::new();
    for a in 1..columns.len() {
        for b in a + 1..columns.len() {
            let d = columns[a]
                .iter()
                .zip(&columns[b])
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            diffs.insert(format!("{}-{}", header[a], header[b]), json!(d));
        }
    }
    Ok((header, rows, json!({ "max_abs_diff": diffs, "spectral": extra })))
}

pub(crate) fn nonlocal(ctx: &Context, args: NonlocalArgs) -> Result<RunManifest, CliError> {
    let mut run: NonlocalRun = match &args.config {
        Some(p) => load_config(p, ctx.subcommand)?,
        None => {
            let center = args.center.unwrap_or(0.5 * args.grid.length());
            let profile = match args.profile {
                ProfileKind::Gaussian => ProfileSpec::Gaussian {
                    center,
                    width: args.width,
                    amplitude: args.amplitude,
                },
                ProfileKind::Bump => ProfileSpec::Bump {
                    center,
                    radius: args.width,
                    amplitude: args.amplitude,
                },
            };
            NonlocalRun {
                profile,
                routes: vec![args.route],
                grid: args.grid,
            }
        }
    };
    if run.routes.is_empty() || run.routes.contains(&Route::All) {
        run.routes = vec![Route::Def, Route::Formula, Route::Spectral];
    }
    let (header, rows, results) = match run.profile {
        ProfileSpec::Gaussian {
            center,
            width,
            amplitude,
        } => {
            if width.is_nan() || width <= 0.0 {
                return Err(CliError::config(Some("width"), format!("must be > 0, got {width}")));
            }
            route_table(
                &Gaussian {
                    center,
                    width,
                    amplitude,
                },
                &run,
            )?
        }
        ProfileSpec::Bump {
            center,
            radius,
            amplitude,
        } => {
            if radius.is_nan() || radius <= 0.0 {
                return Err(CliError::config(Some("radius"), format!("must be > 0, got {radius}")));
            }
            route_table(
                &Bump {
                    center,
                    radius,
                    amplitude,
                },
                &run,
            )?
        }
    };
    let compute = ctx.start.elapsed().as_secs_f64();
    let mut out = ctx.outputs()?;
    out.csv("nonlocal.csv", &header, &rows)?;
    Ok(ctx.finish(out, "nonlocal", &run, results, compute, false)?.0)
}

// ---------------------------------------------------------------- kernel

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    pub t: Vec<f64>,
    /// Grid as `N,L`.
    #[arg(long, value_parser = parse_grid, default_value = "4096,30")]
    pub grid: Grid,
    #[arg(long, default_value_t = 1.0)]
    pub viscosity: f64,
    #[arg(long, conflicts_with = "t")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRun {
    t: Vec<f64>,
    grid: Grid,
    #[serde(default = "one")]
    viscosity: f64,
}

#[derive(Debug, Serialize)]
struct KernelSummary {
    t: f64,
    mass: f64,
    min: f64,
    grad_l1: f64,
    grad_l2: f64,
    nyquist_magnitude: f64,
    resolved: bool,
    imaginary_residue: f64,
    far_field_weighted_max: f64,
}

pub(crate) fn kernel(ctx: &Context, args: KernelArgs) -> Result<RunManifest, CliError> {
    let run: KernelRun = match &args.config {
        Some(p) => load_config(p, ctx.subcommand)?,
        None => KernelRun {
            t: args.t,
            grid: args.grid,
            viscosity: args.viscosity,
        },
    };
    if run.t.is_empty() {
        return Err(CliError::config(Some("t"), "at least one time is required"));
    }
    let table = SymbolTable::new(run.grid, run.viscosity)?;
    let mut columns = vec![run.grid.xs()];
    let mut header = vec!["x".to_string()];
    let mut summary = Vec::with_capacity(run.t.len());
    for &t in &run.t {
        let k = build_kernel(t, &table)?;
        let grad = k.gradient();
        summary.push(KernelSummary {
            t,
            mass: k.mass(),
            min: k.min(),
            grad_l1: grad.values().iter().map(|v| v.abs()).sum::<f64>() * run.grid.dx(),
            grad_l2: grad.l2_norm(),
            nyquist_magnitude: k.nyquist_magnitude(),
            resolved: k.is_resolved(),
            imaginary_residue: k.imaginary_residue(),
            far_field_weighted_max: k.far_field_weighted_max(),
        });
        header.push(format!("K(t={t})"));
        columns.push(k.values().values().to_vec());
    }
    let mut slopes = json!(null);
    if summary.len() >= 2 {
        let ts: Vec<f64> = summary.iter().map(|s| s.t).collect();
        slopes = json!({
            "grad_l2": loglog_slope(&ts, &summary.iter().map(|s| s.grad_l2).collect::<Vec<_>>()),
            "grad_l1": loglog_slope(&ts, &summary.iter().map(|s| s.grad_l1).collect::<Vec<_>>()),
        });
    }
    let diagnostics = json!({ "omega0": table.omega0(), "kernels": summary, "loglog_slopes": slopes });
    let compute = ctx.start.elapsed().as_secs_f64();
    let mut out = ctx.outputs()?;
    let rows: Vec<Vec<f64>> = (0..run.grid.points())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    out.csv("kernel.csv", &header, &rows)?;
    out.json("kernel_diagnostics.json", &diagnostics)?;
    Ok(ctx.finish(out, "kernel", &run, diagnostics, compute, false)?.0)
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Spectral,
    Fd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Burgers,
    Fowler,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Burgers => Model::Burgers,
            ModelArg::Fowler => Model::Fowler,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Finite-difference model; overrides the config.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
}

fn spectral_outputs(out: &mut Outputs, stem: &str, report: &SimReport) -> Result<Value, CliError> {
    let xs = report.config.grid.xs();
    let mut times = Vec::with_capacity(report.snapshots.len());
    for (i, s) in report.snapshots.iter().enumerate() {
        out.snapshot(stem, i, &xs, s.field.values())?;
        times.push(s.t);
    }
    out.csv(
        &format!("{stem}_diagnostics.csv"),
        &["t", "l2", "mass", "min", "argmin", "tail_fraction", "energy_bound"],
        report
            .diagnostics
            .iter()
            .map(|d| [d.t, d.l2, d.mass, d.min, d.argmin, d.tail_fraction, d.energy_bound]),
    )?;
    Ok(json!({
        "scheme": "spectral",
        "dt": report.dt,
        "omega0": report.omega0,
        "snapshot_times": times,
        "energy_violations": report.energy_violations,
        "under_resolved_steps": report.under_resolved_steps,
        "warnings": report.warnings,
        "diagnostics": report.diagnostics,
    }))
}

fn fd_outputs(out: &mut Outputs, stem: &str, report: &FdReport) -> Result<Value, CliError> {
    let xs = report.xs();
    for (i, s) in report.snapshots.iter().enumerate() {
        out.snapshot(stem, i, &xs, &s.u)?;
    }
    out.csv(
        &format!("{stem}_mass.csv"),
        &["t", "mass"],
        report.mass.iter().map(|&(t, m)| [t, m]),
    )?;
    let mut v = to_value(report)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("config");
        obj.insert("scheme".into(), json!("fd"));
        obj.insert("mass_drift".into(), json!(report.mass_drift()));
        obj.insert(
            "snapshot_times".into(),
            json!(report.snapshots.iter().map(|s| s.t).collect::<Vec<_>>()),
        );
    }
    Ok(v)
}

fn numerical_failure(e: &Error, manifest: PathBuf) -> CliError {
    CliError::Numerical {
        message: e.to_string(),
        manifest: Some(manifest),
    }
}

pub(crate) fn simulate(ctx: &Context, args: SimulateArgs) -> Result<RunManifest, CliError> {
    let preset = args.preset.as_deref().map(load_preset).transpose()?;
    match args.scheme {
        Scheme::Spectral => {
            if args.model == Some(ModelArg::Burgers) {
                return Err(CliError::config(
                    Some("model"),
                    "the spectral scheme solves the Fowler equation only; use --scheme fd for burgers",
                ));
            }
            let cfg: SimConfig = match (&args.config, preset) {
                (Some(p), _) => load_config(p, ctx.subcommand)?,
                (None, Some(p)) => p.spectral,
                (None, None) => unreachable!("clap requires --config or --preset"),
            };
            cfg.validate()?;
            let u0 = cfg.initial.sample(cfg.grid)?;
            let stem = "simulate_spectral";
            match run_spectral(&cfg, &u0) {
                Ok(report) => {
                    let compute = ctx.start.elapsed().as_secs_f64();
                    let mut out = ctx.outputs()?;
                    let results = spectral_outputs(&mut out, stem, &report)?;
                    Ok(ctx.finish(out, stem, &cfg, results, compute, false)?.0)
                }
                Err(e @ Error::BlowUp { .. }) => {
                    let Error::BlowUp { partial, .. } = &e else {
                        unreachable!()
                    };
                    let compute = ctx.start.elapsed().as_secs_f64();
                    let mut out = ctx.outputs()?;
                    let results = spectral_outputs(&mut out, stem, partial)?;
                    let (_, path) = ctx.finish(out, stem, &cfg, results, compute, true)?;
                    Err(numerical_failure(&e, path))
                }
                Err(e) => Err(e.into()),
            }
        }
        Scheme::Fd => {
            let mut cfg: FdConfig = match (&args.config, preset) {
                (Some(p), _) => load_config(p, ctx.subcommand)?,
                (None, Some(p)) => p.fd,
                (None, None) => unreachable!("clap requires --config or --preset"),
            };
            if let Some(m) = args.model {
                cfg.model = m.into();
            }
            cfg.validate()?;
            let stem = match cfg.model {
                Model::Burgers => "simulate_fd_burgers",
                Model::Fowler => "simulate_fd_fowler",
            };
            match fd::run(&cfg) {
                Ok(report) => {
                    let compute = ctx.start.elapsed().as_secs_f64();
                    let mut out = ctx.outputs()?;
                    let results = fd_outputs(&mut out, stem, &report)?;
                    Ok(ctx.finish(out, stem, &cfg, results, compute, false)?.0)
                }
                Err(e @ Error::FdBlowUp { .. }) => {
                    let Error::FdBlowUp { partial, .. } = &e else {
                        unreachable!()
                    };
                    let compute = ctx.start.elapsed().as_secs_f64();
                    let mut out = ctx.outputs()?;
                    let results = fd_outputs(&mut out, stem, partial)?;
                    let (_, path) = ctx.finish(out, stem, &cfg, results, compute, true)?;
                    Err(numerical_failure(&e, path))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

// ---------------------------------------------------------------- erosion

#[derive(Debug, Args)]
pub struct ErosionArgs {
    /// ErosionConfig JSON; defaults to the dune setup.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub(crate) fn erosion(ctx: &Context, args: ErosionArgs) -> Result<RunManifest, CliError> {
    let cfg: ErosionConfig = match &args.config {
        Some(p) => load_config(p, ctx.subcommand)?,
        None => ErosionConfig::dune()?,
    };
    cfg.sim.validate()?;
    let profile = cfg.sim.initial.bump().ok_or_else(|| {
        CliError::config(
            Some("initial"),
            "erosion needs a compactly supported `dune` initial condition",
        )
    })?;
    let report = verify_erosion(&profile, &cfg)?;
    let compute = ctx.start.elapsed().as_secs_f64();
    let mut out = ctx.outputs()?;
    out.json("erosion_report.json", &report)?;
    out.csv(
        "erosion_early.csv",
        &["t", "u"],
        report.early_series.iter().map(|&(t, u)| [t, u]),
    )?;
    let mut times = Vec::new();
    if let Some(run) = &report.run {
        let xs = cfg.sim.grid.xs();
        for (i, s) in run.snapshots.iter().enumerate() {
            out.snapshot("erosion", i, &xs, s.field.values())?;
            times.push(s.t);
        }
    }
    let mut results = to_value(&report)?;
    if let Some(obj) = results.as_object_mut() {
        obj.remove("early_series");
        obj.insert("snapshot_times".into(), json!(times));
    }
    Ok(ctx.finish(out, "erosion", &cfg, results, compute, false)?.0)
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "dune", conflicts_with = "config")]
    pub preset: String,
    /// FdConfig JSON; its `model` is ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn summary(r: &FdReport) -> Value {
    json!({
        "min_u": r.min_value,
        "min_time": r.min_time,
        "min_position": r.min_position,
        "max_u": r.max_value,
        "mass_drift": r.mass_drift(),
        "steps": r.steps,
        "cfl_violations": r.cfl_violations,
    })
}

pub(crate) fn compare(ctx: &Context, args: CompareArgs) -> Result<RunManifest, CliError> {
    let cfg: FdConfig = match &args.config {
        Some(p) => load_config(p, ctx.subcommand)?,
        None => load_preset(&args.preset)?.fd,
    };
    let burgers_cfg = FdConfig {
        model: Model::Burgers,
        ..cfg.clone()
    };
    let fowler_cfg = FdConfig {
        model: Model::Fowler,
        ..cfg.clone()
    };
    burgers_cfg.validate()?;
    fowler_cfg.validate()?;
    let (burgers, fowler) = std::thread::scope(|s| {
        let b = s.spawn(|| fd::run(&burgers_cfg));
        let f = fd::run(&fowler_cfg);
        (b.join().expect("burgers run panicked"), f)
    });
    let (burgers, fowler) = (burgers?, fowler?);
    let compute = ctx.start.elapsed().as_secs_f64();
    let mut out = ctx.outputs()?;
    let xs = burgers.xs();
    out.csv(
        "compare_final.csv",
        &["x", "u_burgers", "u_fowler"],
        xs.iter()
            .zip(&burgers.final_snapshot().u)
            .zip(&fowler.final_snapshot().u)
            .map(|((&x, &b), &f)| [x, b, f]),
    )?;
    let results = json!({
        "t_end": cfg.t_end,
        "burgers": summary(&burgers),
        "fowler": summary(&fowler),
        "erosion_observed": fowler.min_value < 0.0 && burgers.min_value >= 0.0,
    });
    out.json("compare.json", &results)?;
    Ok(ctx.finish(out, "compare", &cfg, results, compute, false)?.0)
}
