use std::fs;
use std::io::{self, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use nstrans::diagnostics::{diagnose as run_diagnostics, write_diagnostics_csv, DiagnoseOptions, DiagnosticRecord};
use nstrans::regime::RegimeConfig;
use nstrans::scaling::{
    log_spaced, powerlaw_fit, read_fit_points, reynolds_sweep, synth_sk_dataset, write_sweep_csv, FitResult,
    ScalingError, SweepConfig,
};
use nstrans::solver::{simulate_with, InitialCondition, SolverConfig, SolverError};
use nstrans::{FlowParams, Snapshot, Timeline};
use serde::Serialize;

use crate::manifest::{Failure, RunManifest};
use crate::{svg, DiagnoseArgs, FitArgs, Global};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

fn user(e: impl Into<anyhow::Error>) -> CliError {
    CliError { code: 2, error: e.into() }
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError { code: 3, error: e.into() }
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::Parse(_) | SolverError::Config { .. } | SolverError::Initial(_) => user(e),
        _ => runtime(e),
    }
}

type CliResult<T = ()> = Result<T, CliError>;

const DEFAULT_SYNTH_SEED: u64 = 42;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(user)
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(user)
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

/// Apply `--seed` and make a relative initial-condition path relative to
/// the directory of the config file.
fn adjust_initial_condition(ic: &mut InitialCondition, config_path: &Path, seed: Option<u64>) {
    match ic {
        InitialCondition::RandomShear { seed: s, .. } => {
            if let Some(seed) = seed {
                *s = seed;
            }
        }
        InitialCondition::File { path } if path.is_relative() => {
            if let Some(dir) = config_path.parent() {
                *path = dir.join(&*path);
            }
        }
        _ => {}
    }
}

pub fn simulate(config_path: &Path, out_dir: &Path, g: &Global) -> CliResult {
    let mut cfg = SolverConfig::from_json(&read_text(config_path)?).map_err(solver_error)?;
    adjust_initial_condition(&mut cfg.initial_condition, config_path, g.seed);
    create_dir(out_dir)?;

    let mut manifest = RunManifest::start("simulate", &cfg);
    let mut write_error = None;
    let mut index = 0usize;
    let result = simulate_with(&cfg, |snap| {
        let name = format!("snap_{index:06}.bin");
        if let Err(e) = snap.write(out_dir.join(&name)) {
            write_error = Some(anyhow!(e).context(format!("writing {name}")));
            return ControlFlow::Break(());
        }
        manifest.outputs.push(name);
        index += 1;
        ControlFlow::Continue(())
    });

    if let Some(e) = write_error {
        manifest.failure = Some(Failure { message: format!("{e:#}"), time: None });
        manifest.finish(out_dir).map_err(runtime)?;
        return Err(runtime(e));
    }
    match result {
        Ok(tl) => {
            g.progress(format_args!(
                "wrote {} snapshots to {} (t = {} .. {})",
                tl.len(),
                out_dir.display(),
                tl.times()[0],
                tl.times()[tl.len() - 1]
            ));
            manifest.finish(out_dir).map_err(runtime)
        }
        Err(e) => {
            let time = match &e {
                SolverError::BlowUp { time, .. } => Some(*time),
                _ => None,
            };
            manifest.failure = Some(Failure { message: e.to_string(), time });
            manifest.finish(out_dir).map_err(runtime)?;
            Err(solver_error(e))
        }
    }
}

/// Snapshot files named by a directory (all `*.bin`, sorted) or a glob.
fn snapshot_paths(input: &str) -> CliResult<Vec<PathBuf>> {
    let pattern = if Path::new(input).is_dir() {
        Path::new(input).join("*.bin").to_string_lossy().into_owned()
    } else {
        input.to_string()
    };
    let mut paths: Vec<PathBuf> = glob::glob(&pattern)
        .with_context(|| format!("bad glob pattern `{pattern}`"))
        .map_err(user)?
        .filter_map(Result::ok)
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(user(anyhow!("no snapshot files matched `{input}`")));
    }
    Ok(paths)
}

/// Accept either a bare `FlowParams` document or a full solver config.
fn load_params(path: &Path) -> CliResult<FlowParams> {
    let text = read_text(path)?;
    let params = match serde_json::from_str::<FlowParams>(&text) {
        Ok(p) => p,
        Err(bare) => match serde_json::from_str::<SolverConfig>(&text) {
            Ok(cfg) => cfg.params,
            Err(_) => return Err(user(anyhow!("{}: not a parameter file: {bare}", path.display()))),
        },
    };
    params.validate().map_err(user)?;
    Ok(params)
}

fn load_timeline(input: &str, params_path: &Path) -> CliResult<Timeline> {
    let params = load_params(params_path)?;
    let snapshots = snapshot_paths(input)?
        .iter()
        .map(|p| Snapshot::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(user)?;
    Timeline::new(snapshots, params).map_err(user)
}

fn diagnostics(timeline: &Timeline, opts: DiagnoseArgs) -> CliResult<Vec<DiagnosticRecord>> {
    let options = DiagnoseOptions {
        critical_tol: opts.critical_tol,
        regime: RegimeConfig { theta: opts.theta, ..RegimeConfig::default() },
    };
    run_diagnostics(timeline, &options).map_err(user)
}

pub fn diagnose(input: &str, params: &Path, out: Option<&Path>, opts: DiagnoseArgs, g: &Global) -> CliResult {
    let timeline = load_timeline(input, params)?;
    let records = diagnostics(&timeline, opts)?;
    let mut buf = Vec::new();
    write_diagnostics_csv(&mut buf, &records).map_err(runtime)?;
    match out {
        Some(path) => {
            write_file(path, &buf)?;
            g.progress(format_args!("wrote {} rows to {}", records.len(), path.display()));
        }
        None => io::stdout().write_all(&buf).map_err(runtime)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportConfig<'a> {
    snapshots: &'a str,
    params: FlowParams,
    #[serde(flatten)]
    opts: DiagnoseArgs,
}

pub fn report(input: &str, params: &Path, out_dir: &Path, opts: DiagnoseArgs, g: &Global) -> CliResult {
    let timeline = load_timeline(input, params)?;
    let records = diagnostics(&timeline, opts)?;
    create_dir(out_dir)?;
    let mut manifest =
        RunManifest::start("report", &ReportConfig { snapshots: input, params: *timeline.params(), opts });

    let mut buf = Vec::new();
    write_diagnostics_csv(&mut buf, &records).map_err(runtime)?;
    write_file(&out_dir.join("diagnostics.csv"), &buf)?;
    manifest.outputs.push("diagnostics.csv".into());

    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let labels: Vec<_> = records.iter().map(|r| r.regime_label).collect();
    let indicator: Vec<_> = records.iter().map(|r| r.singularity_indicator).collect();
    let chart = svg::regime_strip(&times, &labels, &indicator, g.timestamp().as_deref());
    write_file(&out_dir.join("regime.svg"), chart)?;
    manifest.outputs.push("regime.svg".into());

    manifest.finish(out_dir).map_err(runtime)?;
    g.progress(format_args!("report for {} snapshots in {}", records.len(), out_dir.display()));
    Ok(())
}

pub fn sweep(config_path: &Path, out_dir: &Path, g: &Global) -> CliResult {
    let text = read_text(config_path)?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)
        .with_context(|| format!("malformed sweep config {}", config_path.display()))
        .map_err(user)?;
    adjust_initial_condition(&mut cfg.template.initial_condition, config_path, g.seed);
    cfg.validate().map_err(user)?;
    create_dir(out_dir)?;
    let mut manifest = RunManifest::start("sweep", &cfg);

    g.progress(format_args!("running {} cases on {} threads", cfg.re_values.len(), rayon::current_num_threads()));
    let rows = reynolds_sweep(&cfg).map_err(user)?;
    for r in &rows {
        if let Some(msg) = &r.failure {
            eprintln!("warning: Re = {}: {msg}", r.re);
        } else if !r.hit {
            eprintln!("warning: Re = {}: threshold not reached before t_end", r.re);
        }
    }

    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).map_err(runtime)?;
    write_file(&out_dir.join("sweep.csv"), &buf)?;
    manifest.outputs.push("sweep.csv".into());

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.tau_trans.map(|tau| (r.re, tau)))
        .collect();
    let fit = if points.len() < 2 {
        eprintln!("warning: {} transition time(s) detected; fit skipped", points.len());
        None
    } else {
        match powerlaw_fit(&points) {
            Ok(f) => {
                if f.is_underdetermined() {
                    eprintln!("warning: fit uses only {} points", f.n_points);
                }
                Some(f)
            }
            Err(e) => {
                eprintln!("warning: fit skipped: {e}");
                None
            }
        }
    };
    if let Some(f) = &fit {
        write_file(&out_dir.join("fit.json"), serde_json::to_string_pretty(f).expect("serialises") + "\n")?;
        manifest.outputs.push("fit.json".into());
        g.progress(format_args!("tau_trans ~ {:.4} Re^{:.4} (R^2 = {:.5})", f.prefactor_k1, f.exponent, f.r_squared));
    }
    let plot = svg::loglog_scatter(&points, fit.as_ref(), "Re", "tau_trans", g.timestamp().as_deref());
    write_file(&out_dir.join("sweep.svg"), plot)?;
    manifest.outputs.push("sweep.svg".into());

    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    if failed == rows.len() {
        let msg = format!("all {failed} runs failed");
        manifest.failure = Some(Failure { message: msg.clone(), time: None });
        manifest.finish(out_dir).map_err(runtime)?;
        return Err(runtime(anyhow!(msg)));
    }
    manifest.finish(out_dir).map_err(runtime)
}

pub fn fit(args: &FitArgs, g: &Global) -> CliResult {
    let points = match &args.csv {
        Some(path) => {
            let file = fs::File::open(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(user)?;
            read_fit_points(file).map_err(user)?
        }
        None => {
            if args.points < 2 || !(args.re_min > 0.0 && args.re_max > args.re_min) {
                return Err(user(anyhow!("synthetic design needs >= 2 points and 0 < re_min < re_max")));
            }
            let re = log_spaced(args.re_min, args.re_max, args.points);
            synth_sk_dataset(args.k1, args.noise, &re, g.seed.unwrap_or(DEFAULT_SYNTH_SEED)).map_err(user)?
        }
    };
    let result: FitResult = powerlaw_fit(&points).map_err(|e| match e {
        ScalingError::InsufficientData { .. } => user(anyhow!("{e}: need at least 2 valid rows")),
        e => user(e),
    })?;
    if result.is_underdetermined() {
        eprintln!("warning: fit uses only {} points", result.n_points);
    }
    println!("{}", serde_json::to_string_pretty(&result).expect("serialises"));
    Ok(())
}
