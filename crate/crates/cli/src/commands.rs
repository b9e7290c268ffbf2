use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sccp_core::ensemble::{
    ensemble_stats, extinction_probability, noise_scaling_fit, write_extinction_csv, EnsembleError,
    EnsembleStats,
};
use sccp_core::rts::{build_rts, dump_rts, extend_program, to_dot};
use sccp_core::sim::{
    stream_columns, write_events_csv, write_trajectory_csv, EventLogging, RunError, SimConfig,
    Simulator, Status,
};
use sccp_core::tdsha::{compile_program, KappaSpec};

use crate::cli::{
    Builtin, CompileArgs, Emit, EnsembleArgs, ModelArgs, ParseArgs, Report, RunArgs, SimulateArgs,
};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::model::{load, ModelSource};

pub const OUT_DIR_ENV: &str = "SCCP_OUT_DIR";

/// Checks a replayed model against the recorded hash.
pub type Expect<'a> = Option<&'a str>;

fn check_hash(m: &ModelSource, expect: Expect<'_>) -> Result<(), CliError> {
    match expect {
        Some(h) if h != m.sha256() => Err(CliError::Model(format!(
            "{} has changed since the manifest was written",
            m.name
        ))),
        _ => Ok(()),
    }
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = match out {
        Some(d) => d.clone(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("sccp-out")),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, PathBuf), CliError> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    Ok((BufWriter::new(f), path))
}

fn kappa(s: &str) -> Result<KappaSpec, CliError> {
    s.parse::<KappaSpec>()
        .map_err(|e| CliError::Usage(format!("--kappa: {e}")))
}

fn simulator(p: &sccp_core::ir::Program, k: &KappaSpec) -> Result<Simulator, CliError> {
    Simulator::with_kappa(p, k).map_err(|e| match e {
        RunError::Kappa(e) => CliError::Usage(format!("--kappa: {e}")),
        other => CliError::Model(other.to_string()),
    })
}

fn model_argv(m: &ModelArgs) -> Result<Vec<String>, CliError> {
    let mut v = Vec::new();
    match (&m.file, m.builtin) {
        (Some(f), _) => {
            let abs = std::fs::canonicalize(f).map_err(|e| CliError::io(f, e))?;
            v.push(abs.display().to_string());
        }
        (None, Some(Builtin::Prostate)) => {
            v.extend(["--builtin".into(), "prostate".into()]);
            v.extend(["--policy".into(), m.policy.clone()]);
            v.extend(["--variant".into(), m.variant.clone()]);
        }
        (None, None) => {}
    }
    for p in &m.params {
        v.extend(["--param".into(), p.clone()]);
    }
    Ok(v)
}

fn run_argv(r: &RunArgs, grid: Option<f64>) -> Vec<String> {
    let mut v = vec![
        "--kappa".into(),
        r.kappa.clone(),
        "--seed".into(),
        r.seed.to_string(),
        "--t-end".into(),
        r.t_end.to_string(),
        "--rtol".into(),
        r.rtol.to_string(),
        "--atol".into(),
        r.atol.to_string(),
    ];
    if let Some(g) = grid {
        v.extend(["--grid".into(), g.to_string()]);
    }
    v
}

fn sim_config(r: &RunArgs, grid: Option<f64>) -> Result<SimConfig, CliError> {
    let mut c = SimConfig::new(r.t_end, r.seed);
    if let Some(g) = grid {
        c = c.with_grid(g);
    }
    c.rtol = r.rtol;
    c.atol = r.atol;
    c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(c)
}

pub fn parse(a: &ParseArgs) -> Result<(), CliError> {
    let m = load(&a.model)?;
    let outcome = m.parse();
    m.report(&outcome.diagnostics);
    match outcome.program {
        Some(p) => {
            println!(
                "{}: ok, {} variables, {} definitions, {} components",
                m.name,
                p.variables.len(),
                p.definitions.len(),
                p.network.len()
            );
            Ok(())
        }
        None => Err(CliError::Model(format!(
            "{}: {} error(s)",
            m.name,
            outcome.errors().count()
        ))),
    }
}

pub fn compile(a: &CompileArgs) -> Result<(), CliError> {
    let m = load(&a.model)?;
    let spec = kappa(&a.kappa)?;
    let p = m.program()?;
    let text = match a.emit {
        Emit::Rts => dump_rts(
            &p,
            &build_rts(&p).map_err(|e| CliError::Model(e.to_string()))?,
        ),
        Emit::Dot => to_dot(
            &p,
            &build_rts(&p).map_err(|e| CliError::Model(e.to_string()))?,
        ),
        Emit::Tdsha => {
            let ext = extend_program(&p).map_err(|e| CliError::Model(e.to_string()))?;
            let pv = spec
                .resolve(&ext.components)
                .map_err(|e| CliError::Usage(format!("--kappa: {e}")))?;
            compile_program(&ext, &pv)
                .map_err(|e| CliError::Model(e.to_string()))?
                .dump()
        }
    };
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn simulate(a: &SimulateArgs, expect: Expect<'_>) -> Result<(), CliError> {
    let m = load(&a.model)?;
    check_hash(&m, expect)?;
    let spec = kappa(&a.run.kappa)?;
    let mut c = sim_config(&a.run, a.run.grid)?;
    if a.log_all_events {
        c = c.with_log(EventLogging::All);
    }
    if a.no_events {
        c = c.with_log(EventLogging::None);
    }
    let p = m.program()?;
    let sim = simulator(&p, &spec)?;
    let dir = out_dir(&a.run.out)?;
    log::info!(
        "simulating {} with the {} engine",
        m.name,
        sim.engine.name()
    );
    let traj = sim.simulate(&c);

    let cols: Vec<usize> = if a.all_columns {
        (0..traj.n_vars()).collect()
    } else {
        stream_columns(&traj)
    };
    let (mut w, path) = create(&dir, "trajectory.csv")?;
    write_trajectory_csv(&traj, &cols, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))?;
    let mut outputs = vec!["trajectory.csv".to_string()];
    if !a.no_events {
        let (mut w, path) = create(&dir, "events.csv")?;
        write_events_csv(&traj, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        outputs.push("events.csv".into());
    }

    let mut command = vec!["simulate".to_string()];
    command.extend(model_argv(&a.model)?);
    command.extend(run_argv(&a.run, a.run.grid));
    if a.all_columns {
        command.push("--all-columns".into());
    }
    if a.log_all_events {
        command.push("--log-all-events".into());
    }
    if a.no_events {
        command.push("--no-events".into());
    }
    RunManifest {
        command,
        model: &m,
        kappa: &a.run.kappa,
        seed: a.run.seed,
        engine: sim.engine.name(),
        outputs,
    }
    .write(&dir)?;

    println!(
        "{} engine: {:?}, {} stochastic and {} instantaneous jumps, {} samples -> {}",
        sim.engine.name(),
        traj.status,
        traj.stochastic_jumps,
        traj.instantaneous_jumps,
        traj.len(),
        dir.display()
    );
    if traj.clamps > 0 {
        log::warn!("{} negative rates were treated as zero", traj.clamps);
    }
    match traj.status {
        Status::Error(e) => Err(CliError::Model(format!("simulation failed: {e}"))),
        _ => Ok(()),
    }
}

fn ensemble_error(e: EnsembleError) -> CliError {
    match e {
        EnsembleError::Config(e) => CliError::Usage(e.to_string()),
        EnsembleError::NoReplicates | EnsembleError::NeedsGrid | EnsembleError::NoSuchTime(_) => {
            CliError::Usage(e.to_string())
        }
        EnsembleError::UnknownVariable(_) => CliError::Usage(e.to_string()),
        other => CliError::Model(other.to_string()),
    }
}

fn with_scaling(m: &ModelSource, n0: f64) -> ModelSource {
    let mut overrides = m.overrides.clone();
    for name in ["N0", "OmegaZ", "OmegaV"] {
        overrides.push((name.to_string(), n0));
    }
    ModelSource {
        name: m.name.clone(),
        bytes: m.bytes.clone(),
        overrides,
    }
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let (mut w, path) = create(dir, name)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))
}

pub fn ensemble(a: &EnsembleArgs, expect: Expect<'_>) -> Result<(), CliError> {
    let base = load(&a.model)?;
    check_hash(&base, expect)?;
    let spec = kappa(&a.run.kappa)?;
    let grid = a.run.grid.unwrap_or(1.0);
    let c = sim_config(&a.run, Some(grid))?;
    match a.report {
        Report::NoiseScaling if a.n0.len() < 3 => {
            return Err(CliError::Usage(
                "noise-scaling needs at least three --n0 values".into(),
            ))
        }
        Report::Stats | Report::Extinction if a.n0.len() > 1 => {
            return Err(CliError::Usage("give at most one --n0 value".into()))
        }
        _ => {}
    }
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let dir = out_dir(&a.run.out)?;

    let run_one =
        |m: &ModelSource, vars: &[&str]| -> Result<(EnsembleStats, &'static str), CliError> {
            let p = m.program()?;
            let sim = simulator(&p, &spec)?;
            log::info!("{} replicates with the {} engine", a.n, sim.engine.name());
            let stats = pool
                .install(|| ensemble_stats(&sim, &c, a.n, vars))
                .map_err(ensemble_error)?;
            Ok((stats, sim.engine.name()))
        };

    let model = match a.n0.first() {
        Some(&n0) if a.report != Report::NoiseScaling => with_scaling(&base, n0),
        _ => base,
    };
    let mut outputs = Vec::new();
    let engine;
    match a.report {
        Report::Stats => {
            let (stats, e) = run_one(&model, &[])?;
            engine = e;
            write_with(&dir, "stats.csv", |w| stats.write_csv(w))?;
            outputs.push("stats.csv".to_string());
            println!(
                "{} replicates, {} grid points -> {}",
                stats.replicates,
                stats.times.len(),
                dir.display()
            );
        }
        Report::Extinction => {
            let (stats, e) = run_one(&model, &[])?;
            engine = e;
            write_with(&dir, "extinction.csv", |w| write_extinction_csv(&stats, w))?;
            outputs.push("extinction.csv".to_string());
            for name in &stats.names {
                let x = extinction_probability(&stats, name).map_err(ensemble_error)?;
                println!(
                    "{name}: {}/{} extinct, fraction {:.4} (95% CI {:.4}..{:.4})",
                    x.extinct, x.replicates, x.fraction, x.ci_low, x.ci_high
                );
            }
        }
        Report::NoiseScaling => {
            let mut rows = Vec::new();
            let mut e = "";
            for &n0 in &a.n0 {
                let (stats, name) = run_one(&with_scaling(&model, n0), &[a.var.as_str()])?;
                e = name;
                let col = stats.column(&a.var, a.at).map_err(ensemble_error)?;
                let mean = sccp_core::ensemble::mean(&col);
                let sd = sccp_core::ensemble::sample_variance(&col).sqrt();
                rows.push((n0, mean, sd, sd / mean));
            }
            engine = e;
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.3)).collect();
            let fit = noise_scaling_fit(&pts).map_err(|e| CliError::Model(e.to_string()))?;
            write_with(&dir, "noise_scaling.csv", |w| {
                writeln!(w, "n0,time,var,mean,sd,cv")?;
                for r in &rows {
                    writeln!(w, "{},{},{},{},{},{}", r.0, a.at, a.var, r.1, r.2, r.3)?;
                }
                Ok(())
            })?;
            write_with(&dir, "noise_scaling_fit.csv", |w| {
                writeln!(w, "slope,slope_se,intercept")?;
                writeln!(w, "{},{},{}", fit.slope, fit.slope_se, fit.intercept)
            })?;
            outputs.push("noise_scaling.csv".to_string());
            outputs.push("noise_scaling_fit.csv".to_string());
            for r in &rows {
                println!(
                    "N0 = {}: mean {:.6e}, sd {:.6e}, cv {:.6e}",
                    r.0, r.1, r.2, r.3
                );
            }
            println!("slope {:.4} +/- {:.4}", fit.slope, fit.slope_se);
        }
    }

    let mut command = vec!["ensemble".to_string()];
    command.extend(model_argv(&a.model)?);
    command.extend(run_argv(&a.run, Some(grid)));
    command.extend(["--n".into(), a.n.to_string()]);
    let report = match a.report {
        Report::Stats => "stats",
        Report::Extinction => "extinction",
        Report::NoiseScaling => "noise-scaling",
    };
    command.extend(["--report".into(), report.into()]);
    if !a.n0.is_empty() {
        let list: Vec<String> = a.n0.iter().map(|x| x.to_string()).collect();
        command.extend(["--n0".into(), list.join(",")]);
    }
    command.extend([
        "--var".into(),
        a.var.clone(),
        "--at".into(),
        a.at.to_string(),
    ]);
    RunManifest {
        command,
        model: &model,
        kappa: &a.run.kappa,
        seed: a.run.seed,
        engine,
        outputs,
    }
    .write(&dir)?;
    Ok(())
}
