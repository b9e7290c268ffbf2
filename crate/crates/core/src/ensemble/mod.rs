//! Seeded replicate runs and their summaries.
//!
//! Replicate `i` of an ensemble simulates with stream `(seed, i)`.
//! Replicates run on the ambient rayon pool; results are gathered in
//! replicate order, so every statistic is independent of scheduling.

mod stats;

use std::io::{self, Write};

use rayon::prelude::*;

pub use stats::{
    compare_distributions, compensated_sum, ks_against_cdf, mean, noise_scaling_fit,
    quantile_sorted, sample_variance, two_proportion_test, variance_welch_test, welch_test,
    wilson_interval, KsResult, ProportionTest, ScalingFit, StatError, WelchResult,
};

use crate::ir::Program;
use crate::sim::{
    csv_field, ConfigError, EventLogging, RunError, SimConfig, Simulator, Status, Trajectory,
};
use crate::tdsha::KappaSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnsembleError {
    #[error("an ensemble needs at least one replicate")]
    NoReplicates,
    #[error("ensemble statistics need a fixed recording grid")]
    NeedsGrid,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("replicate {index} (seed {seed}) failed: {message}")]
    Replicate {
        index: u64,
        seed: u64,
        message: String,
    },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no grid point at time {0}")]
    NoSuchTime(f64),
}

/// Runs replicates `0..n` and maps each finished trajectory through `f`,
/// in replicate order. A replicate ending in error aborts the ensemble; the
/// lowest failing index is reported.
pub fn run_replicates<T, F>(
    sim: &Simulator,
    c: &SimConfig,
    n: u64,
    f: F,
) -> Result<Vec<T>, EnsembleError>
where
    T: Send,
    F: Fn(u64, &Trajectory) -> T + Sync,
{
    if n == 0 {
        return Err(EnsembleError::NoReplicates);
    }
    c.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let traj = sim.simulate(&c.clone().with_replicate(i));
            match &traj.status {
                Status::Error(m) => Err(EnsembleError::Replicate {
                    index: i,
                    seed: c.seed,
                    message: m.clone(),
                }),
                _ => Ok(f(i, &traj)),
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Per-variable summaries on the common recording grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub seed: u64,
    pub replicates: u64,
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// Indexed `[variable][time]`.
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    pub q05: Vec<Vec<f64>>,
    pub q50: Vec<Vec<f64>>,
    pub q95: Vec<Vec<f64>>,
    /// Replicates in which the variable reached zero before `t_end`.
    pub extinct: Vec<u64>,
    /// Samples per replicate, indexed `[replicate][variable][time]`.
    pub samples: Vec<Vec<Vec<f64>>>,
}

struct Summary {
    samples: Vec<Vec<f64>>,
    zero: Vec<bool>,
}

impl EnsembleStats {
    fn from_summaries(
        seed: u64,
        times: Vec<f64>,
        names: Vec<String>,
        summaries: Vec<Summary>,
    ) -> Self {
        let nv = names.len();
        let nt = times.len();
        let mut stats = EnsembleStats {
            seed,
            replicates: summaries.len() as u64,
            times,
            names,
            mean: vec![vec![0.0; nt]; nv],
            variance: vec![vec![0.0; nt]; nv],
            q05: vec![vec![0.0; nt]; nv],
            q50: vec![vec![0.0; nt]; nv],
            q95: vec![vec![0.0; nt]; nv],
            extinct: vec![0; nv],
            samples: Vec::new(),
        };
        let mut column = Vec::with_capacity(summaries.len());
        for v in 0..nv {
            stats.extinct[v] = summaries.iter().filter(|s| s.zero[v]).count() as u64;
            for k in 0..nt {
                column.clear();
                column.extend(summaries.iter().map(|s| s.samples[v][k]));
                stats.mean[v][k] = mean(&column);
                stats.variance[v][k] = sample_variance(&column);
                column.sort_by(f64::total_cmp);
                stats.q05[v][k] = quantile_sorted(&column, 0.05);
                stats.q50[v][k] = quantile_sorted(&column, 0.5);
                stats.q95[v][k] = quantile_sorted(&column, 0.95);
            }
        }
        stats.samples = summaries.into_iter().map(|s| s.samples).collect();
        stats
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    /// Values of one variable at one grid time across replicates.
    pub fn column(&self, var: &str, t: f64) -> Result<Vec<f64>, EnsembleError> {
        let v = self
            .var_index(var)
            .ok_or_else(|| EnsembleError::UnknownVariable(var.to_string()))?;
        let k = self.time_index(t).ok_or(EnsembleError::NoSuchTime(t))?;
        Ok(self.samples.iter().map(|s| s[v][k]).collect())
    }

    /// Standard deviation over mean of one variable at one grid time.
    pub fn coefficient_of_variation(&self, var: &str, t: f64) -> Result<f64, EnsembleError> {
        let v = self
            .var_index(var)
            .ok_or_else(|| EnsembleError::UnknownVariable(var.to_string()))?;
        let k = self.time_index(t).ok_or(EnsembleError::NoSuchTime(t))?;
        Ok(self.variance[v][k].sqrt() / self.mean[v][k])
    }

    /// Rows `time,var,mean,var,q05,q50,q95`: the second `var` column is the
    /// sample variance.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "time,var,mean,var,q05,q50,q95")?;
        for k in 0..self.times.len() {
            for v in 0..self.names.len() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    self.times[k],
                    csv_field(&self.names[v]),
                    self.mean[v][k],
                    self.variance[v][k],
                    self.q05[v][k],
                    self.q50[v][k],
                    self.q95[v][k]
                )?;
            }
        }
        Ok(())
    }
}

/// Simulates `n` replicates and summarises the named variables (all
/// stream variables when `vars` is empty). Event logging is switched off
/// for these runs; only grid samples and first-zero times are used.
pub fn ensemble_stats(
    sim: &Simulator,
    c: &SimConfig,
    n: u64,
    vars: &[&str],
) -> Result<EnsembleStats, EnsembleError> {
    let Some(times) = c.grid_times() else {
        return Err(EnsembleError::NeedsGrid);
    };
    let t = &sim.automaton;
    let idx: Vec<usize> = if vars.is_empty() {
        (0..t.variables.len())
            .filter(|&i| t.variables[i].kind == crate::ir::VarKind::Stream)
            .collect()
    } else {
        vars.iter()
            .map(|v| {
                t.var_id(v)
                    .map(|id| id.index())
                    .ok_or_else(|| EnsembleError::UnknownVariable(v.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    let names: Vec<String> = idx.iter().map(|&i| t.variables[i].name.clone()).collect();
    let nt = times.len();
    let c = &c.clone().with_log(EventLogging::None);
    let summaries = run_replicates(sim, c, n, |_, traj| Summary {
        samples: idx
            .iter()
            .map(|&v| (0..nt).map(|k| traj.data[k * traj.n_vars() + v]).collect())
            .collect(),
        zero: idx
            .iter()
            .map(|&v| traj.first_zero[v].is_some_and(|z| z < c.t_end))
            .collect(),
    })?;
    Ok(EnsembleStats::from_summaries(
        c.seed, times, names, summaries,
    ))
}

/// Compiles `p` under `kappa` and summarises `n` replicates of every
/// stream variable.
pub fn run_ensemble(
    p: &Program,
    kappa: &KappaSpec,
    c: &SimConfig,
    n: u64,
) -> Result<EnsembleStats, EnsembleError> {
    let sim = Simulator::with_kappa(p, kappa)?;
    ensemble_stats(&sim, c, n, &[])
}

/// Extinction frequency with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extinction {
    pub extinct: u64,
    pub replicates: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn extinction_probability(
    stats: &EnsembleStats,
    species: &str,
) -> Result<Extinction, EnsembleError> {
    let v = stats
        .var_index(species)
        .ok_or_else(|| EnsembleError::UnknownVariable(species.to_string()))?;
    let k = stats.extinct[v];
    let n = stats.replicates;
    let (lo, hi) = wilson_interval(k as usize, n as usize);
    Ok(Extinction {
        extinct: k,
        replicates: n,
        fraction: k as f64 / n as f64,
        ci_low: lo,
        ci_high: hi,
    })
}

/// Extinction report: header `var,extinct,replicates,fraction,ci95_low,ci95_high`.
pub fn write_extinction_csv<W: Write>(stats: &EnsembleStats, w: &mut W) -> io::Result<()> {
    writeln!(w, "var,extinct,replicates,fraction,ci95_low,ci95_high")?;
    for name in &stats.names {
        let e = extinction_probability(stats, name).expect("name comes from the stats");
        writeln!(
            w,
            "{},{},{},{},{},{}",
            csv_field(name),
            e.extinct,
            e.replicates,
            e.fraction,
            e.ci_low,
            e.ci_high
        )?;
    }
    Ok(())
}
