//! Monte Carlo experiments over random uniform-degree topologies.
//!
//! Trial `i` draws its topology from `seed::derive_path(master, [0, i])` and
//! its message shuffle from `[1, i]`, so every scheme and every sweep value
//! within a trial sees the same network (paired comparison). Trials run on
//! the rayon pool; rows are sorted afterwards, making the output independent
//! of scheduling.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, Baseline};
use crate::dynamic::{groups_for_size, max_group_size, solve_dynamic};
use crate::error::{Error, Result};
use crate::placement::PlacementConfig;
use crate::routing::{compute_loads, solve_delivery_time, solve_maxlink, RoutingAllocation};
use crate::seed;
use crate::topology::Topology;

pub const DEFAULT_TRIALS: usize = 100;

pub const CSV_HEADER: [&str; 8] = [
    "scheme",
    "sweep_name",
    "sweep_value",
    "trial",
    "seed",
    "objective_message_units",
    "objective_file_units",
    "wallclock_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lp,
    Dynamic,
    Mds,
    Mgl,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Lp, Scheme::Dynamic, Scheme::Mds, Scheme::Mgl];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lp => "lp",
            Scheme::Dynamic => "dynamic",
            Scheme::Mds => "mds",
            Scheme::Mgl => "mgl",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Scheme::Lp),
            "dynamic" => Ok(Scheme::Dynamic),
            "mds" => Ok(Scheme::Mds),
            "mgl" => Ok(Scheme::Mgl),
            other => Err(Error::InvalidExperiment(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Single evaluation; the dynamic scheme uses `ExperimentSpec::group_size`.
    None,
    /// Maximum messages per dynamic group; mapped to `G = ceil(C(K,t+1) / g)`.
    GroupSize(Vec<usize>),
    /// Edge capacity `C_E`; objectives become delivery times.
    EdgeCapacity(Vec<f64>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::None => "none",
            Sweep::GroupSize(_) => "g",
            Sweep::EdgeCapacity(_) => "edge_capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub num_users: usize,
    pub num_relays: usize,
    pub degree: usize,
    pub replication: usize,
    /// Library size; defaults to `K` (distinct demands).
    pub num_files: usize,
    pub schemes: Vec<Scheme>,
    pub sweep: Sweep,
    /// Dynamic group size when not sweeping `g`; `None` means one group.
    pub group_size: Option<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub fronthaul_capacity: f64,
    pub edge_capacity: f64,
    pub file_size_bits: u64,
    /// Write measured wall-clock times; when off the column is zero so output
    /// is byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentSpec {
    pub fn new(num_users: usize, num_relays: usize, degree: usize, replication: usize) -> Self {
        Self {
            num_users,
            num_relays,
            degree,
            replication,
            num_files: num_users,
            schemes: Scheme::ALL.to_vec(),
            sweep: Sweep::None,
            group_size: None,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            fronthaul_capacity: 1.0,
            edge_capacity: 1.0,
            file_size_bits: 1,
            record_timing: true,
        }
    }

    pub fn placement(&self) -> Result<PlacementConfig> {
        PlacementConfig::with_replication(self.num_files, self.num_users, self.replication, self.file_size_bits)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected".into());
        }
        if self.degree == 0 || self.degree > self.num_relays {
            return Err(Error::InvalidDegree {
                degree: self.degree,
                num_relays: self.num_relays,
            });
        }
        if self.replication >= self.num_users {
            return bad(format!(
                "t={} leaves no multicast messages for K={}",
                self.replication, self.num_users
            ));
        }
        crate::topology::check_capacity("fronthaul_capacity", self.fronthaul_capacity)?;
        crate::topology::check_capacity("edge_capacity", self.edge_capacity)?;
        match &self.sweep {
            Sweep::GroupSize(v) if v.is_empty() || v.contains(&0) => return bad("g values must be positive".into()),
            Sweep::EdgeCapacity(v) if v.is_empty() || v.iter().any(|c| !(c.is_finite() && *c > 0.0)) => {
                return bad("edge capacities must be positive".into())
            }
            _ => {}
        }
        if self.group_size == Some(0) {
            return bad("group size must be positive".into());
        }
        self.placement().map(|_| ())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub objective_message_units: f64,
    pub objective_file_units: f64,
    pub wallclock_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_message_units: f64,
    pub mean_file_units: f64,
    /// Standard error of the file-unit mean.
    pub stderr_file_units: f64,
    pub mean_wallclock_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    /// Trials dropped because some scheme could not be evaluated.
    pub skipped_trials: Vec<(usize, String)>,
}

impl ExperimentResult {
    pub fn mean(&self, scheme: Scheme, sweep_value: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.scheme == scheme && a.sweep_value == sweep_value)
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        write_csv(&self.rows, writer)
    }
}

pub fn write_csv<W: io::Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidInput(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Topology and shuffle seeds of trial `i`.
pub fn trial_seeds(master_seed: u64, trial: usize) -> (u64, u64) {
    (
        seed::derive_path(master_seed, &[0, trial as u64]),
        seed::derive_path(master_seed, &[1, trial as u64]),
    )
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let placement = spec.placement()?;
    let outcomes: Vec<(usize, Result<Vec<ResultRow>>)> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| (trial, run_trial(spec, &placement, trial)))
        .collect();
    let mut rows = Vec::new();
    let mut skipped_trials = Vec::new();
    for (trial, outcome) in outcomes {
        match outcome {
            Ok(r) => rows.extend(r),
            Err(e) => skipped_trials.push((trial, e.to_string())),
        }
    }
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.trial.cmp(&b.trial))
    });
    let aggregates = aggregate(&rows);
    Ok(ExperimentResult {
        rows,
        aggregates,
        skipped_trials,
    })
}

/// Means and standard errors per `(scheme, sweep value)`, summing in row order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut out: Vec<Aggregate> = Vec::new();
    for chunk in rows.chunk_by(|a, b| a.scheme == b.scheme && a.sweep_value == b.sweep_value) {
        let n = chunk.len() as f64;
        let mean = |f: fn(&ResultRow) -> f64| chunk.iter().map(f).sum::<f64>() / n;
        let mean_file = mean(|r| r.objective_file_units);
        let stderr = if chunk.len() > 1 {
            let var = chunk
                .iter()
                .map(|r| (r.objective_file_units - mean_file).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        out.push(Aggregate {
            scheme: chunk[0].scheme,
            sweep_value: chunk[0].sweep_value,
            trials: chunk.len(),
            mean_message_units: mean(|r| r.objective_message_units),
            mean_file_units: mean_file,
            stderr_file_units: stderr,
            mean_wallclock_ms: mean(|r| r.wallclock_ms),
        });
    }
    out
}

fn timed<T>(record: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    let ms = if record {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok((value, ms))
}

fn run_trial(spec: &ExperimentSpec, placement: &PlacementConfig, trial: usize) -> Result<Vec<ResultRow>> {
    let (topology_seed, shuffle_seed) = trial_seeds(spec.master_seed, trial);
    let topology = Topology::random_uniform(spec.num_relays, spec.num_users, spec.degree, topology_seed)?
        .with_capacities(spec.fronthaul_capacity, spec.edge_capacity)?;
    let groups = placement.multicast_groups();
    let messages = groups.len();
    let per_file = placement.num_subfiles() as f64;
    let mut rows = Vec::new();
    let mut push = |scheme: Scheme, sweep_value: f64, message_units: f64, file_units: f64, ms: f64| {
        rows.push(ResultRow {
            scheme,
            sweep_name: spec.sweep.name().to_string(),
            sweep_value,
            trial,
            seed: topology_seed,
            objective_message_units: message_units,
            objective_file_units: file_units,
            wallclock_ms: ms,
        });
    };
    let record = spec.record_timing;
    let has = |s: Scheme| spec.schemes.contains(&s);
    let baseline = |b: Baseline, topo: &Topology| baselines::allocation(b, topo, &groups, spec.degree);

    match &spec.sweep {
        Sweep::None | Sweep::GroupSize(_) => {
            let g_values = match &spec.sweep {
                Sweep::GroupSize(v) => v.clone(),
                _ => vec![spec.group_size.unwrap_or(messages)],
            };
            let sweep_value = |g: usize| match spec.sweep {
                Sweep::None => 0.0,
                _ => max_group_size(messages, groups_for_size(messages, g)) as f64,
            };
            let fixed: Vec<(Scheme, f64, f64)> = {
                let mut v = Vec::new();
                if has(Scheme::Lp) {
                    let ((z, _), ms) = timed(record, || solve_maxlink(&topology, &groups))?;
                    v.push((Scheme::Lp, z, ms));
                }
                for (scheme, b) in [(Scheme::Mds, Baseline::Mds), (Scheme::Mgl, Baseline::Mgl)] {
                    if has(scheme) {
                        let (alloc, ms) = timed(record, || baseline(b, &topology))?;
                        v.push((scheme, alloc.max_relay_load(), ms));
                    }
                }
                v
            };
            for &g in &g_values {
                let value = sweep_value(g);
                for &(scheme, load, ms) in &fixed {
                    push(scheme, value, load, load / per_file, ms);
                }
                if has(Scheme::Dynamic) {
                    let big_g = groups_for_size(messages, g);
                    let (sol, ms) = timed(record, || solve_dynamic(&topology, &groups, big_g, shuffle_seed))?;
                    push(Scheme::Dynamic, value, sol.objective, sol.objective / per_file, ms);
                }
            }
        }
        Sweep::EdgeCapacity(capacities) => {
            let dynamic_alloc = if has(Scheme::Dynamic) {
                let big_g = groups_for_size(messages, spec.group_size.unwrap_or(messages));
                Some(timed(record, || {
                    solve_dynamic(&topology, &groups, big_g, shuffle_seed).map(|s| s.allocation)
                })?)
            } else {
                None
            };
            let mut baseline_allocs: Vec<(Scheme, RoutingAllocation, f64)> = Vec::new();
            for (scheme, b) in [(Scheme::Mds, Baseline::Mds), (Scheme::Mgl, Baseline::Mgl)] {
                if has(scheme) {
                    let (alloc, ms) = timed(record, || baseline(b, &topology))?;
                    baseline_allocs.push((scheme, alloc, ms));
                }
            }
            for &c_e in capacities {
                let topo = topology.clone().with_capacities(spec.fronthaul_capacity, c_e)?;
                // delivery time in channel uses; message-unit column rescales by C(K,t)/F
                let to_units = |time: f64| (time * per_file / spec.file_size_bits as f64, time);
                if has(Scheme::Lp) {
                    let ((time, _), ms) = timed(record, || solve_delivery_time(&topo, &groups, placement))?;
                    let (m, f) = to_units(time);
                    push(Scheme::Lp, c_e, m, f, ms);
                }
                if let Some((alloc, ms)) = &dynamic_alloc {
                    let (m, f) = to_units(compute_loads(&topo, alloc, placement).total_time);
                    push(Scheme::Dynamic, c_e, m, f, *ms);
                }
                for (scheme, alloc, ms) in &baseline_allocs {
                    let (m, f) = to_units(compute_loads(&topo, alloc, placement).total_time);
                    push(*scheme, c_e, m, f, *ms);
                }
            }
        }
    }
    Ok(rows)
}
