use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use relaycache::baselines::{self, Baseline};
use relaycache::dynamic::{groups_for_size, solve_dynamic};
use relaycache::harness::{run_experiment, ExperimentResult, ExperimentSpec, Scheme, Sweep};
use relaycache::rlnc::{verify_end_to_end, DEFAULT_PACKETS_PER_MESSAGE};
use relaycache::routing::{compute_loads, solve_delivery_time, solve_maxlink, RoutingAllocation};
use relaycache::{seed, Error, PlacementConfig, Result, Topology};

/// Coded-caching delivery planner for server/relay/user networks.
///
/// Set RAYON_NUM_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(name = "relaycache", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random topology (or a combination network) and write it as JSON.
    GenTopology {
        #[command(flatten)]
        net: NetworkArgs,
        /// Build the combination network on H relays with degree L instead.
        #[arg(long)]
        combination: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the routing LP for one instance.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = Objective::Maxlink)]
        objective: Objective,
        /// Write shares and loads as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grouped sequential approximation; give either G or g.
    Dynamic {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Number of groups.
        #[arg(long = "G", conflicts_with = "group_size")]
        groups: Option<usize>,
        /// Maximum messages per group.
        #[arg(long = "g")]
        group_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo comparison of the schemes on random topologies.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Dynamic group size (default: one group).
        #[arg(long = "g")]
        group_size: Option<usize>,
    },
    /// Dynamic objective as a function of the group size g.
    SweepG {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long = "g-values", value_delimiter = ',', default_value = "1,2,3,5,10")]
        g_values: Vec<usize>,
    },
    /// Delivery time as a function of the edge capacity.
    SweepCapacity {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long = "ce-values", value_delimiter = ',', default_value = "0.25,0.5,1,2,4,8")]
        ce_values: Vec<f64>,
        #[arg(long = "g")]
        group_size: Option<usize>,
    },
    /// Encode, route and decode real bytes for one instance.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Lp)]
        scheme: SchemeArg,
        /// Packets per multicast message.
        #[arg(long = "P", default_value_t = DEFAULT_PACKETS_PER_MESSAGE)]
        packets: usize,
        #[arg(long = "file-bytes", default_value_t = 1024)]
        file_bytes: usize,
        #[arg(long = "G", default_value_t = 1)]
        groups: usize,
    },
}

#[derive(Args, Clone)]
struct NetworkArgs {
    #[arg(long = "H", default_value_t = 5)]
    relays: usize,
    #[arg(long = "K", default_value_t = 5)]
    users: usize,
    #[arg(long = "L", default_value_t = 2)]
    degree: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "cf", default_value_t = 1.0)]
    fronthaul_capacity: f64,
    #[arg(long = "ce", default_value_t = 1.0)]
    edge_capacity: f64,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long = "t", default_value_t = 2)]
    replication: usize,
    /// Library size (default K).
    #[arg(long = "N")]
    files: Option<usize>,
    /// File size in bits.
    #[arg(long = "F", default_value_t = 1)]
    file_bits: u64,
    /// Read the topology from JSON instead of drawing it.
    #[arg(long)]
    topology: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    net: NetworkArgs,
    #[arg(long = "t", default_value_t = 2)]
    replication: usize,
    #[arg(long = "N")]
    files: Option<usize>,
    #[arg(long = "F", default_value_t = 1)]
    file_bits: u64,
    #[arg(long, default_value_t = relaycache::harness::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "lp,dynamic,mds,mgl")]
    schemes: Vec<SchemeArg>,
    /// Write zero wall-clock times so the CSV is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Maxlink,
    DeliveryTime,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Lp,
    Dynamic,
    Mds,
    Mgl,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Lp => Scheme::Lp,
            SchemeArg::Dynamic => Scheme::Dynamic,
            SchemeArg::Mds => Scheme::Mds,
            SchemeArg::Mgl => Scheme::Mgl,
        }
    }
}

impl NetworkArgs {
    fn topology(&self) -> Result<Topology> {
        Topology::random_uniform(self.relays, self.users, self.degree, self.seed)?
            .with_capacities(self.fronthaul_capacity, self.edge_capacity)
    }
}

impl InstanceArgs {
    fn load(&self) -> Result<(Topology, PlacementConfig)> {
        let topology = match &self.topology {
            Some(path) => Topology::load(path)?,
            None => self.net.topology()?,
        };
        let users = topology.num_users();
        let placement =
            PlacementConfig::with_replication(self.files.unwrap_or(users), users, self.replication, self.file_bits)?;
        Ok((topology, placement))
    }
}

impl ExperimentArgs {
    fn spec(&self, sweep: Sweep, group_size: Option<usize>) -> ExperimentSpec {
        let n = &self.net;
        let mut spec = ExperimentSpec::new(n.users, n.relays, n.degree, self.replication);
        spec.num_files = self.files.unwrap_or(n.users);
        spec.schemes = self.schemes.iter().map(|&s| s.into()).collect();
        spec.schemes.dedup();
        spec.sweep = sweep;
        spec.group_size = group_size;
        spec.trials = self.trials;
        spec.master_seed = n.seed;
        spec.fronthaul_capacity = n.fronthaul_capacity;
        spec.edge_capacity = n.edge_capacity;
        spec.file_size_bits = self.file_bits;
        spec.record_timing = !self.no_timing;
        spec
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    let io_err = |source| Error::Io {
        path: path.clone(),
        source,
    };
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err)
}

fn allocation_json(topology: &Topology, placement: &PlacementConfig, alloc: &RoutingAllocation) -> serde_json::Value {
    let report = compute_loads(topology, alloc, placement);
    let groups: Vec<_> = alloc
        .groups()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            json!({
                "users": g.users().iter().map(|k| k + 1).collect::<Vec<_>>(),
                "shares": alloc.group_shares(i),
            })
        })
        .collect();
    json!({
        "relay_loads": report.relay_loads,
        "max_relay_load": report.max_relay_load(),
        "max_relay_load_file_units": report.max_relay_load_file_units(),
        "max_edge_load": report.max_edge_load(),
        "fronthaul_time": report.fronthaul_time,
        "edge_time": report.edge_time,
        "delivery_time": report.total_time,
        "groups": groups,
    })
}

fn print_loads(topology: &Topology, placement: &PlacementConfig, alloc: &RoutingAllocation) {
    let report = compute_loads(topology, alloc, placement);
    for (h, r) in report.relay_loads.iter().enumerate() {
        println!("relay {:>3}  load {:.6}", h + 1, r);
    }
    println!(
        "max relay load {:.6} messages ({:.6} files), delivery time {:.6}",
        report.max_relay_load(),
        report.max_relay_load_file_units(),
        report.total_time
    );
}

fn finish_experiment(result: &ExperimentResult, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            result.write_csv(&mut w)?;
            w.flush().map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
        }
        None => result.write_csv(io::stdout().lock())?,
    }
    for a in &result.aggregates {
        eprintln!(
            "{:<8} value {:<6} mean {:.6} files (se {:.6}, n={})",
            a.scheme.name(),
            a.sweep_value,
            a.mean_file_units,
            a.stderr_file_units,
            a.trials
        );
    }
    if !result.skipped_trials.is_empty() {
        eprintln!("skipped {} trial(s)", result.skipped_trials.len());
        for (trial, why) in &result.skipped_trials {
            eprintln!("  trial {trial}: {why}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenTopology { net, combination, out } => {
            let topology = if combination {
                Topology::combination(net.relays, net.degree)?
                    .with_capacities(net.fronthaul_capacity, net.edge_capacity)?
            } else {
                net.topology()?
            };
            topology.save(&out)?;
            println!(
                "wrote {} relays, {} users to {}",
                topology.num_relays(),
                topology.num_users(),
                out.display()
            );
        }
        Command::Solve {
            instance,
            objective,
            out,
        } => {
            let (topology, placement) = instance.load()?;
            let groups = placement.multicast_groups();
            let (value, alloc) = match objective {
                Objective::Maxlink => solve_maxlink(&topology, &groups)?,
                Objective::DeliveryTime => solve_delivery_time(&topology, &groups, &placement)?,
            };
            println!("optimum {value:.9}");
            print_loads(&topology, &placement, &alloc);
            if let Some(path) = out {
                let mut doc = allocation_json(&topology, &placement, &alloc);
                doc["optimum"] = json!(value);
                write_json(&path, &doc)?;
            }
        }
        Command::Dynamic {
            instance,
            groups,
            group_size,
            out,
        } => {
            let (topology, placement) = instance.load()?;
            let all = placement.multicast_groups();
            let big_g = match (groups, group_size) {
                (Some(g), _) => g,
                (None, Some(g)) => groups_for_size(all.len(), g.max(1)),
                (None, None) => 1,
            };
            let shuffle = seed::derive(instance.net.seed, 1);
            let sol = solve_dynamic(&topology, &all, big_g, shuffle)?;
            println!(
                "G={} g={} objective {:.9}",
                sol.steps.len(),
                sol.max_group_size,
                sol.objective
            );
            print_loads(&topology, &placement, &sol.allocation);
            if let Some(path) = out {
                let mut doc = allocation_json(&topology, &placement, &sol.allocation);
                doc["objective"] = json!(sol.objective);
                doc["num_groups"] = json!(sol.steps.len());
                doc["max_group_size"] = json!(sol.max_group_size);
                write_json(&path, &doc)?;
            }
        }
        Command::Compare { exp, group_size } => {
            let result = run_experiment(&exp.spec(Sweep::None, group_size))?;
            finish_experiment(&result, &exp.out)?;
        }
        Command::SweepG { exp, g_values } => {
            let result = run_experiment(&exp.spec(Sweep::GroupSize(g_values), None))?;
            finish_experiment(&result, &exp.out)?;
        }
        Command::SweepCapacity {
            exp,
            ce_values,
            group_size,
        } => {
            let result = run_experiment(&exp.spec(Sweep::EdgeCapacity(ce_values), group_size))?;
            finish_experiment(&result, &exp.out)?;
        }
        Command::Verify {
            instance,
            scheme,
            packets,
            file_bytes,
            groups,
        } => {
            let (topology, placement) = instance.load()?;
            let all = placement.multicast_groups();
            let degree = instance.net.degree;
            let alloc = match scheme {
                SchemeArg::Lp => solve_maxlink(&topology, &all)?.1,
                SchemeArg::Dynamic => {
                    solve_dynamic(&topology, &all, groups, seed::derive(instance.net.seed, 1))?.allocation
                }
                SchemeArg::Mds => baselines::allocation(Baseline::Mds, &topology, &all, degree)?,
                SchemeArg::Mgl => baselines::allocation(Baseline::Mgl, &topology, &all, degree)?,
            };
            let report = verify_end_to_end(
                &topology,
                &placement,
                &placement.worst_case_demands(),
                &alloc,
                packets,
                file_bytes,
                instance.net.seed,
            )?;
            for u in &report.users {
                println!(
                    "user {:>3} file {:>3} decoded {} match {}",
                    u.user + 1,
                    u.demand + 1,
                    u.decoded,
                    u.bytes_match
                );
            }
            println!(
                "packets sent {} (fractional {:.3}), resample events {}",
                report.packets_sent, report.fractional_packets, report.resample_events
            );
            println!("all users decoded: {}", report.all_decoded());
            if !report.all_decoded() {
                return Err(Error::InvalidInput("decoding failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
