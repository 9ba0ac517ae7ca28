//! Command-line front end. Exit codes: 0 ok, 1 runtime failure, 2 usage.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use transcap_core::contention::{line_network, random_network, LinkSet};
use transcap_core::minplus::{centralized_impulse, ImpulseResponse};
use transcap_core::mmtp::csma_model;
use transcap_core::schedule::Schedule;

use crate::experiment::{
    parse_seeds, BoundsParams, CapacityParams, Command, FigureId, FigureParams, MacName, Manifest, NetworkSpec,
    RunError, RunResult, SimulateParams, ThresholdParams,
};
use crate::format::{
    impulse_table, write_matrix, ArrivalDoc, MacDoc, PolicyDoc, RecordingDoc, ScheduleDoc, SimConfigDoc, Table,
    TopologyDoc,
};

#[derive(Debug, Parser)]
#[command(name = "transcap", version, about = "Transient capacity bounds and multi-hop wireless simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Lower and upper throughput bounds over a log-spaced time grid.
    Bounds(BoundsArgs),
    /// Simulate a network over several seeds and report 1 − f(n,T) per decade.
    Simulate(SimulateArgs),
    /// Time after which multi-hop routing beats a direct link.
    Threshold(ThresholdArgs),
    /// Largest arrival rate keeping the total backlog under a cap.
    Capacity(CapacityArgs),
    /// Regenerate the CSV data behind a figure.
    Figure(FigureArgs),
    /// Re-run the command stored in a manifest.
    Rerun(RerunArgs),
    /// Write a generator matrix, impulse response or topology.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// JSON file whose keys override the corresponding flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for the CSV files and manifest.json; stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("'{s}' is not a nonnegative integer"))
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad list entry '{x}'")))
        .collect()
}

// Aliases keep clap from reading a parsed list as a repeated flag.
type SeedList = Vec<u64>;
type CountList = Vec<usize>;
type RateList = Vec<f64>;

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub mac: MacName,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    /// Contention range of the line [default: hops].
    #[arg(long)]
    pub cr: Option<usize>,
    /// Aloha transmit probability [default: 1/hops].
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Link rate in packets per slot.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub tmax: u64,
    #[arg(long, default_value_t = 10)]
    pub per_decade: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NetworkKind {
    Line,
    Random,
    File,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long, value_enum, default_value_t = NetworkKind::Line)]
    pub network: NetworkKind,
    /// Number of nodes.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Contention range of a line network.
    #[arg(long, default_value_t = 3)]
    pub cr: usize,
    /// Seed for the random topology.
    #[arg(long, default_value_t = 0)]
    pub topo_seed: u64,
    /// Topology JSON for `--network file`.
    #[arg(long)]
    pub topology: Option<PathBuf>,
}

impl NetworkArgs {
    fn spec(&self) -> RunResult<NetworkSpec> {
        Ok(match self.network {
            NetworkKind::Line => NetworkSpec::Line {
                n: self.n,
                contention_range: self.cr,
            },
            NetworkKind::Random => NetworkSpec::Random {
                n: self.n,
                seed: self.topo_seed,
            },
            NetworkKind::File => {
                let path = self
                    .topology
                    .as_ref()
                    .ok_or_else(|| RunError::Usage("--network file needs --topology <json>".into()))?;
                NetworkSpec::Topology {
                    topology: read_json(path)?,
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimMac {
    Aloha,
    Csma,
    Centralized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArrivalKind {
    Deterministic,
    Bernoulli,
    Saturated,
}

#[derive(Debug, Args)]
pub struct MacArgs {
    #[arg(long, value_enum)]
    pub mac: Option<SimMac>,
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
}

impl MacArgs {
    fn doc(&self, net: &NetworkSpec) -> RunResult<MacDoc> {
        Ok(match self.mac {
            None => return Err(RunError::Usage("--mac is required".into())),
            Some(SimMac::Aloha) => MacDoc::Aloha { p: self.p },
            Some(SimMac::Csma) => MacDoc::Csma { nu: self.nu, mu: self.mu },
            Some(SimMac::Centralized) => MacDoc::Centralized {
                schedule: ScheduleDoc::from_schedule(&default_schedule(net)?),
            },
        })
    }
}

/// The five-node line's schedule, or one link per slot in turn.
fn default_schedule(net: &NetworkSpec) -> RunResult<Schedule> {
    if let NetworkSpec::Line { n: 5, contention_range: 3 } = net {
        return Ok(Schedule::five_node_line());
    }
    let links = net.build()?.0.links().len();
    Ok(Schedule::periodic((0..links).map(LinkSet::singleton).collect())?)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub mac: MacArgs,
    #[arg(long, value_enum, default_value_t = ArrivalKind::Deterministic)]
    pub arrivals: ArrivalKind,
    /// Arrival rate per source.
    #[arg(long, default_value_t = 0.08)]
    pub lambda: f64,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub horizon: u64,
    /// `1,2,3` or `0..10`.
    #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
    pub seeds: SeedList,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = PolicyDoc::Hold)]
    pub policy: PolicyDoc,
    #[arg(long, value_enum, default_value_t = RecordingDoc::Summary)]
    pub recording: RecordingDoc,
    /// Also write the per-node trace of the first seed.
    #[arg(long)]
    pub trace: bool,
    /// Print the per-seed rows instead of the summary.
    #[arg(long)]
    pub per_seed: bool,
    /// Simulation config JSON (mac, arrivals, horizon, seed, rate,
    /// empty_policy, recording); replaces the corresponding flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub mac: MacName,
    #[arg(long, default_value = "2,3,4", value_parser = parse_list::<usize>)]
    pub ks: CountList,
    #[arg(long, default_value = "0.01,0.02,0.03,0.05,0.1,0.15,0.2,0.3,0.4,0.5", value_parser = parse_list::<f64>)]
    pub r_sh: RateList,
    #[arg(long, default_value_t = 1.0)]
    pub r_mh: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Aloha transmit probability [default: 1/k].
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[arg(long, default_value = "1e9", value_parser = parse_count)]
    pub cap: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub mac: MacArgs,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub horizon: u64,
    /// Total backlog that marks a rate infeasible [default: horizon/100].
    #[arg(long, value_parser = parse_count)]
    pub backlog_cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 12)]
    pub iterations: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    #[arg(long, value_parser = parse_count)]
    pub tmax: Option<u64>,
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Option<SeedList>,
    #[arg(long, value_parser = parse_list::<usize>)]
    pub nodes: Option<CountList>,
    #[arg(long)]
    pub aloha_lambda: Option<f64>,
    #[arg(long)]
    pub csma_lambda: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: the figure id].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(subcommand)]
    pub what: ExportKind,
    /// Output file; stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExportKind {
    /// CSMA generator of a line network, dense row-major CSV.
    Generator {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        cr: usize,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
    },
    /// Centralized impulse response on the five-node line.
    Impulse {
        /// Link index; omit for the end-to-end composition.
        #[arg(long)]
        link: Option<usize>,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
    /// Random topology as JSON.
    Topology {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> RunResult<T> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))
}

/// Applies the keys of a JSON config object over `params`.
fn with_config<T: Serialize + DeserializeOwned>(params: T, config: Option<&Path>) -> RunResult<T> {
    let Some(path) = config else {
        return Ok(params);
    };
    let overrides: Value = read_json(path)?;
    let Value::Object(overrides) = overrides else {
        return Err(RunError::Usage(format!("{}: config must be a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(params).expect("parameters serialize");
    let Value::Object(fields) = &mut merged else {
        unreachable!("parameter structs serialize to objects")
    };
    for (k, v) in overrides {
        fields.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))
}

fn resolve(sub: Sub) -> RunResult<Resolved> {
    Ok(match sub {
        Sub::Bounds(a) => {
            let mut p = BoundsParams::new(a.mac, a.hops);
            p.contention_range = a.cr.unwrap_or(p.contention_range);
            p.p = a.p.unwrap_or(p.p);
            p.nu = a.nu;
            p.mu = a.mu;
            p.eps = a.eps;
            p.c = a.c;
            p.tmax = a.tmax;
            p.per_decade = a.per_decade;
            let p = with_config(p, a.output.config.as_deref())?;
            Resolved::run(Command::Bounds(p), a.output.out, 0)
        }
        Sub::Simulate(a) => {
            let network = a.network.spec()?;
            let config = match &a.config {
                Some(path) => read_json::<SimConfigDoc>(path)?,
                None => {
                    let arrivals = match a.arrivals {
                        ArrivalKind::Deterministic => ArrivalDoc::Deterministic { rate: a.lambda },
                        ArrivalKind::Bernoulli => ArrivalDoc::Bernoulli { rate: a.lambda },
                        ArrivalKind::Saturated => ArrivalDoc::Saturated,
                    };
                    SimConfigDoc {
                        mac: a.mac.doc(&network)?,
                        arrivals,
                        horizon: a.horizon,
                        seed: a.seeds[0],
                        rate: a.c,
                        empty_policy: a.policy,
                        recording: a.recording,
                    }
                }
            };
            let p = SimulateParams {
                network,
                config,
                seeds: a.seeds,
                trace: a.trace,
            };
            Resolved::run(Command::Simulate(p), a.out, usize::from(a.per_seed))
        }
        Sub::Threshold(a) => {
            let mut p = ThresholdParams::new(a.mac);
            p.ks = a.ks;
            p.r_sh = a.r_sh;
            p.r_mh = a.r_mh;
            p.eps = a.eps;
            p.p = a.p;
            p.nu = a.nu;
            p.mu = a.mu;
            p.cap = a.cap;
            let p = with_config(p, a.output.config.as_deref())?;
            Resolved::run(Command::Threshold(p), a.output.out, 0)
        }
        Sub::Capacity(a) => {
            let network = a.network.spec()?;
            let p = CapacityParams {
                mac: a.mac.doc(&network)?,
                network,
                horizon: a.horizon,
                backlog_cap: a.backlog_cap.unwrap_or((a.horizon / 100).max(1)),
                seed: a.seed,
                rate: a.c,
                iterations: a.iterations,
            };
            let p = with_config(p, a.output.config.as_deref())?;
            Resolved::run(Command::Capacity(p), a.output.out, 0)
        }
        Sub::Figure(a) => {
            let mut p = FigureParams::defaults(a.id);
            p.tmax = a.tmax.unwrap_or(p.tmax);
            p.seeds = a.seeds.unwrap_or(p.seeds);
            p.nodes = a.nodes.unwrap_or(p.nodes);
            p.aloha_lambda = a.aloha_lambda;
            p.csma_lambda = a.csma_lambda;
            let p = with_config(p, a.config.as_deref())?;
            let out = a.out.unwrap_or_else(|| {
                PathBuf::from(serde_json::to_value(a.id).expect("id serializes").as_str().expect("id is a string"))
            });
            Resolved::run(Command::Figure(p), Some(out), 0)
        }
        Sub::Rerun(a) => {
            let m: Manifest = read_json(&a.manifest)?;
            Resolved::run(m.command, Some(a.out), 0)
        }
        Sub::Export(a) => Resolved::Export(export(a.what)?, a.out),
    })
}

enum Resolved {
    Run {
        command: Command,
        out: Option<PathBuf>,
        /// Table printed when there is no output directory.
        stdout_table: usize,
    },
    Export(Vec<u8>, Option<PathBuf>),
}

impl Resolved {
    fn run(command: Command, out: Option<PathBuf>, stdout_table: usize) -> Self {
        Resolved::Run {
            command,
            out,
            stdout_table,
        }
    }
}

fn export(what: ExportKind) -> RunResult<Vec<u8>> {
    let mut buf = Vec::new();
    let io_err = |e: csv::Error| RunError::Runtime(e.to_string());
    match what {
        ExportKind::Generator { n, cr, nu, mu } => {
            let (_, g) = line_network(n, cr)?;
            let m = csma_model(&g, nu, mu, 1.0)?;
            write_matrix(m.generator().expect("CSMA models carry a generator"), &mut buf).map_err(io_err)?;
        }
        ExportKind::Impulse { link, horizon } => {
            let s = Schedule::five_node_line();
            let response = match link {
                Some(l) => centralized_impulse(&s, l, 1.0, horizon)?,
                None => {
                    let hops = (0..4)
                        .map(|l| centralized_impulse(&s, l, 1.0, horizon))
                        .collect::<Result<Vec<_>, _>>()?;
                    ImpulseResponse::compose_all(&hops)?
                }
            };
            impulse_table(&response).write(&mut buf).map_err(io_err)?;
        }
        ExportKind::Topology { n, seed } => {
            let doc = TopologyDoc::from_topology(&random_network(n, seed)?.topology)?;
            serde_json::to_writer_pretty(&mut buf, &doc).expect("topology serializes");
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

fn io(path: &Path, e: io::Error) -> RunError {
    RunError::Runtime(format!("{}: {e}", path.display()))
}

/// Writes every table and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, command: Command, tables: &[(String, Table)]) -> RunResult<()> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, table) in tables {
        let path = dir.join(name);
        fs::write(&path, table.to_csv()).map_err(|e| io(&path, e))?;
    }
    let manifest = Manifest::new(command, tables.iter().map(|(n, _)| n.clone()).collect());
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = dir.join("manifest.json");
    fs::write(&path, text).map_err(|e| io(&path, e))
}

fn execute(resolved: Resolved) -> RunResult<()> {
    match resolved {
        Resolved::Run {
            command,
            out,
            stdout_table,
        } => {
            let tables = command.execute()?;
            match out {
                Some(dir) => write_outputs(&dir, command, &tables),
                None => {
                    let (_, t) = &tables[stdout_table.min(tables.len() - 1)];
                    io::stdout()
                        .write_all(t.to_csv().as_bytes())
                        .map_err(|e| RunError::Runtime(e.to_string()))
                }
            }
        }
        Resolved::Export(bytes, Some(path)) => fs::write(&path, bytes).map_err(|e| io(&path, e)),
        Resolved::Export(bytes, None) => io::stdout()
            .write_all(&bytes)
            .map_err(|e| RunError::Runtime(e.to_string())),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match resolve(cli.command).and_then(execute) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
