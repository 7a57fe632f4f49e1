use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavecluster::oracle::DEFAULT_DENSE_LIMIT;
use wavecluster::wave::{WaveConfig, DEFAULT_C2, DEFAULT_ETA};
use wavecluster_cli::{execute, lambda2_of, load_graph, CliResult, Command, GraphSource, RunManifest};

const GENERATORS: &str = "Generator specs for --generate:
  line:N:POS:W                   path; edge POS-(POS+1), 0-based, gets weight W
  ring:N                         cycle
  planted:N1:N2:PIN:POUT[:SEED]  two-block planted partition
  blocks:B:SIZE:PIN:POUT[:SEED]  B equal blocks
  er:N:P[:SEED]                  connected Erdos-Renyi graph
  karate                         Zachary's karate club

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 round budget exceeded.";

#[derive(Parser)]
#[command(name = "wavecluster", version, about = "Graph clustering with the discretized wave equation", after_help = GENERATORS)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Tab-separated edge list `i<TAB>j[<TAB>w]`
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    file: Option<PathBuf>,
    /// Generator spec, e.g. `line:200:99:0.1`
    #[arg(long)]
    generate: Option<String>,
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        match (&self.file, &self.generate) {
            (Some(f), _) => GraphSource::File(f.display().to_string()),
            (None, Some(g)) => GraphSource::Generate(g.clone()),
            (None, None) => unreachable!("clap requires one of --file/--generate"),
        }
    }
}

#[derive(Args, Clone)]
struct WaveArgs {
    /// Squared wave speed, in (0, 2)
    #[arg(long, default_value_t = DEFAULT_C2)]
    c2: f64,
    /// Cycles of the lowest mode to observe
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Fixed number of rounds, rounded up to a power of two
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl WaveArgs {
    fn config(&self) -> WaveConfig {
        WaveConfig {
            c2: self.c2,
            eta: self.eta,
            seed: self.seed,
            t_max: self.tmax,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Cluster a graph and compare with the dense spectral oracle
    Cluster {
        #[command(flatten)]
        graph: GraphArgs,
        /// Number of eigenvectors used; up to 2^k clusters
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
        /// Also write every node's trajectory
        #[arg(long)]
        trajectory: bool,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Dump one node's spectrum
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        node: usize,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Measure wave and heat rounds over a family of graphs
    Convergence {
        /// `ring` or `path`
        family: String,
        /// Comma-separated sizes
        #[arg(value_delimiter = ',')]
        sizes: Vec<usize>,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Closed-form round predictions
    Predict {
        #[arg(long, required_unless_present_any = ["file", "generate"])]
        lambda2: Option<f64>,
        /// Node count; taken from the graph when one is given
        #[arg(long, required_unless_present_any = ["file", "generate"])]
        n: Option<usize>,
        #[arg(long, conflicts_with = "generate")]
        file: Option<PathBuf>,
        #[arg(long)]
        generate: Option<String>,
        #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Wave method against gossip-based orthogonal iteration
    Compare {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Orthogonal-iteration rounds
        #[arg(long, default_value_t = 300)]
        rounds: usize,
        #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
        dense_limit: usize,
        #[command(flatten)]
        wave: WaveArgs,
    },
    /// Re-run a manifest
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "replay")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let (manifest, out_dir) = match cli.command {
        Cmd::Cluster {
            graph,
            k,
            dense_limit,
            trajectory,
            wave,
        } => (
            RunManifest::new(
                Command::Cluster {
                    graph: graph.source(),
                    k,
                    dense_limit,
                    trajectory,
                },
                wave.config(),
            ),
            wave.out_dir,
        ),
        Cmd::Spectrum { graph, node, wave } => (
            RunManifest::new(
                Command::Spectrum {
                    graph: graph.source(),
                    node,
                },
                wave.config(),
            ),
            wave.out_dir,
        ),
        Cmd::Convergence { family, sizes, wave } => (
            RunManifest::new(Command::Convergence { family, sizes }, wave.config()),
            wave.out_dir,
        ),
        Cmd::Predict {
            lambda2,
            n,
            file,
            generate,
            dense_limit,
            wave,
        } => {
            let (lambda2, n) = match (file, generate) {
                (None, None) => (lambda2.expect("required"), n.expect("required")),
                (file, generate) => {
                    let source = match file {
                        Some(f) => GraphSource::File(f.display().to_string()),
                        None => GraphSource::Generate(generate.expect("one is set")),
                    };
                    let input = load_graph(&source)?;
                    let l2 = lambda2_of(&input.graph, dense_limit)?;
                    (lambda2.unwrap_or(l2), input.graph.node_count())
                }
            };
            (RunManifest::new(Command::Predict { lambda2, n }, wave.config()), wave.out_dir)
        }
        Cmd::Compare {
            graph,
            k,
            rounds,
            dense_limit,
            wave,
        } => (
            RunManifest::new(
                Command::Compare {
                    graph: graph.source(),
                    k,
                    rounds,
                    dense_limit,
                },
                wave.config(),
            ),
            wave.out_dir,
        ),
        Cmd::Replay { manifest, out_dir } => (RunManifest::load(&manifest)?, out_dir),
    };
    for path in execute(&manifest, &out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
