//! Experiment drivers behind the `wavecluster` binary.
//!
//! Every command is described by a [`RunManifest`]. Outputs are written to
//! an output directory next to `manifest.json`, and each output embeds the
//! SHA-256 of the manifest's JSON so results can be traced to the exact
//! invocation. `replay` re-executes a manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use wavecluster::edgelist;
use wavecluster::generators;
use wavecluster::oracle::convergence::{measure_convergence, Method};
use wavecluster::oracle::dense::symmetric_eigen;
use wavecluster::oracle::eigen::dense_spectral_with_limit;
use wavecluster::oracle::gossip::{gossip_steps_for, orthogonal_iteration_distributed, GossipSteps, OrthoIterConfig};
use wavecluster::oracle::predict::predict_times;
use wavecluster::oracle::{compare_partitions, oracle_partition};
use wavecluster::spectral::{cluster, find_peak_bins, run_spectra, ClusterOutcome, Spectrum};
use wavecluster::wave::{init_run, WaveConfig};
use wavecluster::{Graph, Partition};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wavecluster::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wavecluster::ErrorKind;
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Budget => 4,
            },
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File(String),
    Generate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Cluster {
        graph: GraphSource,
        k: usize,
        dense_limit: usize,
        trajectory: bool,
    },
    Spectrum {
        graph: GraphSource,
        node: usize,
    },
    Convergence {
        family: String,
        sizes: Vec<usize>,
    },
    Predict {
        lambda2: f64,
        n: usize,
    },
    Compare {
        graph: GraphSource,
        k: usize,
        rounds: usize,
        dense_limit: usize,
    },
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    #[serde(flatten)]
    pub command: Command,
    pub wave: WaveConfig,
    pub seed: u64,
    /// Output file names, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: Command, wave: WaveConfig) -> Self {
        let outputs = match &command {
            Command::Cluster { trajectory, .. } => {
                let mut o = vec!["result.json".to_string(), "spectrum.csv".to_string()];
                if *trajectory {
                    o.push("trajectory.csv".to_string());
                }
                o
            }
            Command::Spectrum { .. } => vec!["spectrum.csv".into()],
            Command::Convergence { .. } => vec!["convergence.csv".into()],
            Command::Predict { .. } => vec!["predict.json".into()],
            Command::Compare { .. } => vec!["comparison.json".into()],
        };
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed: wave.seed,
            wave,
            outputs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// SHA-256 of the compact JSON encoding.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("manifest serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

pub struct LoadedInput {
    pub graph: Graph,
    pub node_ids: Vec<String>,
}

/// Builds a graph from a generator spec:
///
/// ```text
/// line:N:POS:W                   path, edge POS-(POS+1) (0-based) has weight W
/// ring:N                         cycle
/// planted:N1:N2:PIN:POUT[:SEED]  two-block planted partition
/// blocks:B:SIZE:PIN:POUT[:SEED]  B equal blocks
/// er:N:P[:SEED]                  connected G(N, P)
/// karate                         Zachary's karate club (ids 1..34)
/// ```
pub fn generate(spec: &str) -> CliResult<LoadedInput> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("bad generator spec {spec:?}"));
    let num = |i: usize| -> CliResult<usize> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
    let real = |i: usize| -> CliResult<f64> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
    let seed = |i: usize| -> CliResult<u64> {
        match parts.get(i) {
            None => Ok(0),
            Some(s) => s.parse().map_err(|_| bad()),
        }
    };
    let arity = |lo: usize, hi: usize| if (lo..=hi).contains(&parts.len()) { Ok(()) } else { Err(bad()) };
    let graph = match parts[0] {
        "line" => {
            arity(4, 4)?;
            generators::line_graph(num(1)?, num(2)?, real(3)?)?
        }
        "ring" => {
            arity(2, 2)?;
            generators::ring_graph(num(1)?)?
        }
        "planted" => {
            arity(5, 6)?;
            generators::planted_partition(num(1)?, num(2)?, real(3)?, real(4)?, seed(5)?)?
        }
        "blocks" => {
            arity(5, 6)?;
            let sizes = vec![num(2)?; num(1)?];
            generators::planted_blocks(&sizes, real(3)?, real(4)?, seed(5)?)?
        }
        "er" => {
            arity(3, 4)?;
            generators::random_connected(num(1)?, real(2)?, seed(3)?)?
        }
        "karate" => {
            arity(1, 1)?;
            let g = generators::karate_club();
            let ids = (1..=g.node_count()).map(|i| i.to_string()).collect();
            return Ok(LoadedInput { graph: g, node_ids: ids });
        }
        _ => return Err(bad()),
    };
    let node_ids = (0..graph.node_count()).map(|i| i.to_string()).collect();
    Ok(LoadedInput { graph, node_ids })
}

pub fn load_graph(source: &GraphSource) -> CliResult<LoadedInput> {
    match source {
        GraphSource::File(path) => {
            let loaded = edgelist::load(Path::new(path))?;
            Ok(LoadedInput {
                graph: loaded.graph,
                node_ids: loaded.node_ids,
            })
        }
        GraphSource::Generate(spec) => generate(spec),
    }
}

/// Executes `manifest`, writing the manifest and its outputs to `out_dir`.
/// Returns the paths written.
pub fn execute(manifest: &RunManifest, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    manifest.wave.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let hash = manifest.hash();
    let files: Vec<(String, String)> = match &manifest.command {
        Command::Cluster {
            graph,
            k,
            dense_limit,
            trajectory,
        } => cmd_cluster(manifest, &hash, graph, *k, *dense_limit, *trajectory)?,
        Command::Spectrum { graph, node } => cmd_spectrum(manifest, &hash, graph, *node)?,
        Command::Convergence { family, sizes } => cmd_convergence(manifest, &hash, family, sizes)?,
        Command::Predict { lambda2, n } => cmd_predict(manifest, &hash, *lambda2, *n)?,
        Command::Compare {
            graph,
            k,
            rounds,
            dense_limit,
        } => cmd_compare(manifest, &hash, graph, *k, *rounds, *dense_limit)?,
    };
    let mut written = Vec::new();
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_json() + "\n").map_err(io_err(&manifest_path))?;
    written.push(manifest_path);
    for (name, body) in files {
        let path = out_dir.join(&name);
        fs::write(&path, body).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

fn json_string(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json serializes") + "\n"
}

fn spectrum_rows(out: &mut String, spectra: &[&Spectrum]) {
    for s in spectra {
        for (b, c) in s.coeffs.iter().enumerate() {
            writeln!(out, "{},{b},{:e},{:e},{:e}", s.owner, s.omega(b), c.re, c.im).expect("string write");
        }
    }
}

fn source_label(graph: &GraphSource) -> String {
    match graph {
        GraphSource::File(p) => p.clone(),
        GraphSource::Generate(s) => s.clone(),
    }
}

/// Runs the wave method with the manifest's horizon policy.
fn run_wave(g: &Graph, wave: WaveConfig, k: usize) -> CliResult<ClusterOutcome> {
    Ok(cluster(g, wave, k)?)
}

fn cmd_cluster(
    manifest: &RunManifest,
    hash: &str,
    source: &GraphSource,
    k: usize,
    dense_limit: usize,
    trajectory: bool,
) -> CliResult<Vec<(String, String)>> {
    let input = load_graph(source)?;
    let g = &input.graph;
    let outcome = run_wave(g, manifest.wave, k)?;
    let analysis = &outcome.analysis;
    let mut warnings: Vec<String> = Vec::new();

    let oracle = if g.node_count() <= dense_limit {
        let ds = dense_spectral_with_limit(g, dense_limit)?;
        let (part, oracle_warnings) = oracle_partition(&ds, k)?;
        for w in &oracle_warnings {
            log::warn!("{w}");
            warnings.push(w.to_string());
        }
        let cmp = compare_partitions(outcome.partition(), &part)?;
        json!({
            "agreement": cmp.agreement,
            "exact_up_to_permutation": cmp.exact_up_to_permutation,
            "clusters": part.labels(),
            "lambda": ds.values.iter().take(k + 2).collect::<Vec<_>>(),
            "warnings": oracle_warnings,
        })
    } else {
        warnings.push(format!("oracle skipped: {} nodes exceed dense limit {dense_limit}", g.node_count()));
        serde_json::Value::Null
    };
    for f in &analysis.flags {
        log::warn!(
            "node {} flagged at peak {} ({:?}); sign resolved to {:+}",
            input.node_ids[f.node],
            f.peak,
            f.reason,
            f.resolved_sign
        );
    }
    let result = json!({
        "manifest_hash": hash,
        "config": manifest.wave,
        "graph": {
            "source": source_label(source),
            "nodes": g.node_count(),
            "edges": g.edge_count(),
        },
        "k": k,
        "t_max": outcome.t_max(),
        "horizons": outcome.horizons,
        "messages_scalar_equiv": outcome.messages_scalar_equiv(),
        "node_ids": input.node_ids,
        "clusters": outcome.partition().labels(),
        "cluster_count": outcome.partition().cluster_count(),
        "peaks": analysis.peaks.iter().map(|p| json!({
            "bin": p.bin,
            "omega": p.omega,
            "lambda": p.lambda,
            "reference_node": p.reference_node,
        })).collect::<Vec<_>>(),
        "flags": analysis.flags,
        "oracle": oracle,
        "warnings": warnings,
    });

    let mut csv = format!("# manifest {hash}\nnode,bin,omega,re,im\n");
    spectrum_rows(&mut csv, &analysis.spectra.iter().collect::<Vec<_>>());
    let mut files = vec![("result.json".to_string(), json_string(&result)), ("spectrum.csv".to_string(), csv)];
    if trajectory {
        files.push((
            "trajectory.csv".to_string(),
            format!("# manifest {hash}\n{}", outcome.run.trajectory_csv()),
        ));
    }
    Ok(files)
}

fn cmd_spectrum(manifest: &RunManifest, hash: &str, source: &GraphSource, node: usize) -> CliResult<Vec<(String, String)>> {
    let input = load_graph(source)?;
    let g = &input.graph;
    if node >= g.node_count() {
        return Err(wavecluster::Error::NodeOutOfRange { id: node, n: g.node_count() }.into());
    }
    let spectra = match manifest.wave.t_max {
        Some(t) => {
            let mut run = init_run(g, manifest.wave)?;
            run.run_to(t.max(wavecluster::spectral::MIN_HISTORY).next_power_of_two())?;
            run_spectra(&run)?
        }
        None => run_wave(g, manifest.wave, 1)?.analysis.spectra,
    };
    let spec = &spectra[node];
    let mut csv = format!("# manifest {hash}\n");
    match find_peak_bins(&spec.magnitudes(), 1) {
        Ok(bins) => writeln!(csv, "# lowest_peak bin={} omega={:e}", bins[0], spec.omega(bins[0])),
        Err(e) => writeln!(csv, "# lowest_peak none ({e})"),
    }
    .expect("string write");
    csv.push_str("node,bin,omega,re,im\n");
    spectrum_rows(&mut csv, &[spec]);
    Ok(vec![("spectrum.csv".to_string(), csv)])
}

fn family_graph(family: &str, n: usize) -> CliResult<Graph> {
    match family {
        "ring" => Ok(generators::ring_graph(n)?),
        "path" => Ok(generators::line_graph(n, 0, 1.0)?),
        _ => Err(CliError::Usage(format!("unknown family {family:?}; expected ring or path"))),
    }
}

fn cmd_convergence(manifest: &RunManifest, hash: &str, family: &str, sizes: &[usize]) -> CliResult<Vec<(String, String)>> {
    if sizes.is_empty() {
        return Err(CliError::Usage("no sizes given".into()));
    }
    let mut csv = format!("# manifest {hash}\nN,wave_rounds,heat_rounds\n");
    for &n in sizes {
        let g = family_graph(family, n)?;
        let wave = measure_convergence(&g, Method::Wave, manifest.wave)?;
        let heat = measure_convergence(&g, Method::Heat, manifest.wave)?;
        log::info!("{family} N={n}: wave {wave}, heat {heat}");
        writeln!(csv, "{n},{wave},{heat}").expect("string write");
    }
    Ok(vec![("convergence.csv".to_string(), csv)])
}

fn cmd_predict(manifest: &RunManifest, hash: &str, lambda2: f64, n: usize) -> CliResult<Vec<(String, String)>> {
    let p = predict_times(lambda2, manifest.wave.c2, manifest.wave.eta, n)?;
    let body = json!({
        "manifest_hash": hash,
        "lambda2": p.lambda2,
        "c2": p.c2,
        "eta": p.eta,
        "n": p.n,
        "tau": p.tau,
        "omega2": p.omega2,
        "t_wave": p.t_wave,
        "t_gossip": p.t_gossip,
    });
    Ok(vec![("predict.json".to_string(), json_string(&body))])
}

fn sign_partition(q: &[Vec<f64>], k: usize) -> Partition {
    Partition::from_labels(q.iter().map(|row| {
        (1..k.min(row.len())).fold(0usize, |acc, c| acc | (usize::from(row[c] > 0.0) << (c - 1)))
    }))
}

fn cmd_compare(
    manifest: &RunManifest,
    hash: &str,
    source: &GraphSource,
    k: usize,
    rounds: usize,
    dense_limit: usize,
) -> CliResult<Vec<(String, String)>> {
    let input = load_graph(source)?;
    let g = &input.graph;
    let ds = dense_spectral_with_limit(g, dense_limit)?;
    let (oracle, _) = oracle_partition(&ds, k)?;
    let label = source_label(source);

    let wave = run_wave(g, manifest.wave, k)?;
    let wave_cmp = compare_partitions(wave.partition(), &oracle)?;

    let steps = gossip_steps_for(ds.lambda2(), g.node_count())?;
    let ortho = orthogonal_iteration_distributed(
        g,
        OrthoIterConfig {
            k: k + 1,
            rounds,
            gossip: GossipSteps::Fixed(steps),
            seed: manifest.seed,
        },
    )?;
    let ortho_cmp = compare_partitions(&sign_partition(&ortho.q, k + 1), &oracle)?;

    let body = json!({
        "manifest_hash": hash,
        "reports": [
            {
                "graph": label,
                "method": "wave",
                "rounds": wave.t_max() + g.node_count(),
                "messages_scalar_equiv": wave.messages_scalar_equiv(),
                "partition_agreement": wave_cmp.agreement,
            },
            {
                "graph": label,
                "method": "orthogonal_iteration",
                "rounds": ortho.rounds * (ortho.gossip_steps + 1),
                "messages_scalar_equiv": ortho.messages_scalar_equiv,
                "partition_agreement": ortho_cmp.agreement,
            }
        ],
    });
    Ok(vec![("comparison.json".to_string(), json_string(&body))])
}

/// Oracle `lambda_2` of `g`, for `predict` given a graph.
pub fn lambda2_of(g: &Graph, dense_limit: usize) -> CliResult<f64> {
    let n = g.node_count();
    if n > dense_limit {
        return Err(wavecluster::Error::TooLarge { n, limit: dense_limit }.into());
    }
    let eig = symmetric_eigen(&g.dense_symmetric_laplacian(), n)?;
    Ok(eig.values[1])
}
