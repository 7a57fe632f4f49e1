//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line, even when all of them pass.

use std::f64::consts::PI;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavecluster::generators::{
    block_model, karate_club, line_graph, planted_p_in_for_edges, planted_partition, random_connected, ring_graph,
};
use wavecluster::graph::{build_graph, Graph};
use wavecluster::oracle::companion::{companion_propagate, companion_report};
use wavecluster::oracle::convergence::{measure_convergence, Method};
use wavecluster::oracle::heat::{heat_closed_form, heat_iteration, weighted_mean};
use wavecluster::oracle::{compare_partitions, dense_spectral, oracle_partition, DenseSpectral};
use wavecluster::spectral::{analyze_run, cluster, frequency_to_eigenvalue};
use wavecluster::wave::{init_run, mode_frequency, probe_amplitude, suggest_t_max, WaveConfig, WaveRun};
use wavecluster::{Error, Partition};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

struct TestGraph {
    name: &'static str,
    graph: Graph,
    spectral: DenseSpectral,
}

fn test_graph(name: &'static str, graph: Graph) -> TestGraph {
    let spectral = dense_spectral(&graph).expect("dense oracle");
    TestGraph { name, graph, spectral }
}

fn planted_1000() -> Graph {
    let p_out = 0.03;
    let p_in = planted_p_in_for_edges(680, 320, p_out, 99_084.0);
    planted_partition(680, 320, p_in, p_out, 1).expect("planted graph")
}

fn four_blocks() -> Graph {
    let probs = vec![
        vec![0.9, 0.15, 0.05, 0.005],
        vec![0.15, 0.9, 0.005, 0.05],
        vec![0.05, 0.005, 0.9, 0.15],
        vec![0.005, 0.05, 0.15, 0.9],
    ];
    block_model(&[10, 10, 10, 10], &probs, 5).expect("block model")
}

fn suite() -> Vec<TestGraph> {
    vec![
        test_graph("pair", build_graph(&[(0, 1, 1.0)]).unwrap()),
        test_graph("karate", karate_club()),
        test_graph("line200", line_graph(200, 99, 0.1).unwrap()),
        test_graph("ring64", ring_graph(64).unwrap()),
        test_graph("er20", random_connected(20, 0.3, 3).unwrap()),
        test_graph("blocks4x10", four_blocks()),
        test_graph("planted680/320", planted_1000()),
    ]
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn oracle_agreement(g: &Graph, ds: &DenseSpectral, ours: &Partition) -> Result<(f64, bool), String> {
    let (oracle, _) = oracle_partition(ds, 1).map_err(|e| e.to_string())?;
    let cmp = compare_partitions(ours, &oracle).map_err(|e| e.to_string())?;
    debug_assert_eq!(ours.len(), g.node_count());
    Ok((cmp.agreement, cmp.exact_up_to_permutation))
}

fn line_graph_cut() -> Outcome {
    let g = line_graph(200, 99, 0.1).unwrap();
    let (out, elapsed) = timed(|| cluster(&g, WaveConfig::default(), 1));
    let out = out.map_err(|e| e.to_string())?;
    let expected = Partition::from_labels((0..200).map(|i| usize::from(i >= 100)));
    let cut = compare_partitions(out.partition(), &expected).unwrap().exact_up_to_permutation;
    let ds = dense_spectral(&g).unwrap();
    let (agreement, _) = oracle_agreement(&g, &ds, out.partition())?;
    check(
        cut && agreement == 1.0 && elapsed < Duration::from_secs(10),
        format!("cut 1..100|101..200 {cut}, oracle agreement {agreement}, T = {}, {elapsed:.2?}", out.t_max()),
    )
}

fn karate() -> Outcome {
    let g = karate_club();
    let (out, elapsed) = timed(|| cluster(&g, WaveConfig::default(), 1));
    let out = out.map_err(|e| e.to_string())?;
    let ds = dense_spectral(&g).unwrap();
    let (agreement, exact) = oracle_agreement(&g, &ds, out.partition())?;
    let flags = out.analysis.flags.len();
    let ok = exact || (flags > 0 && agreement >= 33.0 / 34.0);
    check(
        ok && elapsed < Duration::from_secs(5),
        format!("agreement {agreement}, flags {flags}, T = {}, {elapsed:.2?}", out.t_max()),
    )
}

fn planted_blocks(g: &Graph, ds: &DenseSpectral) -> Outcome {
    let connected = g.is_connected();
    let ratio = ds.values[2] / ds.values[1];
    let (out, elapsed) = timed(|| cluster(g, WaveConfig::default(), 1));
    let out = out.map_err(|e| e.to_string())?;
    let (agreement, exact) = oracle_agreement(g, ds, out.partition())?;
    check(
        connected && ratio >= 3.0 && exact && elapsed < Duration::from_secs(120),
        format!(
            "n = {}, m = {}, connected {connected}, lambda3/lambda2 = {ratio:.2}, agreement {agreement}, T = {}, {elapsed:.2?}",
            g.node_count(),
            g.edge_count(),
            out.t_max()
        ),
    )
}

fn eigenvalue_recovery() -> Outcome {
    const C2: f64 = 1.99;
    let t = 1usize << 14;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut pass, mut literal, mut count) = (0, 0, 0);
    let mut failures = Vec::new();
    while count < 50 {
        let n = rng.gen_range(8..=32);
        let p = rng.gen_range(0.15..0.5);
        let seed: u64 = rng.gen();
        let Ok(g) = random_connected(n, p, seed) else { continue };
        let ds = dense_spectral(&g).unwrap();
        // simple lambda_2
        if ds.values[2] - ds.values[1] < 1e-3 {
            continue;
        }
        count += 1;
        let cfg = WaveConfig { seed: count, ..WaveConfig::default() }.with_t_max(t);
        let mut run = init_run(&g, cfg).unwrap();
        run.run_to(t).map_err(|e| e.to_string())?;
        let analysis = analyze_run(&g, &run, 1).map_err(|e| e.to_string())?;
        let l2 = ds.values[1];
        let err = (analysis.peaks[0].lambda - l2).abs();

        // one bin either side of the true frequency, mapped to eigenvalues
        let w2 = mode_frequency(l2, C2).unwrap();
        let dw = 2.0 * PI / t as f64;
        let tol = [w2 - dw, (w2 + dw).min(PI)]
            .iter()
            .map(|&w| (frequency_to_eigenvalue(w, C2).unwrap() - l2).abs())
            .fold(0.0, f64::max)
            + 1e-9;
        if err <= tol {
            pass += 1;
        } else {
            failures.push(format!("n = {n} lambda2 = {l2:.6} err {err:.2e} tol {tol:.2e}"));
        }
        if err <= (2.0 - 2.0 * dw.cos()) / C2 + 1e-9 {
            literal += 1;
        }
    }
    check(
        pass == 50,
        format!(
            "{pass}/50 within one bin of lambda2 (T = {t}); {literal}/50 within (2 - 2cos(2pi/T))/c^2 [informational]{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn stability(graphs: &[TestGraph]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // (a) bounded oscillation for every speed on every graph
    for c in [0.5f64, 1.0, 1.41] {
        let c2 = c * c;
        let mut worst = 0.0f64;
        for tg in graphs {
            let horizon = suggest_t_max(tg.spectral.lambda2(), c2, 7.0).map_err(|e| e.to_string())?;
            let mut run = init_run(&tg.graph, WaveConfig::new(c2, 7.0, 0).unwrap()).unwrap();
            match probe_amplitude(&mut run, 10 * horizon, horizon) {
                Ok(trace) => {
                    worst = worst.max(trace.growth_ratio());
                    if trace.is_growing() {
                        ok = false;
                        notes.push(format!("{} grows at c = {c}", tg.name));
                    }
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("{} at c = {c}: {e}", tg.name));
                }
            }
        }
        notes.push(format!("c = {c}: worst growth ratio {worst:.2}"));
    }

    // (b) c^2 = 2 on two nodes: the alternating mode has a double root at -1
    let pair = build_graph(&[(0, 1, 1.0)]).unwrap();
    let mut run = WaveRun::unchecked(&pair, 2.0, &[0.3, 0.8], &[0.3, 0.8]).unwrap();
    let detected = match probe_amplitude(&mut run, 4096, 256) {
        Ok(trace) => {
            notes.push(format!("c^2 = 2 growth ratio {:.1}", trace.growth_ratio()));
            trace.is_growing()
        }
        Err(Error::NumericalDivergence { round, .. }) => {
            notes.push(format!("c^2 = 2 diverged at round {round}"));
            true
        }
        Err(e) => return Err(e.to_string()),
    };
    ok &= detected;

    // (c) u(-1) = u(0) - delta: the constant mode drifts by delta per round
    let g = karate_club();
    let delta = 0.01;
    let u0 = init_run(&g, WaveConfig::default()).unwrap().initial().to_vec();
    let um1: Vec<f64> = u0.iter().map(|x| x - delta).collect();
    let mut run = WaveRun::unchecked(&g, 1.99, &u0, &um1).unwrap();
    let mean0 = weighted_mean(&g, &u0);
    let trace = probe_amplitude(&mut run, 4096, 256).map_err(|e| e.to_string())?;
    let drift = weighted_mean(&g, &run.current()) - mean0;
    let linear = (drift - delta * 4096.0).abs() <= 1e-6 * drift.abs();
    notes.push(format!(
        "offset start growth ratio {:.1}, mean drift {drift:.4} over 4096 rounds",
        trace.growth_ratio()
    ));
    ok &= trace.is_growing() && linear;

    check(ok, notes.join("; "))
}

fn companion(graphs: &[TestGraph]) -> Outcome {
    let mut worst = 0.0f64;
    let mut residual = 0.0f64;
    let mut values = 0;
    let mut ok = true;
    for tg in graphs {
        let report = companion_report(&tg.graph, &tg.spectral, 1.99);
        ok &= report.all_unit_modulus() && report.modes.len() == tg.graph.node_count();
        values += 2 * report.modes.len();
        worst = worst.max(report.max_modulus_deviation);
        residual = residual.max(report.max_residual);
    }
    check(
        ok && worst <= 1e-9,
        format!("{values} eigenvalues over {} graphs, max ||alpha| - 1| = {worst:.1e}, max residual {residual:.1e}", graphs.len()),
    )
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        let dx = x.ln() - mx;
        (a + dx * (y.ln() - my), b + dx * dx)
    });
    num / den
}

fn convergence_scaling() -> Outcome {
    let mut wave = Vec::new();
    let mut heat = Vec::new();
    let mut ordered = true;
    let mut rows = Vec::new();
    for n in [32usize, 64, 128, 256] {
        let g = ring_graph(n).unwrap();
        let w = measure_convergence(&g, Method::Wave, WaveConfig::default()).map_err(|e| e.to_string())?;
        let h = measure_convergence(&g, Method::Heat, WaveConfig::default()).map_err(|e| e.to_string())?;
        ordered &= w < h;
        wave.push((n as f64, w as f64));
        heat.push((n as f64, h as f64));
        rows.push(format!("{n}:{w}/{h}"));
    }
    let (sw, sh) = (slope(&wave), slope(&heat));
    check(
        (sw - 1.0).abs() <= 0.15 && (sh - 2.0).abs() <= 0.3 && ordered,
        format!("wave exponent {sw:.3}, heat exponent {sh:.3}, N:wave/heat {}", rows.join(" ")),
    )
}

fn dynamics_equivalence() -> Outcome {
    let small = [
        build_graph(&[(0, 1, 1.0)]).unwrap(),
        line_graph(16, 7, 0.1).unwrap(),
        ring_graph(9).unwrap(),
        random_connected(12, 0.35, 4).unwrap(),
        random_connected(16, 0.25, 8).unwrap(),
    ];
    let mut wave_err = 0.0f64;
    for g in &small {
        for c2 in [0.5, 1.0, 1.99] {
            let mut run = init_run(g, WaveConfig::new(c2, 7.0, 11).unwrap()).unwrap();
            run.run_to(200).map_err(|e| e.to_string())?;
            let u0 = run.initial().to_vec();
            let dense = companion_propagate(g, c2, &u0, &u0, 200).map_err(|e| e.to_string())?;
            for (t, row) in dense.iter().enumerate() {
                for (i, &x) in row.iter().enumerate() {
                    wave_err = wave_err.max((run.history(i)[t] - x).abs());
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let medium = [
        karate_club(),
        line_graph(32, 15, 0.1).unwrap(),
        ring_graph(31).unwrap(),
        random_connected(32, 0.2, 2).unwrap(),
    ];
    let mut heat_err = 0.0f64;
    for g in medium.iter().filter(|g| g.node_count() <= 32) {
        let ds = dense_spectral(g).unwrap();
        let u0: Vec<f64> = (0..g.node_count()).map(|_| rng.gen()).collect();
        for t in [1, 10, 100, 500] {
            let a = heat_iteration(g, &u0, t).map_err(|e| e.to_string())?;
            let b = heat_closed_form(g, &ds, &u0, t).map_err(|e| e.to_string())?;
            heat_err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(heat_err, f64::max);
        }
    }
    check(
        wave_err <= 1e-10 && heat_err <= 1e-8,
        format!("wave vs companion {wave_err:.1e} (<= 1e-10), heat vs eigen-expansion {heat_err:.1e} (<= 1e-8)"),
    )
}

fn replay_is_identical() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_wavecluster");
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 5] = [
        &["cluster", "--generate", "karate", "--k", "2", "--trajectory"],
        &["spectrum", "--generate", "line:200:99:0.1", "--node", "5"],
        &["convergence", "ring", "32,64"],
        &["predict", "--generate", "er:20:0.3:3"],
        &["compare", "--generate", "karate", "--rounds", "50"],
    ];
    let mut files = 0;
    for (idx, args) in runs.iter().enumerate() {
        let first = root.path().join(format!("run{idx}"));
        let second = root.path().join(format!("replay{idx}"));
        let status = Process::new(bin)
            .args(*args)
            .arg("--out-dir")
            .arg(&first)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)));
        }
        let status = Process::new(bin)
            .arg("replay")
            .arg(first.join("manifest.json"))
            .arg("--out-dir")
            .arg(&second)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("replay {args:?}: {}", String::from_utf8_lossy(&status.stderr)));
        }
        files += same_files(&first, &second)?;
    }
    Ok(format!("{} commands, {files} files byte-identical after replay", runs.len()))
}

fn same_files(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let count_b = fs::read_dir(b).map_err(|e| e.to_string())?.count();
    if names.len() != count_b {
        return Err(format!("{} has {} files, {} has {count_b}", a.display(), names.len(), b.display()));
    }
    for name in &names {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        if x != y {
            return Err(format!("{} differs after replay", name.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn main() -> ExitCode {
    let graphs = suite();
    let planted = graphs.iter().find(|g| g.name.starts_with("planted")).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("line graph cut", Box::new(line_graph_cut)),
        ("karate club", Box::new(karate)),
        ("planted 680/320", Box::new(|| planted_blocks(&planted.graph, &planted.spectral))),
        ("eigenvalue recovery", Box::new(eigenvalue_recovery)),
        ("stability suite", Box::new(|| stability(&graphs))),
        ("companion moduli", Box::new(|| companion(&graphs))),
        ("convergence scaling", Box::new(convergence_scaling)),
        ("dynamics equivalence", Box::new(dynamics_equivalence)),
        ("replay determinism", Box::new(replay_is_identical)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let (result, elapsed) = timed(|| panic::catch_unwind(panic::AssertUnwindSafe(f)));
        let result = result.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} [{elapsed:.1?}] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} [{elapsed:.1?}] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/9 passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
