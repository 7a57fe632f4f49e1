use wavecluster::generators::{karate_club, line_graph, random_connected, ring_graph};
use wavecluster::graph::build_graph;
use wavecluster::oracle::companion::{companion_eigencheck, DegenerateCase};
use wavecluster::oracle::convergence::{measure_convergence, Method};
use wavecluster::oracle::gossip::{gossip_steps_for, orthogonal_iteration_distributed, GossipSteps, OrthoIterConfig};
use wavecluster::oracle::predict::predict_times;
use wavecluster::oracle::{compare_partitions, dense_spectral, oracle_partition, DEFAULT_DENSE_LIMIT};
use wavecluster::partition::Partition;
use wavecluster::wave::WaveConfig;

fn sign_partition(v: &[f64]) -> Partition {
    Partition::from_labels(v.iter().map(|&x| usize::from(x > 0.0)))
}

#[test]
fn gossip_iteration_on_karate() {
    let g = karate_club();
    let ds = dense_spectral(&g).unwrap();
    let (oracle, _) = oracle_partition(&ds, 1).unwrap();
    let steps = gossip_steps_for(ds.lambda2(), g.node_count()).unwrap();
    let cfg = OrthoIterConfig {
        k: 2,
        rounds: 300,
        gossip: GossipSteps::Fixed(steps),
        seed: 7,
    };
    let res = orthogonal_iteration_distributed(&g, cfg).unwrap();
    let ours = sign_partition(&res.column(1));
    assert!(compare_partitions(&ours, &oracle).unwrap().exact_up_to_permutation);
    assert_eq!(res.gossip_steps, steps);
    // every gossip step moves a k x k matrix and a weight per node
    let wave_per_round = g.node_count() as u64;
    assert!(res.messages_scalar_equiv / res.rounds as u64 > 5 * wave_per_round * steps as u64);
}

#[test]
fn exact_sum_iteration_on_line_graph() {
    let g = line_graph(200, 99, 0.1).unwrap();
    let ds = dense_spectral(&g).unwrap();
    let (oracle, _) = oracle_partition(&ds, 1).unwrap();
    let cfg = OrthoIterConfig {
        k: 2,
        rounds: 60_000,
        gossip: GossipSteps::Exact,
        seed: 1,
    };
    let res = orthogonal_iteration_distributed(&g, cfg).unwrap();
    let ours = sign_partition(&res.column(1));
    assert!(compare_partitions(&ours, &oracle).unwrap().exact_up_to_permutation);
}

#[test]
fn companion_moduli_on_test_graphs() {
    let graphs = [
        build_graph(&[(0, 1, 1.0)]).unwrap(),
        karate_club(),
        line_graph(200, 99, 0.1).unwrap(),
        ring_graph(64).unwrap(),
        random_connected(20, 0.3, 3).unwrap(),
    ];
    for g in &graphs {
        let report = companion_eigencheck(g, 1.99, DEFAULT_DENSE_LIMIT).unwrap();
        assert!(report.all_unit_modulus(), "{}", report.max_modulus_deviation);
        assert!(report.has_case(DegenerateCase::ConstantMode));
        assert!(report.max_residual < 1e-9);
    }
}

#[test]
fn ring_convergence_orders() {
    let mut rows = Vec::new();
    for n in [32, 64, 128] {
        let g = ring_graph(n).unwrap();
        let wave = measure_convergence(&g, Method::Wave, WaveConfig::default()).unwrap();
        let heat = measure_convergence(&g, Method::Heat, WaveConfig::default()).unwrap();
        assert!(wave < heat, "n = {n}: {wave} vs {heat}");
        rows.push((n, wave, heat));
    }
    // doubling N doubles the wave horizon and roughly quadruples heat
    for w in rows.windows(2) {
        assert_eq!(w[1].1, 2 * w[0].1);
        let ratio = w[1].2 as f64 / w[0].2 as f64;
        assert!((3.0..5.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn predictor_for_ring64() {
    let n = 64;
    let lambda2 = 1.0 - (2.0 * std::f64::consts::PI / n as f64).cos();
    let ds = dense_spectral(&ring_graph(n).unwrap()).unwrap();
    assert!((ds.lambda2() - lambda2).abs() < 1e-12);
    let p = predict_times(ds.lambda2(), 1.99, 7.0, n).unwrap();
    assert!(p.t_wave > n as f64 && p.t_wave < p.t_gossip);
}
