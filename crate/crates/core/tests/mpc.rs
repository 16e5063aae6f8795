use colorsim::graph::{gnp, random_regular, validate_coloring, ListColoringInstance};
use colorsim::mpc::{run_mpc_coloring, shard_graph, MpcCluster, MpcConfig};

#[test]
fn shards_are_balanced_and_complete() {
    let inst = ListColoringInstance::uniform(gnp(5000, 0.01, 2).unwrap());
    let cluster = MpcCluster::for_instance(&inst, 0.5, &MpcConfig::default());
    let g = inst.graph();
    let shards = shard_graph(g, &cluster, 17).unwrap();
    assert_eq!(shards.load.len(), cluster.machines);
    assert_eq!(shards.vertex_machine.len(), g.n());
    assert!(shards.vertex_machine.iter().all(|&m| (m as usize) < cluster.machines));
    let total: u64 = shards.load.iter().sum();
    assert_eq!(total, g.n() as u64 + 2 * g.edge_count() as u64);
    let mean = total as f64 / cluster.machines as f64;
    let max = *shards.load.iter().max().unwrap();
    assert!(max <= cluster.memory);
    // items weigh at most 2 words, so a machine's load has variance <= 2·mean;
    // six standard deviations covers the maximum over ~1000 machines
    assert!((max as f64) < mean + 6.0 * (2.0 * mean).sqrt(), "max {max} mean {mean}");
    assert_eq!(shard_graph(g, &cluster, 17).unwrap().load, shards.load);
    assert_ne!(shard_graph(g, &cluster, 18).unwrap().vertex_machine, shards.vertex_machine);
}

#[test]
fn too_few_machines_is_memory_exceeded() {
    let inst = ListColoringInstance::uniform(gnp(500, 0.1, 2).unwrap());
    let cluster = MpcCluster::new(100, 3);
    assert!(matches!(
        shard_graph(inst.graph(), &cluster, 0),
        Err(colorsim::Error::MemoryExceeded { .. })
    ));
}

#[test]
fn depth_bound_at_half_alpha() {
    let inst = ListColoringInstance::uniform(gnp(4000, 0.05, 8).unwrap());
    let (c, trace) = run_mpc_coloring(&inst, 0.5, &MpcConfig::default(), 8).unwrap();
    assert!(validate_coloring(&inst, &c).is_valid_total());
    assert!(trace.depth <= 7, "depth {}", trace.depth);
    assert!(trace.peak_memory.iter().all(|&p| p <= trace.machine_memory));
}

#[test]
fn smaller_alpha_means_less_memory() {
    let inst = ListColoringInstance::uniform(random_regular(3000, 40, 1).unwrap());
    let cfg = MpcConfig::default();
    let a = MpcCluster::for_instance(&inst, 0.4, &cfg);
    let b = MpcCluster::for_instance(&inst, 0.7, &cfg);
    assert!(a.memory < b.memory && a.machines > b.machines);
    for alpha in [0.4, 0.7] {
        let (c, t) = run_mpc_coloring(&inst, alpha, &cfg, 1).unwrap();
        assert!(validate_coloring(&inst, &c).is_valid_total());
        assert!(t.peak_memory.iter().all(|&p| p <= t.machine_memory));
    }
}
