//! Low-memory MPC simulation: hash sharding with per-machine memory
//! accounting and the recursive partition-based coloring pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    smallest_free_color, validate_coloring, Color, Coloring, Graph, ListColoringInstance, Palette,
    Vertex,
};
use crate::partition::{self, PartitionKnobs};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    /// Machine memory is `ceil(n^α) * c_mem` words.
    pub c_mem: f64,
    /// Machines are provisioned for `c_tot` times the input size.
    pub c_tot: f64,
    /// Base case once `Δ_H^2 <= c_base n^α`.
    pub c_base: f64,
    pub gamma: f64,
    pub partition: PartitionKnobs,
    /// Keep partitioning for this many levels before testing for the base
    /// case, as long as the partition precondition holds.
    pub min_depth: usize,
    pub max_depth: usize,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            c_mem: 16.0,
            c_tot: 4.0,
            c_base: 1.0,
            gamma: 6.0,
            partition: PartitionKnobs {
                c_min: 1e-4,
                ..PartitionKnobs::default()
            },
            min_depth: 0,
            max_depth: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpcCluster {
    /// Words per machine.
    pub memory: u64,
    pub machines: usize,
    pub rounds: u64,
    /// High-water mark of resident words per machine.
    pub peak: Vec<u64>,
    /// Words resident for the input shards.
    baseline: Vec<u64>,
}

impl MpcCluster {
    pub fn new(memory: u64, machines: usize) -> Self {
        MpcCluster {
            memory,
            machines: machines.max(1),
            rounds: 0,
            peak: vec![0; machines.max(1)],
            baseline: vec![0; machines.max(1)],
        }
    }

    /// `S = ceil(n^α) c_mem` and enough machines for `c_tot` copies of the
    /// instance.
    pub fn for_instance(instance: &ListColoringInstance, alpha: f64, cfg: &MpcConfig) -> Self {
        let n = instance.n().max(2) as f64;
        let memory = (n.powf(alpha).ceil() * cfg.c_mem).ceil().max(1.0) as u64;
        let machines = ((cfg.c_tot * instance.words() as f64) / memory as f64).ceil().max(1.0) as usize;
        Self::new(memory, machines)
    }

    fn machine_of(&self, seed: u64, key: &[u64]) -> usize {
        let prefix = rng::derive_seed(&[seed, rng::tag::SHARD]);
        let h = key
            .iter()
            .fold(prefix, |acc, &p| rng::mix64(acc ^ rng::mix64(p)));
        (h % self.machines as u64) as usize
    }

    /// Commits resident words on top of the input shards; fails if any
    /// machine goes above `S`.
    fn commit(&mut self, working: &[u64], round: u64) -> Result<()> {
        for (m, (&w, &b)) in working.iter().zip(&self.baseline).enumerate() {
            let total = w + b;
            if total > self.memory {
                return Err(Error::MemoryExceeded {
                    machine: m,
                    round,
                    words: total,
                    cap: self.memory,
                });
            }
            self.peak[m] = self.peak[m].max(total);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShardMap {
    pub vertex_machine: Vec<u32>,
    /// Words resident on each machine.
    pub load: Vec<u64>,
}

/// Hashes each vertex (one word) and each edge (two words) to a machine.
pub fn shard_graph(graph: &Graph, cluster: &MpcCluster, hash_seed: u64) -> Result<ShardMap> {
    let need = graph.n() as u64 + 2 * graph.edge_count() as u64;
    let have = cluster.memory * cluster.machines as u64;
    if need > have {
        return Err(Error::MemoryExceeded {
            machine: 0,
            round: 0,
            words: need,
            cap: have,
        });
    }
    let mut load = vec![0u64; cluster.machines];
    let vertex_machine: Vec<u32> = (0..graph.n() as u64)
        .map(|v| {
            let m = cluster.machine_of(hash_seed, &[0, v]);
            load[m] += 1;
            m as u32
        })
        .collect();
    for (u, v) in graph.edges() {
        load[cluster.machine_of(hash_seed, &[1, u as u64, v as u64])] += 2;
    }
    if let Some((m, &w)) = load.iter().enumerate().find(|(_, &w)| w > cluster.memory) {
        return Err(Error::MemoryExceeded {
            machine: m,
            round: 0,
            words: w,
            cap: cluster.memory,
        });
    }
    Ok(ShardMap {
        vertex_machine,
        load,
    })
}

/// Words of a subproblem placed by hash: one per vertex, two per edge and
/// one per palette color.
fn shard_subproblem(
    cluster: &MpcCluster,
    seed: u64,
    node: u64,
    graph: &Graph,
    global: &[Vertex],
    palettes: &[Palette],
) -> Vec<u64> {
    let mut load = vec![0u64; cluster.machines];
    for (i, &v) in global.iter().enumerate() {
        load[cluster.machine_of(seed, &[node, 0, v as u64])] += 1;
        for c in palettes[i].iter() {
            load[cluster.machine_of(seed, &[node, 2, v as u64, c])] += 1;
        }
    }
    for (a, b) in graph.edges() {
        let (u, v) = (global[a as usize] as u64, global[b as usize] as u64);
        load[cluster.machine_of(seed, &[node, 1, u, v])] += 2;
    }
    load
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Root,
    B,
    L,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub branch: Branch,
    /// Index of `B_i` among its siblings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<usize>,
    pub delta: usize,
    pub vertices: usize,
    /// Children in order `B_1..B_k, L`; empty for base cases.
    pub children: Vec<usize>,
    #[serde(rename = "baseReason", skip_serializing_if = "Option::is_none")]
    pub base_reason: Option<String>,
    /// Vertices the node's greedy could not color from its palette.
    pub deferred: usize,
    /// `Σ_v deg_H(v)^2`, the space a base-case solver needs.
    #[serde(rename = "baseMemory")]
    pub base_memory: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpcTrace {
    pub model: &'static str,
    pub alpha: f64,
    pub depth: usize,
    pub tree: Vec<TreeNode>,
    #[serde(rename = "peakMemory")]
    pub peak_memory: Vec<u64>,
    #[serde(rename = "machineMemory")]
    pub machine_memory: u64,
    pub machines: usize,
    /// Critical-path rounds of the partitioning steps.
    pub rounds: u64,
    /// Base-case solves, whose rounds are not modeled.
    #[serde(rename = "substitutedBaseCases")]
    pub substituted_base_cases: usize,
    /// `Σ_H Σ_v deg_H(v)^2` over base-case subgraphs.
    #[serde(rename = "totalBaseMemory")]
    pub total_base_memory: u64,
    /// Vertices colored by the final repair pass with their full palettes.
    pub repaired: usize,
}

impl MpcTrace {
    /// Peak resident words summed over machines.
    pub fn total_peak(&self) -> u64 {
        self.peak_memory.iter().sum()
    }
}

enum Task {
    Node {
        vertices: Vec<Vertex>,
        palettes: Vec<Palette>,
        parent: Option<usize>,
        depth: usize,
        branch: Branch,
        part: Option<usize>,
        defer: Option<usize>,
    },
    /// The `L` child of a partitioned node; its vertex set grows with
    /// deferrals until it is popped.
    Leftover {
        slot: usize,
        parent: usize,
        depth: usize,
        defer: Option<usize>,
    },
}

/// Checks `|Ψ(v)| >= max(deg(v) + 1, Δ - Δ^{3/5})` for every vertex.
pub fn check_mpc_palettes(instance: &ListColoringInstance) -> Result<()> {
    let d = instance.max_degree() as f64;
    let floor = d - d.powf(0.6);
    for v in 0..instance.n() as Vertex {
        let len = instance.palette(v).len();
        if len < instance.graph().degree(v) + 1 || (len as f64) < floor {
            return Err(Error::InvalidInstance(format!(
                "vertex {v}: palette of {len} below max(deg + 1, Δ - Δ^(3/5))"
            )));
        }
    }
    Ok(())
}

/// Recursive partitioning on both `B_i` and `L` until `Δ_H^2 <= c_base n^α`
/// or the degree falls to the polylogarithmic range, where a designated
/// machine colors the subgraph greedily.
pub fn run_mpc_coloring(
    instance: &ListColoringInstance,
    alpha: f64,
    cfg: &MpcConfig,
    seed: u64,
) -> Result<(Coloring, MpcTrace)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("α = {alpha} outside (0, 1)")));
    }
    check_mpc_palettes(instance)?;
    let n = instance.n();
    let g = instance.graph();
    let mut cluster = MpcCluster::for_instance(instance, alpha, cfg);
    let shard_seed = rng::derive_seed(&[seed, rng::tag::SHARD]);
    let shards = shard_graph(g, &cluster, shard_seed)?;
    // palettes of the input are resident alongside the graph
    let mut baseline = shards.load.clone();
    for v in 0..n as Vertex {
        for c in instance.palette(v).iter() {
            baseline[cluster.machine_of(shard_seed, &[2, v as u64, c])] += 1;
        }
    }
    cluster.baseline = baseline;
    cluster.commit(&vec![0; cluster.machines], 0)?;

    let base_limit = cfg.c_base * (n.max(2) as f64).powf(alpha);
    let log_s = (cluster.memory.max(2) as f64).ln();
    let fan_in_rounds = ((cluster.machines.max(2) as f64).ln() / log_s).ceil().max(1.0) as u64;
    let mut coloring = Coloring::new(n);
    let mut tree: Vec<TreeNode> = Vec::new();
    let mut own_rounds: Vec<u64> = Vec::new();
    let mut slots: Vec<Vec<(Vertex, Palette)>> = Vec::new();
    let mut repair: Vec<Vertex> = Vec::new();
    let mut scratch = Vec::new();
    let mut stack = vec![Task::Node {
        vertices: (0..n as Vertex).collect(),
        palettes: instance.palettes().to_vec(),
        parent: None,
        depth: 0,
        branch: Branch::Root,
        part: None,
        defer: None,
    }];

    while let Some(task) = stack.pop() {
        let (vertices, mut palettes, parent, depth, branch, part, defer) = match task {
            Task::Node {
                vertices,
                palettes,
                parent,
                depth,
                branch,
                part,
                defer,
            } => (vertices, palettes, parent, depth, branch, part, defer),
            Task::Leftover {
                slot,
                parent,
                depth,
                defer,
            } => {
                let mut entries = std::mem::take(&mut slots[slot]);
                entries.sort_unstable_by_key(|e| e.0);
                let (vs, pals): (Vec<Vertex>, Vec<Palette>) = entries.into_iter().unzip();
                (vs, pals, Some(parent), depth, Branch::L, None, defer)
            }
        };
        let id = tree.len();
        if let Some(p) = parent {
            tree[p].children.push(id);
        }
        // colors taken by already colored neighbors leave the palettes
        for (i, &v) in vertices.iter().enumerate() {
            let mut taken: Vec<Color> = g.neighbors(v).iter().filter_map(|&u| coloring.get(u)).collect();
            if !taken.is_empty() {
                taken.sort_unstable();
                taken.dedup();
                palettes[i] = palettes[i].without(&taken);
            }
        }
        let sub_graph = g.induced(&vertices);
        let delta = sub_graph.max_degree();
        let mut node = TreeNode {
            id,
            parent,
            depth,
            branch,
            part,
            delta,
            vertices: vertices.len(),
            children: Vec::new(),
            base_reason: None,
            deferred: 0,
            base_memory: 0,
        };
        let working = shard_subproblem(&cluster, shard_seed, id as u64, &sub_graph, &vertices, &palettes);
        cluster.commit(&working, id as u64)?;

        let sub = ListColoringInstance::new_unchecked(sub_graph, palettes);
        let params = partition::derive_params(delta, n, cfg.gamma, cfg.partition.clone());
        let small = (delta as f64).powi(2) <= base_limit;
        let reason = if vertices.is_empty() {
            Some("empty".to_string())
        } else if small && depth >= cfg.min_depth {
            Some("degree squared within n^α".to_string())
        } else if depth >= cfg.max_depth {
            Some("depth cap".to_string())
        } else {
            partition::check_precondition(&sub, &params).err().map(|e| e.to_string())
        };

        if let Some(reason) = reason {
            node.base_reason = Some(reason);
            node.base_memory = (0..vertices.len() as Vertex)
                .map(|i| (sub.graph().degree(i) as u64).pow(2))
                .sum();
            for (i, &v) in vertices.iter().enumerate() {
                let pal = sub.palette(i as Vertex).as_slice();
                match smallest_free_color(g, &coloring, v, pal, &mut scratch) {
                    Some(c) => coloring.set(v, c),
                    None => {
                        node.deferred += 1;
                        match defer {
                            Some(s) => slots[s].push((v, instance.palette(v).clone())),
                            None => repair.push(v),
                        }
                    }
                }
            }
            tree.push(node);
            own_rounds.push(0);
            continue;
        }

        let out = partition::partition_unchecked(&sub, &params, rng::derive_seed(&[seed, id as u64]))?;
        // seed broadcast and regrouping each take a fan-in tree
        own_rounds.push(2 * fan_in_rounds + 1);
        let slot = slots.len();
        slots.push(
            out.leftover
                .iter()
                .map(|&lv| (vertices[lv as usize], sub.palette(lv).clone()))
                .collect(),
        );
        stack.push(Task::Leftover {
            slot,
            parent: id,
            depth: depth + 1,
            defer,
        });
        for (i, members) in out.parts.iter().enumerate().rev() {
            let pals = members
                .iter()
                .map(|&lv| Palette::from_sorted(out.part_palette(&sub, lv)))
                .collect();
            stack.push(Task::Node {
                vertices: members.iter().map(|&lv| vertices[lv as usize]).collect(),
                palettes: pals,
                parent: Some(id),
                depth: depth + 1,
                branch: Branch::B,
                part: Some(i),
                defer: Some(slot),
            });
        }
        tree.push(node);
    }

    let repaired = repair.len();
    for v in repair {
        let c = smallest_free_color(g, &coloring, v, instance.palette(v).as_slice(), &mut scratch)
            .ok_or(Error::PaletteExhausted(v))?;
        coloring.set(v, c);
    }
    debug_assert!(validate_coloring(instance, &coloring).is_valid_total());

    // B children run side by side; L waits for them
    let mut critical = vec![0u64; tree.len()];
    for id in (0..tree.len()).rev() {
        let node = &tree[id];
        let (bs, l): (Vec<usize>, Vec<usize>) =
            node.children.iter().partition(|&&c| tree[c].branch == Branch::B);
        let b_max = bs.iter().map(|&c| critical[c]).max().unwrap_or(0);
        let l_sum: u64 = l.iter().map(|&c| critical[c]).sum();
        critical[id] = own_rounds[id] + b_max + l_sum;
    }
    let trace = MpcTrace {
        model: "mpc",
        alpha,
        depth: tree.iter().map(|t| t.depth).max().unwrap_or(0),
        substituted_base_cases: tree.iter().filter(|t| t.base_reason.is_some()).count(),
        total_base_memory: tree.iter().map(|t| t.base_memory).sum(),
        rounds: critical.first().copied().unwrap_or(0),
        tree,
        peak_memory: cluster.peak.clone(),
        machine_memory: cluster.memory,
        machines: cluster.machines,
        repaired,
    };
    Ok((coloring, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gnp;

    #[test]
    fn single_machine_holds_everything() {
        let g = gnp(100, 0.05, 1).unwrap();
        let words = g.n() as u64 + 2 * g.edge_count() as u64;
        let c = MpcCluster::new(words, 1);
        let s = shard_graph(&g, &c, 3).unwrap();
        assert!(s.vertex_machine.iter().all(|&m| m == 0));
        assert_eq!(s.load, vec![words]);
    }

    #[test]
    fn empty_graph_empty_shards() {
        let g = Graph::empty(0);
        let s = shard_graph(&g, &MpcCluster::new(10, 4), 0).unwrap();
        assert!(s.vertex_machine.is_empty());
        assert_eq!(s.load, vec![0; 4]);
    }

    #[test]
    fn overfull_cluster_rejected() {
        let g = gnp(100, 0.2, 1).unwrap();
        assert!(matches!(
            shard_graph(&g, &MpcCluster::new(10, 2), 0),
            Err(Error::MemoryExceeded { .. })
        ));
    }

    #[test]
    fn small_degree_is_base_case() {
        let g = Graph::from_edges(400, (0..400u32).map(|v| (v, (v + 1) % 400))).unwrap();
        let inst = ListColoringInstance::uniform(g);
        let (c, t) = run_mpc_coloring(&inst, 0.5, &MpcConfig::default(), 1).unwrap();
        assert!(validate_coloring(&inst, &c).is_valid_total());
        assert_eq!(t.depth, 0);
        assert_eq!(t.tree.len(), 1);
    }

    #[test]
    fn bad_alpha() {
        let inst = ListColoringInstance::uniform(Graph::empty(3));
        assert!(run_mpc_coloring(&inst, 1.0, &MpcConfig::default(), 0).is_err());
    }
}
