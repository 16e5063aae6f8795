//! CONGESTED-CLIQUE simulation: a bandwidth ledger with Lenzen routing, the
//! recursive high-degree coloring pipeline, the low-degree bidding path and
//! the opportunistic simulation of local algorithms.

use std::fmt::Debug;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bidding::{self, BiddingKnobs, PipelineTrace};
use crate::error::{Direction, Error, Result};
use crate::graph::{
    smallest_free_color, validate_coloring, Color, Coloring, Graph, ListColoringInstance, Palette,
    Vertex,
};
use crate::partition::{self, PartitionKnobs};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliqueConfig {
    /// Per-vertex source and destination budget of one Lenzen batch, in
    /// multiples of `n`.
    pub c_l: f64,
    /// Rounds charged per Lenzen batch.
    pub routing_rounds: u64,
    /// Recursion stops once `Δ_L |V_L| <= c_stop n`.
    pub c_stop: f64,
    pub gamma: f64,
    pub partition: PartitionKnobs,
    /// High-degree path runs when `Δ >= c_high ln^{4+ε} n`.
    pub c_high: f64,
    pub epsilon: f64,
    /// Hard cap on partition levels.
    pub max_depth: usize,
    pub bidding: BiddingKnobs,
}

impl Default for CliqueConfig {
    fn default() -> Self {
        CliqueConfig {
            c_l: 4.0,
            routing_rounds: 2,
            c_stop: 8.0,
            gamma: 2.0,
            partition: PartitionKnobs::default(),
            c_high: 0.01,
            epsilon: 0.5,
            max_depth: 16,
            bidding: BiddingKnobs::default(),
        }
    }
}

impl CliqueConfig {
    pub fn highdeg_threshold(&self, n: usize) -> f64 {
        self.c_high * (n.max(2) as f64).ln().powf(4.0 + self.epsilon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingRequest {
    pub source: Vertex,
    pub destination: Vertex,
    pub payload: u64,
}

/// Aggregated per-vertex load of a set of messages.
#[derive(Clone, Debug)]
pub struct Traffic {
    pub sent: Vec<u64>,
    pub received: Vec<u64>,
}

impl Traffic {
    pub fn new(n: usize) -> Self {
        Traffic {
            sent: vec![0; n],
            received: vec![0; n],
        }
    }

    pub fn add(&mut self, source: Vertex, destination: Vertex, words: u64) {
        if source != destination && words > 0 {
            self.sent[source as usize] += words;
            self.received[destination as usize] += words;
        }
    }

    pub fn total(&self) -> u64 {
        self.sent.iter().sum()
    }

    pub fn max_load(&self) -> u64 {
        self.sent
            .iter()
            .chain(&self.received)
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Two-step broadcast of `words` from `source` to every member: word
    /// `j` goes to relay `j`, which forwards it to everyone.
    pub fn broadcast(&mut self, source: Vertex, words: u64, members: &[Vertex]) {
        if members.is_empty() {
            return;
        }
        for j in 0..words as usize {
            let relay = members[j % members.len()];
            self.add(source, relay, 1);
            for &m in members {
                self.add(relay, m, 1);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub label: String,
    pub batches: u64,
    pub rounds: u64,
    pub words: u64,
    pub max_sent: u64,
    pub max_received: u64,
}

#[derive(Clone, Debug)]
pub struct CliqueNetwork {
    pub n: usize,
    pub c_l: f64,
    pub routing_rounds: u64,
    rounds: u64,
    batches: u64,
    words: u64,
    pub ledger: Vec<RoundRecord>,
}

impl CliqueNetwork {
    pub fn new(n: usize, c_l: f64, routing_rounds: u64) -> Self {
        CliqueNetwork {
            n,
            c_l,
            routing_rounds,
            rounds: 0,
            batches: 0,
            words: 0,
            ledger: Vec::new(),
        }
    }

    pub fn from_config(n: usize, cfg: &CliqueConfig) -> Self {
        Self::new(n, cfg.c_l, cfg.routing_rounds)
    }

    /// Per-vertex budget of one batch, `c_L * n` words.
    pub fn batch_cap(&self) -> u64 {
        (self.c_l * self.n as f64).floor().max(1.0) as u64
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn batches(&self) -> u64 {
        self.batches
    }

    pub fn routed_words(&self) -> u64 {
        self.words
    }

    fn commit(&mut self, label: &str, traffic: &Traffic, batches: u64) -> u64 {
        let words = traffic.total();
        assert_eq!(
            words,
            traffic.received.iter().sum::<u64>(),
            "ledger conservation"
        );
        let rounds = batches * self.routing_rounds;
        self.rounds += rounds;
        self.batches += batches;
        self.words += words;
        self.ledger.push(RoundRecord {
            label: label.to_string(),
            batches,
            rounds,
            words,
            max_sent: traffic.sent.iter().copied().max().unwrap_or(0),
            max_received: traffic.received.iter().copied().max().unwrap_or(0),
        });
        rounds
    }

    /// One Lenzen batch. Fails if any vertex sources or sinks more than
    /// `c_L n` words.
    pub fn lenzen_route(&mut self, requests: &[RoutingRequest]) -> Result<u64> {
        let mut t = Traffic::new(self.n);
        for r in requests {
            if r.source as usize >= self.n || r.destination as usize >= self.n {
                return Err(Error::InvalidVertex {
                    vertex: r.source.max(r.destination) as u64,
                    n: self.n,
                });
            }
            if r.payload == 0 {
                return Err(Error::Parameter("routing payload must be positive".into()));
            }
            t.add(r.source, r.destination, r.payload);
        }
        self.route_strict("lenzen", &t)
    }

    pub fn route_strict(&mut self, label: &str, traffic: &Traffic) -> Result<u64> {
        let cap = self.batch_cap();
        for (dir, loads) in [
            (Direction::Send, &traffic.sent),
            (Direction::Receive, &traffic.received),
        ] {
            if let Some((v, &amount)) = loads.iter().enumerate().find(|(_, &w)| w > cap) {
                return Err(Error::OverloadedVertex {
                    vertex: v as Vertex,
                    direction: dir,
                    amount,
                    cap,
                });
            }
        }
        let batches = u64::from(traffic.total() > 0);
        Ok(self.commit(label, traffic, batches))
    }

    /// Splits the traffic into the fewest batches that each respect the
    /// per-vertex budget, `ceil(max load / c_L n)`, and charges them.
    pub fn route(&mut self, label: &str, traffic: &Traffic) -> u64 {
        let batches = traffic.max_load().div_ceil(self.batch_cap());
        self.commit(label, traffic, batches)
    }
}

/// Words needed to ship a vertex to a leader: its id, its neighbor list
/// inside the shipped subgraph, and enough of its palette for greedy.
fn ship_words(part_degree: usize, palette_len: usize) -> u64 {
    (1 + part_degree + palette_len.min(part_degree + 1)) as u64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelTrace {
    pub delta: usize,
    pub vertices: usize,
    pub words: u64,
    pub base: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leftover: Option<usize>,
    /// B-vertices the leader could not color from `Ψ(v) ∩ C_i`; they move
    /// to the next level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deferred: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueTrace {
    pub model: &'static str,
    pub path: &'static str,
    pub rounds: u64,
    pub batches: u64,
    #[serde(rename = "routedWords")]
    pub routed_words: u64,
    pub depth: usize,
    #[serde(rename = "perLevel")]
    pub per_level: Vec<LevelTrace>,
    pub unresolved: Vec<Vertex>,
    /// Whether `Δ` dropped at every level.
    pub monotone: bool,
    #[serde(rename = "baseReason", skip_serializing_if = "Option::is_none")]
    pub base_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lowdeg: Option<PipelineTrace>,
    #[serde(rename = "localSimulation", skip_serializing_if = "Option::is_none")]
    pub local_simulation: Option<LemmaConditions>,
}

/// Picks the high-degree recursion or the bidding path by the degree gate.
pub fn run_clique_coloring(
    instance: &ListColoringInstance,
    cfg: &CliqueConfig,
    seed: u64,
) -> Result<(Coloring, CliqueTrace)> {
    if instance.max_degree() as f64 >= cfg.highdeg_threshold(instance.n()) {
        run_highdeg_coloring(instance, cfg, seed)
    } else {
        run_lowdeg_coloring(instance, cfg, seed)
    }
}

/// Recursive partitioning: each `B_i` is gathered at its minimum-id vertex
/// and colored greedily from `Ψ(v) ∩ C_i`; `L` recurses on pruned palettes
/// until `Δ_L |V_L| <= c_stop n`, then one leader colors the rest.
pub fn run_highdeg_coloring(
    instance: &ListColoringInstance,
    cfg: &CliqueConfig,
    seed: u64,
) -> Result<(Coloring, CliqueTrace)> {
    let n = instance.n();
    let threshold = cfg.highdeg_threshold(n);
    if (instance.max_degree() as f64) < threshold {
        return Err(Error::DegreeTooLow {
            delta: instance.max_degree(),
            threshold,
        });
    }
    let g = instance.graph();
    let mut net = CliqueNetwork::from_config(n, cfg);
    let mut coloring = Coloring::new(n);
    let mut residual: Vec<Palette> = instance.palettes().to_vec();
    let mut active: Vec<Vertex> = (0..n as Vertex).collect();
    let mut per_level = Vec::new();
    let mut monotone = true;
    let mut base_reason = None;
    let mut prev_delta = usize::MAX;
    let mut depth = 0;
    let mut scratch = Vec::new();

    while !active.is_empty() {
        let sub_graph = g.induced(&active);
        let delta = sub_graph.max_degree();
        let sub_palettes: Vec<Palette> = active.iter().map(|&v| residual[v as usize].clone()).collect();
        let sub = ListColoringInstance::new_unchecked(sub_graph, sub_palettes);
        let mut level = LevelTrace {
            delta,
            vertices: active.len(),
            words: sub.words(),
            base: false,
            q: None,
            leftover: None,
            deferred: None,
        };
        if delta >= prev_delta {
            monotone = false;
        }
        let params = partition::derive_params(delta, n, cfg.gamma, cfg.partition.clone());
        let reason = if (delta * active.len()) as f64 <= cfg.c_stop * n as f64 {
            Some("stop threshold".to_string())
        } else if depth >= cfg.max_depth {
            Some("depth cap".to_string())
        } else if !monotone {
            Some("degree did not drop".to_string())
        } else {
            partition::check_precondition(&sub, &params).err().map(|e| e.to_string())
        };
        if let Some(reason) = reason {
            level.base = true;
            per_level.push(level);
            base_reason = Some(reason);
            let leader = active[0];
            let mut t = Traffic::new(n);
            for (i, &v) in active.iter().enumerate() {
                let d = sub.graph().degree(i as Vertex);
                t.add(v, leader, ship_words(d, residual[v as usize].len()));
            }
            net.route("base gather", &t);
            for &v in &active {
                let pal = residual[v as usize].as_slice();
                let c = smallest_free_color(g, &coloring, v, pal, &mut scratch)
                    .ok_or(Error::PaletteExhausted(v))?;
                coloring.set(v, c);
            }
            let mut t = Traffic::new(n);
            for &v in &active {
                t.add(leader, v, 1);
            }
            net.route("base reply", &t);
            break;
        }

        let out = partition::partition_unchecked(&sub, &params, rng::derive_seed(&[seed, depth as u64]))?;
        level.q = Some(params.q);
        level.leftover = Some(out.leftover.len());

        let mut t = Traffic::new(n);
        t.broadcast(active[0], out.color_seed.coefficients.len() as u64, &active);
        net.route("color seed broadcast", &t);

        // gather each B_i at its leader
        let mut t = Traffic::new(n);
        for members in &out.parts {
            let Some(&leader) = members.first() else { continue };
            for &lv in members {
                let gv = active[lv as usize];
                let d = out.part_degree[lv as usize];
                t.add(gv, active[leader as usize], ship_words(d, out.g[lv as usize]));
            }
        }
        net.route("part gather", &t);

        // leaders color their parts; the color classes are disjoint so the
        // parts do not interact
        let mut deferred = Vec::new();
        let mut newly = Vec::new();
        let mut t = Traffic::new(n);
        for members in &out.parts {
            let Some(&leader) = members.first() else { continue };
            for &lv in members {
                let gv = active[lv as usize];
                let pal = out.part_palette(&sub, lv);
                match smallest_free_color(g, &coloring, gv, &pal, &mut scratch) {
                    Some(c) => {
                        coloring.set(gv, c);
                        newly.push(gv);
                    }
                    None => deferred.push(gv),
                }
                t.add(active[leader as usize], gv, 1);
            }
        }
        net.route("part reply", &t);
        level.deferred = Some(deferred.len());

        let mut next: Vec<Vertex> = out.leftover.iter().map(|&lv| active[lv as usize]).collect();
        next.extend(deferred);
        next.sort_unstable();

        let mut t = Traffic::new(n);
        for &v in &newly {
            for &u in g.neighbors(v) {
                if coloring.get(u).is_none() {
                    t.add(v, u, 1);
                }
            }
        }
        net.route("palette pruning", &t);
        for &v in &next {
            let taken: Vec<Color> = {
                let mut c: Vec<Color> = g.neighbors(v).iter().filter_map(|&u| coloring.get(u)).collect();
                c.sort_unstable();
                c.dedup();
                c
            };
            residual[v as usize] = residual[v as usize].without(&taken);
        }

        per_level.push(level);
        prev_delta = delta;
        active = next;
        depth += 1;
    }

    debug_assert!(validate_coloring(instance, &coloring).is_valid_total());
    let trace = CliqueTrace {
        model: "clique",
        path: "highdeg",
        rounds: net.rounds(),
        batches: net.batches(),
        routed_words: net.routed_words(),
        depth,
        per_level,
        unresolved: Vec::new(),
        monotone,
        base_reason,
        lowdeg: None,
        local_simulation: None,
    };
    Ok((coloring, trace))
}

/// Bidding path: R-set exchange, `k` bidding iterations over N* edges, then
/// the uncolored remainder gathered at vertex 0 and colored greedily.
pub fn run_lowdeg_coloring(
    instance: &ListColoringInstance,
    cfg: &CliqueConfig,
    seed: u64,
) -> Result<(Coloring, CliqueTrace)> {
    let n = instance.n();
    let g = instance.graph();
    let mut net = CliqueNetwork::from_config(n, cfg);
    let run = bidding::run_bidding_pipeline(instance, &cfg.bidding, seed)?;

    let mut conditions = None;
    if let Some(state) = &run.state {
        let pre = &state.pre;
        let mut t = Traffic::new(n);
        for v in 0..n as Vertex {
            let words: u64 = pre.rsets[v as usize].iter().map(|s| s.len() as u64).sum();
            for &u in g.neighbors(v) {
                t.add(v, u, words);
            }
        }
        net.route("color sequence exchange", &t);
        for it in &run.trace.bidding.iterations {
            // status word plus S_w
            let words = it.c_i / 2 + 1;
            let mut t = Traffic::new(n);
            for u in 0..n as Vertex {
                for &w in &pre.nstar[u as usize] {
                    t.add(w, u, words);
                }
            }
            net.route("bidding iteration", &t);
        }
        let l_in = (0..n as Vertex)
            .map(|v| instance.palette(v).len() + g.degree(v))
            .max()
            .unwrap_or(0);
        conditions = Some(LemmaConditions::evaluate(
            n,
            state.max_nstar(),
            state.params.iterations(),
            l_in as u64,
            1,
        ));
    }

    let leader = 0;
    let mark = &run.leftover;
    let mut gather = Traffic::new(n);
    let mut reply = Traffic::new(n);
    for v in 0..n as Vertex {
        if mark[v as usize] {
            let d = g.degree_within(v, |u| mark[u as usize]);
            gather.add(v, leader, ship_words(d, instance.palette(v).len()));
            reply.add(leader, v, 1);
        }
    }
    net.route("cleanup gather", &gather);
    net.route("cleanup reply", &reply);
    let coloring = run.coloring;
    let pipeline = run.trace;

    let trace = CliqueTrace {
        model: "clique",
        path: "lowdeg",
        rounds: net.rounds(),
        batches: net.batches(),
        routed_words: net.routed_words(),
        depth: 0,
        per_level: vec![LevelTrace {
            delta: instance.max_degree(),
            vertices: n,
            words: instance.words(),
            base: true,
            q: None,
            leftover: None,
            deferred: None,
        }],
        unresolved: Vec::new(),
        monotone: true,
        base_reason: None,
        lowdeg: Some(pipeline),
        local_simulation: conditions,
    };
    Ok((coloring, trace))
}

/// A τ-round full-information local algorithm: each round a vertex sees the
/// previous states of the vertices it reads from.
pub trait LocalAlgorithm: Sync {
    type State: Clone + Send + Sync;
    type Output: Clone + PartialEq + Debug + Send + Sync;

    fn init(&self, v: Vertex) -> Self::State;
    fn step(
        &self,
        v: Vertex,
        round: usize,
        own: &Self::State,
        inbox: &[(Vertex, &Self::State)],
    ) -> Self::State;
    fn output(&self, v: Vertex, state: &Self::State) -> Self::Output;
}

/// Numeric form of the three conditions for O(1)-round simulation, each
/// expressed as a ratio that should stay bounded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaConditions {
    /// `Δ*^τ log2(Δ* + ℓ_in) / log2 n`.
    pub locality: f64,
    /// `ℓ_in / n`.
    pub input: f64,
    /// `ℓ_out` in words.
    pub output: u64,
}

impl LemmaConditions {
    pub fn evaluate(n: usize, delta_star: usize, tau: usize, l_in: u64, l_out: u64) -> Self {
        let log_n = (n.max(2) as f64).log2();
        LemmaConditions {
            locality: (delta_star as f64).powi(tau as i32) * ((delta_star as u64 + l_in).max(1) as f64).log2() / log_n,
            input: l_in as f64 / n.max(1) as f64,
            output: l_out,
        }
    }
}

pub struct SimulationTask<'a, A: LocalAlgorithm> {
    pub algorithm: &'a A,
    pub tau: usize,
    /// `reads[v]`: vertices whose state `v` receives each round.
    pub reads: Vec<Vec<Vertex>>,
    /// Input plus randomness per vertex, in words.
    pub l_in: u64,
    pub l_out: u64,
    pub p: f64,
}

impl<'a, A: LocalAlgorithm> SimulationTask<'a, A> {
    pub fn new(algorithm: &'a A, tau: usize, reads: Vec<Vec<Vertex>>, l_in: u64, l_out: u64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Parameter(format!("sampling probability {p} outside (0, 1]")));
        }
        Ok(SimulationTask {
            algorithm,
            tau,
            reads,
            l_in,
            l_out,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.reads.len()
    }

    pub fn delta_star(&self) -> usize {
        self.reads.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `ε / (Δ* + ℓ_in)`, with `ℓ_in` already in words.
    pub fn formula_p(delta_star: usize, l_in: u64, epsilon: f64) -> f64 {
        (epsilon / (delta_star as f64 + l_in as f64)).min(1.0)
    }

    pub fn conditions(&self) -> LemmaConditions {
        LemmaConditions::evaluate(self.n(), self.delta_star(), self.tau, self.l_in, self.l_out)
    }

    /// Vertices within `τ` read-hops of `u`, sorted.
    pub fn ball(&self, u: Vertex) -> Vec<Vertex> {
        let mut ball = vec![u];
        let mut frontier = vec![u];
        for _ in 0..self.tau {
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in &self.reads[x as usize] {
                    if !ball.contains(&y) && !next.contains(&y) {
                        next.push(y);
                    }
                }
            }
            ball.extend(&next);
            frontier = next;
        }
        ball.sort_unstable();
        ball
    }

    /// Runs the algorithm on the ball of `u` only and returns `u`'s output.
    pub fn simulate_ball(&self, u: Vertex, ball: &[Vertex]) -> A::Output {
        let alg = self.algorithm;
        let mut states: Vec<A::State> = ball.iter().map(|&v| alg.init(v)).collect();
        for round in 0..self.tau {
            let next: Vec<A::State> = ball
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let inbox: Vec<(Vertex, &A::State)> = self.reads[v as usize]
                        .iter()
                        .filter_map(|&w| ball.binary_search(&w).ok().map(|j| (w, &states[j])))
                        .collect();
                    alg.step(v, round, &states[i], &inbox)
                })
                .collect();
            states = next;
        }
        let i = ball.binary_search(&u).expect("u in its own ball");
        alg.output(u, &states[i])
    }
}

/// Plain synchronous execution over every vertex.
pub fn direct_execute<A: LocalAlgorithm>(task: &SimulationTask<'_, A>) -> Vec<A::Output> {
    let alg = task.algorithm;
    let n = task.n();
    let mut states: Vec<A::State> = (0..n as Vertex).map(|v| alg.init(v)).collect();
    for round in 0..task.tau {
        states = (0..n as Vertex)
            .into_par_iter()
            .map(|v| {
                let inbox: Vec<(Vertex, &A::State)> = task.reads[v as usize]
                    .iter()
                    .map(|&w| (w, &states[w as usize]))
                    .collect();
                alg.step(v, round, &states[v as usize], &inbox)
            })
            .collect();
    }
    (0..n as Vertex)
        .map(|v| alg.output(v, &states[v as usize]))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SimulationOutcome<O> {
    pub outputs: Vec<Option<O>>,
    /// Vertex that computed each output.
    pub holder: Vec<Option<Vertex>>,
    pub unresolved: Vec<Vertex>,
    pub rounds: u64,
}

impl<O: Clone> SimulationOutcome<O> {
    pub fn unresolved_fraction(&self) -> f64 {
        if self.outputs.is_empty() {
            0.0
        } else {
            self.unresolved.len() as f64 / self.outputs.len() as f64
        }
    }

    pub fn require_all(self) -> Result<Vec<O>> {
        if self.unresolved.is_empty() {
            Ok(self.outputs.into_iter().map(|o| o.expect("resolved")).collect())
        } else {
            Err(Error::UnresolvedVertices(self.unresolved))
        }
    }
}

/// Phase 1 ships each vertex's local information to every other vertex
/// independently with probability `p`. Phase 2 picks, for each `u`, the
/// minimum-id vertex holding the information of the whole τ-ball of `u`,
/// which computes `u`'s output and replies. Vertices without such a holder
/// are reported as unresolved.
pub fn opportunistic_simulate<A: LocalAlgorithm>(
    net: &mut CliqueNetwork,
    task: &SimulationTask<'_, A>,
    seed: u64,
) -> SimulationOutcome<A::Output> {
    let n = task.n();
    let start = net.rounds();
    if task.tau == 0 {
        let outputs = (0..n as Vertex)
            .map(|v| Some(task.algorithm.output(v, &task.algorithm.init(v))))
            .collect();
        return SimulationOutcome {
            outputs,
            holder: (0..n as Vertex).map(Some).collect(),
            unresolved: Vec::new(),
            rounds: 0,
        };
    }
    // holders[u]: sorted vertices holding u's information, u included
    let holders: Vec<Vec<Vertex>> = (0..n as Vertex)
        .into_par_iter()
        .map(|u| {
            let mut out = sample_targets(n, task.p, seed, u);
            if let Err(pos) = out.binary_search(&u) {
                out.insert(pos, u);
            }
            out
        })
        .collect();
    let info_words = (task.delta_star() as u64 + task.l_in).max(1);
    let mut t = Traffic::new(n);
    for (u, hs) in holders.iter().enumerate() {
        for &v in hs {
            t.add(u as Vertex, v, info_words);
        }
    }
    net.route("opportunistic spread", &t);

    let resolved: Vec<Option<(Vertex, A::Output)>> = (0..n as Vertex)
        .into_par_iter()
        .map(|u| {
            let ball = task.ball(u);
            let holder = holders[u as usize].iter().copied().find(|&v| {
                ball.iter()
                    .all(|&w| holders[w as usize].binary_search(&v).is_ok())
            })?;
            Some((holder, task.simulate_ball(u, &ball)))
        })
        .collect();
    let mut t = Traffic::new(n);
    let mut outputs = Vec::with_capacity(n);
    let mut holder = Vec::with_capacity(n);
    let mut unresolved = Vec::new();
    for (u, r) in resolved.into_iter().enumerate() {
        match r {
            Some((h, o)) => {
                t.add(h, u as Vertex, task.l_out);
                outputs.push(Some(o));
                holder.push(Some(h));
            }
            None => {
                unresolved.push(u as Vertex);
                outputs.push(None);
                holder.push(None);
            }
        }
    }
    net.route("opportunistic reply", &t);
    SimulationOutcome {
        outputs,
        holder,
        unresolved,
        rounds: net.rounds() - start,
    }
}

/// Each `v != u` independently with probability `p`, via geometric skips.
fn sample_targets(n: usize, p: f64, seed: u64, u: Vertex) -> Vec<Vertex> {
    if p >= 1.0 {
        return (0..n as Vertex).filter(|&v| v != u).collect();
    }
    let mut r = rng::stream(seed, rng::tag::OPPORTUNISTIC, u as u64, 0);
    let log_q = (1.0 - p).ln();
    let mut out = Vec::new();
    let mut pos: i64 = -1;
    loop {
        let x: f64 = r.gen();
        let skip = ((1.0 - x).ln() / log_q).floor() as i64;
        pos += skip + 1;
        // positions index the n-1 vertices other than u
        if pos >= n as i64 - 1 {
            break;
        }
        let v = if pos < u as i64 { pos } else { pos + 1 };
        out.push(v as Vertex);
    }
    out
}

/// Graph helper for tests and experiments: all neighbors as read sets.
pub fn reads_from_graph(g: &Graph) -> Vec<Vec<Vertex>> {
    (0..g.n() as Vertex).map(|v| g.neighbors(v).to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gnp;

    #[test]
    fn lenzen_examples() {
        let mut net = CliqueNetwork::new(10, 4.0, 2);
        let r = net
            .lenzen_route(&[RoutingRequest {
                source: 0,
                destination: 1,
                payload: 1,
            }])
            .unwrap();
        assert_eq!(r, 2);
        let all: Vec<RoutingRequest> = (0..10)
            .flat_map(|s| {
                (0..10).filter(move |&d| d != s).map(move |d| RoutingRequest {
                    source: s,
                    destination: d,
                    payload: 1,
                })
            })
            .collect();
        assert_eq!(net.lenzen_route(&all).unwrap(), 2);
        let flood: Vec<RoutingRequest> = (1..10)
            .map(|s| RoutingRequest {
                source: s,
                destination: 0,
                payload: 6,
            })
            .collect();
        assert!(matches!(
            net.lenzen_route(&flood),
            Err(Error::OverloadedVertex {
                vertex: 0,
                direction: Direction::Receive,
                ..
            })
        ));
        assert_eq!(net.rounds(), 4);
    }

    #[test]
    fn batched_route_counts() {
        let mut net = CliqueNetwork::new(10, 4.0, 2);
        let mut t = Traffic::new(10);
        for s in 1..10 {
            t.add(s, 0, 10);
        }
        // 90 words into one vertex with a budget of 40
        assert_eq!(net.route("x", &t), 6);
    }

    #[test]
    fn base_case_depth_zero() {
        let g = gnp(200, 0.02, 1).unwrap();
        let inst = ListColoringInstance::uniform(g);
        let cfg = CliqueConfig {
            c_high: 0.0,
            ..Default::default()
        };
        let (c, t) = run_highdeg_coloring(&inst, &cfg, 0).unwrap();
        assert!(validate_coloring(&inst, &c).is_valid_total());
        assert_eq!(t.depth, 0);
    }

    struct MinId;
    impl LocalAlgorithm for MinId {
        type State = Vertex;
        type Output = Vertex;
        fn init(&self, v: Vertex) -> Vertex {
            v
        }
        fn step(&self, _: Vertex, _: usize, own: &Vertex, inbox: &[(Vertex, &Vertex)]) -> Vertex {
            inbox.iter().map(|(_, s)| **s).fold(*own, Vertex::min)
        }
        fn output(&self, _: Vertex, s: &Vertex) -> Vertex {
            *s
        }
    }

    #[test]
    fn tau_zero_resolves_locally() {
        let g = gnp(50, 0.1, 2).unwrap();
        let task = SimulationTask::new(&MinId, 0, reads_from_graph(&g), 1, 1, 0.01).unwrap();
        let mut net = CliqueNetwork::new(50, 4.0, 2);
        let out = opportunistic_simulate(&mut net, &task, 0);
        assert!(out.unresolved.is_empty());
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn full_sampling_matches_direct() {
        let g = gnp(60, 0.05, 3).unwrap();
        let task = SimulationTask::new(&MinId, 2, reads_from_graph(&g), 1, 1, 1.0).unwrap();
        let mut net = CliqueNetwork::new(60, 4.0, 2);
        let out = opportunistic_simulate(&mut net, &task, 4);
        assert_eq!(out.require_all().unwrap(), direct_execute(&task));
    }

    #[test]
    fn target_sampling_excludes_self() {
        let t = sample_targets(100, 0.3, 5, 17);
        assert!(!t.contains(&17));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t.iter().all(|&v| v < 100));
    }
}
