//! Sparsified color bidding: the C-parameter sequence, SampleColors, the
//! per-iteration bidding step, the full multi-iteration procedure, N*(v)
//! construction, a replay restricted to N*(v), and honesty auditing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    sorted_difference, sorted_intersects, validate_coloring, Color, Coloring, Graph,
    ListColoringInstance, Palette, Vertex,
};
use crate::rng;
use crate::shattering::{self, BadSetReport, ShatterKnobs};

/// Below this excess floor the log-power parameters degenerate and the
/// instance is colored greedily instead.
pub const DEFAULT_P_STAR_FLOOR: u64 = 16;

/// The C-parameter sequence `C_0..C_{k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CSequence {
    pub values: Vec<u64>,
    /// `log2(p*)^β` before rounding.
    pub cap: f64,
    /// `2 * ceil(cap / 2) - 2`, the last value.
    pub target: u64,
}

impl CSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn round_even(x: f64) -> u64 {
    2 * (x / 2.0).ceil() as u64 - 2
}

/// `log2(p_star)`, exact when `p_star` is a power of two.
pub fn log2_exact(p_star: u64) -> f64 {
    if p_star.is_power_of_two() {
        f64::from(p_star.trailing_zeros())
    } else {
        (p_star as f64).log2()
    }
}

pub fn c_sequence(c0: u64, p_star: u64, beta: f64) -> Result<CSequence> {
    if p_star < 2 {
        return Err(Error::Parameter(format!("p* = {p_star} below 2")));
    }
    c_sequence_from_log2(c0, log2_exact(p_star), beta)
}

/// Same as [`c_sequence`] with `log2(p*)` given directly, so that very large
/// `p*` can be evaluated.
pub fn c_sequence_from_log2(c0: u64, log2_p_star: f64, beta: f64) -> Result<CSequence> {
    if c0 < 2 {
        return Err(Error::Parameter(format!("C0 = {c0} below 2")));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::Parameter(format!("β = {beta} not positive")));
    }
    let cap = log2_p_star.powf(beta);
    if cap.is_nan() || cap <= 2.0 {
        return Err(Error::Parameter(format!(
            "cap log^β p* = {cap:.3} leaves no positive even C"
        )));
    }
    let target = round_even(cap);
    if c0 > target {
        return Err(Error::Parameter(format!(
            "C0 = {c0} exceeds final value {target}"
        )));
    }
    let mut values = vec![c0];
    let mut c = c0;
    while c != target {
        let grown = 0.5 * (c as f64 / 6.0).exp() * c as f64;
        let next = round_even(grown.min(cap));
        if next <= c {
            return Err(Error::Parameter(format!(
                "sequence stalls at C = {c} (next {next}); raise C0"
            )));
        }
        values.push(next);
        c = next;
    }
    Ok(CSequence {
        values,
        cap,
        target,
    })
}

/// Scans `r` collecting distinct colors outside `s_minus` (sorted). Returns
/// `(T1, T)` in first-occurrence order, or two empty vectors when the scan
/// ends before `|T| = k2`.
pub fn sample_colors(
    k1: usize,
    k2: usize,
    s_minus: &[Color],
    r: impl IntoIterator<Item = Color>,
) -> (Vec<Color>, Vec<Color>) {
    debug_assert!(k1 <= k2);
    let mut t: Vec<Color> = Vec::with_capacity(k2);
    let mut t1 = Vec::new();
    for c in r {
        if s_minus.binary_search(&c).is_err() && !t.contains(&c) {
            t.push(c);
        }
        if t.len() == k1 && t1.len() != k1 {
            t1 = t.clone();
        }
        if t.len() == k2 {
            return (t1, t);
        }
    }
    (Vec::new(), Vec::new())
}

/// A DAG-oriented instance with per-vertex excess floors. Out-neighbors are
/// the lower-id neighbors.
#[derive(Clone, Debug)]
pub struct GoodInstance {
    pub graph: Graph,
    pub palettes: Vec<Palette>,
    pub p: Vec<u64>,
    pub p_star: u64,
    pub c0: u64,
    pub beta: f64,
    /// Public maximum degree used by the overload threshold.
    pub delta: usize,
    /// Identity whose random tape vertex `v` reads.
    pub tape_ids: Vec<Vertex>,
}

impl GoodInstance {
    /// Checks every invariant, including `Σ_{u∈N^out(v)} 1/p_u <= 1/C0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        graph: Graph,
        palettes: Vec<Palette>,
        p: Vec<u64>,
        p_star: u64,
        c0: u64,
        beta: f64,
        delta: usize,
    ) -> Result<Self> {
        let inst = Self::relaxed(graph, palettes, p, p_star, c0, beta, delta, None)?;
        if let Some(v) = inst.reciprocal_violators().first() {
            return Err(Error::InvalidInstance(format!(
                "vertex {v}: out-neighbor reciprocal excess above 1/C0"
            )));
        }
        Ok(inst)
    }

    /// Checks `p* <= p_v <= |Ψ(v)| - deg(v)` only. The reciprocal-excess
    /// condition is left to the honesty audit.
    #[allow(clippy::too_many_arguments)]
    pub fn relaxed(
        graph: Graph,
        palettes: Vec<Palette>,
        p: Vec<u64>,
        p_star: u64,
        c0: u64,
        beta: f64,
        delta: usize,
        tape_ids: Option<Vec<Vertex>>,
    ) -> Result<Self> {
        let n = graph.n();
        if palettes.len() != n || p.len() != n {
            return Err(Error::InvalidInstance("length mismatch".into()));
        }
        for v in 0..n {
            let excess = palettes[v].len() as i64 - graph.degree(v as Vertex) as i64;
            if (p[v] as i64) > excess || p[v] < p_star {
                return Err(Error::InvalidInstance(format!(
                    "vertex {v}: p_v = {} outside [{p_star}, {excess}]",
                    p[v]
                )));
            }
        }
        let tape_ids = tape_ids.unwrap_or_else(|| (0..n as Vertex).collect());
        if tape_ids.len() != n {
            return Err(Error::InvalidInstance("tape id length mismatch".into()));
        }
        Ok(GoodInstance {
            graph,
            palettes,
            p,
            p_star,
            c0,
            beta,
            delta,
            tape_ids,
        })
    }

    /// Treats a list-coloring instance as good with `p_v = |Ψ(v)| - deg(v)`
    /// and the public floor `p* = Δ' + 1 - Δ`.
    pub fn from_list_instance(instance: &ListColoringInstance, c0: u64, beta: f64) -> Result<Self> {
        let g = instance.graph();
        let p: Vec<u64> = (0..instance.n() as Vertex)
            .map(|v| (instance.palette(v).len() - g.degree(v)) as u64)
            .collect();
        Self::relaxed(
            g.clone(),
            instance.palettes().to_vec(),
            p,
            public_p_star(instance),
            c0,
            beta,
            instance.max_degree(),
            None,
        )
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Lower-id neighbors.
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        let nb = self.graph.neighbors(v);
        &nb[..nb.partition_point(|&u| u < v)]
    }

    pub fn reciprocal_sum(&self, v: Vertex, include: impl Fn(Vertex) -> bool) -> f64 {
        self.out_neighbors(v)
            .iter()
            .filter(|&&u| include(u))
            .map(|&u| 1.0 / self.p[u as usize] as f64)
            .sum()
    }

    pub fn reciprocal_violators(&self) -> Vec<Vertex> {
        let bound = 1.0 / self.c0 as f64 + 1e-12;
        (0..self.n() as Vertex)
            .filter(|&v| self.reciprocal_sum(v, |_| true) > bound)
            .collect()
    }

    /// `p* >= c * Δ / log2 Δ`.
    pub fn meets_excess_floor(&self, c: f64) -> bool {
        let d = self.delta.max(2) as f64;
        self.p_star as f64 >= c * d / d.log2()
    }

    pub fn to_list_instance(&self) -> Result<ListColoringInstance> {
        ListColoringInstance::with_inferred_floor(self.graph.clone(), self.palettes.clone())
    }
}

/// `Δ' + 1 - Δ` for an instance with palette floor `Δ'`, at least 1.
pub fn public_p_star(instance: &ListColoringInstance) -> u64 {
    ((instance.palette_floor() + 1).saturating_sub(instance.max_degree()) as u64).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodSpec {
    pub n: usize,
    pub delta: usize,
    pub palette_size: usize,
    pub c0: u64,
    pub beta: f64,
    /// Colors are drawn from `[0, universe)`; `None` gives every vertex the
    /// palette `[0, palette_size)`.
    pub universe: Option<usize>,
}

impl GoodSpec {
    pub fn new(n: usize, delta: usize, c0: u64, beta: f64) -> Self {
        GoodSpec {
            n,
            delta,
            palette_size: 2 * delta + 1,
            c0,
            beta,
            universe: None,
        }
    }
}

/// Random DAG with out-degree at most `(palette_size - Δ) / C0` towards
/// lower ids and total degree at most Δ, so `p_v >= palette_size - Δ` and
/// the reciprocal-excess condition holds by construction.
pub fn generate_good_instance(spec: &GoodSpec, seed: u64) -> Result<GoodInstance> {
    let GoodSpec {
        n,
        delta,
        palette_size,
        c0,
        beta,
        universe,
    } = spec.clone();
    if palette_size < delta + 1 {
        return Err(Error::InfeasibleSpec(format!(
            "palette size {palette_size} below Δ + 1 = {}",
            delta + 1
        )));
    }
    if c0 == 0 {
        return Err(Error::InfeasibleSpec("C0 must be positive".into()));
    }
    let universe = universe.unwrap_or(palette_size);
    if universe < palette_size {
        return Err(Error::InfeasibleSpec(format!(
            "universe {universe} smaller than palette size {palette_size}"
        )));
    }
    let out_cap = (palette_size - delta) / c0 as usize;
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let mut r = rng::stream(seed, rng::tag::GENERATOR, 2, v as u64);
        let mut chosen: Vec<usize> = Vec::with_capacity(out_cap);
        let mut tries = 0;
        while chosen.len() < out_cap && deg[v] < delta && tries < 8 * out_cap.max(1) {
            tries += 1;
            let u = r.gen_range(0..v);
            if deg[u] >= delta || chosen.contains(&u) {
                continue;
            }
            chosen.push(u);
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u as Vertex, v as Vertex));
        }
    }
    let graph = Graph::from_edges(n, edges)?;
    let palettes: Vec<Palette> = (0..n)
        .map(|v| {
            if universe == palette_size {
                Palette::range(0, palette_size as Color)
            } else {
                let mut r = rng::stream(seed, rng::tag::GENERATOR, 3, v as u64);
                let picks = rand::seq::index::sample(&mut r, universe, palette_size);
                Palette::new(picks.into_iter().map(|c| c as Color))
            }
        })
        .collect();
    let p: Vec<u64> = (0..n)
        .map(|v| (palette_size - graph.degree(v as Vertex)) as u64)
        .collect();
    let p_star = p.iter().copied().min().unwrap_or(palette_size as u64);
    let delta_public = graph.max_degree();
    GoodInstance::new(graph, palettes, p, p_star, c0, beta, delta_public)
}

/// Parameters shared by every vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiddingParams {
    pub p_star: u64,
    pub beta: f64,
    /// `ceil(log2(p*)^β)`, the size of `T`.
    pub k2: usize,
    /// `ceil(log2(p*)^3)`, the per-target scan factor.
    pub l3: usize,
    /// Sequence length `K = k2 * l3`.
    pub big_k: usize,
    /// `K^2 * ceil(log2 Δ)`.
    pub overload_threshold: u64,
    pub c_seq: CSequence,
}

impl BiddingParams {
    pub fn new(c0: u64, beta: f64, p_star: u64, delta: usize) -> Result<Self> {
        let c_seq = c_sequence(c0, p_star, beta)?;
        let l = log2_exact(p_star);
        let k2 = l.powf(beta).ceil() as usize;
        let l3 = l.powi(3).ceil() as usize;
        let big_k = k2 * l3;
        let log_delta = (delta.max(2) as f64).log2().ceil() as u64;
        Ok(BiddingParams {
            p_star,
            beta,
            k2,
            l3,
            big_k,
            overload_threshold: (big_k as u64).pow(2) * log_delta,
            c_seq,
        })
    }

    pub fn iterations(&self) -> usize {
        self.c_seq.len()
    }
}

/// Stream generating `R_v^(i)`; seeded from word `i` of `v`'s tape.
pub fn r_stream(tape_word: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tape_word)
}

/// The sequence `R_v^(i)` of length `len`, as an iterator.
pub fn r_sequence(palette: &[Color], tape_word: u64, len: usize) -> impl Iterator<Item = Color> + '_ {
    let mut r = r_stream(tape_word);
    let m = palette.len();
    (0..len).map(move |_| palette[r.gen_range(0..m)])
}

/// Distinct colors of `R_v^(i)`, sorted. Stops early once every palette
/// color has appeared, since later entries cannot add anything.
pub fn r_set(palette: &[Color], tape_word: u64, len: usize) -> Vec<Color> {
    let m = palette.len();
    if m == 0 {
        return Vec::new();
    }
    let mut seen = vec![false; m];
    let mut count = 0;
    let mut r = r_stream(tape_word);
    for _ in 0..len {
        let j = r.gen_range(0..m);
        if !seen[j] {
            seen[j] = true;
            count += 1;
            if count == m {
                break;
            }
        }
    }
    palette
        .iter()
        .zip(seen)
        .filter(|(_, s)| *s)
        .map(|(&c, _)| c)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Colored { color: Color, iteration: u32 },
    Bad { iteration: u32 },
}

/// What happened at one iteration. Per-vertex vectors are indexed by vertex;
/// entries for vertices inactive at the start of the iteration are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub i: usize,
    pub c: u64,
    pub active: Vec<bool>,
    pub s: Vec<Vec<Color>>,
    pub t: Vec<Vec<Color>>,
    pub lazy: Vec<bool>,
    pub not_rich: Vec<bool>,
    pub lucky: Vec<bool>,
}

/// Everything fixed before the first iteration: the sampled color sets, the
/// significant neighbors, the overload flags and N*(v).
#[derive(Clone, Debug)]
pub struct Preprocessed {
    /// `rsets[v][i]`: distinct colors of `R_v^(i)`.
    pub rsets: Vec<Vec<Vec<Color>>>,
    /// `significant[i][v]`, sorted.
    pub significant: Vec<Vec<Vec<Vertex>>>,
    /// `overloaded[i][v]`.
    pub overloaded: Vec<Vec<bool>>,
    pub nstar: Vec<Vec<Vertex>>,
}

#[derive(Clone, Debug)]
pub struct BiddingState {
    pub params: BiddingParams,
    pub status: Vec<Status>,
    pub pre: Preprocessed,
    pub iterations: Vec<IterationRecord>,
}

impl BiddingState {
    pub fn compute_nstar(&self, v: Vertex) -> &[Vertex] {
        &self.pre.nstar[v as usize]
    }

    pub fn max_nstar(&self) -> usize {
        self.pre.nstar.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether `v` was active at the start of iteration `i`.
    pub fn active_at(&self, v: Vertex, i: usize) -> bool {
        match self.status[v as usize] {
            Status::Active => true,
            Status::Colored { iteration, .. } | Status::Bad { iteration } => i <= iteration as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    pub i: usize,
    #[serde(rename = "C_i")]
    pub c_i: u64,
    pub active: usize,
    pub colored: usize,
    pub bad: usize,
    pub overloaded: usize,
    pub lazy: usize,
    #[serde(rename = "notRich")]
    pub not_rich: usize,
    #[serde(rename = "maxNstar")]
    pub max_nstar: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiddingTrace {
    pub params: Option<BiddingParams>,
    pub iterations: Vec<IterationTrace>,
    /// Set when p* was too small and the instance was colored greedily.
    pub greedy_fallback: bool,
    pub uncolored: usize,
    pub bad: usize,
}

pub struct BiddingOutcome {
    pub coloring: Coloring,
    /// Vertices that marked themselves Bad, ascending.
    pub bad: Vec<Vertex>,
    pub state: BiddingState,
    pub trace: BiddingTrace,
}

impl BiddingOutcome {
    /// Vertices left uncolored: Bad ones plus those still active at the end.
    pub fn uncolored(&self) -> Vec<Vertex> {
        self.coloring.uncolored().collect()
    }
}

/// Samples all color sets and derives significance, overload flags and N*.
pub fn preprocess(inst: &GoodInstance, params: &BiddingParams, master_seed: u64) -> Preprocessed {
    let n = inst.n();
    let k = params.iterations();
    let rsets: Vec<Vec<Vec<Color>>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let pal = inst.palettes[v].as_slice();
            (0..k)
                .map(|i| {
                    let w = rng::tape_word(master_seed, inst.tape_ids[v], i as u64);
                    r_set(pal, w, params.big_k)
                })
                .collect()
        })
        .collect();
    // cumulative[v][i] = union of rsets[v][0..=i]
    let cumulative: Vec<Vec<Vec<Color>>> = rsets
        .par_iter()
        .map(|per| {
            let mut acc: Vec<Color> = Vec::new();
            per.iter()
                .map(|s| {
                    acc = merge_sorted(&acc, s);
                    acc.clone()
                })
                .collect()
        })
        .collect();
    let significant: Vec<Vec<Vec<Vertex>>> = (0..k)
        .map(|i| {
            (0..n as Vertex)
                .into_par_iter()
                .map(|v| {
                    let mine = &rsets[v as usize][i];
                    inst.graph
                        .neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&u| sorted_intersects(mine, &cumulative[u as usize][i]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let overloaded: Vec<Vec<bool>> = significant
        .iter()
        .map(|per| {
            per.iter()
                .map(|s: &Vec<Vertex>| s.len() as u64 > params.overload_threshold)
                .collect()
        })
        .collect();
    let nstar = (0..n)
        .map(|v| {
            let mut set: Vec<Vertex> = (0..k)
                .filter(|&i| !overloaded[i][v])
                .flat_map(|i| significant[i][v].iter().copied())
                .collect();
            set.sort_unstable();
            set.dedup();
            set
        })
        .collect();
    Preprocessed {
        rsets,
        significant,
        overloaded,
        nstar,
    }
}

fn merge_sorted(a: &[Color], b: &[Color]) -> Vec<Color> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

/// Which neighbors a vertex may read during the main steps.
#[derive(Clone, Copy, PartialEq, Eq)]
enum View {
    Full,
    NStar,
}

/// One iteration of bidding over the vertices active in `status`. Colors
/// adopted here become visible from the next iteration on.
fn bidding_step(
    inst: &GoodInstance,
    params: &BiddingParams,
    pre: &Preprocessed,
    master_seed: u64,
    i: usize,
    status: &mut [Status],
    view: View,
) -> IterationRecord {
    let n = inst.n();
    let c = params.c_seq.values[i];
    let k1 = (c / 2) as usize;
    let readable = |v: Vertex| -> &[Vertex] {
        match view {
            View::Full => inst.graph.neighbors(v),
            View::NStar => &pre.nstar[v as usize],
        }
    };
    let active: Vec<bool> = status.iter().map(|s| *s == Status::Active).collect();

    // step 1: sample (S_v, T_v)
    let sampled: Vec<(Vec<Color>, Vec<Color>)> = (0..n as Vertex)
        .into_par_iter()
        .map(|v| {
            if !active[v as usize] || pre.overloaded[i][v as usize] {
                return (Vec::new(), Vec::new());
            }
            let mut taken: Vec<Color> = readable(v)
                .iter()
                .filter_map(|&u| match status[u as usize] {
                    Status::Colored { color, .. } => Some(color),
                    _ => None,
                })
                .collect();
            taken.sort_unstable();
            taken.dedup();
            let w = rng::tape_word(master_seed, inst.tape_ids[v as usize], i as u64);
            let pal = inst.palettes[v as usize].as_slice();
            let (mut s, mut t) = sample_colors(k1, params.k2, &taken, r_sequence(pal, w, params.big_k));
            s.sort_unstable();
            t.sort_unstable();
            (s, t)
        })
        .collect();

    // steps 2-4: compare against out-neighbors' S sets
    let decisions: Vec<(bool, bool, Option<Color>)> = (0..n as Vertex)
        .into_par_iter()
        .map(|v| {
            if !active[v as usize] {
                return (false, false, None);
            }
            let (s, t) = &sampled[v as usize];
            let lazy = s.is_empty();
            let mut blocked: Vec<Color> = readable(v)
                .iter()
                .copied()
                .filter(|&u| u < v && active[u as usize])
                .flat_map(|u| sampled[u as usize].0.iter().copied())
                .collect();
            blocked.sort_unstable();
            blocked.dedup();
            let free_t = sorted_difference(t, &blocked).len();
            let rich = 3 * free_t >= t.len();
            if lazy || !rich {
                return (lazy, !rich, None);
            }
            let lucky = sorted_difference(s, &blocked).first().copied();
            (false, false, lucky)
        })
        .collect();

    let mut rec = IterationRecord {
        i,
        c,
        active,
        s: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        lazy: vec![false; n],
        not_rich: vec![false; n],
        lucky: vec![false; n],
    };
    for (v, (lazy, not_rich, lucky)) in decisions.into_iter().enumerate() {
        if !rec.active[v] {
            continue;
        }
        rec.lazy[v] = lazy;
        rec.not_rich[v] = not_rich;
        if lazy || not_rich {
            status[v] = Status::Bad {
                iteration: i as u32,
            };
        } else if let Some(color) = lucky {
            rec.lucky[v] = true;
            status[v] = Status::Colored {
                color,
                iteration: i as u32,
            };
        }
    }
    for (s, t) in sampled {
        rec.s.push(s);
        rec.t.push(t);
    }
    rec
}

fn run(inst: &GoodInstance, master_seed: u64, view: View) -> Result<BiddingOutcome> {
    let n = inst.n();
    let params = BiddingParams::new(inst.c0, inst.beta, inst.p_star, inst.delta)?;
    let pre = preprocess(inst, &params, master_seed);
    let max_nstar = pre.nstar.iter().map(Vec::len).max().unwrap_or(0);
    let mut status = vec![Status::Active; n];
    let mut iterations = Vec::with_capacity(params.iterations());
    let mut traces = Vec::with_capacity(params.iterations());
    for i in 0..params.iterations() {
        let rec = bidding_step(inst, &params, &pre, master_seed, i, &mut status, view);
        let count = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&v| rec.active[v] && f(v)).count();
        traces.push(IterationTrace {
            i,
            c_i: rec.c,
            active: rec.active.iter().filter(|&&a| a).count(),
            colored: count(&|v| rec.lucky[v]),
            bad: count(&|v| rec.lazy[v] || rec.not_rich[v]),
            overloaded: count(&|v| pre.overloaded[i][v]),
            lazy: count(&|v| rec.lazy[v]),
            not_rich: count(&|v| rec.not_rich[v]),
            max_nstar,
        });
        iterations.push(rec);
    }
    let mut coloring = Coloring::new(n);
    let mut bad = Vec::new();
    for (v, s) in status.iter().enumerate() {
        match *s {
            Status::Colored { color, .. } => coloring.set(v as Vertex, color),
            Status::Bad { .. } => bad.push(v as Vertex),
            Status::Active => {}
        }
    }
    let trace = BiddingTrace {
        params: Some(params.clone()),
        iterations: traces,
        greedy_fallback: false,
        uncolored: n - coloring.colored_count(),
        bad: bad.len(),
    };
    Ok(BiddingOutcome {
        coloring,
        bad,
        state: BiddingState {
            params,
            status,
            pre,
            iterations,
        },
        trace,
    })
}

/// All iterations of bidding with every vertex reading its full
/// neighborhood. Leaves Bad and never-lucky vertices uncolored.
pub fn sparsified_coloring(inst: &GoodInstance, master_seed: u64) -> Result<BiddingOutcome> {
    run(inst, master_seed, View::Full)
}

/// The same procedure, except that each vertex reads only the state of
/// N*(v) during the main steps.
pub fn replay_with_nstar(inst: &GoodInstance, master_seed: u64) -> Result<BiddingOutcome> {
    run(inst, master_seed, View::NStar)
}

/// The subset of state that must agree between a full run and a replay.
pub fn outcome_fingerprint(o: &BiddingOutcome) -> (Vec<Status>, Vec<IterationRecord>) {
    (o.state.status.clone(), o.state.iterations.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HonestyEntry {
    pub v: Vertex,
    pub reciprocal_sum: f64,
    pub max_significant: usize,
    pub honest_sum: bool,
    pub honest_significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HonestyAudit {
    pub iteration: usize,
    pub c_target: u64,
    pub d_target: u64,
    pub entries: Vec<HonestyEntry>,
}

impl HonestyAudit {
    pub fn violators(&self) -> impl Iterator<Item = &HonestyEntry> {
        self.entries
            .iter()
            .filter(|e| !(e.honest_sum && e.honest_significant))
    }

    pub fn violation_rate(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.violators().count() as f64 / self.entries.len() as f64
        }
    }
}

/// Checks `(C_i, D_i)`-honesty, with `D_i = 2 K i`, for every vertex active
/// at the start of iteration `i`. Significance counts use iterations before
/// `i`.
pub fn audit_honesty(inst: &GoodInstance, state: &BiddingState, i: usize) -> HonestyAudit {
    let c = state.params.c_seq.values[i];
    let d = 2 * state.params.big_k as u64 * i as u64;
    let rec = &state.iterations[i];
    let entries = (0..inst.n() as Vertex)
        .into_par_iter()
        .filter(|&v| rec.active[v as usize])
        .map(|v| {
            let sum = inst.reciprocal_sum(v, |u| rec.active[u as usize]);
            let mut colors: Vec<Color> = Vec::new();
            for &u in inst.graph.neighbors(v) {
                let mut seen: Vec<Color> = state.pre.rsets[u as usize][..i].concat();
                seen.sort_unstable();
                seen.dedup();
                colors.extend(seen);
            }
            colors.sort_unstable();
            let own = inst.palettes[v as usize].as_slice();
            let mut max_run = 0;
            let mut j = 0;
            while j < colors.len() {
                let mut e = j;
                while e < colors.len() && colors[e] == colors[j] {
                    e += 1;
                }
                if own.binary_search(&colors[j]).is_ok() {
                    max_run = max_run.max(e - j);
                }
                j = e;
            }
            HonestyEntry {
                v,
                reciprocal_sum: sum,
                max_significant: max_run,
                honest_sum: sum <= 1.0 / c as f64 + 1e-12,
                honest_significant: max_run as u64 <= d,
            }
        })
        .collect();
    HonestyAudit {
        iteration: i,
        c_target: c,
        d_target: d,
        entries,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiddingKnobs {
    pub c0: u64,
    pub beta: f64,
    pub p_star_floor: u64,
    pub shatter: ShatterKnobs,
}

impl Default for BiddingKnobs {
    fn default() -> Self {
        BiddingKnobs {
            c0: 8,
            beta: 2.0,
            p_star_floor: DEFAULT_P_STAR_FLOOR,
            shatter: ShatterKnobs::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineTrace {
    pub model: &'static str,
    pub bidding: BiddingTrace,
    pub bad_set: BadSetReport,
}

pub struct PipelineRun {
    pub coloring: Coloring,
    pub trace: PipelineTrace,
    /// Vertices left uncolored by bidding and handed to the cleanup.
    pub leftover: Vec<bool>,
    /// Bidding state; `None` on the greedy fallback.
    pub state: Option<BiddingState>,
}

/// Full sequential pipeline on a list-coloring instance: bidding with
/// `p_v = |Ψ(v)| - deg(v)` and the public floor, then greedy cleanup of
/// everything left uncolored in ascending id. Instances whose floor is
/// below `p_star_floor` are colored greedily outright.
pub fn run_bidding_pipeline(
    instance: &ListColoringInstance,
    knobs: &BiddingKnobs,
    master_seed: u64,
) -> Result<PipelineRun> {
    let n = instance.n();
    let p_star = public_p_star(instance);
    let (mut coloring, bidding, leftover, state) = if p_star < knobs.p_star_floor || n == 0 {
        let trace = BiddingTrace {
            params: None,
            iterations: Vec::new(),
            greedy_fallback: true,
            uncolored: n,
            bad: 0,
        };
        (Coloring::new(n), trace, vec![true; n], None)
    } else {
        let good = GoodInstance::from_list_instance(instance, knobs.c0, knobs.beta)?;
        let out = sparsified_coloring(&good, master_seed)?;
        let mut mask = vec![false; n];
        for v in out.coloring.uncolored() {
            mask[v as usize] = true;
        }
        (out.coloring, out.trace, mask, Some(out.state))
    };
    let bad_mask = if state.is_some() { leftover.clone() } else { vec![false; n] };
    let bad_set = shattering::analyze_bad_set(instance.graph(), &bad_mask, &knobs.shatter);
    shattering::color_components(instance, &mut coloring)?;
    debug_assert!(validate_coloring(instance, &coloring).is_valid_total());
    Ok(PipelineRun {
        coloring,
        trace: PipelineTrace {
            model: "bidding",
            bidding,
            bad_set,
        },
        leftover,
        state,
    })
}

pub fn color_with_bidding(
    instance: &ListColoringInstance,
    knobs: &BiddingKnobs,
    master_seed: u64,
) -> Result<(Coloring, PipelineTrace)> {
    let run = run_bidding_pipeline(instance, knobs, master_seed)?;
    Ok((run.coloring, run.trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_sequence_examples() {
        let s = c_sequence_from_log2(6, 100f64.powf(1.0), 1.0).unwrap();
        assert_eq!(s.values[1], 8);
        let s = c_sequence(6, 1 << 63, 1.0).unwrap();
        assert_eq!(*s.values.last().unwrap(), 62);
        assert!(s.values.windows(2).all(|w| w[0] < w[1]));
        assert!(s.len() <= 10);
        // C0 = 4 shrinks on the first step
        assert!(c_sequence(4, 1 << 63, 1.0).is_err());
        let fixed = c_sequence(62, 1 << 63, 1.0).unwrap();
        assert_eq!(fixed.values, vec![62]);
        assert!(c_sequence(2, 4, 1.0).is_err());
    }

    #[test]
    fn sample_colors_examples() {
        let (t1, t) = sample_colors(2, 3, &[], [1, 2, 3, 4, 5]);
        assert_eq!((t1, t), (vec![1, 2], vec![1, 2, 3]));
        let (t1, t) = sample_colors(1, 2, &[1, 2], [1, 2, 1]);
        assert!(t1.is_empty() && t.is_empty());
        let (t1, t) = sample_colors(1, 2, &[], [5, 5, 5, 1, 2]);
        assert_eq!((t1, t), (vec![5], vec![5, 1]));
    }

    #[test]
    fn r_set_matches_sequence() {
        let pal: Vec<Color> = (10..40).collect();
        let seq: Vec<Color> = r_sequence(&pal, 99, 50).collect();
        let mut distinct = seq.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(r_set(&pal, 99, 50), distinct);
        let full = r_set(&pal, 99, 10_000);
        assert_eq!(full, pal);
    }

    #[test]
    fn edgeless_all_lucky_first_iteration() {
        let spec = GoodSpec::new(50, 0, 8, 2.0);
        let mut spec = spec;
        spec.palette_size = 64;
        let inst = generate_good_instance(&spec, 1).unwrap();
        let out = sparsified_coloring(&inst, 3).unwrap();
        assert!(out.coloring.is_total());
        assert!(out.state.status.iter().all(|s| matches!(s, Status::Colored { iteration: 0, .. })));
    }

    #[test]
    fn generated_instance_is_good() {
        let inst = generate_good_instance(&GoodSpec::new(2000, 32, 8, 2.0), 5).unwrap();
        assert!(inst.reciprocal_violators().is_empty());
        assert!(inst.graph.max_degree() <= 32);
        assert!(inst.meets_excess_floor(1.0));
    }

    #[test]
    fn single_vertex_instance() {
        let inst = generate_good_instance(&GoodSpec::new(1, 4, 8, 1.0), 0).unwrap();
        assert_eq!(inst.p, vec![9]);
    }
}
