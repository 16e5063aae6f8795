//! Local computation: a probe-counting oracle over an instance and a
//! per-vertex coloring procedure that reproduces the bidding pipeline's
//! global output from local exploration alone.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bidding::{self, BiddingKnobs, BiddingParams};
use crate::error::{Error, Result};
use crate::graph::{sorted_difference, sorted_intersects, Color, ListColoringInstance, Palette, Vertex};
use crate::rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    pub degree: u64,
    pub neighbor: u64,
    pub palette: u64,
    pub randomness: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.degree + self.neighbor + self.palette + self.randomness
    }
}

/// Read-only access to an instance, one counted probe at a time. The public
/// parameters `n`, `Δ` and the palette floor are free.
pub struct LcaOracle<'a> {
    instance: &'a ListColoringInstance,
    master_seed: u64,
    totals: [AtomicU64; 4],
}

impl<'a> LcaOracle<'a> {
    pub fn new(instance: &'a ListColoringInstance, master_seed: u64) -> Self {
        LcaOracle {
            instance,
            master_seed,
            totals: Default::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn max_degree(&self) -> usize {
        self.instance.max_degree()
    }

    pub fn palette_floor(&self) -> usize {
        self.instance.palette_floor()
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v as u64,
                n: self.n(),
            })
        }
    }

    fn bump(&self, kind: usize) {
        self.totals[kind].fetch_add(1, Ordering::Relaxed);
    }

    pub fn degree_query(&self, v: Vertex) -> Result<usize> {
        self.check(v)?;
        self.bump(0);
        Ok(self.instance.graph().degree(v))
    }

    /// The `i`-th neighbor of `v`, 1-based; `None` past the degree.
    pub fn neighbor_query(&self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        self.check(v)?;
        self.bump(1);
        Ok(i.checked_sub(1)
            .and_then(|j| self.instance.graph().neighbors(v).get(j).copied()))
    }

    pub fn palette_query(&self, v: Vertex) -> Result<&'a Palette> {
        self.check(v)?;
        self.bump(2);
        Ok(self.instance.palette(v))
    }

    /// Words `offset..offset+len` of `v`'s random tape.
    pub fn randomness(&self, v: Vertex, offset: u64, len: usize) -> Result<Vec<u64>> {
        self.check(v)?;
        self.bump(3);
        Ok((0..len as u64)
            .map(|j| rng::tape_word(self.master_seed, v, offset + j))
            .collect())
    }

    pub fn totals(&self) -> QueryCounts {
        let t = |i: usize| self.totals[i].load(Ordering::Relaxed);
        QueryCounts {
            degree: t(0),
            neighbor: t(1),
            palette: t(2),
            randomness: t(3),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LcaConfig {
    pub bidding: BiddingKnobs,
    /// Probe budget per call is `c_query Δ^3 ceil(log2 n)`.
    pub c_query: f64,
    /// Bad-component exploration stops past `c_comp Δ^2 ceil(log_Δ n)`
    /// vertices.
    pub c_comp: f64,
    /// Share derived state across the calls of a sweep.
    pub shared_memo: bool,
}

impl Default for LcaConfig {
    fn default() -> Self {
        LcaConfig {
            bidding: BiddingKnobs::default(),
            c_query: 3.0,
            c_comp: 2.0,
            shared_memo: false,
        }
    }
}

impl LcaConfig {
    pub fn probe_budget(&self, n: usize, delta: usize) -> u64 {
        let log_n = (n.max(2) as f64).log2().ceil();
        (self.c_query * (delta.max(2) as f64).powi(3) * log_n).ceil() as u64
    }

    pub fn component_cap(&self, n: usize, delta: usize) -> usize {
        let d = delta.max(2) as f64;
        let log_d_n = ((n.max(2) as f64).ln() / d.ln()).ceil();
        (self.c_comp * d * d * log_d_n).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcaAnswer {
    pub vertex: Vertex,
    pub color: Color,
    pub queries: QueryCounts,
    /// Largest hop distance from the queried vertex among probed vertices.
    #[serde(rename = "explorationRadius")]
    pub exploration_radius: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Active,
    Colored(Color),
    Bad,
}

/// Scratch state of one call. Every instance read goes through the oracle.
struct Session<'o, 'a> {
    oracle: &'o LcaOracle<'a>,
    params: Option<BiddingParams>,
    budget: u64,
    root: Vertex,
    counts: QueryCounts,
    dist: HashMap<Vertex, usize>,
    radius: usize,
    neighbors: HashMap<Vertex, Vec<Vertex>>,
    palettes: HashMap<Vertex, &'a Palette>,
    tapes: HashMap<Vertex, Vec<u64>>,
    rsets: HashMap<Vertex, Vec<Vec<Color>>>,
    cumulative: HashMap<Vertex, Vec<Vec<Color>>>,
    nstar: HashMap<Vertex, (Vec<Vertex>, Vec<bool>)>,
    /// `stage[(v, i)]`: state at the start of iteration `i`.
    stage: HashMap<(Vertex, usize), Stage>,
    sampled: HashMap<(Vertex, usize), Vec<Color>>,
    sampled_t: HashMap<(Vertex, usize), Vec<Color>>,
    component_cap: usize,
    /// Colors fixed by component greedy, reused only under a shared memo.
    cleanup: HashMap<Vertex, Color>,
}

impl<'o, 'a> Session<'o, 'a> {
    fn charge(&mut self) -> Result<()> {
        if self.counts.total() >= self.budget {
            return Err(Error::QueryBudgetExceeded {
                vertex: self.root,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn touch(&mut self, v: Vertex) {
        let d = self.dist.get(&v).copied().unwrap_or(0);
        self.radius = self.radius.max(d);
    }

    fn neighbors(&mut self, v: Vertex) -> Result<Vec<Vertex>> {
        if let Some(nb) = self.neighbors.get(&v) {
            return Ok(nb.clone());
        }
        self.charge()?;
        self.counts.degree += 1;
        self.touch(v);
        let d = self.oracle.degree_query(v)?;
        let mut nb = Vec::with_capacity(d);
        for i in 1..=d {
            self.charge()?;
            self.counts.neighbor += 1;
            nb.push(self.oracle.neighbor_query(v, i)?.expect("index within degree"));
        }
        let here = self.dist.get(&v).copied().unwrap_or(0);
        for &u in &nb {
            self.dist.entry(u).or_insert(here + 1);
        }
        self.neighbors.insert(v, nb.clone());
        Ok(nb)
    }

    fn palette(&mut self, v: Vertex) -> Result<&'a Palette> {
        if let Some(p) = self.palettes.get(&v) {
            return Ok(p);
        }
        self.charge()?;
        self.counts.palette += 1;
        self.touch(v);
        let p = self.oracle.palette_query(v)?;
        self.palettes.insert(v, p);
        Ok(p)
    }

    fn tape(&mut self, v: Vertex, k: usize) -> Result<Vec<u64>> {
        if let Some(t) = self.tapes.get(&v) {
            return Ok(t.clone());
        }
        self.charge()?;
        self.counts.randomness += 1;
        self.touch(v);
        let t = self.oracle.randomness(v, 0, k)?;
        self.tapes.insert(v, t.clone());
        Ok(t)
    }

    fn params(&self) -> &BiddingParams {
        self.params.as_ref().expect("bidding enabled")
    }

    fn ensure_rsets(&mut self, v: Vertex) -> Result<()> {
        if self.rsets.contains_key(&v) {
            return Ok(());
        }
        let (k, big_k) = (self.params().iterations(), self.params().big_k);
        let pal = self.palette(v)?;
        let tape = self.tape(v, k)?;
        let sets: Vec<Vec<Color>> = tape
            .iter()
            .map(|&w| bidding::r_set(pal.as_slice(), w, big_k))
            .collect();
        let mut acc: Vec<Color> = Vec::new();
        let cum = sets
            .iter()
            .map(|s| {
                acc.extend(s);
                acc.sort_unstable();
                acc.dedup();
                acc.clone()
            })
            .collect();
        self.rsets.insert(v, sets);
        self.cumulative.insert(v, cum);
        Ok(())
    }

    /// N*(v) and the per-iteration overload flags.
    fn nstar(&mut self, v: Vertex) -> Result<(Vec<Vertex>, Vec<bool>)> {
        if let Some(x) = self.nstar.get(&v) {
            return Ok(x.clone());
        }
        let k = self.params().iterations();
        let threshold = self.params().overload_threshold;
        let nb = self.neighbors(v)?;
        self.ensure_rsets(v)?;
        for &u in &nb {
            self.ensure_rsets(u)?;
        }
        let mut overloaded = vec![false; k];
        let mut set = Vec::new();
        for (i, over) in overloaded.iter_mut().enumerate() {
            let mine = &self.rsets[&v][i];
            let sig: Vec<Vertex> = nb
                .iter()
                .copied()
                .filter(|u| sorted_intersects(mine, &self.cumulative[u][i]))
                .collect();
            *over = sig.len() as u64 > threshold;
            if !*over {
                set.extend(sig);
            }
        }
        set.sort_unstable();
        set.dedup();
        self.nstar.insert(v, (set.clone(), overloaded.clone()));
        Ok((set, overloaded))
    }

    /// `S_v^(i)` for a vertex active at the start of iteration `i`.
    fn sample(&mut self, v: Vertex, i: usize) -> Result<Vec<Color>> {
        if let Some(s) = self.sampled.get(&(v, i)) {
            return Ok(s.clone());
        }
        let (nstar, overloaded) = self.nstar(v)?;
        let (s, t) = if overloaded[i] {
            (Vec::new(), Vec::new())
        } else {
            let mut taken = Vec::new();
            for &u in &nstar {
                if let Stage::Colored(c) = self.stage(u, i)? {
                    taken.push(c);
                }
            }
            taken.sort_unstable();
            taken.dedup();
            let p = self.params();
            let (k1, k2, big_k) = ((p.c_seq.values[i] / 2) as usize, p.k2, p.big_k);
            let pal = self.palette(v)?;
            let w = self.tape(v, self.params().iterations())?[i];
            let (mut s, mut t) =
                bidding::sample_colors(k1, k2, &taken, bidding::r_sequence(pal.as_slice(), w, big_k));
            s.sort_unstable();
            t.sort_unstable();
            (s, t)
        };
        self.sampled.insert((v, i), s.clone());
        self.sampled_t.insert((v, i), t);
        Ok(s)
    }

    fn stage(&mut self, v: Vertex, i: usize) -> Result<Stage> {
        if i == 0 {
            return Ok(Stage::Active);
        }
        if let Some(&s) = self.stage.get(&(v, i)) {
            return Ok(s);
        }
        let prev = self.stage(v, i - 1)?;
        let next = if prev != Stage::Active {
            prev
        } else {
            self.decide(v, i - 1)?
        };
        self.stage.insert((v, i), next);
        Ok(next)
    }

    /// Outcome of iteration `i` for `v`, active at its start.
    fn decide(&mut self, v: Vertex, i: usize) -> Result<Stage> {
        let s = self.sample(v, i)?;
        let t = self.sampled_t[&(v, i)].clone();
        if s.is_empty() {
            return Ok(Stage::Bad);
        }
        let (nstar, _) = self.nstar(v)?;
        let mut blocked = Vec::new();
        for &u in nstar.iter().filter(|&&u| u < v) {
            if self.stage(u, i)? == Stage::Active {
                blocked.extend(self.sample(u, i)?);
            }
        }
        blocked.sort_unstable();
        blocked.dedup();
        let free_t = sorted_difference(&t, &blocked).len();
        if 3 * free_t < t.len() {
            return Ok(Stage::Bad);
        }
        Ok(match sorted_difference(&s, &blocked).first() {
            Some(&c) => Stage::Colored(c),
            None => Stage::Active,
        })
    }

    /// Color after bidding, or `None` when left for the cleanup.
    fn bidding_color(&mut self, v: Vertex) -> Result<Option<Color>> {
        if self.params.is_none() {
            return Ok(None);
        }
        let k = self.params().iterations();
        Ok(match self.stage(v, k)? {
            Stage::Colored(c) => Some(c),
            _ => None,
        })
    }
}

impl<'o, 'a> Session<'o, 'a> {
    fn new(oracle: &'o LcaOracle<'a>, cfg: &LcaConfig) -> Result<Self> {
        let n = oracle.n();
        let delta = oracle.max_degree();
        let p_star = ((oracle.palette_floor() + 1).saturating_sub(delta) as u64).max(1);
        let params = if p_star < cfg.bidding.p_star_floor {
            None
        } else {
            Some(BiddingParams::new(cfg.bidding.c0, cfg.bidding.beta, p_star, delta)?)
        };
        Ok(Session {
            oracle,
            params,
            budget: cfg.probe_budget(n, delta),
            component_cap: cfg.component_cap(n, delta),
            root: 0,
            counts: QueryCounts::default(),
            dist: HashMap::new(),
            radius: 0,
            neighbors: HashMap::new(),
            palettes: HashMap::new(),
            tapes: HashMap::new(),
            rsets: HashMap::new(),
            cumulative: HashMap::new(),
            nstar: HashMap::new(),
            stage: HashMap::new(),
            sampled: HashMap::new(),
            sampled_t: HashMap::new(),
            cleanup: HashMap::new(),
        })
    }

    fn resolve(&mut self, v: Vertex) -> Result<LcaAnswer> {
        self.oracle.check(v)?;
        self.root = v;
        self.counts = QueryCounts::default();
        self.dist = HashMap::from([(v, 0)]);
        self.radius = 0;
        let color = match self.bidding_color(v)? {
            Some(c) => c,
            None => match self.cleanup.get(&v) {
                Some(&c) => c,
                None => self.color_component(v)?,
            },
        };
        let radius = self.radius;
        Ok(LcaAnswer {
            vertex: v,
            color,
            queries: self.counts,
            exploration_radius: radius,
        })
    }

    /// Greedy in ascending id over the uncolored component of `v`.
    fn color_component(&mut self, v: Vertex) -> Result<Color> {
        let mut component = vec![v];
        let mut inside = HashMap::from([(v, ())]);
        let mut fixed: HashMap<Vertex, Color> = HashMap::new();
        let mut head = 0;
        while head < component.len() {
            let w = component[head];
            head += 1;
            for u in self.neighbors(w)? {
                if inside.contains_key(&u) || fixed.contains_key(&u) {
                    continue;
                }
                match self.bidding_color(u)? {
                    Some(c) => {
                        fixed.insert(u, c);
                    }
                    None => {
                        inside.insert(u, ());
                        component.push(u);
                        if component.len() > self.component_cap {
                            return Err(Error::QueryBudgetExceeded {
                                vertex: self.root,
                                budget: self.budget,
                            });
                        }
                    }
                }
            }
        }
        component.sort_unstable();
        let mut assigned: HashMap<Vertex, Color> = HashMap::new();
        for &w in &component {
            let mut taken: Vec<Color> = self
                .neighbors(w)?
                .iter()
                .filter_map(|u| fixed.get(u).or_else(|| assigned.get(u)).copied())
                .collect();
            taken.sort_unstable();
            taken.dedup();
            let pal = self.palette(w)?;
            let c = sorted_difference(pal.as_slice(), &taken)
                .first()
                .copied()
                .ok_or(Error::PaletteExhausted(w))?;
            assigned.insert(w, c);
        }
        let c = assigned[&v];
        self.cleanup.extend(assigned);
        Ok(c)
    }
}

/// Resolves the color of `v` the global pipeline would assign: bidding
/// replayed over recursively materialized N* sets, then, if `v` stays
/// uncolored, greedy in ascending id over its uncolored component.
pub fn lca_color(oracle: &LcaOracle<'_>, v: Vertex, cfg: &LcaConfig) -> Result<LcaAnswer> {
    Session::new(oracle, cfg)?.resolve(v)
}

/// One call per vertex. With `shared_memo` the calls run in order and reuse
/// each other's derived state, which leaves the answers unchanged but makes
/// the per-call probe counts meaningless.
pub fn lca_sweep(oracle: &LcaOracle<'_>, cfg: &LcaConfig) -> Vec<Result<LcaAnswer>> {
    let n = oracle.n() as Vertex;
    if cfg.shared_memo {
        match Session::new(oracle, cfg) {
            Ok(mut s) => (0..n).map(|v| s.resolve(v)).collect(),
            Err(e) => vec![Err(e)],
        }
    } else {
        (0..n)
            .into_par_iter()
            .map(|v| lca_color(oracle, v, cfg))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Coloring, Graph};

    fn ample(g: Graph) -> ListColoringInstance {
        let d = g.max_degree() as u64;
        let pal = Palette::range(0, 2 * d + 17);
        let n = g.n();
        ListColoringInstance::new(g, vec![pal; n], (2 * d + 16) as usize).unwrap()
    }

    #[test]
    fn neighbor_past_degree_is_none() {
        let inst = ample(Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap());
        let o = LcaOracle::new(&inst, 0);
        assert_eq!(o.neighbor_query(0, 1).unwrap(), Some(1));
        assert_eq!(o.neighbor_query(0, 2).unwrap(), None);
        assert_eq!(o.neighbor_query(0, 0).unwrap(), None);
        assert_eq!(o.totals().neighbor, 3);
    }

    #[test]
    fn isolated_vertex() {
        let inst = ample(Graph::from_edges(4, [(0, 1)]).unwrap());
        let o = LcaOracle::new(&inst, 1);
        assert_eq!(o.degree_query(3).unwrap(), 0);
        let a = lca_color(&o, 3, &LcaConfig::default()).unwrap();
        assert!(inst.palette(3).contains(a.color));
        assert!(a.queries.total() <= 4);
    }

    #[test]
    fn tape_is_deterministic() {
        let inst = ample(Graph::from_edges(2, [(0, 1)]).unwrap());
        let o = LcaOracle::new(&inst, 9);
        assert_eq!(o.randomness(1, 0, 64).unwrap(), o.randomness(1, 0, 64).unwrap());
        assert!(o.randomness(2, 0, 1).is_err());
    }

    #[test]
    fn edge_endpoints_differ() {
        let inst = ample(Graph::from_edges(2, [(0, 1)]).unwrap());
        let o = LcaOracle::new(&inst, 5);
        let cfg = LcaConfig::default();
        let a = lca_color(&o, 0, &cfg).unwrap();
        let b = lca_color(&o, 1, &cfg).unwrap();
        assert_ne!(a.color, b.color);
    }

    #[test]
    fn tight_palettes_use_component_greedy() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let inst = ListColoringInstance::uniform(g);
        let o = LcaOracle::new(&inst, 0);
        let cfg = LcaConfig::default();
        let colors: Vec<Option<Color>> = lca_sweep(&o, &cfg)
            .into_iter()
            .map(|a| Some(a.unwrap().color))
            .collect();
        let coloring = Coloring::from_vec(colors);
        let expected = crate::graph::greedy_list_color(&inst, 0..5).unwrap();
        assert_eq!(coloring, expected);
    }
}
