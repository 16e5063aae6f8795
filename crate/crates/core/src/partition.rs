//! Random partition of vertices into `B_1..B_k, L` and of colors into
//! `C_1..C_k`, plus a checker for the guarantees the split should satisfy.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Color, ListColoringInstance, Vertex};
use crate::kwise::{self, KWiseSeed};
use crate::rng;

/// Label of a vertex in the leftover set `L`.
pub const LEFTOVER: u32 = u32::MAX;

/// Tunable constants standing in for the hidden constants of the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionKnobs {
    /// Multiplier in `q = c_q * sqrt(ln n) / Δ^{1/4}`.
    pub c_q: f64,
    /// Degree precondition `Δ >= c_min * ln^γ n`.
    pub c_min: f64,
    /// Multiplicative slack on every O(.) bound checked by the verifier.
    pub slack: f64,
    /// Independence of the color hash; `None` means `ceil(2 log2 n)`.
    pub independence: Option<usize>,
}

impl Default for PartitionKnobs {
    fn default() -> Self {
        PartitionKnobs {
            c_q: 0.5,
            c_min: 1.0,
            slack: 4.0,
            independence: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    pub gamma: f64,
    pub lambda: f64,
    pub q: f64,
    /// `floor(sqrt(Δ))`; zero only for edgeless inputs.
    pub k: usize,
    pub p: f64,
    pub delta: usize,
    pub original_n: usize,
    pub knobs: PartitionKnobs,
}

impl PartitionParams {
    /// Number of `B` parts actually used (a zero `k` collapses to one part).
    pub fn parts(&self) -> usize {
        self.k.max(1)
    }

    pub fn independence(&self) -> usize {
        self.knobs
            .independence
            .unwrap_or_else(|| kwise::default_independence(self.original_n))
    }

    /// `c_min * ln^γ n`.
    pub fn degree_threshold(&self) -> f64 {
        self.knobs.c_min * (self.original_n.max(2) as f64).ln().powf(self.gamma)
    }
}

pub fn lambda_for(gamma: f64) -> f64 {
    0.5 + 2.0 / (3.0 * gamma + 2.0)
}

pub fn derive_params(
    delta: usize,
    original_n: usize,
    gamma: f64,
    knobs: PartitionKnobs,
) -> PartitionParams {
    let k = (delta as f64).sqrt().floor() as usize;
    let q = if delta == 0 {
        0.0
    } else {
        (knobs.c_q * (original_n.max(2) as f64).ln().sqrt() / (delta as f64).powf(0.25))
            .clamp(0.0, 1.0)
    };
    PartitionParams {
        gamma,
        lambda: lambda_for(gamma),
        q,
        k,
        p: 1.0 / k.max(1) as f64,
        delta,
        original_n,
        knobs,
    }
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub params: PartitionParams,
    /// Part index in `[0, parts)` or [`LEFTOVER`].
    pub vertex_part: Vec<u32>,
    pub color_seed: KWiseSeed,
    /// Sorted color universe and the part of each color.
    pub universe: Vec<Color>,
    pub color_part: Vec<u32>,
    /// Members of each `B_i`, ascending.
    pub parts: Vec<Vec<Vertex>>,
    pub leftover: Vec<Vertex>,
    /// Degree of each vertex inside its own part.
    pub part_degree: Vec<usize>,
    /// `Δ_i` for each `B_i`.
    pub delta_b: Vec<usize>,
    pub delta_l: usize,
    /// `g_i(v)` for `v` in `B_i`, `g_L(v)` for `v` in `L`.
    pub g: Vec<usize>,
}

impl PartitionOutcome {
    pub fn color_part_of(&self, c: Color) -> u32 {
        match self.universe.binary_search(&c) {
            Ok(i) => self.color_part[i],
            Err(_) => kwise::kwise_eval(&self.color_seed, c, self.params.parts())
                .expect("color below modulus") as u32,
        }
    }

    pub fn is_leftover(&self, v: Vertex) -> bool {
        self.vertex_part[v as usize] == LEFTOVER
    }

    /// `Ψ(v) ∩ C_i` for the part `i` of `v`; empty for leftover vertices.
    pub fn part_palette(&self, instance: &ListColoringInstance, v: Vertex) -> Vec<Color> {
        let part = self.vertex_part[v as usize];
        if part == LEFTOVER {
            return Vec::new();
        }
        instance
            .palette(v)
            .iter()
            .filter(|&c| self.color_part_of(c) == part)
            .collect()
    }
}

/// Checks `|V| > Δ` and `Δ >= c_min ln^γ n`.
pub fn check_precondition(instance: &ListColoringInstance, params: &PartitionParams) -> Result<()> {
    let delta = instance.max_degree();
    let threshold = params.degree_threshold();
    if (delta as f64) < threshold {
        return Err(Error::DegreeTooLow { delta, threshold });
    }
    if instance.n() <= delta {
        return Err(Error::PartitionPrecondition(format!(
            "|V| = {} not above Δ = {delta}",
            instance.n()
        )));
    }
    Ok(())
}

/// Checks the precondition, then partitions.
pub fn partition_instance(
    instance: &ListColoringInstance,
    params: &PartitionParams,
    seed: u64,
) -> Result<PartitionOutcome> {
    check_precondition(instance, params)?;
    partition_unchecked(instance, params, seed)
}

/// Partitions without the degree precondition. Vertex `v` draws its label
/// from its own stream, so the result does not depend on thread count.
pub fn partition_unchecked(
    instance: &ListColoringInstance,
    params: &PartitionParams,
    seed: u64,
) -> Result<PartitionOutcome> {
    let n = instance.n();
    let parts = params.parts();
    let q = params.q;
    let vertex_part: Vec<u32> = (0..n as u64)
        .into_par_iter()
        .map(|v| {
            let mut r = rng::stream(seed, rng::tag::PARTITION_VERTEX, v, 0);
            if q > 0.0 && r.gen::<f64>() < q {
                LEFTOVER
            } else {
                r.gen_range(0..parts) as u32
            }
        })
        .collect();

    let universe = instance.color_universe();
    let modulus = kwise::modulus_for(universe.last().copied().unwrap_or(0), parts);
    let mut seed_rng = rng::stream(seed, rng::tag::PARTITION_COLOR_SEED, 0, 0);
    let color_seed = kwise::sample_seed(params.independence(), modulus, &mut seed_rng)?;
    let color_part = universe
        .par_iter()
        .map(|&c| kwise::kwise_eval(&color_seed, c, parts).map(|x| x as u32))
        .collect::<Result<Vec<_>>>()?;

    let mut members = vec![Vec::new(); parts];
    let mut leftover = Vec::new();
    for (v, &p) in vertex_part.iter().enumerate() {
        if p == LEFTOVER {
            leftover.push(v as Vertex);
        } else {
            members[p as usize].push(v as Vertex);
        }
    }

    let g = instance.graph();
    let part_degree: Vec<usize> = (0..n as Vertex)
        .into_par_iter()
        .map(|v| {
            let own = vertex_part[v as usize];
            g.degree_within(v, |u| vertex_part[u as usize] == own)
        })
        .collect();
    let mut delta_b = vec![0usize; parts];
    let mut delta_l = 0usize;
    for (v, &p) in vertex_part.iter().enumerate() {
        if p == LEFTOVER {
            delta_l = delta_l.max(part_degree[v]);
        } else {
            let d = &mut delta_b[p as usize];
            *d = (*d).max(part_degree[v]);
        }
    }

    let mut outcome = PartitionOutcome {
        params: params.clone(),
        vertex_part,
        color_seed,
        universe,
        color_part,
        parts: members,
        leftover,
        part_degree,
        delta_b,
        delta_l,
        g: Vec::new(),
    };
    outcome.g = (0..n as Vertex)
        .into_par_iter()
        .map(|v| {
            if outcome.is_leftover(v) {
                // |Ψ(v)| - (deg_G(v) - deg_L(v)), cannot underflow on valid instances
                (instance.palette(v).len() + outcome.part_degree[v as usize])
                    .saturating_sub(g.degree(v))
            } else {
                let own = outcome.vertex_part[v as usize];
                instance
                    .palette(v)
                    .iter()
                    .filter(|&c| outcome.color_part_of(c) == own)
                    .count()
            }
        })
        .collect();
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyEntry {
    pub name: String,
    /// `B1`, `B2`, ... or `L`.
    pub part: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl PropertyEntry {
    /// measured/bound, oriented so that values at most 1 pass.
    pub fn ratio(&self) -> f64 {
        let (num, den) = if self.name == "ii" || self.name == "iii" {
            (self.bound, self.measured)
        } else {
            (self.measured, self.bound)
        };
        if den == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            num / den
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropertyReport {
    pub entries: Vec<PropertyEntry>,
}

impl PropertyReport {
    /// All entries whose name starts with `property` (`"i"`, `"ii"`, ...).
    pub fn passes(&self, property: &str) -> bool {
        self.entries
            .iter()
            .filter(|e| e.name.split('.').next() == Some(property))
            .all(|e| e.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// Largest measured/bound ratio among entries of `property`.
    pub fn worst_ratio(&self, property: &str) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.name.split('.').next() == Some(property))
            .map(PropertyEntry::ratio)
            .fold(0.0, f64::max)
    }
}

fn part_name(p: u32) -> String {
    if p == LEFTOVER {
        "L".to_string()
    } else {
        format!("B{}", p + 1)
    }
}

/// Evaluates properties i-iv. The available-color properties (ii, iii) are
/// checked exactly; slack multiplies only the O(.) bounds of i and iv.
pub fn verify_partition_properties(
    instance: &ListColoringInstance,
    outcome: &PartitionOutcome,
) -> PropertyReport {
    let params = &outcome.params;
    let s = params.knobs.slack;
    let g = instance.graph();
    let n_v = instance.n() as f64;
    let delta = params.delta.max(instance.max_degree()) as f64;
    let ln_n = (params.original_n.max(2) as f64).ln();
    let lambda = params.lambda;
    let mut entries = Vec::new();
    let mut push = |name: &str, part: u32, measured: f64, bound: f64, pass: bool| {
        entries.push(PropertyEntry {
            name: name.to_string(),
            part: part_name(part),
            measured,
            bound,
            pass,
        })
    };

    for (i, members) in outcome.parts.iter().enumerate() {
        let edges: usize = members
            .iter()
            .map(|&v| outcome.part_degree[v as usize])
            .sum::<usize>()
            / 2;
        push("i.edges", i as u32, edges as f64, s * n_v, edges as f64 <= s * n_v);
    }
    let l_bound = s * params.q * n_v;
    let l_size = outcome.leftover.len() as f64;
    push("i.leftover", LEFTOVER, l_size, l_bound, l_size <= l_bound);

    // ii and iii: report the vertex with the smallest margin
    let available = |members: &[Vertex], part_delta: usize| -> (f64, f64) {
        let floor = part_delta as f64 - (part_delta as f64).powf(lambda);
        let mut worst: Option<(f64, f64)> = None;
        for &v in members {
            let need = (outcome.part_degree[v as usize] as f64).max(floor) + 1.0;
            let have = outcome.g[v as usize] as f64;
            if worst.is_none_or(|(h, nd)| have - need < h - nd) {
                worst = Some((have, need));
            }
        }
        worst.unwrap_or((0.0, 0.0))
    };
    for (i, members) in outcome.parts.iter().enumerate() {
        let (have, need) = available(members, outcome.delta_b[i]);
        push("ii", i as u32, have, need, have >= need);
    }
    let (have, need) = available(&outcome.leftover, outcome.delta_l);
    push("iii", LEFTOVER, have, need, have >= need);

    let b_bound = s * delta.sqrt();
    for (i, &d) in outcome.delta_b.iter().enumerate() {
        push("iv.max_degree", i as u32, d as f64, b_bound, d as f64 <= b_bound);
    }
    let lb = s * params.q * delta;
    push(
        "iv.max_degree",
        LEFTOVER,
        outcome.delta_l as f64,
        lb,
        outcome.delta_l as f64 <= lb,
    );

    let per_vertex = |members: &[Vertex], factor: f64| -> (f64, f64) {
        let mut worst = (0.0, 0.0);
        let mut worst_ratio = f64::NEG_INFINITY;
        for &v in members {
            let d = outcome.part_degree[v as usize] as f64;
            let bound = (s * ln_n).max(s * factor * g.degree(v) as f64);
            let r = d / bound;
            if r > worst_ratio {
                worst_ratio = r;
                worst = (d, bound);
            }
        }
        worst
    };
    let inv_sqrt = if delta > 0.0 { 1.0 / delta.sqrt() } else { 1.0 };
    for (i, members) in outcome.parts.iter().enumerate() {
        let (d, b) = per_vertex(members, inv_sqrt);
        push("iv.vertex", i as u32, d, b, d <= b);
    }
    let (d, b) = per_vertex(&outcome.leftover, params.q);
    push("iv.vertex", LEFTOVER, d, b, d <= b);

    PropertyReport { entries }
}
