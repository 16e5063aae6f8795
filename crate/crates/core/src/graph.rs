//! Graphs, palettes, list-coloring instances and the sequential tools built
//! on them: validation, greedy coloring, an exhaustive oracle and generators.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub type Vertex = u32;
pub type Color = u64;

/// Undirected simple graph in compressed adjacency form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    max_degree: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
            max_degree: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate edges are merged;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut arcs: Vec<(Vertex, Vertex)> = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::InvalidVertex {
                        vertex: u64::from(x),
                        n,
                    });
                }
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
            }
            arcs.push((u, v));
            arcs.push((v, u));
        }
        arcs.sort_unstable();
        arcs.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &arcs {
            offsets[u as usize + 1] += 1;
        }
        let mut max_degree = 0;
        for i in 0..n {
            max_degree = max_degree.max(offsets[i + 1]);
            offsets[i + 1] += offsets[i];
        }
        let targets = arcs.into_iter().map(|(_, v)| v).collect();
        Ok(Graph {
            offsets,
            targets,
            max_degree,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Sorted neighbor list.
    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n() as Vertex).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Subgraph induced by `vertices` (sorted, distinct). Local vertex `i`
    /// corresponds to `vertices[i]`.
    pub fn induced(&self, vertices: &[Vertex]) -> Graph {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        let mut targets = Vec::new();
        let mut max_degree = 0;
        offsets.push(0);
        for &v in vertices {
            let start = targets.len();
            // both lists are sorted, so a merge walk finds the intersection
            let nb = self.neighbors(v);
            let (mut i, mut j) = (0, 0);
            while i < nb.len() && j < vertices.len() {
                match nb[i].cmp(&vertices[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        targets.push(j as Vertex);
                        i += 1;
                        j += 1;
                    }
                }
            }
            max_degree = max_degree.max(targets.len() - start);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            max_degree,
        }
    }

    /// Number of neighbors of `v` for which `inside` is true.
    pub fn degree_within(&self, v: Vertex, inside: impl Fn(Vertex) -> bool) -> usize {
        self.neighbors(v).iter().filter(|&&u| inside(u)).count()
    }
}

/// Sorted set of colors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Palette(Vec<Color>);

impl Palette {
    pub fn new(colors: impl IntoIterator<Item = Color>) -> Self {
        let mut v: Vec<Color> = colors.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Palette(v)
    }

    /// `{lo, lo+1, ..., hi-1}`.
    pub fn range(lo: Color, hi: Color) -> Self {
        Palette((lo..hi).collect())
    }

    pub fn from_sorted(colors: Vec<Color>) -> Self {
        debug_assert!(colors.windows(2).all(|w| w[0] < w[1]));
        Palette(colors)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(&self, c: Color) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Color] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<Color> {
        self.0.last().copied()
    }

    /// Colors of `self` not in the sorted slice `taken`.
    pub fn without(&self, taken: &[Color]) -> Palette {
        Palette(sorted_difference(&self.0, taken))
    }

    pub fn retain(&self, keep: impl Fn(Color) -> bool) -> Palette {
        Palette(self.0.iter().copied().filter(|&c| keep(c)).collect())
    }
}

/// Elements of sorted `a` not present in sorted `b`.
pub fn sorted_difference(a: &[Color], b: &[Color]) -> Vec<Color> {
    let mut out = Vec::with_capacity(a.len());
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

/// Whether two sorted slices share an element.
pub fn sorted_intersects<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// A graph together with one palette per vertex.
#[derive(Clone, Debug)]
pub struct ListColoringInstance {
    graph: Graph,
    palettes: Vec<Palette>,
    palette_floor: usize,
}

impl ListColoringInstance {
    /// Checks `|palette(v)| >= max(deg(v), palette_floor) + 1` for every vertex.
    pub fn new(graph: Graph, palettes: Vec<Palette>, palette_floor: usize) -> Result<Self> {
        if palettes.len() != graph.n() {
            return Err(Error::InvalidInstance(format!(
                "{} palettes for {} vertices",
                palettes.len(),
                graph.n()
            )));
        }
        for (v, pal) in palettes.iter().enumerate() {
            let need = graph.degree(v as Vertex).max(palette_floor) + 1;
            if pal.len() < need {
                return Err(Error::InvalidInstance(format!(
                    "vertex {v} has {} colors, needs at least {need}",
                    pal.len()
                )));
            }
        }
        Ok(ListColoringInstance {
            graph,
            palettes,
            palette_floor,
        })
    }

    /// Skips the palette-size check. Meant for exhaustive-search oracles,
    /// which also handle unsatisfiable inputs.
    pub fn new_unchecked(graph: Graph, palettes: Vec<Palette>) -> Self {
        assert_eq!(palettes.len(), graph.n());
        ListColoringInstance {
            graph,
            palettes,
            palette_floor: 0,
        }
    }

    /// Uses the largest floor the palettes satisfy, `min |Ψ(v)| - 1`.
    pub fn with_inferred_floor(graph: Graph, palettes: Vec<Palette>) -> Result<Self> {
        let floor = palettes
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .min()
            .unwrap_or(0);
        Self::new(graph, palettes, floor)
    }

    /// Every vertex gets `{0, ..., Δ}`.
    pub fn uniform(graph: Graph) -> Self {
        let delta = graph.max_degree();
        let pal = Palette::range(0, delta as Color + 1);
        let palettes = vec![pal; graph.n()];
        ListColoringInstance {
            graph,
            palettes,
            palette_floor: delta,
        }
    }

    #[inline]
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.graph.max_degree()
    }

    #[inline]
    pub fn palette(&self, v: Vertex) -> &Palette {
        &self.palettes[v as usize]
    }

    pub fn palettes(&self) -> &[Palette] {
        &self.palettes
    }

    pub fn palette_floor(&self) -> usize {
        self.palette_floor
    }

    /// Largest color in any palette.
    pub fn max_color(&self) -> Option<Color> {
        self.palettes.iter().filter_map(Palette::max).max()
    }

    /// Sorted union of all palettes.
    pub fn color_universe(&self) -> Vec<Color> {
        let mut all: Vec<Color> = self.palettes.iter().flat_map(|p| p.iter()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Total words needed to store the instance: one per vertex record,
    /// two per edge, one per palette entry.
    pub fn words(&self) -> u64 {
        (self.n() + 2 * self.graph.edge_count()) as u64
            + self.palettes.iter().map(|p| p.len() as u64).sum::<u64>()
    }
}

/// Partial assignment of colors to vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(Vec<Option<Color>>);

impl Coloring {
    pub fn new(n: usize) -> Self {
        Coloring(vec![None; n])
    }

    pub fn from_vec(colors: Vec<Option<Color>>) -> Self {
        Coloring(colors)
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> Option<Color> {
        self.0[v as usize]
    }

    #[inline]
    pub fn set(&mut self, v: Vertex, c: Color) {
        self.0[v as usize] = Some(c);
    }

    pub fn clear(&mut self, v: Vertex) {
        self.0[v as usize] = None;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<Color>] {
        &self.0
    }

    pub fn colored_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn uncolored(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(v, _)| v as Vertex)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    /// Monochromatic edges, `u < v`.
    pub edge_violations: Vec<(Vertex, Vertex)>,
    /// Vertices holding a color outside their palette.
    pub palette_violations: Vec<(Vertex, Color)>,
    /// Not a violation; reported so callers can require totality.
    pub uncolored: usize,
}

impl ValidityReport {
    pub fn is_empty(&self) -> bool {
        self.edge_violations.is_empty() && self.palette_violations.is_empty()
    }

    /// Proper, palette-respecting and total.
    pub fn is_valid_total(&self) -> bool {
        self.is_empty() && self.uncolored == 0
    }
}

/// Lists every monochromatic edge and out-of-palette assignment.
///
/// Panics if `coloring` does not have one slot per vertex.
pub fn validate_coloring(instance: &ListColoringInstance, coloring: &Coloring) -> ValidityReport {
    assert_eq!(
        coloring.len(),
        instance.n(),
        "coloring length does not match instance"
    );
    let mut report = ValidityReport::default();
    for v in 0..instance.n() as Vertex {
        match coloring.get(v) {
            None => report.uncolored += 1,
            Some(c) => {
                if !instance.palette(v).contains(c) {
                    report.palette_violations.push((v, c));
                }
            }
        }
    }
    for (u, v) in instance.graph().edges() {
        if let (Some(a), Some(b)) = (coloring.get(u), coloring.get(v)) {
            if a == b {
                report.edge_violations.push((u, v));
            }
        }
    }
    report
}

/// Smallest color of `palette` not used by an already-colored neighbor.
pub fn smallest_free_color(
    graph: &Graph,
    coloring: &Coloring,
    v: Vertex,
    palette: &[Color],
    scratch: &mut Vec<Color>,
) -> Option<Color> {
    scratch.clear();
    scratch.extend(graph.neighbors(v).iter().filter_map(|&u| coloring.get(u)));
    scratch.sort_unstable();
    scratch.dedup();
    let mut j = 0;
    for &c in palette {
        while j < scratch.len() && scratch[j] < c {
            j += 1;
        }
        if j >= scratch.len() || scratch[j] != c {
            return Some(c);
        }
    }
    None
}

/// Colors the uncolored vertices of `order` one at a time with the smallest
/// palette color not taken by a colored neighbor. Already colored vertices
/// are skipped.
pub fn greedy_extend<'a, P, I>(
    graph: &Graph,
    palette: P,
    coloring: &mut Coloring,
    order: I,
) -> Result<()>
where
    P: Fn(Vertex) -> &'a [Color],
    I: IntoIterator<Item = Vertex>,
{
    let mut scratch = Vec::new();
    for v in order {
        if coloring.get(v).is_some() {
            continue;
        }
        match smallest_free_color(graph, coloring, v, palette(v), &mut scratch) {
            Some(c) => coloring.set(v, c),
            None => return Err(Error::PaletteExhausted(v)),
        }
    }
    Ok(())
}

/// Greedy list coloring in the given vertex order. Vertices missing from
/// `order` stay uncolored.
pub fn greedy_list_color(
    instance: &ListColoringInstance,
    order: impl IntoIterator<Item = Vertex>,
) -> Result<Coloring> {
    let mut coloring = Coloring::new(instance.n());
    greedy_extend(
        instance.graph(),
        |v| instance.palette(v).as_slice(),
        &mut coloring,
        order,
    )?;
    Ok(coloring)
}

pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForce {
    Colored(Coloring),
    Unsatisfiable,
}

/// Exhaustive backtracking search. Refuses instances whose raw search space
/// (product of palette sizes) exceeds `cap`.
pub fn brute_force_color(instance: &ListColoringInstance, cap: u128) -> Result<BruteForce> {
    let space = instance
        .palettes()
        .iter()
        .fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128));
    if space > cap {
        return Err(Error::CapExceeded { space, cap });
    }
    let n = instance.n();
    let g = instance.graph();
    let mut choice = vec![0usize; n];
    let mut coloring = Coloring::new(n);
    let mut v = 0usize;
    // iterative backtracking; choice[v] is the next palette index to try
    loop {
        if v == n {
            return Ok(BruteForce::Colored(coloring));
        }
        let pal = instance.palette(v as Vertex).as_slice();
        let mut placed = false;
        while choice[v] < pal.len() {
            let c = pal[choice[v]];
            choice[v] += 1;
            let clash = g
                .neighbors(v as Vertex)
                .iter()
                .any(|&u| (u as usize) < v && coloring.get(u) == Some(c));
            if !clash {
                coloring.set(v as Vertex, c);
                placed = true;
                break;
            }
        }
        if placed {
            v += 1;
        } else {
            choice[v] = 0;
            coloring.clear(v as Vertex);
            if v == 0 {
                return Ok(BruteForce::Unsatisfiable);
            }
            v -= 1;
            coloring.clear(v as Vertex);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    Gnp { n: usize, p: f64 },
    RandomRegular { n: usize, d: usize },
    EdgeList { path: PathBuf },
}

pub fn generate_graph(model: &GraphModel, seed: u64) -> Result<Graph> {
    match model {
        GraphModel::Gnp { n, p } => gnp(*n, *p, seed),
        GraphModel::RandomRegular { n, d } => random_regular(*n, *d, seed),
        GraphModel::EdgeList { path } => read_edge_list(path),
    }
}

/// Erdős–Rényi graph, sampled by geometric skipping over vertex pairs.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InfeasibleParameters(format!("p = {p} not in [0, 1]")));
    }
    if n > Vertex::MAX as usize {
        return Err(Error::InfeasibleParameters(format!("n = {n} too large")));
    }
    if p == 0.0 || n < 2 {
        return Ok(Graph::empty(n));
    }
    let mut edges = Vec::new();
    if p == 1.0 {
        for v in 1..n as Vertex {
            edges.extend((0..v).map(|w| (w, v)));
        }
        return Graph::from_edges(n, edges);
    }
    let mut r = rng::stream(seed, rng::tag::GENERATOR, 0, 0);
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let u: f64 = r.gen();
        w += 1 + ((1.0 - u).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as Vertex, v as Vertex));
        }
    }
    Graph::from_edges(n, edges)
}

/// Uniform-ish d-regular graph: random pairing of stubs, then loops and
/// repeated edges are removed by random edge switches.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InfeasibleParameters(format!("n·d = {} is odd", n * d)));
    }
    if d >= n.max(1) && d > 0 {
        return Err(Error::InfeasibleParameters(format!("degree {d} needs n > {d}")));
    }
    if d == 0 {
        return Ok(Graph::empty(n));
    }
    if d == n - 1 {
        return gnp(n, 1.0, seed);
    }
    let key = |a: Vertex, b: Vertex| if a < b { (a, b) } else { (b, a) };
    for attempt in 0..64u64 {
        let mut r = rng::stream(seed, rng::tag::GENERATOR, 1, attempt);
        let mut stubs: Vec<Vertex> = (0..n as Vertex)
            .flat_map(|v| std::iter::repeat_n(v, d))
            .collect();
        stubs.shuffle(&mut r);
        let mut pairs: Vec<(Vertex, Vertex)> =
            stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let mut present: HashSet<(Vertex, Vertex)> = HashSet::with_capacity(pairs.len());
        let mut bad = Vec::new();
        let mut pending = vec![false; pairs.len()];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if a == b || !present.insert(key(a, b)) {
                bad.push(i);
                pending[i] = true;
            }
        }
        let m = pairs.len();
        let mut ok = true;
        'fix: for &i in &bad {
            for _ in 0..10_000 {
                let j = r.gen_range(0..m);
                let (a, b) = pairs[i];
                let (mut c, mut dd) = pairs[j];
                // pair j must be a live edge, not another pending bad pair
                if pending[j] {
                    continue;
                }
                if r.gen::<bool>() {
                    std::mem::swap(&mut c, &mut dd);
                }
                if a == c || b == dd {
                    continue;
                }
                let (e1, e2) = (key(a, c), key(b, dd));
                if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
                    continue;
                }
                present.remove(&key(pairs[j].0, pairs[j].1));
                present.insert(e1);
                present.insert(e2);
                pairs[i] = (a, c);
                pairs[j] = (b, dd);
                pending[i] = false;
                continue 'fix;
            }
            ok = false;
            break;
        }
        if ok {
            return Graph::from_edges(n, pairs);
        }
    }
    Err(Error::InfeasibleParameters(format!(
        "could not realize a {d}-regular graph on {n} vertices"
    )))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads `u v` pairs (0-based). The vertex count is one more than the
/// largest id mentioned.
pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(open(path)?, path)
}

pub fn parse_edge_list(reader: impl BufRead, path: &Path) -> Result<Graph> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let body = strip_comment(&line);
        if body.is_empty() {
            continue;
        }
        let ids: Vec<&str> = body.split_whitespace().collect();
        if ids.len() != 2 {
            return Err(perr(i + 1, format!("expected `u v`, got {body:?}")));
        }
        let parse = |s: &str| {
            s.parse::<Vertex>()
                .map_err(|e| perr(i + 1, format!("bad vertex id {s:?}: {e}")))
        };
        let (u, v) = (parse(ids[0])?, parse(ids[1])?);
        if u == v {
            return Err(perr(i + 1, format!("self-loop at {u}")));
        }
        n = n.max(u as usize + 1).max(v as usize + 1);
        edges.push((u, v));
    }
    Graph::from_edges(n, edges)
}

/// Reads `v: c1 c2 ...` lines. Vertices without a line get `{0, ..., Δ}`.
pub fn read_palette_file(path: &Path, graph: &Graph) -> Result<Vec<Palette>> {
    parse_palettes(open(path)?, path, graph)
}

pub fn parse_palettes(reader: impl BufRead, path: &Path, graph: &Graph) -> Result<Vec<Palette>> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut given: Vec<Option<Palette>> = vec![None; graph.n()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let body = strip_comment(&line);
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body
            .split_once(':')
            .ok_or_else(|| perr(i + 1, "expected `v: c1 c2 ...`".into()))?;
        let v: usize = head
            .trim()
            .parse()
            .map_err(|e| perr(i + 1, format!("bad vertex id {head:?}: {e}")))?;
        if v >= graph.n() {
            return Err(perr(i + 1, format!("vertex {v} not in graph (n = {})", graph.n())));
        }
        if given[v].is_some() {
            return Err(perr(i + 1, format!("second palette line for vertex {v}")));
        }
        let colors = rest
            .split_whitespace()
            .map(|s| {
                s.parse::<Color>()
                    .map_err(|e| perr(i + 1, format!("bad color {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        given[v] = Some(Palette::new(colors));
    }
    let default = Palette::range(0, graph.max_degree() as Color + 1);
    Ok(given
        .into_iter()
        .map(|p| p.unwrap_or_else(|| default.clone()))
        .collect())
}
