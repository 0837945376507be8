//! Enumerated balls in Cayley graphs and the exact counters built on them:
//! cogrowth `c(n)`, growth `b(n)`, self-avoiding walks `υ(n)` and Cheeger
//! upper bounds.

use std::fmt::Write as _;
use std::ops::{AddAssign, Range};

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::ResourceError;
use crate::group::{Element, MarkedGroup};
use crate::FxIndexSet;

/// Adjacency entry for a neighbor outside the enumerated ball.
pub const OUTSIDE: u32 = u32::MAX;

/// Default cap on enumerated vertices.
pub const DEFAULT_VERTEX_BUDGET: usize = 20_000_000;

const BFS_CHUNK: usize = 1 << 16;

/// The radius-`n` ball of `Cay(G, S)` rooted at the identity (vertex 0).
/// Vertices are numbered in BFS order, so each sphere is a contiguous range.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    radius: usize,
    rank: usize,
    vertices: FxIndexSet<Element>,
    layer_starts: Vec<usize>,
    adjacency: Vec<u32>,
    inverse_generator: Vec<usize>,
    labels: Vec<String>,
}

impl CayleyBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, v: usize) -> &Element {
        &self.vertices[v]
    }

    pub fn index_of(&self, x: &Element) -> Option<usize> {
        self.vertices.get_index_of(x)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Element> {
        self.vertices.iter()
    }

    /// `v·s`, if it lies in the ball.
    #[inline]
    pub fn neighbor(&self, v: usize, s: usize) -> Option<usize> {
        let t = self.adjacency[v * self.rank + s];
        (t != OUTSIDE).then_some(t as usize)
    }

    #[inline]
    pub(crate) fn raw_neighbor(&self, v: usize, s: usize) -> u32 {
        self.adjacency[v * self.rank + s]
    }

    pub fn inverse_generator(&self, s: usize) -> usize {
        self.inverse_generator[s]
    }

    /// Vertices at distance exactly `r`.
    pub fn sphere(&self, r: usize) -> Range<usize> {
        if r > self.radius {
            return self.len()..self.len();
        }
        self.layer_starts[r]..self.layer_starts[r + 1]
    }

    /// Vertices at distance at most `r`.
    pub fn ball_prefix(&self, r: usize) -> usize {
        self.layer_starts[(r + 1).min(self.radius + 1)]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        (0..=self.radius).map(|r| self.sphere(r).len()).collect()
    }

    /// Word distance from the root.
    pub fn distance(&self, v: usize) -> usize {
        self.layer_starts.partition_point(|&s| s <= v) - 1
    }

    /// True when the ball is the whole (finite) group.
    pub fn is_closed(&self) -> bool {
        self.sphere(self.radius).is_empty() || self.adjacency.iter().all(|&t| t != OUTSIDE)
    }

    /// `u v label` lines, one per directed generator edge inside the ball.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for v in 0..self.len() {
            for s in 0..self.rank {
                if let Some(t) = self.neighbor(v, s) {
                    let _ = writeln!(out, "{v} {t} {}", self.labels[s]);
                }
            }
        }
        out
    }

    /// Undirected multigraph in Graphviz format; an edge and its reverse are drawn once.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph cayley {\n  0 [shape=doublecircle];\n");
        for v in 0..self.len() {
            for s in 0..self.rank {
                let Some(t) = self.neighbor(v, s) else {
                    continue;
                };
                let inv = self.inverse_generator[s];
                if (v, s) <= (t, inv) {
                    let _ = writeln!(out, "  {v} -- {t} [label=\"{}\"];", self.labels[s]);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn bfs_ball(g: &dyn MarkedGroup, n: usize) -> Result<CayleyBall, ResourceError> {
    bfs_ball_with_budget(g, n, DEFAULT_VERTEX_BUDGET)
}

/// Breadth-first enumeration. Products of each sphere are computed in
/// parallel and inserted in a fixed order, so numbering is deterministic.
pub fn bfs_ball_with_budget(
    g: &dyn MarkedGroup,
    n: usize,
    budget: usize,
) -> Result<CayleyBall, ResourceError> {
    let k = g.rank();
    let gens: Vec<Element> = (0..k).map(|i| g.generator(i)).collect();
    let mut vertices = FxIndexSet::default();
    vertices.insert(g.identity());
    let mut layer_starts = vec![0, 1];
    let mut adjacency: Vec<u32> = Vec::new();
    for r in 0..=n {
        let (lo, hi) = (layer_starts[r], layer_starts[r + 1]);
        // bounded chunks keep the transient product buffer small next to the budget
        for chunk_start in (lo..hi).step_by(BFS_CHUNK) {
            let chunk = chunk_start..hi.min(chunk_start + BFS_CHUNK);
            let products: Vec<Element> = chunk
                .into_par_iter()
                .flat_map_iter(|v| {
                    let x = &vertices[v];
                    gens.iter().map(move |s| g.mul(x, s))
                })
                .collect();
            adjacency.reserve(products.len());
            for p in products {
                let idx = if r < n {
                    vertices.insert_full(p).0
                } else {
                    vertices.get_index_of(&p).unwrap_or(OUTSIDE as usize)
                };
                if vertices.len() > budget {
                    return Err(ResourceError {
                        budget,
                        achieved_radius: r,
                        vertices: layer_starts[r + 1],
                    });
                }
                adjacency.push(idx as u32);
            }
        }
        if r < n {
            layer_starts.push(vertices.len());
        }
    }
    Ok(CayleyBall {
        radius: n,
        rank: k,
        vertices,
        layer_starts,
        adjacency,
        inverse_generator: (0..k).map(|s| g.inverse_generator(s)).collect(),
        labels: (0..k).map(|s| g.generator_label(s)).collect(),
    })
}

/// Order of a finite group by closure, or an error once `budget` is exceeded.
pub fn group_order(g: &dyn MarkedGroup, budget: usize) -> Result<usize, ResourceError> {
    let mut r = 1;
    loop {
        let ball = bfs_ball_with_budget(g, r, budget)?;
        if ball.sphere(r).is_empty() {
            return Ok(ball.len());
        }
        r *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Cogrowth,
    Growth,
    Saw,
}

/// Exact counts indexed from `n = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    pub kind: CountKind,
    pub rank: usize,
    pub values: Vec<BigUint>,
}

pub(crate) fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl CountSeries {
    /// `c(n)^{1/n}/k`, `log b(n)/(n k)` or `υ(n)^{1/n}`; `None` at `n = 0` or for zero counts.
    pub fn normalized(&self, n: usize) -> Option<f64> {
        let v = &self.values[n];
        if n == 0 || v.is_zero() {
            return None;
        }
        let l = ln_big(v);
        Some(match self.kind {
            CountKind::Cogrowth => (l / n as f64).exp() / self.rank as f64,
            CountKind::Growth => l / (n as f64 * self.rank as f64),
            CountKind::Saw => (l / n as f64).exp(),
        })
    }

    /// Columns `n,value,normalized_value`; the normalized column is empty where undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value,normalized_value\n");
        for (n, v) in self.values.iter().enumerate() {
            let norm = self
                .normalized(n)
                .map(|x| format!("{x:.12}"))
                .unwrap_or_default();
            let _ = writeln!(out, "{n},{v},{norm}");
        }
        out
    }

    pub fn to_u64(&self) -> Vec<u64> {
        self.values
            .iter()
            .map(|v| v.to_u64().expect("count exceeds u64"))
            .collect()
    }
}

pub(crate) trait Count:
    Clone + Zero + One + for<'a> AddAssign<&'a Self> + Send + Sync + Into<BigUint>
{
}
impl Count for u128 {}
impl Count for BigUint {}

/// One step of walk counting: `next[w] = Σ_s cur[w s^{-1}]` for `w < live`.
pub(crate) fn walk_step<T: Count>(ball: &CayleyBall, cur: &[T], live: usize) -> Vec<T> {
    (0..live)
        .into_par_iter()
        .map(|w| {
            let mut acc = T::zero();
            for s in 0..ball.rank {
                let v = ball.raw_neighbor(w, ball.inverse_generator[s]);
                if v != OUTSIDE {
                    acc += &cur[v as usize];
                }
            }
            acc
        })
        .collect()
}

/// Closed walks at the root by dynamic programming over the ball; walks that
/// leave the ball cannot return within `n_max` steps.
fn closed_walks<T: Count>(ball: &CayleyBall, n_max: usize) -> Vec<BigUint> {
    let mut cur: Vec<T> = vec![T::zero(); ball.len()];
    cur[0] = T::one();
    let mut out = vec![BigUint::one()];
    for t in 1..=n_max {
        // only vertices that can still return in the remaining steps matter
        let live = ball.ball_prefix(t.min(n_max - t));
        let mut next: Vec<T> = walk_step(ball, &cur, live);
        out.push(next[0].clone().into());
        next.resize(ball.len(), T::zero());
        cur = next;
    }
    out
}

/// Exact `c(0..=n_max)`: generator words of length `n` equal to the identity.
pub fn cogrowth(g: &dyn MarkedGroup, n_max: usize) -> Result<CountSeries, ResourceError> {
    let ball = bfs_ball(g, n_max / 2)?;
    Ok(cogrowth_on_ball(&ball, n_max))
}

/// As [`cogrowth`] on a ball of radius at least `n_max / 2`.
pub fn cogrowth_on_ball(ball: &CayleyBall, n_max: usize) -> CountSeries {
    assert!(
        ball.radius() >= n_max / 2,
        "ball too small for cogrowth up to {n_max}"
    );
    let fits_u128 = (ball.rank.max(2) as f64).log2() * n_max as f64 <= 126.0;
    let values = if fits_u128 {
        closed_walks::<u128>(ball, n_max)
    } else {
        closed_walks::<BigUint>(ball, n_max)
    };
    CountSeries {
        kind: CountKind::Cogrowth,
        rank: ball.rank,
        values,
    }
}

/// Exact `b(0..=n_max) = |B(n)|`.
pub fn growth(g: &dyn MarkedGroup, n_max: usize) -> Result<CountSeries, ResourceError> {
    let ball = bfs_ball(g, n_max)?;
    Ok(growth_on_ball(&ball))
}

pub fn growth_on_ball(ball: &CayleyBall) -> CountSeries {
    let values = (0..=ball.radius())
        .map(|r| BigUint::from(ball.ball_prefix(r)))
        .collect();
    CountSeries {
        kind: CountKind::Growth,
        rank: ball.rank,
        values,
    }
}

/// Exact `υ(0..=n_max)`: walks from the root that never revisit a vertex.
pub fn saw_count(g: &dyn MarkedGroup, n_max: usize) -> Result<CountSeries, ResourceError> {
    let ball = bfs_ball(g, n_max)?;
    Ok(saw_count_on_ball(&ball, n_max))
}

pub fn saw_count_on_ball(ball: &CayleyBall, n_max: usize) -> CountSeries {
    assert!(
        ball.radius() >= n_max,
        "ball too small for walks of length {n_max}"
    );
    // split the search tree at a shallow depth and explore the prefixes in parallel
    let split = n_max.min(SAW_SPLIT_DEPTH);
    let mut prefixes: Vec<Vec<u32>> = vec![vec![0]];
    let mut shallow = vec![0u64; n_max + 1];
    shallow[0] = 1;
    for depth in 1..=split {
        let mut next = Vec::new();
        for p in &prefixes {
            extend_path(ball, p, |q| next.push(q));
        }
        shallow[depth] = next.len() as u64;
        prefixes = next;
    }
    let deep: Vec<u64> = prefixes
        .par_iter()
        .map(|p| {
            let mut counts = vec![0u64; n_max + 1];
            let mut path = p.clone();
            saw_dfs(ball, &mut path, n_max, &mut counts);
            counts
        })
        .reduce(
            || vec![0u64; n_max + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let values = (0..=n_max)
        .map(|n| BigUint::from(if n <= split { shallow[n] } else { deep[n] }))
        .collect();
    CountSeries {
        kind: CountKind::Saw,
        rank: ball.rank,
        values,
    }
}

const SAW_SPLIT_DEPTH: usize = 4;

fn extend_path(ball: &CayleyBall, path: &[u32], mut f: impl FnMut(Vec<u32>)) {
    let last = *path.last().unwrap() as usize;
    for s in 0..ball.rank {
        let t = ball.raw_neighbor(last, s);
        if t != OUTSIDE && !path.contains(&t) {
            let mut q = path.to_vec();
            q.push(t);
            f(q);
        }
    }
}

fn saw_dfs(ball: &CayleyBall, path: &mut Vec<u32>, n_max: usize, counts: &mut [u64]) {
    let len = path.len() - 1;
    if len > SAW_SPLIT_DEPTH.min(n_max) {
        counts[len] += 1;
    }
    if len == n_max {
        return;
    }
    let last = *path.last().unwrap() as usize;
    for s in 0..ball.rank {
        let t = ball.raw_neighbor(last, s);
        if t != OUTSIDE && !path.contains(&t) {
            path.push(t);
            saw_dfs(ball, path, n_max, counts);
            path.pop();
        }
    }
}

/// Candidate families for the Cheeger infimum.
#[derive(Debug, Clone)]
pub enum CheegerStrategy {
    /// Balls of radius `0..=n_max`.
    Balls,
    /// Start from the best ball and flip single vertices while the ratio
    /// strictly drops, for at most `max_moves` accepted moves.
    GreedyLocalSearch { max_moves: usize },
    /// Explicit finite sets, given as group elements.
    Sets(Vec<Vec<Element>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheegerBound {
    pub label: String,
    pub size: u64,
    pub boundary: u64,
    /// `|∂_E X| / (k |X|)` for this candidate.
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Ratio<u64>,
    /// Minimum ratio seen so far: a certified upper bound on the Cheeger constant.
    #[serde(serialize_with = "ser_ratio")]
    pub upper_bound: Ratio<u64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Upper bounds on `φ(G,S) = inf_X |E(X, G∖X)| / (k|X|)`, where the edge
/// boundary counts pairs `(x, s)` with `x ∈ X`, `xs ∉ X`.
pub fn cheeger_upper(
    g: &dyn MarkedGroup,
    strategy: &CheegerStrategy,
    n_max: usize,
) -> Result<Vec<CheegerBound>, ResourceError> {
    let k = g.rank() as u64;
    let mut raw: Vec<(String, u64, u64)> = Vec::new();
    match strategy {
        CheegerStrategy::Balls => {
            let ball = bfs_ball(g, n_max)?;
            for r in 0..=n_max {
                let (size, boundary) = ball_boundary(&ball, r);
                raw.push((format!("ball({r})"), size, boundary));
            }
        }
        CheegerStrategy::GreedyLocalSearch { max_moves } => {
            let ball = bfs_ball(g, n_max)?;
            let mut best = (0, ball_boundary(&ball, 0));
            for r in 0..=n_max {
                let (size, boundary) = ball_boundary(&ball, r);
                raw.push((format!("ball({r})"), size, boundary));
                if Ratio::new(boundary, size) < Ratio::new(best.1 .1, best.1 .0) {
                    best = (r, (size, boundary));
                }
            }
            let (size, boundary) = greedy_search(&ball, best.0, *max_moves);
            raw.push((format!("greedy(ball({}))", best.0), size, boundary));
        }
        CheegerStrategy::Sets(sets) => {
            for (i, set) in sets.iter().enumerate() {
                let members: FxHashSet<&Element> = set.iter().collect();
                let mut boundary = 0u64;
                for x in &members {
                    for s in 0..g.rank() {
                        if !members.contains(&g.mul(x, &g.generator(s))) {
                            boundary += 1;
                        }
                    }
                }
                raw.push((format!("set{i}"), members.len() as u64, boundary));
            }
        }
    }
    let mut best: Option<Ratio<u64>> = None;
    Ok(raw
        .into_iter()
        .filter(|(_, size, _)| *size > 0)
        .map(|(label, size, boundary)| {
            let ratio = Ratio::new(boundary, k * size);
            let upper = best.map_or(ratio, |b| b.min(ratio));
            best = Some(upper);
            CheegerBound {
                label,
                size,
                boundary,
                ratio,
                upper_bound: upper,
            }
        })
        .collect())
}

fn ball_boundary(ball: &CayleyBall, r: usize) -> (u64, u64) {
    let inside = ball.ball_prefix(r);
    let boundary = (0..inside)
        .into_par_iter()
        .map(|v| {
            (0..ball.rank)
                .filter(|&s| ball.raw_neighbor(v, s) as usize >= inside)
                .count() as u64
        })
        .sum();
    (inside as u64, boundary)
}

fn greedy_search(ball: &CayleyBall, r: usize, max_moves: usize) -> (u64, u64) {
    let mut member = vec![false; ball.len()];
    let inside = ball.ball_prefix(r);
    member[..inside].iter_mut().for_each(|m| *m = true);
    let (mut size, mut boundary) = ball_boundary(ball, r);
    // boundary change when v flips: its own out-edges and the edges pointing at it
    let delta = |member: &[bool], v: usize| -> i64 {
        let mut out_now = 0i64;
        let mut into = 0i64;
        for s in 0..ball.rank {
            let t = ball.raw_neighbor(v, s);
            let t_in = t != OUTSIDE && member[t as usize];
            if !t_in {
                out_now += 1;
            }
            if t_in && t as usize != v {
                into += 1;
            }
        }
        if member[v] {
            // removing v: its outgoing boundary vanishes, edges from members into v become boundary
            -out_now + into
        } else {
            let out_after = (0..ball.rank)
                .filter(|&s| {
                    let t = ball.raw_neighbor(v, s);
                    !(t != OUTSIDE && (member[t as usize] || t as usize == v))
                })
                .count() as i64;
            out_after - into
        }
    };
    let mut moves = 0;
    let mut improved = true;
    while improved && moves < max_moves {
        improved = false;
        // vertices on the outer sphere have unknown neighbors; keep them out
        for v in 0..ball.ball_prefix(ball.radius().saturating_sub(1)) {
            if member[v] && size == 1 {
                continue;
            }
            let d = delta(&member, v);
            let new_size = if member[v] { size - 1 } else { size + 1 };
            let new_boundary = boundary as i64 + d;
            if (new_boundary as u128) * (size as u128) < (boundary as u128) * (new_size as u128) {
                member[v] = !member[v];
                size = new_size;
                boundary = new_boundary as u64;
                moves += 1;
                improved = true;
                if moves >= max_moves {
                    break;
                }
            }
        }
    }
    (size, boundary)
}

/// Axis-aligned boxes `{0..side}^d` in `Z^d`, one per side length.
pub fn grid_boxes(dim: usize, sides: &[usize]) -> Vec<Vec<Element>> {
    sides
        .iter()
        .map(|&side| {
            let total = side.pow(dim as u32);
            (0..total)
                .map(|mut idx| {
                    let mut p = smallvec::SmallVec::<[i64; 4]>::new();
                    for _ in 0..dim {
                        p.push((idx % side) as i64);
                        idx /= side;
                    }
                    Element::Abelian(p)
                })
                .collect()
        })
        .collect()
}
