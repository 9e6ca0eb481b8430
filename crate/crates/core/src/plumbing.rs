//! Plumbing graphs: weighted simple graphs whose weighted adjacency matrix is
//! the intersection form of the plumbed 4-manifold.
//!
//! Text format, one item per line:
//!
//! ```text
//! # comment
//! v <id> <weight>
//! e <id> <id>
//! ```
//!
//! Vertex ids must be listed in order `0, 1, …, k-1`; that order is the basis
//! order of the Gram matrix. Loops and repeated edges are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact_linalg::{is_negative_definite, solve_rational, Gram, Matrix, Scalar};
use crate::{GramMatrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlumbingError {
    #[error("edge {0}-{0} is a loop")]
    Loop(usize),
    #[error("edge {0}-{1} appears more than once")]
    MultiEdge(usize, usize),
    #[error("edge references unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph is empty")]
    Empty,
    #[error("Laufer requires negative definite")]
    NotNegativeDefinite,
    #[error("invalid parameters: {0}")]
    Parameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedGraph {
    weights: Vec<i64>,
    edges: BTreeSet<(usize, usize)>,
}

impl WeightedGraph {
    pub fn new(
        weights: Vec<i64>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PlumbingError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= weights.len() {
                return Err(PlumbingError::UnknownVertex(a));
            }
            if b >= weights.len() {
                return Err(PlumbingError::UnknownVertex(b));
            }
            if a == b {
                return Err(PlumbingError::Loop(a));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(PlumbingError::MultiEdge(a.min(b), a.max(b)));
            }
        }
        Ok(WeightedGraph { weights, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> i64 {
        self.weights[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0 && self.is_connected() && self.edge_count() + 1 == self.vertex_count()
    }

    /// Renames vertex `v` to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut weights = vec![0; self.vertex_count()];
        for (v, &w) in self.weights.iter().enumerate() {
            weights[perm[v]] = w;
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b]));
        WeightedGraph::new(weights, edges).expect("relabeling preserves simplicity")
    }

    /// Disjoint union; the other graph's vertices follow this graph's.
    pub fn disjoint_union(&self, other: &WeightedGraph) -> Self {
        let shift = self.vertex_count();
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        let edges = self.edges().chain(other.edges().map(|(a, b)| (a + shift, b + shift)));
        WeightedGraph::new(weights, edges).expect("disjoint union of simple graphs is simple")
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut weights = Vec::new();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ParseError { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields.as_slice() {
                ["v", id, weight] => {
                    let id: usize = id.parse().map_err(|_| err(format!("bad vertex id '{id}'")))?;
                    let weight: i64 = weight.parse().map_err(|_| err(format!("bad weight '{weight}'")))?;
                    if id != weights.len() {
                        return Err(err(format!("expected vertex id {}, found {id}", weights.len())));
                    }
                    weights.push(weight);
                }
                ["e", a, b] => {
                    let a: usize = a.parse().map_err(|_| err(format!("bad vertex id '{a}'")))?;
                    let b: usize = b.parse().map_err(|_| err(format!("bad vertex id '{b}'")))?;
                    edges.push((line, a, b));
                }
                _ => return Err(err(format!("unrecognized line '{content}'"))),
            }
        }
        let mut set = BTreeSet::new();
        for &(line, a, b) in &edges {
            let err = |message: String| ParseError { line, message };
            for v in [a, b] {
                if v >= weights.len() {
                    return Err(err(format!("edge references unknown vertex {v}")));
                }
            }
            if a == b {
                return Err(err(format!("loop at vertex {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(err(format!("repeated edge {a}-{b}")));
            }
        }
        Ok(WeightedGraph { weights, edges: set })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, w) in self.weights.iter().enumerate() {
            writeln!(out, "v {v} {w}").unwrap();
        }
        for (a, b) in self.edges() {
            writeln!(out, "e {a} {b}").unwrap();
        }
        out
    }
}

/// Weighted adjacency matrix in any scalar type.
pub fn gram_matrix_as<T: Scalar + From<i64>>(g: &WeightedGraph) -> Gram<T> {
    let n = g.vertex_count();
    let mut m = Matrix::<T>::zeros(n, n);
    for (v, &w) in g.weights.iter().enumerate() {
        m[(v, v)] = T::from(w);
    }
    for (a, b) in g.edges() {
        m[(a, b)] = T::one();
        m[(b, a)] = T::one();
    }
    Gram::new(m).expect("adjacency matrices are symmetric")
}

pub fn gram_matrix(g: &WeightedGraph) -> GramMatrix {
    gram_matrix_as::<BigInt>(g)
}

/// The plumbing graph bounding the branched double cover of the knot 11n50.
///
/// Vertices 0..7 carry weights (-2,-3,-2,-2,-3,-2,-2): a path 0-1-2-3-4 with
/// a second path 2-5-6 hanging off vertex 2.
pub fn graph_11n50() -> WeightedGraph {
    WeightedGraph::new(vec![-2, -3, -2, -2, -3, -2, -2], [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)])
        .expect("static graph")
}

fn check_pretzel_params(p: &[u64], q: u64, min_q: u64) -> Result<(), PlumbingError> {
    if p.len() < 2 {
        return Err(PlumbingError::Parameters(format!("need at least two p entries, got {}", p.len())));
    }
    if let Some(bad) = p.iter().find(|&&x| x < 2) {
        return Err(PlumbingError::Parameters(format!("p entries must be >= 2, got {bad}")));
    }
    if q < min_q {
        return Err(PlumbingError::Parameters(format!("q must be >= {min_q}, got {q}")));
    }
    Ok(())
}

fn to_weight(x: u64) -> Result<i64, PlumbingError> {
    i64::try_from(x).map_err(|_| PlumbingError::Parameters(format!("{x} does not fit a weight")))
}

/// Star-shaped plumbing for `P(p₁, …, pₙ, -q)`.
///
/// Vertex 0 is the center (weight `-n`); then, for each `pᵢ`, a path of
/// `pᵢ - 1` vertices of weight `-2` moving away from the center; the last
/// vertex is the `-q` leaf.
pub fn pretzel_plumbing(p: &[u64], q: u64) -> Result<WeightedGraph, PlumbingError> {
    check_pretzel_params(p, q, 1)?;
    let mut weights = vec![-to_weight(p.len() as u64)?];
    let mut edges = Vec::new();
    for &pi in p {
        let mut prev = 0;
        for _ in 0..pi - 1 {
            let v = weights.len();
            weights.push(-2);
            edges.push((prev, v));
            prev = v;
        }
    }
    let leaf = weights.len();
    weights.push(-to_weight(q)?);
    edges.push((0, leaf));
    WeightedGraph::new(weights, edges)
}

/// Star-shaped plumbing for the mirror of `P(p₁, …, pₙ, -q)`.
///
/// Vertex 0 is the center (weight `-1`), vertices `1..=n` are leaves of
/// weight `-pᵢ`, followed by a path of `q - 1` vertices of weight `-2`
/// (empty when `q = 1`).
pub fn mirror_pretzel_plumbing(p: &[u64], q: u64) -> Result<WeightedGraph, PlumbingError> {
    check_pretzel_params(p, q, 1)?;
    let mut weights = vec![-1];
    let mut edges = Vec::new();
    for &pi in p {
        let v = weights.len();
        weights.push(-to_weight(pi)?);
        edges.push((0, v));
    }
    let mut prev = 0;
    for _ in 0..q - 1 {
        let v = weights.len();
        weights.push(-2);
        edges.push((prev, v));
        prev = v;
    }
    WeightedGraph::new(weights, edges)
}

/// `1/p₁ + … + 1/pₙ - 1/q > 0`, decided exactly.
pub fn seifert_negdef_criterion(p: &[u64], q: u64) -> bool {
    let sum = p.iter().fold(Rational::zero(), |acc, &x| acc + Rational::new(BigInt::one(), BigInt::from(x)));
    sum > Rational::new(BigInt::one(), BigInt::from(q))
}

/// A non-negative integer combination of the vertex classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub coefficients: Vec<u64>,
}

impl Cycle {
    pub fn reduced(n: usize) -> Self {
        Cycle { coefficients: vec![1; n] }
    }

    fn as_i64(&self) -> Vec<i64> {
        self.coefficients.iter().map(|&c| c as i64).collect()
    }
}

fn require_definite_connected(g: &WeightedGraph) -> Result<Gram<i64>, PlumbingError> {
    if g.vertex_count() == 0 {
        return Err(PlumbingError::Empty);
    }
    if !g.is_connected() {
        return Err(PlumbingError::NotConnected);
    }
    let q = gram_matrix_as::<i64>(g);
    if !is_negative_definite(&q) {
        return Err(PlumbingError::NotNegativeDefinite);
    }
    Ok(q)
}

/// Laufer's iteration for the minimal positive cycle `Z` with `Z·Eᵥ ≤ 0` for
/// every vertex, started at `Z = E_start`.
pub fn fundamental_cycle_from(g: &WeightedGraph, start: usize) -> Result<Cycle, PlumbingError> {
    let q = require_definite_connected(g)?;
    if start >= g.vertex_count() {
        return Err(PlumbingError::UnknownVertex(start));
    }
    Ok(laufer_iterate(&q, start))
}

pub fn fundamental_cycle(g: &WeightedGraph) -> Result<Cycle, PlumbingError> {
    fundamental_cycle_from(g, 0)
}

fn laufer_iterate(q: &Gram<i64>, start: usize) -> Cycle {
    let n = q.rank();
    let mut z = vec![0u64; n];
    z[start] = 1;
    // pairings[u] = Z · E_u
    let mut pairings: Vec<i64> = (0..n).map(|u| q[(start, u)]).collect();
    while let Some(u) = (0..n).find(|&u| pairings[u] > 0) {
        z[u] += 1;
        for (w, p) in pairings.iter_mut().enumerate() {
            *p += q[(u, w)];
        }
    }
    Cycle { coefficients: z }
}

/// Adjunction values `K·Eᵥ = -Eᵥ·Eᵥ - 2`.
fn adjunction(g: &WeightedGraph) -> Vec<i64> {
    g.weights.iter().map(|&w| -w - 2).collect()
}

/// The canonical class `K` in the rational span of the vertex classes,
/// determined by adjunction.
pub fn canonical_class(g: &WeightedGraph) -> Result<Vec<Rational>, PlumbingError> {
    let q = gram_matrix(g);
    let rhs: Vec<BigInt> = adjunction(g).into_iter().map(BigInt::from).collect();
    solve_rational(q.matrix(), &rhs).map_err(|_| PlumbingError::NotNegativeDefinite)
}

/// `χ(Z) = -(Z·Z + Z·K)/2`.
pub fn euler_characteristic(g: &WeightedGraph, z: &Cycle) -> Rational {
    let q = gram_matrix_as::<i64>(g);
    let zi = z.as_i64();
    let zz = q.pairing(&zi, &zi);
    let zk: i64 = zi.iter().zip(adjunction(g)).map(|(a, b)| a * b).sum();
    Ratio::new(BigInt::from(-(zz + zk)), BigInt::from(2))
}

/// Artin's criterion `χ(Z_min) = 1`.
///
/// If the reduced cycle already pairs to 2 or more with some vertex, Laufer's
/// rationality test stops at its first step; a graph that fails there is not
/// a rational singularity link whether or not it is definite, so that case
/// returns `false` without the definiteness precondition.
pub fn is_rational(g: &WeightedGraph) -> Result<bool, PlumbingError> {
    if g.vertex_count() == 0 {
        return Err(PlumbingError::Empty);
    }
    if !g.is_connected() {
        return Err(PlumbingError::NotConnected);
    }
    let q = gram_matrix_as::<i64>(g);
    let reduced = vec![1i64; g.vertex_count()];
    let first = q.matrix().mul_vec(&reduced).expect("square");
    if first.iter().any(|&p| p >= 2) {
        return Ok(false);
    }
    let z = fundamental_cycle(g)?;
    Ok(euler_characteristic(g, &z) == Rational::one())
}
