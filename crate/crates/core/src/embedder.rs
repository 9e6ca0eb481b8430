//! Exhaustive enumeration of lattice embeddings into the negative diagonal
//! lattice `-Zⁿ`.
//!
//! An embedding of a negative definite Gram matrix `Q` (rank `k`) is an
//! `n × k` integer matrix `A` with `AᵀA = -Q`; column `j` is the image of the
//! `j`-th basis vector. The symmetry group of `-Zⁿ` (signed permutations of
//! the coordinates) acts on the rows of `A`.
//!
//! Orbit representatives are chosen as follows. Fix a column order. A matrix
//! is canonical when each nonzero row has its first nonzero entry (in column
//! order) positive and the rows are sorted in non-increasing lexicographic
//! order, which puts zero rows last. Every orbit contains exactly one such
//! matrix. Both conditions restrict to prefixes of the column order, so the
//! search builds columns one at a time and only ever extends canonical
//! prefixes:
//!
//! * rows whose prefix is still zero ("fresh" rows) can only receive
//!   non-negative entries, in non-increasing order;
//! * rows whose prefixes coincide must receive non-increasing entries.

use thiserror::Error;

use crate::exact_linalg::{is_negative_definite, Gram, Matrix};
use crate::{GramMatrix, SmallMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("form is not negative definite")]
    NotNegativeDefinite,
    #[error("form entries are too large for the search")]
    Overflow,
}

/// An isometric embedding into `-Zⁿ`, columns in the Gram matrix's basis order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub ambient_rank: usize,
    columns: Vec<Vec<i64>>,
}

impl Embedding {
    pub fn from_columns(ambient_rank: usize, columns: Vec<Vec<i64>>) -> Self {
        assert!(columns.iter().all(|c| c.len() == ambient_rank), "column length must equal the ambient rank");
        Embedding { ambient_rank, columns }
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[i64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<i64>] {
        &self.columns
    }

    pub fn matrix(&self) -> SmallMatrix {
        Matrix::from_columns(self.ambient_rank, &self.columns).expect("columns have ambient length")
    }

    pub fn support(&self, j: usize) -> Vec<usize> {
        self.columns[j].iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, _)| i).collect()
    }

    /// Number of coordinates used by at least one column.
    pub fn used_rows(&self) -> usize {
        (0..self.ambient_rank).filter(|&r| self.columns.iter().any(|c| c[r] != 0)).count()
    }

    /// `AᵀA = -Q`.
    pub fn is_isometric(&self, q: &Gram<i64>) -> bool {
        let k = self.rank();
        if q.rank() != k {
            return false;
        }
        (0..k).all(|i| (i..k).all(|j| dot(&self.columns[i], &self.columns[j]) == -q[(i, j)]))
    }

    /// Orbit representative under signed coordinate permutations, relative to
    /// the given column order.
    pub fn canonical_form(&self, order: &[usize]) -> Embedding {
        let mut rows: Vec<Vec<i64>> =
            (0..self.ambient_rank).map(|r| order.iter().map(|&j| self.columns[j][r]).collect()).collect();
        for row in rows.iter_mut() {
            if row.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                row.iter_mut().for_each(|x| *x = -*x);
            }
        }
        rows.sort_by(|a, b| b.cmp(a));
        let mut columns = vec![vec![0; self.ambient_rank]; self.rank()];
        for (r, row) in rows.iter().enumerate() {
            for (pos, &j) in order.iter().enumerate() {
                columns[j][r] = row[pos];
            }
        }
        Embedding { ambient_rank: self.ambient_rank, columns }
    }

    /// Same embedding with every coordinate that no column uses removed.
    pub fn trimmed(&self) -> Embedding {
        let keep: Vec<usize> =
            (0..self.ambient_rank).filter(|&r| self.columns.iter().any(|c| c[r] != 0)).collect();
        let columns = self.columns.iter().map(|c| keep.iter().map(|&r| c[r]).collect()).collect();
        Embedding { ambient_rank: keep.len(), columns }
    }

    /// Appends zero coordinates up to the given ambient rank.
    pub fn padded(&self, ambient_rank: usize) -> Embedding {
        assert!(ambient_rank >= self.ambient_rank);
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.resize(ambient_rank, 0);
                c
            })
            .collect();
        Embedding { ambient_rank, columns }
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limits on a single embedding search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest ambient rank tried by the obstruction; `None` means the completeness bound.
    pub max_ambient_rank: Option<usize>,
    pub node_limit: u64,
    pub solution_limit: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_ambient_rank: None, node_limit: 100_000_000, solution_limit: u64::MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Complete,
    NodeLimitReached,
    SolutionLimitReached,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub ambient_rank: usize,
    pub embeddings: Vec<Embedding>,
    pub status: SearchStatus,
    pub nodes: u64,
}

impl SearchOutcome {
    pub fn is_complete(&self) -> bool {
        self.status == SearchStatus::Complete
    }
}

/// All `v ∈ Zⁿ` with `Σ vᵢ² = m`, in lexicographic order.
pub fn vectors_of_norm(m: u64, n: usize) -> Vec<Vec<i64>> {
    fn rec(rem: u64, slots: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if slots == 0 {
            if rem == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let s = rem.isqrt() as i64;
        for x in -s..=s {
            prefix.push(x);
            rec(rem - (x * x) as u64, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `Σ |Qᵢᵢ|`: image vectors have at most `|Qᵢᵢ|` nonzero coordinates, so every
/// embedding fits in this many coordinates.
pub fn completeness_bound<T: crate::Scalar>(q: &Gram<T>) -> usize {
    q.diagonal()
        .iter()
        .map(|d| d.abs().to_usize().unwrap_or(usize::MAX))
        .fold(0usize, |a, b| a.saturating_add(b))
}

/// Placement order: descending `|Qᵢᵢ|`, then descending degree, then index.
pub fn column_order(q: &Gram<i64>) -> Vec<usize> {
    let k = q.rank();
    let degree = |i: usize| (0..k).filter(|&j| j != i && q[(i, j)] != 0).count();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        q[(b, b)].abs().cmp(&q[(a, a)].abs()).then(degree(b).cmp(&degree(a))).then(a.cmp(&b))
    });
    order
}

pub(crate) fn small_form(q: &GramMatrix) -> Result<Gram<i64>, EmbedError> {
    let small: Gram<i64> = q.try_cast().map_err(|_| EmbedError::Overflow)?;
    // norms are summed and squared inside the search
    if small.diagonal().iter().any(|d| d.unsigned_abs() > 1 << 20) {
        return Err(EmbedError::Overflow);
    }
    if !is_negative_definite(&small) {
        return Err(EmbedError::NotNegativeDefinite);
    }
    Ok(small)
}

/// Enumerates embeddings of `Q` into `-Zⁿ`.
///
/// With `up_to_symmetry`, one canonical representative per orbit of signed
/// coordinate permutations is returned; otherwise every embedding. Results
/// are sorted. A search that hits the budget returns what it found with a
/// non-`Complete` status.
pub fn find_embeddings(
    q: &GramMatrix,
    n: usize,
    budget: &SearchBudget,
    up_to_symmetry: bool,
) -> Result<SearchOutcome, EmbedError> {
    let small = small_form(q)?;
    let mut sink = Collect { found: Vec::new(), limit: budget.solution_limit };
    let (status, nodes) = if up_to_symmetry {
        run_canonical_search(&small, n, budget.node_limit, &mut sink)
    } else {
        run_plain_search(&small, n, budget.node_limit, &mut sink)
    };
    let mut embeddings = sink.found;
    embeddings.sort();
    Ok(SearchOutcome { ambient_rank: n, embeddings, status, nodes })
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

pub(crate) trait Visitor {
    fn found(&mut self, embedding: Embedding) -> Flow;
}

struct Collect {
    found: Vec<Embedding>,
    limit: u64,
}

impl Visitor for Collect {
    fn found(&mut self, embedding: Embedding) -> Flow {
        self.found.push(embedding);
        if self.found.len() as u64 >= self.limit {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

fn assemble(n: usize, k: usize, placed: &[usize], columns: &[Vec<i64>]) -> Embedding {
    let mut out = vec![Vec::new(); k];
    for (pos, &j) in placed.iter().enumerate() {
        out[j] = columns[pos].clone();
    }
    Embedding { ambient_rank: n, columns: out }
}

enum Halt {
    Nodes,
    Solutions,
}

/// Search without symmetry reduction: every column is drawn from the full
/// list of vectors of its norm.
pub(crate) fn run_plain_search<V: Visitor>(
    q: &Gram<i64>,
    n: usize,
    node_limit: u64,
    visitor: &mut V,
) -> (SearchStatus, u64) {
    struct Plain<'a, V> {
        q: &'a Gram<i64>,
        n: usize,
        order: Vec<usize>,
        pools: Vec<Vec<Vec<i64>>>,
        placed: Vec<usize>,
        columns: Vec<Vec<i64>>,
        nodes: u64,
        node_limit: u64,
        visitor: &'a mut V,
    }

    impl<V: Visitor> Plain<'_, V> {
        fn go(&mut self, depth: usize) -> Result<(), Halt> {
            if depth == self.order.len() {
                let e = assemble(self.n, self.order.len(), &self.placed, &self.columns);
                return match self.visitor.found(e) {
                    Flow::Continue => Ok(()),
                    Flow::Stop => Err(Halt::Solutions),
                };
            }
            let c = self.order[depth];
            for idx in 0..self.pools[depth].len() {
                let ok = self
                    .placed
                    .iter()
                    .zip(&self.columns)
                    .all(|(&j, col)| dot(&self.pools[depth][idx], col) == -self.q[(c, j)]);
                if !ok {
                    continue;
                }
                self.nodes += 1;
                if self.nodes > self.node_limit {
                    return Err(Halt::Nodes);
                }
                let v = self.pools[depth][idx].clone();
                self.placed.push(c);
                self.columns.push(v);
                let r = self.go(depth + 1);
                self.placed.pop();
                self.columns.pop();
                r?;
            }
            Ok(())
        }
    }

    let order = column_order(q);
    let pools = order.iter().map(|&c| vectors_of_norm(q[(c, c)].unsigned_abs(), n)).collect();
    let mut s =
        Plain { q, n, order, pools, placed: Vec::new(), columns: Vec::new(), nodes: 0, node_limit, visitor };
    let status = match s.go(0) {
        Ok(()) => SearchStatus::Complete,
        Err(Halt::Nodes) => SearchStatus::NodeLimitReached,
        Err(Halt::Solutions) => SearchStatus::SolutionLimitReached,
    };
    (status, s.nodes)
}

/// Canonical-extension search producing one representative per orbit.
pub(crate) fn run_canonical_search<V: Visitor>(
    q: &Gram<i64>,
    n: usize,
    node_limit: u64,
    visitor: &mut V,
) -> (SearchStatus, u64) {
    let order = column_order(q);
    let mut s = Canonical {
        q,
        n,
        order,
        placed: Vec::new(),
        columns: Vec::new(),
        used: 0,
        tied: vec![false; n],
        nodes: 0,
        node_limit,
        visitor,
    };
    let status = match s.go(0) {
        Ok(()) => SearchStatus::Complete,
        Err(Halt::Nodes) => SearchStatus::NodeLimitReached,
        Err(Halt::Solutions) => SearchStatus::SolutionLimitReached,
    };
    (status, s.nodes)
}

struct Canonical<'a, V> {
    q: &'a Gram<i64>,
    n: usize,
    order: Vec<usize>,
    placed: Vec<usize>,
    /// Placed columns, each of length `n`.
    columns: Vec<Vec<i64>>,
    /// Rows `0..used` have a nonzero prefix; the rest are still zero.
    used: usize,
    /// `tied[r]`: row `r` has the same prefix as row `r - 1`.
    tied: Vec<bool>,
    nodes: u64,
    node_limit: u64,
    visitor: &'a mut V,
}

/// Scratch for generating one column.
struct ColumnGen {
    norm: i64,
    targets: Vec<i64>,
    /// `tail_sq[r][j] = Σ_{r' ≥ r} col_j[r']²` over used rows.
    tail_sq: Vec<Vec<i64>>,
    values: Vec<i64>,
    dots: Vec<i64>,
}

impl<V: Visitor> Canonical<'_, V> {
    fn go(&mut self, depth: usize) -> Result<(), Halt> {
        if depth == self.order.len() {
            let e = assemble(self.n, self.order.len(), &self.placed, &self.columns);
            return match self.visitor.found(e) {
                Flow::Continue => Ok(()),
                Flow::Stop => Err(Halt::Solutions),
            };
        }
        let c = self.order[depth];
        let candidates = self.candidates(c);
        for (cand, fresh) in candidates {
            self.nodes += 1;
            if self.nodes > self.node_limit {
                return Err(Halt::Nodes);
            }
            let saved_used = self.used;
            let saved_tied = self.tied.clone();
            self.apply(&cand, fresh);
            self.placed.push(c);
            self.columns.push(cand);
            let r = self.go(depth + 1);
            self.placed.pop();
            self.columns.pop();
            self.used = saved_used;
            self.tied = saved_tied;
            r?;
        }
        Ok(())
    }

    /// Updates `used` and `tied` for a new column occupying `fresh` new rows.
    fn apply(&mut self, col: &[i64], fresh: usize) {
        for r in 1..self.used {
            if self.tied[r] && col[r] != col[r - 1] {
                self.tied[r] = false;
            }
        }
        let start = self.used;
        for r in start..start + fresh {
            self.tied[r] = r > start && col[r] == col[r - 1];
        }
        self.used += fresh;
    }

    /// Canonical extensions for column `c`, with the number of fresh rows each uses.
    fn candidates(&self, c: usize) -> Vec<(Vec<i64>, usize)> {
        let placed = self.placed.len();
        let used = self.used;
        let mut tail_sq = vec![vec![0i64; placed]; used + 1];
        for r in (0..used).rev() {
            for j in 0..placed {
                let v = self.columns[j][r];
                tail_sq[r][j] = tail_sq[r + 1][j] + v * v;
            }
        }
        let mut gen = ColumnGen {
            norm: -self.q[(c, c)],
            targets: self.placed.iter().map(|&j| -self.q[(c, j)]).collect(),
            tail_sq,
            values: vec![0; self.n],
            dots: vec![0; placed],
        };
        let mut out = Vec::new();
        let norm = gen.norm;
        self.assign_used(&mut gen, 0, norm, &mut out);
        out
    }

    fn assign_used(&self, gen: &mut ColumnGen, r: usize, rem: i64, out: &mut Vec<(Vec<i64>, usize)>) {
        // Cauchy–Schwarz: the remaining used rows must be able to close every dot gap.
        for j in 0..gen.dots.len() {
            let gap = gen.targets[j] - gen.dots[j];
            if gap * gap > rem * gen.tail_sq[r][j] {
                return;
            }
        }
        if r == self.used {
            let fresh_slots = self.n - self.used;
            let mut parts = Vec::new();
            square_partitions(rem, i64::MAX, fresh_slots, &mut parts, &mut |parts| {
                let mut v = gen.values.clone();
                for (i, &a) in parts.iter().enumerate() {
                    v[self.used + i] = a;
                }
                out.push((v, parts.len()));
            });
            return;
        }
        let bound = rem.isqrt();
        let hi = if r > 0 && self.tied[r] { bound.min(gen.values[r - 1]) } else { bound };
        for x in (-bound..=hi).rev() {
            gen.values[r] = x;
            if x != 0 {
                for j in 0..gen.dots.len() {
                    gen.dots[j] += x * self.columns[j][r];
                }
            }
            self.assign_used(gen, r + 1, rem - x * x, out);
            if x != 0 {
                for j in 0..gen.dots.len() {
                    gen.dots[j] -= x * self.columns[j][r];
                }
            }
        }
        gen.values[r] = 0;
    }
}

/// Non-increasing sequences of positive integers, each at most `max`, with
/// squares summing to `rem` and length at most `slots`.
fn square_partitions(rem: i64, max: i64, slots: usize, parts: &mut Vec<i64>, emit: &mut impl FnMut(&[i64])) {
    if rem == 0 {
        emit(parts);
        return;
    }
    if slots == 0 {
        return;
    }
    let top = rem.isqrt().min(max);
    for a in (1..=top).rev() {
        // the remaining slots can absorb at most slots·a² more
        if a * a * slots as i64 >= rem {
            parts.push(a);
            square_partitions(rem - a * a, a, slots - 1, parts, emit);
            parts.pop();
        } else {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plumbing::{gram_matrix, graph_11n50};
    use num_bigint::BigInt;

    fn gram(rows: &[&[i64]]) -> GramMatrix {
        let rows: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Gram::from_rows(&rows).unwrap()
    }

    #[test]
    fn norm_vectors() {
        let v = vectors_of_norm(1, 2);
        assert_eq!(v, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(vectors_of_norm(2, 2).len(), 4);
        assert_eq!(vectors_of_norm(0, 3), vec![vec![0, 0, 0]]);
    }

    /// Brute force over the cube {-2..2}³ as the oracle for norm-4 vectors.
    #[test]
    fn norm_four_in_rank_three() {
        let mut brute = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    if a * a + b * b + c * c == 4 {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        // only (±2,0,0) fits: four unit entries need a fourth coordinate
        assert_eq!(brute.len(), 6);
        assert_eq!(vectors_of_norm(4, 3), brute);
        assert_eq!(vectors_of_norm(4, 4).len(), 8 + 16);
    }

    #[test]
    fn bounds() {
        assert_eq!(completeness_bound(&gram(&[&[-2]])), 2);
        assert_eq!(completeness_bound(&gram(&[&[-2, 1], &[1, -2]])), 4);
        assert_eq!(completeness_bound(&gram_matrix(&graph_11n50())), 16);
    }

    #[test]
    fn order_prefers_heavy_then_central() {
        let q: Gram<i64> = gram_matrix(&graph_11n50()).try_cast().unwrap();
        assert_eq!(column_order(&q), vec![1, 4, 2, 3, 5, 0, 6]);
    }

    #[test]
    fn unit_lattice() {
        let out = find_embeddings(&gram(&[&[-1]]), 1, &SearchBudget::default(), true).unwrap();
        assert!(out.is_complete());
        assert_eq!(out.embeddings, vec![Embedding::from_columns(1, vec![vec![1]])]);
    }

    #[test]
    fn a2_has_one_class() {
        let q = gram(&[&[-2, 1], &[1, -2]]);
        let out = find_embeddings(&q, 3, &SearchBudget::default(), true).unwrap();
        assert_eq!(out.embeddings.len(), 1);
        let e = &out.embeddings[0];
        // E1 - E2 and E2 - E3 up to symmetry: a path through three coordinates
        assert_eq!(e.used_rows(), 3);
        let all = find_embeddings(&q, 3, &SearchBudget::default(), false).unwrap();
        assert_eq!(all.embeddings.len(), 48);
        // at n = 2 the A2 lattice does not fit
        let out = find_embeddings(&q, 2, &SearchBudget::default(), true).unwrap();
        assert!(out.embeddings.is_empty());
    }

    #[test]
    fn indefinite_rejected() {
        let q = gram(&[&[-1, 2], &[2, -1]]);
        assert_eq!(
            find_embeddings(&q, 2, &SearchBudget::default(), true).unwrap_err(),
            EmbedError::NotNegativeDefinite
        );
    }

    #[test]
    fn node_limit_is_reported() {
        let q = gram_matrix(&graph_11n50());
        let budget = SearchBudget { node_limit: 3, ..SearchBudget::default() };
        let out = find_embeddings(&q, 7, &budget, true).unwrap();
        assert_eq!(out.status, SearchStatus::NodeLimitReached);
        let budget = SearchBudget { solution_limit: 1, ..SearchBudget::default() };
        let out = find_embeddings(&q, 16, &budget, true).unwrap();
        assert_eq!(out.status, SearchStatus::SolutionLimitReached);
        assert_eq!(out.embeddings.len(), 1);
    }

    #[test]
    fn square_partition_enumeration() {
        let mut got = Vec::new();
        square_partitions(5, i64::MAX, 5, &mut Vec::new(), &mut |p| got.push(p.to_vec()));
        assert_eq!(got, vec![vec![2, 1], vec![1, 1, 1, 1, 1]]);
        let mut got = Vec::new();
        square_partitions(5, i64::MAX, 3, &mut Vec::new(), &mut |p| got.push(p.to_vec()));
        assert_eq!(got, vec![vec![2, 1]]);
    }
}
