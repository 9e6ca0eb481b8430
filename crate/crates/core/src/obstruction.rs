//! Unimodular-minor admissibility of embeddings and the lattice obstruction
//! verdict built on it.
//!
//! Convention: the input graph is a negative definite plumbing `X` with
//! boundary `Y`, the branched double cover of a link `L`. If no embedding of
//! its lattice into `-Zⁿ` is admissible then `-Y` bounds no negative definite
//! 4-manifold with torsion-free `H₁`, so the mirror of `L` is not
//! quasi-alternating.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::embedder::{
    completeness_bound, run_canonical_search, small_form, EmbedError, Embedding, Flow, SearchBudget,
    SearchStatus, Visitor,
};
use crate::exact_linalg::det;
use crate::plumbing::{gram_matrix, WeightedGraph};
use crate::Matrix;

/// Full subset enumeration is used up to this many columns.
pub const FULL_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObstructionError {
    #[error("chain shape mismatch: {0}")]
    Shape(String),
}

/// A set of columns supported on exactly as many rows whose minor is not `±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub determinant: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub witness: Option<Witness>,
}

impl AdmissibilityReport {
    fn from_witness(witness: Option<Witness>) -> Self {
        AdmissibilityReport { admissible: witness.is_none(), witness }
    }
}

type Bits = Vec<u64>;

fn support_bits(column: &[i64]) -> Bits {
    let mut b = vec![0u64; column.len().div_ceil(64).max(1)];
    for (r, &x) in column.iter().enumerate() {
        if x != 0 {
            b[r / 64] |= 1 << (r % 64);
        }
    }
    b
}

fn union_into(acc: &mut Bits, other: &Bits) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a |= b;
    }
}

fn count(b: &Bits) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn rows_of(b: &Bits) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in b.iter().enumerate() {
        for bit in 0..64 {
            if word >> bit & 1 == 1 {
                out.push(w * 64 + bit);
            }
        }
    }
    out
}

fn intersects(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Determinant of the minor on the given rows and columns.
///
/// Every intermediate of fraction-free elimination is itself a minor, hence
/// bounded by Hadamard's `∏ |col|`; when the squared bound fits below `2⁶²`
/// the products stay inside `i64`.
fn minor_det(columns: &[Vec<i64>], cols: &[usize], rows: &[usize]) -> BigInt {
    let hadamard_sq = cols.iter().try_fold(1u128, |acc, &j| {
        let norm: u128 = rows.iter().map(|&r| (columns[j][r] as i128 * columns[j][r] as i128) as u128).sum();
        acc.checked_mul(norm)
    });
    let m = Matrix::from_columns(
        rows.len(),
        &cols.iter().map(|&j| rows.iter().map(|&r| columns[j][r]).collect::<Vec<_>>()).collect::<Vec<_>>(),
    )
    .expect("square minor");
    match hadamard_sq {
        Some(h) if h < 1 << 62 => BigInt::from(det(&m).expect("square minor")),
        _ => det(&m.widen::<BigInt>()).expect("square minor"),
    }
}

fn test_subset(columns: &[Vec<i64>], supports: &[Bits], subset: &[usize]) -> Option<Witness> {
    let mut acc = supports[subset[0]].clone();
    for &j in &subset[1..] {
        union_into(&mut acc, &supports[j]);
    }
    if count(&acc) != subset.len() {
        return None;
    }
    let rows = rows_of(&acc);
    let d = minor_det(columns, subset, &rows);
    (!d.abs().is_one()).then(|| Witness { columns: subset.to_vec(), rows, determinant: d })
}

/// Every column subset `S` with `|supp S| = |S|` must have a unimodular minor.
///
/// Up to [`FULL_ENUMERATION_LIMIT`] columns all subsets are tested, largest
/// first, so the reported witness is a largest violating set. Beyond that only
/// subsets that are connected under "supports intersect" are tested. That
/// suffices: columns of an embedding are independent, so each piece `Sᵢ` of a
/// disconnected `S` has `|supp Sᵢ| ≥ |Sᵢ|`, and as the supports are disjoint
/// equality holds for every piece; the minor is then block diagonal, so one
/// block already has determinant `≠ ±1`.
pub fn check_admissible(emb: &Embedding) -> AdmissibilityReport {
    let columns = emb.columns();
    let supports: Vec<Bits> = columns.iter().map(|c| support_bits(c)).collect();
    let k = columns.len();
    let witness = if k <= FULL_ENUMERATION_LIMIT {
        largest_first_violation(columns, &supports)
    } else {
        connected_violation(columns, &supports)
    };
    AdmissibilityReport::from_witness(witness)
}

fn largest_first_violation(columns: &[Vec<i64>], supports: &[Bits]) -> Option<Witness> {
    let k = columns.len();
    let mut subset = Vec::with_capacity(k);
    for size in (1..=k).rev() {
        // Gosper's hack over k-bit masks of the given popcount
        let mut mask: u32 = (1u32 << size) - 1;
        let limit: u64 = 1u64 << k;
        while (mask as u64) < limit {
            subset.clear();
            subset.extend((0..k).filter(|&j| mask >> j & 1 == 1));
            if let Some(w) = test_subset(columns, supports, &subset) {
                return Some(w);
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            if r == 0 {
                break;
            }
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }
    None
}

/// Connected sets enumerated once each: grow from a minimum vertex `v`, only
/// adding vertices `> v` that are not yet adjacent to the current set.
fn connected_violation(columns: &[Vec<i64>], supports: &[Bits]) -> Option<Witness> {
    let k = columns.len();
    let adj: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).filter(|&j| j != i && intersects(&supports[i], &supports[j])).collect())
        .collect();

    fn extend(
        v: usize,
        set: &mut Vec<usize>,
        ext: Vec<usize>,
        adj: &[Vec<usize>],
        check: &mut dyn FnMut(&[usize]) -> Option<Witness>,
    ) -> Option<Witness> {
        let mut sorted = set.clone();
        sorted.sort_unstable();
        if let Some(w) = check(&sorted) {
            return Some(w);
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &adj[w] {
                let near_set = set.contains(&u) || set.iter().any(|&s| adj[s].contains(&u));
                if u > v && u != w && !near_set && !next.contains(&u) {
                    next.push(u);
                }
            }
            set.push(w);
            let r = extend(v, set, next, adj, check);
            set.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }

    let mut check = |s: &[usize]| test_subset(columns, supports, s);
    for v in 0..k {
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        let mut set = vec![v];
        if let Some(w) = extend(v, &mut set, ext, &adj, &mut check) {
            return Some(w);
        }
    }
    None
}

/// The minor of a chain `E₁-E₂, E₂-E₃, …, E_{p-1}-E_p` closed by
/// `E₁+⋯+E_p` (up to an overall sign per column); its determinant is `±p`.
pub fn chain_minor_check(
    emb: &Embedding,
    chain_columns: &[usize],
    closing_column: usize,
) -> Result<AdmissibilityReport, ObstructionError> {
    let k = emb.rank();
    if closing_column >= k || chain_columns.iter().any(|&j| j >= k) {
        return Err(ObstructionError::Shape("column index out of range".into()));
    }
    let closing = emb.column(closing_column);
    let rows = emb.support(closing_column);
    let p = rows.len();
    let lead = closing[rows[0]];
    if lead.abs() != 1 || rows.iter().any(|&r| closing[r] != lead) {
        return Err(ObstructionError::Shape("closing column must be a sum of distinct unit vectors".into()));
    }
    if chain_columns.len() + 1 != p {
        return Err(ObstructionError::Shape(format!(
            "{} chain columns for a closing column on {p} rows",
            chain_columns.len()
        )));
    }
    // walk the chain: each link moves from the current row to a new one
    let mut current: Option<usize> = None;
    let mut seen = vec![false; emb.ambient_rank];
    for (i, &j) in chain_columns.iter().enumerate() {
        let col = emb.column(j);
        let supp = emb.support(j);
        let ok = supp.len() == 2 && col[supp[0]] == -col[supp[1]] && col[supp[0]].abs() == 1;
        if !ok || !supp.iter().all(|r| rows.contains(r)) {
            return Err(ObstructionError::Shape(format!(
                "column {j} is not a difference of two closing rows"
            )));
        }
        let next = match current {
            None => {
                seen[supp[0]] = true;
                supp[1]
            }
            Some(c) if supp.contains(&c) => {
                if supp[0] == c {
                    supp[1]
                } else {
                    supp[0]
                }
            }
            Some(_) => return Err(ObstructionError::Shape(format!("chain breaks at link {i}"))),
        };
        if seen[next] {
            return Err(ObstructionError::Shape(format!("chain revisits a row at link {i}")));
        }
        seen[next] = true;
        current = Some(next);
    }
    let mut cols = chain_columns.to_vec();
    cols.push(closing_column);
    let d = minor_det(emb.columns(), &cols, &rows);
    debug_assert_eq!(d.abs(), BigInt::from(p));
    let witness = (!d.abs().is_one()).then_some(Witness { columns: cols, rows, determinant: d });
    Ok(AdmissibilityReport::from_witness(witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObstructionStatus {
    Obstructed,
    NotObstructed,
    Inconclusive,
}

impl ObstructionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ObstructionStatus::Obstructed => "OBSTRUCTED",
            ObstructionStatus::NotObstructed => "NOT_OBSTRUCTED",
            ObstructionStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for ObstructionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Embedding classes in `-Zⁿ` for one ambient rank `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSummary {
    pub ambient_rank: usize,
    pub classes: usize,
    pub inadmissible: usize,
}

/// One embedding class, trimmed to the coordinates it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassReport {
    pub embedding: Embedding,
    pub report: AdmissibilityReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionVerdict {
    pub status: ObstructionStatus,
    pub reason: String,
    /// `det Q`.
    pub discriminant: BigInt,
    pub completeness_bound: usize,
    /// Largest ambient rank actually searched.
    pub searched_rank: Option<usize>,
    /// How the search ended, when one ran.
    pub search: Option<SearchStatus>,
    pub nodes: u64,
    pub evidence: Vec<RankSummary>,
    /// Classes inspected, in discovery order. For `NotObstructed` the last one
    /// is the admissible embedding.
    pub classes: Vec<ClassReport>,
}

impl ObstructionVerdict {
    pub fn admissible_embedding(&self) -> Option<&Embedding> {
        self.classes.iter().find(|c| c.report.admissible).map(|c| &c.embedding)
    }
}

struct Inspect {
    rank: usize,
    abs_det: BigInt,
    limit: u64,
    classes: Vec<ClassReport>,
}

impl Visitor for Inspect {
    fn found(&mut self, embedding: Embedding) -> Flow {
        let embedding = embedding.trimmed();
        let report = check_admissible(&embedding);
        if embedding.ambient_rank == self.rank {
            // BᵀB = -Q, so det(B)² = |det Q|
            let all: Vec<usize> = (0..self.rank).collect();
            let rows: Vec<usize> = (0..self.rank).collect();
            let b = minor_det(embedding.columns(), &all, &rows);
            assert_eq!(&b * &b, self.abs_det, "full-support minor disagrees with the discriminant");
        }
        let admissible = report.admissible;
        self.classes.push(ClassReport { embedding, report });
        if admissible || self.classes.len() as u64 >= self.limit {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Searches every ambient rank up to the completeness bound for an admissible
/// embedding of the graph's lattice.
///
/// `NotObstructed` only means this obstruction is silent; it says nothing
/// about the link being quasi-alternating.
pub fn qa_obstruction(g: &WeightedGraph, budget: &SearchBudget) -> ObstructionVerdict {
    let q = gram_matrix(g);
    let discriminant = det(q.matrix()).expect("gram matrices are square");
    let bound = completeness_bound(&q);
    let mut verdict = ObstructionVerdict {
        status: ObstructionStatus::Inconclusive,
        reason: String::new(),
        discriminant: discriminant.clone(),
        completeness_bound: bound,
        searched_rank: None,
        search: None,
        nodes: 0,
        evidence: Vec::new(),
        classes: Vec::new(),
    };
    let small = match small_form(&q) {
        Ok(s) => s,
        Err(EmbedError::NotNegativeDefinite) => {
            verdict.reason = "not definite; see rationality branch".into();
            return verdict;
        }
        Err(EmbedError::Overflow) => {
            verdict.reason = "weights too large for the embedding search".into();
            return verdict;
        }
    };
    let rank = small.rank();
    let n = budget.max_ambient_rank.map_or(bound, |m| m.min(bound));

    // An embedding using r coordinates pads to every n ≥ r, and its canonical
    // representative keeps zero rows last, so one search at the largest rank
    // sees every class at every smaller rank.
    let mut inspect =
        Inspect { rank, abs_det: discriminant.abs(), limit: budget.solution_limit, classes: Vec::new() };
    let (status, nodes) = run_canonical_search(&small, n, budget.node_limit, &mut inspect);
    verdict.nodes = nodes;
    verdict.searched_rank = Some(n);
    verdict.search = Some(status);

    let mut by_rows: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for c in &inspect.classes {
        let e = by_rows.entry(c.embedding.ambient_rank).or_default();
        e.0 += 1;
        e.1 += usize::from(!c.report.admissible);
    }
    verdict.evidence = (rank..=n)
        .map(|r| {
            let (classes, inadmissible) =
                by_rows.range(..=r).fold((0, 0), |acc, (_, &(c, i))| (acc.0 + c, acc.1 + i));
            RankSummary { ambient_rank: r, classes, inadmissible }
        })
        .collect();
    let found_admissible = inspect.classes.iter().any(|c| c.report.admissible);
    verdict.classes = inspect.classes;

    (verdict.status, verdict.reason) = if found_admissible {
        (
            ObstructionStatus::NotObstructed,
            "an admissible embedding exists; this obstruction is silent, which does not imply quasi-alternating".into(),
        )
    } else if status != SearchStatus::Complete {
        (ObstructionStatus::Inconclusive, format!("search budget exhausted at n = {n} after {nodes} nodes"))
    } else if n < bound {
        (
            ObstructionStatus::Inconclusive,
            format!("searched only up to n = {n}, below the completeness bound {bound}"),
        )
    } else {
        (
            ObstructionStatus::Obstructed,
            format!(
                "all {} embedding classes up to n = {bound} are inadmissible; the mirror is not quasi-alternating",
                verdict.classes.len()
            ),
        )
    };
    verdict
}
