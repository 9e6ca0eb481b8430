//! Correction terms of the boundary of a negative definite plumbing, from the
//! maximal square of characteristic vectors in each spin^c class:
//! `d(Y, s) = max (ξᵀQ⁻¹ξ + k) / 4` over characteristic `ξ` in the class of `s`.
//!
//! The values agree with the Heegaard Floer correction terms only when the
//! plumbing is sharp; they are reported as given by the plumbing formula.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::exact_linalg::{adjugate, is_negative_definite, rational_quadratic_eval, smith_normal_form};
use crate::plumbing::{gram_matrix, WeightedGraph};
use crate::{Gram, GramMatrix, Rational};

/// Largest number of box vectors scanned in one pass.
pub const BOX_LIMIT: u128 = 50_000_000;

pub const SHARPNESS_CAVEAT: &str =
    "values per the plumbing formula; they equal Heegaard Floer correction terms when the plumbing is sharp";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DinvError {
    #[error("form is not negative definite")]
    NotNegativeDefinite,
    #[error("vector of length {got} for a rank {rank} form")]
    Length { got: usize, rank: usize },
    #[error("vector is not characteristic at coordinate {0}")]
    NotCharacteristic(usize),
    #[error("characteristic box too large ({0} vectors)")]
    TooLarge(u128),
}

/// `ξ` with `ξᵢ ≡ Qᵢᵢ (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharVector {
    pub xi: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionEntry {
    /// Class label: residues of `Uξ` modulo the Smith invariants of `2Q`.
    pub residue: Vec<i64>,
    /// A maximizer of `ξᵀQ⁻¹ξ` in the class.
    pub representative: CharVector,
    pub max_square: Rational,
    pub d: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionTable {
    pub mirror: bool,
    /// Sorted by residue.
    pub entries: Vec<CorrectionEntry>,
}

impl CorrectionTable {
    pub fn max_d(&self) -> Option<&Rational> {
        self.entries.iter().map(|e| &e.d).max()
    }

    pub fn d_values(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.d.clone()).collect()
    }
}

/// Precomputed data for one form.
struct Form {
    q: Vec<Vec<i64>>,
    adj: Vec<Vec<i64>>,
    det: i64,
    /// Rows of `U` and invariants of the Smith form `U·2Q·V`.
    u: Vec<Vec<i64>>,
    moduli: Vec<i64>,
}

impl Form {
    fn new(q: &GramMatrix) -> Result<Self, DinvError> {
        if !is_negative_definite(q) {
            return Err(DinvError::NotNegativeDefinite);
        }
        let too_large = |_| DinvError::TooLarge(u128::MAX);
        let small: Gram<i64> = q.try_cast().map_err(too_large)?;
        let k = small.rank();
        let (adj, det) = adjugate(q.matrix()).expect("square");
        let adj = adj.try_cast::<i64>().map_err(too_large)?;
        let det = det.to_i64().ok_or(DinvError::TooLarge(u128::MAX))?;
        let snf = smith_normal_form(&q.matrix().scale(&BigInt::from(2)));
        let u = snf.u.try_cast::<i64>().map_err(too_large)?;
        let moduli = snf.invariant_factors().iter().map(|d| d.to_i64().expect("divides 2·det")).collect();
        let rows = |m: &crate::Matrix<i64>| (0..k).map(|i| m.row(i).to_vec()).collect();
        Ok(Form { q: rows(small.matrix()), adj: rows(&adj), det, u: rows(&u), moduli })
    }

    fn rank(&self) -> usize {
        self.q.len()
    }

    /// `ξᵀ adj(Q) ξ`, so that `ξᵀQ⁻¹ξ = numerator / det`.
    fn numerator(&self, xi: &[i64]) -> i128 {
        let mut total = 0i128;
        for (i, row) in self.adj.iter().enumerate() {
            let s: i128 = row.iter().zip(xi).map(|(&a, &x)| a as i128 * x as i128).sum();
            total += s * xi[i] as i128;
        }
        total
    }

    /// Orders candidates by `ξᵀQ⁻¹ξ` using the sign of the determinant.
    fn better(&self, a: i128, b: i128) -> bool {
        if self.det > 0 {
            a > b
        } else {
            a < b
        }
    }

    fn residue(&self, xi: &[i64]) -> Vec<i64> {
        self.u
            .iter()
            .zip(&self.moduli)
            .map(|(row, &m)| {
                let s: i128 = row.iter().zip(xi).map(|(&a, &x)| a as i128 * x as i128).sum();
                s.rem_euclid(m as i128) as i64
            })
            .collect()
    }

    fn value(&self, numerator: i128) -> Rational {
        Rational::new(BigInt::from(numerator), BigInt::from(self.det))
    }

    fn check(&self, xi: &[i64]) -> Result<(), DinvError> {
        if xi.len() != self.rank() {
            return Err(DinvError::Length { got: xi.len(), rank: self.rank() });
        }
        match (0..self.rank()).find(|&i| (xi[i] - self.q[i][i]).rem_euclid(2) != 0) {
            Some(i) => Err(DinvError::NotCharacteristic(i)),
            None => Ok(()),
        }
    }
}

struct Best {
    xi: Vec<i64>,
    numerator: i128,
}

/// Maximizes over the box `|ξᵢ| ≤ radius[i]`, growing it until every class
/// is present and no move `ξ ± 2Qeᵢ` improves any class maximum.
fn maximize(form: &Form, only: Option<&[i64]>) -> Result<BTreeMap<Vec<i64>, Best>, DinvError> {
    let k = form.rank();
    let classes = form.det.unsigned_abs() as usize;
    let mut radius: Vec<i64> = (0..k).map(|i| form.q[i][i].abs()).collect();
    loop {
        let best = scan_box(form, &radius, only)?;
        let expected = if only.is_some() { 1 } else { classes };
        if best.len() < expected {
            radius.iter_mut().for_each(|r| *r += 2);
            continue;
        }
        let mut grow = vec![false; k];
        for b in best.values() {
            for i in 0..k {
                for sign in [-2i64, 2] {
                    let moved: Vec<i64> = (0..k).map(|j| b.xi[j] + sign * form.q[j][i]).collect();
                    if form.better(form.numerator(&moved), b.numerator) {
                        for j in 0..k {
                            if moved[j].abs() > radius[j] {
                                grow[j] = true;
                            }
                        }
                    }
                }
            }
        }
        if !grow.contains(&true) {
            return Ok(best);
        }
        for (r, g) in radius.iter_mut().zip(grow) {
            if g {
                *r += 2;
            }
        }
    }
}

fn scan_box(
    form: &Form,
    radius: &[i64],
    only: Option<&[i64]>,
) -> Result<BTreeMap<Vec<i64>, Best>, DinvError> {
    let k = form.rank();
    // characteristic entries in [-rᵢ, rᵢ] with the parity of Qᵢᵢ
    let lo: Vec<i64> = (0..k)
        .map(|i| {
            let parity = form.q[i][i].rem_euclid(2);
            if (-radius[i]).rem_euclid(2) == parity {
                -radius[i]
            } else {
                -radius[i] + 1
            }
        })
        .collect();
    let size = (0..k).try_fold(1u128, |acc, i| acc.checked_mul(((-2 * lo[i]) / 2 + 1) as u128));
    match size {
        Some(s) if s <= BOX_LIMIT => {}
        Some(s) => return Err(DinvError::TooLarge(s)),
        None => return Err(DinvError::TooLarge(u128::MAX)),
    }

    let mut best: BTreeMap<Vec<i64>, Best> = BTreeMap::new();
    let mut xi = lo.clone();
    loop {
        let residue = form.residue(&xi);
        if only.is_none_or(|o| o == residue.as_slice()) {
            let n = form.numerator(&xi);
            match best.get_mut(&residue) {
                Some(b) if !form.better(n, b.numerator) => {}
                Some(b) => {
                    b.xi.clone_from(&xi);
                    b.numerator = n;
                }
                None => {
                    best.insert(residue, Best { xi: xi.clone(), numerator: n });
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return Ok(best);
            }
            xi[i] += 2;
            if xi[i] <= -lo[i] {
                break;
            }
            xi[i] = lo[i];
            i += 1;
        }
    }
}

/// One maximizing representative per class of `Char(Q) / 2Q·Zᵏ`, sorted by residue.
pub fn char_representatives(q: &GramMatrix) -> Result<Vec<CharVector>, DinvError> {
    let form = Form::new(q)?;
    Ok(maximize(&form, None)?.into_values().map(|b| CharVector { xi: b.xi }).collect())
}

/// `max ξᵀQ⁻¹ξ` over the class of `class_rep`.
pub fn max_square(q: &GramMatrix, class_rep: &CharVector) -> Result<Rational, DinvError> {
    let form = Form::new(q)?;
    form.check(&class_rep.xi)?;
    let residue = form.residue(&class_rep.xi);
    let best = maximize(&form, Some(&residue))?;
    let b = best.get(&residue).expect("the class contains its representative");
    Ok(form.value(b.numerator))
}

pub fn correction_terms(g: &WeightedGraph, mirror: bool) -> Result<CorrectionTable, DinvError> {
    let q = gram_matrix(g);
    let form = Form::new(&q)?;
    let k = BigInt::from(form.rank());
    let entries = maximize(&form, None)?
        .into_iter()
        .map(|(residue, b)| {
            let max_square = form.value(b.numerator);
            let xi: Vec<BigInt> = b.xi.iter().map(|&x| BigInt::from(x)).collect();
            debug_assert_eq!(rational_quadratic_eval(&q, &xi).ok(), Some(max_square.clone()));
            let d = (max_square.clone() + Rational::from_integer(k.clone())) / BigInt::from(4);
            let d = if mirror { -d } else { d };
            CorrectionEntry { residue, representative: CharVector { xi: b.xi }, max_square, d }
        })
        .collect();
    Ok(CorrectionTable { mirror, entries })
}

/// `true` when the largest correction term exceeds `1/4`, i.e. the
/// comparison does not obstruct.
pub fn owens_strle_quarter_test(table: &CorrectionTable) -> bool {
    let quarter = Rational::new(BigInt::from(1), BigInt::from(4));
    table.max_d().is_some_and(|m| *m > quarter)
}
