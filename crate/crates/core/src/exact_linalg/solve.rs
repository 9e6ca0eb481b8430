use num_rational::Ratio;
use num_traits::{One, Zero};

use super::{Gram, LinalgError, Matrix, Scalar};

/// Solves `M · y = b` over the rationals by Gaussian elimination.
pub fn solve_rational<T: Scalar>(m: &Matrix<T>, b: &[T]) -> Result<Vec<Ratio<T>>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if b.len() != n {
        return Err(LinalgError::Dimension(format!("right-hand side has {} entries, expected {n}", b.len())));
    }
    let mut a: Vec<Vec<Ratio<T>>> = (0..n)
        .map(|i| {
            let mut row: Vec<Ratio<T>> = m.row(i).iter().cloned().map(Ratio::from_integer).collect();
            row.push(Ratio::from_integer(b[i].clone()));
            row
        })
        .collect();

    for k in 0..n {
        let pivot = (k..n).find(|&r| !a[r][k].is_zero()).ok_or(LinalgError::Degenerate)?;
        a.swap(k, pivot);
        let inv = Ratio::one() / a[k][k].clone();
        for x in a[k].iter_mut().skip(k) {
            *x = x.clone() * inv.clone();
        }
        for i in 0..n {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let factor = a[i][k].clone();
            for j in k..=n {
                let delta = factor.clone() * a[k][j].clone();
                a[i][j] = a[i][j].clone() - delta;
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n].clone()).collect())
}

/// `ξᵀ Q⁻¹ ξ` as an exact rational.
pub fn rational_quadratic_eval<T: Scalar>(q: &Gram<T>, xi: &[T]) -> Result<Ratio<T>, LinalgError> {
    let y = solve_rational(q.matrix(), xi)?;
    Ok(xi.iter().zip(&y).fold(Ratio::zero(), |acc, (a, b)| acc + b.clone() * Ratio::from_integer(a.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::det;
    use proptest::prelude::*;

    #[test]
    fn one_by_one() {
        let q = Gram::<i64>::from_rows(&[[-2]]).unwrap();
        assert_eq!(rational_quadratic_eval(&q, &[2]).unwrap(), Ratio::from_integer(-2));
    }

    #[test]
    fn zero_vector() {
        let q = Gram::<i64>::from_rows(&[[-2, 1], [1, -2]]).unwrap();
        assert_eq!(rational_quadratic_eval(&q, &[0, 0]).unwrap(), Ratio::zero());
    }

    #[test]
    fn a2_lattice() {
        // Q⁻¹ = -1/3 [[2,1],[1,2]]; (1,0) gives -2/3
        let q = Gram::<i64>::from_rows(&[[-2, 1], [1, -2]]).unwrap();
        assert_eq!(rational_quadratic_eval(&q, &[1, 0]).unwrap(), Ratio::new(-2, 3));
    }

    #[test]
    fn singular_is_degenerate() {
        let q = Gram::<i64>::from_rows(&[[-1, 1], [1, -1]]).unwrap();
        assert_eq!(rational_quadratic_eval(&q, &[1, 0]).unwrap_err(), LinalgError::Degenerate);
    }

    proptest! {
        /// Cramer: the value times det(Q) is an integer.
        #[test]
        fn times_det_is_integral(n in 1usize..=4, seed in prop::collection::vec(-4i64..=4, 10), xi in prop::collection::vec(-5i64..=5, 4)) {
            let mut rows = vec![vec![0i64; n]; n];
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    rows[i][j] = seed[k];
                    rows[j][i] = seed[k];
                    k += 1;
                }
            }
            let q = Gram::from_rows(&rows).unwrap();
            let d = det(q.matrix()).unwrap();
            let xi = &xi[..n];
            match rational_quadratic_eval(&q, xi) {
                Ok(v) => {
                    prop_assert!(d != 0);
                    prop_assert!((v * Ratio::from_integer(d)).is_integer());
                }
                Err(e) => {
                    prop_assert_eq!(e, LinalgError::Degenerate);
                    prop_assert_eq!(d, 0);
                }
            }
        }
    }
}
