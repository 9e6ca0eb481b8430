use super::{Matrix, Scalar};

/// `U · M · V = D` with `D` diagonal, `d₁ | d₂ | …`, and `U`, `V` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm<T> {
    pub d: Matrix<T>,
    pub u: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SmithForm<T> {
    /// Diagonal entries `d₁, …, d_min(rows, cols)`, zeros included.
    pub fn invariant_factors(&self) -> Vec<T> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }

    /// Cyclic summands of the cokernel: torsion orders `> 1`, then `0` for each free summand.
    pub fn cokernel(&self) -> Vec<T> {
        let mut torsion: Vec<T> = Vec::new();
        let mut free = self.d.rows() - self.d.rows().min(self.d.cols());
        for f in self.invariant_factors() {
            if f.is_zero() {
                free += 1;
            } else if !f.is_one() {
                torsion.push(f);
            }
        }
        torsion.extend(std::iter::repeat_n(T::zero(), free));
        torsion
    }
}

pub fn smith_normal_form<T: Scalar>(m: &Matrix<T>) -> SmithForm<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = Matrix::identity(rows);
    let mut v = Matrix::identity(cols);

    'outer: for t in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = min_abs_entry(&d, t) else {
                break 'outer;
            };
            if pi != t {
                swap_rows(&mut d, t, pi);
                swap_rows(&mut u, t, pi);
            }
            if pj != t {
                swap_cols(&mut d, t, pj);
                swap_cols(&mut v, t, pj);
            }

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                add_row_multiple(&mut d, i, t, &q);
                add_row_multiple(&mut u, i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                add_col_multiple(&mut d, j, t, &q);
                add_col_multiple(&mut v, j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // The pivot must divide the whole remaining block.
            let bad_row =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(d[(i, j)].is_multiple_of(&d[(t, t)]))));
            match bad_row {
                Some(i) => {
                    add_row_multiple(&mut d, t, i, &-T::one());
                    add_row_multiple(&mut u, t, i, &-T::one());
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut u, t);
        }
    }
    SmithForm { d, u, v }
}

fn min_abs_entry<T: Scalar>(d: &Matrix<T>, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

fn swap_rows<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    for j in 0..m.cols() {
        let tmp = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = tmp;
    }
}

fn swap_cols<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    for i in 0..m.rows() {
        let tmp = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = tmp;
    }
}

/// row[target] -= q · row[source]
fn add_row_multiple<T: Scalar>(m: &mut Matrix<T>, target: usize, source: usize, q: &T) {
    for j in 0..m.cols() {
        let delta = q.clone() * m[(source, j)].clone();
        m[(target, j)] = m[(target, j)].clone() - delta;
    }
}

/// col[target] -= q · col[source]
fn add_col_multiple<T: Scalar>(m: &mut Matrix<T>, target: usize, source: usize, q: &T) {
    for i in 0..m.rows() {
        let delta = q.clone() * m[(i, source)].clone();
        m[(i, target)] = m[(i, target)].clone() - delta;
    }
}

fn negate_row<T: Scalar>(m: &mut Matrix<T>, r: usize) {
    for j in 0..m.cols() {
        m[(r, j)] = -m[(r, j)].clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::det;
    use proptest::prelude::*;

    fn check_invariants(m: &Matrix<i64>, s: &SmithForm<i64>) {
        assert_eq!(s.u.mul(m).unwrap().mul(&s.v).unwrap(), s.d);
        assert_eq!(det(&s.u).unwrap().abs(), 1);
        assert_eq!(det(&s.v).unwrap().abs(), 1);
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert_eq!(s.d[(i, j)], 0);
                }
            }
        }
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!(w[0] >= 0);
            if w[0] == 0 {
                assert_eq!(w[1], 0);
            } else {
                assert_eq!(w[1] % w[0], 0, "divisibility chain broken: {f:?}");
            }
        }
    }

    #[test]
    fn zero_map() {
        let m = Matrix::<i64>::zeros(2, 2);
        let s = smith_normal_form(&m);
        assert_eq!(s.d, m);
        assert_eq!(s.u, Matrix::identity(2));
        assert_eq!(s.v, Matrix::identity(2));
        assert_eq!(s.cokernel(), vec![0, 0]);
    }

    #[test]
    fn already_diagonal() {
        let m = Matrix::<i64>::diagonal(&[2, 4]);
        let s = smith_normal_form(&m);
        assert_eq!(s.d, m);
    }

    #[test]
    fn needs_divisibility_fix() {
        let m = Matrix::<i64>::diagonal(&[4, 6]);
        let s = smith_normal_form(&m);
        check_invariants(&m, &s);
        assert_eq!(s.invariant_factors(), vec![2, 12]);
        assert_eq!(s.cokernel(), vec![2, 12]);
    }

    #[test]
    fn rectangular() {
        let m = Matrix::<i64>::from_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16], [1, 1, 1]]).unwrap();
        let s = smith_normal_form(&m);
        check_invariants(&m, &s);
    }

    proptest! {
        #[test]
        fn invariants_hold(rows in 1usize..=5, cols in 1usize..=5, seed in prop::collection::vec(-6i64..=6, 25)) {
            let m = Matrix::new(rows, cols, seed[..rows * cols].to_vec()).unwrap();
            let s = smith_normal_form(&m);
            check_invariants(&m, &s);
            if rows == cols {
                let product: i64 = s.invariant_factors().iter().product();
                prop_assert_eq!(product, det(&m).unwrap().abs());
            }
        }
    }
}
