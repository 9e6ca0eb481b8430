use super::{Gram, LinalgError, Matrix, Scalar};

/// Exact determinant. Cofactor expansion up to 4x4, fraction-free elimination above.
pub fn det<T: Scalar>(m: &Matrix<T>) -> Result<T, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() <= 4 {
        Ok(cofactor_det(m))
    } else {
        Ok(fraction_free_det(m))
    }
}

/// Laplace expansion along the first row. Exponential; intended for tiny matrices.
pub fn cofactor_det<T: Scalar>(m: &Matrix<T>) -> T {
    let n = m.rows();
    debug_assert!(m.is_square());
    match n {
        0 => T::one(),
        1 => m[(0, 0)].clone(),
        2 => m[(0, 0)].clone() * m[(1, 1)].clone() - m[(0, 1)].clone() * m[(1, 0)].clone(),
        _ => {
            let rest: Vec<usize> = (1..n).collect();
            let mut acc = T::zero();
            for j in 0..n {
                let a = &m[(0, j)];
                if a.is_zero() {
                    continue;
                }
                let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                let minor = cofactor_det(&m.submatrix(&rest, &cols));
                let term = a.clone() * minor;
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// Bareiss elimination with row pivoting. Every intermediate is a minor of the
/// input, so the working values are bounded by Hadamard's inequality.
pub fn fraction_free_det<T: Scalar>(m: &Matrix<T>) -> T {
    let n = m.rows();
    debug_assert!(m.is_square());
    if n == 0 {
        return T::one();
    }
    let mut a: Vec<Vec<T>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut sign_flip = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign_flip = !sign_flip;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = num / prev.clone();
            }
            a[i][k] = T::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign_flip {
        -d
    } else {
        d
    }
}

/// Determinants of the leading k×k submatrices, k = 1..=n.
pub fn leading_principal_minors<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    (1..=m.rows())
        .map(|k| {
            let idx: Vec<usize> = (0..k).collect();
            det(&m.submatrix(&idx, &idx))
        })
        .collect()
}

/// Sylvester's criterion: `(-1)^k · D_k > 0` for every leading principal minor.
pub fn is_negative_definite<T: Scalar>(q: &Gram<T>) -> bool {
    let minors = leading_principal_minors(q.matrix()).expect("gram matrices are square");
    minors.iter().enumerate().all(|(i, d)| {
        // k = i + 1
        if i % 2 == 0 {
            d.is_negative()
        } else {
            d.is_positive()
        }
    })
}

/// Returns `(adj(M), det(M))`, so that `M · adj(M) = det(M) · I`.
pub fn adjugate<T: Scalar>(m: &Matrix<T>) -> Result<(Matrix<T>, T), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let d = det(m)?;
    if n == 1 {
        return Ok((Matrix::identity(1), d));
    }
    let mut adj = Matrix::zeros(n, n);
    for i in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        for j in 0..n {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let c = det(&m.submatrix(&rows, &cols))?;
            // adj[j][i] = (-1)^{i+j} M_{ij}
            adj[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    Ok((adj, d))
}
