//! Small dense helpers shared by the relation modules.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Thin singular value decomposition `A = U diag(s) Vᴴ`, values sorted
/// in decreasing order. Columns of `u` belonging to zero singular values
/// are zero.
#[derive(Clone, Debug)]
pub struct Svd<T: Scalar> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi on the columns of `a`; returns `(W, V)` with
/// `A V = W` and the columns of `W` mutually orthogonal.
fn hestenes<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let c = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::<T>::identity(c, c);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in (p + 1)..c {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.modulus();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // phase that makes the off-diagonal entry real and positive
                let phase = gamma.unscale(g).conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let xp = m[(i, p)];
                        let xq = m[(i, q)] * phase;
                        m[(i, p)] = xp.scale(cs) - xq.scale(sn);
                        m[(i, q)] = xp.scale(sn) + xq.scale(cs);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Thin SVD by one-sided Jacobi rotations. Accurate for the small,
/// often exactly rank-deficient matrices used throughout the crate.
pub fn svd<T: Scalar>(a: &DMatrix<T>) -> Svd<T> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: DMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: DMatrix::zeros(cols, 0),
        };
    }
    // Work on the orientation with fewer columns.
    let wide = cols > rows;
    let (w, v) = if wide {
        hestenes(&a.adjoint())
    } else {
        hestenes(a)
    };
    let k = w.ncols();
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let normalized = DMatrix::from_fn(w.nrows(), k, |i, j| {
        let n = norms[order[j]];
        if n > 0.0 {
            w[(i, order[j])].unscale(n)
        } else {
            T::zero()
        }
    });
    let rotations = DMatrix::from_fn(v.nrows(), k, |i, j| v[(i, order[j])]);
    if wide {
        Svd {
            u: rotations,
            s,
            v: normalized,
        }
    } else {
        Svd {
            u: normalized,
            s,
            v: rotations,
        }
    }
}

/// Moore-Penrose pseudoinverse; singular values at or below
/// `rcond * max(rows, cols) * sigma_max` are treated as zero.
pub fn pinv<T: Scalar>(a: &DMatrix<T>, rcond: f64) -> DMatrix<T> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = svd(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = rcond * rows.max(cols) as f64 * smax;
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.s.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (svd.v.column(k) * svd.u.column(k).adjoint()).unscale(s);
        }
    }
    out
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.adjoint()).unscale(2.0)
}

/// Stacks `top` over `bottom` (same column count).
pub fn vstack<T: Scalar>(top: &DMatrix<T>, bottom: &DMatrix<T>) -> DMatrix<T> {
    assert_eq!(top.ncols(), bottom.ncols(), "vstack column mismatch");
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Places the matrices on the diagonal of a block matrix.
pub fn block_diag<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

pub fn stack_vectors<T: Scalar>(f: &DVector<T>, fp: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(f.len() + fp.len());
    out.rows_mut(0, f.len()).copy_from(f);
    out.rows_mut(f.len(), fp.len()).copy_from(fp);
    out
}

/// Largest singular value (0 for empty matrices).
pub fn spectral_norm<T: Scalar>(a: &DMatrix<T>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    svd(a).s.first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_satisfies_penrose_conditions() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        let p = pinv(&a, 1e-12);
        assert!((&a * &p * &a - &a).norm() < 1e-12);
        assert!((&p * &a * &p - &p).norm() < 1e-12);
        assert!((hermitian_part(&(&a * &p)) - &a * &p).norm() < 1e-12);
        assert!((hermitian_part(&(&p * &a)) - &p * &a).norm() < 1e-12);
    }

    #[test]
    fn pinv_of_empty_has_transposed_shape() {
        let a = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(pinv(&a, 1e-12).shape(), (0, 3));
    }

    fn recompose(d: &Svd<f64>) -> DMatrix<f64> {
        let sig = DMatrix::from_diagonal(&DVector::from_vec(d.s.clone()));
        &d.u * sig * d.v.adjoint()
    }

    #[test]
    fn svd_handles_degenerate_projector() {
        // complement projector with repeated eigenvalues and rounding noise
        let mut b = DMatrix::<f64>::zeros(8, 4);
        for j in 0..4 {
            b[(j, j)] = std::f64::consts::FRAC_1_SQRT_2;
            b[(j + 4, j)] = std::f64::consts::FRAC_1_SQRT_2;
        }
        let mut m = DMatrix::identity(8, 8) - &b * b.transpose();
        m[(1, 6)] += 3e-17;
        m[(6, 1)] += 3e-17;
        let d = svd(&m);
        assert!((recompose(&d) - &m).norm() < 1e-13);
        assert!((d.s[0] - 1.0).abs() < 1e-13 && (d.s[3] - 1.0).abs() < 1e-13);
        assert!(d.s[4] < 1e-13);
        let u = d.u.columns(0, 4);
        assert!((u.transpose() * u - DMatrix::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn svd_of_wide_and_complex_matrices() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let d = svd(&a);
        assert_eq!(d.s.len(), 2);
        assert!((recompose(&d) - &a).norm() < 1e-12);
        // singular values of [[1,2,3],[4,5,6]]
        assert!((d.s[0] - 9.508032000695723).abs() < 1e-12);
        assert!((d.s[1] - 0.7728696356734838).abs() < 1e-12);

        use num_complex::Complex64 as C;
        let c = DMatrix::from_row_slice(
            2,
            2,
            &[
                C::new(0.0, 1.0),
                C::new(1.0, 0.0),
                C::new(0.0, 0.0),
                C::new(0.0, 2.0),
            ],
        );
        let d = svd(&c);
        let sig = DMatrix::from_diagonal(&DVector::from_vec(
            d.s.iter().map(|&x| C::new(x, 0.0)).collect(),
        ));
        assert!((&d.u * sig * d.v.adjoint() - &c).norm() < 1e-12);
        let prod: f64 = d.s.iter().product();
        assert!((prod - 2.0).abs() < 1e-12);
    }

    #[test]
    fn block_helpers() {
        let a = DMatrix::from_element(1, 1, 2.0);
        let b = DMatrix::identity(2, 2);
        let d = block_diag(&a, &b);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d[(0, 0)], 2.0);
        assert_eq!(d[(0, 1)], 0.0);
        assert_eq!(spectral_norm(&d), 2.0);
        let v = stack_vectors(
            &DVector::from_vec(vec![1.0]),
            &DVector::from_vec(vec![2.0, 3.0]),
        );
        assert_eq!(v.as_slice(), &[1.0, 2.0, 3.0]);
    }
}
