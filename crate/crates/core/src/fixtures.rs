//! Small named relations used throughout tests, the gallery and the CLI.

use nalgebra::{DMatrix, DVector};

use crate::relation::LinearRelation;
use crate::subspace::Subspace;

fn diag(entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

/// Graph of the identity on a one-dimensional space.
pub fn fix_id1() -> LinearRelation {
    LinearRelation::identity(1)
}

/// Graph of `diag(1, 2)`.
pub fn fix_diag() -> LinearRelation {
    let a = diag(&[1.0, 2.0]);
    let s = 2f64.sqrt().recip();
    let t = 5f64.sqrt().recip();
    // normalized (e1, e1) and (e2, 2 e2)
    let mut basis = DMatrix::zeros(4, 2);
    basis[(0, 0)] = s;
    basis[(2, 0)] = a[(0, 0)] * s;
    basis[(1, 1)] = t;
    basis[(3, 1)] = a[(1, 1)] * t;
    LinearRelation::from_graph(2, 2, Subspace::from_orthonormal(basis)).expect("shape")
}

/// `span{(e1, e1), (0, e2)}`: operator part `e1 ↦ e1`, multivalued part `span{e2}`.
pub fn fix_mix() -> LinearRelation {
    let s = 2f64.sqrt().recip();
    let mut basis = DMatrix::zeros(4, 2);
    basis[(0, 0)] = s;
    basis[(2, 0)] = s;
    basis[(3, 1)] = 1.0;
    LinearRelation::from_graph(2, 2, Subspace::from_orthonormal(basis)).expect("shape")
}

/// `{0} × F²`.
pub fn fix_mul() -> LinearRelation {
    LinearRelation::cartesian(&Subspace::zero(2), &Subspace::full(2))
}

/// `span{e1} × span{e2}`.
pub fn fix_sing() -> LinearRelation {
    LinearRelation::cartesian(
        &Subspace::coordinate(2, 0..1),
        &Subspace::coordinate(2, 1..2),
    )
}

/// `{(0, 0)}` in `F² × F²`.
pub fn fix_zero() -> LinearRelation {
    LinearRelation::trivial(2, 2)
}
