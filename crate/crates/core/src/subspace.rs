//! Numerical subspace arithmetic on orthonormal bases.
//!
//! A [`Subspace`] stores an orthonormal basis (columns) and its orthogonal
//! projector. Rank decisions cut singular values at
//! `cfg.rank * ambient_dim * reference`, where the reference is the largest
//! singular value of the generators (user input) or at least 1 for internally
//! produced generators whose natural scale is that of an orthonormal basis.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_dims, RelError, Result};
use crate::scalar::Scalar;
use crate::tolerance::{ToleranceConfig, RANK_AMBIGUITY_FACTOR};

/// Entries below this modulus are skipped when fixing column signs.
const SIGN_PIVOT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Subspace<T: Scalar = f64> {
    ambient: usize,
    basis: DMatrix<T>,
    projector: DMatrix<T>,
}

/// Singular values of a generator matrix together with the rank decision
/// taken on them.
#[derive(Clone, Debug, PartialEq)]
pub struct RankProfile {
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
    pub rank: usize,
}

impl RankProfile {
    /// Some singular value sits within [`RANK_AMBIGUITY_FACTOR`] of the cutoff.
    pub fn ambiguous(&self) -> bool {
        self.cutoff > 0.0
            && self.singular_values.iter().any(|&s| {
                s > self.cutoff / RANK_AMBIGUITY_FACTOR && s < self.cutoff * RANK_AMBIGUITY_FACTOR
            })
    }

    /// Ratio between the smallest kept and the largest dropped singular value.
    pub fn gap(&self) -> f64 {
        let kept = self.singular_values.get(self.rank.wrapping_sub(1)).copied();
        let dropped = self.singular_values.get(self.rank).copied();
        match (kept, dropped) {
            (Some(k), Some(d)) if d > 0.0 => k / d,
            _ => f64::INFINITY,
        }
    }
}

/// Left singular vectors and singular values, sorted by decreasing singular value.
fn left_singular<T: Scalar>(gens: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>) {
    let d = crate::linalg::svd(gens);
    (d.u, d.s)
}

/// Makes the first non-negligible entry of every column real and positive.
fn fix_signs<T: Scalar>(basis: &mut DMatrix<T>) {
    for mut col in basis.column_iter_mut() {
        if let Some(pivot) = col.iter().copied().find(|x| x.modulus() > SIGN_PIVOT) {
            let phase = pivot.conjugate().unscale(pivot.modulus());
            col.iter_mut().for_each(|x| *x *= phase);
        }
    }
}

fn projector_of<T: Scalar>(basis: &DMatrix<T>) -> DMatrix<T> {
    let p = basis * basis.adjoint();
    (&p + p.adjoint()).unscale(2.0)
}

fn check_finite<T: Scalar>(gens: &DMatrix<T>) -> Result<()> {
    if gens
        .iter()
        .all(|x| x.real().is_finite() && x.imaginary().is_finite())
    {
        Ok(())
    } else {
        Err(RelError::Precondition("non-finite generator entry".into()))
    }
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
            projector: DMatrix::zeros(ambient, ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: DMatrix::identity(ambient, ambient),
            projector: DMatrix::identity(ambient, ambient),
        }
    }

    /// Span of the coordinate vectors `e_i`, `i` in `range`.
    pub fn coordinate(ambient: usize, range: Range<usize>) -> Self {
        assert!(
            range.end <= ambient,
            "coordinate range outside ambient space"
        );
        let basis = DMatrix::from_fn(ambient, range.len(), |i, j| {
            if i == range.start + j {
                T::one()
            } else {
                T::zero()
            }
        });
        Self::from_orthonormal(basis)
    }

    /// Orthonormalized span of `vectors` in an `ambient`-dimensional space.
    pub fn span(ambient: usize, vectors: &[DVector<T>], cfg: &ToleranceConfig) -> Result<Self> {
        if ambient == 0 {
            return Err(RelError::EmptyAmbient);
        }
        for v in vectors {
            ensure_dims("vector length", v.len(), ambient)?;
        }
        let gens = DMatrix::from_fn(ambient, vectors.len(), |i, j| vectors[j][i]);
        Self::from_columns(&gens, cfg)
    }

    /// Orthonormalized column span, cutting relative to the largest singular value.
    pub fn from_columns(gens: &DMatrix<T>, cfg: &ToleranceConfig) -> Result<Self> {
        if gens.nrows() == 0 {
            return Err(RelError::EmptyAmbient);
        }
        check_finite(gens)?;
        Ok(Self::orthonormalize(gens, None, cfg).0)
    }

    /// Rank decision that [`Subspace::from_columns`] would take on `gens`.
    pub fn rank_profile(gens: &DMatrix<T>, cfg: &ToleranceConfig) -> RankProfile {
        Self::orthonormalize(gens, None, cfg).1
    }

    /// Rank decision taken on a matrix of natural scale 1.
    pub fn unit_rank_profile(a: &DMatrix<T>, cfg: &ToleranceConfig) -> RankProfile {
        Self::orthonormalize(a, Some(1.0), cfg).1
    }

    /// Column span of internally produced generators (natural scale 1).
    pub(crate) fn from_unit_scale(gens: &DMatrix<T>, cfg: &ToleranceConfig) -> Self {
        Self::orthonormalize(gens, Some(1.0), cfg).0
    }

    /// Range of a matrix of natural scale 1 (projector blocks and the like);
    /// the rank cutoff is taken relative to `max(‖a‖₂, 1)`.
    pub fn range_of(a: &DMatrix<T>, cfg: &ToleranceConfig) -> Self {
        Self::from_unit_scale(a, cfg)
    }

    /// Kernel of a matrix of natural scale 1, as `(ran aᴴ)⊥`.
    pub fn kernel_of(a: &DMatrix<T>, cfg: &ToleranceConfig) -> Self {
        Self::from_unit_scale(&a.adjoint(), cfg).complement_with(cfg)
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub(crate) fn from_orthonormal(basis: DMatrix<T>) -> Self {
        let projector = projector_of(&basis);
        Self {
            ambient: basis.nrows(),
            basis,
            projector,
        }
    }

    fn orthonormalize(
        gens: &DMatrix<T>,
        min_reference: Option<f64>,
        cfg: &ToleranceConfig,
    ) -> (Self, RankProfile) {
        let d = gens.nrows();
        let (u, sv) = left_singular(gens);
        let smax = sv.first().copied().unwrap_or(0.0);
        let reference = min_reference.map_or(smax, |r| r.max(smax));
        let cutoff = cfg.rank * d as f64 * reference;
        let rank = sv.iter().take_while(|&&s| s > cutoff).count();
        let mut basis = u.columns(0, rank).into_owned();
        fix_signs(&mut basis);
        let profile = RankProfile {
            singular_values: sv,
            cutoff,
            rank,
        };
        (Self::from_orthonormal(basis), profile)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Orthonormal basis as the columns of an `ambient_dim x dim` matrix.
    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<DVector<T>> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn projector(&self) -> &DMatrix<T> {
        &self.projector
    }

    /// `I - P`, the projector onto the orthogonal complement.
    pub fn co_projector(&self) -> DMatrix<T> {
        DMatrix::identity(self.ambient, self.ambient) - &self.projector
    }

    /// `‖BᴴB − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.dim();
        (self.basis.adjoint() * &self.basis - DMatrix::<T>::identity(r, r)).norm()
    }

    /// `max(‖P² − P‖_F, ‖P − Pᴴ‖_F)`.
    pub fn projector_defect(&self) -> f64 {
        let p = &self.projector;
        let idem = (p * p - p).norm();
        let sa = (p - p.adjoint()).norm();
        idem.max(sa)
    }

    pub fn project(&self, v: &DVector<T>) -> Result<DVector<T>> {
        ensure_dims("vector length", v.len(), self.ambient)?;
        Ok(&self.projector * v)
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn distance_to(&self, v: &DVector<T>) -> Result<f64> {
        Ok((v - self.project(v)?).norm())
    }

    pub fn complement(&self) -> Self {
        Self::from_unit_scale(&self.co_projector(), &ToleranceConfig::default())
    }

    /// Orthogonal complement using the given rank tolerance.
    pub fn complement_with(&self, cfg: &ToleranceConfig) -> Self {
        Self::from_unit_scale(&self.co_projector(), cfg)
    }

    pub fn sum(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        ensure_dims("ambient dimension", other.ambient, self.ambient)?;
        let mut gens = DMatrix::zeros(self.ambient, self.dim() + other.dim());
        gens.columns_mut(0, self.dim()).copy_from(&self.basis);
        gens.columns_mut(self.dim(), other.dim())
            .copy_from(&other.basis);
        Ok(Self::from_unit_scale(&gens, cfg))
    }

    /// Intersection as the complement of the sum of complements.
    pub fn intersect(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        ensure_dims("ambient dimension", other.ambient, self.ambient)?;
        let joint = self
            .complement_with(cfg)
            .sum(&other.complement_with(cfg), cfg)?;
        Ok(joint.complement_with(cfg))
    }

    /// Frobenius distance between the two projectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        ensure_dims("ambient dimension", other.ambient, self.ambient)?;
        Ok((&self.projector - &other.projector).norm())
    }

    /// Equality verdict at `cfg.eq` together with the projector distance.
    pub fn equals(&self, other: &Self, cfg: &ToleranceConfig) -> Result<(bool, f64)> {
        let d = self.distance(other)?;
        Ok((d < cfg.eq, d))
    }

    /// `‖(I − P_self) B_other‖_F`: zero iff `other ⊂ self`.
    pub fn containment_defect(&self, other: &Self) -> Result<f64> {
        ensure_dims("ambient dimension", other.ambient, self.ambient)?;
        Ok((&other.basis - &self.projector * &other.basis).norm())
    }

    /// Image of the subspace under a linear map of norm at most about one.
    pub(crate) fn image_under(&self, map: &DMatrix<T>, cfg: &ToleranceConfig) -> Self {
        Self::from_unit_scale(&(map * &self.basis), cfg)
    }

    /// `S1 × S2` inside the product of the two ambient spaces.
    pub fn product(&self, other: &Self) -> Self {
        let (a, b) = (self.ambient, other.ambient);
        let mut basis = DMatrix::zeros(a + b, self.dim() + other.dim());
        basis
            .view_mut((0, 0), (a, self.dim()))
            .copy_from(&self.basis);
        basis
            .view_mut((a, self.dim()), (b, other.dim()))
            .copy_from(&other.basis);
        Self::from_orthonormal(basis)
    }

    /// Re-orthonormalized copy (idempotent up to rounding).
    pub fn reorthonormalized(&self, cfg: &ToleranceConfig) -> Self {
        Self::from_unit_scale(&self.basis, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::unit;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    /// Fraction-free (Bareiss) elimination over the integers.
    fn exact_rank(rows: &[Vec<i128>]) -> usize {
        let mut a: Vec<Vec<i128>> = rows.to_vec();
        let (m, n) = (a.len(), a.first().map_or(0, |r| r.len()));
        let mut rank = 0;
        let mut prev = 1i128;
        for col in 0..n {
            let Some(p) = (rank..m).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..m {
                for c in col + 1..n {
                    a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
                }
                a[r][col] = 0;
            }
            prev = a[rank][col];
            rank += 1;
        }
        rank
    }

    #[test]
    fn span_of_collinear_vectors_is_a_line() {
        let s = Subspace::span(2, &[v(&[1.0, 0.0]), v(&[2.0, 0.0])], &cfg()).unwrap();
        assert_eq!(s.dim(), 1);
        let e1 = Subspace::coordinate(2, 0..1);
        assert!(s.equals(&e1, &cfg()).unwrap().0);
        assert_eq!(s.basis()[(0, 0)], 1.0);
    }

    #[test]
    fn empty_span_is_zero_dimensional() {
        let s = Subspace::<f64>::span(2, &[], &cfg()).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 2);
        assert_eq!(s.projector().norm(), 0.0);
    }

    #[test]
    fn span_rank_matches_exact_elimination() {
        let gens = [vec![1i128, 1], vec![1, -1]];
        let expected = exact_rank(&gens);
        assert_eq!(expected, 2);
        let s = Subspace::span(2, &[v(&[1.0, 1.0]), v(&[1.0, -1.0])], &cfg()).unwrap();
        assert_eq!(s.dim(), expected);
        assert!(s.is_full());
        assert_eq!(
            exact_rank(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]),
            2
        );
        let s3 = Subspace::span(
            3,
            &[
                v(&[1.0, 2.0, 3.0]),
                v(&[2.0, 4.0, 6.0]),
                v(&[0.0, 1.0, 1.0]),
            ],
            &cfg(),
        )
        .unwrap();
        assert_eq!(s3.dim(), 2);
    }

    #[test]
    fn span_errors() {
        assert_eq!(
            Subspace::<f64>::span(0, &[], &cfg()).unwrap_err(),
            RelError::EmptyAmbient
        );
        assert!(matches!(
            Subspace::span(2, &[v(&[1.0, 0.0, 0.0])], &cfg()),
            Err(RelError::DimensionMismatch(_))
        ));
        assert!(Subspace::span(1, &[v(&[f64::NAN])], &cfg()).is_err());
    }

    #[test]
    fn complement_examples() {
        let e1 = Subspace::<f64>::coordinate(2, 0..1);
        let c = e1.complement();
        assert!(c.equals(&Subspace::coordinate(2, 1..2), &cfg()).unwrap().0);
        assert_eq!(Subspace::<f64>::full(3).complement().dim(), 0);

        let diag = Subspace::span(2, &[v(&[1.0, 1.0])], &cfg()).unwrap();
        let c = diag.complement();
        assert_eq!(c.dim(), 1);
        let b = c.basis().column(0);
        assert!((b[0] + b[1]).abs() < 1e-15, "orthogonal to (1,1)");
        let anti = Subspace::span(2, &[v(&[1.0, -1.0])], &cfg()).unwrap();
        assert!(c.equals(&anti, &cfg()).unwrap().0);
        let sum = diag.projector() + c.projector();
        assert!((sum - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn intersection_examples() {
        let a = Subspace::<f64>::coordinate(3, 0..2);
        let b = Subspace::<f64>::coordinate(3, 1..3);
        let i = a.intersect(&b, &cfg()).unwrap();
        assert!(i.equals(&Subspace::coordinate(3, 1..2), &cfg()).unwrap().0);

        let s = Subspace::span(3, &[v(&[1.0, 2.0, 0.5])], &cfg()).unwrap();
        assert_eq!(s.intersect(&s.complement(), &cfg()).unwrap().dim(), 0);

        let plane = Subspace::span(2, &[v(&[1.0, 0.0]), v(&[0.0, 1.0])], &cfg()).unwrap();
        let line = Subspace::span(2, &[v(&[1.0, 1.0])], &cfg()).unwrap();
        let i = plane.intersect(&line, &cfg()).unwrap();
        // containment oracle: the result lies in both and contains (1,1)
        assert_eq!(i.dim(), 1);
        assert!(plane.containment_defect(&i).unwrap() < 1e-12);
        assert!(line.containment_defect(&i).unwrap() < 1e-12);
        assert!(i.distance_to(&v(&[1.0, 1.0])).unwrap() < 1e-12);
    }

    #[test]
    fn sum_examples() {
        let e1 = Subspace::<f64>::coordinate(2, 0..1);
        let e2 = Subspace::<f64>::coordinate(2, 1..2);
        assert!(e1.sum(&e2, &cfg()).unwrap().is_full());
        let s = Subspace::span(2, &[v(&[3.0, 4.0])], &cfg()).unwrap();
        assert!(
            s.sum(&Subspace::zero(2), &cfg())
                .unwrap()
                .equals(&s, &cfg())
                .unwrap()
                .0
        );
        let a = Subspace::span(2, &[v(&[1.0, 1.0])], &cfg()).unwrap();
        let b = Subspace::span(2, &[v(&[1.0, -1.0])], &cfg()).unwrap();
        assert_eq!(a.sum(&b, &cfg()).unwrap().dim(), 2);
        assert!(matches!(
            a.sum(&Subspace::zero(3), &cfg()),
            Err(RelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn equality_examples() {
        let e1 = Subspace::<f64>::coordinate(2, 0..1);
        let scaled = Subspace::span(2, &[v(&[2.0, 0.0])], &cfg()).unwrap();
        assert_eq!(e1.equals(&scaled, &cfg()).unwrap(), (true, 0.0));
        let e2 = Subspace::<f64>::coordinate(2, 1..2);
        let (eq, d) = e1.equals(&e2, &cfg()).unwrap();
        assert!(!eq);
        // diag(1,0) - diag(0,1) has Frobenius norm sqrt(2)
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let z = Subspace::<f64>::zero(2);
        assert!(z.equals(&Subspace::zero(2), &cfg()).unwrap().0);
    }

    #[test]
    fn basis_columns_have_positive_leading_entry() {
        let s = Subspace::span(3, &[v(&[-1.0, 2.0, 0.0]), v(&[0.0, -1.0, -3.0])], &cfg()).unwrap();
        for col in s.basis().column_iter() {
            let lead = col.iter().find(|x| x.abs() > SIGN_PIVOT).unwrap();
            assert!(*lead > 0.0);
        }
        assert!(s.orthonormality_defect() < 1e-14);
        assert!(s.projector_defect() < 1e-14);
    }

    #[test]
    fn rank_profile_flags_ambiguity() {
        let gens = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
        let p = Subspace::rank_profile(&gens, &cfg());
        // cutoff is 2e-10, so 1e-9 is kept but sits inside the ambiguity band
        assert_eq!(p.rank, 2);
        assert!(p.ambiguous());
        let clean = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!(!Subspace::rank_profile(&clean, &cfg()).ambiguous());
    }

    #[test]
    fn complex_subspaces_use_conjugate_transpose() {
        use num_complex::Complex64 as C;
        let i = C::new(0.0, 1.0);
        let w = DVector::from_vec(vec![C::new(1.0, 0.0), i]);
        let s = Subspace::span(2, std::slice::from_ref(&w), &cfg()).unwrap();
        let c = s.complement();
        assert_eq!(c.dim(), 1);
        let u = c.basis().column(0);
        let ip = w.dotc(&u.into_owned());
        assert!(ip.norm() < 1e-14);
        assert!(s.distance_to(&w.scale(3.0)).unwrap() < 1e-14);
        assert!(s.distance_to(&unit::<C>(2, 0)).unwrap() > 0.5);
    }
}
