//! Characteristic (Stone) matrices: the orthogonal projector onto a graph,
//! split into blocks along `H × K`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decomposition::{classify, regular_part, ClassFlags};
use crate::error::{ensure_dims, RelError, Result};
use crate::linalg::{block_diag, vstack};
use crate::relation::{LinearRelation, Parts};
use crate::scalar::Scalar;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

/// Blocks of the graph projector `R = [[R11, R12], [R21, R22]]` of a relation
/// from `F^m` to `F^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicMatrix<T: Scalar = f64> {
    pub r11: DMatrix<T>,
    pub r12: DMatrix<T>,
    pub r21: DMatrix<T>,
    pub r22: DMatrix<T>,
}

impl<T: Scalar> CharacteristicMatrix<T> {
    /// Splits an `(m + n) × (m + n)` matrix into blocks.
    pub fn from_matrix(r: &DMatrix<T>, m: usize) -> Result<Self> {
        let d = r.nrows();
        ensure_dims("characteristic matrix columns", r.ncols(), d)?;
        if m == 0 || m >= d {
            return Err(RelError::DimensionMismatch(format!(
                "cannot split a {d}×{d} matrix with dim H = {m}"
            )));
        }
        let n = d - m;
        Ok(Self {
            r11: r.view((0, 0), (m, m)).into_owned(),
            r12: r.view((0, m), (m, n)).into_owned(),
            r21: r.view((m, 0), (n, m)).into_owned(),
            r22: r.view((m, m), (n, n)).into_owned(),
        })
    }

    pub fn from_blocks(
        r11: DMatrix<T>,
        r12: DMatrix<T>,
        r21: DMatrix<T>,
        r22: DMatrix<T>,
    ) -> Result<Self> {
        let (m, n) = (r11.nrows(), r22.nrows());
        ensure_dims("R11 columns", r11.ncols(), m)?;
        ensure_dims("R22 columns", r22.ncols(), n)?;
        ensure_dims("R12 rows", r12.nrows(), m)?;
        ensure_dims("R12 columns", r12.ncols(), n)?;
        ensure_dims("R21 rows", r21.nrows(), n)?;
        ensure_dims("R21 columns", r21.ncols(), m)?;
        Ok(Self { r11, r12, r21, r22 })
    }

    pub fn dim_h(&self) -> usize {
        self.r11.nrows()
    }

    pub fn dim_k(&self) -> usize {
        self.r22.nrows()
    }

    pub fn assembled(&self) -> DMatrix<T> {
        let (m, n) = (self.dim_h(), self.dim_k());
        let mut r = DMatrix::zeros(m + n, m + n);
        r.view_mut((0, 0), (m, m)).copy_from(&self.r11);
        r.view_mut((0, m), (m, n)).copy_from(&self.r12);
        r.view_mut((m, 0), (n, m)).copy_from(&self.r21);
        r.view_mut((m, m), (n, n)).copy_from(&self.r22);
        r
    }

    /// `max(‖R² − R‖_F, ‖R − Rᴴ‖_F)`.
    pub fn projector_defect(&self) -> f64 {
        let r = self.assembled();
        (&r * &r - &r).norm().max((&r - r.adjoint()).norm())
    }

    pub fn validate(&self, cfg: &ToleranceConfig) -> Result<()> {
        let defect = self.projector_defect();
        if defect.is_finite() && defect < cfg.num {
            Ok(())
        } else {
            Err(RelError::InvalidCharacteristic(format!(
                "not an orthogonal projector (defect {defect:e})"
            )))
        }
    }

    /// Frobenius distance of the assembled matrices.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        ensure_dims("dim H", other.dim_h(), self.dim_h())?;
        ensure_dims("dim K", other.dim_k(), self.dim_k())?;
        Ok((self.assembled() - other.assembled()).norm())
    }

    fn complement_blocks(&self) -> (DMatrix<T>, DMatrix<T>) {
        let (m, n) = (self.dim_h(), self.dim_k());
        (
            DMatrix::identity(m, m) - &self.r11,
            DMatrix::identity(n, n) - &self.r22,
        )
    }
}

/// The graph projector of `T`.
pub fn characteristic_matrix<T: Scalar>(t: &LinearRelation<T>) -> CharacteristicMatrix<T> {
    CharacteristicMatrix::from_matrix(t.graph().projector(), t.dim_h())
        .expect("graph ambient is dim_h + dim_k")
}

/// `(S + I)⁻¹` for a nonnegative relation `S` in `F^d`, read off the graph
/// `{(f + g, f) : (f, g) ∈ S}`.
fn shifted_inverse<T: Scalar>(s: &LinearRelation<T>, cfg: &ToleranceConfig) -> Result<DMatrix<T>> {
    let d = s.dim_h();
    let (f, g) = (s.h_block(), s.k_block());
    let gens = vstack(&(&f + &g), &f);
    let graph = Subspace::range_of(&gens, cfg);
    let rel = LinearRelation::from_graph(d, d, graph)?;
    let dom = rel.dom(cfg).dim();
    if dom != d {
        return Err(RelError::NotEverywhereDefined { dom, expected: d });
    }
    rel.operator_matrix(cfg)
}

/// `R` assembled from resolvents of `T*T` and `TT*`, with `T*T` and `TT*`
/// formed as relation products.
pub fn characteristic_via_resolvent<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<CharacteristicMatrix<T>> {
    let n = t.dim_k();
    let adj = t.adjoint(cfg);
    let r11 = shifted_inverse(&LinearRelation::compose(&adj, t, cfg)?, cfg)?;
    let t_reg = regular_part(t, cfg).operator_matrix(cfg)?;
    let r21 = t_reg * &r11;
    let r22 =
        DMatrix::identity(n, n) - shifted_inverse(&LinearRelation::compose(t, &adj, cfg)?, cfg)?;
    let r12 = r21.adjoint();
    CharacteristicMatrix::from_blocks(r11, r12, r21, r22)
}

/// `‖(T*)_reg (TT* + I)⁻¹ − R21ᴴ‖_F`: the upper-right block computed from
/// the adjoint side instead of by symmetry.
pub fn upper_right_residual<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let adj = t.adjoint(cfg);
    let resolvent = shifted_inverse(&LinearRelation::compose(t, &adj, cfg)?, cfg)?;
    let r12 = regular_part(&adj, cfg).operator_matrix(cfg)? * resolvent;
    let r = characteristic_matrix(t);
    Ok((r12 - r.r21.adjoint()).norm())
}

/// Column span of the assembled `R`.
pub fn relation_from_characteristic<T: Scalar>(
    r: &CharacteristicMatrix<T>,
    cfg: &ToleranceConfig,
) -> Result<LinearRelation<T>> {
    r.validate(cfg)?;
    LinearRelation::from_graph(
        r.dim_h(),
        r.dim_k(),
        Subspace::range_of(&r.assembled(), cfg),
    )
}

/// Characteristic matrix of `T*`: `[[I − R22, R21], [R12, I − R11]]`.
pub fn adjoint_characteristic<T: Scalar>(r: &CharacteristicMatrix<T>) -> CharacteristicMatrix<T> {
    let (c11, c22) = r.complement_blocks();
    CharacteristicMatrix {
        r11: c22,
        r12: r.r21.clone(),
        r21: r.r12.clone(),
        r22: c11,
    }
}

/// Characteristic matrix of `T⁻¹`, in the `K × H` layout of the inverse:
/// `[[R22, R21], [R12, R11]]`.
pub fn inverse_characteristic<T: Scalar>(r: &CharacteristicMatrix<T>) -> CharacteristicMatrix<T> {
    CharacteristicMatrix {
        r11: r.r22.clone(),
        r12: r.r21.clone(),
        r21: r.r12.clone(),
        r22: r.r11.clone(),
    }
}

fn hcat<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    vstack(&a.adjoint(), &b.adjoint()).adjoint()
}

/// Parts of `T` read off `R`: `dom = ran(R11 R12)`, `ran = ran(R21 R22)`,
/// `ker = ker(I − R11)`, `mul = ker(I − R22)`.
pub fn stone_parts<T: Scalar>(r: &CharacteristicMatrix<T>, cfg: &ToleranceConfig) -> Parts<T> {
    let (c11, c22) = r.complement_blocks();
    Parts {
        dom: Subspace::range_of(&hcat(&r.r11, &r.r12), cfg),
        ran: Subspace::range_of(&hcat(&r.r21, &r.r22), cfg),
        ker: Subspace::kernel_of(&c11, cfg),
        mul: Subspace::kernel_of(&c22, cfg),
    }
}

/// Parts of `T*` read off `R`: `dom T* = ran(I − R22  R21)`,
/// `ran T* = ran(R12  I − R11)`, `ker T* = ker R22`, `mul T* = ker R11`.
pub fn stone_adjoint_parts<T: Scalar>(
    r: &CharacteristicMatrix<T>,
    cfg: &ToleranceConfig,
) -> Parts<T> {
    let (c11, c22) = r.complement_blocks();
    Parts {
        dom: Subspace::range_of(&hcat(&c22, &r.r21), cfg),
        ran: Subspace::range_of(&hcat(&r.r12, &c11), cfg),
        ker: Subspace::kernel_of(&r.r22, cfg),
        mul: Subspace::kernel_of(&r.r11, cfg),
    }
}

/// `{(R11 h + R12 k, R21 h + R22 k) : h ∈ H, k ⊥ mul T}`.
pub fn regular_part_via_stone<T: Scalar>(
    r: &CharacteristicMatrix<T>,
    cfg: &ToleranceConfig,
) -> Result<LinearRelation<T>> {
    r.validate(cfg)?;
    let (_, c22) = r.complement_blocks();
    let mul_perp = Subspace::kernel_of(&c22, cfg).complement_with(cfg);
    let k = mul_perp.basis();
    let left = vstack(&r.r11, &r.r21);
    let right = vstack(&(&r.r12 * k), &(&r.r22 * k));
    LinearRelation::from_graph(
        r.dim_h(),
        r.dim_k(),
        Subspace::range_of(&hcat(&left, &right), cfg),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoneClass {
    pub regular: bool,
    pub singular: bool,
    pub maximally_singular: bool,
    /// `‖R̃12‖_F`.
    pub r12_norm: f64,
    /// `‖R̃ − diag(Proj dom̄ T, Proj ran̄ T)‖_F`.
    pub block_form_distance: f64,
    /// `‖R̃22 − I‖_F`.
    pub r22_identity_distance: f64,
    /// `dim ker(I − R̃22)`.
    pub fixed_space_dim: usize,
}

/// Regular/singular tests on the characteristic matrix of `T̄`, checked
/// against the subspace-level classification.
pub fn stone_classify<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<StoneClass> {
    let closure = t.closure(cfg);
    let r = characteristic_matrix(&closure);
    let (_, c22) = r.complement_blocks();
    let fixed_space_dim = Subspace::kernel_of(&c22, cfg).dim();
    let r12_norm = r.r12.norm();
    let r22_identity_distance = c22.norm();
    let block = block_diag(t.dom(cfg).projector(), t.ran(cfg).projector());
    let block_form_distance = (r.assembled() - block).norm();
    let out = StoneClass {
        regular: fixed_space_dim == 0,
        singular: r12_norm < cfg.num,
        maximally_singular: r22_identity_distance < cfg.num,
        r12_norm,
        block_form_distance,
        r22_identity_distance,
        fixed_space_dim,
    };
    if out.singular && block_form_distance >= cfg.num {
        return Err(RelError::Inconsistent(format!(
            "R̃12 vanishes but R̃ is not block diagonal (distance {block_form_distance:e})"
        )));
    }
    let flags = classify(t, cfg)?.flags;
    let stone_flags = ClassFlags {
        is_regular: out.regular,
        is_singular: out.singular,
        is_maximally_singular: out.maximally_singular,
    };
    if flags != stone_flags {
        return Err(RelError::Inconsistent(format!(
            "Stone classification {stone_flags:?} differs from {flags:?}"
        )));
    }
    Ok(out)
}

/// Residuals of the identities satisfied by a characteristic matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoneResiduals {
    pub projector: f64,
    /// `‖R21 − R12ᴴ‖_F`.
    pub off_diagonal_symmetry: f64,
    /// Kernel inclusions `ker R11 ⊂ ker R21`, `ker R22 ⊂ ker R12`,
    /// `ker(I − R11) ⊂ ker R21`, `ker(I − R22) ⊂ ker R12`.
    pub kernel_inclusions: [f64; 4],
    /// Projector route against resolvent route.
    pub two_route: f64,
    pub upper_right: f64,
    pub round_trip: f64,
    pub adjoint_route: f64,
    pub inverse_route: f64,
    /// Parts of `T` read off `R` against direct computation (worst of four).
    pub parts: f64,
    /// `dom T*`, `ker T*`, `mul T*` read off `R` against direct computation.
    pub adjoint_parts: [f64; 3],
    /// `R11`, `R21` on `mul T*` and `R12`, `R22 − I` on `mul T̄`.
    pub restrictions: [f64; 4],
    pub regular_part: f64,
}

impl StoneResiduals {
    pub fn max(&self) -> f64 {
        [
            self.projector,
            self.off_diagonal_symmetry,
            self.two_route,
            self.upper_right,
            self.round_trip,
            self.adjoint_route,
            self.inverse_route,
            self.parts,
            self.regular_part,
        ]
        .into_iter()
        .chain(self.kernel_inclusions)
        .chain(self.adjoint_parts)
        .chain(self.restrictions)
        .fold(0.0, f64::max)
    }
}

fn annihilation<T: Scalar>(a: &DMatrix<T>, s: &Subspace<T>) -> f64 {
    (a * s.basis()).norm()
}

pub fn stone_residuals<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<StoneResiduals> {
    let r = characteristic_matrix(t);
    let n = t.dim_k();
    let (c11, c22) = r.complement_blocks();
    let kernel_inclusions = [
        annihilation(&r.r21, &Subspace::kernel_of(&r.r11, cfg)),
        annihilation(&r.r12, &Subspace::kernel_of(&r.r22, cfg)),
        annihilation(&r.r21, &Subspace::kernel_of(&c11, cfg)),
        annihilation(&r.r12, &Subspace::kernel_of(&c22, cfg)),
    ];
    let resolvent = characteristic_via_resolvent(t, cfg)?;
    let adj = t.adjoint(cfg);
    let direct = t.parts(cfg);
    let read = stone_parts(&r, cfg);
    let parts = [
        read.dom.distance(&direct.dom)?,
        read.ran.distance(&direct.ran)?,
        read.ker.distance(&direct.ker)?,
        read.mul.distance(&direct.mul)?,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let adj_direct = adj.parts(cfg);
    let adj_read = stone_adjoint_parts(&r, cfg);
    let mul_adj = adj_direct.mul.clone();
    let mul_closure = t.closure(cfg).mul(cfg);
    Ok(StoneResiduals {
        projector: r.projector_defect(),
        off_diagonal_symmetry: (&r.r21 - r.r12.adjoint()).norm(),
        kernel_inclusions,
        two_route: r.distance(&resolvent)?,
        upper_right: upper_right_residual(t, cfg)?,
        round_trip: relation_from_characteristic(&r, cfg)?.distance(t)?,
        adjoint_route: adjoint_characteristic(&r).distance(&characteristic_matrix(&adj))?,
        inverse_route: inverse_characteristic(&r)
            .distance(&characteristic_matrix(&t.inverse(cfg)))?,
        parts,
        adjoint_parts: [
            adj_read.dom.distance(&adj_direct.dom)?,
            adj_read.ker.distance(&adj_direct.ker)?,
            adj_read.mul.distance(&adj_direct.mul)?,
        ],
        restrictions: [
            annihilation(&r.r11, &mul_adj),
            annihilation(&r.r21, &mul_adj),
            annihilation(&r.r12, &mul_closure),
            annihilation(&(DMatrix::identity(n, n) - &r.r22), &mul_closure),
        ],
        regular_part: regular_part_via_stone(&r, cfg)?.distance(&regular_part(t, cfg))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use approx::assert_relative_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn characteristic_examples() {
        let r = characteristic_matrix(&fix_id1());
        close(&r.assembled(), &DMatrix::from_element(2, 2, 0.5));
        let r = characteristic_matrix(&fix_mul());
        close(&r.assembled(), &diag(&[0.0, 0.0, 1.0, 1.0]));
        let r = characteristic_matrix(&fix_diag());
        close(&r.r11, &diag(&[0.5, 0.2]));
        close(&r.r21, &diag(&[0.5, 0.4]));
        close(&r.r22, &diag(&[0.5, 0.8]));
    }

    #[test]
    fn resolvent_examples() {
        let r = characteristic_via_resolvent(&fix_id1(), &cfg()).unwrap();
        assert_relative_eq!(r.r11[(0, 0)], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.r21[(0, 0)], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.r22[(0, 0)], 0.5, epsilon = 1e-12);
        let r = characteristic_via_resolvent(&fix_diag(), &cfg()).unwrap();
        close(&r.r11, &diag(&[0.5, 0.2]));
        let r = characteristic_via_resolvent(&fix_mul(), &cfg()).unwrap();
        close(&r.r22, &diag(&[1.0, 1.0]));
        close(&r.r11, &DMatrix::zeros(2, 2));
        for t in [
            fix_id1(),
            fix_diag(),
            fix_mix(),
            fix_mul(),
            fix_sing(),
            fix_zero(),
        ] {
            let d = characteristic_matrix(&t)
                .distance(&characteristic_via_resolvent(&t, &cfg()).unwrap())
                .unwrap();
            assert!(d < 1e-9);
            assert!(upper_right_residual(&t, &cfg()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn round_trip_examples() {
        let back =
            relation_from_characteristic(&characteristic_matrix(&fix_mix()), &cfg()).unwrap();
        assert!(back.distance(&fix_mix()).unwrap() < 1e-9);
        let zero = CharacteristicMatrix::<f64>::from_matrix(&DMatrix::zeros(4, 4), 2).unwrap();
        let z = relation_from_characteristic(&zero, &cfg()).unwrap();
        assert_eq!(z.graph_dim(), 0);
        let full = CharacteristicMatrix::<f64>::from_matrix(&DMatrix::identity(4, 4), 2).unwrap();
        assert!(relation_from_characteristic(&full, &cfg())
            .unwrap()
            .graph()
            .is_full());
        let bad =
            CharacteristicMatrix::<f64>::from_matrix(&(DMatrix::identity(4, 4) * 2.0), 2).unwrap();
        assert!(matches!(
            relation_from_characteristic(&bad, &cfg()),
            Err(RelError::InvalidCharacteristic(_))
        ));
    }

    #[test]
    fn adjoint_characteristic_examples() {
        let r = characteristic_matrix(&fix_id1());
        assert!(adjoint_characteristic(&r).distance(&r).unwrap() < 1e-12);

        // T = {0} × K is maximally singular, so T* = {0} × H
        let r = characteristic_matrix(&fix_mul());
        let a = adjoint_characteristic(&r);
        close(&a.assembled(), &diag(&[0.0, 0.0, 1.0, 1.0]));
        let t_star = relation_from_characteristic(&a, &cfg()).unwrap();
        assert!(t_star.dom(&cfg()).is_trivial());
        assert!(t_star.mul(&cfg()).is_full());
        assert!(t_star.distance(&fix_mul().adjoint(&cfg())).unwrap() < 1e-12);
        let adj_parts = stone_adjoint_parts(&r, &cfg());
        // ker T* = ker R22 = {0}, mul T* = ker R11 = H
        assert!(adj_parts.ker.is_trivial());
        assert!(adj_parts.mul.is_full());

        let r = characteristic_matrix(&fix_mix());
        assert!(
            adjoint_characteristic(&adjoint_characteristic(&r))
                .distance(&r)
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn stone_parts_examples() {
        let p = stone_parts(&characteristic_matrix(&fix_mix()), &cfg());
        assert!(p.mul.distance(&Subspace::coordinate(2, 1..2)).unwrap() < 1e-10);
        let p = stone_parts(&characteristic_matrix(&fix_diag()), &cfg());
        assert!(p.ker.is_trivial());
        let p = stone_parts(&characteristic_matrix(&fix_mul()), &cfg());
        assert!(p.dom.is_trivial());
    }

    #[test]
    fn regular_part_via_stone_examples() {
        let e1 = LinearRelation::from_operator(
            &diag(&[1.0, 0.0]),
            Some(&Subspace::coordinate(2, 0..1)),
            &[],
            &cfg(),
        )
        .unwrap();
        let r = regular_part_via_stone(&characteristic_matrix(&fix_mix()), &cfg()).unwrap();
        assert!(r.distance(&e1).unwrap() < 1e-9);
        let r = regular_part_via_stone(&characteristic_matrix(&fix_diag()), &cfg()).unwrap();
        assert!(r.distance(&fix_diag()).unwrap() < 1e-9);
        let r = regular_part_via_stone(&characteristic_matrix(&fix_mul()), &cfg()).unwrap();
        assert_eq!(r.graph_dim(), 0);
    }

    #[test]
    fn stone_classify_examples() {
        let s = stone_classify(&fix_sing(), &cfg()).unwrap();
        assert!(s.singular && !s.regular && !s.maximally_singular);
        assert!(s.r12_norm < 1e-15);
        let r = characteristic_matrix(&fix_sing());
        close(&r.assembled(), &diag(&[1.0, 0.0, 0.0, 1.0]));

        let s = stone_classify(&fix_mul(), &cfg()).unwrap();
        assert!(s.maximally_singular && s.singular);
        close(
            &characteristic_matrix(&fix_mul()).r22,
            &DMatrix::identity(2, 2),
        );

        let s = stone_classify(&fix_diag(), &cfg()).unwrap();
        assert!(s.regular && !s.singular);
        assert_eq!(s.fixed_space_dim, 0);
        let eig = characteristic_matrix(&fix_diag())
            .r22
            .symmetric_eigenvalues();
        let mut ev: Vec<f64> = eig.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_relative_eq!(ev[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn residuals_vanish_on_fixtures() {
        for t in [
            fix_id1(),
            fix_diag(),
            fix_mix(),
            fix_mul(),
            fix_sing(),
            fix_zero(),
        ] {
            let r = stone_residuals(&t, &cfg()).unwrap();
            assert!(r.max() < 1e-9, "{r:?}");
        }
    }
}
