//! Graph-norm constructions and the variational identities for the
//! singular and regular energies `‖Pφ′‖²` and `‖(I − P)φ′‖²`.
//!
//! Graph elements are written in coordinates `c` with respect to the
//! orthonormal graph basis `B = [B_H; B_K]`, so the graph inner product is the
//! Euclidean one on `c` and `ι c = B_H c`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::operator_part_closed;
use crate::error::{ensure_dims, RelError, Result};
use crate::linalg::{pinv, spectral_norm, stack_vectors, vstack};
use crate::relation::LinearRelation;
use crate::scalar::{random_vector, Scalar};
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

/// Number of random domain vectors added to the basis probes.
pub const RANDOM_PROBES: usize = 5;

/// `|a − b| / max(|a|, |b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Debug)]
pub struct GraphMaps<T: Scalar = f64> {
    /// `B_H`, `m × r`.
    pub iota: DMatrix<T>,
    pub iota_adjoint: DMatrix<T>,
    /// Projector onto `ker ι` in graph coordinates, `r × r`.
    pub q: DMatrix<T>,
    /// Projector onto `mul T̄` in `K`.
    pub p: DMatrix<T>,
    basis: DMatrix<T>,
}

impl<T: Scalar> GraphMaps<T> {
    pub fn graph_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Graph coordinates of a pair, without a membership check.
    pub fn coordinates(&self, f: &DVector<T>, fp: &DVector<T>) -> DVector<T> {
        self.basis.adjoint() * stack_vectors(f, fp)
    }

    pub fn iota_norm(&self) -> f64 {
        spectral_norm(&self.iota)
    }
}

fn degenerate(what: &str, distance: f64, threshold: f64) -> RelError {
    RelError::Degenerate {
        what: what.into(),
        distance,
        threshold,
    }
}

/// Builds `ι`, `ι*` and `Q` and verifies the contraction property, the
/// description of `ker ι`, the action of `Q` and the range of `ι*`.
pub fn graph_maps<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> Result<GraphMaps<T>> {
    let closure = t.closure(cfg);
    let m = t.dim_h();
    let basis = closure.graph().basis().clone();
    let iota = closure.h_block();
    let b_k = closure.k_block();
    let mul = closure.mul(cfg);
    let p = mul.projector().clone();

    let norm = spectral_norm(&iota);
    if norm > 1.0 + cfg.num {
        return Err(degenerate("ι contraction", norm - 1.0, cfg.num));
    }
    let ker_iota = Subspace::kernel_of(&iota, cfg);
    // coordinates of {0} × mul T̄
    let zero_mul = vstack(&DMatrix::zeros(m, mul.dim()), mul.basis());
    let from_mul = Subspace::range_of(&(basis.adjoint() * zero_mul), cfg);
    let d = ker_iota.distance(&from_mul)?;
    if d >= cfg.eq {
        return Err(degenerate("ker ι = {0} × mul T̄", d, cfg.eq));
    }
    let q = ker_iota.projector().clone();
    let expected = vstack(&DMatrix::zeros(m, basis.ncols()), &(&p * &b_k));
    let d = (&basis * &q - expected).norm();
    if d >= cfg.num {
        return Err(degenerate("Q(φ, φ′) = (0, Pφ′)", d, cfg.num));
    }
    let iota_adjoint = iota.adjoint();
    let d = Subspace::range_of(&iota_adjoint, cfg).distance(&ker_iota.complement_with(cfg))?;
    if d >= cfg.eq {
        return Err(degenerate("ran ι* = 𝔊 ⊖ ker ι", d, cfg.eq));
    }
    Ok(GraphMaps {
        iota,
        iota_adjoint,
        q,
        p,
        basis,
    })
}

fn check_pair<T: Scalar>(
    t: &LinearRelation<T>,
    f: &DVector<T>,
    fp: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<()> {
    let dist = t.pair_distance(f, fp)?;
    let scale = (f.norm_squared() + fp.norm_squared()).sqrt().max(1.0);
    if dist > cfg.num * scale {
        return Err(RelError::NotInGraph(dist));
    }
    Ok(())
}

/// `‖Pφ′‖²`, checked against `‖Q(φ, φ′)‖²` in the graph norm.
pub fn singular_energy_direct<T: Scalar>(
    t: &LinearRelation<T>,
    phi: &DVector<T>,
    phi_p: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    check_pair(t, phi, phi_p, cfg)?;
    let maps = graph_maps(t, cfg)?;
    let value = (&maps.p * phi_p).norm_squared();
    let graph_side = (&maps.q * maps.coordinates(phi, phi_p)).norm_squared();
    let defect = (value - graph_side).abs();
    if defect >= cfg.num * phi_p.norm_squared().max(1.0) {
        return Err(degenerate("‖Pφ′‖² = ‖Q(φ, φ′)‖²", defect, cfg.num));
    }
    Ok(value)
}

/// Result of one nested variational solve next to the direct value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub variational: f64,
    pub direct: f64,
}

impl Energy {
    pub fn defect(&self) -> f64 {
        (self.variational - self.direct).abs()
    }
}

/// `min_{h ∈ dom T} {‖φ + h‖² − inf_{(g, g′) ∈ T} (‖g′‖² + ‖g + h‖²)}`.
///
/// The inner infimum is the squared distance from `(−h, 0)` to the graph,
/// `‖h‖² − ‖B_Hᴴ h‖²`, so with `h = Dy` over a basis `D` of `dom T` the
/// objective is `‖φ‖² + 2 Re(bᴴy) + ‖Gy‖²` with `G = B_Hᴴ D` and `b = Dᴴφ`.
/// Its minimum `‖φ‖² − ‖Σ⁻¹Vᴴb‖²` is read off the SVD of `G`; forming
/// `GᴴG` or `I − W` explicitly would lose the small singular values that
/// carry the large energies.
fn outer_minimum<T: Scalar>(
    t: &LinearRelation<T>,
    phi: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let b_h = t.h_block();
    let d = t.dom(cfg);
    let g = b_h.adjoint() * d.basis();
    let lin = d.basis().adjoint() * phi;
    let dec = crate::linalg::svd(&g);
    let cutoff = cfg.rank * (g.nrows() + g.ncols()).max(1) as f64;
    let coords = dec.v.adjoint() * &lin;
    let mut gain = 0.0;
    // part of b that V does not see (only possible for a wide G)
    let mut stray = (&lin - &dec.v * &coords).norm();
    for (i, c) in coords.iter().enumerate() {
        let s = dec.s.get(i).copied().unwrap_or(0.0);
        if s > cutoff {
            gain += c.modulus_squared() / (s * s);
        } else {
            stray = stray.max(c.modulus());
        }
    }
    if stray > cfg.num * lin.norm().max(1.0) {
        return Err(RelError::Unbounded(format!(
            "linear term outside the range of the quadratic form (component {stray:e}, graph dim {})",
            t.graph_dim()
        )));
    }
    Ok(phi.norm_squared() - gain)
}

/// `‖Pφ′‖² = ‖φ′‖² + inf_h {‖φ + h‖² − inf_{(g, g′)} (‖g′‖² + ‖g + h‖²)}`.
pub fn singular_energy_variational<T: Scalar>(
    t: &LinearRelation<T>,
    phi: &DVector<T>,
    phi_p: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<Energy> {
    let direct = singular_energy_direct(t, phi, phi_p, cfg)?;
    let variational = phi_p.norm_squared() + outer_minimum(&t.closure(cfg), phi, cfg)?;
    Ok(Energy {
        variational,
        direct,
    })
}

/// `‖(I − P)φ′‖² = sup_h inf_{(g, g′)} {‖g + h‖² − ‖φ + h‖² + ‖g′‖²}`.
pub fn regular_energy_variational<T: Scalar>(
    t: &LinearRelation<T>,
    phi: &DVector<T>,
    phi_p: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<Energy> {
    let singular = singular_energy_direct(t, phi, phi_p, cfg)?;
    let variational = -outer_minimum(&t.closure(cfg), phi, cfg)?;
    Ok(Energy {
        variational,
        direct: phi_p.norm_squared() - singular,
    })
}

/// Minimum of `‖g + h‖² + ‖Ag‖²` over `g`, in closed form and by an
/// independent least-squares solve.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticMinimum<T: Scalar = f64> {
    pub value: f64,
    pub argmin: DVector<T>,
    pub lsq_value: f64,
    pub lsq_argmin: DVector<T>,
}

impl<T: Scalar> QuadraticMinimum<T> {
    pub fn value_error(&self) -> f64 {
        relative_error(self.value, self.lsq_value)
    }

    pub fn argmin_error(&self) -> f64 {
        (&self.argmin - &self.lsq_argmin).norm()
            / self.argmin.norm().max(self.lsq_argmin.norm()).max(1.0)
    }
}

/// `min_g (‖g + h‖² + ‖Tg‖²) = ‖h‖² − ‖(I + T*T)^{-1/2} h‖²`, attained at
/// `g = −(I + T*T)⁻¹ h`, for an everywhere defined operator `T`.
pub fn min_quadratic<T: Scalar>(
    t: &LinearRelation<T>,
    h: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<QuadraticMinimum<T>> {
    let m = t.dim_h();
    ensure_dims("h length", h.len(), m)?;
    let dom = t.dom(cfg).dim();
    if dom != m {
        return Err(RelError::NotEverywhereDefined { dom, expected: m });
    }
    let a = t.operator_matrix(cfg)?;
    let gram = DMatrix::identity(m, m) + a.adjoint() * &a;
    let chol =
        Cholesky::new(gram).ok_or_else(|| degenerate("I + T*T factorization", f64::NAN, 0.0))?;
    let resolved = chol.solve(h);
    let argmin = -&resolved;
    let value = h.norm_squared() - h.dotc(&resolved).real();

    let stacked = vstack(&DMatrix::identity(m, m), &a);
    let rhs = -stack_vectors(h, &DVector::zeros(t.dim_k()));
    let lsq_argmin = pinv(&stacked, cfg.rank) * rhs;
    let lsq_value = (&lsq_argmin + h).norm_squared() + (&a * &lsq_argmin).norm_squared();
    let out = QuadraticMinimum {
        value,
        argmin,
        lsq_value,
        lsq_argmin,
    };
    let err = out.value_error().max(out.argmin_error());
    if err > cfg.num {
        return Err(degenerate(
            "closed form against least squares",
            err,
            cfg.num,
        ));
    }
    Ok(out)
}

/// Orthonormal basis of `dom T` followed by seeded random domain vectors.
pub fn domain_probes<T: Scalar>(
    t: &LinearRelation<T>,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Vec<DVector<T>> {
    let dom = t.dom(cfg);
    let mut probes = dom.basis_vectors();
    if dom.dim() == 0 {
        return probes;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PROBES {
        let y: DVector<T> = random_vector(dom.dim(), &mut rng);
        probes.push(dom.basis() * y);
    }
    probes
}

fn require_operator<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> Result<()> {
    let mul = t.mul(cfg);
    if mul.is_trivial() {
        Ok(())
    } else {
        Err(RelError::NotSingleValued(mul.dim()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosabilityReport {
    pub probes: usize,
    /// `max |‖Tφ‖² − sup_h inf_g {…}|` over the probes.
    pub max_defect: f64,
    /// The supremum over `h` was attained at a finite point for every probe.
    pub attained: bool,
    pub passed: bool,
}

/// Compares `‖Tφ‖²` with the sup-inf expression on every probe.
pub fn closability_check<T: Scalar>(
    t: &LinearRelation<T>,
    probes: Option<&[DVector<T>]>,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<ClosabilityReport> {
    require_operator(t, cfg)?;
    let owned;
    let probes = match probes {
        Some(p) => p,
        None => {
            owned = domain_probes(t, seed, cfg);
            &owned
        }
    };
    let mut max_defect: f64 = 0.0;
    let mut attained = true;
    for phi in probes {
        let image = t
            .representative(phi, cfg)?
            .ok_or_else(|| RelError::Precondition("probe outside dom T".into()))?;
        match regular_energy_variational(t, phi, &image, cfg) {
            Ok(e) => max_defect = max_defect.max((image.norm_squared() - e.variational).abs()),
            Err(RelError::Unbounded(_)) => attained = false,
            Err(e) => return Err(e),
        }
    }
    Ok(ClosabilityReport {
        probes: probes.len(),
        max_defect,
        attained,
        passed: attained && max_defect < cfg.var,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationProbe {
    /// `‖Tφ‖²`.
    pub lower: f64,
    /// `sup_h inf_g {‖g + h‖² − ‖φ + h‖² + ‖Sg‖²}`.
    pub middle: f64,
    /// `‖Sφ‖²`.
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// Shared domain and `‖Tφ‖ ≤ ‖Sφ‖` on the whole domain.
    pub applicable: bool,
    pub probes: Vec<DominationProbe>,
    pub holds: bool,
}

/// Sandwich `‖Tφ‖² ≤ sup_h inf_g {…S…} ≤ ‖Sφ‖²` for operators with a
/// common domain, where `S` dominates `T`.
pub fn domination_check<T: Scalar>(
    t: &LinearRelation<T>,
    s: &LinearRelation<T>,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<DominationReport> {
    require_operator(t, cfg)?;
    require_operator(s, cfg)?;
    ensure_dims("dim H", s.dim_h(), t.dim_h())?;
    let not_applicable = DominationReport {
        applicable: false,
        probes: Vec::new(),
        holds: false,
    };
    let dom = t.dom(cfg);
    if dom.distance(&s.dom(cfg))? >= cfg.eq {
        return Ok(not_applicable);
    }
    let (a_t, a_s) = (t.operator_matrix(cfg)?, s.operator_matrix(cfg)?);
    let d = dom.basis();
    // Dᴴ(SᴴS − TᴴT)D must be positive semidefinite
    let (ts, ss) = (&a_t * d, &a_s * d);
    let gap = crate::linalg::hermitian_part(&(ss.adjoint() * &ss - ts.adjoint() * &ts));
    let min_eig = if gap.nrows() == 0 {
        0.0
    } else {
        let shift = spectral_norm(&gap);
        // smallest eigenvalue of a Hermitian matrix via the spectral norm of a shift
        shift - spectral_norm(&(DMatrix::identity(gap.nrows(), gap.nrows()).scale(shift) - &gap))
    };
    if min_eig < -cfg.num * spectral_norm(&ss).powi(2).max(1.0) {
        return Ok(not_applicable);
    }
    let mut probes = Vec::new();
    let mut holds = true;
    for phi in domain_probes(t, seed, cfg) {
        let (tphi, sphi) = (&a_t * &phi, &a_s * &phi);
        let middle = regular_energy_variational(s, &phi, &sphi, cfg)?.variational;
        let probe = DominationProbe {
            lower: tphi.norm_squared(),
            middle,
            upper: sphi.norm_squared(),
        };
        holds &= probe.lower <= probe.middle + cfg.var && probe.middle <= probe.upper + cfg.var;
        probes.push(probe);
    }
    Ok(DominationReport {
        applicable: true,
        probes,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointConstant {
    pub in_domain: bool,
    /// `‖(T*)_s g‖`.
    pub c_g: Option<f64>,
    /// `sup |(f′, g)| / ‖f‖` over the graph.
    pub rayleigh: Option<f64>,
}

impl AdjointConstant {
    pub fn relative_gap(&self) -> f64 {
        match (self.c_g, self.rayleigh) {
            (Some(a), Some(b)) => relative_error(a, b),
            _ => 0.0,
        }
    }
}

/// Smallest `C_g` with `|(f′, g)| ≤ C_g ‖f‖` on `T`, computed from the
/// operator part of `T*` and as a generalized Rayleigh quotient.
pub fn optimal_adjoint_constant<T: Scalar>(
    t: &LinearRelation<T>,
    g: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<AdjointConstant> {
    ensure_dims("g length", g.len(), t.dim_k())?;
    let mul = t.mul(cfg);
    let leak = (mul.projector() * g).norm();
    if leak > cfg.num * g.norm().max(1.0) {
        return Ok(AdjointConstant {
            in_domain: false,
            c_g: None,
            rayleigh: None,
        });
    }
    let t_s = operator_part_closed(&t.adjoint(cfg), cfg)?.t_s;
    let c_g = (t_s.operator_matrix(cfg)? * g).norm();

    let (b_h, b_k) = (t.h_block(), t.k_block());
    let v = Subspace::range_of(&b_h.adjoint(), cfg);
    let rayleigh = if v.dim() == 0 {
        0.0
    } else {
        let v = v.basis();
        let denom = crate::linalg::hermitian_part(&(v.adjoint() * b_h.adjoint() * &b_h * v));
        let w = v.adjoint() * b_k.adjoint() * g;
        let chol = Cholesky::new(denom)
            .ok_or_else(|| degenerate("graph Gram factorization", f64::NAN, 0.0))?;
        // whitened numerator L⁻¹ w wᴴ L⁻ᴴ has the same spectrum as the pencil
        let lw = chol
            .l()
            .solve_lower_triangular(&w)
            .expect("Cholesky factor is invertible");
        let numer = &lw * lw.adjoint();
        spectral_norm(&numer).sqrt()
    };
    Ok(AdjointConstant {
        in_domain: true,
        c_g: Some(c_g),
        rayleigh: Some(rayleigh),
    })
}
