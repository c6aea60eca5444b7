//! Regular and singular parts, classification and the structural
//! identities tying them to the adjoint.
//!
//! With `P` the orthogonal projector onto `mul T̄`:
//! `T_reg = {(f, (I − P)f′)}` and `T_sing = {(f, P f′)}` for `(f, f′) ∈ T`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{RelError, Result};
use crate::relation::LinearRelation;
use crate::scalar::Scalar;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regular,
    Singular,
    MaximallySingular,
    Mixed,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Regular => "regular",
            Self::Singular => "singular",
            Self::MaximallySingular => "maximally_singular",
            Self::Mixed => "mixed",
        })
    }
}

/// The three properties are not exclusive: a zero operator is both regular
/// and singular. The label picks `regular` in that case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub is_regular: bool,
    pub is_singular: bool,
    pub is_maximally_singular: bool,
}

impl ClassFlags {
    pub fn label(&self) -> Classification {
        if self.is_regular {
            Classification::Regular
        } else if self.is_maximally_singular {
            Classification::MaximallySingular
        } else if self.is_singular {
            Classification::Singular
        } else {
            Classification::Mixed
        }
    }
}

/// Distances backing a classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWitness {
    pub dom_dim: usize,
    pub mul_dim: usize,
    /// `‖Proj(mul T̄)‖_F`, zero exactly for regular relations.
    pub mul_norm: f64,
    /// `ran T ⊂ mul T̄` as a containment defect.
    pub ran_in_mul: f64,
    /// `dom T* = ker T*`.
    pub adjoint_dom_ker: f64,
    /// `T* = dom T* × mul T*`.
    pub adjoint_product: f64,
    /// `T̄ = dom̄ T × mul T̄`.
    pub closure_product: f64,
    /// `mul T̄ = K`.
    pub mul_full: f64,
    /// Distances that were decided inside the low-confidence band.
    pub low_confidence: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classification: Classification,
    pub flags: ClassFlags,
    pub witness: ClassWitness,
}

/// `P`, the two parts and the classification of one relation.
#[derive(Clone, Debug)]
pub struct Decomposition<T: Scalar = f64> {
    pub p: DMatrix<T>,
    pub t_reg: LinearRelation<T>,
    pub t_sing: LinearRelation<T>,
    pub class: ClassReport,
    /// `dist(T_reg + T_sing, T)`.
    pub reconstruction: f64,
    /// Containment defect of `T` in `T_reg ⊕ ({0} × mul T̄)`.
    pub enclosure: f64,
    /// `‖B_regᴴ B_∞‖_F` for the two summands of the enclosure.
    pub enclosure_orthogonality: f64,
}

impl<T: Scalar> Decomposition<T> {
    pub fn classification(&self) -> Classification {
        self.class.classification
    }
}

/// Orthogonal operator part `T_s` and multivalued part `T_∞ = {0} × mul T`
/// of a closed relation.
#[derive(Clone, Debug)]
pub struct OperatorPart<T: Scalar = f64> {
    pub t_s: LinearRelation<T>,
    pub t_inf: LinearRelation<T>,
    /// `dist(T_reg, {(f, g) ∈ T : g ⊥ mul T})`.
    pub characterization: f64,
    /// `dist(T_s ∔ T_∞, T)`.
    pub reconstruction: f64,
    pub orthogonality: f64,
}

/// Both sides of the adjoint-domain identities for the two parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointPartReport {
    /// `dom (T_reg)* = dom T* ⊕ mul T̄`.
    pub dom_reg: f64,
    /// `ker (T_reg)* = ker T* ⊕ mul T̄`.
    pub ker_reg: f64,
    /// `dom (T_sing)* = ker (T_sing)* = dom̄ T*`, worst of the two.
    pub sing: f64,
    pub max: f64,
    pub passed: bool,
}

/// Orthogonal projector onto `mul T̄`.
pub fn mul_projector<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> DMatrix<T> {
    t.closure(cfg).mul(cfg).projector().clone()
}

pub fn regular_part<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> LinearRelation<T> {
    let p = mul_projector(t, cfg);
    let n = t.dim_k();
    let co = DMatrix::identity(n, n) - p;
    t.block_image(&DMatrix::identity(t.dim_h(), t.dim_h()), &co, cfg)
}

pub fn singular_part<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> LinearRelation<T> {
    let p = mul_projector(t, cfg);
    t.block_image(&DMatrix::identity(t.dim_h(), t.dim_h()), &p, cfg)
}

fn band(cfg: &ToleranceConfig, name: &str, d: f64, out: &mut Vec<String>) -> bool {
    if cfg.near_threshold(d) {
        out.push(name.to_string());
    }
    d < cfg.eq
}

/// Classifies `T`, evaluating all four equivalent forms of singularity.
pub fn classify<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> Result<ClassReport> {
    let closure = t.closure(cfg);
    let parts = closure.parts(cfg);
    let adj = t.adjoint(cfg);
    let adj_parts = adj.parts(cfg);
    let n = t.dim_k();

    let mut low = Vec::new();
    let mul_norm = parts.mul.projector().norm();
    let ran_in_mul = parts.mul.containment_defect(&t.ran(cfg))?;
    let adjoint_dom_ker = adj_parts.dom.distance(&adj_parts.ker)?;
    let adjoint_product =
        adj.distance(&LinearRelation::cartesian(&adj_parts.dom, &adj_parts.mul))?;
    let closure_product = closure.distance(&LinearRelation::cartesian(&parts.dom, &parts.mul))?;
    let mul_full = parts.mul.distance(&Subspace::full(n))?;

    let is_regular = parts.mul.is_trivial();
    let verdicts = [
        band(cfg, "ran_in_mul", ran_in_mul, &mut low),
        band(cfg, "adjoint_dom_ker", adjoint_dom_ker, &mut low),
        band(cfg, "adjoint_product", adjoint_product, &mut low),
        band(cfg, "closure_product", closure_product, &mut low),
    ];
    if verdicts.iter().any(|&v| v != verdicts[0]) {
        return Err(RelError::Inconsistent(format!(
            "singularity criteria disagree: ran⊂mul {ran_in_mul:e}, dom T*=ker T* {adjoint_dom_ker:e}, \
             T*=dom×mul {adjoint_product:e}, T̄=dom×mul {closure_product:e}"
        )));
    }
    let is_singular = verdicts[0];
    let is_maximally_singular = band(cfg, "mul_full", mul_full, &mut low);
    if is_maximally_singular && !is_singular {
        return Err(RelError::Inconsistent(
            "mul T̄ = K but T is not singular".into(),
        ));
    }
    if is_maximally_singular != adj_parts.dom.is_trivial() {
        return Err(RelError::Inconsistent(
            "mul T̄ = K disagrees with dom T* = {0}".into(),
        ));
    }
    let flags = ClassFlags {
        is_regular,
        is_singular,
        is_maximally_singular,
    };
    Ok(ClassReport {
        classification: flags.label(),
        flags,
        witness: ClassWitness {
            dom_dim: parts.dom.dim(),
            mul_dim: parts.mul.dim(),
            mul_norm,
            ran_in_mul,
            adjoint_dom_ker,
            adjoint_product,
            closure_product,
            mul_full,
            low_confidence: low,
        },
    })
}

/// `T = T_reg + T_sing` with the reconstruction and enclosure checks.
pub fn decompose<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<Decomposition<T>> {
    let mul = t.closure(cfg).mul(cfg);
    let p = mul.projector().clone();
    let (m, n) = (t.dim_h(), t.dim_k());
    let id_h = DMatrix::identity(m, m);
    let t_reg = t.block_image(&id_h, &(DMatrix::identity(n, n) - &p), cfg);
    let t_sing = t.block_image(&id_h, &p, cfg);

    let reconstruction = t_reg.operator_sum(&t_sing, cfg)?.distance(t)?;
    if reconstruction >= cfg.eq {
        return Err(RelError::Degenerate {
            what: "T_reg + T_sing = T".into(),
            distance: reconstruction,
            threshold: cfg.eq,
        });
    }
    let t_inf = LinearRelation::cartesian(&Subspace::zero(m), &mul);
    let enclosing = t_reg.componentwise_sum(&t_inf, cfg)?;
    let enclosure = enclosing.graph().containment_defect(t.graph())?;
    let enclosure_orthogonality = (t_reg.graph().basis().adjoint() * t_inf.graph().basis()).norm();
    if enclosure >= cfg.eq || enclosure_orthogonality >= cfg.eq {
        return Err(RelError::Degenerate {
            what: "orthogonal enclosure of T".into(),
            distance: enclosure.max(enclosure_orthogonality),
            threshold: cfg.eq,
        });
    }
    let class = classify(t, cfg)?;
    Ok(Decomposition {
        p,
        t_reg,
        t_sing,
        class,
        reconstruction,
        enclosure,
        enclosure_orthogonality,
    })
}

/// Splits a (closed) relation into its operator part and `{0} × mul T`.
pub fn operator_part_closed<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<OperatorPart<T>> {
    let (m, n) = (t.dim_h(), t.dim_k());
    let mul = t.mul(cfg);
    let t_s = regular_part(t, cfg);
    let t_inf = LinearRelation::cartesian(&Subspace::zero(m), &mul);
    let perp = LinearRelation::cartesian(&Subspace::full(m), &mul.complement_with(cfg));
    let characterization = t.intersection(&perp, cfg)?.distance(&t_s)?;
    let reconstruction = t_s.componentwise_sum(&t_inf, cfg)?.distance(t)?;
    let orthogonality = (t_s.graph().basis().adjoint() * t_inf.graph().basis()).norm();
    debug_assert_eq!(t_s.dim_k(), n);
    Ok(OperatorPart {
        t_s,
        t_inf,
        characterization,
        reconstruction,
        orthogonality,
    })
}

pub fn adjoint_part_identities<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<AdjointPartReport> {
    let mul = t.closure(cfg).mul(cfg);
    let adj = t.adjoint(cfg);
    let (adj_dom, adj_ker) = (adj.dom(cfg), adj.ker(cfg));
    let reg_adj = regular_part(t, cfg).adjoint(cfg);
    let sing_adj = singular_part(t, cfg).adjoint(cfg);

    let dom_reg = reg_adj.dom(cfg).distance(&adj_dom.sum(&mul, cfg)?)?;
    let ker_reg = reg_adj.ker(cfg).distance(&adj_ker.sum(&mul, cfg)?)?;
    let closed_dom = adj_dom.reorthonormalized(cfg);
    let sing = sing_adj
        .dom(cfg)
        .distance(&closed_dom)?
        .max(sing_adj.ker(cfg).distance(&closed_dom)?);
    let max = dom_reg.max(ker_reg).max(sing);
    Ok(AdjointPartReport {
        dom_reg,
        ker_reg,
        sing,
        max,
        passed: max < cfg.num,
    })
}
