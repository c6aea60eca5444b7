//! Worked examples of canonical decompositions, each carrying the values it
//! is expected to produce.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::decomposition::{classify, regular_part, singular_part, Classification};
use crate::error::{RelError, Result};
use crate::fixtures;
use crate::relation::LinearRelation;
use crate::report::sci;
use crate::scalar::unit;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

/// One comparison between an expected and a computed quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn residual(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            expected: format!("< {threshold:e}"),
            computed: sci(residual),
            residual: Some(residual),
            threshold: Some(threshold),
            passed: residual < threshold,
        }
    }

    fn exact<V: PartialEq + std::fmt::Debug>(name: &str, expected: V, computed: V) -> Self {
        Self {
            name: name.into(),
            expected: format!("{expected:?}"),
            computed: format!("{computed:?}"),
            residual: None,
            threshold: None,
            passed: expected == computed,
        }
    }
}

/// Facts an entry promises about its relation; absent fields are not checked.
#[derive(Clone, Debug, Default)]
pub struct Expected {
    pub classification: Option<Classification>,
    pub regular: Option<bool>,
    pub singular: Option<bool>,
    pub maximally_singular: Option<bool>,
    /// `[dom, ran, ker, mul]`.
    pub part_dims: Option<[usize; 4]>,
    pub mul: Option<Subspace>,
    pub dom: Option<Subspace>,
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: String,
    pub relation: LinearRelation,
    pub expected: Expected,
    pub notes: String,
    /// Formula checks evaluated when the entry was built.
    pub formula_checks: Vec<Check>,
}

impl GalleryEntry {
    fn new(name: &str, relation: LinearRelation, expected: Expected, notes: &str) -> Self {
        Self {
            name: name.into(),
            relation,
            expected,
            notes: notes.into(),
            formula_checks: Vec::new(),
        }
    }

    /// Formula checks followed by comparisons against a fresh analysis.
    pub fn verify(&self, cfg: &ToleranceConfig) -> Result<Vec<Check>> {
        let t = &self.relation;
        let mut checks = self.formula_checks.clone();
        let class = classify(t, cfg)?;
        let e = &self.expected;
        if let Some(c) = e.classification {
            checks.push(Check::exact("classification", c, class.classification));
        }
        if let Some(b) = e.regular {
            checks.push(Check::exact("regular", b, class.flags.is_regular));
        }
        if let Some(b) = e.singular {
            checks.push(Check::exact("singular", b, class.flags.is_singular));
        }
        if let Some(b) = e.maximally_singular {
            checks.push(Check::exact(
                "maximally_singular",
                b,
                class.flags.is_maximally_singular,
            ));
        }
        let parts = t.parts(cfg);
        if let Some(d) = e.part_dims {
            checks.push(Check::exact("[dom, ran, ker, mul] dims", d, parts.dims()));
        }
        if let Some(m) = &e.mul {
            checks.push(Check::residual("mul T", parts.mul.distance(m)?, cfg.eq));
        }
        if let Some(d) = &e.dom {
            checks.push(Check::residual("dom T", parts.dom.distance(d)?, cfg.eq));
        }
        Ok(checks)
    }

    pub fn passed(&self, cfg: &ToleranceConfig) -> Result<bool> {
        Ok(self.verify(cfg)?.iter().all(|c| c.passed))
    }
}

fn e(n: usize, i: usize) -> DVector<f64> {
    unit(n, i)
}

fn line(v: &DVector<f64>, cfg: &ToleranceConfig) -> Result<Subspace> {
    Subspace::span(v.len(), std::slice::from_ref(v), cfg)
}

/// Span of computed pairs, with rank judged on the unit scale so that images
/// that are pure rounding noise drop out.
fn computed_graph(
    m: usize,
    n: usize,
    pairs: &[(DVector<f64>, DVector<f64>)],
    cfg: &ToleranceConfig,
) -> Result<LinearRelation> {
    let cols: Vec<_> = pairs
        .iter()
        .map(|(f, fp)| crate::linalg::stack_vectors(f, fp))
        .collect();
    let gens = if cols.is_empty() {
        DMatrix::zeros(m + n, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    LinearRelation::from_graph(m, n, Subspace::range_of(&gens, cfg))
}

/// Graph of `f ↦ map(f, f′)` over the generators of `t`.
fn mapped(
    t: &LinearRelation,
    map: impl Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
    cfg: &ToleranceConfig,
) -> Result<LinearRelation> {
    let (hb, kb) = (t.h_block(), t.k_block());
    let pairs: Vec<_> = (0..t.graph_dim())
        .map(|j| {
            let f = hb.column(j).into_owned();
            let fp = kb.column(j).into_owned();
            let image = map(&f, &fp);
            (f, image)
        })
        .collect();
    computed_graph(t.dim_h(), t.dim_k(), &pairs, cfg)
}

/// Unit generator of a one-dimensional `mul T̄`.
fn mul_generator(t: &LinearRelation, cfg: &ToleranceConfig) -> Result<DVector<f64>> {
    let mul = t.closure(cfg).mul(cfg);
    if mul.dim() != 1 {
        return Err(RelError::Precondition(format!(
            "multivalued part must be one-dimensional, found dimension {}",
            mul.dim()
        )));
    }
    Ok(mul.basis().column(0).into_owned())
}

/// `A = S ∔ span{(e, f)}` for an operator `S` with `(e, f) ∉ S`.
pub fn one_dim_extension(
    s: &LinearRelation,
    e_vec: &DVector<f64>,
    f_vec: &DVector<f64>,
    cfg: &ToleranceConfig,
) -> Result<GalleryEntry> {
    if !s.is_single_valued(cfg) {
        return Err(RelError::Precondition("S must be an operator".into()));
    }
    let gap = s.pair_distance(e_vec, f_vec)?;
    if gap < cfg.eq * (e_vec.norm() + f_vec.norm()).max(1.0) {
        return Err(RelError::Precondition(
            "the sum is not direct: (e, f) already lies in S".into(),
        ));
    }
    let z = LinearRelation::from_generators(
        s.dim_h(),
        s.dim_k(),
        &[(e_vec.clone(), f_vec.clone())],
        cfg,
    )?;
    let a = s.componentwise_sum(&z, cfg)?;
    let expected = match s.representative(e_vec, cfg)? {
        Some(se) => Expected {
            regular: Some(false),
            mul: Some(line(&(se - f_vec), cfg)?),
            ..Default::default()
        },
        None => Expected {
            regular: Some(true),
            mul: Some(Subspace::zero(s.dim_k())),
            ..Default::default()
        },
    };
    Ok(GalleryEntry::new(
        "one_dim_extension",
        a,
        expected,
        "One-dimensional extension of an operator graph. Every operator is closable here, so A fails \
         to be regular exactly when e ∈ dom S with Se ≠ f, and then mul A = span{Se − f}.",
    ))
}

/// Parts of a relation whose multivalued part is `span{φ}`:
/// `A_reg h = Ah − (Ah, φ)φ`, `A_sing h = (Ah, φ)φ`.
pub fn rank_one_singular(a: &LinearRelation, cfg: &ToleranceConfig) -> Result<GalleryEntry> {
    let phi = mul_generator(a, cfg)?;
    let reg_formula = mapped(a, |_, fp| fp - &phi * phi.dot(fp), cfg)?;
    let sing_formula = mapped(a, |_, fp| &phi * phi.dot(fp), cfg)?;
    let sing_closure = LinearRelation::cartesian(&a.dom(cfg), &line(&phi, cfg)?);
    let mut entry = GalleryEntry::new(
        "rank_one_singular",
        a.clone(),
        Expected {
            mul: Some(line(&phi, cfg)?),
            ..Default::default()
        },
        "Relation with one-dimensional multivalued part span{φ}; the parts follow from projecting the \
         images onto φ.",
    );
    entry.formula_checks = vec![
        Check::residual(
            "A_reg h = Ah − (Ah, φ)φ",
            regular_part(a, cfg).distance(&reg_formula)?,
            cfg.eq,
        ),
        Check::residual(
            "A_sing h = (Ah, φ)φ",
            singular_part(a, cfg).distance(&sing_formula)?,
            cfg.eq,
        ),
        Check::residual(
            "closure of A_sing = dom A × span{φ}",
            singular_part(a, cfg).closure(cfg).distance(&sing_closure)?,
            cfg.eq,
        ),
    ];
    Ok(entry)
}

/// `T = A + B` for a relation `A` with `mul Ā = span{φ}` and an everywhere
/// defined `B`.
pub fn bounded_perturbation(
    a: &LinearRelation,
    b: &DMatrix<f64>,
    cfg: &ToleranceConfig,
) -> Result<GalleryEntry> {
    if b.shape() != (a.dim_k(), a.dim_h()) {
        return Err(RelError::DimensionMismatch(format!(
            "B must be {}×{}, got {}×{}",
            a.dim_k(),
            a.dim_h(),
            b.nrows(),
            b.ncols()
        )));
    }
    let phi = mul_generator(a, cfg)?;
    let b_graph = LinearRelation::from_operator(b, None, &[], cfg)?;
    let t = a.operator_sum(&b_graph, cfg)?;
    let p = &phi * phi.transpose();
    let co = DMatrix::identity(a.dim_k(), a.dim_k()) - &p;
    let reg_formula = mapped(a, |f, fp| &co * (fp + b * f), cfg)?;
    let sing_formula = mapped(a, |f, fp| &p * fp + &phi * phi.dot(&(b * f)), cfg)?;
    let dom_a = a.dom(cfg);
    let sing_closure = LinearRelation::cartesian(&dom_a, &line(&phi, cfg)?);
    // singular exactly when A is singular and B maps dom A into span{φ}
    let a_singular = classify(a, cfg)?.flags.is_singular;
    let b_leak = (&co * b * dom_a.basis()).norm();
    let mut entry = GalleryEntry::new(
        "bounded_perturbation",
        t.clone(),
        Expected {
            mul: Some(line(&phi, cfg)?),
            singular: Some(a_singular && b_leak < cfg.eq),
            ..Default::default()
        },
        "Operator-like sum of a relation with one-dimensional multivalued part and an everywhere \
         defined matrix; the perturbation keeps mul T̄ = span{φ}.",
    );
    entry.formula_checks = vec![
        Check::residual(
            "T_reg h = [A_reg + (I − P)B]h",
            regular_part(&t, cfg).distance(&reg_formula)?,
            cfg.eq,
        ),
        Check::residual(
            "T_sing h = A_sing h + (Bh, φ)φ",
            singular_part(&t, cfg).distance(&sing_formula)?,
            cfg.eq,
        ),
        Check::residual(
            "closure of T_sing = dom A × span{φ}",
            singular_part(&t, cfg)
                .closure(cfg)
                .distance(&sing_closure)?,
            cfg.eq,
        ),
    ];
    Ok(entry)
}

/// `T = {(f, Af + φ) : f ∈ dom, φ ∈ R}`.
pub fn operator_plus_subspace(
    a: &DMatrix<f64>,
    dom: &Subspace,
    r: &Subspace,
    cfg: &ToleranceConfig,
) -> Result<GalleryEntry> {
    let (n, m) = a.shape();
    if dom.ambient_dim() != m || r.ambient_dim() != n {
        return Err(RelError::DimensionMismatch(format!(
            "A is {n}×{m}, domain lives in F^{}, R in F^{}",
            dom.ambient_dim(),
            r.ambient_dim()
        )));
    }
    let t = LinearRelation::from_operator(a, Some(dom), &r.basis_vectors(), cfg)?;
    let p = r.projector();
    let co = DMatrix::identity(n, n) - p;
    let d = dom.basis();
    let reg_formula = computed_graph(
        m,
        n,
        &d.column_iter()
            .map(|f| (f.into_owned(), &co * a * f))
            .collect::<Vec<_>>(),
        cfg,
    )?;
    let operator_graph = LinearRelation::from_operator(a, Some(dom), &[], cfg)?;
    let multivalued = LinearRelation::cartesian(&Subspace::zero(m), r);
    let summ = operator_graph
        .closure(cfg)
        .componentwise_sum(&multivalued, cfg)?
        .closure(cfg);
    let leaks = (&co * a * d).norm() >= cfg.eq;
    let classification = if r.is_full() {
        Classification::MaximallySingular
    } else if r.is_trivial() || !leaks {
        // no multivalued part, or A maps the domain into R
        if r.is_trivial() {
            Classification::Regular
        } else {
            Classification::Singular
        }
    } else {
        Classification::Mixed
    };
    let mut entry = GalleryEntry::new(
        "operator_plus_subspace",
        t.clone(),
        Expected {
            classification: Some(classification),
            mul: Some(r.clone()),
            dom: Some(dom.clone()),
            ..Default::default()
        },
        "Bounded operator plus a subspace of multivalued directions; mul T̄ = R and the closure of the \
         singular part is dom A × R.",
    );
    entry.formula_checks = vec![
        Check::residual(
            "T_reg = {(f, (I − P)Af)}",
            regular_part(&t, cfg).distance(&reg_formula)?,
            cfg.eq,
        ),
        Check::residual(
            "closure of T_sing = dom A × R",
            singular_part(&t, cfg)
                .closure(cfg)
                .distance(&LinearRelation::cartesian(dom, r))?,
            cfg.eq,
        ),
        Check::residual(
            "closure of A ∔ ({0} × R) = closure of T",
            summ.distance(&t.closure(cfg))?,
            cfg.eq,
        ),
    ];
    Ok(entry)
}

/// `T = K*U` for an injective `K` whose range is orthogonal to `dom U*`.
/// `U` maps `H → 𝔎` and `K` is a `dim 𝔎 × q` matrix.
pub fn max_singular_product(
    u: &LinearRelation,
    k: &DMatrix<f64>,
    cfg: &ToleranceConfig,
) -> Result<GalleryEntry> {
    if k.nrows() != u.dim_k() || k.ncols() == 0 {
        return Err(RelError::DimensionMismatch(format!(
            "K must have {} rows and at least one column, got {}×{}",
            u.dim_k(),
            k.nrows(),
            k.ncols()
        )));
    }
    let profile = Subspace::rank_profile(k, cfg);
    if profile.rank < k.ncols() {
        return Err(RelError::Precondition(format!(
            "K is not injective (rank {} < {})",
            profile.rank,
            k.ncols()
        )));
    }
    let dom_u_adj = u.adjoint(cfg).dom(cfg);
    let overlap = (dom_u_adj.projector() * k).norm() / k.norm();
    if overlap >= cfg.eq {
        return Err(RelError::Precondition(format!(
            "ran K is not orthogonal to dom U* (overlap {overlap:.3e})"
        )));
    }
    let k_adj = LinearRelation::from_operator(&k.adjoint(), None, &[], cfg)?;
    let t = LinearRelation::compose(&k_adj, u, cfg)?;
    let mut entry = GalleryEntry::new(
        "max_singular_product",
        t.clone(),
        Expected {
            classification: Some(Classification::MaximallySingular),
            ..Default::default()
        },
        "Product K*U with K injective and ran K ⊥ dom U*; the adjoint U*K has trivial domain.",
    );
    entry.formula_checks = vec![Check::exact("dim dom T*", 0, t.adjoint(cfg).dom(cfg).dim())];
    Ok(entry)
}

fn fixture_entry(
    name: &str,
    t: LinearRelation,
    class: Classification,
    dims: [usize; 4],
    notes: &str,
) -> GalleryEntry {
    GalleryEntry::new(
        name,
        t,
        Expected {
            classification: Some(class),
            part_dims: Some(dims),
            ..Default::default()
        },
        notes,
    )
}

/// Names accepted by [`entry`].
pub const NAMES: &[&str] = &[
    "one_dim_extension",
    "regular_extension",
    "rank_one_singular",
    "bounded_perturbation",
    "singular_perturbation",
    "operator_plus_subspace",
    "cartesian_product",
    "max_singular_product",
    "identity_1d",
    "diag_operator",
    "mixed",
    "pure_multivalued",
    "zero",
];

/// Builds a named entry with its default parameters.
pub fn entry(name: &str, cfg: &ToleranceConfig) -> Result<GalleryEntry> {
    let diag = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_column_slice(v));
    let span_e1 = Subspace::coordinate(2, 0..1);
    let span_e2 = Subspace::coordinate(2, 1..2);
    let s_on_e1 = || LinearRelation::from_operator(&diag(&[1.0, 2.0]), Some(&span_e1), &[], cfg);
    let mut out = match name {
        "one_dim_extension" => one_dim_extension(&s_on_e1()?, &e(2, 0), &(e(2, 0) * 2.0), cfg)?,
        "regular_extension" => one_dim_extension(&s_on_e1()?, &e(2, 1), &(e(2, 0) + e(2, 1)), cfg)?,
        "rank_one_singular" => rank_one_singular(&fixtures::fix_mix(), cfg)?,
        "bounded_perturbation" => {
            let b = &e(2, 1) * e(2, 0).transpose();
            bounded_perturbation(&fixtures::fix_mix(), &b, cfg)?
        }
        "singular_perturbation" => {
            // a singular A perturbed inside span{φ} stays singular
            let b = &e(2, 1) * (e(2, 0) + e(2, 1)).transpose();
            bounded_perturbation(&fixtures::fix_sing(), &b, cfg)?
        }
        "operator_plus_subspace" => {
            let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
            operator_plus_subspace(&a, &Subspace::full(2), &span_e2, cfg)?
        }
        "cartesian_product" => {
            operator_plus_subspace(&DMatrix::zeros(2, 2), &span_e1, &span_e2, cfg)?
        }
        "max_singular_product" => {
            let k = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
            max_singular_product(&fixtures::fix_sing(), &k, cfg)?
        }
        "identity_1d" => fixture_entry(
            "identity_1d",
            fixtures::fix_id1(),
            Classification::Regular,
            [1, 1, 0, 0],
            "Graph of the identity on a line.",
        ),
        "diag_operator" => fixture_entry(
            "diag_operator",
            fixtures::fix_diag(),
            Classification::Regular,
            [2, 2, 0, 0],
            "Graph of diag(1, 2).",
        ),
        "mixed" => fixture_entry(
            "mixed",
            fixtures::fix_mix(),
            Classification::Mixed,
            [1, 2, 0, 1],
            "Operator part e1 ↦ e1 with multivalued part span{e2}.",
        ),
        "pure_multivalued" => fixture_entry(
            "pure_multivalued",
            fixtures::fix_mul(),
            Classification::MaximallySingular,
            [0, 2, 0, 2],
            "The relation {0} × F².",
        ),
        "zero" => fixture_entry(
            "zero",
            fixtures::fix_zero(),
            Classification::Regular,
            [0, 0, 0, 0],
            "The relation {(0, 0)}; regular and singular at once, labelled regular.",
        ),
        other => {
            return Err(RelError::Precondition(format!(
                "unknown gallery entry '{other}'; available: {}",
                NAMES.join(", ")
            )))
        }
    };
    out.name = name.to_string();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn assert_passes(entry: &GalleryEntry) {
        for c in entry.verify(&cfg()).unwrap() {
            assert!(c.passed, "{}: {c:?}", entry.name);
        }
    }

    #[test]
    fn every_named_entry_passes() {
        for name in NAMES {
            let entry = entry(name, &cfg()).unwrap();
            assert_eq!(&entry.name, name);
            assert_passes(&entry);
        }
        assert!(matches!(
            entry("nosuch", &cfg()),
            Err(RelError::Precondition(_))
        ));
    }

    #[test]
    fn one_dim_extension_examples() {
        let s = LinearRelation::from_operator(
            &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
            Some(&Subspace::coordinate(2, 0..1)),
            &[],
            &cfg(),
        )
        .unwrap();
        let a = one_dim_extension(&s, &e(2, 0), &(e(2, 0) * 2.0), &cfg()).unwrap();
        let mul = a.relation.mul(&cfg());
        assert!(mul.distance(&Subspace::coordinate(2, 0..1)).unwrap() < 1e-10);
        assert_eq!(a.expected.regular, Some(false));
        assert_passes(&a);

        let a =
            one_dim_extension(&s, &e(2, 1), &DVector::from_vec(vec![3.0, -1.0]), &cfg()).unwrap();
        assert!(a.relation.is_single_valued(&cfg()));
        assert_eq!(a.expected.regular, Some(true));
        assert_passes(&a);

        let full = crate::fixtures::fix_diag();
        let err = one_dim_extension(&full, &e(2, 0), &e(2, 0), &cfg()).unwrap_err();
        assert!(matches!(err, RelError::Precondition(_)));
    }

    #[test]
    fn rank_one_singular_examples() {
        let a = rank_one_singular(&crate::fixtures::fix_mix(), &cfg()).unwrap();
        assert_passes(&a);
        let reg = regular_part(&a.relation, &cfg());
        assert!(reg.pair_distance(&e(2, 0), &e(2, 0)).unwrap() < 1e-10);
        let sing = singular_part(&a.relation, &cfg());
        assert!(sing.distance(&crate::fixtures::fix_sing()).unwrap() < 1e-10);

        // generator (e1, e2) plus mul span{e2}
        let b = LinearRelation::from_generators(
            2,
            2,
            &[(e(2, 0), e(2, 1)), (DVector::zeros(2), e(2, 1))],
            &cfg(),
        )
        .unwrap();
        let entry = rank_one_singular(&b, &cfg()).unwrap();
        assert_passes(&entry);
        let reg = regular_part(&b, &cfg());
        assert!(reg.pair_distance(&e(2, 0), &DVector::zeros(2)).unwrap() < 1e-10);
        let sing = singular_part(&b, &cfg());
        assert!(sing.pair_distance(&e(2, 0), &e(2, 1)).unwrap() < 1e-10);

        // the same relation described with −φ
        let c = LinearRelation::from_generators(
            2,
            2,
            &[(e(2, 0), e(2, 1)), (DVector::zeros(2), -e(2, 1))],
            &cfg(),
        )
        .unwrap();
        assert!(regular_part(&c, &cfg()).distance(&reg).unwrap() < 1e-12);
        assert!(singular_part(&c, &cfg()).distance(&sing).unwrap() < 1e-12);

        let err = rank_one_singular(&crate::fixtures::fix_diag(), &cfg()).unwrap_err();
        assert!(matches!(err, RelError::Precondition(_)));
    }

    #[test]
    fn bounded_perturbation_examples() {
        let zero = bounded_perturbation(&crate::fixtures::fix_mix(), &DMatrix::zeros(2, 2), &cfg())
            .unwrap();
        assert_passes(&zero);
        assert!(zero.relation.distance(&crate::fixtures::fix_mix()).unwrap() < 1e-10);

        let b = &e(2, 1) * e(2, 0).transpose();
        let t = bounded_perturbation(&crate::fixtures::fix_mix(), &b, &cfg()).unwrap();
        assert_passes(&t);
        let sing = singular_part(&t.relation, &cfg());
        assert!(sing.pair_distance(&e(2, 0), &e(2, 1)).unwrap() < 1e-10);

        let t = entry("singular_perturbation", &cfg()).unwrap();
        assert_eq!(t.expected.singular, Some(true));
        assert!(classify(&t.relation, &cfg()).unwrap().flags.is_singular);

        // a perturbation leaving span{φ} destroys singularity
        let b = &e(2, 0) * e(2, 0).transpose();
        let t = bounded_perturbation(&crate::fixtures::fix_sing(), &b, &cfg()).unwrap();
        assert_eq!(t.expected.singular, Some(false));
        assert_passes(&t);

        let err = bounded_perturbation(&crate::fixtures::fix_mix(), &DMatrix::zeros(3, 2), &cfg())
            .unwrap_err();
        assert!(matches!(err, RelError::DimensionMismatch(_)));
    }

    #[test]
    fn operator_plus_subspace_examples() {
        let span_e1 = Subspace::coordinate(2, 0..1);
        let span_e2 = Subspace::coordinate(2, 1..2);
        let t = operator_plus_subspace(&DMatrix::zeros(2, 2), &span_e1, &span_e2, &cfg()).unwrap();
        assert!(t.relation.distance(&crate::fixtures::fix_sing()).unwrap() < 1e-12);
        assert_eq!(t.expected.classification, Some(Classification::Singular));
        assert_passes(&t);

        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let t = operator_plus_subspace(&a, &Subspace::full(2), &Subspace::full(2), &cfg()).unwrap();
        assert_eq!(
            t.expected.classification,
            Some(Classification::MaximallySingular)
        );
        assert_passes(&t);

        let t = operator_plus_subspace(
            &DMatrix::identity(2, 2),
            &Subspace::full(2),
            &Subspace::zero(2),
            &cfg(),
        )
        .unwrap();
        assert_eq!(t.expected.classification, Some(Classification::Regular));
        assert_passes(&t);
    }

    #[test]
    fn max_singular_product_examples() {
        let u = crate::fixtures::fix_sing();
        let k = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let t = max_singular_product(&u, &k, &cfg()).unwrap();
        assert_passes(&t);

        let not_injective = DMatrix::from_column_slice(2, 2, &[0.0, 1.0, 0.0, 2.0]);
        assert!(matches!(
            max_singular_product(&u, &not_injective, &cfg()),
            Err(RelError::Precondition(_))
        ));

        // dom U* = K leaves only K = 0, which is not injective
        let diag_op = crate::fixtures::fix_diag();
        let zero_k = DMatrix::zeros(2, 1);
        assert!(matches!(
            max_singular_product(&diag_op, &zero_k, &cfg()),
            Err(RelError::Precondition(_))
        ));
        assert!(matches!(
            max_singular_product(&diag_op, &k, &cfg()),
            Err(RelError::Precondition(_))
        ));
    }
}
