//! Randomized verification harness.
//!
//! Each suite draws seeded random relations and evaluates a family of
//! identities on them. Cases run in parallel; results are collected in case
//! order so the summary depends only on the seed. A failing case is shrunk by
//! dropping generators and can be written out as a witness file.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{
    adjoint_part_identities, classify, decompose, regular_part, singular_part,
};
use crate::error::{RelError, Result};
use crate::gallery;
use crate::metric::{
    closability_check, domination_check, graph_maps, min_quadratic, optimal_adjoint_constant,
    regular_energy_variational, singular_energy_variational,
};
use crate::random::{case_seed, random_basis, random_case, Case, CaseKind, KINDS};
use crate::relation::LinearRelation;
use crate::relspec::RelationSpec;
use crate::report::{check_conditioning, check_rank, sci, stone_residual_list, Residual};
use crate::scalar::{random_matrix, random_vector, Field, Scalar};
use crate::stone::stone_classify;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

/// Relative tolerance for the closed-form quadratic minimum and the optimal
/// adjoint constant.
pub const RELATIVE_TOL: f64 = 1e-8;

/// Every fourth case is drawn over the complex field.
const COMPLEX_EVERY: usize = 4;

/// Upper bound on shrink attempts for one failing case.
const SHRINK_BUDGET: usize = 200;
/// Attempts at a well-conditioned draw before the last one is used anyway.
const MAX_REDRAWS: u32 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Subspace,
    Duality,
    Decomposition,
    Classify,
    Stone,
    Metric,
    ClosedForm,
    Closability,
    AdjointConstant,
    AdjointParts,
    Gallery,
}

pub const ALL_SUITES: [Suite; 11] = [
    Suite::Subspace,
    Suite::Duality,
    Suite::Decomposition,
    Suite::Classify,
    Suite::Stone,
    Suite::Metric,
    Suite::ClosedForm,
    Suite::Closability,
    Suite::AdjointConstant,
    Suite::AdjointParts,
    Suite::Gallery,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Subspace => "subspace",
            Suite::Duality => "duality",
            Suite::Decomposition => "decomposition",
            Suite::Classify => "classify",
            Suite::Stone => "stone",
            Suite::Metric => "metric",
            Suite::ClosedForm => "closed-form",
            Suite::Closability => "closability",
            Suite::AdjointConstant => "adjoint-constant",
            Suite::AdjointParts => "adjoint-parts",
            Suite::Gallery => "gallery",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(ALL_SUITES.to_vec());
        }
        name.parse().map(|s| vec![s])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = RelError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_SUITES
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ALL_SUITES.iter().map(|s| s.name()).collect();
                RelError::Input(format!(
                    "unknown suite '{s}'; available: all, {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub cases: usize,
    pub max_dim: usize,
    pub cfg: ToleranceConfig,
    pub suites: Vec<Suite>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub index: usize,
    pub kind: Option<CaseKind>,
    pub field: Field,
    pub residuals: Vec<Residual>,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.residuals.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .residuals
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{} = {:e} (threshold {:e})", r.name, r.value, r.threshold))
            .collect();
        if let Some(e) = &self.error {
            out.push(format!("error: {e}"));
        }
        out
    }
}

/// Largest value seen for one residual across a suite.
#[derive(Clone, Debug, Serialize)]
pub struct Worst {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub suite: Suite,
    pub seed: u64,
    pub case_index: usize,
    pub kind: Option<CaseKind>,
    pub failures: Vec<String>,
    /// Generators left after shrinking.
    pub spec: Option<RelationSpec>,
    pub original_generators: usize,
    pub tolerances: ToleranceConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// Draws replaced because a rank decision sat too close to its cutoff.
    pub redraws: usize,
    pub worst: Vec<Worst>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub cases: usize,
    pub max_dim: usize,
    pub tolerances: ToleranceConfig,
    pub suites: Vec<SuiteSummary>,
    pub passed: bool,
}

impl VerifySummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "verify seed {} cases {} max-dim {} (eq {:e}, num {:e}, var {:e})",
            self.seed,
            self.cases,
            self.max_dim,
            self.tolerances.eq,
            self.tolerances.num,
            self.tolerances.var
        );
        for suite in &self.suites {
            let _ = writeln!(
                s,
                "{:<17} {:>4}/{:<4} {}{}",
                suite.suite.name(),
                suite.passed,
                suite.cases,
                if suite.failed == 0 { "pass" } else { "FAIL" },
                match suite.redraws {
                    0 => String::new(),
                    n => format!(" ({n} ill-conditioned draws replaced)"),
                }
            );
            for w in &suite.worst {
                let _ = writeln!(
                    s,
                    "    max {:<40} {:<9}  (threshold {:.0e})",
                    w.name,
                    sci(w.value),
                    w.threshold
                );
            }
            if let Some(w) = &suite.witness {
                let _ = writeln!(s, "    first failure: case {} ({:?})", w.case_index, w.kind);
                for f in &w.failures {
                    let _ = writeln!(s, "      {f}");
                }
            }
        }
        let _ = writeln!(
            s,
            "{}",
            if self.passed {
                "all suites passed"
            } else {
                "verification FAILED"
            }
        );
        s
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &Witness> {
        self.suites.iter().filter_map(|s| s.witness.as_ref())
    }
}

/// Writes a witness as `witness-<suite>-seed<seed>-case<i>.json` in `dir`.
pub fn write_witness(dir: &Path, w: &Witness) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!(
        "witness-{}-seed{}-case{}.json",
        w.suite.name(),
        w.seed,
        w.case_index
    ));
    let text = serde_json::to_string_pretty(w).expect("witnesses always serialize");
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

fn flag(name: &str, ok: bool) -> Residual {
    Residual::new(name, if ok { 0.0 } else { 1.0 }, 0.5)
}

fn random_subspace<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
    cfg: &ToleranceConfig,
) -> Subspace<T> {
    let k = rng.gen_range(0..=d);
    Subspace::from_columns(&random_basis(d, k, rng), cfg).expect("basis has matching rows")
}

fn check_subspace<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let g = t.graph();
    let mut rng = case.aux_rng();
    let mut out = vec![
        Residual::new(
            "complement twice",
            g.complement_with(cfg).complement_with(cfg).distance(g)?,
            cfg.eq,
        ),
        Residual::new("graph orthonormality", g.orthonormality_defect(), cfg.orth),
        Residual::new("graph projector", g.projector_defect(), cfg.num),
    ];
    let again = Subspace::from_columns(g.basis(), cfg)?;
    out.push(Residual::new(
        "reorthonormalization",
        again.distance(g)?,
        cfg.eq,
    ));
    out.push(flag(
        "reorthonormalization keeps rank",
        again.dim() == g.dim(),
    ));

    let d = rng.gen_range(1..=10);
    let s1: Subspace<T> = random_subspace(d, &mut rng, cfg);
    let s2: Subspace<T> = random_subspace(d, &mut rng, cfg);
    let parts = t.parts(cfg);
    for (name, a, b) in [("random", &s1, &s2), ("ran/mul", &parts.ran, &parts.mul)] {
        let sum = a.sum(b, cfg)?;
        let cap = a.intersect(b, cfg)?;
        out.push(flag(
            &format!("dim sum + dim intersection ({name})"),
            sum.dim() + cap.dim() == a.dim() + b.dim(),
        ));
        let perp = sum.complement_with(cfg);
        let meet = a
            .complement_with(cfg)
            .intersect(&b.complement_with(cfg), cfg)?;
        out.push(Residual::new(
            &format!("(A + B)⊥ = A⊥ ∩ B⊥ ({name})"),
            perp.distance(&meet)?,
            cfg.eq,
        ));
    }
    // S1 ⊂ S3 gives commuting projectors
    let s3 = s1.sum(&s2, cfg)?;
    let product = s1.projector() * s3.projector();
    let cap = s1.intersect(&s3, cfg)?;
    out.push(Residual::new(
        "commuting projectors",
        (cap.projector() - product).norm(),
        cfg.eq,
    ));
    Ok(out)
}

fn check_duality<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let (m, n) = (t.dim_h(), t.dim_k());
    let adj = t.adjoint(cfg);
    let p = t.parts(cfg);
    let q = adj.parts(cfg);
    let perp = |s: &Subspace<T>| s.complement_with(cfg);
    let mut out = vec![
        Residual::new("(ran T)⊥ = ker T*", perp(&p.ran).distance(&q.ker)?, cfg.num),
        Residual::new("(dom T)⊥ = mul T*", perp(&p.dom).distance(&q.mul)?, cfg.num),
        Residual::new("(ran T*)⊥ = ker T", perp(&q.ran).distance(&p.ker)?, cfg.num),
        Residual::new("(dom T*)⊥ = mul T", perp(&q.dom).distance(&p.mul)?, cfg.num),
    ];
    let closure = t.closure(cfg);
    out.push(Residual::new(
        "dom closure = dom",
        closure.dom(cfg).distance(&p.dom)?,
        cfg.eq,
    ));
    out.push(Residual::new(
        "ran closure = ran",
        closure.ran(cfg).distance(&p.ran)?,
        cfg.eq,
    ));
    out.push(Residual::new(
        "inverse twice",
        t.inverse(cfg).inverse(cfg).distance(&t)?,
        cfg.eq,
    ));
    out.push(Residual::new(
        "adjoint twice",
        adj.adjoint(cfg).distance(&t)?,
        cfg.eq,
    ));

    let mut rng = case.aux_rng();
    let k = rng.gen_range(0..=m + n);
    let pairs: Vec<_> = (0..k)
        .map(|_| {
            (
                random_vector::<T, _>(m, &mut rng),
                random_vector::<T, _>(n, &mut rng),
            )
        })
        .collect();
    let b = LinearRelation::from_generators(m, n, &pairs, cfg)?;
    let lhs = t.componentwise_sum(&b, cfg)?.adjoint(cfg);
    let rhs = adj.intersection(&b.adjoint(cfg), cfg)?;
    out.push(Residual::new(
        "(A ∔ B)* = A* ∩ B*",
        lhs.distance(&rhs)?,
        cfg.eq,
    ));

    let rows = rng.gen_range(1..=8);
    let op: DMatrix<T> = random_matrix(rows, n, &mut rng);
    let op = LinearRelation::from_operator(&op, None, &[], cfg)?;
    let lhs = LinearRelation::compose(&op, &t, cfg)?.adjoint(cfg);
    let rhs = LinearRelation::compose(&adj, &op.adjoint(cfg), cfg)?;
    out.push(Residual::new("(BA)* = A*B*", lhs.distance(&rhs)?, cfg.eq));
    Ok(out)
}

fn check_decomposition<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let dec = decompose(&t, cfg)?;
    let flags = dec.class.flags;
    let (reg, sing) = (&dec.t_reg, &dec.t_sing);
    let zero_on_dom = LinearRelation::zero_operator(&t.dom(cfg), t.dim_k());
    let closure = t.closure(cfg);
    let mul_closure = closure.mul(cfg);
    let product = LinearRelation::cartesian(&t.dom(cfg), &mul_closure);
    Ok(vec![
        Residual::new("T_reg + T_sing = T", dec.reconstruction, cfg.eq),
        Residual::new("enclosure", dec.enclosure, cfg.eq),
        Residual::new(
            "mul T_sing = mul T",
            sing.mul(cfg).distance(&t.mul(cfg))?,
            cfg.eq,
        ),
        Residual::new(
            "reg(reg T) = reg T",
            regular_part(reg, cfg).distance(reg)?,
            cfg.eq,
        ),
        Residual::new(
            "sing(sing T) = sing T",
            singular_part(sing, cfg).distance(sing)?,
            cfg.eq,
        ),
        Residual::new(
            "reg(sing T) = 0 on dom T",
            regular_part(sing, cfg).distance(&zero_on_dom)?,
            cfg.eq,
        ),
        Residual::new(
            "sing(reg T) = 0 on dom T",
            singular_part(reg, cfg).distance(&zero_on_dom)?,
            cfg.eq,
        ),
        flag(
            "T = T_reg ⇔ regular",
            (reg.distance(&t)? < cfg.eq) == flags.is_regular,
        ),
        flag(
            "T = T_sing ⇔ singular",
            (sing.distance(&t)? < cfg.eq) == flags.is_singular,
        ),
        Residual::new(
            "reg(closure) = closure(reg)",
            regular_part(&closure, cfg).distance(&reg.closure(cfg))?,
            cfg.eq,
        ),
        Residual::new(
            "sing(closure) = closure(sing)",
            singular_part(&closure, cfg).distance(&sing.closure(cfg))?,
            cfg.eq,
        ),
        Residual::new(
            "sing T = dom T × mul T̄",
            sing.closure(cfg).distance(&product)?,
            cfg.eq,
        ),
        flag(
            "maximal singularity passes to T_sing",
            flags.is_maximally_singular == classify(sing, cfg)?.flags.is_maximally_singular,
        ),
    ])
}

fn check_classify<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let report = classify(&t, cfg)?;
    let flags = report.flags;
    // stone_classify fails with Inconsistent when the verdicts differ
    let stone = stone_classify(&t, cfg)?;
    let inv = classify(&t.inverse(cfg), cfg)?.flags;
    let adj = classify(&t.adjoint(cfg), cfg)?.flags;
    let mut out = vec![
        flag(
            "classify = stone_classify",
            stone.singular == flags.is_singular && stone.regular == flags.is_regular,
        ),
        flag(
            "T singular ⇔ T⁻¹ singular",
            flags.is_singular == inv.is_singular,
        ),
        flag(
            "T singular ⇔ T* singular",
            flags.is_singular == adj.is_singular,
        ),
        flag(
            "label matches flags",
            report.classification == flags.label(),
        ),
    ];
    if case.kind == CaseKind::Singular || case.kind == CaseKind::MaximallySingular {
        out.push(flag(
            "constructed singular case is singular",
            flags.is_singular,
        ));
    }
    if case.kind == CaseKind::MaximallySingular {
        out.push(flag(
            "constructed maximal case is maximally singular",
            flags.is_maximally_singular,
        ));
    }
    Ok(out)
}

fn check_stone<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let mut out = stone_residual_list(&t, cfg)?;
    let sc = stone_classify(&t, cfg)?;
    if sc.singular {
        out.push(Residual::new("singular: ‖R̃12‖", sc.r12_norm, cfg.eq));
        out.push(Residual::new(
            "singular: block diagonal form",
            sc.block_form_distance,
            cfg.eq,
        ));
    }
    if sc.maximally_singular {
        out.push(Residual::new(
            "maximal: ‖R̃22 − I‖",
            sc.r22_identity_distance,
            cfg.eq,
        ));
    }
    if matches!(case.kind, CaseKind::Singular | CaseKind::MaximallySingular) {
        out.push(flag("constructed singular case detected", sc.singular));
    }
    Ok(out)
}

fn check_metric<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let maps = graph_maps(&t, cfg)?;
    let r = maps.graph_dim();
    let mut out = Vec::new();
    if r > 0 {
        let co_kernel = DMatrix::<T>::identity(r, r) - &maps.q;
        let range = Subspace::range_of(&maps.iota_adjoint, cfg);
        out.push(Residual::new(
            "ran ι* = graph ⊖ ker ι",
            range.distance(&Subspace::range_of(&co_kernel, cfg))?,
            cfg.eq,
        ));
    }
    let mut rng = case.aux_rng();
    let (hb, kb) = (t.h_block(), t.k_block());
    for i in 0..3 {
        let c: DVector<T> = random_vector(r, &mut rng);
        let (f, fp) = (&hb * &c, &kb * &c);
        let s = singular_energy_variational(&t, &f, &fp, cfg)?;
        let g = regular_energy_variational(&t, &f, &fp, cfg)?;
        out.push(Residual::new(
            &format!("singular energy, pair {i}"),
            s.defect(),
            cfg.var,
        ));
        out.push(Residual::new(
            &format!("regular energy, pair {i}"),
            g.defect(),
            cfg.var,
        ));
        out.push(Residual::new(
            &format!("energies add up, pair {i}"),
            (s.variational + g.variational - fp.norm_squared()).abs(),
            cfg.var,
        ));
    }
    Ok(out)
}

fn check_closed_form<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let (m, n) = (case.dim_h, case.dim_k);
    let mut rng = case.aux_rng();
    let a: DMatrix<T> = random_matrix(n, m, &mut rng);
    let h: DVector<T> = random_vector(m, &mut rng);
    let t = LinearRelation::from_operator(&a, None, &[], cfg)?;
    let q = min_quadratic(&t, &h, cfg)?;
    let gram = DMatrix::identity(m, m) + a.adjoint() * &a;
    let lu_argmin = -(gram
        .lu()
        .solve(&h)
        .ok_or_else(|| RelError::Precondition("I + AᴴA is singular".into()))?);
    let argmin_gap = (&lu_argmin - &q.argmin).norm() / lu_argmin.norm().max(1.0);
    Ok(vec![
        Residual::new(
            "closed form = least squares (value)",
            q.value_error(),
            RELATIVE_TOL,
        ),
        Residual::new(
            "closed form = least squares (argmin)",
            q.argmin_error(),
            RELATIVE_TOL,
        ),
        Residual::new("argmin = −(I + AᴴA)⁻¹h", argmin_gap, RELATIVE_TOL),
    ])
}

fn check_closability<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let op = regular_part(&t, cfg);
    let report = closability_check(&op, None, case.aux_seed, cfg)?;
    let m = op.dim_h();
    let doubled = op.block_image(
        &DMatrix::identity(m, m),
        &(DMatrix::identity(op.dim_k(), op.dim_k()) * T::from_real(2.0)),
        cfg,
    );
    let dom = domination_check(&op, &doubled, case.aux_seed, cfg)?;
    Ok(vec![
        Residual::new("closability defect", report.max_defect, cfg.var),
        flag("supremum attained", report.attained),
        flag("domination sandwich (S = 2T)", dom.applicable && dom.holds),
    ])
}

fn check_adjoint_constant<T: Scalar>(
    case: &Case<T>,
    cfg: &ToleranceConfig,
) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let mut rng = case.aux_rng();
    let g: DVector<T> = random_vector(t.dim_k(), &mut rng);
    let projected = t.mul(cfg).complement_with(cfg).project(&g)?;
    let adj_dom = t.adjoint(cfg).dom(cfg);
    let mut out = Vec::new();
    for (name, g) in [("random g", g), ("g ⊥ mul T", projected)] {
        let c = optimal_adjoint_constant(&t, &g, cfg)?;
        let in_adj_dom = adj_dom.distance_to(&g)? <= cfg.eq * g.norm().max(1.0);
        out.push(flag(
            &format!("in_domain ⇔ g ∈ dom T* ({name})"),
            c.in_domain == in_adj_dom,
        ));
        if c.in_domain {
            out.push(Residual::new(
                &format!("Rayleigh = ‖(T*)_s g‖ ({name})"),
                c.relative_gap(),
                RELATIVE_TOL,
            ));
        }
    }
    Ok(out)
}

fn check_adjoint_parts<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    let t = case.relation(cfg)?;
    let r = adjoint_part_identities(&t, cfg)?;
    Ok(vec![
        Residual::new("dom (T_reg)* = dom T* ⊕ mul T̄", r.dom_reg, cfg.eq),
        Residual::new("ker (T_reg)* = ker T* ⊕ mul T̄", r.ker_reg, cfg.eq),
        Residual::new("dom (T_sing)* = ker (T_sing)* = dom̄ T*", r.sing, cfg.eq),
    ])
}

fn gallery_residuals(
    entry: &gallery::GalleryEntry,
    cfg: &ToleranceConfig,
) -> Result<Vec<Residual>> {
    Ok(entry
        .verify(cfg)?
        .into_iter()
        .map(|c| match (c.residual, c.threshold) {
            (Some(v), Some(t)) => Residual::new(&format!("{}: {}", entry.name, c.name), v, t),
            _ => flag(&format!("{}: {}", entry.name, c.name), c.passed),
        })
        .collect())
}

/// Named entries first, then random instances of each construction.
fn check_gallery(index: usize, case: &Case<f64>, cfg: &ToleranceConfig) -> Result<Vec<Residual>> {
    if let Some(name) = gallery::NAMES.get(index) {
        return gallery_residuals(&gallery::entry(name, cfg)?, cfg);
    }
    let (m, n) = (case.dim_h, case.dim_k);
    let mut rng = case.aux_rng();
    let entry = match index % 5 {
        0 => {
            let a: DMatrix<f64> = random_matrix(n, m, &mut rng);
            let dom = random_subspace(m, &mut rng, cfg);
            let r = random_subspace(n, &mut rng, cfg);
            gallery::operator_plus_subspace(&a, &dom, &r, cfg)?
        }
        1 | 2 => {
            // relation with one-dimensional multivalued part
            let d = rng.gen_range(0..=m);
            let dom: DMatrix<f64> = random_basis(m, d, &mut rng);
            let a: DMatrix<f64> = random_matrix(n, m, &mut rng);
            let phi: DVector<f64> = random_vector(n, &mut rng);
            let pairs: Vec<_> = dom
                .column_iter()
                .map(|f| (f.into_owned(), &a * f))
                .chain(std::iter::once((DVector::zeros(m), phi)))
                .collect();
            let rel = LinearRelation::from_generators(m, n, &pairs, cfg)?;
            if index % 5 == 1 {
                gallery::rank_one_singular(&rel, cfg)?
            } else {
                let b: DMatrix<f64> = random_matrix(n, m, &mut rng);
                gallery::bounded_perturbation(&rel, &b, cfg)?
            }
        }
        3 => {
            let d = rng.gen_range(0..m);
            let dom: DMatrix<f64> = random_basis(m, d, &mut rng);
            let a: DMatrix<f64> = random_matrix(n, m, &mut rng);
            let dom = Subspace::from_columns(&dom, cfg)?;
            let s = LinearRelation::from_operator(&a, Some(&dom), &[], cfg)?;
            let e = if d > 0 && rng.gen_bool(0.5) {
                dom.basis() * random_vector::<f64, _>(dom.dim(), &mut rng)
            } else {
                random_vector(m, &mut rng)
            };
            let f = random_vector(n, &mut rng);
            gallery::one_dim_extension(&s, &e, &f, cfg)?
        }
        _ => {
            // U singular with mul U = R; K injects into R ⊂ (dom U*)⊥
            let q = rng.gen_range(1..=n);
            let r: DMatrix<f64> = random_basis(n, q, &mut rng);
            let inner: DMatrix<f64> = random_matrix(q, m, &mut rng);
            let u = LinearRelation::from_operator(
                &(&r * inner),
                None,
                &r.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>(),
                cfg,
            )?;
            let cols = rng.gen_range(1..=q);
            let k = &r * random_matrix::<f64, _>(q, cols, &mut rng);
            gallery::max_singular_product(&u, &k, cfg)?
        }
    };
    gallery_residuals(&entry, cfg)
}

fn run_typed<T: Scalar>(
    suite: Suite,
    case: &Case<T>,
    cfg: &ToleranceConfig,
) -> Result<Vec<Residual>> {
    match suite {
        Suite::Subspace => check_subspace(case, cfg),
        Suite::Duality => check_duality(case, cfg),
        Suite::Decomposition => check_decomposition(case, cfg),
        Suite::Classify => check_classify(case, cfg),
        Suite::Stone => check_stone(case, cfg),
        Suite::Metric => check_metric(case, cfg),
        Suite::ClosedForm => check_closed_form(case, cfg),
        Suite::Closability => check_closability(case, cfg),
        Suite::AdjointConstant => check_adjoint_constant(case, cfg),
        Suite::AdjointParts => check_adjoint_parts(case, cfg),
        Suite::Gallery => unreachable!("gallery cases are dispatched separately"),
    }
}

fn guarded(f: impl FnOnce() -> Result<Vec<Residual>>) -> (Vec<Residual>, Option<String>) {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(r)) => (r, None),
        Ok(Err(e)) => (Vec::new(), Some(e.to_string())),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (Vec::new(), Some(format!("panic: {msg}")))
        }
    }
}

enum AnyCase {
    Real(Case<f64>),
    Complex(Case<Complex64>),
}

/// Whether every rank decision the checks depend on is clear of the cutoff.
fn well_conditioned<T: Scalar>(case: &Case<T>, cfg: &ToleranceConfig) -> bool {
    check_rank(&case.pairs, case.dim_h, case.dim_k, cfg).is_ok()
        && case
            .relation(cfg)
            .is_ok_and(|t| check_conditioning(&t, cfg).is_ok())
}

fn screened<T: Scalar>(kind: CaseKind, opts: &VerifyOptions, seed: u64) -> (Case<T>, u32) {
    let mut case = random_case(kind, opts.max_dim, seed);
    for attempt in 1..=MAX_REDRAWS {
        if well_conditioned(&case, &opts.cfg) {
            return (case, attempt - 1);
        }
        case = random_case(kind, opts.max_dim, seed ^ (u64::from(attempt) << 32));
    }
    (case, MAX_REDRAWS)
}

/// Draws case `index`, redrawing ill-conditioned ones. Returns the number of redraws.
fn draw(suite: Suite, opts: &VerifyOptions, index: usize) -> (AnyCase, u32) {
    let seed = case_seed(opts.seed, suite.name(), index as u64);
    let kind = KINDS[index % KINDS.len()];
    if suite != Suite::Gallery && index % COMPLEX_EVERY == COMPLEX_EVERY - 1 {
        let (c, n) = screened(kind, opts, seed);
        (AnyCase::Complex(c), n)
    } else {
        let (c, n) = screened(kind, opts, seed);
        (AnyCase::Real(c), n)
    }
}

fn evaluate<T: Scalar>(
    suite: Suite,
    index: usize,
    case: &Case<T>,
    cfg: &ToleranceConfig,
) -> CaseOutcome {
    let (residuals, error) = guarded(|| {
        match (
            suite,
            (case as &dyn std::any::Any).downcast_ref::<Case<f64>>(),
        ) {
            (Suite::Gallery, Some(real)) => check_gallery(index, real, cfg),
            (Suite::Gallery, None) => Err(RelError::Precondition("gallery cases are real".into())),
            _ => run_typed(suite, case, cfg),
        }
    });
    CaseOutcome {
        index,
        kind: (suite != Suite::Gallery || index >= gallery::NAMES.len()).then_some(case.kind),
        field: T::FIELD,
        residuals,
        error,
    }
}

/// Drops generators while the case keeps failing.
fn shrink<T: Scalar>(
    suite: Suite,
    index: usize,
    case: &Case<T>,
    cfg: &ToleranceConfig,
) -> (Case<T>, CaseOutcome) {
    let mut best = case.clone();
    let mut outcome = evaluate(suite, index, &best, cfg);
    let mut budget = SHRINK_BUDGET;
    'outer: loop {
        for i in 0..best.pairs.len() {
            if budget == 0 {
                break 'outer;
            }
            budget -= 1;
            let candidate = best.without(i);
            let o = evaluate(suite, index, &candidate, cfg);
            if !o.passed() {
                best = candidate;
                outcome = o;
                continue 'outer;
            }
        }
        break;
    }
    (best, outcome)
}

fn witness_for(suite: Suite, opts: &VerifyOptions, index: usize) -> Witness {
    let (spec, original, outcome) = match draw(suite, opts, index).0 {
        AnyCase::Real(c) => {
            let (small, o) = shrink(suite, index, &c, &opts.cfg);
            (small.spec(), c.pairs.len(), o)
        }
        AnyCase::Complex(c) => {
            let (small, o) = shrink(suite, index, &c, &opts.cfg);
            (small.spec(), c.pairs.len(), o)
        }
    };
    let named_gallery = suite == Suite::Gallery && index < gallery::NAMES.len();
    Witness {
        suite,
        seed: opts.seed,
        case_index: index,
        kind: outcome.kind,
        failures: outcome.failures(),
        spec: (!named_gallery).then_some(spec),
        original_generators: original,
        tolerances: opts.cfg,
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteSummary {
    let mut redraws = 0;
    let outcomes: Vec<CaseOutcome> = (0..opts.cases)
        .into_par_iter()
        .map(|i| {
            let (case, redraws) = draw(suite, opts, i);
            let outcome = match case {
                AnyCase::Real(c) => evaluate(suite, i, &c, &opts.cfg),
                AnyCase::Complex(c) => evaluate(suite, i, &c, &opts.cfg),
            };
            (outcome, redraws)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(o, n)| {
            redraws += n as usize;
            o
        })
        .collect();
    let mut order: Vec<String> = Vec::new();
    let mut worst: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for o in &outcomes {
        for r in &o.residuals {
            let entry = worst.entry(r.name.clone()).or_insert_with(|| {
                order.push(r.name.clone());
                (r.value, r.threshold)
            });
            if r.value > entry.0 || r.value.is_nan() {
                *entry = (r.value, r.threshold);
            }
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    let first_failure = outcomes.iter().find(|o| !o.passed()).map(|o| o.index);
    SuiteSummary {
        suite,
        cases: outcomes.len(),
        passed: outcomes.len() - failed,
        failed,
        redraws,
        worst: order
            .into_iter()
            .map(|name| {
                let (value, threshold) = worst[&name];
                Worst {
                    name,
                    value,
                    threshold,
                }
            })
            .collect(),
        witness: first_failure.map(|i| witness_for(suite, opts, i)),
    }
}

pub fn run(opts: &VerifyOptions) -> VerifySummary {
    let suites: Vec<SuiteSummary> = opts.suites.iter().map(|s| run_suite(*s, opts)).collect();
    let passed = suites.iter().all(|s| s.failed == 0);
    VerifySummary {
        seed: opts.seed,
        cases: opts.cases,
        max_dim: opts.max_dim,
        tolerances: opts.cfg,
        suites,
        passed,
    }
}
