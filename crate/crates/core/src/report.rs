//! Analysis reports: everything the library computes about one relation,
//! with each residual next to the threshold it was judged against.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::decomposition::{
    adjoint_part_identities, decompose, ClassFlags, ClassWitness, Classification,
};
use crate::error::{RelError, Result};
use crate::linalg::stack_vectors;
use crate::metric::{
    closability_check, regular_energy_variational, singular_energy_variational, ClosabilityReport,
    Energy,
};
use crate::relation::LinearRelation;
use crate::relspec::{Entry, GeneratorSpec, RelationSpec};
use crate::scalar::{Field, Scalar};
use crate::stone::{
    characteristic_matrix, characteristic_via_resolvent, stone_classify, stone_residuals,
    CharacteristicMatrix, StoneClass,
};
use crate::subspace::{RankProfile, Subspace};
use crate::tolerance::ToleranceConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number of input pairs used for the metric spot checks.
pub const METRIC_PAIRS: usize = 3;

/// Entries below this magnitude are printed as zero.
const DISPLAY_FLOOR: f64 = 1e-14;

/// Scientific notation, with an exact zero printed as `0`.
pub(crate) fn sci(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.3e}")
    }
}

pub(crate) fn clean(x: f64) -> f64 {
    if x.abs() < DISPLAY_FLOOR {
        0.0
    } else {
        x
    }
}

fn entry<T: Scalar>(x: T) -> Entry {
    let (re, im) = x.parts();
    match T::FIELD {
        Field::Real => Entry::Real(clean(re)),
        Field::Complex => Entry::Complex([clean(re), clean(im)]),
    }
}

/// Row-major nested arrays.
pub fn matrix_rows<T: Scalar>(a: &DMatrix<T>) -> Vec<Vec<Entry>> {
    a.row_iter()
        .map(|r| r.iter().map(|x| entry(*x)).collect())
        .collect()
}

pub fn vector_entries<T: Scalar>(v: &DVector<T>) -> Vec<Entry> {
    v.iter().map(|x| entry(*x)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Residual {
    pub fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceReport {
    pub dim: usize,
    /// Orthonormal basis vectors.
    pub basis: Vec<Vec<Entry>>,
}

impl SubspaceReport {
    fn new<T: Scalar>(s: &Subspace<T>) -> Self {
        Self {
            dim: s.dim(),
            basis: s
                .basis()
                .column_iter()
                .map(|c| vector_entries(&c.into_owned()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartsReport {
    #[serde(rename = "dim_H")]
    pub dim_h: usize,
    #[serde(rename = "dim_K")]
    pub dim_k: usize,
    pub field: Field,
    pub graph_dim: usize,
    pub dom: SubspaceReport,
    pub ran: SubspaceReport,
    pub ker: SubspaceReport,
    pub mul: SubspaceReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub label: Classification,
    pub flags: ClassFlags,
    pub witness: ClassWitness,
    pub stone: StoneClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartReport {
    pub graph_dim: usize,
    pub generators: Vec<GeneratorSpec>,
}

impl PartReport {
    fn new<T: Scalar>(t: &LinearRelation<T>) -> Self {
        let (hb, kb) = (t.h_block(), t.k_block());
        Self {
            graph_dim: t.graph_dim(),
            generators: (0..t.graph_dim())
                .map(|j| GeneratorSpec {
                    f: vector_entries(&hb.column(j).into_owned()),
                    fp: vector_entries(&kb.column(j).into_owned()),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    /// Projector onto `mul T̄`.
    pub p: Vec<Vec<Entry>>,
    pub regular: PartReport,
    pub singular: PartReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlocksReport {
    pub r11: Vec<Vec<Entry>>,
    pub r12: Vec<Vec<Entry>>,
    pub r21: Vec<Vec<Entry>>,
    pub r22: Vec<Vec<Entry>>,
}

impl BlocksReport {
    fn new<T: Scalar>(r: &CharacteristicMatrix<T>) -> Self {
        Self {
            r11: matrix_rows(&r.r11),
            r12: matrix_rows(&r.r12),
            r21: matrix_rows(&r.r21),
            r22: matrix_rows(&r.r22),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StoneMethod {
    Projection,
    Resolvent,
    Both,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoneReport {
    pub method: StoneMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<BlocksReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolvent: Option<BlocksReport>,
    /// `‖R_projection − R_resolvent‖_F` when both routes ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_route_distance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEnergy {
    /// Index into the input pairs, absent for user-supplied vectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<usize>,
    pub f: Vec<Entry>,
    pub fp: Vec<Entry>,
    /// `‖Pf′‖²`.
    pub singular: Energy,
    /// `‖(I − P)f′‖²`.
    pub regular: Energy,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricReport {
    pub pairs: Vec<PairEnergy>,
    /// Only for operators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closability: Option<ClosabilityReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub input_digest: String,
    pub classification: ClassificationReport,
    pub parts: PartsReport,
    pub decomposition: DecompositionReport,
    pub stone: StoneReport,
    pub metric: MetricReport,
    pub residuals: Vec<Residual>,
    pub tolerances: ToleranceConfig,
    pub version: String,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.parts;
        let c = &self.classification;
        let _ = writeln!(
            s,
            "relation {}×{} ({}), graph dimension {}",
            p.dim_h, p.dim_k, p.field, p.graph_dim
        );
        let _ = writeln!(s, "input digest   {}", self.input_digest);
        let _ = writeln!(
            s,
            "classification {} (regular={}, singular={}, maximally_singular={})",
            c.label, c.flags.is_regular, c.flags.is_singular, c.flags.is_maximally_singular
        );
        if !c.witness.low_confidence.is_empty() {
            let _ = writeln!(s, "low confidence {}", c.witness.low_confidence.join(", "));
        }
        let _ = writeln!(
            s,
            "parts          dom {}, ran {}, ker {}, mul {}",
            p.dom.dim, p.ran.dim, p.ker.dim, p.mul.dim
        );
        let d = &self.decomposition;
        let _ = writeln!(
            s,
            "decomposition  T_reg graph dim {}, T_sing graph dim {}",
            d.regular.graph_dim, d.singular.graph_dim
        );
        if let Some(dist) = self.stone.cross_route_distance {
            let _ = writeln!(s, "stone          cross-route distance {dist:.3e}");
        }
        s.push_str(&self.metric_text());
        s.push_str(&residual_table(&self.residuals));
        let _ = writeln!(s, "relcalc {}", self.version);
        s
    }

    fn metric_text(&self) -> String {
        let mut s = String::new();
        for e in &self.metric.pairs {
            let _ = writeln!(
                s,
                "metric pair {}  singular {:.6} (direct {:.6}), regular {:.6} (direct {:.6})",
                e.pair.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
                clean(e.singular.variational),
                clean(e.singular.direct),
                clean(e.regular.variational),
                clean(e.regular.direct)
            );
        }
        s
    }
}

pub fn residual_table(residuals: &[Residual]) -> String {
    let mut s = String::new();
    let width = residuals
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(0);
    for r in residuals {
        let pad = width - r.name.chars().count();
        let _ = writeln!(
            s,
            "  {}{}  {:<9} < {:.0e}  {}",
            r.name,
            " ".repeat(pad),
            sci(r.value),
            r.threshold,
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    s
}

fn ambiguity(what: &str, profile: &RankProfile) -> Result<()> {
    if !profile.ambiguous() {
        return Ok(());
    }
    let log_cut = profile.cutoff.ln();
    let nearest = profile
        .singular_values
        .iter()
        .copied()
        .min_by(|a, b| {
            (a.ln() - log_cut)
                .abs()
                .total_cmp(&(b.ln() - log_cut).abs())
        })
        .unwrap_or(0.0);
    Err(RelError::Degenerate {
        what: format!("rank decision on {what}"),
        distance: nearest,
        threshold: profile.cutoff,
    })
}

/// Rejects inputs whose generator rank sits too close to the cutoff.
pub fn check_rank<T: Scalar>(
    pairs: &[(DVector<T>, DVector<T>)],
    m: usize,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<()> {
    if pairs.is_empty() {
        return Ok(());
    }
    let cols: Vec<_> = pairs.iter().map(|(f, fp)| stack_vectors(f, fp)).collect();
    let gens = DMatrix::from_columns(&cols);
    debug_assert_eq!(gens.nrows(), m + n);
    ambiguity("the input generators", &Subspace::rank_profile(&gens, cfg))
}

/// Rejects relations whose parts, read off the characteristic matrix, rest
/// on ambiguous rank decisions. A nearly rank-deficient operator puts the
/// square of its smallest singular value into `R22`.
pub fn check_conditioning<T: Scalar>(t: &LinearRelation<T>, cfg: &ToleranceConfig) -> Result<()> {
    let r = characteristic_matrix(t);
    let (m, n) = (t.dim_h(), t.dim_k());
    let c11 = DMatrix::<T>::identity(m, m) - &r.r11;
    let c22 = DMatrix::<T>::identity(n, n) - &r.r22;
    for (name, block) in [
        ("R11", &r.r11),
        ("R22", &r.r22),
        ("I − R11", &c11),
        ("I − R22", &c22),
    ] {
        ambiguity(name, &Subspace::unit_rank_profile(block, cfg))?;
    }
    Ok(())
}

pub fn stone_report<T: Scalar>(
    t: &LinearRelation<T>,
    method: StoneMethod,
    cfg: &ToleranceConfig,
) -> Result<StoneReport> {
    let projection = characteristic_matrix(t);
    let resolvent = match method {
        StoneMethod::Projection => None,
        _ => Some(characteristic_via_resolvent(t, cfg)?),
    };
    let cross_route_distance = match (&method, &resolvent) {
        (StoneMethod::Both, Some(r)) => Some(projection.distance(r)?),
        _ => None,
    };
    Ok(StoneReport {
        method,
        projection: (method != StoneMethod::Resolvent).then(|| BlocksReport::new(&projection)),
        resolvent: resolvent.as_ref().map(BlocksReport::new),
        cross_route_distance,
    })
}

/// Residuals of the characteristic-matrix identities.
pub fn stone_residual_list<T: Scalar>(
    t: &LinearRelation<T>,
    cfg: &ToleranceConfig,
) -> Result<Vec<Residual>> {
    let s = stone_residuals(t, cfg)?;
    let (eq, num) = (cfg.eq, cfg.num);
    let mut out = vec![
        Residual::new("stone.projector", s.projector, num),
        Residual::new("stone.off_diagonal_symmetry", s.off_diagonal_symmetry, num),
        Residual::new("stone.two_route", s.two_route, eq),
        Residual::new("stone.upper_right", s.upper_right, num),
        Residual::new("stone.round_trip", s.round_trip, eq),
        Residual::new("stone.adjoint_route", s.adjoint_route, eq),
        Residual::new("stone.inverse_route", s.inverse_route, eq),
        Residual::new("stone.parts", s.parts, eq),
        Residual::new("stone.regular_part", s.regular_part, eq),
    ];
    for (name, v) in ["ker_r11", "ker_r22", "ker_c11", "ker_c22"]
        .iter()
        .zip(s.kernel_inclusions)
    {
        out.push(Residual::new(
            &format!("stone.kernel_inclusion.{name}"),
            v,
            num,
        ));
    }
    for (name, v) in ["dom", "ker", "mul"].iter().zip(s.adjoint_parts) {
        out.push(Residual::new(&format!("stone.adjoint_parts.{name}"), v, eq));
    }
    for (name, v) in ["r11", "r21", "r12", "r22"].iter().zip(s.restrictions) {
        out.push(Residual::new(&format!("stone.restriction.{name}"), v, num));
    }
    Ok(out)
}

/// Singular and regular energies of one graph element.
pub fn pair_energy<T: Scalar>(
    t: &LinearRelation<T>,
    pair: Option<usize>,
    f: &DVector<T>,
    fp: &DVector<T>,
    cfg: &ToleranceConfig,
) -> Result<PairEnergy> {
    let singular = singular_energy_variational(t, f, fp, cfg)?;
    let regular = regular_energy_variational(t, f, fp, cfg)?;
    let gap = singular.defect().max(regular.defect());
    Ok(PairEnergy {
        pair,
        f: vector_entries(f),
        fp: vector_entries(fp),
        singular,
        regular,
        gap,
    })
}

/// Full analysis of a parsed spec.
pub fn analyze<T: Scalar>(
    spec: &RelationSpec,
    method: StoneMethod,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<AnalysisReport> {
    let pairs = spec.pairs::<T>()?;
    check_rank(&pairs, spec.dim_h, spec.dim_k, cfg)?;
    let t: LinearRelation<T> = spec.to_relation(cfg)?;
    check_conditioning(&t, cfg)?;
    let dec = decompose(&t, cfg)?;
    let stone_class = stone_classify(&t, cfg)?;
    let parts = t.parts(cfg);

    let mut residuals = vec![
        Residual::new("decomposition.reconstruction", dec.reconstruction, cfg.eq),
        Residual::new("decomposition.enclosure", dec.enclosure, cfg.eq),
        Residual::new(
            "decomposition.enclosure_orthogonality",
            dec.enclosure_orthogonality,
            cfg.eq,
        ),
    ];
    let adj = adjoint_part_identities(&t, cfg)?;
    residuals.push(Residual::new(
        "decomposition.adjoint_parts",
        adj.max,
        cfg.num,
    ));
    residuals.extend(stone_residual_list(&t, cfg)?);

    let mut energies = Vec::new();
    for (i, (f, fp)) in pairs.iter().enumerate().take(METRIC_PAIRS) {
        let e = pair_energy(&t, Some(i), f, fp, cfg)?;
        residuals.push(Residual::new(&format!("metric.pair{i}"), e.gap, cfg.var));
        energies.push(e);
    }
    let closability = if parts.mul.is_trivial() {
        let c = closability_check(&t, None, seed, cfg)?;
        residuals.push(Residual::new("metric.closability", c.max_defect, cfg.var));
        Some(c)
    } else {
        None
    };

    Ok(AnalysisReport {
        input_digest: spec.digest(),
        classification: ClassificationReport {
            label: dec.class.classification,
            flags: dec.class.flags,
            witness: dec.class.witness.clone(),
            stone: stone_class,
        },
        parts: PartsReport {
            dim_h: t.dim_h(),
            dim_k: t.dim_k(),
            field: T::FIELD,
            graph_dim: t.graph_dim(),
            dom: SubspaceReport::new(&parts.dom),
            ran: SubspaceReport::new(&parts.ran),
            ker: SubspaceReport::new(&parts.ker),
            mul: SubspaceReport::new(&parts.mul),
        },
        decomposition: DecompositionReport {
            p: matrix_rows(&dec.p),
            regular: PartReport::new(&dec.t_reg),
            singular: PartReport::new(&dec.t_sing),
        },
        stone: stone_report(&t, method, cfg)?,
        metric: MetricReport {
            pairs: energies,
            closability,
        },
        residuals,
        tolerances: *cfg,
        version: VERSION.to_string(),
    })
}

/// Analysis dispatched on the spec's field.
pub fn analyze_spec(
    spec: &RelationSpec,
    method: StoneMethod,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<AnalysisReport> {
    match spec.field {
        Field::Real => analyze::<f64>(spec, method, seed, cfg),
        Field::Complex => analyze::<num_complex::Complex64>(spec, method, seed, cfg),
    }
}
