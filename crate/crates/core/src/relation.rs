//! Linear relations as graph subspaces of `H × K`.
//!
//! Graph vectors are laid out with the `f`-block (length `dim_h`) first and
//! the `f′`-block (length `dim_k`) second. The flip map is
//! `J(f, f′) = (f′, −f)` and the adjoint is `T* = J(T⊥)`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_dims, RelError, Result};
use crate::linalg::{block_diag, pinv, stack_vectors, vstack};
use crate::scalar::Scalar;
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Debug)]
pub struct LinearRelation<T: Scalar = f64> {
    dim_h: usize,
    dim_k: usize,
    graph: Subspace<T>,
}

/// Domain, range, kernel and multivalued part of a relation.
#[derive(Clone, Debug)]
pub struct Parts<T: Scalar = f64> {
    pub dom: Subspace<T>,
    pub ran: Subspace<T>,
    pub ker: Subspace<T>,
    pub mul: Subspace<T>,
}

impl<T: Scalar> Parts<T> {
    pub fn dims(&self) -> [usize; 4] {
        [
            self.dom.dim(),
            self.ran.dim(),
            self.ker.dim(),
            self.mul.dim(),
        ]
    }
}

/// Intersects `product` with `{x : x[left] = x[right]}` and maps the result
/// through `output`.
fn constrained_image<T: Scalar>(
    product: &Subspace<T>,
    left: Range<usize>,
    right: Range<usize>,
    output: &DMatrix<T>,
    cfg: &ToleranceConfig,
) -> Result<Subspace<T>> {
    debug_assert_eq!(left.len(), right.len());
    let d = product.ambient_dim();
    let w = T::from_real(std::f64::consts::FRAC_1_SQRT_2);
    let mut normals = DMatrix::zeros(d, left.len());
    for (j, (a, b)) in left.zip(right).enumerate() {
        normals[(a, j)] = w;
        normals[(b, j)] = -w;
    }
    let equality_perp = Subspace::from_orthonormal(normals);
    let joint = product.complement_with(cfg).sum(&equality_perp, cfg)?;
    let constrained = joint.complement_with(cfg);
    Ok(constrained.image_under(output, cfg))
}

/// Selection matrix picking coordinate blocks `blocks` (ranges) out of `d`.
fn selector<T: Scalar>(d: usize, blocks: &[Range<usize>]) -> DMatrix<T> {
    let rows: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = DMatrix::zeros(rows, d);
    let mut r = 0;
    for b in blocks {
        for c in b.clone() {
            out[(r, c)] = T::one();
            r += 1;
        }
    }
    out
}

impl<T: Scalar> LinearRelation<T> {
    pub fn from_graph(dim_h: usize, dim_k: usize, graph: Subspace<T>) -> Result<Self> {
        if dim_h == 0 || dim_k == 0 {
            return Err(RelError::EmptyAmbient);
        }
        ensure_dims(
            "graph ambient dimension",
            graph.ambient_dim(),
            dim_h + dim_k,
        )?;
        Ok(Self {
            dim_h,
            dim_k,
            graph,
        })
    }

    /// Span of the stacked pairs `(f, f′)`.
    pub fn from_generators(
        dim_h: usize,
        dim_k: usize,
        pairs: &[(DVector<T>, DVector<T>)],
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        if dim_h == 0 || dim_k == 0 {
            return Err(RelError::EmptyAmbient);
        }
        let mut stacked = Vec::with_capacity(pairs.len());
        for (f, fp) in pairs {
            ensure_dims("f length", f.len(), dim_h)?;
            ensure_dims("f′ length", fp.len(), dim_k)?;
            stacked.push(stack_vectors(f, fp));
        }
        let graph = Subspace::span(dim_h + dim_k, &stacked, cfg)?;
        Self::from_graph(dim_h, dim_k, graph)
    }

    /// `{(f, Af + φ) : f ∈ domain, φ ∈ span(mul_gens)}` for an `n × m` matrix `A`.
    pub fn from_operator(
        a: &DMatrix<T>,
        domain: Option<&Subspace<T>>,
        mul_gens: &[DVector<T>],
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let (n, m) = a.shape();
        let dom_basis = match domain {
            Some(d) => {
                ensure_dims("domain ambient dimension", d.ambient_dim(), m)?;
                d.basis().clone()
            }
            None => DMatrix::identity(m, m),
        };
        let mut pairs: Vec<(DVector<T>, DVector<T>)> = dom_basis
            .column_iter()
            .map(|f| (f.into_owned(), a * f))
            .collect();
        for phi in mul_gens {
            ensure_dims("mul generator length", phi.len(), n)?;
            pairs.push((DVector::zeros(m), phi.clone()));
        }
        Self::from_generators(m, n, &pairs, cfg)
    }

    /// Graph of the identity on `F^m`.
    pub fn identity(m: usize) -> Self {
        let s = T::from_real(std::f64::consts::FRAC_1_SQRT_2);
        let basis = vstack(
            &DMatrix::from_diagonal_element(m, m, s),
            &DMatrix::from_diagonal_element(m, m, s),
        );
        Self {
            dim_h: m,
            dim_k: m,
            graph: Subspace::from_orthonormal(basis),
        }
    }

    /// Cartesian product `dom × mul`.
    pub fn cartesian(dom: &Subspace<T>, mul: &Subspace<T>) -> Self {
        Self {
            dim_h: dom.ambient_dim(),
            dim_k: mul.ambient_dim(),
            graph: dom.product(mul),
        }
    }

    /// Zero operator with domain `dom` into `F^n`.
    pub fn zero_operator(dom: &Subspace<T>, n: usize) -> Self {
        Self::cartesian(dom, &Subspace::zero(n))
    }

    /// The relation `{(0, 0)}`.
    pub fn trivial(m: usize, n: usize) -> Self {
        Self::cartesian(&Subspace::zero(m), &Subspace::zero(n))
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn graph(&self) -> &Subspace<T> {
        &self.graph
    }

    pub fn graph_dim(&self) -> usize {
        self.graph.dim()
    }

    /// `f`-block of the graph basis (`dim_h × r`).
    pub fn h_block(&self) -> DMatrix<T> {
        self.graph.basis().rows(0, self.dim_h).into_owned()
    }

    /// `f′`-block of the graph basis (`dim_k × r`).
    pub fn k_block(&self) -> DMatrix<T> {
        self.graph.basis().rows(self.dim_h, self.dim_k).into_owned()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        ensure_dims("dim H", other.dim_h, self.dim_h)?;
        ensure_dims("dim K", other.dim_k, self.dim_k)
    }

    pub fn dom(&self, cfg: &ToleranceConfig) -> Subspace<T> {
        Subspace::from_unit_scale(&self.h_block(), cfg)
    }

    pub fn ran(&self, cfg: &ToleranceConfig) -> Subspace<T> {
        Subspace::from_unit_scale(&self.k_block(), cfg)
    }

    /// `{f : (f, 0) ∈ T}`, via intersection with `H × {0}`.
    pub fn ker(&self, cfg: &ToleranceConfig) -> Subspace<T> {
        let axis = Subspace::coordinate(self.dim_h + self.dim_k, 0..self.dim_h);
        let cut = self
            .graph
            .intersect(&axis, cfg)
            .expect("ambient dimensions agree");
        Subspace::from_unit_scale(&cut.basis().rows(0, self.dim_h).into_owned(), cfg)
    }

    /// `{f′ : (0, f′) ∈ T}`, via intersection with `{0} × K`.
    pub fn mul(&self, cfg: &ToleranceConfig) -> Subspace<T> {
        let axis =
            Subspace::coordinate(self.dim_h + self.dim_k, self.dim_h..self.dim_h + self.dim_k);
        let cut = self
            .graph
            .intersect(&axis, cfg)
            .expect("ambient dimensions agree");
        Subspace::from_unit_scale(&cut.basis().rows(self.dim_h, self.dim_k).into_owned(), cfg)
    }

    pub fn parts(&self, cfg: &ToleranceConfig) -> Parts<T> {
        Parts {
            dom: self.dom(cfg),
            ran: self.ran(cfg),
            ker: self.ker(cfg),
            mul: self.mul(cfg),
        }
    }

    /// Formal inverse: the two blocks swapped.
    pub fn inverse(&self, cfg: &ToleranceConfig) -> Self {
        let swapped = vstack(&self.k_block(), &self.h_block());
        Self {
            dim_h: self.dim_k,
            dim_k: self.dim_h,
            graph: Subspace::from_unit_scale(&swapped, cfg),
        }
    }

    /// `T* = J(T⊥)`, a relation from `K` to `H`.
    pub fn adjoint(&self, cfg: &ToleranceConfig) -> Self {
        let perp = self.graph.complement_with(cfg);
        let (m, n) = (self.dim_h, self.dim_k);
        let top = perp.basis().rows(m, n).into_owned();
        let bottom = -perp.basis().rows(0, m).into_owned();
        Self {
            dim_h: n,
            dim_k: m,
            graph: Subspace::from_unit_scale(&vstack(&top, &bottom), cfg),
        }
    }

    /// Closure; every subspace is closed here, so this re-orthonormalizes.
    pub fn closure(&self, cfg: &ToleranceConfig) -> Self {
        Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            graph: self.graph.reorthonormalized(cfg),
        }
    }

    /// `A ∔ B = {(f + g, f′ + g′)}`.
    pub fn componentwise_sum(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            graph: self.graph.sum(&other.graph, cfg)?,
        })
    }

    /// `A ∩ B` as graphs.
    pub fn intersection(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            graph: self.graph.intersect(&other.graph, cfg)?,
        })
    }

    /// Operator-like sum `A + B = {(f, f′ + f″) : (f, f′) ∈ A, (f, f″) ∈ B}`.
    pub fn operator_sum(&self, other: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        self.same_shape(other)?;
        let (m, n) = (self.dim_h, self.dim_k);
        let d = 2 * (m + n);
        let product = self.graph.product(&other.graph);
        // (f, f′, g, f″) ↦ (f, f′ + f″)
        let mut output = selector(d, &[0..m, m..m + n]);
        for i in 0..n {
            output[(m + i, 2 * m + n + i)] = T::one();
        }
        let graph = constrained_image(&product, 0..m, m + n..2 * m + n, &output, cfg)?;
        Self::from_graph(m, n, graph)
    }

    /// Product `BA = {(f, f′) : (f, g) ∈ A, (g, f′) ∈ B}`.
    pub fn compose(b: &Self, a: &Self, cfg: &ToleranceConfig) -> Result<Self> {
        ensure_dims("inner dimension", b.dim_h, a.dim_k)?;
        let (m, p, n) = (a.dim_h, a.dim_k, b.dim_k);
        let d = m + 2 * p + n;
        let product = a.graph.product(&b.graph);
        let output = selector(d, &[0..m, m + 2 * p..d]);
        let graph = constrained_image(&product, m..m + p, m + p..m + 2 * p, &output, cfg)?;
        Self::from_graph(m, n, graph)
    }

    /// Image of the graph under `diag(h_map, k_map)`.
    pub fn block_image(
        &self,
        h_map: &DMatrix<T>,
        k_map: &DMatrix<T>,
        cfg: &ToleranceConfig,
    ) -> Self {
        let map = block_diag(h_map, k_map);
        Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            graph: self.graph.image_under(&map, cfg),
        }
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        self.graph.distance(&other.graph)
    }

    pub fn equals(&self, other: &Self, cfg: &ToleranceConfig) -> Result<(bool, f64)> {
        let d = self.distance(other)?;
        Ok((d < cfg.eq, d))
    }

    /// Distance from `(f, f′)` to the graph.
    pub fn pair_distance(&self, f: &DVector<T>, fp: &DVector<T>) -> Result<f64> {
        ensure_dims("f length", f.len(), self.dim_h)?;
        ensure_dims("f′ length", fp.len(), self.dim_k)?;
        self.graph.distance_to(&stack_vectors(f, fp))
    }

    pub fn is_single_valued(&self, cfg: &ToleranceConfig) -> bool {
        self.mul(cfg).is_trivial()
    }

    /// Matrix `M` (`dim_k × dim_h`) with `(f, Mf) ∈ T` for `f ∈ dom T` and
    /// `M = 0` on `(dom T)⊥`.
    pub fn operator_matrix(&self, cfg: &ToleranceConfig) -> Result<DMatrix<T>> {
        let mul = self.mul(cfg);
        if !mul.is_trivial() {
            return Err(RelError::NotSingleValued(mul.dim()));
        }
        Ok(self.k_block() * pinv(&self.h_block(), cfg.rank))
    }

    /// Some `f′` with `(f, f′) ∈ T` (minimum norm over graph coordinates), or
    /// `None` when `f ∉ dom T`.
    pub fn representative(
        &self,
        f: &DVector<T>,
        cfg: &ToleranceConfig,
    ) -> Result<Option<DVector<T>>> {
        ensure_dims("f length", f.len(), self.dim_h)?;
        let h = self.h_block();
        let coords = pinv(&h, cfg.rank) * f;
        let residual = (&h * &coords - f).norm();
        if residual > cfg.num * f.norm().max(1.0) {
            return Ok(None);
        }
        Ok(Some(self.k_block() * coords))
    }
}
