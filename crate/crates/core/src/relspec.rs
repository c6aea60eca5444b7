//! JSON description of a relation (schema `relspec/1`).
//!
//! ```json
//! {"schema": "relspec/1", "dim_H": 2, "dim_K": 2, "field": "real",
//!  "generators": [{"f": [1, 0], "fp": [1, 0]}, {"f": [0, 0], "fp": [0, 1]}]}
//! ```
//!
//! Instead of `generators` a relation may be given in operator form:
//! `operator` (an `dim_K × dim_H` array of rows), an optional `domain` list
//! (default: all of `F^dim_H`) and an optional `mul` list. Complex entries are
//! written as `[re, im]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{RelError, Result};
use crate::relation::LinearRelation;
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;
use crate::tolerance::ToleranceConfig;

pub const SCHEMA: &str = "relspec/1";

/// A scalar entry: a bare number, or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn parts(self) -> (f64, f64) {
        match self {
            Entry::Real(x) => (x, 0.0),
            Entry::Complex([re, im]) => (re, im),
        }
    }

    fn from_scalar<T: Scalar>(x: T) -> Self {
        match T::FIELD {
            Field::Real => Entry::Real(x.parts().0),
            Field::Complex => {
                let (re, im) = x.parts();
                Entry::Complex([re, im])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub f: Vec<Entry>,
    pub fp: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(rename = "dim_H")]
    pub dim_h: usize,
    #[serde(rename = "dim_K")]
    pub dim_k: usize,
    #[serde(default)]
    pub field: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mul: Option<Vec<Vec<Entry>>>,
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

/// A relation over whichever field the spec asked for.
#[derive(Clone, Debug)]
pub enum AnyRelation {
    Real(LinearRelation<f64>),
    Complex(LinearRelation<Complex64>),
}

fn input(msg: impl Into<String>) -> RelError {
    RelError::Input(msg.into())
}

fn to_vector<T: Scalar>(what: &str, v: &[Entry], len: usize) -> Result<DVector<T>> {
    if v.len() != len {
        return Err(input(format!(
            "{what}: expected {len} entries, found {}",
            v.len()
        )));
    }
    let mut out = DVector::zeros(len);
    for (i, e) in v.iter().enumerate() {
        let (re, im) = e.parts();
        if !(re.is_finite() && im.is_finite()) {
            return Err(input(format!("{what}[{i}] is not finite")));
        }
        out[i] = T::from_parts(re, im)
            .ok_or_else(|| input(format!("{what}[{i}] has an imaginary part in a real spec")))?;
    }
    Ok(out)
}

fn from_vector<T: Scalar>(v: &DVector<T>) -> Vec<Entry> {
    v.iter().map(|x| Entry::from_scalar(*x)).collect()
}

impl RelationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| input(format!("malformed relation spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("relation specs always serialize")
    }

    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(input(format!(
                "unsupported schema '{}', expected '{SCHEMA}'",
                self.schema
            )));
        }
        if self.dim_h == 0 || self.dim_k == 0 {
            return Err(input("dim_H and dim_K must be at least 1"));
        }
        let operator_form = self.operator.is_some() || self.domain.is_some() || self.mul.is_some();
        match (&self.generators, operator_form) {
            (Some(_), true) => Err(input(
                "give either generators or the operator form, not both",
            )),
            (None, false) => Err(input("no relation given: expected generators or operator")),
            (None, true) if self.operator.is_none() => {
                Err(input("operator form requires 'operator'"))
            }
            _ => Ok(()),
        }
    }

    /// The pairs the spec lists, in input order. For the operator form these
    /// are `(d, Ad)` over the domain vectors followed by `(0, m)` over `mul`.
    pub fn pairs<T: Scalar>(&self) -> Result<Vec<(DVector<T>, DVector<T>)>> {
        self.validate()?;
        let (m, n) = (self.dim_h, self.dim_k);
        if let Some(gens) = &self.generators {
            return gens
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    Ok((
                        to_vector(&format!("generators[{i}].f"), &g.f, m)?,
                        to_vector(&format!("generators[{i}].fp"), &g.fp, n)?,
                    ))
                })
                .collect();
        }
        let a = self.operator_matrix::<T>()?;
        let domain: Vec<DVector<T>> = match &self.domain {
            Some(d) => d
                .iter()
                .enumerate()
                .map(|(i, v)| to_vector(&format!("domain[{i}]"), v, m))
                .collect::<Result<_>>()?,
            None => (0..m).map(|i| crate::scalar::unit(m, i)).collect(),
        };
        let mut pairs: Vec<_> = domain.into_iter().map(|d| (d.clone(), &a * d)).collect();
        for (i, v) in self.mul.iter().flatten().enumerate() {
            pairs.push((DVector::zeros(m), to_vector(&format!("mul[{i}]"), v, n)?));
        }
        Ok(pairs)
    }

    fn operator_matrix<T: Scalar>(&self) -> Result<DMatrix<T>> {
        let rows = self
            .operator
            .as_ref()
            .ok_or_else(|| input("missing operator"))?;
        if rows.len() != self.dim_k {
            return Err(input(format!(
                "operator: expected {} rows (dim_K), found {}",
                self.dim_k,
                rows.len()
            )));
        }
        let mut a = DMatrix::zeros(self.dim_k, self.dim_h);
        for (i, row) in rows.iter().enumerate() {
            let r = to_vector::<T>(&format!("operator[{i}]"), row, self.dim_h)?;
            a.set_row(i, &r.transpose());
        }
        Ok(a)
    }

    pub fn to_relation<T: Scalar>(&self, cfg: &ToleranceConfig) -> Result<LinearRelation<T>> {
        if T::FIELD == Field::Real && self.field == Field::Complex {
            return Err(input("complex spec cannot be read as a real relation"));
        }
        let pairs = self.pairs::<T>()?;
        if self.generators.is_some() {
            return LinearRelation::from_generators(self.dim_h, self.dim_k, &pairs, cfg);
        }
        let a = self.operator_matrix::<T>()?;
        let domain = match &self.domain {
            Some(_) => {
                let vectors: Vec<_> = pairs
                    .iter()
                    .take(self.domain_len())
                    .map(|p| p.0.clone())
                    .collect();
                Some(Subspace::span(self.dim_h, &vectors, cfg)?)
            }
            None => None,
        };
        let mul: Vec<_> = pairs
            .iter()
            .skip(self.domain_len())
            .map(|p| p.1.clone())
            .collect();
        LinearRelation::from_operator(&a, domain.as_ref(), &mul, cfg)
    }

    fn domain_len(&self) -> usize {
        match &self.domain {
            Some(d) => d.len(),
            None => self.dim_h,
        }
    }

    pub fn load(&self, cfg: &ToleranceConfig) -> Result<AnyRelation> {
        Ok(match self.field {
            Field::Real => AnyRelation::Real(self.to_relation(cfg)?),
            Field::Complex => AnyRelation::Complex(self.to_relation(cfg)?),
        })
    }

    /// Generator form listing an orthonormal basis of the graph.
    pub fn from_relation<T: Scalar>(t: &LinearRelation<T>) -> Self {
        let (hb, kb) = (t.h_block(), t.k_block());
        let generators = (0..t.graph_dim())
            .map(|j| GeneratorSpec {
                f: from_vector(&hb.column(j).into_owned()),
                fp: from_vector(&kb.column(j).into_owned()),
            })
            .collect();
        Self::from_generators(t.dim_h(), t.dim_k(), T::FIELD, generators)
    }

    /// Generator form listing the given pairs verbatim.
    pub fn from_pairs<T: Scalar>(m: usize, n: usize, pairs: &[(DVector<T>, DVector<T>)]) -> Self {
        let generators = pairs
            .iter()
            .map(|(f, fp)| GeneratorSpec {
                f: from_vector(f),
                fp: from_vector(fp),
            })
            .collect();
        Self::from_generators(m, n, T::FIELD, generators)
    }

    fn from_generators(m: usize, n: usize, field: Field, generators: Vec<GeneratorSpec>) -> Self {
        Self {
            schema: default_schema(),
            dim_h: m,
            dim_k: n,
            field,
            generators: Some(generators),
            operator: None,
            domain: None,
            mul: None,
        }
    }

    /// Hex SHA-256 of the spec serialized with sorted keys and no whitespace.
    pub fn digest(&self) -> String {
        // serde_json's map is ordered by key, so a round trip through Value sorts
        let value = serde_json::to_value(self).expect("relation specs always serialize");
        let canonical = serde_json::to_string(&value).expect("values always serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    const MIX: &str = r#"{"dim_H": 2, "dim_K": 2, "field": "real",
        "generators": [{"f": [1, 0], "fp": [1, 0]}, {"f": [0, 0], "fp": [0, 1]}]}"#;

    #[test]
    fn parses_generator_form() {
        let spec = RelationSpec::from_json(MIX).unwrap();
        let t: LinearRelation = spec.to_relation(&cfg()).unwrap();
        assert!(t.distance(&fixtures::fix_mix()).unwrap() < 1e-14);
        assert_eq!(spec.schema, SCHEMA);
    }

    #[test]
    fn parses_operator_form() {
        let text = r#"{"dim_H": 2, "dim_K": 2, "operator": [[1, 0], [0, 0]],
            "domain": [[1, 0]], "mul": [[0, 1]]}"#;
        let t: LinearRelation = RelationSpec::from_json(text)
            .unwrap()
            .to_relation(&cfg())
            .unwrap();
        assert!(t.distance(&fixtures::fix_mix()).unwrap() < 1e-14);

        let text = r#"{"dim_H": 2, "dim_K": 2, "operator": [[1, 0], [0, 2]]}"#;
        let t: LinearRelation = RelationSpec::from_json(text)
            .unwrap()
            .to_relation(&cfg())
            .unwrap();
        assert!(t.distance(&fixtures::fix_diag()).unwrap() < 1e-14);
    }

    #[test]
    fn complex_entries() {
        let text = r#"{"dim_H": 1, "dim_K": 1, "field": "complex",
            "generators": [{"f": [[1, 0]], "fp": [[0, 1]]}]}"#;
        let spec = RelationSpec::from_json(text).unwrap();
        let t: LinearRelation<Complex64> = spec.to_relation(&cfg()).unwrap();
        let a = t.operator_matrix(&cfg()).unwrap();
        assert!((a[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(spec.to_relation::<f64>(&cfg()).is_err());
        assert!(matches!(
            spec.load(&cfg()).unwrap(),
            AnyRelation::Complex(_)
        ));

        let back = RelationSpec::from_relation(&t);
        let again: LinearRelation<Complex64> = back.to_relation(&cfg()).unwrap();
        assert!(again.distance(&t).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            r#"{"dim_H": 2}"#,
            r#"{"dim_H": 2, "dim_K": 2}"#,
            r#"{"dim_H": 2, "dim_K": 2, "generators": [], "operator": [[1, 0], [0, 1]]}"#,
            r#"{"dim_H": 2, "dim_K": 2, "domain": [[1, 0]]}"#,
            r#"{"dim_H": 2, "dim_K": 2, "generators": [], "extra": 1}"#,
            r#"{"schema": "relspec/9", "dim_H": 2, "dim_K": 2, "generators": []}"#,
            r#"{"dim_H": 0, "dim_K": 2, "generators": []}"#,
            "not json",
        ];
        for text in cases {
            assert!(
                matches!(RelationSpec::from_json(text), Err(RelError::Input(_))),
                "{text}"
            );
        }
        let bad_len = r#"{"dim_H": 2, "dim_K": 2, "generators": [{"f": [1], "fp": [1, 0]}]}"#;
        let spec = RelationSpec::from_json(bad_len).unwrap();
        assert!(matches!(
            spec.to_relation::<f64>(&cfg()),
            Err(RelError::Input(_))
        ));
        let imag = r#"{"dim_H": 1, "dim_K": 1, "generators": [{"f": [[1, 2]], "fp": [1]}]}"#;
        let spec = RelationSpec::from_json(imag).unwrap();
        assert!(matches!(
            spec.to_relation::<f64>(&cfg()),
            Err(RelError::Input(_))
        ));
    }

    #[test]
    fn digest_ignores_key_order_and_whitespace() {
        let a = RelationSpec::from_json(MIX).unwrap();
        let b = RelationSpec::from_json(
            r#"{"generators":[{"fp":[1,0],"f":[1,0]},{"fp":[0,1],"f":[0,0]}],"field":"real","dim_K":2,"dim_H":2}"#,
        )
        .unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        let c = RelationSpec::from_json(&MIX.replace("[0, 1]", "[0, 2]")).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn round_trip_through_json() {
        let spec = RelationSpec::from_relation(&fixtures::fix_mix());
        let parsed = RelationSpec::from_json(&spec.to_json_pretty()).unwrap();
        assert_eq!(parsed, spec);
        let t: LinearRelation = parsed.to_relation(&cfg()).unwrap();
        assert!(t.distance(&fixtures::fix_mix()).unwrap() < 1e-14);
    }
}
