//! JSON input formats: BL data, polynomials, affine families, tensors.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bl::{BLDatum, LinearSubspace};
use crate::error::{Error, Result};
use crate::fremlin::{NonnegTensor, WeightedIndexSet};
use crate::harness::{AffineFamily, AffineSubspace};
use crate::polysurf::PolyNVars;

/// Basis rows moved by more than this on orthonormalisation are reported.
pub const ORTHONORMAL_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumJson {
    pub n: usize,
    pub subspaces: Vec<Vec<Vec<f64>>>,
    pub exponents: Vec<f64>,
}

impl DatumJson {
    /// Datum plus the largest basis adjustment made while orthonormalising.
    pub fn build(&self) -> Result<(BLDatum, f64)> {
        let mut subs = Vec::with_capacity(self.subspaces.len());
        let mut adj = 0.0f64;
        for rows in &self.subspaces {
            let (s, a) = LinearSubspace::from_rows_reporting(self.n, rows)?;
            adj = adj.max(a);
            subs.push(s);
        }
        let d = BLDatum::new(self.n, subs, self.exponents.clone())?;
        if adj > ORTHONORMAL_WARN {
            log::warn!("subspace bases were adjusted by up to {adj:.3e} during orthonormalisation");
        }
        Ok((d, adj))
    }

    pub fn from_datum(d: &BLDatum) -> Self {
        Self {
            n: d.dim(),
            subspaces: d.subspaces().iter().map(|s| s.basis().to_vec()).collect(),
            exponents: d.exponents().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub coef: f64,
}

/// `terms` is an expanded polynomial; `factors`, when present, are
/// multiplied in as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<TermJson>>>,
}

impl PolynomialJson {
    pub fn build(&self) -> Result<PolyNVars> {
        let conv = |ts: &[TermJson]| ts.iter().map(|t| (t.exps.clone(), t.coef)).collect::<Vec<_>>();
        let mut factors = Vec::new();
        if let Some(t) = &self.terms {
            factors.push(conv(t));
        }
        for f in self.factors.iter().flatten() {
            factors.push(conv(f));
        }
        if factors.is_empty() {
            return Err(Error::InvalidInput("polynomial has neither terms nor factors".into()));
        }
        PolyNVars::from_factors(self.n, factors)
    }

    pub fn from_poly(p: &PolyNVars) -> Self {
        Self {
            n: p.dim(),
            terms: Some(p.expand().into_iter().map(|(exps, coef)| TermJson { exps, coef }).collect()),
            factors: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberJson {
    pub point: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub k: usize,
    pub members: Vec<MemberJson>,
}

impl FamilyJson {
    /// Ambient dimension comes from the members, or `n` for an empty family.
    pub fn build(&self, n: usize) -> Result<AffineFamily> {
        let members = self
            .members
            .iter()
            .map(|m| AffineSubspace::new(m.point.clone(), &m.basis))
            .collect::<Result<Vec<_>>>()?;
        AffineFamily::new(n, self.k, members)
    }

    pub fn from_family(f: &AffineFamily) -> Self {
        Self {
            k: f.k(),
            members: f
                .members()
                .iter()
                .map(|t| MemberJson {
                    point: t.point().to_vec(),
                    basis: t.basis().to_vec(),
                })
                .collect(),
        }
    }
}

/// `entries` row-major over `shape`; optional positive `weights` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub shape: Vec<usize>,
    pub entries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
}

impl TensorJson {
    pub fn build(&self) -> Result<NonnegTensor> {
        match &self.weights {
            None => NonnegTensor::from_shape(&self.shape, self.entries.clone()),
            Some(w) => {
                if w.len() != self.shape.len() {
                    return Err(Error::InvalidInput("one weight vector per axis expected".into()));
                }
                let sets = w
                    .iter()
                    .zip(&self.shape)
                    .map(|(wj, &s)| {
                        if wj.len() != s {
                            return Err(Error::InvalidInput("weight vector length differs from shape".into()));
                        }
                        WeightedIndexSet::new((0..s).map(|i| i.to_string()).collect(), wj.clone())
                    })
                    .collect::<Result<Vec<_>>>()?;
                NonnegTensor::new(sets, self.entries.clone())
            }
        }
    }
}

/// Parse JSON text, reporting the source name and line on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, source: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: source.to_string(),
        detail: format!("line {} column {}: {e}", e.line(), e.column()),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datum_round_trip() {
        let text = r#"{"n": 2, "subspaces": [[[2.0, 0.0]], [[0.0, 1.0]]], "exponents": [1.0, 1.0]}"#;
        let j: DatumJson = parse_json(text, "inline").unwrap();
        let (d, adj) = j.build().unwrap();
        assert!(adj > 0.5);
        assert_eq!(d.codims(), vec![1, 1]);
        let back = DatumJson::from_datum(&d);
        assert_eq!(back.subspaces[0], vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn bad_json_reports_line() {
        let err = parse_json::<DatumJson>("{\n\"n\": 2,\n\"subspaces\": oops}", "cfg.json").unwrap_err();
        match err {
            Error::Parse { path, detail } => {
                assert_eq!(path, "cfg.json");
                assert!(detail.starts_with("line 3"), "{detail}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polynomial_and_family() {
        let text = r#"{"n": 2, "terms": [{"exps": [2, 0], "coef": 1.0}, {"exps": [0, 0], "coef": -1.0}],
                       "factors": [[{"exps": [0, 1], "coef": 1.0}]]}"#;
        let p = parse_json::<PolynomialJson>(text, "p").unwrap().build().unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.eval(&[2.0, 3.0]), 9.0);
        let f: FamilyJson = parse_json(r#"{"k": 1, "members": [{"point": [0, 0], "basis": [[1, 1]]}]}"#, "f").unwrap();
        let fam = f.build(2).unwrap();
        assert!((fam.members()[0].basis()[0][0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(FamilyJson::from_family(&fam).members.len(), 1);
    }

    #[test]
    fn tensor_weights() {
        let t: TensorJson = parse_json(r#"{"shape": [2, 1], "entries": [1, 2], "weights": [[1, 3], [2]]}"#, "t").unwrap();
        let nt = t.build().unwrap();
        assert_eq!(nt.sets[0].weights, vec![1.0, 3.0]);
        let bad: TensorJson = parse_json(r#"{"shape": [2], "entries": [1, 2], "weights": [[1]]}"#, "t").unwrap();
        assert!(bad.build().is_err());
    }
}
