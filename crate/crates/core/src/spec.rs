//! JSON spec documents describing a manifold, validated before any numerics.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::applications::{ManifoldKind, ManifoldRecord, PointData, Topology, WarpedSpec};
use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::extrinsic::{self, ImmersionField, SecondFundamentalForm};
use crate::geometry::{CoordBox, MetricField, MetricSource};

/// A metric factor of a warped product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDocument {
    pub variables: Vec<String>,
    pub metric: Vec<Vec<String>>,
    pub domain: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedDocument {
    pub base: FactorDocument,
    pub fiber: FactorDocument,
    pub warping: String,
    #[serde(default)]
    pub base_compact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub kind: ManifoldKind,
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    #[serde(default)]
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warped: Option<WarpedDocument>,
    #[serde(default)]
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub homogeneous: bool,
    /// `R(i,j,k,l)` in an orthonormal frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<Vec<Vec<Vec<Vec<f64>>>>>,
    /// `h[r][i][j]` in orthonormal tangent and normal frames.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<Vec<f64>>>>,
    /// Constant curvature of the ambient space form (point data only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_c: Option<f64>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Schema { .. } => e,
        other => schema(path, other.to_string()),
    }
}

fn domain_box(path: &str, d: &[[f64; 2]], dim: usize) -> Result<CoordBox> {
    if d.len() != dim {
        return Err(schema(path, format!("expected {dim} intervals, got {}", d.len())));
    }
    for (i, [lo, hi]) in d.iter().enumerate() {
        if !(lo < hi) {
            return Err(schema(format!("{path}[{i}]"), "empty box"));
        }
    }
    CoordBox::new(d.iter().map(|[a, b]| (*a, *b)).collect()).map_err(|e| at(path, e))
}

fn metric_field(path: &str, vars: &[String], metric: &[Vec<String>], domain: CoordBox, params: &BTreeMap<String, f64>) -> Result<MetricField> {
    let n = vars.len();
    if metric.len() != n {
        return Err(schema(path, format!("expected {n} rows, got {}", metric.len())));
    }
    let names: Vec<&str> = params.keys().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(n);
    for (i, row) in metric.iter().enumerate() {
        if row.len() != n {
            return Err(schema(format!("{path}[{i}]"), format!("expected {n} entries, got {}", row.len())));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, t)| Expression::parse(t, vars, &names).map_err(|e| at(&format!("{path}[{i}][{j}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(parsed);
    }
    MetricField::new(rows, domain, params).map_err(|e| at(path, e))
}

impl SpecDocument {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: SpecDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(format!("$.{path}").trim_end_matches('.').to_string(), e.into_inner().to_string())
        })?;
        doc.to_record()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    fn require<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| schema(format!("$.{name}"), format!("required for kind {:?}", self.kind)))
    }

    fn chart(&self) -> Result<CoordBox> {
        if self.variables.len() != self.dim {
            return Err(schema("$.variables", format!("expected {} names, got {}", self.dim, self.variables.len())));
        }
        domain_box("$.domain", &self.domain, self.dim)
    }

    /// Build the manifold record; every expression is parsed here.
    pub fn to_record(&self) -> Result<ManifoldRecord> {
        if self.dim < 1 {
            return Err(schema("$.dim", "must be positive"));
        }
        let mut rec = ManifoldRecord::new(self.name.clone(), self.kind);
        match self.kind {
            ManifoldKind::Immersion => {
                let comps = self.require(&self.components, "components")?;
                if let Some(m) = self.ambient_dim {
                    if m != comps.len() {
                        return Err(schema("$.ambient_dim", format!("{m} differs from {} components", comps.len())));
                    }
                }
                let domain = self.chart()?;
                let names: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
                let parsed = comps
                    .iter()
                    .enumerate()
                    .map(|(i, c)| Expression::parse(c, &self.variables, &names).map_err(|e| at(&format!("$.components[{i}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                rec.immersion = Some(ImmersionField::new(parsed, domain, self.parameters.clone()).map_err(|e| at("$.components", e))?);
            }
            ManifoldKind::Metric => {
                let metric = self.require(&self.metric, "metric")?;
                let domain = self.chart()?;
                rec.metric = Some(metric_field("$.metric", &self.variables, metric, domain, &self.parameters)?);
            }
            ManifoldKind::Warped => {
                let w = self.require(&self.warped, "warped")?;
                let base_dom = domain_box("$.warped.base.domain", &w.base.domain, w.base.variables.len())?;
                let fiber_dom = domain_box("$.warped.fiber.domain", &w.fiber.domain, w.fiber.variables.len())?;
                let base = metric_field("$.warped.base.metric", &w.base.variables, &w.base.metric, base_dom, &self.parameters)?;
                let fiber = metric_field("$.warped.fiber.metric", &w.fiber.variables, &w.fiber.metric, fiber_dom, &self.parameters)?;
                if base.dim() + fiber.dim() != self.dim {
                    return Err(schema("$.dim", format!("base and fiber have total dimension {}", base.dim() + fiber.dim())));
                }
                let names: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
                let f = Expression::parse(&w.warping, &w.base.variables, &names).map_err(|e| at("$.warped.warping", e))?;
                let spec = WarpedSpec::new(base, fiber, f, &self.parameters).map_err(|e| at("$.warped", e))?;
                rec.warped = Some(spec.with_compact_base(w.base_compact));
            }
            ManifoldKind::PointData => {
                let c = self.ambient_c.unwrap_or(0.0);
                let sff = match &self.h {
                    Some(h) => {
                        let sff = SecondFundamentalForm::from_nested(h).map_err(|e| at("$.h", e))?;
                        if sff.dim() != self.dim {
                            return Err(schema("$.h", format!("tangent dimension {} differs from dim", sff.dim())));
                        }
                        Some(sff)
                    }
                    None => None,
                };
                let curvature = match (&self.curvature, &sff) {
                    (Some(r), _) => {
                        let r = CurvatureTensor::from_nested(r).map_err(|e| at("$.curvature", e))?;
                        if r.dim() != self.dim {
                            return Err(schema("$.curvature", format!("dimension {} differs from dim", r.dim())));
                        }
                        r
                    }
                    (None, Some(h)) => extrinsic::curvature_via_gauss(h, c),
                    (None, None) => return Err(schema("$.curvature", "point data needs curvature or h")),
                };
                rec.point_data = Some(PointData { curvature, sff, c });
            }
        }
        rec.lambda1 = self.lambda1;
        rec.volume = self.volume;
        rec.topology = self.topology;
        rec.homogeneous = self.homogeneous;
        rec.lagrangian = self.kind == ManifoldKind::Immersion && self.components.as_ref().is_some_and(|c| c.len() == 2 * self.dim);
        rec.validate().map_err(|e| at("$", e))?;
        Ok(rec)
    }
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SpecDocument> {
    let text = std::fs::read_to_string(path.as_ref())?;
    SpecDocument::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = r#"{
        "kind": "immersion", "name": "s3", "dim": 3, "ambient_dim": 4,
        "variables": ["a", "b", "c"],
        "components": ["cos(a)", "sin(a)*cos(b)", "sin(a)*sin(b)*cos(c)", "sin(a)*sin(b)*sin(c)"],
        "domain": [[0.1, 3.0], [0.1, 3.0], [0, 6.2]]
    }"#;

    #[test]
    fn sphere_document() {
        let doc = SpecDocument::from_json_str(SPHERE).unwrap();
        assert_eq!(doc.kind, ManifoldKind::Immersion);
        assert_eq!((doc.dim, doc.ambient_dim), (3, Some(4)));
        let again = SpecDocument::from_json_str(&doc.to_json()).unwrap();
        assert_eq!(again, doc);
    }

    fn err_path(text: &str) -> (String, String) {
        match SpecDocument::from_json_str(text).unwrap_err() {
            Error::Schema { path, message } => (path, message),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let missing = SPHERE.replace(r#""components""#, r#""comps""#);
        let (path, _) = err_path(&missing);
        assert!(path.contains("comps") || path.contains("components"), "{path}");
        let no_comp: serde_json::Value = {
            let mut v: serde_json::Value = serde_json::from_str(SPHERE).unwrap();
            v.as_object_mut().unwrap().remove("components");
            v
        };
        assert_eq!(err_path(&no_comp.to_string()).0, "$.components");
        let empty = SPHERE.replace("[0.1, 3.0], [0.1, 3.0], [0, 6.2]", "[1, 0], [0.1, 3.0], [0, 6.2]");
        let (path, msg) = err_path(&empty);
        assert_eq!((path.as_str(), msg.as_str()), ("$.domain[0]", "empty box"));
        let syntax = SPHERE.replace("sin(a)*cos(b)", "sin(a)*");
        let (path, msg) = err_path(&syntax);
        assert_eq!(path, "$.components[1]");
        assert!(msg.contains("offset"), "{msg}");
        let bad_type = SPHERE.replace(r#""dim": 3"#, r#""dim": "three""#);
        assert_eq!(err_path(&bad_type).0, "$.dim");
    }

    #[test]
    fn warped_and_point_documents() {
        let warped = r#"{
            "kind": "warped", "name": "s2", "dim": 2,
            "warped": {
                "base": {"variables": ["t"], "metric": [["1"]], "domain": [[-1.5, 1.5]]},
                "fiber": {"variables": ["s"], "metric": [["1"]], "domain": [[-3, 3]]},
                "warping": "cos(t)"
            }
        }"#;
        let rec = SpecDocument::from_json_str(warped).unwrap().to_record().unwrap();
        assert_eq!(rec.dim(), 2);
        let point = r#"{
            "kind": "point-data", "name": "umbilic", "dim": 2,
            "h": [[[1, 0], [0, 1]]]
        }"#;
        let rec = SpecDocument::from_json_str(point).unwrap().to_record().unwrap();
        let s = rec.sample_point(&[]).unwrap();
        assert!((s.curvature.get(0, 1, 1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(s.h2, Some(1.0));
        let neither = r#"{"kind": "point-data", "name": "x", "dim": 2}"#;
        assert_eq!(err_path(neither).0, "$.curvature");
    }
}
