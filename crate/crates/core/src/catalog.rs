//! Built-in manifolds, resolvable by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::applications::{ManifoldKind, ManifoldRecord, Topology, WarpedSpec};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::extrinsic::ImmersionField;
use crate::geometry::{CoordBox, MetricField};
use crate::lagrangian;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: ManifoldKind,
    pub description: &'static str,
}

pub fn list() -> Vec<CatalogEntry> {
    use ManifoldKind::*;
    vec![
        CatalogEntry {
            name: "sphere:n[:r]",
            kind: Immersion,
            description: "round n-sphere of radius r (default 1) in E^(n+1), hyperspherical chart",
        },
        CatalogEntry {
            name: "rp:n",
            kind: Metric,
            description: "real projective space RP^n(1), hemisphere chart of the round metric",
        },
        CatalogEntry {
            name: "hypercylinder:p:q",
            kind: Immersion,
            description: "E^p x S^q(1) in E^(p+q+1) (default 1:2)",
        },
        CatalogEntry {
            name: "clifford-torus",
            kind: Immersion,
            description: "S^1(1/sqrt 2) x S^1(1/sqrt 2) in E^4",
        },
        CatalogEntry {
            name: "catenoid",
            kind: Immersion,
            description: "minimal catenoid (cosh v cos u, cosh v sin u, v) in E^3",
        },
        CatalogEntry {
            name: "whitney:n",
            kind: Immersion,
            description: "Whitney sphere in C^n, chart origin at the double point",
        },
        CatalogEntry {
            name: "warped-s2",
            kind: Warped,
            description: "unit 2-sphere as (-pi/2, pi/2) x_cos S^1",
        },
        CatalogEntry {
            name: "flat-torus",
            kind: Metric,
            description: "square flat torus R^2/Z^2",
        },
    ]
}

fn parse_dim(s: Option<&str>, name: &str) -> Result<usize> {
    let s = s.ok_or_else(|| Error::Invalid(format!("`{name}` needs a dimension")))?;
    let n: usize = s
        .parse()
        .map_err(|_| Error::Invalid(format!("bad dimension `{s}` in `{name}`")))?;
    if n < 1 {
        return Err(Error::Invalid(format!("dimension must be positive in `{name}`")));
    }
    Ok(n)
}

pub fn resolve(name: &str) -> Result<ManifoldRecord> {
    let mut it = name.split(':');
    let head = it.next().unwrap_or_default();
    let rec = match head {
        "sphere" => {
            let n = parse_dim(it.next(), name)?;
            let r = match it.next() {
                Some(s) => s
                    .parse::<f64>()
                    .ok()
                    .filter(|r| *r > 0.0 && r.is_finite())
                    .ok_or_else(|| Error::Invalid(format!("bad radius `{s}`")))?,
                None => 1.0,
            };
            sphere(n, r)?
        }
        "rp" => real_projective(parse_dim(it.next(), name)?)?,
        "hypercylinder" => {
            let p = it.next().map(|s| parse_dim(Some(s), name)).transpose()?.unwrap_or(1);
            let q = it.next().map(|s| parse_dim(Some(s), name)).transpose()?.unwrap_or(2);
            hypercylinder(p, q)?
        }
        "clifford-torus" => clifford_torus()?,
        "catenoid" => catenoid()?,
        "whitney" => whitney(parse_dim(it.next(), name)?)?,
        "warped-s2" => warped_s2()?,
        "flat-torus" => flat_torus()?,
        _ => return Err(Error::Invalid(format!("unknown catalog entry `{name}`"))),
    };
    if it.next().is_some() {
        return Err(Error::Invalid(format!("too many fields in `{name}`")));
    }
    rec.validate()?;
    Ok(rec)
}

/// Volume of the unit n-sphere, `V(n) = 2π/(n−1)·V(n−2)`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_volume(n - 2),
    }
}

/// Variables `t1..t(n−1), phi` of the hyperspherical chart.
fn sphere_vars(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..n).map(|i| format!("t{i}")).collect();
    v.push("phi".into());
    v
}

/// Components of the radius-`r` sphere over `vars` (`r` a literal or name).
fn sphere_components(vars: &[String], r: &str) -> Vec<String> {
    let n = vars.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut prefix = r.to_string();
    for v in &vars[..n - 1] {
        out.push(format!("{prefix}*cos({v})"));
        prefix = format!("{prefix}*sin({v})");
    }
    out.push(format!("{prefix}*cos(phi)"));
    out.push(format!("{prefix}*sin(phi)"));
    out
}

fn sphere_domain(n: usize, first_hi: f64) -> Vec<(f64, f64)> {
    let mut d = vec![(0.0, PI); n - 1];
    if n > 1 {
        d[0] = (0.0, first_hi);
    }
    d.push((0.0, 2.0 * PI));
    d
}

fn sphere_metric_entries(vars: &[String], r: &str) -> Vec<Vec<String>> {
    let n = vars.len();
    let mut diag = Vec::with_capacity(n);
    let mut w = format!("{r}^2");
    for v in vars {
        diag.push(w.clone());
        w = format!("{w}*sin({v})^2");
    }
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { "0".to_string() }).collect())
        .collect()
}

fn metric_from(entries: &[Vec<String>], vars: &[String], domain: CoordBox, params: &BTreeMap<String, f64>) -> Result<MetricField> {
    let e: Vec<Vec<&str>> = entries.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let v: Vec<&str> = vars.iter().map(String::as_str).collect();
    MetricField::from_strings(&e, &v, domain, params)
}

fn immersion_from(comps: &[String], vars: &[String], domain: CoordBox, params: BTreeMap<String, f64>) -> Result<ImmersionField> {
    let c: Vec<&str> = comps.iter().map(String::as_str).collect();
    let v: Vec<&str> = vars.iter().map(String::as_str).collect();
    ImmersionField::from_strings(&c, &v, domain, params)
}

pub fn sphere(n: usize, r: f64) -> Result<ManifoldRecord> {
    if n < 2 {
        return Err(Error::Invalid("sphere needs n >= 2".into()));
    }
    let vars = sphere_vars(n);
    let params = BTreeMap::from([("r".to_string(), r)]);
    let domain = CoordBox::new(sphere_domain(n, PI))?;
    let mut rec = ManifoldRecord::new(format!("sphere:{n}:{r}"), ManifoldKind::Immersion);
    rec.immersion = Some(immersion_from(&sphere_components(&vars, "r"), &vars, domain.clone(), params.clone())?);
    rec.metric = Some(metric_from(&sphere_metric_entries(&vars, "r"), &vars, domain, &params)?);
    rec.lambda1 = Some(n as f64 / (r * r));
    rec.volume = Some(unit_sphere_volume(n) * r.powi(n as i32));
    rec.topology = Some(Topology {
        b1_zero: true,
        finite_pi1: true,
    });
    rec.homogeneous = true;
    Ok(rec)
}

pub fn real_projective(n: usize) -> Result<ManifoldRecord> {
    if n < 2 {
        return Err(Error::Invalid("rp needs n >= 2".into()));
    }
    let vars = sphere_vars(n);
    let domain = CoordBox::new(sphere_domain(n, PI / 2.0))?;
    let mut rec = ManifoldRecord::new(format!("rp:{n}"), ManifoldKind::Metric);
    rec.metric = Some(metric_from(&sphere_metric_entries(&vars, "1"), &vars, domain, &BTreeMap::new())?);
    rec.lambda1 = Some(2.0 * (n as f64 + 1.0));
    rec.volume = Some(unit_sphere_volume(n) / 2.0);
    rec.topology = Some(Topology {
        b1_zero: true,
        finite_pi1: true,
    });
    rec.homogeneous = true;
    Ok(rec)
}

pub fn hypercylinder(p: usize, q: usize) -> Result<ManifoldRecord> {
    let mut vars: Vec<String> = (1..=p).map(|i| format!("u{i}")).collect();
    let svars = sphere_vars(q);
    let mut comps = vars.clone();
    comps.extend(sphere_components(&svars, "1"));
    vars.extend(svars);
    let mut d = vec![(-1.0, 1.0); p];
    d.extend(sphere_domain(q, PI));
    let mut rec = ManifoldRecord::new(format!("hypercylinder:{p}:{q}"), ManifoldKind::Immersion);
    rec.immersion = Some(immersion_from(&comps, &vars, CoordBox::new(d)?, BTreeMap::new())?);
    Ok(rec)
}

pub fn clifford_torus() -> Result<ManifoldRecord> {
    let vars = vec!["u".to_string(), "v".to_string()];
    let comps: Vec<String> = ["cos(u)", "sin(u)", "cos(v)", "sin(v)"]
        .iter()
        .map(|c| format!("{c}/sqrt(2)"))
        .collect();
    let domain = CoordBox::new(vec![(0.0, 2.0 * PI); 2])?;
    let mut rec = ManifoldRecord::new("clifford-torus", ManifoldKind::Immersion);
    rec.immersion = Some(immersion_from(&comps, &vars, domain, BTreeMap::new())?);
    // circles of length √2·π: eigenvalues 2(k² + l²)
    rec.lambda1 = Some(2.0);
    rec.volume = Some(2.0 * PI * PI);
    rec.topology = Some(Topology {
        b1_zero: false,
        finite_pi1: false,
    });
    rec.homogeneous = true;
    Ok(rec)
}

pub fn catenoid() -> Result<ManifoldRecord> {
    let vars = vec!["u".to_string(), "v".to_string()];
    let comps = vec!["cosh(v)*cos(u)".to_string(), "cosh(v)*sin(u)".to_string(), "v".to_string()];
    let domain = CoordBox::new(vec![(-PI, PI), (-1.0, 1.0)])?;
    let mut rec = ManifoldRecord::new("catenoid", ManifoldKind::Immersion);
    rec.immersion = Some(immersion_from(&comps, &vars, domain, BTreeMap::new())?);
    // a cylinder topologically
    rec.topology = Some(Topology {
        b1_zero: false,
        finite_pi1: false,
    });
    Ok(rec)
}

pub fn whitney(n: usize) -> Result<ManifoldRecord> {
    let mut rec = ManifoldRecord::new(format!("whitney:{n}"), ManifoldKind::Immersion);
    rec.immersion = Some(lagrangian::whitney_immersion(n)?);
    rec.topology = Some(Topology {
        b1_zero: true,
        finite_pi1: true,
    });
    rec.lagrangian = true;
    Ok(rec)
}

pub fn warped_s2() -> Result<ManifoldRecord> {
    let none = BTreeMap::new();
    let base = MetricField::from_strings(&[vec!["1"]], &["t"], CoordBox::new(vec![(-PI / 2.0, PI / 2.0)])?, &none)?;
    let fiber = MetricField::from_strings(&[vec!["1"]], &["s"], CoordBox::new(vec![(-PI, PI)])?, &none)?;
    let f = Expression::parse("cos(t)", &["t"], &[] as &[&str])?;
    let mut rec = ManifoldRecord::new("warped-s2", ManifoldKind::Warped);
    rec.warped = Some(WarpedSpec::new(base, fiber, f, &none)?);
    rec.immersion = Some(ImmersionField::from_strings(
        &["cos(t)*cos(s)", "cos(t)*sin(s)", "sin(t)"],
        &["t", "s"],
        CoordBox::new(vec![(-PI / 2.0, PI / 2.0), (-PI, PI)])?,
        none,
    )?);
    rec.lambda1 = Some(2.0);
    rec.volume = Some(4.0 * PI);
    rec.topology = Some(Topology {
        b1_zero: true,
        finite_pi1: true,
    });
    rec.homogeneous = true;
    Ok(rec)
}

pub fn flat_torus() -> Result<ManifoldRecord> {
    let vars = vec!["x".to_string(), "y".to_string()];
    let entries = vec![vec!["1".to_string(), "0".to_string()], vec!["0".to_string(), "1".to_string()]];
    let mut rec = ManifoldRecord::new("flat-torus", ManifoldKind::Metric);
    rec.metric = Some(metric_from(&entries, &vars, CoordBox::new(vec![(0.0, 1.0); 2])?, &BTreeMap::new())?);
    rec.lambda1 = Some(4.0 * PI * PI);
    rec.volume = Some(1.0);
    rec.topology = Some(Topology {
        b1_zero: false,
        finite_pi1: false,
    });
    rec.homogeneous = true;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrinsic;
    use crate::geometry::MetricSource;

    #[test]
    fn sphere_volumes() {
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((unit_sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn every_listed_entry_resolves() {
        for name in ["sphere:2", "sphere:3:2", "rp:3", "hypercylinder", "hypercylinder:1:1", "clifford-torus", "catenoid", "whitney:3", "warped-s2", "flat-torus"] {
            let rec = resolve(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let p = rec.sample(1).remove(0);
            rec.sample_point(&p).unwrap();
        }
        assert!(resolve("sphere").is_err());
        assert!(resolve("torus").is_err());
        assert!(resolve("sphere:3:-1").is_err());
        assert!(resolve("rp:3:1").is_err());
    }

    #[test]
    fn sphere_immersion_and_metric_agree() {
        let rec = resolve("sphere:3:2").unwrap();
        let p = [0.7, 1.9, 2.5];
        let induced = rec.immersion.as_ref().unwrap().metric_sample(&p).unwrap();
        let given = rec.metric.as_ref().unwrap().metric_sample(&p).unwrap();
        assert!((induced.g - given.g).abs().max() < 1e-12);
        let h2 = extrinsic::PointGeometry::at(rec.immersion.as_ref().unwrap(), &p).unwrap().mean.h2;
        assert!((h2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn hypercylinder_mean_curvature() {
        for (p, q) in [(1, 1), (1, 2), (2, 2)] {
            let rec = hypercylinder(p, q).unwrap();
            let x = rec.sample(1).remove(0);
            let h2 = extrinsic::PointGeometry::at(rec.immersion.as_ref().unwrap(), &x).unwrap().mean.h2;
            let expect = (q as f64 / (p + q) as f64).powi(2);
            assert!((h2 - expect).abs() < 1e-12, "{p}:{q}");
        }
    }
}
