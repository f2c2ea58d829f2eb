//! Intrinsic Riemannian data at a point: metric samples, Christoffel symbols
//! and the Riemann tensor in a g-orthonormal frame.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::curvature::CurvatureTensor;
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet2};
use crate::linalg;

/// Smallest admissible metric eigenvalue.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-12;
/// Largest admissible metric condition number.
pub const MAX_METRIC_CONDITION: f64 = 1e12;
/// Default finite-difference step relative to the coordinate box width.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Axis-aligned open coordinate box.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordBox(pub Vec<(f64, f64)>);

impl CoordBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Invalid(format!("empty box along coordinate {axis}")));
            }
        }
        Ok(CoordBox(bounds))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.0[axis].1 - self.0[axis].0
    }

    pub fn contains(&self, p: &[f64]) -> Result<()> {
        for (axis, (&x, &(lo, hi))) in p.iter().zip(&self.0).enumerate() {
            if !(x > lo && x < hi) {
                return Err(Error::OutsideDomain { axis });
            }
        }
        Ok(())
    }

    /// Uniform grid with `per_axis` points per coordinate, shrunk by
    /// `margin` (fraction of the width) from each face. Points come out in
    /// row-major order, last coordinate fastest.
    pub fn grid(&self, per_axis: usize, margin: f64) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .0
            .iter()
            .map(|&(lo, hi)| {
                let w = hi - lo;
                let (a, b) = (lo + margin * w, hi - margin * w);
                if per_axis <= 1 {
                    vec![(a + b) / 2.0]
                } else {
                    (0..per_axis)
                        .map(|i| a + (b - a) * i as f64 / (per_axis - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Metric values and first derivatives at a point.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub g: DMatrix<f64>,
    /// `dg[k][(i, j)] = ∂_k g_ij`.
    pub dg: Vec<DMatrix<f64>>,
}

/// Anything that can produce a metric and its first derivatives on a chart.
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> &CoordBox;
    fn metric_sample(&self, p: &[f64]) -> Result<MetricSample>;
}

/// Metric given by expressions `g_ij(u)` (upper triangle stored).
#[derive(Debug, Clone)]
pub struct MetricField {
    dim: usize,
    entries: Vec<Expression>,
    domain: CoordBox,
    params: Vec<f64>,
}

impl MetricField {
    /// `entries` is the full `n×n` matrix; the upper triangle is used and the
    /// lower triangle must print identically.
    pub fn new(entries: Vec<Vec<Expression>>, domain: CoordBox, params: &BTreeMap<String, f64>) -> Result<Self> {
        let n = entries.len();
        if n < 1 {
            return Err(Error::Invalid("metric needs at least one coordinate".into()));
        }
        if domain.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: domain.dim(),
            });
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            if entries[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: entries[i].len(),
                });
            }
            for j in i..n {
                if entries[i][j].to_string() != entries[j][i].to_string() {
                    return Err(Error::Invalid(format!("metric entry ({i},{j}) differs from ({j},{i})")));
                }
                if entries[i][j].variables().len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: entries[i][j].variables().len(),
                    });
                }
                upper.push(entries[i][j].clone());
            }
        }
        let params = upper[0].bind(params)?;
        for e in &upper {
            e.bind(&e.parameters().iter().zip(&params).map(|(k, v)| (k.clone(), *v)).collect())?;
        }
        Ok(MetricField {
            dim: n,
            entries: upper,
            domain,
            params,
        })
    }

    /// Parse string entries with shared variables and parameters.
    pub fn from_strings(
        entries: &[Vec<&str>],
        variables: &[&str],
        domain: CoordBox,
        params: &BTreeMap<String, f64>,
    ) -> Result<Self> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let parsed = entries
            .iter()
            .map(|row| row.iter().map(|t| Expression::parse(t, variables, &names)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        MetricField::new(parsed, domain, params)
    }

    fn entry(&self, i: usize, j: usize) -> &Expression {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.entries[i * self.dim - i * (i + 1) / 2 + j]
    }

    /// Jets of all entries at `p`.
    pub fn jets(&self, p: &[f64]) -> Result<Vec<Vec<Jet2>>> {
        let n = self.dim;
        let mut out = vec![Vec::with_capacity(n); n];
        for (i, row) in out.iter_mut().enumerate() {
            for j in 0..n {
                row.push(self.entry(i, j).eval_bound(p, &self.params)?);
            }
        }
        Ok(out)
    }
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn metric_sample(&self, p: &[f64]) -> Result<MetricSample> {
        let n = self.dim;
        let jets = self.jets(p)?;
        let g = DMatrix::from_fn(n, n, |i, j| jets[i][j].value);
        let dg = (0..n)
            .map(|k| DMatrix::from_fn(n, n, |i, j| jets[i][j].gradient[k]))
            .collect();
        Ok(MetricSample { g, dg })
    }
}

/// Reject metrics that are not safely positive definite.
pub fn check_metric(g: &DMatrix<f64>) -> Result<()> {
    let (vals, _) = linalg::sym_eigen(g);
    let min = vals[0];
    let max = *vals.last().unwrap();
    if !(min > MIN_METRIC_EIGENVALUE) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let condition = max / min;
    if condition > MAX_METRIC_CONDITION {
        return Err(Error::SingularMetric { condition });
    }
    Ok(())
}

/// Christoffel symbols of the second kind, `get(k, i, j) = Γ^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn from_sample(sample: &MetricSample) -> Result<Self> {
        check_metric(&sample.g)?;
        let n = sample.g.nrows();
        let ginv = sample
            .g
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMetric { condition: f64::INFINITY })?;
        let dg = &sample.dg;
        // first kind: Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let first = |l: usize, i: usize, j: usize| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let s: f64 = (0..n).map(|l| ginv[(k, l)] * first(l, i, j)).sum();
                    data[(k * n + i) * n + j] = s;
                    data[(k * n + j) * n + i] = s;
                }
            }
        }
        Ok(Christoffel { n, data })
    }
}

pub fn christoffel(g: &dyn MetricSource, p: &[f64]) -> Result<Christoffel> {
    g.domain().contains(p)?;
    Christoffel::from_sample(&g.metric_sample(p)?)
}

/// Riemann tensor at `p` from central differences of the Christoffel symbols
/// (step `rel_step` times each box width), lowered by `g` and expressed in the
/// Gram-Schmidt g-orthonormal frame seeded by coordinate directions.
pub fn riemann_from_metric_with_step(g: &dyn MetricSource, p: &[f64], rel_step: f64) -> Result<CurvatureTensor> {
    let n = g.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let domain = g.domain();
    domain.contains(p)?;
    let sample = g.metric_sample(p)?;
    let gamma = Christoffel::from_sample(&sample)?;

    // dgamma[l] = ∂_l Γ, fourth-order central stencil: the charts we care
    // about have Γ blowing up at their walls, where h² error is visible
    let mut dgamma = Vec::with_capacity(n);
    for l in 0..n {
        let h = rel_step * domain.width(l);
        let (lo, hi) = domain.0[l];
        if !(p[l] - 2.0 * h > lo && p[l] + 2.0 * h < hi) {
            return Err(Error::StencilOutOfDomain { axis: l });
        }
        let at = |offset: f64| -> Result<Vec<f64>> {
            let mut q = p.to_vec();
            q[l] += offset * h;
            Ok(Christoffel::from_sample(&g.metric_sample(&q)?)?.data)
        };
        let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
        let d: Vec<f64> = (0..p1.len())
            .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h))
            .collect();
        dgamma.push(d);
    }
    let dg = |l: usize, k: usize, i: usize, j: usize| dgamma[l][(k * n + i) * n + j];

    // R^r_{s m v} = ∂_m Γ^r_{v s} − ∂_v Γ^r_{m s} + Γ^r_{m a} Γ^a_{v s} − Γ^r_{v a} Γ^a_{m s}
    let mut up = vec![0.0; n * n * n * n];
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for v in 0..n {
                    let mut val = dg(m, r, v, s) - dg(v, r, m, s);
                    for a in 0..n {
                        val += gamma.get(r, m, a) * gamma.get(a, v, s) - gamma.get(r, v, a) * gamma.get(a, m, s);
                    }
                    up[((r * n + s) * n + m) * n + v] = val;
                }
            }
        }
    }
    // lowered coordinate tensor, reordered so that K(X,Y) = R(X,Y;Y,X)
    let metric = &sample.g;
    let lowered = |i: usize, j: usize, l: usize, k: usize| -> f64 {
        (0..n).map(|a| metric[(i, a)] * up[((a * n + j) * n + l) * n + k]).sum()
    };
    let coord = CurvatureTensor::from_fn(n, DMatrix::identity(n, n), |i, j, k, l| lowered(i, j, l, k));
    let frame = linalg::orthonormal_frame(metric)?;
    Ok(coord.rotated(&frame))
}

pub fn riemann_from_metric(g: &dyn MetricSource, p: &[f64]) -> Result<CurvatureTensor> {
    riemann_from_metric_with_step(g, p, DEFAULT_FD_STEP)
}
