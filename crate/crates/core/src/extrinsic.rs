//! Extrinsic geometry of immersions into Euclidean space: induced metric,
//! second fundamental form, mean curvature, the Gauss equation, and the
//! pointwise checks built on them.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::combinatorics::TupleSpec;
use crate::curvature::CurvatureTensor;
use crate::delta::{self, DeltaResult, OptimizerOptions, SubspaceTuple};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet2};
use crate::geometry::{self, CoordBox, MetricSample, MetricSource};
use crate::linalg;

pub const DEFAULT_STRUCTURE_TOL: f64 = 1e-5;
pub const DEFAULT_MARGIN_TOL: f64 = 1e-6;
/// Smallest admissible singular value of the Jacobian.
pub const MIN_JACOBIAN_SINGULAR_VALUE: f64 = 1e-8;

/// Immersion `u ↦ (f¹(u),…,f^m(u))` of a coordinate box into `E^m`.
#[derive(Debug, Clone)]
pub struct ImmersionField {
    dim: usize,
    components: Vec<Expression>,
    domain: CoordBox,
    params: BTreeMap<String, f64>,
}

impl ImmersionField {
    pub fn new(components: Vec<Expression>, domain: CoordBox, params: BTreeMap<String, f64>) -> Result<Self> {
        let m = components.len();
        let n = domain.dim();
        if n < 2 {
            return Err(Error::Invalid("immersion dimension must be >= 2".into()));
        }
        if m <= n {
            return Err(Error::Invalid(format!("ambient dimension {m} must exceed {n}")));
        }
        for c in &components {
            if c.variables().len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.variables().len(),
                });
            }
            c.bind(&params)?;
        }
        Ok(ImmersionField {
            dim: n,
            components,
            domain,
            params,
        })
    }

    pub fn from_strings(components: &[&str], variables: &[&str], domain: CoordBox, params: BTreeMap<String, f64>) -> Result<Self> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let parsed = components
            .iter()
            .map(|t| Expression::parse(t, variables, &names))
            .collect::<Result<Vec<_>>>()?;
        ImmersionField::new(parsed, domain, params)
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn jets(&self, p: &[f64]) -> Result<Vec<Jet2>> {
        self.components.iter().map(|c| c.eval_jet2(p, &self.params)).collect()
    }

    pub fn position(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.jets(p)?.iter().map(|j| j.value).collect()))
    }

    /// `m×n` Jacobian.
    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.jets(p)?;
        Ok(jacobian_of(&jets, self.dim))
    }

    /// Errors unless the Jacobian has full rank `n` at `p`.
    pub fn check_rank(&self, p: &[f64]) -> Result<()> {
        let j = self.jacobian(p)?;
        let sigma = j.singular_values().min();
        if !(sigma > MIN_JACOBIAN_SINGULAR_VALUE) {
            return Err(Error::RankDeficient { sigma });
        }
        Ok(())
    }
}

fn jacobian_of(jets: &[Jet2], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(jets.len(), n, |a, i| jets[a].gradient[i])
}

impl MetricSource for ImmersionField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    /// Induced metric `g = JᵀJ` and `∂_k g_ij = Σ (∂_ki f ∂_j f + ∂_i f ∂_kj f)`.
    fn metric_sample(&self, p: &[f64]) -> Result<MetricSample> {
        let n = self.dim;
        let jets = self.jets(p)?;
        let jac = jacobian_of(&jets, n);
        let g = jac.transpose() * &jac;
        let dg = (0..n)
            .map(|k| {
                DMatrix::from_fn(n, n, |i, j| {
                    jets.iter()
                        .map(|f| f.hessian(k, i) * f.gradient[j] + f.gradient[i] * f.hessian(k, j))
                        .sum()
                })
            })
            .collect();
        Ok(MetricSample { g, dg })
    }
}

/// Second fundamental form at a point in a tangent and a normal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    /// Tangent frame vectors (columns) in chart coordinates.
    tangent_frame: DMatrix<f64>,
    /// The same frame pushed into the ambient space (`m×n`), when known.
    tangent_ambient: Option<DMatrix<f64>>,
    /// Orthonormal normal vectors (columns), ambient coordinates or abstract.
    normal_frame: DMatrix<f64>,
    /// `components[r][(i, j)] = h^r_ij`.
    components: Vec<DMatrix<f64>>,
}

impl SecondFundamentalForm {
    /// Abstract form from components `h^r_ij` in orthonormal frames.
    pub fn from_components(components: Vec<DMatrix<f64>>) -> Result<Self> {
        let q = components.len();
        if q == 0 {
            return Err(Error::Invalid("second fundamental form needs a normal direction".into()));
        }
        let n = components[0].nrows();
        let mut sym = Vec::with_capacity(q);
        for c in components {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.nrows() });
            }
            if linalg::max_abs(&(&c - c.transpose())) > 1e-12 {
                return Err(Error::Invalid("h^r must be symmetric".into()));
            }
            sym.push((&c + c.transpose()) * 0.5);
        }
        Ok(SecondFundamentalForm {
            tangent_frame: DMatrix::identity(n, n),
            tangent_ambient: None,
            normal_frame: DMatrix::identity(q, q),
            components: sym,
        })
    }

    /// Parse a nested `[r][i][j]` array.
    pub fn from_nested(values: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mats = values
            .iter()
            .map(|m| {
                let n = m.len();
                if m.iter().any(|row| row.len() != n) {
                    return Err(Error::Invalid("h^r must be square".into()));
                }
                Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        SecondFundamentalForm::from_components(mats)
    }

    pub fn dim(&self) -> usize {
        self.tangent_frame.ncols()
    }

    pub fn codim(&self) -> usize {
        self.components.len()
    }

    pub fn tangent_frame(&self) -> &DMatrix<f64> {
        &self.tangent_frame
    }

    pub fn tangent_ambient(&self) -> Option<&DMatrix<f64>> {
        self.tangent_ambient.as_ref()
    }

    pub fn normal_frame(&self) -> &DMatrix<f64> {
        &self.normal_frame
    }

    pub fn component(&self, r: usize, i: usize, j: usize) -> f64 {
        self.components[r][(i, j)]
    }

    /// Shape operator `A_{e_r}` as a matrix in the tangent frame.
    pub fn shape_operator(&self, r: usize) -> &DMatrix<f64> {
        &self.components[r]
    }

    pub fn shape_operators(&self) -> &[DMatrix<f64>] {
        &self.components
    }

    /// `h(e_i, e_j)` in the coordinates of the normal frame's ambient space.
    pub fn vector(&self, i: usize, j: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.normal_frame.nrows());
        for (r, c) in self.components.iter().enumerate() {
            v += self.normal_frame.column(r) * c[(i, j)];
        }
        v
    }

    /// Re-express in another orthonormal basis of the same normal space.
    pub fn in_normal_frame(&self, frame: DMatrix<f64>) -> Result<Self> {
        if frame.nrows() != self.normal_frame.nrows() || frame.ncols() != self.codim() {
            return Err(Error::DimensionMismatch {
                expected: self.codim(),
                got: frame.ncols(),
            });
        }
        let overlap = frame.transpose() * &self.normal_frame;
        let n = self.dim();
        let components = (0..self.codim())
            .map(|s| {
                let mut m = DMatrix::zeros(n, n);
                for (r, c) in self.components.iter().enumerate() {
                    m += c * overlap[(s, r)];
                }
                m
            })
            .collect();
        Ok(SecondFundamentalForm {
            tangent_frame: self.tangent_frame.clone(),
            tangent_ambient: self.tangent_ambient.clone(),
            normal_frame: frame,
            components,
        })
    }

    /// Re-express in a rotated tangent frame; columns of `q` are the new
    /// vectors in the current frame.
    pub fn in_tangent_frame(&self, q: &DMatrix<f64>) -> Self {
        SecondFundamentalForm {
            tangent_frame: &self.tangent_frame * q,
            tangent_ambient: self.tangent_ambient.as_ref().map(|t| t * q),
            normal_frame: self.normal_frame.clone(),
            components: self.components.iter().map(|c| q.transpose() * c * q).collect(),
        }
    }
}

/// Normal-frame construction: ambient coordinate directions with tangential
/// parts removed, Gram-Schmidt in index order.
fn normal_frame(tangent: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, n) = tangent.shape();
    let mut normals: Vec<DVector<f64>> = Vec::with_capacity(m - n);
    for a in 0..m {
        if normals.len() == m - n {
            break;
        }
        let mut v = DVector::zeros(m);
        v[a] = 1.0;
        for _ in 0..2 {
            let proj = tangent * (tangent.transpose() * &v);
            v -= proj;
            for w in &normals {
                let d = w.dot(&v);
                v -= w * d;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            normals.push(v / norm);
        }
    }
    if normals.len() != m - n {
        return Err(Error::Invalid("normal space dimension mismatch".into()));
    }
    Ok(DMatrix::from_columns(&normals))
}

/// `h(e_i, e_j)` = normal part of the ambient Hessian contracted with the
/// g-orthonormal frame, from exact jets.
pub fn second_fundamental_form(f: &ImmersionField, p: &[f64]) -> Result<SecondFundamentalForm> {
    let n = f.dim;
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    f.domain.contains(p)?;
    let jets = f.jets(p)?;
    let jac = jacobian_of(&jets, n);
    let sigma = jac.singular_values().min();
    if !(sigma > MIN_JACOBIAN_SINGULAR_VALUE) {
        return Err(Error::RankDeficient { sigma });
    }
    let g = jac.transpose() * &jac;
    geometry::check_metric(&g)?;
    let frame = linalg::orthonormal_frame(&g)?;
    let tangent = &jac * &frame;
    let normals = normal_frame(&tangent)?;
    let q = normals.ncols();
    let mut components = vec![DMatrix::zeros(n, n); q];
    for a in 0..n {
        for b in a..n {
            // ambient Hessian along (e_a, e_b)
            let hv = DVector::from_fn(jets.len(), |c, _| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += frame[(i, a)] * frame[(j, b)] * jets[c].hessian(i, j);
                    }
                }
                s
            });
            for (r, comp) in components.iter_mut().enumerate() {
                let v = normals.column(r).dot(&hv);
                comp[(a, b)] = v;
                comp[(b, a)] = v;
            }
        }
    }
    Ok(SecondFundamentalForm {
        tangent_frame: frame,
        tangent_ambient: Some(tangent),
        normal_frame: normals,
        components,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurvature {
    /// `H^r = (1/n) Σ_i h^r_ii` in the normal frame.
    pub vector: Vec<f64>,
    #[serde(rename = "H2")]
    pub h2: f64,
}

pub fn mean_curvature(h: &SecondFundamentalForm) -> MeanCurvature {
    let n = h.dim() as f64;
    let vector: Vec<f64> = h.components.iter().map(|c| c.trace() / n).collect();
    let h2 = vector.iter().map(|x| x * x).sum();
    MeanCurvature { vector, h2 }
}

/// `R(X,Y;Z,W) = <h(X,W),h(Y,Z)> − <h(X,Z),h(Y,W)>` plus the space-form term
/// `c(<X,W><Y,Z> − <X,Z><Y,W>)`.
pub fn curvature_via_gauss(h: &SecondFundamentalForm, c: f64) -> CurvatureTensor {
    let n = h.dim();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    CurvatureTensor::from_fn(n, h.tangent_frame.clone(), |i, j, k, l| {
        let ext: f64 = h
            .components
            .iter()
            .map(|m| m[(i, l)] * m[(j, k)] - m[(i, k)] * m[(j, l)])
            .sum();
        ext + c * (d(i, l) * d(j, k) - d(i, k) * d(j, l))
    })
}

/// Max componentwise gap between the intrinsic (finite-difference) curvature
/// of the induced metric and the Gauss-equation curvature.
pub fn gauss_residual(f: &ImmersionField, p: &[f64]) -> Result<f64> {
    let intrinsic = geometry::riemann_from_metric(f, p)?;
    let h = second_fundamental_form(f, p)?;
    let extrinsic = curvature_via_gauss(&h, 0.0);
    Ok(intrinsic.max_difference(&extrinsic))
}

/// Everything needed for the pointwise checks at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub sff: SecondFundamentalForm,
    pub mean: MeanCurvature,
    pub curvature: CurvatureTensor,
}

impl PointGeometry {
    pub fn at(f: &ImmersionField, p: &[f64]) -> Result<Self> {
        let sff = second_fundamental_form(f, p)?;
        let mean = mean_curvature(&sff);
        let curvature = curvature_via_gauss(&sff, 0.0);
        Ok(PointGeometry {
            point: p.to_vec(),
            sff,
            mean,
            curvature,
        })
    }

    /// Abstract point data; `c` is the ambient constant curvature.
    pub fn abstract_data(sff: SecondFundamentalForm, c: f64) -> Self {
        let mean = mean_curvature(&sff);
        let curvature = curvature_via_gauss(&sff, c);
        PointGeometry {
            point: Vec::new(),
            sff,
            mean,
            curvature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub tuple: TupleSpec,
    pub delta: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub coefficient: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `δ(t) ≤ c(t)·H² + ½(n(n−1) − Σ nⱼ(nⱼ−1))·c`.
pub fn chen_inequality_check(d: &DeltaResult, h2: f64, t: &TupleSpec, c: f64, tol: f64) -> Result<InequalityReport> {
    if &d.tuple != t {
        return Err(Error::InvalidTuple(format!("result is for {}, not {t}", d.tuple)));
    }
    let coefficient = delta::normalizing_coefficient(t.n(), t)?;
    Ok(inequality_report(t, d.delta, h2, coefficient, c, tol))
}

pub(crate) fn inequality_report(t: &TupleSpec, delta_value: f64, h2: f64, coefficient: f64, c: f64, tol: f64) -> InequalityReport {
    let rhs = coefficient * h2 + delta::constant_curvature_delta(t, c);
    let margin = rhs - delta_value;
    InequalityReport {
        tuple: t.clone(),
        delta: delta_value,
        h2,
        coefficient,
        rhs,
        margin,
        tolerance: tol,
        passed: margin >= -tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealityPoint {
    pub point: Vec<f64>,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub delta_hat0: f64,
    pub tuple: TupleSpec,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealityReport {
    pub points: Vec<IdealityPoint>,
    pub max_gap: f64,
    pub tolerance: f64,
    pub ideal: bool,
}

/// `|H² − Δ̂₀|` at each sample point; ideal iff the maximum is within `tol`.
pub fn ideality_check(f: &ImmersionField, sample: &[Vec<f64>], opts: &OptimizerOptions, tol: f64) -> Result<IdealityReport> {
    use rayon::prelude::*;
    let points = sample
        .par_iter()
        .map(|p| {
            let pg = PointGeometry::at(f, p)?;
            let (v, t, _) = delta::delta_hat0(&pg.curvature, opts, delta::DEFAULT_DIMENSION_CAP)?;
            Ok(IdealityPoint {
                point: p.clone(),
                h2: pg.mean.h2,
                delta_hat0: v,
                tuple: t,
                gap: (pg.mean.h2 - v).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_gap = points.iter().map(|p| p.gap).fold(0.0, f64::max);
    Ok(IdealityReport {
        points,
        max_gap,
        tolerance: tol,
        ideal: max_gap <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityStructureReport {
    pub tuple: TupleSpec,
    /// Largest entry coupling two different index blocks.
    pub off_block: f64,
    /// Largest deviation of the trailing diagonal block from `μ_r·I`.
    pub trailing_umbilic: f64,
    /// Largest `|trace(A^r_j) − μ_r|`.
    pub trace: f64,
    pub mu: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Rotate the shape operators into the optimizer frame and test the block
/// form of the equality case.
pub fn equality_structure_check(h: &SecondFundamentalForm, s: &SubspaceTuple, t: &TupleSpec, tol: f64) -> Result<EqualityStructureReport> {
    if !s.matches(t) || h.dim() != t.n() {
        return Err(Error::InvalidTuple(format!("frame blocks {:?} do not match {t}", s.block_sizes())));
    }
    let n = t.n();
    let ranges = s.block_ranges();
    let trailing = s.trailing();
    let mut block_of = vec![ranges.len(); n];
    for (b, r) in ranges.iter().enumerate() {
        for i in r.clone() {
            block_of[i] = b;
        }
    }
    let (mut off_block, mut trailing_umbilic, mut trace) = (0.0f64, 0.0f64, 0.0f64);
    let mut mu = Vec::with_capacity(h.codim());
    for a in h.shape_operators() {
        let rot = s.frame().transpose() * a * s.frame();
        for i in 0..n {
            for j in 0..n {
                if block_of[i] != block_of[j] {
                    off_block = off_block.max(rot[(i, j)].abs());
                }
            }
        }
        let traces: Vec<f64> = ranges.iter().map(|r| r.clone().map(|i| rot[(i, i)]).sum()).collect();
        let m = if trailing.is_empty() {
            traces.iter().sum::<f64>() / traces.len().max(1) as f64
        } else {
            trailing.clone().map(|i| rot[(i, i)]).sum::<f64>() / trailing.len() as f64
        };
        for i in trailing.clone() {
            for j in trailing.clone() {
                let target = if i == j { m } else { 0.0 };
                trailing_umbilic = trailing_umbilic.max((rot[(i, j)] - target).abs());
            }
        }
        for tr in traces {
            trace = trace.max((tr - m).abs());
        }
        mu.push(m);
    }
    Ok(EqualityStructureReport {
        tuple: t.clone(),
        off_block,
        trailing_umbilic,
        trace,
        mu,
        tolerance: tol,
        passed: off_block <= tol && trailing_umbilic <= tol && trace <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere3() -> ImmersionField {
        ImmersionField::from_strings(
            &[
                "cos(u1)",
                "sin(u1)*cos(u2)",
                "sin(u1)*sin(u2)*cos(u3)",
                "sin(u1)*sin(u2)*sin(u3)",
            ],
            &["u1", "u2", "u3"],
            CoordBox::new(vec![(0.3, 2.8), (0.3, 2.8), (0.0, 6.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn sphere_is_umbilical() {
        let f = sphere3();
        let p = [1.0, 1.3, 2.0];
        let h = second_fundamental_form(&f, &p).unwrap();
        let x = f.position(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -&x } else { DVector::zeros(4) };
                assert!((h.vector(i, j) - expect).norm() < 1e-12);
            }
        }
        let mc = mean_curvature(&h);
        assert!((mc.h2 - 1.0).abs() < 1e-12);
        let r = curvature_via_gauss(&h, 0.0);
        assert!(r.max_difference(&CurvatureTensor::constant_curvature(3, 1.0)) < 1e-12);
        assert!(gauss_residual(&f, &p).unwrap() < 1e-4);
    }

    #[test]
    fn plane_is_totally_geodesic() {
        let f = ImmersionField::from_strings(
            &["u1", "u2", "0"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        let h = second_fundamental_form(&f, &[0.5, 0.5]).unwrap();
        assert!(h.shape_operators().iter().all(|a| linalg::max_abs(a) == 0.0));
        assert!(gauss_residual(&f, &[0.5, 0.5]).unwrap() < 1e-10);
    }

    #[test]
    fn clifford_torus_is_flat() {
        let f = ImmersionField::from_strings(
            &["cos(u1)", "sin(u1)", "cos(u2)", "sin(u2)"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 6.0), (0.0, 6.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        let h = second_fundamental_form(&f, &[1.0, 2.0]).unwrap();
        assert!((h.vector(0, 0).norm() - 1.0).abs() < 1e-12);
        assert!((h.vector(1, 1).norm() - 1.0).abs() < 1e-12);
        assert!(h.vector(0, 1).norm() < 1e-12);
        assert!(curvature_via_gauss(&h, 0.0).max_difference(&CurvatureTensor::flat(2)) < 1e-10);
        assert!((mean_curvature(&h).h2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let f = ImmersionField::from_strings(
            &["u1", "u1", "0"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(matches!(
            second_fundamental_form(&f, &[0.5, 0.5]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn chen_margin_on_sphere() {
        let r = CurvatureTensor::constant_curvature(3, 1.0);
        let t = TupleSpec::new(3, vec![2]).unwrap();
        let d = delta::delta_invariant(&r, &t, &OptimizerOptions::default()).unwrap();
        let rep = chen_inequality_check(&d, 1.0, &t, 0.0, DEFAULT_MARGIN_TOL).unwrap();
        assert!((rep.margin - 0.25).abs() < 1e-12 && rep.passed);
        let other = TupleSpec::empty(3);
        assert!(chen_inequality_check(&d, 1.0, &other, 0.0, 1e-6).is_err());
    }

    #[test]
    fn umbilical_structure() {
        let h = SecondFundamentalForm::from_components(vec![DMatrix::identity(4, 4) * -1.0]).unwrap();
        let pg = PointGeometry::abstract_data(h, 0.0);
        let opts = OptimizerOptions::default();
        // equality tuple of the sphere: the whole space is the trailing block
        let t = TupleSpec::empty(4);
        let d = delta::delta_invariant(&pg.curvature, &t, &opts).unwrap();
        let rep = equality_structure_check(&pg.sff, &d.minimizer, &t, DEFAULT_STRUCTURE_TOL).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.mu[0] + 1.0).abs() < 1e-12);
        // a non-equality tuple keeps the block form but breaks the trace rule
        let t = TupleSpec::new(4, vec![2]).unwrap();
        let d = delta::delta_invariant(&pg.curvature, &t, &opts).unwrap();
        let rep = equality_structure_check(&pg.sff, &d.minimizer, &t, DEFAULT_STRUCTURE_TOL).unwrap();
        assert!(rep.off_block < 1e-12 && rep.trailing_umbilic < 1e-12);
        assert!((rep.trace - 1.0).abs() < 1e-12 && !rep.passed);
    }
}
