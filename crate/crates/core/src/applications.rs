//! Theorem-level checks: spectral bounds, ideal-embedding tests, the
//! warped-product inequality and the obstruction predicates.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::TupleSpec;
use crate::curvature::{self, CurvatureTensor};
use crate::delta::{self, DeltaResult, OptimizerOptions};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet2};
use crate::extrinsic::{self, ImmersionField, SecondFundamentalForm};
use crate::geometry::{self, Christoffel, CoordBox, MetricField, MetricSample, MetricSource};

/// Fraction of each box width kept clear of the faces when sampling.
pub const GRID_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub b1_zero: bool,
    pub finite_pi1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    Immersion,
    Metric,
    Warped,
    PointData,
}

/// Curvature and (optionally) second fundamental form supplied directly.
#[derive(Debug, Clone)]
pub struct PointData {
    pub curvature: CurvatureTensor,
    pub sff: Option<SecondFundamentalForm>,
    /// Constant curvature of the ambient space form.
    pub c: f64,
}

/// Warped product `N₁ ×_f N₂` with metric `g₁ + f² g₂`; coordinates are the
/// base coordinates followed by the fiber coordinates.
#[derive(Debug, Clone)]
pub struct WarpedSpec {
    base: MetricField,
    fiber: MetricField,
    warping: Expression,
    params: Vec<f64>,
    domain: CoordBox,
    pub base_compact: bool,
}

impl WarpedSpec {
    pub fn new(base: MetricField, fiber: MetricField, warping: Expression, params: &BTreeMap<String, f64>) -> Result<Self> {
        let n1 = base.dim();
        if warping.variables().len() != n1 {
            return Err(Error::DimensionMismatch {
                expected: n1,
                got: warping.variables().len(),
            });
        }
        let params = warping.bind(params)?;
        let domain = CoordBox::new(base.domain().0.iter().chain(&fiber.domain().0).copied().collect())?;
        Ok(WarpedSpec {
            base,
            fiber,
            warping,
            params,
            domain,
            base_compact: false,
        })
    }

    pub fn n1(&self) -> usize {
        self.base.dim()
    }

    pub fn n2(&self) -> usize {
        self.fiber.dim()
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }

    pub fn fiber(&self) -> &MetricField {
        &self.fiber
    }

    pub fn warping(&self) -> &Expression {
        &self.warping
    }

    pub fn warping_jet(&self, base_point: &[f64]) -> Result<Jet2> {
        self.warping.eval_bound(base_point, &self.params)
    }

    pub fn with_compact_base(mut self, compact: bool) -> Self {
        self.base_compact = compact;
        self
    }
}

impl MetricSource for WarpedSpec {
    fn dim(&self) -> usize {
        self.n1() + self.n2()
    }

    fn domain(&self) -> &CoordBox {
        &self.domain
    }

    fn metric_sample(&self, p: &[f64]) -> Result<MetricSample> {
        let (n1, n2) = (self.n1(), self.n2());
        let n = n1 + n2;
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        let (pb, pf) = p.split_at(n1);
        let b = self.base.metric_sample(pb)?;
        let f = self.fiber.metric_sample(pf)?;
        let w = self.warping_jet(pb)?;
        let f2 = w.value * w.value;
        let mut g = DMatrix::zeros(n, n);
        g.view_mut((0, 0), (n1, n1)).copy_from(&b.g);
        g.view_mut((n1, n1), (n2, n2)).copy_from(&(&f.g * f2));
        let mut dg = Vec::with_capacity(n);
        for k in 0..n1 {
            let mut d = DMatrix::zeros(n, n);
            d.view_mut((0, 0), (n1, n1)).copy_from(&b.dg[k]);
            d.view_mut((n1, n1), (n2, n2))
                .copy_from(&(&f.g * (2.0 * w.value * w.gradient[k])));
            dg.push(d);
        }
        for k in 0..n2 {
            let mut d = DMatrix::zeros(n, n);
            d.view_mut((n1, n1), (n2, n2)).copy_from(&(&f.dg[k] * f2));
            dg.push(d);
        }
        Ok(MetricSample { g, dg })
    }
}

/// A named manifold with whatever geometric data and metadata is known.
/// Spectral data and topology flags are asserted, never inferred.
#[derive(Debug, Clone)]
pub struct ManifoldRecord {
    pub name: String,
    pub kind: ManifoldKind,
    pub immersion: Option<ImmersionField>,
    pub metric: Option<MetricField>,
    pub warped: Option<WarpedSpec>,
    pub point_data: Option<PointData>,
    /// First nonzero eigenvalue of `Δ = −div∘grad`.
    pub lambda1: Option<f64>,
    pub volume: Option<f64>,
    pub topology: Option<Topology>,
    pub homogeneous: bool,
    /// Immersion into `Cⁿ ≅ R²ⁿ` meant to be Lagrangian.
    pub lagrangian: bool,
}

/// Curvature data at one sample point.
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub point: Vec<f64>,
    pub curvature: CurvatureTensor,
    pub sff: Option<SecondFundamentalForm>,
    pub h2: Option<f64>,
    pub c: f64,
}

impl ManifoldRecord {
    pub fn new(name: impl Into<String>, kind: ManifoldKind) -> Self {
        ManifoldRecord {
            name: name.into(),
            kind,
            immersion: None,
            metric: None,
            warped: None,
            point_data: None,
            lambda1: None,
            volume: None,
            topology: None,
            homogeneous: false,
            lagrangian: false,
        }
    }

    /// Checks that the data for `kind` is present and metadata is sane.
    pub fn validate(&self) -> Result<()> {
        let present = match self.kind {
            ManifoldKind::Immersion => self.immersion.is_some(),
            ManifoldKind::Metric => self.metric.is_some(),
            ManifoldKind::Warped => self.warped.is_some(),
            ManifoldKind::PointData => self.point_data.is_some(),
        };
        if !present {
            return Err(Error::MissingData(format!("record `{}` lacks its {:?} data", self.name, self.kind)));
        }
        if let Some(l) = self.lambda1 {
            if !(l > 0.0) {
                return Err(Error::Invalid(format!("lambda1 must be positive, got {l}")));
            }
        }
        if let Some(v) = self.volume {
            if !(v > 0.0) {
                return Err(Error::Invalid(format!("volume must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        if let Some(m) = &self.metric {
            m.dim()
        } else if let Some(f) = &self.immersion {
            f.dim()
        } else if let Some(w) = &self.warped {
            w.dim()
        } else {
            self.point_data.as_ref().map_or(0, |d| d.curvature.dim())
        }
    }

    /// Intrinsic metric: explicit metric, then induced, then warped.
    pub fn metric_source(&self) -> Option<&dyn MetricSource> {
        if let Some(m) = &self.metric {
            Some(m)
        } else if let Some(f) = &self.immersion {
            Some(f)
        } else if let Some(w) = &self.warped {
            Some(w)
        } else {
            None
        }
    }

    pub fn domain(&self) -> Option<&CoordBox> {
        self.metric_source().map(|m| m.domain())
    }

    /// Uniform interior grid; point data is a single sample with no
    /// coordinates.
    pub fn sample(&self, per_axis: usize) -> Vec<Vec<f64>> {
        match self.domain() {
            Some(d) => d.grid(per_axis, GRID_MARGIN),
            None => vec![Vec::new()],
        }
    }

    /// Curvature at `p`: Gauss equation for immersions, finite differences
    /// of the metric otherwise.
    pub fn sample_point(&self, p: &[f64]) -> Result<SamplePoint> {
        if self.kind == ManifoldKind::PointData {
            let d = self.point_data.as_ref().ok_or_else(|| Error::MissingData("point data".into()))?;
            return Ok(SamplePoint {
                point: Vec::new(),
                curvature: d.curvature.clone(),
                h2: d.sff.as_ref().map(|h| extrinsic::mean_curvature(h).h2),
                sff: d.sff.clone(),
                c: d.c,
            });
        }
        if let Some(f) = &self.immersion {
            let pg = extrinsic::PointGeometry::at(f, p)?;
            return Ok(SamplePoint {
                point: p.to_vec(),
                curvature: pg.curvature,
                h2: Some(pg.mean.h2),
                sff: Some(pg.sff),
                c: 0.0,
            });
        }
        let g = self.metric_source().ok_or_else(|| Error::MissingData("metric".into()))?;
        Ok(SamplePoint {
            point: p.to_vec(),
            curvature: geometry::riemann_from_metric(g, p)?,
            sff: None,
            h2: None,
            c: 0.0,
        })
    }

    fn require_lambda1(&self) -> Result<f64> {
        self.lambda1
            .ok_or_else(|| Error::MissingData(format!("record `{}` has no lambda1", self.name)))
    }

    fn require_homogeneous(&self) -> Result<()> {
        if self.homogeneous {
            Ok(())
        } else {
            Err(Error::Invalid(format!("record `{}` is not declared homogeneous", self.name)))
        }
    }
}

/// `Δf = −g^{ij}(∂ᵢ∂ⱼf − Γᵏᵢⱼ ∂ₖf)` on the base; positive spectrum.
pub fn laplacian_of_warping(w: &WarpedSpec, p: &[f64]) -> Result<f64> {
    let n = w.n1();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    w.base.domain().contains(p)?;
    let sample = w.base.metric_sample(p)?;
    let gamma = Christoffel::from_sample(&sample)?;
    let ginv = sample
        .g
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { condition: f64::INFINITY })?;
    let f = w.warping_jet(p)?;
    let mut lap = 0.0;
    for i in 0..n {
        for j in 0..n {
            let conn: f64 = (0..n).map(|k| gamma.get(k, i, j) * f.gradient[k]).sum();
            lap -= ginv[(i, j)] * (f.hessian(i, j) - conn);
        }
    }
    Ok(lap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpedReport {
    pub point: Vec<f64>,
    /// `Δf/f`.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `Δf/f ≤ (n₁+n₂)²/(4n₂)·H² + n₁·max K̃` at a base point.
pub fn warped_inequality_check(w: &WarpedSpec, h2: f64, max_k: f64, p: &[f64], tol: f64) -> Result<WarpedReport> {
    let f = w.warping_jet(p)?.value;
    if !(f > 0.0) {
        return Err(Error::Domain(format!("warping function is {f} <= 0")));
    }
    let lhs = laplacian_of_warping(w, p)? / f;
    let (n1, n2) = (w.n1() as f64, w.n2() as f64);
    let rhs = (n1 + n2).powi(2) / (4.0 * n2) * h2 + n1 * max_k;
    let margin = rhs - lhs;
    Ok(WarpedReport {
        point: p.to_vec(),
        lhs,
        rhs,
        margin,
        tolerance: tol,
        passed: margin >= -tol,
    })
}

pub const LABEL_NO_MINIMAL_NEGATIVE: &str = "no minimal immersion into any manifold of negative sectional curvature";
pub const LABEL_NO_MINIMAL_NONPOSITIVE: &str = "no minimal immersion into any manifold of non-positive sectional curvature";
pub const LABEL_NO_MINIMAL_EUCLIDEAN: &str = "no minimal immersion into any Euclidean space";
pub const LABEL_WARPED_MINIMAL: &str = "every minimal immersion into a Euclidean space is a warped product immersion";
pub const LABEL_NO_LAGRANGIAN: &str = "no Lagrangian isometric immersion into complex Euclidean space";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpedFlags {
    pub harmonic: bool,
    /// Common value of `Δf/f` when `f` is an eigenfunction with `λ > 0`.
    pub eigenvalue: Option<f64>,
    pub compact: bool,
    pub labels: Vec<String>,
}

/// Which warping-function hypotheses hold on the sample, and the
/// non-existence conclusions they trigger.
pub fn warped_obstruction_flags(w: &WarpedSpec, sample: &[Vec<f64>], tol: f64) -> Result<WarpedFlags> {
    let mut laps = Vec::with_capacity(sample.len());
    let mut ratios = Vec::with_capacity(sample.len());
    for p in sample {
        let f = w.warping_jet(p)?.value;
        if !(f > 0.0) {
            return Err(Error::Domain(format!("warping function is {f} <= 0")));
        }
        let l = laplacian_of_warping(w, p)?;
        laps.push(l);
        ratios.push(l / f);
    }
    let harmonic = !sample.is_empty() && laps.iter().all(|l| l.abs() <= tol);
    let eigenvalue = if ratios.is_empty() {
        None
    } else {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
        (mean > tol && spread <= tol * mean.max(1.0)).then_some(mean)
    };
    let mut labels = Vec::new();
    let mut push = |s: &str| {
        if !labels.iter().any(|l: &String| l == s) {
            labels.push(s.to_string());
        }
    };
    if harmonic {
        push(LABEL_NO_MINIMAL_NEGATIVE);
        push(LABEL_WARPED_MINIMAL);
    }
    if eigenvalue.is_some() {
        push(LABEL_NO_MINIMAL_NONPOSITIVE);
    }
    if w.base_compact {
        push(LABEL_NO_MINIMAL_NEGATIVE);
        push(LABEL_NO_MINIMAL_EUCLIDEAN);
    }
    Ok(WarpedFlags {
        harmonic,
        eigenvalue,
        compact: w.base_compact,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEntry {
    pub tuple: TupleSpec,
    pub normalized: f64,
    /// `n·Δ(t)`.
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub lambda1: f64,
    pub n: usize,
    pub entries: Vec<SpectralEntry>,
    /// Margin for the empty tuple, `λ₁ − nρ`.
    pub nagano_margin: f64,
    pub min_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `λ₁ ≥ n·Δ(t)` for every supplied tuple; the full map must include `()`.
pub fn spectral_bound_check(rec: &ManifoldRecord, results: &[DeltaResult], tol: f64) -> Result<SpectralReport> {
    let lambda1 = rec.require_lambda1()?;
    rec.require_homogeneous()?;
    let n = rec.dim();
    let empty = TupleSpec::empty(n);
    if !results.iter().any(|d| d.tuple == empty) {
        return Err(Error::MissingData("no δ result for the empty tuple".into()));
    }
    let entries: Vec<SpectralEntry> = results
        .iter()
        .map(|d| {
            let bound = n as f64 * d.normalized;
            SpectralEntry {
                tuple: d.tuple.clone(),
                normalized: d.normalized,
                bound,
                margin: lambda1 - bound,
            }
        })
        .collect();
    let nagano_margin = entries.iter().find(|e| e.tuple == empty).expect("checked above").margin;
    let min_margin = entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
    Ok(SpectralReport {
        lambda1,
        n,
        entries,
        nagano_margin,
        min_margin,
        tolerance: tol,
        passed: min_margin >= -tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestLivingReport {
    pub lambda1: f64,
    pub n: usize,
    pub delta_hat0: f64,
    /// `λ₁ − n·Δ̂₀`.
    pub gap: f64,
    pub tolerance: f64,
    pub best_living: bool,
}

/// True iff `λ₁ = n·Δ̂₀` within `tol`.
pub fn best_living_test(rec: &ManifoldRecord, dhat0: f64, tol: f64) -> Result<BestLivingReport> {
    let lambda1 = rec.require_lambda1()?;
    rec.require_homogeneous()?;
    let n = rec.dim();
    let gap = lambda1 - n as f64 * dhat0;
    Ok(BestLivingReport {
        lambda1,
        n,
        delta_hat0: dhat0,
        gap,
        tolerance: tol,
        best_living: gap.abs() <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageBoundReport {
    pub lambda1: f64,
    pub volume: f64,
    /// `Σ √det g` over the cells; should approximate `volume`.
    pub quadrature_volume: f64,
    pub mean_delta_hat0: f64,
    /// `n·mean Δ̂₀`.
    pub bound: f64,
    pub margin: f64,
    pub tolerance: f64,
    /// Strict inequality holds, so no ideal embedding exists.
    pub fires: bool,
}

/// Midpoint quadrature of `Δ̂₀` over the whole chart with `per_axis` cells
/// per coordinate, weighted by `√det g`. Curvature comes from the record's
/// preferred source, so immersions avoid finite differences near chart
/// singularities.
pub fn average_bound_test(rec: &ManifoldRecord, per_axis: usize, opts: &OptimizerOptions, tol: f64) -> Result<AverageBoundReport> {
    let lambda1 = rec.require_lambda1()?;
    let volume = rec
        .volume
        .ok_or_else(|| Error::MissingData(format!("record `{}` has no volume", rec.name)))?;
    let g = rec
        .metric_source()
        .ok_or_else(|| Error::MissingData("average bound needs a metric".into()))?;
    let per_axis = per_axis.max(1);
    let domain = g.domain();
    let cell: f64 = (0..domain.dim()).map(|a| domain.width(a) / per_axis as f64).product();
    let centers = domain.grid(per_axis, 0.5 / per_axis as f64);
    let weighted: Vec<(f64, f64)> = centers
        .par_iter()
        .map(|p| {
            let w = g.metric_sample(p)?.g.determinant().sqrt() * cell;
            let r = rec.sample_point(p)?.curvature;
            let (v, _, _) = delta::delta_hat0(&r, opts, delta::DEFAULT_DIMENSION_CAP)?;
            Ok((w, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let quadrature_volume: f64 = weighted.iter().map(|(w, _)| w).sum();
    let mean = weighted.iter().map(|(w, v)| w * v).sum::<f64>() / quadrature_volume;
    let bound = rec.dim() as f64 * mean;
    let margin = lambda1 - bound;
    Ok(AverageBoundReport {
        lambda1,
        volume,
        quadrature_volume,
        mean_delta_hat0: mean,
        bound,
        margin,
        tolerance: tol,
        fires: margin > tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaWitness {
    pub point: Vec<f64>,
    pub tuple: TupleSpec,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalObstructionReport {
    pub points: usize,
    /// Largest δ over points and tuples.
    pub max_delta: Option<DeltaWitness>,
    pub delta_fires: bool,
    pub max_ricci: f64,
    pub ricci_fires: bool,
    pub label: String,
}

fn all_deltas(samples: &[SamplePoint], opts: &OptimizerOptions) -> Result<Vec<Vec<DeltaResult>>> {
    samples
        .par_iter()
        .map(|s| delta::delta_all(&s.curvature, opts))
        .collect()
}

/// Scans sample points and tuples for `δ(t) > tol`, which rules out minimal
/// immersions into non-positively curved targets; also reports whether the
/// Ricci curvature is positive somewhere.
pub fn minimal_obstruction(samples: &[SamplePoint], opts: &OptimizerOptions, tol: f64) -> Result<MinimalObstructionReport> {
    let deltas = all_deltas(samples, opts)?;
    let mut best: Option<DeltaWitness> = None;
    for (s, ds) in samples.iter().zip(&deltas) {
        for d in ds {
            if best.as_ref().is_none_or(|b| d.delta > b.delta) {
                best = Some(DeltaWitness {
                    point: s.point.clone(),
                    tuple: d.tuple.clone(),
                    delta: d.delta,
                });
            }
        }
    }
    let max_ricci = samples
        .iter()
        .map(|s| curvature::max_ricci(&s.curvature).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let delta_fires = best.as_ref().is_some_and(|b| b.delta > tol);
    Ok(MinimalObstructionReport {
        points: samples.len(),
        max_delta: best,
        delta_fires,
        max_ricci,
        ricci_fires: max_ricci > tol,
        label: if delta_fires {
            LABEL_NO_MINIMAL_NONPOSITIVE.to_string()
        } else {
            "not detected on sample".to_string()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Fires,
    DoesNotFire,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleMinimum {
    pub tuple: TupleSpec,
    /// Smallest δ(t) over the sample.
    pub min_delta: f64,
    pub argmin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangianObstructionReport {
    pub verdict: Verdict,
    pub topology: Option<Topology>,
    pub per_tuple: Vec<TupleMinimum>,
    pub witness: Option<TupleSpec>,
    pub label: String,
}

/// Fires when the topology hypothesis holds and some tuple has `δ(t) > tol`
/// at every sample point. Missing flags give an inconclusive verdict.
pub fn lagrangian_obstruction(samples: &[SamplePoint], topology: Option<Topology>, opts: &OptimizerOptions, tol: f64) -> Result<LagrangianObstructionReport> {
    let deltas = all_deltas(samples, opts)?;
    let mut per_tuple: Vec<TupleMinimum> = Vec::new();
    for (s, ds) in samples.iter().zip(&deltas) {
        for d in ds {
            match per_tuple.iter_mut().find(|m| m.tuple == d.tuple) {
                Some(m) if d.delta < m.min_delta => {
                    m.min_delta = d.delta;
                    m.argmin = s.point.clone();
                }
                Some(_) => {}
                None => per_tuple.push(TupleMinimum {
                    tuple: d.tuple.clone(),
                    min_delta: d.delta,
                    argmin: s.point.clone(),
                }),
            }
        }
    }
    let witness = per_tuple
        .iter()
        .filter(|m| m.min_delta > tol)
        .max_by(|a, b| a.min_delta.total_cmp(&b.min_delta))
        .map(|m| m.tuple.clone());
    let verdict = match topology {
        None => Verdict::Inconclusive,
        Some(t) if !(t.b1_zero || t.finite_pi1) => Verdict::DoesNotFire,
        Some(_) if witness.is_some() => Verdict::Fires,
        Some(_) => Verdict::DoesNotFire,
    };
    let label = match verdict {
        Verdict::Fires => LABEL_NO_LAGRANGIAN.to_string(),
        Verdict::DoesNotFire => "not detected on sample".to_string(),
        Verdict::Inconclusive => "topology flags missing".to_string(),
    };
    Ok(LagrangianObstructionReport {
        verdict,
        topology,
        per_tuple,
        witness,
        label,
    })
}
