//! Lagrangian immersions into `Cⁿ ≅ R²ⁿ`: the symplectic check, the Whitney
//! sphere, the three Lagrangian δ-inequalities and their equality patterns.
//!
//! With the normal frame `J e_1,…,J e_n` the second fundamental form of a
//! Lagrangian point is the cubic form `C(a,b,c) = <h(e_a,e_b), J e_c>`, which
//! is totally symmetric.

use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::combinatorics::TupleSpec;
use crate::delta::{self, DeltaResult, SubspaceTuple};
use crate::error::{Error, Result};
use crate::extrinsic::{self, ImmersionField, InequalityReport, SecondFundamentalForm};
use crate::geometry::CoordBox;

/// Largest symplectic residual accepted as Lagrangian.
pub const LAGRANGIAN_TOL: f64 = 1e-8;

/// `Cⁿ` with holomorphic sectional curvature `4c` and
/// `J(x₁..x_n, y₁..y_n) = (−y₁..−y_n, x₁..x_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmbient {
    pub n: usize,
    pub c: f64,
}

impl ComplexAmbient {
    pub fn new(n: usize, c: f64) -> Self {
        ComplexAmbient { n, c }
    }

    pub fn apply_j(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(2 * n, |i, _| if i < n { -v[i + n] } else { v[i - n] })
    }

    pub fn j_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, i + n)] = -1.0;
            j[(i + n, i)] = 1.0;
        }
        j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityCase {
    L1,
    L2,
    L3,
}

impl std::str::FromStr for InequalityCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(InequalityCase::L1),
            "L2" => Ok(InequalityCase::L2),
            "L3" => Ok(InequalityCase::L3),
            _ => Err(Error::Invalid(format!("unknown case `{s}` (expected L1, L2 or L3)"))),
        }
    }
}

fn ambient_of(f: &ImmersionField) -> Result<ComplexAmbient> {
    let m = f.ambient_dim();
    if !m.is_multiple_of(2) {
        return Err(Error::Invalid(format!("ambient dimension {m} is odd")));
    }
    Ok(ComplexAmbient::new(m / 2, 0.0))
}

/// `max_{i,j} |ω(df e_i, df e_j)|` with `ω(v,w) = <Jv, w>`, for an
/// orthonormal tangent frame.
pub fn lagrangian_check(f: &ImmersionField, p: &[f64]) -> Result<f64> {
    let amb = ambient_of(f)?;
    let sff = extrinsic::second_fundamental_form(f, p)?;
    let t = sff.tangent_ambient().expect("immersion forms carry the ambient frame");
    let jt = amb.j_matrix() * t;
    let omega = jt.transpose() * t;
    Ok(omega.iter().fold(0.0f64, |a, b| a.max(b.abs())))
}

/// The Whitney immersion `Sⁿ → Cⁿ` through inverse stereographic projection,
/// `y₀ = (s−1)/(s+1)`, `y_j = 2x_j/(s+1)`, `s = |x|²`, so the chart origin
/// maps to the double point. Components `Re w_j = x_j(s+1)/(s²+1)`,
/// `Im w_j = x_j(s−1)/(s²+1)`.
pub fn whitney_immersion(n: usize) -> Result<ImmersionField> {
    if n < 2 {
        return Err(Error::Invalid("Whitney sphere needs n >= 2".into()));
    }
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let s = vars.iter().map(|v| format!("{v}^2")).collect::<Vec<_>>().join("+");
    let s = format!("({s})");
    let mut comps = Vec::with_capacity(2 * n);
    for v in &vars {
        comps.push(format!("{v}*({s}+1)/({s}^2+1)"));
    }
    for v in &vars {
        comps.push(format!("{v}*({s}-1)/({s}^2+1)"));
    }
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let var_refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    ImmersionField::from_strings(
        &refs,
        &var_refs,
        CoordBox::new(vec![(-1.5, 1.5); n])?,
        BTreeMap::new(),
    )
}

/// Second fundamental form of a Lagrangian point in the `J`-adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianData {
    n: usize,
    cubic: Vec<f64>,
    pub symplectic_residual: f64,
    pub sff: SecondFundamentalForm,
}

impl LagrangianData {
    /// Data at a chart point; errors when the point is not Lagrangian.
    pub fn at(f: &ImmersionField, p: &[f64]) -> Result<Self> {
        let amb = ambient_of(f)?;
        if amb.n != f.components()[0].variables().len() {
            return Err(Error::Invalid("Lagrangian immersions need ambient dimension 2n".into()));
        }
        let sff = extrinsic::second_fundamental_form(f, p)?;
        let t = sff.tangent_ambient().expect("immersion forms carry the ambient frame").clone();
        let jt = amb.j_matrix() * &t;
        let residual = (jt.transpose() * &t).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if residual > LAGRANGIAN_TOL {
            return Err(Error::Invalid(format!("point is not Lagrangian (residual {residual:e})")));
        }
        let sff = sff.in_normal_frame(jt)?;
        let n = sff.dim();
        let cubic = (0..n * n * n)
            .map(|idx| {
                let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
                sff.component(c, a, b)
            })
            .collect();
        Ok(LagrangianData {
            n,
            cubic,
            symplectic_residual: residual,
            sff,
        })
    }

    /// Abstract data from a cubic form `C(a,b,c)`; symmetrized over all
    /// index permutations.
    pub fn from_cubic(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut cubic = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    cubic[(a * n + b) * n + c] =
                        (f(a, b, c) + f(a, c, b) + f(b, a, c) + f(b, c, a) + f(c, a, b) + f(c, b, a)) / 6.0;
                }
            }
        }
        let comps = (0..n)
            .map(|c| DMatrix::from_fn(n, n, |a, b| cubic[(a * n + b) * n + c]))
            .collect();
        Ok(LagrangianData {
            n,
            cubic,
            symplectic_residual: 0.0,
            sff: SecondFundamentalForm::from_components(comps)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cubic(&self, a: usize, b: usize, c: usize) -> f64 {
        self.cubic[(a * self.n + b) * self.n + c]
    }

    /// max deviation of `C` from total symmetry.
    pub fn cubic_symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.cubic(a, b, c);
                    for w in [self.cubic(b, a, c), self.cubic(a, c, b), self.cubic(c, b, a)] {
                        worst = worst.max((v - w).abs());
                    }
                }
            }
        }
        worst
    }

    /// Cubic form in a rotated frame (columns of `q` in the current frame).
    pub fn rotated_cubic(&self, q: &DMatrix<f64>) -> Vec<f64> {
        let n = self.n;
        let mut cur = self.cubic.clone();
        for slot in 0..3u32 {
            let stride = n.pow(2 - slot);
            let mut next = vec![0.0; cur.len()];
            for base in 0..cur.len() {
                if !(base / stride).is_multiple_of(n) {
                    continue;
                }
                for a in 0..n {
                    next[base + a * stride] = (0..n).map(|i| cur[base + i * stride] * q[(i, a)]).sum();
                }
            }
            cur = next;
        }
        cur
    }
}

/// H² coefficient of the selected Lagrangian inequality.
pub fn lagrangian_coefficient(n: usize, t: &TupleSpec, case: InequalityCase) -> Result<f64> {
    if t.n() != n {
        return Err(Error::InvalidTuple(format!("tuple {t} is not in S({n})")));
    }
    let nf = n as f64;
    let k = t.k() as f64;
    let sum = t.sum();
    match case {
        InequalityCase::L1 => delta::normalizing_coefficient(n, t),
        InequalityCase::L2 => {
            if sum >= n {
                return Err(Error::InvalidTuple(format!("L2 needs Σnᵢ < n, got {t}")));
            }
            let inv: f64 = t.parts().iter().map(|&p| 1.0 / (2.0 + p as f64)).sum();
            let s = sum as f64;
            let num = nf - s + 3.0 * k - 1.0 - 6.0 * inv;
            let den = 2.0 * (nf - s + 3.0 * k + 2.0 - 6.0 * inv);
            Ok(nf * nf * num / den)
        }
        InequalityCase::L3 => {
            if sum != n {
                return Err(Error::InvalidTuple(format!("L3 needs Σnᵢ = n, got {t}")));
            }
            // parts are sorted, so the first one is minimal
            let inv: f64 = t.parts()[1..].iter().map(|&p| 1.0 / (2.0 + p as f64)).sum();
            Ok(nf * nf * (k - 1.0 - 2.0 * inv) / (2.0 * (k - 2.0 * inv)))
        }
    }
}

/// `margin = coeff·H² + ½(n(n−1) − Σnᵢ(nᵢ−1))·c − δ`.
pub fn lagrangian_inequality_check(
    d: &DeltaResult,
    h2: f64,
    t: &TupleSpec,
    c: f64,
    case: InequalityCase,
    tol: f64,
) -> Result<InequalityReport> {
    if &d.tuple != t {
        return Err(Error::InvalidTuple(format!("result is for {}, not {t}", d.tuple)));
    }
    let coeff = lagrangian_coefficient(t.n(), t, case)?;
    Ok(extrinsic::inequality_report(t, d.delta, h2, coeff, c, tol))
}

/// One Lagrangian sample: δ(t), H² and the ambient constant at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagrangianSample {
    pub point: Vec<f64>,
    pub delta: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub tuple: TupleSpec,
    /// Points with L1 equality but non-vanishing mean curvature.
    pub flagged: Vec<Vec<f64>>,
    pub equality_points: usize,
    pub passed: bool,
}

/// Flags samples where L1 holds with equality (residual `< eps_eq`) while
/// `H² > eps_h`; an empty flag list is a pass.
pub fn minimality_at_equality_check(samples: &[LagrangianSample], t: &TupleSpec, eps_eq: f64, eps_h: f64) -> Result<MinimalityReport> {
    let coeff = lagrangian_coefficient(t.n(), t, InequalityCase::L1)?;
    let mut flagged = Vec::new();
    let mut equality_points = 0;
    for s in samples {
        let rhs = coeff * s.h2 + delta::constant_curvature_delta(t, s.c);
        if (rhs - s.delta).abs() < eps_eq {
            equality_points += 1;
            if s.h2 > eps_h {
                flagged.push(s.point.clone());
            }
        }
    }
    Ok(MinimalityReport {
        tuple: t.clone(),
        passed: flagged.is_empty(),
        flagged,
        equality_points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2FormReport {
    pub tuple: TupleSpec,
    pub lambda: f64,
    /// Frame index used as `e_{μ+1}`; `None` for the mean-curvature-aligned
    /// trailing frame.
    pub mu_index: Option<usize>,
    pub traceless: f64,
    pub in_block: f64,
    pub cross_block: f64,
    pub block_mu: f64,
    pub block_u: f64,
    pub mu_mu: f64,
    pub mu_u: f64,
    pub u_v: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn blocks_of(s: &SubspaceTuple) -> (Vec<Range<usize>>, Range<usize>) {
    (s.block_ranges(), s.trailing())
}

fn l2_residuals(cub: &[f64], n: usize, parts: &[usize], ranges: &[Range<usize>], p: usize, us: &[usize]) -> [f64; 9] {
    let c = |a: usize, b: usize, d: usize| cub[(a * n + b) * n + d];
    let lambda = c(p, p, p) / 3.0;
    let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut r = [0.0f64; 8];
    let mut upd = |slot: usize, v: f64| r[slot] = r[slot].max(v.abs());
    for (i, ri) in ranges.iter().enumerate() {
        let w = 3.0 * lambda / (2.0 + parts[i] as f64);
        for g in ri.clone() {
            upd(0, ri.clone().map(|a| c(a, a, g)).sum());
        }
        for a in ri.clone() {
            for b in ri.clone() {
                for d in 0..n {
                    if ri.contains(&d) {
                        continue;
                    }
                    let expect = if d == p { w * kd(a, b) } else { 0.0 };
                    upd(1, c(a, b, d) - expect);
                }
            }
            for (j, rj) in ranges.iter().enumerate() {
                if i == j {
                    continue;
                }
                for b in rj.clone() {
                    for d in 0..n {
                        upd(2, c(a, b, d));
                    }
                }
            }
            for d in 0..n {
                upd(3, c(a, p, d) - w * kd(d, a));
                for &u in us {
                    upd(4, c(a, u, d));
                }
            }
        }
    }
    for d in 0..n {
        upd(5, c(p, p, d) - 3.0 * lambda * kd(d, p));
        for &u in us {
            upd(6, c(p, u, d) - lambda * kd(d, u));
            for &v in us {
                upd(7, c(u, v, d) - lambda * kd(u, v) * kd(d, p));
            }
        }
    }
    [r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], lambda]
}

/// Residuals of the `h` pattern characterizing equality in L2, read in the
/// optimizer frame `s`. Candidates for `e_{μ+1}`: each trailing frame
/// vector, and the trailing direction of the mean curvature; the best is
/// reported.
pub fn equality_form_check_l2(data: &LagrangianData, s: &SubspaceTuple, t: &TupleSpec, tol: f64) -> Result<L2FormReport> {
    let n = data.dim();
    if !s.matches(t) {
        return Err(Error::InvalidTuple(format!("frame blocks {:?} do not match {t}", s.block_sizes())));
    }
    let mu = t.sum();
    if mu + 1 > n {
        return Err(Error::InvalidTuple(format!("L2 pattern needs Σnᵢ < n, got {t}")));
    }
    let (ranges, trailing) = blocks_of(s);
    let mut candidates: Vec<(Option<usize>, DMatrix<f64>, usize)> = trailing
        .clone()
        .map(|p| (Some(p), s.frame().clone(), p))
        .collect();

    // mean-curvature-aligned trailing frame
    let base = data.rotated_cubic(s.frame());
    let hvec: Vec<f64> = (0..n).map(|d| (0..n).map(|a| base[(a * n + a) * n + d]).sum()).collect();
    let mut lead = DVector::zeros(n);
    for i in trailing.clone() {
        lead[i] = hvec[i];
    }
    if lead.norm() > 1e-12 {
        let mut seeds = DMatrix::zeros(n, trailing.len());
        seeds.set_column(0, &(lead.clone() / lead.norm()));
        for (col, i) in trailing.clone().skip(1).enumerate() {
            seeds[(i, col + 1)] = 1.0;
        }
        // fall back to all trailing coordinate directions if one is dependent
        let mut wide = DMatrix::zeros(n, trailing.len() + 1);
        for c in 0..seeds.ncols() {
            wide.set_column(c, &seeds.column(c));
        }
        wide[(trailing.start, trailing.len())] = 1.0;
        if let Ok(gs) = crate::linalg::gram_schmidt(&DMatrix::identity(n, n), &wide, trailing.len()) {
            let mut local = DMatrix::identity(n, n);
            for (c, i) in trailing.clone().enumerate() {
                local.set_column(i, &gs.column(c));
            }
            candidates.push((None, s.frame() * local, trailing.start));
        }
    }

    let mut best: Option<L2FormReport> = None;
    for (label, frame, p) in candidates {
        let cub = data.rotated_cubic(&frame);
        let us: Vec<usize> = trailing.clone().filter(|&u| u != p).collect();
        let r = l2_residuals(&cub, n, t.parts(), &ranges, p, &us);
        let max_residual = r[..8].iter().fold(0.0f64, |a, b| a.max(*b));
        let rep = L2FormReport {
            tuple: t.clone(),
            lambda: r[8],
            mu_index: label,
            traceless: r[0],
            in_block: r[1],
            cross_block: r[2],
            block_mu: r[3],
            block_u: r[4],
            mu_mu: r[5],
            mu_u: r[6],
            u_v: r[7],
            max_residual,
            tolerance: tol,
            passed: max_residual <= tol,
        };
        if best.as_ref().is_none_or(|b| rep.max_residual < b.max_residual) {
            best = Some(rep);
        }
    }
    Ok(best.expect("trailing range is non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L3ConditionsReport {
    pub tuple: TupleSpec,
    pub condition_a: f64,
    pub condition_b: f64,
    pub condition_c: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Residuals of conditions (a)–(c) accompanying equality in L3. Components
/// with three distinct indices inside one block are not constrained.
pub fn equality_conditions_check_l3(data: &LagrangianData, s: &SubspaceTuple, t: &TupleSpec, tol: f64) -> Result<L3ConditionsReport> {
    let n = data.dim();
    if t.sum() != n || t.n() != n {
        return Err(Error::InvalidTuple(format!("L3 conditions need a partition of {n}, got {t}")));
    }
    if !s.matches(t) {
        return Err(Error::InvalidTuple(format!("frame blocks {:?} do not match {t}", s.block_sizes())));
    }
    let cub = data.rotated_cubic(s.frame());
    let c = |a: usize, b: usize, d: usize| cub[(a * n + b) * n + d];
    let (ranges, _) = blocks_of(s);
    let min = *t.parts().iter().min().expect("k >= 2");
    let (mut ra, mut rb, mut rc) = (0.0f64, 0.0f64, 0.0f64);
    for (i, ri) in ranges.iter().enumerate() {
        for (j, rj) in ranges.iter().enumerate() {
            if i == j {
                continue;
            }
            for a in ri.clone() {
                for b in rj.clone() {
                    for big_a in 0..n {
                        if big_a != a && big_a != b {
                            ra = ra.max(c(big_a, a, b).abs());
                        }
                    }
                }
            }
        }
    }
    for (j, rj) in ranges.iter().enumerate() {
        for beta in rj.clone() {
            let trace: f64 = rj.clone().map(|a| c(beta, a, a)).sum();
            if t.parts()[j] != min {
                rb = rb.max(trace.abs());
                for (i, ri) in ranges.iter().enumerate() {
                    if i != j {
                        for a in ri.clone() {
                            rb = rb.max(c(beta, a, a).abs());
                        }
                    }
                }
            } else {
                for (i, ri) in ranges.iter().enumerate() {
                    if i != j {
                        let w = t.parts()[i] as f64 + 2.0;
                        for a in ri.clone() {
                            rc = rc.max((trace - w * c(beta, a, a)).abs());
                        }
                    }
                }
            }
        }
    }
    let max_residual = ra.max(rb).max(rc);
    Ok(L3ConditionsReport {
        tuple: t.clone(),
        condition_a: ra,
        condition_b: rb,
        condition_c: rc,
        max_residual,
        tolerance: tol,
        passed: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_tuples;
    use crate::delta::OptimizerOptions;
    use crate::extrinsic::{curvature_via_gauss, mean_curvature};

    fn tuple(n: usize, p: &[usize]) -> TupleSpec {
        TupleSpec::new(n, p.to_vec()).unwrap()
    }

    #[test]
    fn j_is_a_complex_structure() {
        let amb = ComplexAmbient::new(3, 0.0);
        let j = amb.j_matrix();
        assert_eq!(&j * &j, -DMatrix::identity(6, 6));
        assert_eq!(j.transpose() * &j, DMatrix::identity(6, 6));
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(amb.apply_j(&v), &j * &v);
    }

    #[test]
    fn symplectic_residuals() {
        let plane = ImmersionField::from_strings(
            &["u1", "u2", "0", "0"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(lagrangian_check(&plane, &[0.5, 0.5]).unwrap(), 0.0);
        // z ↦ (z, iz)
        let line = ImmersionField::from_strings(
            &["u1", "-u2", "u2", "u1"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!((lagrangian_check(&line, &[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-14);
        let odd = ImmersionField::from_strings(
            &["u1", "u2", "0"],
            &["u1", "u2"],
            CoordBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            BTreeMap::new(),
        )
        .unwrap();
        assert!(lagrangian_check(&odd, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn whitney_origin_is_the_double_point() {
        let w = whitney_immersion(3).unwrap();
        let x = w.position(&[0.0, 0.0, 0.0]).unwrap();
        assert!(x.norm() == 0.0);
        for p in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.3, -0.7, 0.2]] {
            w.check_rank(&p).unwrap();
            assert!(lagrangian_check(&w, &p).unwrap() < 1e-12);
            let data = LagrangianData::at(&w, &p).unwrap();
            assert!(data.cubic_symmetry_residual() < 1e-10);
        }
    }

    #[test]
    fn coefficients() {
        let c = lagrangian_coefficient(3, &tuple(3, &[2]), InequalityCase::L2).unwrap();
        assert_eq!(c, 1.5);
        for n in 3..=8 {
            let c = lagrangian_coefficient(n, &tuple(n, &[2]), InequalityCase::L2).unwrap();
            let nf = n as f64;
            assert!((c - nf * nf * (2.0 * nf - 3.0) / (2.0 * (2.0 * nf + 3.0))).abs() < 1e-12);
        }
        assert_eq!(lagrangian_coefficient(3, &tuple(3, &[2]), InequalityCase::L1).unwrap(), 2.25);
        let l3 = lagrangian_coefficient(4, &tuple(4, &[2, 2]), InequalityCase::L3).unwrap();
        assert!((l3 - 8.0 / 3.0).abs() < 1e-15);
        assert!(lagrangian_coefficient(4, &tuple(4, &[2]), InequalityCase::L3).is_err());
        assert!(lagrangian_coefficient(4, &tuple(4, &[2, 2]), InequalityCase::L2).is_err());
    }

    #[test]
    fn l2_improves_on_l1_and_l3_is_positive() {
        for n in 2..=8 {
            for t in enumerate_tuples(n).unwrap() {
                if t.sum() < n {
                    let l1 = lagrangian_coefficient(n, &t, InequalityCase::L1).unwrap();
                    let l2 = lagrangian_coefficient(n, &t, InequalityCase::L2).unwrap();
                    assert!(l2 < l1, "n={n} t={t}: {l2} !< {l1}");
                } else if t.sum() == n {
                    let l3 = lagrangian_coefficient(n, &t, InequalityCase::L3).unwrap();
                    assert!(l3.is_finite() && l3 > 0.0, "n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn totally_geodesic_saturates_l1() {
        // H = 0 in a complex space form of constant c: δ takes the
        // constant-curvature value and L1 is an equality
        for c in [-1.0, 0.0, 1.0] {
            let data = LagrangianData::from_cubic(3, |_, _, _| 0.0).unwrap();
            let pg = crate::extrinsic::PointGeometry::abstract_data(data.sff.clone(), c);
            let t = tuple(3, &[2]);
            let d = delta::delta_invariant(&pg.curvature, &t, &OptimizerOptions::default()).unwrap();
            let rep = lagrangian_inequality_check(&d, pg.mean.h2, &t, c, InequalityCase::L1, 1e-6).unwrap();
            assert!(rep.margin.abs() < 1e-12, "{rep:?}");
            let rep = lagrangian_inequality_check(&d, pg.mean.h2, &t, c, InequalityCase::L2, 1e-6).unwrap();
            assert!(rep.margin.abs() < 1e-12);
        }
    }

    /// Cubic form following the L2 equality pattern exactly.
    fn l2_pattern(n: usize, parts: &[usize], lambda: f64, block_free: f64) -> LagrangianData {
        let mu: usize = parts.iter().sum();
        let mut blk = vec![usize::MAX; n];
        let mut start = 0;
        for (i, &p) in parts.iter().enumerate() {
            for slot in blk.iter_mut().skip(start).take(p) {
                *slot = i;
            }
            start += p;
        }
        let pi = mu;
        // symmetric tensor assembled from its distinct index multisets
        LagrangianData::from_cubic(n, |a, b, c| {
            let mut idx = [a, b, c];
            idx.sort_unstable();
            let [x, y, z] = idx;
            let in_block = |i: usize| blk[i] != usize::MAX;
            let count_p = idx.iter().filter(|&&i| i == pi).count();
            let us: Vec<usize> = idx.iter().copied().filter(|&i| i > pi).collect();
            if idx.iter().all(|&i| in_block(i)) {
                if blk[x] == blk[y] && blk[y] == blk[z] {
                    // traceless in-block cubic: C(α,α,γ) sums to zero over α
                    return if x == y && y != z {
                        block_free
                    } else if y == z && x != y {
                        -block_free
                    } else {
                        0.0
                    };
                }
                return 0.0;
            }
            match (count_p, us.len()) {
                (3, 0) => 3.0 * lambda,
                (1, 0) if x == y && in_block(x) => 3.0 * lambda / (2.0 + parts[blk[x]] as f64),
                (1, 2) if us[0] == us[1] => lambda,
                _ => 0.0,
            }
        })
        .unwrap()
    }

    #[test]
    fn l2_pattern_is_recognized() {
        let data = l2_pattern(4, &[2], 0.7, 0.0);
        assert!(data.cubic_symmetry_residual() < 1e-15);
        let s = SubspaceTuple::new(DMatrix::identity(4, 4), vec![2]).unwrap();
        let rep = equality_form_check_l2(&data, &s, &tuple(4, &[2]), 1e-12).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.lambda - 0.7).abs() < 1e-15);
        // the pattern attains equality in L2
        let pg = crate::extrinsic::PointGeometry::abstract_data(data.sff.clone(), 0.0);
        let t = tuple(4, &[2]);
        let d = delta::delta_invariant(&pg.curvature, &t, &OptimizerOptions::default()).unwrap();
        let rep = lagrangian_inequality_check(&d, pg.mean.h2, &t, 0.0, InequalityCase::L2, 1e-9).unwrap();
        assert!(rep.margin.abs() < 1e-9, "{rep:?}");
    }

    #[test]
    fn flat_plane_passes_both_patterns() {
        let data = LagrangianData::from_cubic(4, |_, _, _| 0.0).unwrap();
        let s = SubspaceTuple::new(DMatrix::identity(4, 4), vec![2]).unwrap();
        assert!(equality_form_check_l2(&data, &s, &tuple(4, &[2]), 1e-12).unwrap().passed);
        let s = SubspaceTuple::new(DMatrix::identity(4, 4), vec![2, 2]).unwrap();
        assert!(equality_conditions_check_l3(&data, &s, &tuple(4, &[2, 2]), 1e-12).unwrap().passed);
    }

    fn l3_pattern(fault: f64) -> LagrangianData {
        // n = 4, blocks {0,1}, {2,3}; both blocks have the minimal size, so
        // condition (c) ties C(β,α,α) for α outside β's block to the trace
        let inner = |a: usize, b: usize, c: usize| -> f64 {
            // arbitrary in-block symmetric values
            let w = [0.3, -0.2, 0.5, 0.1];
            w[a] * w[b] * w[c] * 2.0 + 0.05 * (a + b + c) as f64
        };
        let block = |i: usize| i / 2;
        let trace = |beta: usize| -> f64 {
            let r = if block(beta) == 0 { 0..2 } else { 2..4 };
            r.map(|a| inner(beta, a, a)).sum()
        };
        LagrangianData::from_cubic(4, move |a, b, c| {
            let idx = [a, b, c];
            let blocks: Vec<usize> = idx.iter().map(|&i| block(i)).collect();
            if blocks.iter().all(|&x| x == blocks[0]) {
                let mut v = inner(a, b, c);
                let mut s = idx;
                s.sort_unstable();
                if s == [0, 0, 1] {
                    v += fault;
                }
                return v;
            }
            // mixed: only the pattern {β, α, α} with α in the other block
            let mut s = idx;
            s.sort_unstable();
            let (x, y, z) = (s[0], s[1], s[2]);
            let (beta, alpha) = if x == y && block(z) != block(x) {
                (z, x)
            } else if y == z && block(x) != block(y) {
                (x, y)
            } else {
                return 0.0;
            };
            let _ = alpha;
            trace(beta) / 4.0
        })
        .unwrap()
    }

    #[test]
    fn l3_conditions() {
        let s = SubspaceTuple::new(DMatrix::identity(4, 4), vec![2, 2]).unwrap();
        let t = tuple(4, &[2, 2]);
        let good = l3_pattern(0.0);
        let rep = equality_conditions_check_l3(&good, &s, &t, 1e-12).unwrap();
        assert!(rep.passed, "{rep:?}");
        let bad = l3_pattern(0.1);
        let rep = equality_conditions_check_l3(&bad, &s, &t, 1e-12).unwrap();
        assert!(!rep.passed);
        assert!((rep.condition_c - 0.1).abs() < 1e-12, "{rep:?}");
        assert!(equality_conditions_check_l3(&good, &s, &tuple(4, &[2]), 1e-12).is_err());
    }

    #[test]
    fn minimality_flags_injected_equality() {
        let t = tuple(3, &[2]);
        let honest = vec![
            LagrangianSample { point: vec![0.0], delta: 0.0, h2: 0.0, c: 0.0 },
            LagrangianSample { point: vec![1.0], delta: 0.1, h2: 0.5, c: 0.0 },
        ];
        let rep = minimality_at_equality_check(&honest, &t, 1e-6, 1e-6).unwrap();
        assert!(rep.passed && rep.equality_points == 1);
        let fake = vec![LagrangianSample { point: vec![2.0], delta: 2.25 * 0.5, h2: 0.5, c: 0.0 }];
        let rep = minimality_at_equality_check(&fake, &t, 1e-6, 1e-6).unwrap();
        assert_eq!(rep.flagged, vec![vec![2.0]]);
    }

    #[test]
    fn abstract_gauss_tensor_of_cubic_matches_sff() {
        let data = l2_pattern(4, &[2], 0.7, 0.2);
        let r = curvature_via_gauss(&data.sff, 0.0);
        assert!(r.bianchi_residual() < 1e-12);
        assert!(mean_curvature(&data.sff).h2 > 0.0);
    }
}
