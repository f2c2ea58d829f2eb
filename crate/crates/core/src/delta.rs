//! δ-invariants `δ(n₁,…,n_k) = τ − inf Σⱼ τ(Lⱼ)` at a point.
//!
//! Every tuple of mutually orthogonal subspaces is the leading column blocks
//! of one orthonormal frame, so the infimum is taken over the orthogonal
//! group. The objective restricted to a Givens rotation of two columns from
//! different blocks is a quadratic form in `(cos θ, sin θ)`, so each
//! coordinate step is solved exactly by a 2×2 eigenproblem.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_tuples, TupleSpec};
use crate::curvature::{ricci_form, scalar_tau, CurvatureTensor, ORTHONORMAL_TOL};
use crate::error::{Error, Result};
use crate::linalg;

/// Default dimension cap for sweeps over all of `S(n)`.
pub const DEFAULT_DIMENSION_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Total restarts: coordinate frame, Ricci eigenbasis, then random frames.
    pub restarts: usize,
    /// Maximum sweeps over all admissible Givens pairs per restart.
    pub max_iters: usize,
    /// Master seed for the random restarts.
    pub seed: u64,
    /// Stop when one sweep improves the objective by less than this.
    pub tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 32,
            max_iters: 500,
            seed: 0x5EED,
            tol: 1e-12,
        }
    }
}

/// Mutually orthogonal subspaces `L₁,…,L_k` given by the leading column
/// blocks of an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceTuple {
    frame: DMatrix<f64>,
    blocks: Vec<usize>,
}

impl SubspaceTuple {
    pub fn new(frame: DMatrix<f64>, blocks: Vec<usize>) -> Result<Self> {
        if frame.nrows() != frame.ncols() {
            return Err(Error::Invalid("frame must be square".into()));
        }
        if blocks.iter().sum::<usize>() > frame.ncols() {
            return Err(Error::InvalidTuple("blocks exceed frame size".into()));
        }
        let residual = linalg::orthonormality_residual(&frame);
        if residual > 1e-9 {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(SubspaceTuple { frame, blocks })
    }

    /// Frame vectors (columns) in the curvature tensor's frame.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    /// Column ranges `Δ₁,…,Δ_k`.
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|&b| {
                let r = start..start + b;
                start += b;
                r
            })
            .collect()
    }

    /// The trailing range `Δ_{k+1}` (possibly empty).
    pub fn trailing(&self) -> Range<usize> {
        self.blocks.iter().sum::<usize>()..self.frame.ncols()
    }

    pub fn matches(&self, t: &TupleSpec) -> bool {
        self.blocks == t.parts() && self.frame.ncols() == t.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub tuple: TupleSpec,
    pub tau: f64,
    pub inf_sum: f64,
    pub delta: f64,
    pub coeff_c: f64,
    pub normalized: f64,
    pub minimizer: SubspaceTuple,
    pub restarts_used: usize,
    /// True when the value is exact rather than an optimizer bound.
    pub certified: bool,
    /// False when some restart hit the sweep limit before converging.
    pub converged: bool,
}

/// `τ(L) = Σ_{α<β} K(e_α∧e_β)` over an orthonormal basis of `L`.
pub fn tau_of_subspace(r: &CurvatureTensor, basis: &[Vec<f64>]) -> Result<f64> {
    if basis.len() < 2 {
        return Err(Error::Invalid(format!("subspace of dimension {} < 2", basis.len())));
    }
    let n = r.dim();
    let mut residual = 0.0f64;
    for (a, u) in basis.iter().enumerate() {
        if u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: u.len() });
        }
        for v in &basis[a..] {
            let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
            let target = if std::ptr::eq(u, v) { 1.0 } else { 0.0 };
            residual = residual.max((d - target).abs());
        }
    }
    if residual > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    let mut t = 0.0;
    for a in 0..basis.len() {
        for b in (a + 1)..basis.len() {
            t += r.sectional_unchecked(&basis[a], &basis[b]);
        }
    }
    Ok(t)
}

/// `Σⱼ τ(Lⱼ)` for the blocks of `frame` (columns in the tensor's frame).
pub fn subspace_sum(r: &CurvatureTensor, frame: &DMatrix<f64>, blocks: &[usize]) -> f64 {
    let cols: Vec<Vec<f64>> = (0..frame.ncols()).map(|c| frame.column(c).iter().copied().collect()).collect();
    let mut start = 0;
    let mut total = 0.0;
    for &b in blocks {
        for a in start..start + b {
            for c in (a + 1)..start + b {
                total += r.sectional_unchecked(&cols[a], &cols[c]);
            }
        }
        start += b;
    }
    total
}

/// `c(n₁,…,n_k) = n²(n+k−1−Σnⱼ) / (2(n+k−Σnⱼ))`; equals `n(n−1)/2` for
/// the empty tuple.
pub fn normalizing_coefficient(n: usize, t: &TupleSpec) -> Result<f64> {
    if t.n() != n {
        return Err(Error::InvalidTuple(format!("tuple {t} belongs to S({}), not S({n})", t.n())));
    }
    TupleSpec::new(n, t.parts().to_vec())?;
    let (n, k, s) = (n as f64, t.k() as f64, t.sum() as f64);
    let den = 2.0 * (n + k - s);
    if den <= 0.0 {
        return Err(Error::InvalidTuple(format!("degenerate coefficient for {t}")));
    }
    Ok(n * n * (n + k - 1.0 - s) / den)
}

/// `(c/2)(n(n−1) − Σ nⱼ(nⱼ−1))`, the δ-invariant of constant curvature `c`.
pub fn constant_curvature_delta(t: &TupleSpec, c: f64) -> f64 {
    let n = t.n();
    0.5 * c * (n * (n - 1) - t.pair_count_sum()) as f64
}

/// Working copy of a curvature tensor that is rotated in place.
struct WorkTensor {
    n: usize,
    data: Vec<f64>,
}

impl WorkTensor {
    fn new(r: &CurvatureTensor) -> Self {
        let n = r.dim();
        let mut data = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(r.get(i, j, k, l));
                    }
                }
            }
        }
        WorkTensor { n, data }
    }

    #[inline]
    fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    /// Replace frame vectors a, b by `c e_a + s e_b`, `−s e_a + c e_b`.
    fn rotate(&mut self, a: usize, b: usize, c: f64, s: f64) {
        let n = self.n;
        for slot in 0..4u32 {
            let stride = n.pow(3 - slot);
            for base in 0..self.data.len() {
                if !(base / stride).is_multiple_of(n) {
                    continue;
                }
                let (pa, pb) = (base + a * stride, base + b * stride);
                let (x, y) = (self.data[pa], self.data[pb]);
                self.data[pa] = c * x + s * y;
                self.data[pb] = -s * x + c * y;
            }
        }
    }
}

struct RestartOutcome {
    inf_sum: f64,
    frame: DMatrix<f64>,
    converged: bool,
}

fn minimize_from(r: &CurvatureTensor, groups: &[Option<usize>], start: DMatrix<f64>, opts: &OptimizerOptions) -> RestartOutcome {
    let n = r.dim();
    let mut work = WorkTensor::new(&r.rotated(&start));
    let mut q = start;
    let members: Vec<Vec<usize>> = {
        let k = groups.iter().flatten().max().map_or(0, |m| m + 1);
        (0..k)
            .map(|g| (0..n).filter(|&i| groups[i] == Some(g)).collect())
            .collect()
    };
    // 2×2 block of Σ_{γ ∈ G(a)∖{a}} R(x,γ;γ,y) for x, y ∈ {a, b}
    let partial = |w: &WorkTensor, own: usize, other: usize| -> [f64; 3] {
        let Some(g) = groups[own] else {
            return [0.0; 3];
        };
        let mut m = [0.0; 3];
        for &gam in &members[g] {
            if gam == own {
                continue;
            }
            m[0] += w.get(own, gam, gam, own);
            m[1] += w.get(own, gam, gam, other);
            m[2] += w.get(other, gam, gam, other);
        }
        m
    };
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let mut gain = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                if groups[a] == groups[b] {
                    continue;
                }
                let pa = partial(&work, a, b);
                // P_B in the (b, a) ordering, mapped through J: JᵀPJ swaps the
                // diagonal and negates the off-diagonal.
                let pb = partial(&work, b, a);
                let m00 = pa[0] + pb[0];
                let m11 = pa[2] + pb[2];
                let m01 = pa[1] - pb[1];
                let mean = 0.5 * (m00 + m11);
                let rad = (0.25 * (m00 - m11).powi(2) + m01 * m01).sqrt();
                let lambda = mean - rad;
                let improvement = m00 - lambda;
                if !(improvement > 1e-15 * (1.0 + m00.abs())) {
                    continue;
                }
                let (mut c, mut s) = if (lambda - m00).abs() > (lambda - m11).abs() {
                    (m01, lambda - m00)
                } else {
                    (lambda - m11, m01)
                };
                let norm = c.hypot(s);
                if norm == 0.0 {
                    continue;
                }
                c /= norm;
                s /= norm;
                if c < 0.0 {
                    c = -c;
                    s = -s;
                }
                work.rotate(a, b, c, s);
                for row in 0..n {
                    let (x, y) = (q[(row, a)], q[(row, b)]);
                    q[(row, a)] = c * x + s * y;
                    q[(row, b)] = -s * x + c * y;
                }
                gain += improvement;
            }
        }
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    let blocks: Vec<usize> = members.iter().map(Vec::len).collect();
    RestartOutcome {
        inf_sum: subspace_sum(r, &q, &blocks),
        frame: q,
        converged,
    }
}

/// Starting frame for restart `index`.
pub fn restart_seed_frame(r: &CurvatureTensor, index: usize, master_seed: u64) -> DMatrix<f64> {
    let n = r.dim();
    match index {
        0 => DMatrix::identity(n, n),
        // ascending eigenvalues: the largest Ricci direction lands in the
        // trailing slot
        1 => linalg::sym_eigen(&ricci_form(r)).1,
        i => {
            let stream = master_seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            linalg::random_orthogonal(n, &mut rng)
        }
    }
}

pub fn delta_invariant(r: &CurvatureTensor, t: &TupleSpec, opts: &OptimizerOptions) -> Result<DeltaResult> {
    let n = r.dim();
    if t.n() != n {
        return Err(Error::InvalidTuple(format!("tuple {t} is not in S({n})")));
    }
    let tau = scalar_tau(r);
    let coeff_c = normalizing_coefficient(n, t)?;
    if t.is_empty() {
        return Ok(DeltaResult {
            tuple: t.clone(),
            tau,
            inf_sum: 0.0,
            delta: tau,
            coeff_c,
            normalized: tau / coeff_c,
            minimizer: SubspaceTuple::new(DMatrix::identity(n, n), Vec::new())?,
            restarts_used: 0,
            certified: true,
            converged: true,
        });
    }
    let mut groups = vec![None; n];
    let mut col = 0;
    for (g, &size) in t.parts().iter().enumerate() {
        for slot in groups.iter_mut().skip(col).take(size) {
            *slot = Some(g);
        }
        col += size;
    }
    let restarts = opts.restarts.max(1);
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|i| minimize_from(r, &groups, restart_seed_frame(r, i, opts.seed), opts))
        .collect();
    // ordered reduction: the first restart wins ties
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.inf_sum < outcomes[best].inf_sum {
            best = i;
        }
    }
    let converged = outcomes.iter().all(|o| o.converged);
    let best = outcomes.into_iter().nth(best).expect("at least one restart");
    let scale = tau.abs().max(1.0);
    let certified = t.parts() == [n - 1] || r.constant_curvature_value(1e-12 * scale).is_some();
    let delta = tau - best.inf_sum;
    Ok(DeltaResult {
        tuple: t.clone(),
        tau,
        inf_sum: best.inf_sum,
        delta,
        coeff_c,
        normalized: delta / coeff_c,
        minimizer: SubspaceTuple::new(best.frame, t.parts().to_vec())?,
        restarts_used: restarts,
        certified,
        converged,
    })
}

/// δ for every tuple of `S(n)`, in enumeration order.
pub fn delta_all(r: &CurvatureTensor, opts: &OptimizerOptions) -> Result<Vec<DeltaResult>> {
    enumerate_tuples(r.dim())?
        .iter()
        .map(|t| delta_invariant(r, t, opts))
        .collect()
}

/// Arg-max of the normalized δ over a full result set; ties go to the
/// earlier tuple (smaller k, then lexicographic).
pub fn argmax_normalized(results: &[DeltaResult]) -> Option<&DeltaResult> {
    let mut best: Option<&DeltaResult> = None;
    for d in results {
        match best {
            Some(b) if d.normalized <= b.normalized + 1e-12 => {}
            _ => best = Some(d),
        }
    }
    best
}

/// Maximal normalized δ-invariant `Δ̂₀` and the tuple attaining it.
pub fn delta_hat0(r: &CurvatureTensor, opts: &OptimizerOptions, cap: usize) -> Result<(f64, TupleSpec, Vec<DeltaResult>)> {
    if r.dim() > cap {
        return Err(Error::DimensionCap { dim: r.dim(), cap });
    }
    let all = delta_all(r, opts)?;
    let best = argmax_normalized(&all).expect("S(n) is never empty");
    let (v, t) = (best.normalized, best.tuple.clone());
    Ok((v, t, all))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximumPrincipleReport {
    pub t_equal: TupleSpec,
    pub normalized_equal: f64,
    /// max over t of Δ(t) − Δ(t_equal); ≤ tol on pass.
    pub max_violation: f64,
    pub worst_tuple: TupleSpec,
    pub passed: bool,
}

/// At a point where `H² = Δ(t_equal)`, checks `Δ(t_equal) ≥ Δ(t)` for all `t`.
pub fn maximum_principle_check(results: &[DeltaResult], t_equal: &TupleSpec, tol: f64) -> Result<MaximumPrincipleReport> {
    let n = t_equal.n();
    let expected = enumerate_tuples(n)?;
    for t in &expected {
        if !results.iter().any(|d| &d.tuple == t) {
            return Err(Error::MissingData(format!("no δ result for tuple {t}")));
        }
    }
    let eq = results
        .iter()
        .find(|d| &d.tuple == t_equal)
        .expect("checked above")
        .normalized;
    let mut worst = (f64::NEG_INFINITY, t_equal.clone());
    for d in results {
        let v = d.normalized - eq;
        if v > worst.0 {
            worst = (v, d.tuple.clone());
        }
    }
    Ok(MaximumPrincipleReport {
        t_equal: t_equal.clone(),
        normalized_equal: eq,
        max_violation: worst.0,
        worst_tuple: worst.1,
        passed: worst.0 <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_tensor(h: &[Vec<Vec<f64>>]) -> CurvatureTensor {
        let n = h[0].len();
        CurvatureTensor::from_fn(n, DMatrix::identity(n, n), |i, j, k, l| {
            h.iter().map(|hr| hr[i][l] * hr[j][k] - hr[i][k] * hr[j][l]).sum()
        })
    }

    #[test]
    fn subspace_scalar_curvature() {
        let r = CurvatureTensor::constant_curvature(4, 1.0);
        let e = |i: usize| {
            let mut v = vec![0.0; 4];
            v[i] = 1.0;
            v
        };
        assert_eq!(tau_of_subspace(&r, &[e(0), e(1)]).unwrap(), 1.0);
        assert_eq!(tau_of_subspace(&r, &[e(0), e(1), e(3)]).unwrap(), 3.0);
        let flat = CurvatureTensor::flat(4);
        assert_eq!(tau_of_subspace(&flat, &[e(0), e(2)]).unwrap(), 0.0);
        assert!(tau_of_subspace(&r, &[e(0), vec![0.6, 0.8, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn coefficients() {
        let t = |n, p: Vec<usize>| TupleSpec::new(n, p).unwrap();
        assert_eq!(normalizing_coefficient(3, &t(3, vec![2])).unwrap(), 9.0 / 4.0);
        assert_eq!(normalizing_coefficient(4, &t(4, vec![2, 2])).unwrap(), 4.0);
        assert_eq!(normalizing_coefficient(5, &t(5, vec![])).unwrap(), 10.0);
        assert!(normalizing_coefficient(4, &t(3, vec![2])).is_err());
    }

    #[test]
    fn sphere_delta_two() {
        let r = CurvatureTensor::constant_curvature(3, 1.0);
        let d = delta_invariant(&r, &TupleSpec::new(3, vec![2]).unwrap(), &OptimizerOptions::default()).unwrap();
        assert!((d.delta - 2.0).abs() < 1e-12);
        assert!(d.certified);
        assert_eq!(d.tau, 3.0);
    }

    #[test]
    fn hyperplane_tuple_is_max_ricci() {
        let h = vec![
            vec![vec![1.0, 0.3, 0.0, 0.2], vec![0.3, -0.4, 0.5, 0.0], vec![0.0, 0.5, 0.8, -0.6], vec![0.2, 0.0, -0.6, 0.1]],
            vec![vec![0.2, 0.0, 0.1, 0.0], vec![0.0, 0.9, 0.0, 0.3], vec![0.1, 0.0, -1.0, 0.0], vec![0.0, 0.3, 0.0, 0.4]],
        ];
        let r = gauss_tensor(&h);
        let (lmax, _) = crate::curvature::max_ricci(&r);
        let d = delta_invariant(&r, &TupleSpec::new(4, vec![3]).unwrap(), &OptimizerOptions::default()).unwrap();
        assert!((d.delta - lmax).abs() < 1e-9, "{} vs {lmax}", d.delta);
        assert!(d.certified && d.converged);
    }

    #[test]
    fn flat_gives_zero() {
        let r = CurvatureTensor::flat(4);
        for t in enumerate_tuples(4).unwrap() {
            let d = delta_invariant(&r, &t, &OptimizerOptions::default()).unwrap();
            assert_eq!(d.delta, 0.0);
        }
        let (v, t, _) = delta_hat0(&r, &OptimizerOptions::default(), DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!((v, t.is_empty()), (0.0, true));
    }

    #[test]
    fn sphere_hat_delta_is_one_at_empty_tuple() {
        for n in 2..=6 {
            let r = CurvatureTensor::constant_curvature(n, 1.0);
            let (v, t, all) = delta_hat0(&r, &OptimizerOptions::default(), DEFAULT_DIMENSION_CAP).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
            assert!(t.is_empty());
            let mp = maximum_principle_check(&all, &t, 1e-9).unwrap();
            assert!(mp.passed);
        }
        let r = CurvatureTensor::constant_curvature(9, 1.0);
        assert!(matches!(
            delta_hat0(&r, &OptimizerOptions::default(), DEFAULT_DIMENSION_CAP),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn maximum_principle_needs_full_map() {
        let r = CurvatureTensor::constant_curvature(4, 1.0);
        let all = delta_all(&r, &OptimizerOptions::default()).unwrap();
        assert!(maximum_principle_check(&all[..2], &TupleSpec::empty(4), 1e-9).is_err());
        // a non-maximal tuple fails
        let mp = maximum_principle_check(&all, &TupleSpec::new(4, vec![2]).unwrap(), 1e-9).unwrap();
        assert!(!mp.passed);
        assert!(mp.worst_tuple.is_empty());
    }

    #[test]
    fn restarts_are_monotone() {
        let h = vec![
            vec![vec![1.0, 0.3, 0.0, 0.2], vec![0.3, -0.4, 0.5, 0.0], vec![0.0, 0.5, 0.8, -0.6], vec![0.2, 0.0, -0.6, 0.1]],
        ];
        let r = gauss_tensor(&h);
        let t = TupleSpec::new(4, vec![2]).unwrap();
        let mut prev = f64::INFINITY;
        for restarts in [1, 2, 4, 8, 16, 32] {
            let o = OptimizerOptions { restarts, ..Default::default() };
            let d = delta_invariant(&r, &t, &o).unwrap();
            assert!(d.inf_sum <= prev);
            prev = d.inf_sum;
        }
    }
}
