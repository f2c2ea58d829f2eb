//! Point-level algebraic curvature tensors and the curvatures derived from them.
//!
//! Convention: `R(i,j,k,l)` is `R(e_i,e_j;e_k,e_l)` with sectional curvature
//! `K(e_i∧e_j) = R(i,j,j,i)`, so the unit sphere has `K = +1` and the Gauss
//! equation reads `R(X,Y;Z,W) = <h(X,W),h(Y,Z)> − <h(X,Z),h(Y,W)>`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance for unit length / orthogonality of plane sections.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    data: Vec<f64>,
    frame: DMatrix<f64>,
}

impl CurvatureTensor {
    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    /// Build from raw components, projecting onto the symmetries
    /// `R_ijkl = −R_jikl = −R_ijlk = R_klij`. These hold exactly afterwards.
    pub fn from_fn(n: usize, frame: DMatrix<f64>, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = CurvatureTensor {
            n,
            data: vec![0.0; n * n * n * n],
            frame,
        };
        let anti = |i, j, k, l| (f(i, j, k, l) - f(j, i, k, l) - f(i, j, l, k) + f(j, i, l, k)) / 4.0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    for l in (k + 1)..n {
                        if (k, l) < (i, j) {
                            continue;
                        }
                        let s = (anti(i, j, k, l) + anti(k, l, i, j)) / 2.0;
                        for (a, b, c, d) in [(i, j, k, l), (k, l, i, j)] {
                            let p = t.idx(a, b, c, d);
                            t.data[p] = s;
                            let p = t.idx(b, a, c, d);
                            t.data[p] = -s;
                            let p = t.idx(a, b, d, c);
                            t.data[p] = -s;
                            let p = t.idx(b, a, d, c);
                            t.data[p] = s;
                        }
                    }
                }
            }
        }
        t
    }

    pub fn flat(n: usize) -> Self {
        CurvatureTensor::constant_curvature(n, 0.0)
    }

    /// Tensor of constant sectional curvature `c` in an orthonormal frame.
    pub fn constant_curvature(n: usize, c: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        CurvatureTensor::from_fn(n, DMatrix::identity(n, n), |i, j, k, l| {
            c * (d(i, l) * d(j, k) - d(i, k) * d(j, l))
        })
    }

    /// Parse a nested `n×n×n×n` array.
    pub fn from_nested(values: &[Vec<Vec<Vec<f64>>>]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::Invalid("curvature array needs dimension >= 2".into()));
        }
        let shape_ok = values.iter().all(|a| {
            a.len() == n && a.iter().all(|b| b.len() == n && b.iter().all(|c| c.len() == n))
        });
        if !shape_ok {
            return Err(Error::Invalid("curvature array is not n×n×n×n".into()));
        }
        let raw = CurvatureTensor::from_fn(n, DMatrix::identity(n, n), |i, j, k, l| values[i][j][k][l]);
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        dev = dev.max((raw.get(i, j, k, l) - values[i][j][k][l]).abs());
                    }
                }
            }
        }
        if dev > 1e-9 {
            return Err(Error::Invalid(format!(
                "curvature array violates tensor symmetries by {dev:e}"
            )));
        }
        Ok(raw)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| (0..n).map(|l| self.get(i, j, k, l)).collect()).collect())
                    .collect()
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Frame vectors (columns) in chart coordinates.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    /// `R(x, y; z, w)` for vectors given in frame coordinates.
    pub fn eval4(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 || i == j {
                    continue;
                }
                let xy = x[i] * y[j];
                for k in 0..n {
                    if z[k] == 0.0 {
                        continue;
                    }
                    let base = self.idx(i, j, k, 0);
                    let mut s = 0.0;
                    for l in 0..n {
                        s += self.data[base + l] * w[l];
                    }
                    acc += xy * z[k] * s;
                }
            }
        }
        acc
    }

    /// `K(u∧v)` for an orthonormal pair, without validation.
    pub fn sectional_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        self.eval4(u, v, v, u)
    }

    /// Change of orthonormal frame: columns of `q` are the new frame vectors
    /// expressed in the current frame.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let n = self.n;
        // contract one slot at a time
        let mut cur = self.data.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; cur.len()];
            let stride = n.pow(3 - slot as u32);
            for base in 0..cur.len() {
                let digit = (base / stride) % n;
                if digit != 0 {
                    continue;
                }
                for a in 0..n {
                    let mut s = 0.0;
                    for i in 0..n {
                        s += cur[base + i * stride] * q[(i, a)];
                    }
                    next[base + a * stride] = s;
                }
            }
            cur = next;
        }
        let frame = &self.frame * q;
        CurvatureTensor::from_fn(n, frame, |i, j, k, l| cur[((i * n + j) * n + k) * n + l])
    }

    /// max |R_ijkl − R_klij|; zero by construction.
    pub fn pair_symmetry_residual(&self) -> f64 {
        self.max_over(|t, i, j, k, l| (t.get(i, j, k, l) - t.get(k, l, i, j)).abs())
    }

    /// max |R_ijkl + R_jikl| + |R_ijkl + R_ijlk|; zero by construction.
    pub fn antisymmetry_residual(&self) -> f64 {
        self.max_over(|t, i, j, k, l| {
            (t.get(i, j, k, l) + t.get(j, i, k, l)).abs() + (t.get(i, j, k, l) + t.get(i, j, l, k)).abs()
        })
    }

    /// max |R_ijkl + R_jkil + R_kijl|.
    pub fn bianchi_residual(&self) -> f64 {
        self.max_over(|t, i, j, k, l| (t.get(i, j, k, l) + t.get(j, k, i, l) + t.get(k, i, j, l)).abs())
    }

    fn max_over(&self, f: impl Fn(&Self, usize, usize, usize, usize) -> f64) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max(f(self, i, j, k, l));
                    }
                }
            }
        }
        worst
    }

    /// Componentwise max |self − other|.
    pub fn max_difference(&self, other: &CurvatureTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// `Some(c)` when every component matches constant curvature `c`
    /// within `tol`.
    pub fn constant_curvature_value(&self, tol: f64) -> Option<f64> {
        let n = self.n;
        let c = scalar_tau(self) / (n * (n - 1) / 2) as f64;
        let model = CurvatureTensor::constant_curvature(n, c);
        (self.max_difference(&model) <= tol).then_some(c)
    }
}

/// An orthonormal pair spanning a tangent 2-plane, in frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSection {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl PlaneSection {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let residual = (dot(&u, &u) - 1.0)
            .abs()
            .max((dot(&v, &v) - 1.0).abs())
            .max(dot(&u, &v).abs());
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(PlaneSection { u, v })
    }

    /// Plane spanned by frame vectors `i` and `j`.
    pub fn coordinate(n: usize, i: usize, j: usize) -> Self {
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        u[i] = 1.0;
        v[j] = 1.0;
        PlaneSection { u, v }
    }

    pub fn vectors(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.v)
    }
}

pub fn sectional_curvature(r: &CurvatureTensor, plane: &PlaneSection) -> Result<f64> {
    if plane.u.len() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: plane.u.len(),
        });
    }
    Ok(r.sectional_unchecked(&plane.u, &plane.v))
}

/// Symmetric matrix `Q` with `uᵀQu = Ric(u) = Σ_j K(u∧e_j)` for unit `u`.
pub fn ricci_form(r: &CurvatureTensor) -> DMatrix<f64> {
    let n = r.dim();
    let mut q = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let s: f64 = (0..n).map(|j| r.get(a, j, j, b)).sum();
            q[(a, b)] = s;
            q[(b, a)] = s;
        }
    }
    q
}

/// Largest eigenvalue of the Ricci form with its unit eigenvector.
pub fn max_ricci(r: &CurvatureTensor) -> (f64, DVector<f64>) {
    let (vals, vecs) = linalg::sym_eigen(&ricci_form(r));
    let n = vals.len();
    (vals[n - 1], vecs.column(n - 1).into_owned())
}

/// `τ = Σ_{i<j} K(e_i∧e_j)`.
pub fn scalar_tau(r: &CurvatureTensor) -> f64 {
    let n = r.dim();
    let mut t = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            t += r.get(i, j, j, i);
        }
    }
    t
}
