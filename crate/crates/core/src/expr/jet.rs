use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated second-order Taylor jet of a scalar function of `n` variables.
///
/// The Hessian is stored as its packed upper triangle, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Jet2 {
    pub fn constant(n: usize, value: f64) -> Self {
        Jet2 {
            value,
            gradient: vec![0.0; n],
            hess: vec![0.0; n * (n + 1) / 2],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(n: usize, index: usize, value: f64) -> Self {
        let mut j = Jet2::constant(n, value);
        j.gradient[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[packed(self.dim(), i, j)]
    }

    /// Dense row-major Hessian.
    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.hessian(i, j)).collect())
            .collect()
    }

    /// Compose with a scalar function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let gradient: Vec<f64> = self.gradient.iter().map(|g| f1 * g).collect();
        let mut hess = vec![0.0; self.hess.len()];
        for i in 0..n {
            for j in i..n {
                let k = packed(n, i, j);
                let curv = if f2 == 0.0 {
                    0.0
                } else {
                    f2 * self.gradient[i] * self.gradient[j]
                };
                let lin = if f1 == 0.0 { 0.0 } else { f1 * self.hess[k] };
                hess[k] = lin + curv;
            }
        }
        Jet2 {
            value: f0,
            gradient,
            hess,
        }
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Natural logarithm; caller guarantees a positive value.
    pub fn ln(&self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    /// Square root; caller guarantees a positive value.
    pub fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(&self) -> Self {
        let t = self.value.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    /// `self^e` for a constant exponent. Integer exponents accept any base
    /// except zero with a negative exponent.
    pub fn powf(&self, e: f64) -> Self {
        let v = self.value;
        if e == 0.0 {
            return Jet2::constant(self.dim(), 1.0);
        }
        if e == 1.0 {
            return self.clone();
        }
        if e == 2.0 {
            return self.chain(v * v, 2.0 * v, 2.0);
        }
        if e.fract() == 0.0 && e.abs() < 1024.0 {
            let k = e as i32;
            return self.chain(
                v.powi(k),
                e * v.powi(k - 1),
                e * (e - 1.0) * v.powi(k - 2),
            );
        }
        self.chain(v.powf(e), e * v.powf(e - 1.0), e * (e - 1.0) * v.powf(e - 2.0))
    }

    fn product(a: &Jet2, b: &Jet2) -> Jet2 {
        let n = a.dim();
        let gradient = (0..n)
            .map(|i| a.value * b.gradient[i] + b.value * a.gradient[i])
            .collect();
        let mut hess = vec![0.0; a.hess.len()];
        for i in 0..n {
            for j in i..n {
                let k = packed(n, i, j);
                hess[k] = a.value * b.hess[k]
                    + b.value * a.hess[k]
                    + a.gradient[i] * b.gradient[j]
                    + a.gradient[j] * b.gradient[i];
            }
        }
        Jet2 {
            value: a.value * b.value,
            gradient,
            hess,
        }
    }

    fn zip(a: &Jet2, b: &Jet2, value: f64, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        Jet2 {
            value,
            gradient: a
                .gradient
                .iter()
                .zip(&b.gradient)
                .map(|(x, y)| f(*x, *y))
                .collect(),
            hess: a.hess.iter().zip(&b.hess).map(|(x, y)| f(*x, *y)).collect(),
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2::zip(&self, &rhs, self.value + rhs.value, |x, y| x + y)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2::zip(&self, &rhs, self.value - rhs.value, |x, y| x - y)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2::product(&self, &rhs)
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        Jet2::product(&self, &rhs.recip())
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        self.value = -self.value;
        self.gradient.iter_mut().for_each(|g| *g = -*g);
        self.hess.iter_mut().for_each(|h| *h = -*h);
        self
    }
}
