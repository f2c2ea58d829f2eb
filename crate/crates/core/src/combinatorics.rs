//! The tuple set `S(n)` indexing the δ-invariants, its cardinality
//! `p(n) − 1`, and the Nash embedding dimension.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical element `(n₁ ≤ … ≤ n_k)` of `S(n)`; the empty tuple is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TupleSpec {
    n: usize,
    parts: Vec<usize>,
}

impl TupleSpec {
    /// Validates and sorts `parts`.
    pub fn new(n: usize, mut parts: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTuple(format!("dimension {n} < 2")));
        }
        parts.sort_unstable();
        if let Some(p) = parts.iter().find(|&&p| p < 2 || p > n - 1) {
            return Err(Error::InvalidTuple(format!("part {p} outside [2, {}]", n - 1)));
        }
        let sum: usize = parts.iter().sum();
        if sum > n {
            return Err(Error::InvalidTuple(format!("parts sum to {sum} > {n}")));
        }
        Ok(TupleSpec { n, parts })
    }

    pub fn empty(n: usize) -> Self {
        TupleSpec { n, parts: Vec::new() }
    }

    /// Parse `"2,3"` (empty string or `"()"` for the empty tuple).
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let t = text.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() {
            return TupleSpec::new(n, Vec::new());
        }
        let parts = t
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidTuple(format!("bad part `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        TupleSpec::new(n, parts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn sum(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `Σ nⱼ(nⱼ − 1)`.
    pub fn pair_count_sum(&self) -> usize {
        self.parts.iter().map(|p| p * (p - 1)).sum()
    }
}

impl fmt::Display for TupleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", inner.join(","))
    }
}

/// All of `S(n)`, ordered by `k` then lexicographically.
pub fn enumerate_tuples(n: usize) -> Result<Vec<TupleSpec>> {
    if n < 2 {
        return Err(Error::InvalidTuple(format!("dimension {n} < 2")));
    }
    let mut all = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, min: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for p in min..n {
            if p > remaining {
                break;
            }
            cur.push(p);
            rec(n, p, remaining - p, cur, out);
            cur.pop();
        }
    }
    rec(n, 2, n, &mut cur, &mut all);
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(all.into_iter().map(|parts| TupleSpec { n, parts }).collect())
}

/// `p(0..=n)` by Euler's pentagonal-number recurrence.
pub fn partition_table(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for i in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > i {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let mut term = p[i - g1].clone();
            if g2 <= i {
                term += &p[i - g2];
            }
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p[i] = acc;
    }
    p
}

pub fn partition_count(n: usize) -> BigInt {
    partition_table(n).pop().unwrap_or_else(BigInt::one)
}

/// `#S(n) = p(n) − 1`.
pub fn cardinality(n: usize) -> Result<BigInt> {
    if n < 2 {
        return Err(Error::InvalidTuple(format!("dimension {n} < 2")));
    }
    Ok(partition_count(n) - 1)
}

/// `exp(π√(2n/3)) / (4n√3)`.
pub fn asymptotic_cardinality(n: usize) -> f64 {
    let n = n as f64;
    (std::f64::consts::PI * (2.0 * n / 3.0).sqrt()).exp() / (4.0 * n * 3f64.sqrt())
}

/// Ambient dimension `n(n+1)(3n+11)/2` of Nash's embedding theorem.
pub fn nash_dimension(n: u64) -> u64 {
    n * (n + 1) * (3 * n + 11) / 2
}
