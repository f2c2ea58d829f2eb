//! The optimizer against independent oracles: brute-force random frames,
//! closed forms for space forms, and the hyperplane identity.

mod common;

use dinv::combinatorics::{enumerate_tuples, TupleSpec};
use dinv::curvature::{max_ricci, scalar_tau, CurvatureTensor};
use dinv::delta::{constant_curvature_delta, delta_invariant, OptimizerOptions};
use dinv::linalg::random_orthogonal;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Σ_j Σ_{a<b in block j} R(e_a, e_b, e_b, e_a), straight from the components.
fn oracle_sum(r: &CurvatureTensor, q: &DMatrix<f64>, blocks: &[usize]) -> f64 {
    let n = r.dim();
    let k = |a: usize, b: usize| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        s += r.get(i, j, l, m) * q[(i, a)] * q[(j, b)] * q[(l, b)] * q[(m, a)];
                    }
                }
            }
        }
        s
    };
    let mut start = 0;
    let mut total = 0.0;
    for &len in blocks {
        for a in start..start + len {
            for b in a + 1..start + len {
                total += k(a, b);
            }
        }
        start += len;
    }
    total
}

#[test]
fn optimizer_dominates_random_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let opts = OptimizerOptions::default();
    for n in [3, 4] {
        let (r, _, _) = common::random_gauss_tensor(n, &mut rng);
        let tuples = enumerate_tuples(n).unwrap();
        let found: Vec<f64> = tuples.iter().map(|t| delta_invariant(&r, t, &opts).unwrap().inf_sum).collect();
        let best = (0..100_000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
                let q = random_orthogonal(n, &mut rng);
                tuples.iter().map(|t| oracle_sum(&r, &q, t.parts())).collect::<Vec<_>>()
            })
            .reduce(
                || vec![f64::INFINITY; tuples.len()],
                |a, b| a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect(),
            );
        for ((t, f), b) in tuples.iter().zip(&found).zip(&best) {
            assert!(*f <= b + 1e-8, "n={n} {t}: optimizer {f} above random {b}");
        }
    }
}

#[test]
fn minimizer_frame_reproduces_its_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let opts = OptimizerOptions::default();
    let (r, _, _) = common::random_gauss_tensor(5, &mut rng);
    for t in enumerate_tuples(5).unwrap() {
        let d = delta_invariant(&r, &t, &opts).unwrap();
        let again = oracle_sum(&r, d.minimizer.frame(), t.parts());
        assert!((again - d.inf_sum).abs() < 1e-10, "{t}");
        assert!((d.delta - (scalar_tau(&r) - d.inf_sum)).abs() < 1e-12);
    }
}

#[test]
fn delta_is_orthogonally_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let opts = OptimizerOptions::default();
    for n in 3..=5 {
        let (r, _, _) = common::random_gauss_tensor(n, &mut rng);
        let s = r.rotated(&random_orthogonal(n, &mut rng));
        for t in enumerate_tuples(n).unwrap() {
            let a = delta_invariant(&r, &t, &opts).unwrap().delta;
            let b = delta_invariant(&s, &t, &opts).unwrap().delta;
            assert!((a - b).abs() < 1e-8, "{t}: {a} vs {b}");
        }
    }
}

#[test]
fn hyperplane_delta_is_the_largest_ricci_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let opts = OptimizerOptions::default();
    for i in 0..200 {
        let n = 3 + i % 3;
        let (r, _, _) = common::random_gauss_tensor(n, &mut rng);
        let t = TupleSpec::new(n, vec![n - 1]).unwrap();
        let d = delta_invariant(&r, &t, &opts).unwrap().delta;
        let (ric, _) = max_ricci(&r);
        assert!((d - ric).abs() <= 1e-6, "sample {i}: {d} vs {ric}");
    }
}

#[test]
fn space_forms_match_the_closed_form() {
    let opts = OptimizerOptions::default();
    for c in [-1.0, 0.0, 1.0, 2.0] {
        for n in 2..=6 {
            let r = CurvatureTensor::constant_curvature(n, c);
            let mut tuples = enumerate_tuples(n).unwrap();
            tuples.push(TupleSpec::empty(n));
            for t in tuples {
                let d = delta_invariant(&r, &t, &opts).unwrap();
                let want = constant_curvature_delta(&t, c);
                assert!((d.delta - want).abs() <= 1e-10, "c={c} {t}: {} vs {want}", d.delta);
                let inside: usize = t.parts().iter().map(|p| p * (p - 1) / 2).sum();
                let pairs = (n * (n - 1) / 2 - inside) as f64;
                assert!((want - c * pairs).abs() <= 1e-12);
            }
        }
    }
}
