//! Jet derivatives against high-order finite differences of the plain value.

use std::collections::BTreeMap;

use dinv::expr::Expression;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["x", "y", "z"];

/// Random smooth expression in x, y, z, kept well-conditioned on [-1, 1]^3.
fn random_text(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.7) {
            VARS[rng.random_range(0..3)].to_string()
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let a = random_text(rng, depth - 1);
    match rng.random_range(0..11) {
        0 => format!("sin({a})"),
        1 => format!("cos({a})"),
        2 => format!("tanh({a})"),
        3 => format!("exp(0.3*{a})"),
        4 => format!("sqrt(1.5 + ({a})^2)"),
        5 => format!("ln(2 + ({a})^2)"),
        6 => format!("-({a})"),
        op => {
            let b = random_text(rng, depth - 1);
            match op {
                7 => format!("({a}) + ({b})"),
                8 => format!("({a}) - ({b})"),
                9 => format!("({a}) * ({b})"),
                _ => format!("({a}) / (2 + ({b})^2)"),
            }
        }
    }
}

fn value(e: &Expression, p: &[f64]) -> f64 {
    e.eval_value(p, &BTreeMap::new()).unwrap()
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, d) in moves {
        q[i] += d;
    }
    q
}

/// Fourth-order central difference.
fn fd_gradient(e: &Expression, p: &[f64], i: usize) -> f64 {
    let h = 1e-3;
    let f = |d: f64| value(e, &shifted(p, &[(i, d)]));
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Richardson-extrapolated second difference.
fn fd_hessian(e: &Expression, p: &[f64], i: usize, j: usize) -> f64 {
    let d = |h: f64| {
        if i == j {
            let f = |s: f64| value(e, &shifted(p, &[(i, s)]));
            (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)
        } else {
            let f = |a: f64, b: f64| value(e, &shifted(p, &[(i, a), (j, b)]));
            (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
        }
    };
    let h = 1e-2;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jets_match_finite_differences(seed in any::<u64>(), p in prop::array::uniform3(-1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_text(&mut rng, 4);
        let e = Expression::parse(&text, &VARS, &[] as &[&str]).unwrap();
        let jet = e.eval_jet2(&p, &BTreeMap::new()).unwrap();
        prop_assert!(close(jet.value, value(&e, &p), 1e-14), "{text}");
        for i in 0..3 {
            let fd = fd_gradient(&e, &p, i);
            prop_assert!(close(jet.gradient[i], fd, 1e-6), "d{i} of {text}: {} vs {fd}", jet.gradient[i]);
            for j in 0..3 {
                let fd = fd_hessian(&e, &p, i, j);
                let h = jet.hessian(i, j);
                prop_assert!(close(h, fd, 1e-6), "d{i}d{j} of {text}: {h} vs {fd}");
            }
        }
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>(), p in prop::array::uniform3(-1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_text(&mut rng, 4);
        let e = Expression::parse(&text, &VARS, &[] as &[&str]).unwrap();
        let again = Expression::parse(&e.to_string(), &VARS, &[] as &[&str]).unwrap();
        prop_assert!(close(value(&e, &p), value(&again, &p), 1e-13), "{text} -> {e}");
    }
}

#[test]
fn parameters_bind_by_name() {
    let e = Expression::parse("r*sin(x)", &["x"], &["r"]).unwrap();
    let params = BTreeMap::from([("r".to_string(), 2.0)]);
    let jet = e.eval_jet2(&[0.5], &params).unwrap();
    assert!((jet.gradient[0] - 2.0 * 0.5f64.cos()).abs() < 1e-15);
    assert!(e.eval_value(&[0.5], &BTreeMap::new()).is_err());
}
