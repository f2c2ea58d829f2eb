#![allow(dead_code)]

use dinv::curvature::CurvatureTensor;
use dinv::extrinsic::{curvature_via_gauss, SecondFundamentalForm};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Symmetric `n×n` matrix with standard normal entries.
pub fn random_symmetric<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

pub fn random_sff<R: Rng>(n: usize, codim: usize, rng: &mut R) -> SecondFundamentalForm {
    let comps = (0..codim).map(|_| random_symmetric(n, rng)).collect();
    SecondFundamentalForm::from_components(comps).unwrap()
}

/// A tensor realized by the Gauss equation in a space form, so it is an
/// honest algebraic curvature tensor of some submanifold.
pub fn random_gauss_tensor<R: Rng>(n: usize, rng: &mut R) -> (CurvatureTensor, SecondFundamentalForm, f64) {
    let codim = rng.random_range(1..=3);
    let h = random_sff(n, codim, rng);
    let c = rng.random_range(-1.0..2.0);
    (curvature_via_gauss(&h, c), h, c)
}
