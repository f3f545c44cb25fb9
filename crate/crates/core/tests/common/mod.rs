#![allow(dead_code)]

use cqed_gates::{AtomSpec, CMatrix, CavitySpec, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

pub fn random_state(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_cavity(rng: &mut ChaCha8Rng) -> CavitySpec {
    let mut c = CavitySpec::new(
        rng.gen_range(0.2..10.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..2.0),
    )
    .unwrap();
    c.omega_c = rng.gen_range(-3.0..3.0);
    c
}

pub fn random_atom(rng: &mut ChaCha8Rng) -> AtomSpec {
    AtomSpec::resonant(rng.gen_range(0.0..25.0)).with_detuning(rng.gen_range(-20.0..20.0))
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn baseline_cavity() -> CavitySpec {
    CavitySpec::new(2.5, 0.1, 0.1).unwrap()
}
