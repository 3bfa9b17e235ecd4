#![allow(dead_code)]

use ait_core::{EigenvalueSpec, OperatorSpec};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ordinates on a half-unit grid in [-4, 4]; their q^s images stay well separated for q = 2, 1/2.
const GRID: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
const DELTAS: [f64; 3] = [0.05, 0.1, 0.2];

/// Seeded spec with total dimension <= 10, Jordan sizes <= 4 and conditioning <= 1e3.
/// Off-line eigenvalues always come as mirrored pairs so the strip symmetry holds.
pub fn seeded_spec(seed: u64) -> OperatorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ordinates: Vec<f64> = GRID.iter().flat_map(|&g| [g, -g]).collect();
    ordinates.shuffle(&mut rng);
    let mut budget: usize = rng.random_range(2..=10);
    let mut blocks = Vec::new();
    for gamma in ordinates {
        if budget == 0 {
            break;
        }
        if budget >= 2 && rng.random_bool(0.3) {
            let delta = DELTAS[rng.random_range(0..DELTAS.len())];
            blocks.push(EigenvalueSpec::new(Complex64::new(0.5 - delta, gamma), 1));
            blocks.push(EigenvalueSpec::new(Complex64::new(0.5 + delta, gamma), 1));
            budget -= 2;
        } else {
            let size = if rng.random_bool(0.6) { 1 } else { rng.random_range(1..=budget.min(4)) };
            blocks.push(EigenvalueSpec::new(Complex64::new(0.5, gamma), size));
            budget -= size;
        }
    }
    let conditioning = 10f64.powf(rng.random_range(0.3..=3.0));
    OperatorSpec::new(blocks).with_seed(seed + 1).with_conditioning(conditioning)
}

pub fn seeded_specs(count: usize) -> Vec<OperatorSpec> {
    (0..count as u64).map(|k| seeded_spec(1000 + k)).collect()
}

/// Ground-truth `sum_i m_i phi(s_i)` over eigenvalues with `|Im| < y`.
pub fn window_sum(spec: &OperatorSpec, y: f64, phi: impl Fn(Complex64) -> Complex64) -> Complex64 {
    spec.blocks.iter().filter(|b| b.im.abs() < y).map(|b| phi(Complex64::new(b.re, b.im)) * b.jordan_size as f64).sum()
}
