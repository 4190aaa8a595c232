//! Seeded random fields for exercising universal identities.
//!
//! The metric family is `δ + ε·Q(x)` where every entry of `Q` is a random
//! quadratic form in the coordinates, on the box `[-1, 1]^n`. Scalars,
//! vector fields and symmetric tensors are random low-degree polynomials
//! plus one trigonometric term, so their derivatives of every order are
//! nonzero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Chart, MetricField, SymTensorField, VectorField};
use crate::error::Result;
use crate::expr::{sum, Expr};

/// Perturbation size used by the identity suites.
pub const DEFAULT_EPSILON: f64 = 0.1;

fn coeff(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

fn quadratic_form(rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let mut terms = Vec::new();
    for a in 0..n {
        for b in a..n {
            terms.push(coeff(rng) * (Expr::coord(a) * Expr::coord(b)));
        }
    }
    sum(terms)
}

/// Random polynomial of degree ≤ 3 plus `a·sin(b·x_k + c)`.
pub fn random_scalar_with(rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let mut terms = vec![Expr::constant(coeff(rng))];
    for a in 0..n {
        terms.push(coeff(rng) * Expr::coord(a));
    }
    terms.push(quadratic_form(rng, n));
    // a few cubic monomials
    for _ in 0..n {
        let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        terms.push(coeff(rng) * (Expr::coord(i) * Expr::coord(j) * Expr::coord(k)));
    }
    let k = rng.gen_range(0..n);
    let (a, b, c) = (coeff(rng), 1.0 + coeff(rng).abs(), coeff(rng));
    terms.push(a * (b * Expr::coord(k) + c).sin());
    sum(terms)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `g = δ + ε·Q(x)` on `[-1, 1]^n`.
pub fn random_metric(seed: u64, n: usize, epsilon: f64) -> Result<MetricField> {
    let mut rng = rng_for(seed, 1);
    let chart = Chart::cube("x", n, -1.0, 1.0)?;
    let g = SymTensorField::from_fn(n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + epsilon * quadratic_form(&mut rng, n)
    });
    MetricField::new(chart, g)
}

pub fn random_scalar(seed: u64, n: usize) -> Expr {
    random_scalar_with(&mut rng_for(seed, 2), n)
}

pub fn random_vector(seed: u64, n: usize) -> VectorField {
    let mut rng = rng_for(seed, 3);
    VectorField((0..n).map(|_| random_scalar_with(&mut rng, n)).collect())
}

pub fn random_sym(seed: u64, n: usize) -> SymTensorField {
    let mut rng = rng_for(seed, 4);
    SymTensorField::from_fn(n, |_, _| random_scalar_with(&mut rng, n))
}
