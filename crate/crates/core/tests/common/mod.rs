#![allow(dead_code)]

use std::f64::consts::PI;

use metaplectic::symplectic::{Generator, SymplecticMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut impl Rng, d: usize, scale: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-scale..scale));
    (&m + m.transpose()) * 0.5
}

/// Well-conditioned invertible matrix: identity plus a small perturbation,
/// scaled and possibly reflected.
pub fn random_invertible(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d) + DMatrix::from_fn(d, d, |_, _| rng.random_range(-0.4..0.4));
    m *= rng.random_range(0.5..2.0);
    if rng.random_bool(0.5) {
        m.row_mut(0).neg_mut();
    }
    m
}

pub fn random_generator(rng: &mut impl Rng, d: usize) -> Generator {
    match rng.random_range(0..5) {
        0 => Generator::UpperShear { p: random_symmetric(rng, d, 1.5) },
        1 => Generator::LowerShear { q: random_symmetric(rng, d, 1.5) },
        2 => Generator::Dilation { l: random_invertible(rng, d) },
        3 => Generator::QuasiPermutation { index: rng.random_range(1..=2 * d) },
        _ => Generator::Standard,
    }
}

pub fn product(d: usize, factors: &[Generator]) -> SymplecticMatrix {
    factors.iter().fold(SymplecticMatrix::identity(d), |acc, g| {
        acc.compose(&SymplecticMatrix::generator(g, d).unwrap()).unwrap()
    })
}

/// Product of 1..=max_factors random generators; the factor list is the
/// ground truth for the matrix.
pub fn random_symplectic(rng: &mut impl Rng, d: usize, max_factors: usize) -> SymplecticMatrix {
    let count = rng.random_range(1..=max_factors);
    let factors: Vec<Generator> = (0..count).map(|_| random_generator(rng, d)).collect();
    product(d, &factors)
}

/// `D_L U_P`, upper block triangular by construction.
pub fn random_upper(rng: &mut impl Rng, d: usize) -> SymplecticMatrix {
    product(
        d,
        &[
            Generator::Dilation { l: random_invertible(rng, d) },
            Generator::UpperShear { p: random_symmetric(rng, d, 1.5) },
        ],
    )
}

pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m * m.transpose() + DMatrix::identity(n, n) * rng.random_range(0.3..1.5)
}

/// `int_R f` by double-exponential quadrature after `t = u / (1 - u^2)`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, abs_tol: f64) -> f64 {
    let g = |u: f64| {
        let w = 1.0 - u * u;
        if w <= 0.0 {
            return 0.0;
        }
        let t = u / w;
        let v = f(t) * (1.0 + u * u) / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    quadrature::integrate(g, -1.0, 1.0, abs_tol).integral
}

/// Quadrature value of `int exp(-pi t.A t + 2 pi beta.t) dt` for `n <= 2`.
pub fn gaussian_integral_by_quadrature(a: &DMatrix<f64>, beta: &[f64]) -> f64 {
    let expo = |t: &[f64]| {
        let mut q = 0.0;
        for i in 0..t.len() {
            for j in 0..t.len() {
                q += t[i] * a[(i, j)] * t[j];
            }
        }
        let lin: f64 = t.iter().zip(beta).map(|(x, b)| x * b).sum();
        (-PI * q + 2.0 * PI * lin).exp()
    };
    match beta.len() {
        1 => integrate_line(|t| expo(&[t]), 1e-14),
        2 => integrate_line(|s| integrate_line(|t| expo(&[s, t]), 1e-14), 1e-13),
        n => panic!("quadrature oracle supports n <= 2, got {n}"),
    }
}

/// All index sets over `1..=2d` that never contain both `i` and `i + d`.
pub fn reduced_index_sets(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1..(1usize << (2 * d)) {
        let set: Vec<usize> = (1..=2 * d).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if (1..=d).any(|i| set.contains(&i) && set.contains(&(i + d))) {
            continue;
        }
        out.push(set);
    }
    out
}

pub mod strategies {
    use metaplectic::symplectic::{Generator, SymplecticMatrix};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    pub fn symmetric(d: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-scale..scale, d * d).prop_map(move |v| {
            let m = DMatrix::from_vec(d, d, v);
            (&m + m.transpose()) * 0.5
        })
    }

    pub fn invertible(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (prop::collection::vec(-0.4..0.4, d * d), 0.5..2.0f64, any::<bool>()).prop_map(move |(v, s, flip)| {
            let mut m = (DMatrix::identity(d, d) + DMatrix::from_vec(d, d, v)) * s;
            if flip {
                m.row_mut(0).neg_mut();
            }
            m
        })
    }

    pub fn generator(d: usize) -> impl Strategy<Value = Generator> {
        prop_oneof![
            symmetric(d, 1.5).prop_map(|p| Generator::UpperShear { p }),
            symmetric(d, 1.5).prop_map(|q| Generator::LowerShear { q }),
            invertible(d).prop_map(|l| Generator::Dilation { l }),
            (1..=2 * d).prop_map(|index| Generator::QuasiPermutation { index }),
            Just(Generator::Standard),
        ]
    }

    /// Random product of 1..=5 generators in dimension 1..=max_d.
    pub fn symplectic(max_d: usize) -> impl Strategy<Value = SymplecticMatrix> {
        (1..=max_d).prop_flat_map(|d| {
            prop::collection::vec(generator(d), 1..=5).prop_map(move |f| super::product(d, &f))
        })
    }

    pub fn upper(max_d: usize) -> impl Strategy<Value = SymplecticMatrix> {
        (1..=max_d).prop_flat_map(|d| {
            (invertible(d), symmetric(d, 1.5)).prop_map(move |(l, p)| {
                super::product(d, &[Generator::Dilation { l }, Generator::UpperShear { p }])
            })
        })
    }
}
