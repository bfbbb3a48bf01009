mod common;

use metaplectic::classifier::ExponentPair;
use metaplectic::gaussian::{
    case_ratio, mixed_norm_composed, mixed_norm_dilated, plan_witness, profile, spatial_coefficient, witness_point,
    GaussianWitness, Regime,
};
use metaplectic::symplectic::{reduce_special, Generator, SymplecticMatrix, Variant};
use nalgebra::DMatrix;

fn pair(p: &str, q: &str) -> ExponentPair {
    ExponentPair::parse(p, q).unwrap()
}

fn is_spd(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

fn quasi_product(d: usize, indices: impl IntoIterator<Item = usize>) -> SymplecticMatrix {
    let factors: Vec<Generator> = indices.into_iter().map(|index| Generator::QuasiPermutation { index }).collect();
    common::product(d, &factors)
}

#[test]
fn quadratic_forms_are_positive_definite() {
    let mut rng = common::rng(21);
    for i in 0..500 {
        let s = common::random_symplectic(&mut rng, 1 + i % 3, 5);
        for eps in [1.01, 1.5, 10.0] {
            let forms = GaussianWitness::for_matrix(&s, eps).unwrap().sigma_beta_omega().unwrap();
            assert!(is_spd(&forms.sigma), "Sigma not SPD for {s:?} at eps={eps}");
            assert!(is_spd(&forms.omega), "Omega not SPD for {s:?} at eps={eps}");
        }
    }
}

#[test]
fn forms_for_identity() {
    for eps in [1.2, 2.0, 7.0] {
        let f = GaussianWitness::new(eps, DMatrix::identity(4, 4)).unwrap().sigma_beta_omega().unwrap();
        let delta2 = 1.0 - 1.0 / (eps * eps);
        assert!((f.sigma - DMatrix::identity(2, 2) * delta2).abs().max() < 1e-15);
        assert!(f.beta.abs().max() == 0.0);
        assert!((f.omega - DMatrix::identity(2, 2) / (eps * eps)).abs().max() < 1e-15);
        assert!((spatial_coefficient(eps) - delta2).abs() < 1e-15);
    }
}

#[test]
fn forms_for_quasi_permutation_products() {
    let eps: f64 = 1.7;
    let (delta2, e2) = (1.0 - eps.powi(-2), eps.powi(-2));
    for d in 1..=3 {
        for k in 0..=d {
            let inner = quasi_product(d, k + 1..=d);
            let f = GaussianWitness::new(eps, inner.into_matrix()).unwrap().sigma_beta_omega().unwrap();
            let sigma = DMatrix::from_fn(d, d, |i, j| if i != j { 0.0 } else if i < k { delta2 } else { e2 });
            let omega = DMatrix::from_fn(d, d, |i, j| if i != j { 0.0 } else if i < k { e2 } else { delta2 });
            assert!((f.sigma - sigma).abs().max() < 1e-14, "d={d} k={k}");
            assert!(f.beta.abs().max() < 1e-15);
            assert!((f.omega - omega).abs().max() < 1e-14, "d={d} k={k}");
        }
    }
}

#[test]
fn forms_for_diagonal_shear() {
    let eps: f64 = 1.3;
    let lambda = [0.5, -2.0];
    let q = DMatrix::from_diagonal(&nalgebra::dvector![lambda[0], lambda[1]]);
    let inner = SymplecticMatrix::generator(&Generator::LowerShear { q: -q }, 2).unwrap();
    let f = GaussianWitness::new(eps, inner.into_matrix()).unwrap().sigma_beta_omega().unwrap();
    for i in 0..2 {
        let want = 1.0 - eps.powi(-2) + lambda[i] * lambda[i] * eps.powi(-2);
        assert!((f.sigma[(i, i)] - want).abs() < 1e-14);
    }
    assert!(f.sigma[(0, 1)].abs() < 1e-15);
}

#[test]
fn identity_norm_matches_plane_quadrature() {
    let eps = 2f64.sqrt();
    let oracle = common::integrate_line(
        |x| common::integrate_line(|w| profile(eps, &[x], &[w]).powi(2), 1e-14),
        1e-13,
    )
    .sqrt();
    assert!((oracle - 1.0).abs() < 1e-9);
    let r = mixed_norm_dilated(&SymplecticMatrix::identity(1), eps, pair("2", "2")).unwrap();
    assert!((r.value - oracle).abs() < 1e-9, "{} vs {oracle}", r.value);
}

#[test]
fn identity_norm_matches_orthogonality_relation() {
    // Plain quadrature over a window wide enough for the narrow Gaussian.
    let l2 = |scale: f64| {
        let half = 8.0 / scale.sqrt();
        quadrature::integrate(|t| (-2.0 * std::f64::consts::PI * scale * t * t).exp(), -half, half, 1e-15)
            .integral
            .sqrt()
    };
    for eps in [1.05f64, 1.5, 3.0, 20.0] {
        let g = l2(1.0);
        let f = l2(eps * eps - 1.0);
        let r = mixed_norm_dilated(&SymplecticMatrix::identity(1), eps, pair("2", "2")).unwrap();
        let lhs = r.value / eps;
        assert!((lhs - f * g).abs() <= 1e-9 * f * g, "eps={eps}: {lhs} vs {}", f * g);
    }
}

#[test]
fn diagonal_exponents_see_no_matrix() {
    let mut rng = common::rng(22);
    for i in 0..100 {
        let d = 1 + i % 3;
        let s = common::random_symplectic(&mut rng, d, 5);
        for p in ["1", "2", "3.5", "inf"] {
            let e = pair(p, p);
            for eps in [1.1, 3.0] {
                let a = mixed_norm_dilated(&s, eps, e).unwrap().log_value;
                let b = mixed_norm_dilated(&SymplecticMatrix::identity(d), eps, e).unwrap().log_value;
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{p}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn upper_triangular_ratio_is_constant() {
    let mut rng = common::rng(23);
    for i in 0..50 {
        let d = 1 + i % 3;
        let s = common::random_upper(&mut rng, d);
        for e in [pair("1", "2"), pair("2", "1"), pair("1", "inf"), pair("2", "4")] {
            let ratios: Vec<f64> = [1.01, 1.5, 4.0, 50.0]
                .iter()
                .map(|&eps| {
                    let a = mixed_norm_dilated(&s, eps, e).unwrap().log_value;
                    let b = mixed_norm_dilated(&SymplecticMatrix::identity(d), eps, e).unwrap().log_value;
                    a - b
                })
                .collect();
            let spread = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-8, "{spread}");
        }
    }
}

fn assert_flat_against_exact(form: &metaplectic::symplectic::SpecialForm, e: ExponentPair) {
    let d = form.d;
    let core = form.core().into_matrix();
    let diffs: Vec<f64> = [1.001, 1.05, 1.5, 4.0, 30.0]
        .iter()
        .map(|&eps| {
            let exact = mixed_norm_composed(&core, eps, e).unwrap().log_value
                - mixed_norm_composed(&DMatrix::identity(2 * d, 2 * d), eps, e).unwrap().log_value;
            exact - case_ratio(form, eps, e).unwrap().log_value
        })
        .collect();
    let spread = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.02f64.ln(), "{form:?} {e:?}: {diffs:?}");
}

const PAIRS: [(&str, &str); 5] = [("1", "2"), ("2", "1"), ("1", "inf"), ("inf", "1"), ("2", "4")];

fn variant_for(e: ExponentPair) -> Variant {
    if e.half_gap() > 0.0 {
        Variant::VQThenPi
    } else {
        Variant::PiThenVQ
    }
}

#[test]
fn case_ratio_tracks_the_exact_ratio_without_shear() {
    let mut rng = common::rng(24);
    for i in 0..40 {
        let d = 1 + i % 3;
        let swaps: Vec<usize> = (1..=d).filter(|_| rand::Rng::random_bool(&mut rng, 0.5)).collect();
        // Diagonal dilations commute with the swaps up to a diagonal, so the
        // core stays shear free.
        let mut diag = || {
            let v: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, 0.3..3.0)).collect();
            Generator::Dilation { l: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(v)) }
        };
        let (left, right) = (diag(), diag());
        let s = common::product(d, &[left])
            .compose(&quasi_product(d, swaps))
            .unwrap()
            .compose(&common::product(d, &[right]))
            .unwrap();
        for (p, q) in PAIRS {
            let e = pair(p, q);
            let form = reduce_special(&s, variant_for(e), 1e-9).unwrap();
            assert!(form.q_prime_is_zero(1e-9 * s.matrix().norm().powi(2)), "{form:?}");
            assert_flat_against_exact(&form, e);
        }
    }
}

#[test]
fn case_ratio_tracks_the_exact_ratio_for_diagonal_shears() {
    let mut rng = common::rng(26);
    for i in 0..40 {
        let d = 1 + i % 3;
        let diag: Vec<f64> = (0..d).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        let s = SymplecticMatrix::generator(&Generator::LowerShear { q }, d).unwrap();
        for (p, q) in PAIRS {
            let e = pair(p, q);
            let form = reduce_special(&s, variant_for(e), 1e-9).unwrap();
            assert_eq!(form.k, d);
            assert_flat_against_exact(&form, e);
        }
    }
}

#[test]
fn witness_slope_matches_prediction_at_the_ends() {
    let mut rng = common::rng(25);
    for i in 0..40 {
        let d = 1 + i % 2;
        let s = common::random_symplectic(&mut rng, d, 4);
        for e in [pair("1", "2"), pair("2", "1"), pair("1", "inf"), pair("2", "4")] {
            let plan = plan_witness(&s, e).unwrap();
            let (a, b) = match plan.regime {
                Regime::Upper => (1e6f64, 1e7f64),
                Regime::Lower => (1e-12f64, 1e-11f64),
            };
            let lr = |x: f64| witness_point(&plan, (1.0 + x).sqrt(), e).unwrap().log_ratio();
            let slope = (lr(b) - lr(a)) / (b / a).ln();
            assert!((slope - plan.predicted).abs() < 0.02, "{s:?} {e:?}: {slope} vs {}", plan.predicted);
        }
    }
}
