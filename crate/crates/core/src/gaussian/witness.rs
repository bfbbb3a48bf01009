//! Witness families certifying unboundedness, and their closed-form ratios.
//!
//! `T = S^{-1}` is reduced to `T = L * core * R` with `L`, `R` upper block
//! triangular. A pre-composition `W` is chosen so that `W * T` cancels the
//! shear in the core where that helps; the measured ratio is
//! `|| f o (W T) || / || f o W ||`. Upper block triangular factors change
//! mixed norms only by `eps`-independent constants. For a shear core with
//! `p < q` the witness measures the inverse direction, so its log-ratio is
//! minus the [`case_ratio`] one up to a constant; otherwise they agree up to
//! a constant.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{excess, mixed_norm_composed, LogValue};
use crate::classifier::ExponentPair;
use crate::error::{Error, Result};
use crate::linalg::{default_tolerance, max_abs, sym_eigen_sorted};
use crate::symplectic::{lower_shear, reduce_special, SpecialForm, SymplecticMatrix, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    /// `p = q`: the ratio is identically 1.
    Diagonal,
    /// Upper block triangular: the ratio is constant.
    Bounded,
    /// Pure quasi-permutation core.
    Permutation,
    /// Shear core with `p < q`.
    ShearBelow,
    /// Shear core with `p > q`.
    ShearAbove,
}

/// Which end of the `eps` range carries the asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `eps -> inf`.
    Upper,
    /// `eps -> 1+`.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPlan {
    pub case: WitnessCase,
    pub d: usize,
    pub k: usize,
    pub q_prime: DMatrix<f64>,
    /// Eigenvalues of `Q'`, sorted by decreasing magnitude.
    pub eigenvalues: Vec<f64>,
    /// Pre-composition `W`.
    pub transform: DMatrix<f64>,
    /// `S^{-1}`.
    pub inner: DMatrix<f64>,
    /// Asymptotic slope of the log-ratio against `ln(eps^2 - 1)`.
    pub predicted: f64,
    pub regime: Regime,
}

fn numeric_rank(values: &[f64], tol: f64) -> usize {
    let scale = values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    values.iter().filter(|v| v.abs() > tol * scale).count()
}

/// Build the witness family for `S` at exponents `e`.
pub fn plan_witness(s: &SymplecticMatrix, e: ExponentPair) -> Result<WitnessPlan> {
    let d = s.dim();
    let tol = default_tolerance();
    let inner = s.inverse().into_matrix();
    if e.is_diagonal() {
        return Ok(WitnessPlan {
            case: WitnessCase::Diagonal,
            d,
            k: d,
            q_prime: DMatrix::zeros(d, d),
            eigenvalues: vec![0.0; d],
            transform: DMatrix::identity(2 * d, 2 * d),
            inner,
            predicted: 0.0,
            regime: Regime::Upper,
        });
    }
    let a = e.half_gap();
    let variant = if a > 0.0 { Variant::VQThenPi } else { Variant::PiThenVQ };
    let form = reduce_special(&SymplecticMatrix::from_trusted(inner.clone()), variant, tol)?;
    let (eigenvalues, _) = sym_eigen_sorted(&form.q_prime);
    let lres_inv = form.prefactor.inverse().into_matrix();
    let scale = inner.norm().max(1.0);
    let shear_free = max_abs(&form.q_prime) <= tol * scale * scale;

    let (case, core_inverse, predicted, regime) = if shear_free {
        if form.k == d {
            (WitnessCase::Bounded, None, 0.0, Regime::Upper)
        } else {
            let slope = (d - form.k) as f64 * a;
            let regime = if slope > 0.0 { Regime::Upper } else { Regime::Lower };
            (WitnessCase::Permutation, None, slope, regime)
        }
    } else {
        let (case, w_core) = match variant {
            // core = V_Q' Pi, cancelled by V_{-Q'}.
            Variant::VQThenPi => (WitnessCase::ShearBelow, lower_shear(&(-&form.q_prime))),
            // core = Pi V_Q', pre-composed with Pi.
            Variant::PiThenVQ => (WitnessCase::ShearAbove, form.swap_part()),
        };
        let (predicted, regime) = if form.k < d {
            ((d - form.k) as f64 * a.abs(), Regime::Upper)
        } else {
            (-(numeric_rank(&eigenvalues, tol) as f64) * a.abs(), Regime::Lower)
        };
        (case, Some(w_core), predicted, regime)
    };
    let transform = match core_inverse {
        Some(w) => w * lres_inv,
        None => lres_inv,
    };
    Ok(WitnessPlan {
        case,
        d,
        k: form.k,
        q_prime: form.q_prime,
        eigenvalues,
        transform,
        inner,
        predicted,
        regime,
    })
}

/// Log-norms of the witness pair at one `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub eps: f64,
    /// `ln || f o W ||`.
    pub log_base: f64,
    /// `ln || f o (W S^{-1}) ||`.
    pub log_dilated: f64,
}

impl WitnessPoint {
    pub fn log_ratio(&self) -> f64 {
        self.log_dilated - self.log_base
    }
}

pub fn witness_point(plan: &WitnessPlan, eps: f64, e: ExponentPair) -> Result<WitnessPoint> {
    let base = mixed_norm_composed(&plan.transform, eps, e)?;
    let dilated = mixed_norm_composed(&(&plan.transform * &plan.inner), eps, e)?;
    Ok(WitnessPoint { eps, log_base: base.log_value, log_dilated: dilated.log_value })
}

/// Closed-form ratio for a reduced matrix, up to an `eps`-independent
/// constant.
///
/// Without shear: `(eps^2 - 1)^{(d-k) a}` with `a = 1/(2p) - 1/(2q)`. With a
/// shear `Q'` of eigenvalues `l_i` the form must be the variant matching the
/// sign of `a` and the ratio is
/// `prod_i (l_i^2 + eps^2 - 1)^{-a} * (eps^2 - 1)^{k a}`. For `p < q` this
/// tends to 0 as `eps -> 1+`, so the inverse operator is the one that blows up.
pub fn case_ratio(form: &SpecialForm, eps: f64, e: ExponentPair) -> Result<LogValue> {
    if e.is_diagonal() {
        return Err(Error::Domain("p = q has no witness ratio".into()));
    }
    if !(eps > 1.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be finite and > 1, got {eps}")));
    }
    let a = e.half_gap();
    let x = excess(eps);
    if form.q_prime_is_zero(default_tolerance()) {
        return Ok(LogValue::from_log((form.d - form.k) as f64 * a * x.ln()));
    }
    let expected = if a > 0.0 { Variant::VQThenPi } else { Variant::PiThenVQ };
    if form.variant != expected {
        return Err(Error::Domain(format!(
            "a shear core needs the {expected:?} form for these exponents"
        )));
    }
    let (eigs, _) = sym_eigen_sorted(&form.q_prime);
    let sum: f64 = eigs.iter().map(|l| (l * l + x).ln()).sum();
    Ok(LogValue::from_log(-a * (sum - form.k as f64 * x.ln())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::Generator;
    use approx::assert_relative_eq;

    fn pair(p: &str, q: &str) -> ExponentPair {
        ExponentPair::parse(p, q).unwrap()
    }

    #[test]
    fn case_ratio_examples() {
        let up = SymplecticMatrix::generator(
            &Generator::UpperShear { p: DMatrix::from_element(1, 1, 1.0) },
            1,
        )
        .unwrap();
        let f = reduce_special(&up, Variant::VQThenPi, 1e-9).unwrap();
        assert_eq!(case_ratio(&f, 3.0, pair("1", "2")).unwrap().value, 1.0);

        let j = SymplecticMatrix::standard(1);
        let f = reduce_special(&j, Variant::VQThenPi, 1e-9).unwrap();
        assert_relative_eq!(
            case_ratio(&f, 2f64.sqrt(), pair("1", "inf")).unwrap().value,
            1.0,
            epsilon = 1e-15
        );

        let vq = SymplecticMatrix::generator(
            &Generator::LowerShear { q: DMatrix::from_element(1, 1, 1.0) },
            1,
        )
        .unwrap();
        let f = reduce_special(&vq, Variant::VQThenPi, 1e-9).unwrap();
        let near = case_ratio(&f, 1.0 + 1e-8, pair("1", "2")).unwrap();
        assert!(near.log_value < -4.0);
        let near = case_ratio(&reduce_special(&vq, Variant::PiThenVQ, 1e-9).unwrap(), 1.0 + 1e-8, pair("2", "1")).unwrap();
        assert!(near.log_value > 4.0);
        assert!(matches!(
            case_ratio(&reduce_special(&vq, Variant::PiThenVQ, 1e-9).unwrap(), 1.5, pair("1", "2")),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn plan_classifies_cases() {
        let j = SymplecticMatrix::standard(1);
        let p = plan_witness(&j, pair("1", "inf")).unwrap();
        assert_eq!(p.case, WitnessCase::Permutation);
        assert_eq!(p.predicted, 0.5);
        assert_eq!(p.regime, Regime::Upper);

        let vq = SymplecticMatrix::generator(
            &Generator::LowerShear { q: DMatrix::from_element(1, 1, 1.0) },
            1,
        )
        .unwrap();
        let p = plan_witness(&vq, pair("1", "2")).unwrap();
        assert_eq!(p.case, WitnessCase::ShearBelow);
        assert_eq!(p.predicted, -0.25);
        assert_eq!(p.regime, Regime::Lower);
        let p = plan_witness(&vq, pair("2", "1")).unwrap();
        assert_eq!(p.case, WitnessCase::ShearAbove);
        assert_eq!(p.predicted, -0.25);
    }
}
