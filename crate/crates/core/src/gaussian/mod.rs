//! Closed forms for the dilated Gaussian family: the Gaussian integral, the
//! ambiguity function of a dilated Gaussian against the standard one, and
//! exact mixed norms of the resulting profile after a linear change of
//! variables.
//!
//! The standard Gaussian is `g(t) = exp(-pi |t|^2)` (not L^2-normalized).
//! For `eps > 1` the profile is
//! `f(x, w) = exp(-pi (1 - eps^-2) |x|^2 - pi eps^-2 |w|^2)`.

mod witness;

pub use witness::{case_ratio, plan_witness, witness_point, Regime, WitnessCase, WitnessPlan, WitnessPoint};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::ExponentPair;
use crate::error::{Error, Result};
use crate::linalg::{self, spd_logdet};
use crate::symplectic::SymplecticMatrix;

/// A positive quantity and its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub value: f64,
    pub log_value: f64,
}

impl LogValue {
    pub fn from_log(log_value: f64) -> Self {
        Self { value: log_value.exp(), log_value }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 1.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be finite and > 1, got {eps}")));
    }
    Ok(())
}

/// `eps^2 - 1`, accurate for `eps` close to 1.
pub fn excess(eps: f64) -> f64 {
    (eps - 1.0) * (eps + 1.0)
}

/// `1 - eps^-2`.
pub fn spatial_coefficient(eps: f64) -> f64 {
    excess(eps) / (eps * eps)
}

/// `integral exp(-pi t.A t + 2 pi beta.t) dt = |det A|^{-1/2} exp(pi beta.A^{-1} beta)`.
pub fn gaussian_integral(a: &DMatrix<f64>, beta: &[f64]) -> Result<LogValue> {
    let n = a.nrows();
    if !a.is_square() || beta.len() != n {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, vector has length {}",
            a.nrows(),
            a.ncols(),
            beta.len()
        )));
    }
    if !linalg::is_symmetric(a, linalg::default_tolerance()) {
        return Err(Error::Parameter("matrix must be symmetric".into()));
    }
    let sym = linalg::symmetrize(a);
    let chol = sym
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Divergent("matrix is not strictly positive definite".into()))?;
    let logdet = spd_logdet(&sym)
        .ok_or_else(|| Error::Divergent("matrix is not strictly positive definite".into()))?;
    let b = DVector::from_column_slice(beta);
    let quad = b.dot(&chol.solve(&b));
    Ok(LogValue::from_log(-0.5 * logdet + PI * quad))
}

/// `A(g o sqrt(eps^2 - 1) I, g)(x, w)` in closed form.
pub fn ambiguity_gaussian(eps: f64, x: &[f64], omega: &[f64]) -> Result<Complex64> {
    check_eps(eps)?;
    if x.len() != omega.len() {
        return Err(Error::Dimension("x and omega must have equal length".into()));
    }
    let d = x.len() as i32;
    let e2 = 1.0 / (eps * eps);
    let delta2 = spatial_coefficient(eps);
    let xw = linalg::dot(x, omega);
    let xx = linalg::dot(x, x);
    let ww = linalg::dot(omega, omega);
    let phase = PI * xw - 2.0 * PI * e2 * xw;
    let modulus = eps.powi(-d) * (-PI * delta2 * xx - PI * e2 * ww).exp();
    Ok(Complex64::from_polar(modulus, phase))
}

/// The real profile `f(x, w)` (the modulus of the ambiguity function without
/// the `eps^-d` factor).
pub fn profile(eps: f64, x: &[f64], omega: &[f64]) -> f64 {
    let e2 = 1.0 / (eps * eps);
    (-PI * spatial_coefficient(eps) * linalg::dot(x, x) - PI * e2 * linalg::dot(omega, omega)).exp()
}

/// Quadratic-form data of `f o M`, with `M = [[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForms {
    #[serde(with = "linalg::rows")]
    pub sigma: DMatrix<f64>,
    #[serde(with = "linalg::rows")]
    pub beta: DMatrix<f64>,
    #[serde(with = "linalg::rows")]
    pub omega: DMatrix<f64>,
}

/// Dilation parameter together with the blocks of the composed matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWitness {
    pub eps: f64,
    pub d: usize,
    /// The matrix composed with the profile, usually `S^{-1}`.
    pub inner: DMatrix<f64>,
}

impl GaussianWitness {
    pub fn new(eps: f64, inner: DMatrix<f64>) -> Result<Self> {
        check_eps(eps)?;
        if !inner.is_square() || inner.nrows() % 2 != 0 || inner.nrows() == 0 {
            return Err(Error::Dimension("inner matrix must be 2d x 2d".into()));
        }
        Ok(Self { eps, d: inner.nrows() / 2, inner })
    }

    pub fn for_matrix(s: &SymplecticMatrix, eps: f64) -> Result<Self> {
        Self::new(eps, s.inverse().into_matrix())
    }

    fn blocks(&self) -> [DMatrix<f64>; 4] {
        let d = self.d;
        let m = &self.inner;
        [
            m.view((0, 0), (d, d)).into_owned(),
            m.view((0, d), (d, d)).into_owned(),
            m.view((d, 0), (d, d)).into_owned(),
            m.view((d, d), (d, d)).into_owned(),
        ]
    }

    /// `Sigma = A^T D2 A + C^T E2 C`, `beta = B^T D2 A + D^T E2 C`,
    /// `Omega = B^T D2 B + D^T E2 D - beta Sigma^{-1} beta^T`.
    pub fn sigma_beta_omega(&self) -> Result<QuadraticForms> {
        let [a, b, c, d] = self.blocks();
        let d2 = spatial_coefficient(self.eps);
        let e2 = 1.0 / (self.eps * self.eps);
        let sigma = linalg::symmetrize(&(a.transpose() * &a * d2 + c.transpose() * &c * e2));
        let beta = b.transpose() * &a * d2 + d.transpose() * &c * e2;
        let sigma_inv = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Conditioning("Sigma is not positive definite".into()))?
            .inverse();
        let omega = linalg::symmetrize(
            &(b.transpose() * &b * d2 + d.transpose() * &d * e2 - &beta * sigma_inv * beta.transpose()),
        );
        Ok(QuadraticForms { sigma, beta, omega })
    }
}

/// Exact mixed norm of `f o M` together with its quadratic-form data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub log_value: f64,
    #[serde(with = "linalg::rows")]
    pub sigma: DMatrix<f64>,
    #[serde(with = "linalg::rows")]
    pub omega: DMatrix<f64>,
}

/// `|| f o M ||_{p,q} = det(p Sigma)^{-1/(2p)} det(q Omega)^{-1/(2q)}`, where
/// an infinite exponent contributes a factor 1 (the supremum of the inner or
/// outer Gaussian is attained and equals 1).
///
/// `ln det Omega` is taken from the Schur-complement identity
/// `det Sigma det Omega = det(D2)^d det(E2)^d det(M)^2`, which avoids the
/// cancellation in the explicit Omega for extreme `eps`.
pub fn mixed_norm_composed(m: &DMatrix<f64>, eps: f64, e: ExponentPair) -> Result<NormReport> {
    let w = GaussianWitness::new(eps, m.clone())?;
    let forms = w.sigma_beta_omega()?;
    let d = w.d as f64;
    let ln_sigma = spd_logdet(&forms.sigma)
        .ok_or_else(|| Error::Conditioning("Sigma is not positive definite".into()))?;
    let det_m = m.determinant().abs();
    if !(det_m > 0.0) {
        return Err(Error::Conditioning("composed matrix is singular".into()));
    }
    let ln_omega =
        d * (excess(eps).ln() - 2.0 * eps.ln()) - 2.0 * d * eps.ln() + 2.0 * det_m.ln() - ln_sigma;
    let mut log_value = 0.0;
    if let crate::classifier::Exponent::Finite(p) = e.p {
        log_value -= (d * p.ln() + ln_sigma) / (2.0 * p);
    }
    if let crate::classifier::Exponent::Finite(q) = e.q {
        log_value -= (d * q.ln() + ln_omega) / (2.0 * q);
    }
    Ok(NormReport { value: log_value.exp(), log_value, sigma: forms.sigma, omega: forms.omega })
}

/// `|| f o S^{-1} ||_{p,q}`.
pub fn mixed_norm_dilated(s: &SymplecticMatrix, eps: f64, e: ExponentPair) -> Result<NormReport> {
    mixed_norm_composed(&s.inverse().into_matrix(), eps, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::Generator;
    use approx::assert_relative_eq;

    #[test]
    fn integral_examples() {
        let one = DMatrix::identity(1, 1);
        assert_relative_eq!(gaussian_integral(&one, &[0.0]).unwrap().value, 1.0);
        let two = DMatrix::from_element(1, 1, 2.0);
        assert_relative_eq!(
            gaussian_integral(&two, &[0.0]).unwrap().value,
            0.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            gaussian_integral(&one, &[1.0]).unwrap().value,
            PI.exp(),
            max_relative = 1e-15
        );
        let neg = DMatrix::from_element(1, 1, -1.0);
        assert!(matches!(gaussian_integral(&neg, &[0.0]), Err(Error::Divergent(_))));
    }

    #[test]
    fn ambiguity_at_origin() {
        assert_eq!(ambiguity_gaussian(2.0, &[0.0], &[0.0]).unwrap().re, 0.5);
        assert_relative_eq!(
            ambiguity_gaussian(2f64.sqrt(), &[0.0], &[0.0]).unwrap().re,
            0.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(matches!(ambiguity_gaussian(1.0, &[0.0], &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_forms() {
        let eps = 1.7;
        let f = GaussianWitness::new(eps, DMatrix::identity(4, 4)).unwrap().sigma_beta_omega().unwrap();
        let d2 = spatial_coefficient(eps);
        assert_relative_eq!(f.sigma, DMatrix::identity(2, 2) * d2, epsilon = 1e-15);
        assert_relative_eq!(f.beta, DMatrix::zeros(2, 2), epsilon = 1e-15);
        assert_relative_eq!(f.omega, DMatrix::identity(2, 2) / (eps * eps), epsilon = 1e-15);
    }

    #[test]
    fn identity_norm_example() {
        let e = ExponentPair::finite(2.0, 2.0).unwrap();
        let n = mixed_norm_dilated(&SymplecticMatrix::identity(1), 2f64.sqrt(), e).unwrap();
        assert_relative_eq!(n.value, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn schur_logdet_matches_direct() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -0.5]);
        let s = SymplecticMatrix::generator(&Generator::LowerShear { q }, 2)
            .unwrap()
            .compose(&SymplecticMatrix::generator(&Generator::QuasiPermutation { index: 2 }, 2).unwrap())
            .unwrap();
        for eps in [1.01, 1.5, 10.0] {
            let e = ExponentPair::finite(1.0, 1.0).unwrap();
            let n = mixed_norm_dilated(&s, eps, e).unwrap();
            let direct = spd_logdet(&n.omega).unwrap();
            let ln_sigma = spd_logdet(&n.sigma).unwrap();
            let via = -2.0 * n.log_value - ln_sigma;
            assert_relative_eq!(via, direct, epsilon = 1e-9);
        }
    }
}
