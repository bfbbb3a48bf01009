use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{factorize, lower_shear, quasi_permutation_product, upper_shear, SymplecticMatrix};
use crate::error::Result;
use crate::linalg::{self, max_abs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Core `prod_{i=k+1}^d Pi_i * V_Q'`.
    PiThenVQ,
    /// Core `V_Q' * prod_{i=k+1}^d Pi_i`.
    VQThenPi,
}

/// `S = prefactor * core * suffix` where the core is one of the two special
/// shapes and both outer factors are upper block triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialForm {
    pub variant: Variant,
    pub d: usize,
    /// Number of coordinates left untouched by the quasi-permutations.
    pub k: usize,
    pub q_prime: DMatrix<f64>,
    pub prefactor: SymplecticMatrix,
    pub suffix: SymplecticMatrix,
}

impl SpecialForm {
    /// Quasi-permutations `Pi_{k+1} ... Pi_d`.
    pub fn swap_part(&self) -> DMatrix<f64> {
        let idx: Vec<usize> = (self.k + 1..=self.d).collect();
        quasi_permutation_product(&idx, self.d)
    }

    pub fn core(&self) -> SymplecticMatrix {
        let v = lower_shear(&self.q_prime);
        let m = match self.variant {
            Variant::PiThenVQ => self.swap_part() * v,
            Variant::VQThenPi => v * self.swap_part(),
        };
        SymplecticMatrix::from_trusted(m)
    }

    pub fn reassemble(&self) -> DMatrix<f64> {
        self.prefactor.matrix() * self.core().matrix() * self.suffix.matrix()
    }

    pub fn q_prime_is_zero(&self, tol: f64) -> bool {
        max_abs(&self.q_prime) <= tol
    }

    /// Upper block triangular cores are exactly `k = d` with `Q' = 0`.
    pub fn core_is_upper_block_triangular(&self, tol: f64) -> bool {
        self.k == self.d && self.q_prime_is_zero(tol)
    }
}

fn block_diag(r: &DMatrix<f64>) -> DMatrix<f64> {
    let d = r.nrows();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(r);
    m.view_mut((d, d), (d, d)).copy_from(r);
    m
}

fn reduce_pi_then_vq(s: &SymplecticMatrix, tol: f64) -> Result<SpecialForm> {
    let d = s.dim();
    let f = factorize(s, tol)?;
    let set = &f.index_set;
    let k = d - set.len();
    // Column j of R is e_{pi(j)}: untouched coordinates first, then the set.
    let order: Vec<usize> = (1..=d)
        .filter(|i| !set.contains(i))
        .chain(set.iter().copied())
        .collect();
    let mut r = DMatrix::zeros(d, d);
    for (j, &i) in order.iter().enumerate() {
        r[(i - 1, j)] = 1.0;
    }
    let q_prime = linalg::symmetrize(&(r.transpose() * &f.q * &r));
    let rl = r.transpose() * &f.l;
    let suffix = super::dilation(&rl).expect("L is invertible") * upper_shear(&f.p);
    Ok(SpecialForm {
        variant: Variant::PiThenVQ,
        d,
        k,
        q_prime,
        prefactor: SymplecticMatrix::from_trusted(block_diag(&r)),
        suffix: SymplecticMatrix::from_trusted(suffix),
    })
}

/// Reduce `S` to one of the two special forms.
///
/// The second variant is the first applied to `S^{-1}`, inverted:
/// `S = Y^{-1} * V_{-Q'} prod Pi_i * (Sgn * R^T)` where `Sgn` flips the signs
/// of the swapped coordinate pairs.
pub fn reduce_special(s: &SymplecticMatrix, variant: Variant, tol: f64) -> Result<SpecialForm> {
    match variant {
        Variant::PiThenVQ => reduce_pi_then_vq(s, tol),
        Variant::VQThenPi => {
            let inner = reduce_pi_then_vq(&s.inverse(), tol)?;
            let d = inner.d;
            let mut sgn = DMatrix::identity(2 * d, 2 * d);
            for i in inner.k..d {
                sgn[(i, i)] = -1.0;
                sgn[(i + d, i + d)] = -1.0;
            }
            Ok(SpecialForm {
                variant,
                d,
                k: inner.k,
                q_prime: -inner.q_prime,
                prefactor: inner.suffix.inverse(),
                suffix: SymplecticMatrix::from_trusted(sgn * inner.prefactor.matrix().transpose()),
            })
        }
    }
}
