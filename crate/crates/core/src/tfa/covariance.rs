use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ambiguity::discrete_ambiguity;
use super::metaplectic::apply_metaplectic;
use super::{SampledField, SampledSignal};
use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::Factorization;

/// Keys cubic convolution kernel with `a = -1/2`.
fn keys(s: f64) -> f64 {
    let s = s.abs();
    if s < 1.0 {
        (1.5 * s - 2.5) * s * s + 1.0
    } else if s < 2.0 {
        ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0
    } else {
        0.0
    }
}

/// Tensor-product Keys cubic interpolation of a field; zero outside the grid.
pub fn interpolate_field(f: &SampledField, z: &[f64]) -> Complex64 {
    let grid = f.grid;
    let (h, lo, n) = (grid.spacing(), grid.start(), grid.n as i64);
    let rank = grid.rank;
    let mut base = Vec::with_capacity(rank);
    let mut weights = Vec::with_capacity(rank);
    for &v in z {
        let r = (v - lo) / h;
        let i0 = r.floor() as i64;
        base.push(i0 - 1);
        weights.push([keys(r - (i0 - 1) as f64), keys(r - i0 as f64), keys(r - (i0 + 1) as f64), keys(r - (i0 + 2) as f64)]);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for combo in 0..4usize.pow(rank as u32) {
        let mut rem = combo;
        let mut flat = 0usize;
        let mut w = 1.0;
        let mut inside = true;
        for k in (0..rank).rev() {
            let o = rem % 4;
            rem /= 4;
            let i = base[k] + o as i64;
            if i < 0 || i >= n {
                inside = false;
                break;
            }
            w *= weights[k][o];
            flat += i as usize * (n as usize).pow((rank - 1 - k) as u32);
        }
        if inside && w != 0.0 {
            acc += f.values[flat] * w;
        }
    }
    acc
}

/// Row permutation with signs when `m` is a signed permutation matrix.
fn signed_permutation(m: &DMatrix<f64>) -> Option<Vec<(usize, bool)>> {
    (0..m.nrows())
        .map(|i| {
            let nz: Vec<usize> = (0..m.ncols()).filter(|&j| m[(i, j)] != 0.0).collect();
            match nz.as_slice() {
                [j] if m[(i, *j)].abs() == 1.0 => Some((*j, m[(i, *j)] < 0.0)),
                _ => None,
            }
        })
        .collect()
}

/// Samples of `F(M z)` for a `2d x 2d` matrix `M`. Signed permutations map
/// the grid to itself with periodic wrap of the `-T/2` node; anything else
/// is resampled by Keys cubic interpolation.
pub fn compose_linear(f: &SampledField, m: &DMatrix<f64>) -> Result<SampledField> {
    let rank = f.grid.rank;
    if m.nrows() != rank || m.ncols() != rank {
        return Err(Error::Dimension(format!("matrix must be {rank}x{rank}")));
    }
    let grid = f.grid;
    let n = grid.n;
    let values = if let Some(map) = signed_permutation(m) {
        (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                let src: Vec<usize> =
                    map.iter().map(|&(j, neg)| if neg { (n - idx[j]) % n } else { idx[j] }).collect();
                f.values[grid.flatten(&src)]
            })
            .collect()
    } else {
        (0..grid.len())
            .map(|flat| interpolate_field(f, &linalg::mat_vec(m, &grid.point(flat))))
            .collect()
    };
    SampledField::new(f.d, n, grid.t, values)
}

/// `sup | A(S^ f, S^ g)(z) - A(f, g)(S^{-1} z) |` over the phase-space grid.
pub fn check_symplectic_covariance(f: &SampledSignal, g: &SampledSignal, fact: &Factorization) -> Result<f64> {
    fact.validate()?;
    let sf = apply_metaplectic(fact, f)?.signal;
    let sg = apply_metaplectic(fact, g)?.signal;
    let lhs = discrete_ambiguity(&sf, &sg)?;
    let s = fact.reconstruct();
    let rank = s.nrows();
    let j = crate::symplectic::standard_form(rank / 2);
    // S^{-1} = -J S^T J
    let s_inv = -(&j * s.transpose() * &j);
    let rhs = compose_linear(&discrete_ambiguity(f, g)?, &s_inv)?;
    lhs.max_abs_diff(&rhs)
}
