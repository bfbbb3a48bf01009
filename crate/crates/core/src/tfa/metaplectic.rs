use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fourier::{czt_along, GridFourier, TrigInterpolator};
use super::{Grid, SampledSignal};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::symplectic::Factorization;

/// Result of applying a metaplectic operator on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaplecticOutput {
    pub signal: SampledSignal,
    /// Set when resampling needed values outside the grid box while the
    /// input was not negligible at the box edge.
    pub truncated: bool,
}

const EDGE_NEGLIGIBLE: f64 = 1e-8;

fn multiply_chirp(f: &mut SampledSignal, m: &DMatrix<f64>, sign: f64) {
    let grid = f.grid;
    for (i, v) in f.values.iter_mut().enumerate() {
        let t = grid.point(i);
        let quad = linalg::dot(&t, &linalg::mat_vec(m, &t));
        *v *= Complex64::from_polar(1.0, sign * PI * quad);
    }
}

fn fourier_all(values: &mut [Complex64], grid: &Grid, fourier: &GridFourier, inverse: bool) {
    let czt = if inverse { &fourier.inverse } else { &fourier.forward };
    for axis in 0..grid.rank {
        czt_along(values, grid.n, grid.rank, axis, czt);
    }
}

/// Signed permutation matrices map the grid to itself up to periodic wrap.
fn signed_permutation(l: &DMatrix<f64>) -> Option<Vec<(usize, f64)>> {
    let d = l.nrows();
    let mut map = Vec::with_capacity(d);
    for i in 0..d {
        let nz: Vec<usize> = (0..d).filter(|&j| l[(i, j)] != 0.0).collect();
        if nz.len() != 1 || l[(i, nz[0])].abs() != 1.0 {
            return None;
        }
        map.push((nz[0], l[(i, nz[0])]));
    }
    Some(map)
}

/// `f -> |det L|^{-1/2} f(L^{-1} .)`.
fn dilate(f: &SampledSignal, l: &DMatrix<f64>) -> Result<(SampledSignal, bool)> {
    let grid = f.grid;
    let (n, d) = (grid.n, grid.rank);
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Parameter("L is singular".into()))?;
    if let Some(map) = signed_permutation(&l_inv) {
        // (L^{-1} t)_i = sign_i t_{j_i}; -t sits at index (n - k) mod n.
        let values = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                let src: Vec<usize> = map
                    .iter()
                    .map(|&(j, sign)| if sign > 0.0 { idx[j] } else { (n - idx[j]) % n })
                    .collect();
                f.values[grid.flatten(&src)]
            })
            .collect();
        return Ok((SampledSignal { grid, values }, false));
    }
    let scale = l.determinant().abs().powf(-0.5);
    let interp = TrigInterpolator::new(&f.values, n, d, grid.start(), grid.t);
    let (lo, hi) = (grid.start(), grid.start() + grid.t);
    let mut outside = false;
    let values = (0..grid.len())
        .map(|flat| {
            let y = linalg::mat_vec(&l_inv, &grid.point(flat));
            if y.iter().any(|&v| v < lo || v >= hi) {
                outside = true;
                Complex64::new(0.0, 0.0)
            } else {
                interp.eval(&y) * scale
            }
        })
        .collect();
    let truncated = outside && f.edge_fraction() > EDGE_NEGLIGIBLE;
    Ok((SampledSignal { grid, values }, truncated))
}

/// Apply the metaplectic operator of `prod Pi_i V_Q D_L U_P`, right to left:
/// the upper shear as Fourier multiplier `exp(-pi i xi.P xi)`, the dilation
/// as the unitary `|det L|^{-1/2} f(L^{-1} t)`, the lower shear as the chirp
/// `exp(pi i t.Q t)`, and each quasi-permutation as a partial Fourier
/// transform (forward for indices `<= d`, inverse above).
pub fn apply_metaplectic(fact: &Factorization, f: &SampledSignal) -> Result<MetaplecticOutput> {
    fact.validate()?;
    let grid = f.grid;
    let d = grid.rank;
    if fact.d != d {
        return Err(Error::Dimension(format!(
            "factorization has d={}, signal has d={d}",
            fact.d
        )));
    }
    grid.check_frequency_window()?;
    let fourier = GridFourier::new(grid.n, grid.t);
    let mut out = f.clone();
    let mut truncated = false;

    if max_abs(&fact.p) > 0.0 {
        fourier_all(&mut out.values, &grid, &fourier, false);
        multiply_chirp(&mut out, &fact.p, -1.0);
        fourier_all(&mut out.values, &grid, &fourier, true);
    }
    if fact.l != DMatrix::identity(d, d) {
        let (dilated, cut) = dilate(&out, &fact.l)?;
        out = dilated;
        truncated |= cut;
    }
    if max_abs(&fact.q) > 0.0 {
        multiply_chirp(&mut out, &fact.q, 1.0);
    }
    for &i in fact.index_set.iter().rev() {
        let (axis, czt) = if i <= d {
            (i - 1, &fourier.forward)
        } else {
            (i - d - 1, &fourier.inverse)
        };
        czt_along(&mut out.values, grid.n, d, axis, czt);
    }
    Ok(MetaplecticOutput { signal: out, truncated })
}
