//! Twisted convolution of phase-space fields and Toeplitz (localization)
//! operators.
//!
//! `(F # G)(l) = sum_y F(y) G(l - y) exp(pi i sigma(l, y)) h^{2d}` with
//! `sigma(l, y) = l_x.y_w - l_w.y_x`. With this orientation the reproducing
//! identity `A(f, g) # A(g, g) = <g, g> A(f, g)` holds for the ambiguity
//! function `A(f, g)(l) = <f, rho(l) g>`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::ambiguity::discrete_ambiguity;
use super::fourier::{czt_along, for_each_line, GridFourier};
use super::{SampledField, SampledSignal};
use crate::error::{Error, Result};

/// Largest padded length tried by the exact fast path, as a multiple of `n`.
const MAX_PAD_FACTOR: usize = 64;

/// Centered integer coordinates of a flat index over `rank` axes.
fn centered(flat: usize, n: usize, rank: usize) -> Vec<i64> {
    let mut idx = vec![0i64; rank];
    let mut rem = flat;
    for k in (0..rank).rev() {
        idx[k] = (rem % n) as i64 - (n / 2) as i64;
        rem /= n;
    }
    idx
}

fn flat_of(c: &[i64], n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    let mut flat = 0usize;
    for &v in c {
        if v < -half || v >= half {
            return None;
        }
        flat = flat * n + (v + half) as usize;
    }
    Some(flat)
}

fn wrap_flat(c: &[i64], m: usize) -> usize {
    c.iter().fold(0usize, |acc, &v| acc * m + v.rem_euclid(m as i64) as usize)
}

/// Padded length `M >= 2n` (power of two) with `h^2 M / 2` an integer.
fn pad_length(n: usize, h: f64) -> Option<(usize, i64)> {
    let mut m = 2 * n;
    while m <= MAX_PAD_FACTOR * n {
        let s = h * h * m as f64 / 2.0;
        if (s - s.round()).abs() < 1e-9 && s.round() >= 1.0 {
            return Some((m, s.round() as i64));
        }
        m *= 2;
    }
    None
}

/// Direct evaluation, `O(N^2)` in the number of field points.
fn twisted_direct(f: &SampledField, g: &SampledField) -> Vec<Complex64> {
    let (d, n) = (f.d, f.grid.n);
    let h = f.grid.spacing();
    let rank = 2 * d;
    let total = f.grid.len();
    let coords: Vec<Vec<i64>> = (0..total).map(|i| centered(i, n, rank)).collect();
    let vol = f.grid.cell_volume();
    (0..total)
        .map(|li| {
            let l = &coords[li];
            let mut acc = Complex64::new(0.0, 0.0);
            for (yi, y) in coords.iter().enumerate() {
                let fy = f.values[yi];
                if fy == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let diff: Vec<i64> = l.iter().zip(y).map(|(a, b)| a - b).collect();
                let Some(di) = flat_of(&diff, n) else { continue };
                let form: i64 = (0..d).map(|k| l[k] * y[k + d] - l[k + d] * y[k]).sum();
                acc += fy * g.values[di] * Complex64::from_polar(1.0, PI * h * h * form as f64);
            }
            acc * vol
        })
        .collect()
}

/// Exact fast path: after a padded FFT along the frequency axes the phase
/// becomes an integer index shift, so
/// `H_a(m) = sum_c F_c(m + s(c - a)) G_{a-c}(m + s c)` (indices mod `M`).
fn twisted_fast(f: &SampledField, g: &SampledField, m: usize, s: i64) -> Vec<Complex64> {
    let (d, n) = (f.d, f.grid.n);
    let block = n.pow(d as u32);
    let padded = m.pow(d as u32);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let transform = |src: &SampledField| -> Vec<Vec<Complex64>> {
        (0..block)
            .map(|xi| {
                let mut buf = vec![Complex64::new(0.0, 0.0); padded];
                for wi in 0..block {
                    let w = centered(wi, n, d);
                    buf[wrap_flat(&w, m)] = src.values[xi * block + wi];
                }
                for axis in 0..d {
                    for_each_line(&mut buf, m, d, axis, |line| fft.process(line));
                }
                buf
            })
            .collect()
    };
    let fh = transform(f);
    let gh = transform(g);
    let xs: Vec<Vec<i64>> = (0..block).map(|i| centered(i, n, d)).collect();
    let ms: Vec<Vec<i64>> = (0..padded).map(|i| centered_mod(i, m, d)).collect();
    let vol = f.grid.cell_volume() / padded as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); f.grid.len()];
    let mut acc = vec![Complex64::new(0.0, 0.0); padded];
    let mut shifted = vec![0i64; d];
    let mut shifted2 = vec![0i64; d];
    for (ai, a) in xs.iter().enumerate() {
        acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (ci, c) in xs.iter().enumerate() {
            let diff: Vec<i64> = a.iter().zip(c).map(|(p, q)| p - q).collect();
            let Some(di) = flat_of(&diff, n) else { continue };
            let (fc, gd) = (&fh[ci], &gh[di]);
            for (mi, mv) in ms.iter().enumerate() {
                for k in 0..d {
                    shifted[k] = mv[k] + s * (c[k] - a[k]);
                    shifted2[k] = mv[k] + s * c[k];
                }
                acc[mi] += fc[wrap_flat(&shifted, m)] * gd[wrap_flat(&shifted2, m)];
            }
        }
        for axis in 0..d {
            for_each_line(&mut acc, m, d, axis, |line| ifft.process(line));
        }
        for wi in 0..block {
            let w = centered(wi, n, d);
            out[ai * block + wi] = acc[wrap_flat(&w, m)] * vol;
        }
    }
    out
}

/// Integer coordinates `0..m` per axis of a flat index in `[0, m)^rank`.
fn centered_mod(flat: usize, m: usize, rank: usize) -> Vec<i64> {
    let mut idx = vec![0i64; rank];
    let mut rem = flat;
    for k in (0..rank).rev() {
        idx[k] = (rem % m) as i64;
        rem /= m;
    }
    idx
}

pub fn twisted_convolution(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    f.check_compatible(g)?;
    let values = match pad_length(f.grid.n, f.grid.spacing()) {
        Some((m, s)) => twisted_fast(f, g, m, s),
        None => twisted_direct(f, g),
    };
    SampledField::new(f.d, f.grid.n, f.grid.t, values)
}

/// Reference implementation used for cross-checks.
pub fn twisted_convolution_direct(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    f.check_compatible(g)?;
    SampledField::new(f.d, f.grid.n, f.grid.t, twisted_direct(f, g))
}

const DEGENERATE_WINDOW: f64 = 1e-14;

/// Localization operator `int a(l) A(f, g)(l) rho(l) g dl`, where
/// `rho(x, w) g(t) = exp(2 pi i w.(t - x/2)) g(t - x)`.
///
/// For `a = 1` this reproduces `<g, g> f`.
pub fn toeplitz_apply(a: &SampledField, g: &SampledSignal, f: &SampledSignal) -> Result<SampledSignal> {
    if !f.grid.same_as(&g.grid) || !a.signal_grid().same_as(&f.grid) || a.d != f.grid.rank {
        return Err(Error::GridMismatch("symbol, window and signal grids differ".into()));
    }
    let gg = g.inner(g)?.re;
    if !(gg > DEGENERATE_WINDOW) {
        return Err(Error::DegenerateWindow(gg));
    }
    let grid = f.grid;
    let (d, n) = (grid.rank, grid.n);
    let amb = discrete_ambiguity(f, g)?;
    let fourier = GridFourier::new(n, grid.t);
    let block = grid.len();
    let half = (n / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); block];
    let mut line = vec![Complex64::new(0.0, 0.0); block];
    for xi in 0..block {
        let x = grid.point(xi);
        let xc = centered(xi, n, d);
        let base = xi * block;
        for wi in 0..block {
            let c = a.values[base + wi] * amb.values[base + wi];
            let w = grid.point(wi);
            let phase = -PI * crate::linalg::dot(&w, &x);
            line[wi] = c * Complex64::from_polar(1.0, phase);
        }
        for axis in 0..d {
            czt_along(&mut line, n, d, axis, &fourier.inverse);
        }
        for (ti, o) in out.iter_mut().enumerate() {
            let tc = centered(ti, n, d);
            let src: Vec<i64> = tc.iter().zip(&xc).map(|(t, x)| t - x).collect();
            if src.iter().all(|&v| v >= -half && v < half) {
                let gi = flat_of(&src, n).expect("in range");
                *o += line[ti] * g.values[gi];
            }
        }
    }
    let vol = grid.cell_volume();
    for o in &mut out {
        *o *= vol;
    }
    SampledSignal::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(d: usize, n: usize, t: f64, shift: f64) -> SampledField {
        SampledField::from_fn(d, n, t, |x, w| {
            let r: f64 = x.iter().map(|v| (v - shift) * (v - shift)).sum::<f64>()
                + w.iter().map(|v| 2.0 * v * v).sum::<f64>();
            Complex64::new((-PI * r).exp(), x[0] * w[0])
        })
        .unwrap()
    }

    #[test]
    fn fast_matches_direct() {
        // h = 1/2, h^2 M / 2 = 1 for M = 8 = 2n.
        let (n, t) = (4, 2.0);
        let a = smooth(1, n, t, 0.3);
        let b = smooth(1, n, t, -0.2);
        assert_eq!(pad_length(n, t / n as f64), Some((8, 1)));
        let fast = twisted_convolution(&a, &b).unwrap();
        let direct = twisted_convolution_direct(&a, &b).unwrap();
        assert!(fast.max_abs_diff(&direct).unwrap() < 1e-12);

        let (n, t) = (8, 4.0);
        let a = smooth(1, n, t, 0.3);
        let b = smooth(1, n, t, -0.2);
        let fast = twisted_convolution(&a, &b).unwrap();
        let direct = twisted_convolution_direct(&a, &b).unwrap();
        assert!(fast.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn fast_matches_direct_in_two_dimensions() {
        let (n, t) = (4, 4.0);
        let a = smooth(2, n, t, 0.5);
        let b = smooth(2, n, t, -0.5);
        let fast = twisted_convolution(&a, &b).unwrap();
        let direct = twisted_convolution_direct(&a, &b).unwrap();
        assert!(fast.max_abs_diff(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn delta_is_identity() {
        let (n, t) = (16, 4.0);
        let a = smooth(1, n, t, 0.1);
        let delta = SampledField::delta(1, n, t).unwrap();
        let out = twisted_convolution(&a, &delta).unwrap();
        assert!(out.max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_window_is_rejected() {
        let grid = super::super::Grid::new(1, 16, 4.0).unwrap();
        let zero = SampledSignal::from_fn(grid, |_| Complex64::new(0.0, 0.0));
        let f = SampledSignal::gaussian(grid);
        let a = SampledField::from_fn(1, 16, 4.0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(toeplitz_apply(&a, &zero, &f), Err(Error::DegenerateWindow(_))));
    }

    #[test]
    fn reproducing_identity_on_gaussians() {
        let grid = super::super::Grid::new(1, 64, 8.0).unwrap();
        let g = SampledSignal::gaussian(grid);
        let f = SampledSignal::from_fn(grid, |t| {
            Complex64::new((-PI * (t[0] - 0.5).powi(2)).exp(), 0.0) * Complex64::from_polar(1.0, 2.0 * PI * 0.7 * t[0])
        });
        let afg = discrete_ambiguity(&f, &g).unwrap();
        let agg = discrete_ambiguity(&g, &g).unwrap();
        let lhs = twisted_convolution(&afg, &agg).unwrap();
        let gg = g.inner(&g).unwrap();
        let rhs = afg.map(|v| v * gg);
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-3, "{}", lhs.max_abs_diff(&rhs).unwrap());
    }

    #[test]
    fn unit_symbol_reproduces_signal() {
        let grid = super::super::Grid::new(1, 128, 8.0).unwrap();
        let g = SampledSignal::gaussian(grid);
        let f = SampledSignal::dilated_gaussian(grid, 1.3);
        let one = SampledField::from_fn(1, 128, 8.0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let out = toeplitz_apply(&one, &g, &f).unwrap();
        let gg = g.inner(&g).unwrap();
        let err = out.values.iter().zip(&f.values).fold(0.0_f64, |a, (x, y)| a.max((x - y * gg).norm()));
        assert!(err < 1e-3, "{err}");
    }
}
