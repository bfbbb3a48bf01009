//! Chirp-z evaluation of Fourier sums on arbitrary uniform grids, periodic
//! shifts and band-limited interpolation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Evaluates `out_b = h * sum_j v_j exp(s 2 pi i (w0 + b delta)(t0 + j h))`
/// for `b < n_out` with Bluestein's algorithm.
pub struct Czt {
    n_in: usize,
    n_out: usize,
    len: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

impl Czt {
    pub fn new(n_in: usize, t0: f64, h: f64, n_out: usize, w0: f64, delta: f64, sign: f64) -> Self {
        let alpha = delta * h;
        let len = (n_in + n_out - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let pre = (0..n_in)
            .map(|j| {
                let j = j as f64;
                cis(sign * (2.0 * PI * w0 * j * h + PI * alpha * j * j))
            })
            .collect();
        let post = (0..n_out)
            .map(|b| {
                let b = b as f64;
                cis(sign * (2.0 * PI * (w0 + b * delta) * t0 + PI * alpha * b * b)) * h
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        let k = |m: usize| {
            let m = m as f64;
            cis(-sign * PI * alpha * m * m)
        };
        for m in 0..n_out {
            kernel[m] = k(m);
        }
        for m in 1..n_in {
            kernel[len - m] = k(m);
        }
        fft.process(&mut kernel);
        let scale = 1.0 / len as f64;
        for v in &mut kernel {
            *v *= scale;
        }
        Self { n_in, n_out, len, pre, post, kernel_hat: kernel, fft, ifft }
    }

    pub fn input_len(&self) -> usize {
        self.n_in
    }

    pub fn output_len(&self) -> usize {
        self.n_out
    }

    pub fn apply(&self, input: &[Complex64], output: &mut [Complex64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for ((b, v), p) in buf.iter_mut().zip(input).zip(&self.pre) {
            *b = v * p;
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        for ((o, b), p) in output.iter_mut().zip(&buf).zip(&self.post) {
            *o = b * p;
        }
    }
}

/// Continuous Fourier transform `int f(t) exp(-+2 pi i w t) dt` approximated
/// by Riemann sums, with input and output both on `[-T/2, T/2)` with
/// spacing `h = T / n`.
pub struct GridFourier {
    pub forward: Czt,
    pub inverse: Czt,
}

impl GridFourier {
    pub fn new(n: usize, t: f64) -> Self {
        let h = t / n as f64;
        let t0 = -t / 2.0;
        Self {
            forward: Czt::new(n, t0, h, n, t0, h, -1.0),
            inverse: Czt::new(n, t0, h, n, t0, h, 1.0),
        }
    }
}

/// Apply `f` to every 1-D line along `axis` of a row-major array with
/// `rank` axes of length `n`.
pub fn for_each_line<F: FnMut(&mut [Complex64])>(
    values: &mut [Complex64],
    n: usize,
    rank: usize,
    axis: usize,
    mut f: F,
) {
    let stride = n.pow((rank - 1 - axis) as u32);
    let block = stride * n;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (i, l) in line.iter_mut().enumerate() {
                *l = values[base + i * stride];
            }
            f(&mut line);
            for (i, l) in line.iter().enumerate() {
                values[base + i * stride] = *l;
            }
        }
    }
}

/// Apply a chirp-z transform along `axis` (square arrays only).
pub fn czt_along(values: &mut [Complex64], n: usize, rank: usize, axis: usize, czt: &Czt) {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for_each_line(values, n, rank, axis, |line| {
        czt.apply(line, &mut out);
        line.copy_from_slice(&out);
    });
}

/// Centered frequency index of DFT bin `k`.
fn centered(k: usize, n: usize) -> isize {
    if k < n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Band-limited interpolation of periodic samples on `t0 + j h`.
pub struct TrigInterpolator {
    n: usize,
    t0: f64,
    period: f64,
    rank: usize,
    coeffs: Vec<Complex64>,
}

impl TrigInterpolator {
    /// `values` row-major with `rank` axes of length `n`.
    pub fn new(values: &[Complex64], n: usize, rank: usize, t0: f64, period: f64) -> Self {
        let mut coeffs = values.to_vec();
        let fft = FftPlanner::new().plan_fft_forward(n);
        for axis in 0..rank {
            for_each_line(&mut coeffs, n, rank, axis, |line| {
                fft.process(line);
                for v in line.iter_mut() {
                    *v /= n as f64;
                }
            });
        }
        Self { n, t0, period, rank, coeffs }
    }

    fn basis(&self, y: f64) -> Vec<Complex64> {
        let n = self.n;
        let u = (y - self.t0) / self.period;
        (0..n)
            .map(|k| {
                if k == n / 2 {
                    Complex64::new((PI * n as f64 * u).cos(), 0.0)
                } else {
                    cis(2.0 * PI * centered(k, n) as f64 * u)
                }
            })
            .collect()
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let bases: Vec<Vec<Complex64>> = point.iter().map(|&y| self.basis(y)).collect();
        // Contract the last axis first.
        let mut cur = self.coeffs.clone();
        for axis in (0..self.rank).rev() {
            let b = &bases[axis];
            cur = cur
                .chunks(self.n)
                .map(|chunk| chunk.iter().zip(b).map(|(c, e)| c * e).sum())
                .collect();
        }
        cur[0]
    }
}

/// Periodic multi-dimensional spectrum supporting fast arbitrary shifts.
pub struct Spectrum {
    n: usize,
    rank: usize,
    period: f64,
    coeffs: Vec<Complex64>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Spectrum {
    pub fn new(values: &[Complex64], n: usize, rank: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut coeffs = values.to_vec();
        for axis in 0..rank {
            for_each_line(&mut coeffs, n, rank, axis, |line| fft.process(line));
        }
        let scale = 1.0 / (n.pow(rank as u32)) as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Self { n, rank, period, coeffs, ifft }
    }

    fn ramp(&self, s: f64) -> Vec<Complex64> {
        let n = self.n;
        let h = self.period / n as f64;
        (0..n)
            .map(|k| {
                if k == n / 2 {
                    Complex64::new((PI * s / h).cos(), 0.0)
                } else {
                    cis(2.0 * PI * centered(k, n) as f64 * s / self.period)
                }
            })
            .collect()
    }

    /// Samples of `t -> f(t + s)`.
    pub fn shifted(&self, s: &[f64]) -> Vec<Complex64> {
        let ramps: Vec<Vec<Complex64>> = s.iter().map(|&v| self.ramp(v)).collect();
        let mut out = self.coeffs.clone();
        let n = self.n;
        for (flat, v) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut factor = Complex64::new(1.0, 0.0);
            for axis in (0..self.rank).rev() {
                factor *= ramps[axis][rem % n];
                rem /= n;
            }
            *v *= factor;
        }
        for axis in 0..self.rank {
            for_each_line(&mut out, n, self.rank, axis, |line| self.ifft.process(line));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(v: &[Complex64], t0: f64, h: f64, n_out: usize, w0: f64, delta: f64, sign: f64) -> Vec<Complex64> {
        (0..n_out)
            .map(|b| {
                let w = w0 + b as f64 * delta;
                v.iter()
                    .enumerate()
                    .map(|(j, x)| x * cis(sign * 2.0 * PI * w * (t0 + j as f64 * h)) * h)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn czt_matches_direct_sum() {
        let v: Vec<Complex64> =
            (0..37).map(|j| Complex64::new((j as f64 * 0.3).sin(), (j as f64).cos())).collect();
        let czt = Czt::new(37, -1.3, 0.07, 23, 0.4, 0.11, -1.0);
        let mut out = vec![Complex64::new(0.0, 0.0); 23];
        czt.apply(&v, &mut out);
        let want = naive(&v, -1.3, 0.07, 23, 0.4, 0.11, -1.0);
        for (a, b) in out.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_is_fourier_fixed_point() {
        let (n, t) = (256, 16.0);
        let h = t / n as f64;
        let g: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = -t / 2.0 + j as f64 * h;
                Complex64::new((-PI * x * x).exp(), 0.0)
            })
            .collect();
        let f = GridFourier::new(n, t);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        f.forward.apply(&g, &mut out);
        for (a, b) in out.iter().zip(&g) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_and_interpolate_agree_with_exact() {
        let (n, t) = (128, 16.0);
        let h = t / n as f64;
        let f = |x: f64| (-PI * (x - 0.3) * (x - 0.3)).exp();
        let line: Vec<Complex64> =
            (0..n).map(|j| Complex64::new(f(-t / 2.0 + j as f64 * h), 0.0)).collect();
        let interp = TrigInterpolator::new(&line, n, 1, -t / 2.0, t);
        assert!((interp.eval(&[0.123]).re - f(0.123)).abs() < 1e-12);
        let line = Spectrum::new(&line, n, 1, t).shifted(&[0.05]);
        for (j, v) in line.iter().enumerate() {
            let x = -t / 2.0 + j as f64 * h;
            assert!((v.re - f(x + 0.05)).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn lines_cover_every_axis() {
        let n = 4;
        let mut v: Vec<Complex64> = (0..64).map(|i| Complex64::new(i as f64, 0.0)).collect();
        for_each_line(&mut v, n, 3, 1, |line| line.reverse());
        // element (0, 0, 0) now holds the old (0, 3, 0) = 12
        assert_eq!(v[0].re, 12.0);
        assert_eq!(v[1].re, 13.0);
    }
}
