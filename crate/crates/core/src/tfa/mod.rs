//! Discrete time-frequency engine on uniform grids.
//!
//! Signals live on `[-T/2, T/2)^d` with `n` samples per axis (`n` a power of
//! two, spacing `h = T / n`). Phase-space fields use the same grid on every
//! axis, ordered `(x_1..x_d, w_1..w_d)`. Arrays are row-major with the first
//! axis slowest.
//!
//! Metaplectic operators are defined only up to a global sign; every
//! comparison in this module is insensitive to it.

pub mod ambiguity;
pub mod covariance;
pub mod fourier;
pub mod io;
pub mod metaplectic;
pub mod norm;
pub mod twisted;

pub use ambiguity::discrete_ambiguity;
pub use covariance::check_symplectic_covariance;
pub use metaplectic::{apply_metaplectic, MetaplecticOutput};
pub use norm::mixed_grid_norm;
pub use twisted::{toeplitz_apply, twisted_convolution};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `[-T/2, T/2)^rank` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rank: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
}

impl Grid {
    pub fn new(rank: usize, n: usize, t: f64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Dimension("grid rank must be positive".into()));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!("n must be a power of two >= 2, got {n}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Parameter(format!("T must be positive, got {t}")));
        }
        Ok(Self { rank, n, t })
    }

    /// Default grid per signal dimension: `n = 512, T = 16` for `d = 1` and
    /// `n = 32, T = sqrt(32)` for `d = 2` (a `d = 2` phase-space field has
    /// `n^4` points).
    pub fn default_for(d: usize) -> Result<Self> {
        match d {
            1 => Self::new(1, 512, 16.0),
            2 => Self::new(2, 32, 32f64.sqrt()),
            _ => Err(Error::Dimension(format!("grids support d in {{1, 2}}, got {d}"))),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.t / self.n as f64
    }

    pub fn start(&self) -> f64 {
        -self.t / 2.0
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.rank as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.rank as i32)
    }

    /// Multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank];
        for k in (0..self.rank).rev() {
            idx[k] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Grid index of a coordinate if it is (within `1e-9 h`) a grid node.
    pub fn index_of(&self, y: f64) -> Option<usize> {
        let r = (y - self.start()) / self.spacing();
        let i = r.round();
        if (r - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.n {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Riemann-sum Fourier transforms on this grid are periodic in frequency
    /// with period `n / T`, so the window `[-T/2, T/2)` holds at most one
    /// period only when `T^2 <= n`.
    pub fn check_frequency_window(&self) -> Result<()> {
        if self.t * self.t > self.n as f64 * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!(
                "T^2 = {} exceeds n = {}: the frequency window would alias",
                self.t * self.t,
                self.n
            )));
        }
        Ok(())
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.rank == other.rank && self.n == other.n && (self.t - other.t).abs() <= 1e-12 * self.t
    }
}

/// Complex samples of a function on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Parameter("samples must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn dim(&self) -> usize {
        self.grid.rank
    }

    /// `exp(-pi |t|^2)`.
    pub fn gaussian(grid: Grid) -> Self {
        Self::from_fn(grid, |t| Complex64::new((-PI * t.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0))
    }

    /// `exp(-pi |t|^2 / w^2)`, i.e. `g(t / w)`.
    pub fn dilated_gaussian(grid: Grid, w: f64) -> Self {
        Self::from_fn(grid, |t| {
            Complex64::new((-PI * t.iter().map(|v| v * v).sum::<f64>() / (w * w)).exp(), 0.0)
        })
    }

    /// `sum f conj(g) h^d`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("signals live on different grids".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>()
            * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Largest modulus on the outermost grid layer relative to the global
    /// maximum.
    pub fn edge_fraction(&self) -> f64 {
        let max = self.values.iter().fold(0.0_f64, |a, v| a.max(v.norm()));
        if max == 0.0 {
            return 0.0;
        }
        let n = self.grid.n;
        let edge = (0..self.grid.len())
            .filter(|&i| self.grid.unflatten(i).iter().any(|&k| k == 0 || k == n - 1))
            .fold(0.0_f64, |a, i| a.max(self.values[i].norm()));
        edge / max
    }
}

/// Complex samples of a function on phase space `R^{2d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub d: usize,
    /// Rank `2d` grid.
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(d: usize, n: usize, t: f64, values: Vec<Complex64>) -> Result<Self> {
        let grid = Grid::new(2 * d, n, t)?;
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { d, grid, values })
    }

    pub fn zeros(d: usize, n: usize, t: f64) -> Result<Self> {
        let grid = Grid::new(2 * d, n, t)?;
        Ok(Self { d, grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] })
    }

    /// Sample `f(x, w)`.
    pub fn from_fn<F: Fn(&[f64], &[f64]) -> Complex64>(d: usize, n: usize, t: f64, f: F) -> Result<Self> {
        let grid = Grid::new(2 * d, n, t)?;
        let values = (0..grid.len())
            .map(|i| {
                let z = grid.point(i);
                f(&z[..d], &z[d..])
            })
            .collect();
        Ok(Self { d, grid, values })
    }

    /// Unit mass `1 / h^{2d}` at the origin node, zero elsewhere.
    pub fn delta(d: usize, n: usize, t: f64) -> Result<Self> {
        let mut f = Self::zeros(d, n, t)?;
        let origin = f.grid.flatten(&vec![n / 2; 2 * d]);
        f.values[origin] = Complex64::new(1.0 / f.grid.cell_volume(), 0.0);
        Ok(f)
    }

    pub fn signal_grid(&self) -> Grid {
        Grid { rank: self.d, ..self.grid }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d || !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "fields differ: d={} n={} T={} vs d={} n={} T={}",
                self.d, self.grid.n, self.grid.t, other.d, other.grid.n, other.grid.t
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |a, (x, y)| a.max((x - y).norm())))
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Pointwise product with a real function of `(x, w)`.
    pub fn multiply_by<F: Fn(&[f64]) -> f64>(&self, f: F) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * f(&self.grid.point(i)))
            .collect();
        Self { values, ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }
}
