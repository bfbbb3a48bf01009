//! Polynomial-type weights on phase space and their behaviour under a
//! symplectic change of variables.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::{default_tolerance, mat_vec, norm2};
use crate::symplectic::SymplecticMatrix;

/// A positive weight on `R^{2d}`.
pub trait Weight {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[f64]) -> f64;
    /// The analytic description, if the weight belongs to a known family.
    fn analytic(&self) -> Option<&WeightSpec> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `(1 + |z|)^s (ln(e + |z|))^t`.
    RadialLog { s: f64, t: f64 },
    /// `(1 + |x|)^s`, `s != 0`.
    Spatial { s: f64 },
    /// `(1 + |w|)^t`, `t != 0`.
    Frequency { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightFile", into = "WeightFile")]
pub struct WeightSpec {
    pub family: Family,
    pub d: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyTag {
    RadialLog,
    Spatial,
    Frequency,
}

/// JSON layout `{"family": ..., "s": ..., "t": ..., "d": ...}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct WeightFile {
    family: FamilyTag,
    #[serde(default)]
    s: f64,
    #[serde(default)]
    t: f64,
    d: usize,
}

impl TryFrom<WeightFile> for WeightSpec {
    type Error = Error;

    fn try_from(f: WeightFile) -> Result<Self> {
        let family = match f.family {
            FamilyTag::RadialLog => Family::RadialLog { s: f.s, t: f.t },
            FamilyTag::Spatial => Family::Spatial { s: f.s },
            FamilyTag::Frequency => Family::Frequency { t: f.t },
        };
        WeightSpec::new(family, f.d)
    }
}

impl From<WeightSpec> for WeightFile {
    fn from(w: WeightSpec) -> Self {
        let (family, s, t) = match w.family {
            Family::RadialLog { s, t } => (FamilyTag::RadialLog, s, t),
            Family::Spatial { s } => (FamilyTag::Spatial, s, 0.0),
            Family::Frequency { t } => (FamilyTag::Frequency, 0.0, t),
        };
        WeightFile { family, s, t, d: w.d }
    }
}

impl WeightSpec {
    pub fn new(family: Family, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("weight dimension must be positive".into()));
        }
        let ok = match family {
            Family::RadialLog { s, t } => s.is_finite() && t.is_finite(),
            Family::Spatial { s } => s.is_finite() && s != 0.0,
            Family::Frequency { t } => t.is_finite() && t != 0.0,
        };
        if !ok {
            return Err(Error::Parameter(format!("invalid weight parameters {family:?}")));
        }
        Ok(Self { family, d })
    }

    pub fn radial_log(s: f64, t: f64, d: usize) -> Result<Self> {
        Self::new(Family::RadialLog { s, t }, d)
    }

    pub fn spatial(s: f64, d: usize) -> Result<Self> {
        Self::new(Family::Spatial { s }, d)
    }

    pub fn frequency(t: f64, d: usize) -> Result<Self> {
        Self::new(Family::Frequency { t }, d)
    }

    /// Polynomial bound `eval(z) <= C (1 + |z|)^N`.
    pub fn polynomial_bound(&self) -> (f64, f64) {
        match self.family {
            // ln(e + r) <= 1 + r, and ln(e + r) >= 1.
            Family::RadialLog { s, t } => (1.0, s + t.max(0.0)),
            Family::Spatial { s } | Family::Frequency { t: s } => (1.0, s.max(0.0)),
        }
    }
}

impl Weight for WeightSpec {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, z: &[f64]) -> f64 {
        let d = self.d;
        match self.family {
            Family::RadialLog { s, t } => {
                let r = norm2(z);
                (1.0 + r).powf(s) * (std::f64::consts::E + r).ln().powf(t)
            }
            Family::Spatial { s } => (1.0 + norm2(&z[..d])).powf(s),
            Family::Frequency { t } => (1.0 + norm2(&z[d..2 * d])).powf(t),
        }
    }

    fn analytic(&self) -> Option<&WeightSpec> {
        Some(self)
    }
}

/// A weight given by an arbitrary evaluator; never receives analytic verdicts.
pub struct FnWeight<F: Fn(&[f64]) -> f64> {
    pub d: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> Weight for FnWeight<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
}

/// Whether `m` and `m o S` are comparable up to constants.
pub fn equivalence_under(w: &WeightSpec, s: &SymplecticMatrix) -> Equivalence {
    let tol = default_tolerance();
    let eq = match w.family {
        Family::RadialLog { .. } => true,
        Family::Spatial { .. } => s.is_lower_block_triangular(tol),
        Family::Frequency { .. } => s.is_upper_block_triangular(tol),
    };
    if eq {
        Equivalence::Equivalent
    } else {
        Equivalence::NotEquivalent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellStat {
    pub radius: f64,
    pub max: f64,
    pub min: f64,
}

/// Empirical sup/inf of `m(z) / m(S^{-1} z)` over spherical shells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRatioEstimate {
    pub r_hat: f64,
    /// Set when some sampled ratio overflowed.
    pub r_infinite: bool,
    pub t_hat: f64,
    pub samples: usize,
    pub max_radius: f64,
    pub shells: Vec<ShellStat>,
    /// Log-log slope of the per-shell maxima against the radius.
    pub max_slope: f64,
    /// Log-log slope of the per-shell minima against the radius.
    pub min_slope: f64,
    pub max_trend: Trend,
    pub min_trend: Trend,
}

/// Default shell radii `2^j`, `j = 0..=20`.
pub fn default_radii() -> Vec<f64> {
    (0..=20).map(|j| 2f64.powi(j)).collect()
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    acc
}

/// Unit directions in `R^n`: the `2n` signed axes followed by Halton points
/// (starting at index `seed + 1`) pushed through the inverse normal CDF.
fn directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let normal = Normal::standard();
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = sign;
            out.push(v);
        }
    }
    let primes = first_primes(n);
    let mut idx = seed + 1;
    while out.len() < count + 2 * n {
        let v: Vec<f64> = (0..n)
            .map(|k| {
                normal.inverse_cdf(radical_inverse(idx, primes[k]).clamp(1e-12, 1.0 - 1e-12))
            })
            .collect();
        idx += 1;
        let r = norm2(&v);
        if r > 1e-12 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn classify_trend(slope: f64) -> Trend {
    const FLAT: f64 = 0.05;
    if slope > FLAT {
        Trend::Increasing
    } else if slope < -FLAT {
        Trend::Decreasing
    } else {
        Trend::Flat
    }
}

/// Sample `m(z) / m(S^{-1} z)` on spheres of the given radii.
///
/// This reports data only; it cannot certify an essential supremum.
pub fn estimate_rm_tm(
    w: &dyn Weight,
    s: &SymplecticMatrix,
    radii: &[f64],
    samples_per_shell: usize,
    seed: u64,
) -> Result<WeightRatioEstimate> {
    if radii.is_empty() || radii.windows(2).any(|p| !(p[1] > p[0])) || radii[0] <= 0.0 {
        return Err(Error::Parameter("radii must be positive and strictly increasing".into()));
    }
    if samples_per_shell == 0 {
        return Err(Error::Parameter("samples_per_shell must be at least 1".into()));
    }
    if w.dim() != s.dim() {
        return Err(Error::Dimension(format!(
            "weight has d={}, matrix has d={}",
            w.dim(),
            s.dim()
        )));
    }
    let n = 2 * s.dim();
    let inv = s.inverse().into_matrix();
    let dirs = directions(n, samples_per_shell, seed);
    let mut shells = Vec::with_capacity(radii.len());
    let mut r_infinite = false;
    for &radius in radii {
        let (mut hi, mut lo) = (0.0_f64, f64::INFINITY);
        for u in &dirs {
            let z: Vec<f64> = u.iter().map(|v| v * radius).collect();
            let ratio = w.eval(&z) / w.eval(&mat_vec(&inv, &z));
            if !ratio.is_finite() {
                r_infinite = true;
                continue;
            }
            hi = hi.max(ratio);
            lo = lo.min(ratio);
        }
        shells.push(ShellStat { radius, max: hi, min: lo });
    }
    let logr: Vec<f64> = shells.iter().map(|s| s.radius.ln()).collect();
    let max_slope = slope(&logr, &shells.iter().map(|s| s.max.ln()).collect::<Vec<_>>());
    let min_slope = slope(&logr, &shells.iter().map(|s| s.min.ln()).collect::<Vec<_>>());
    Ok(WeightRatioEstimate {
        r_hat: if r_infinite {
            f64::INFINITY
        } else {
            shells.iter().fold(0.0, |a, s| a.max(s.max))
        },
        r_infinite,
        t_hat: shells.iter().fold(f64::INFINITY, |a, s| a.min(s.min)),
        samples: dirs.len() * radii.len(),
        max_radius: *radii.last().unwrap(),
        shells,
        max_slope,
        min_slope,
        max_trend: classify_trend(max_slope),
        min_trend: classify_trend(min_slope),
    })
}

/// Points `z_n` along which `m(z) / m(S^{-1} z)` is unbounded for a
/// non-equivalent spatial or frequency weight, with the ratio at each `n`.
///
/// Uses `z_n = S^{-1}`-preimages of `(e_1, n w)` with `|B w| > |A e_1|` for a
/// spatial weight; the frequency family swaps the roles of the block rows,
/// and a negative exponent swaps `S` with its inverse.
pub fn divergence_witness(
    w: &WeightSpec,
    s: &SymplecticMatrix,
    ns: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if equivalence_under(w, s) == Equivalence::Equivalent {
        return Err(Error::Domain("weight is equivalent under this matrix".into()));
    }
    let d = s.dim();
    let (exp, spatial) = match w.family {
        Family::Spatial { s } => (s, true),
        Family::Frequency { t } => (t, false),
        Family::RadialLog { .. } => unreachable!("radial weights are always equivalent"),
    };
    // For a positive exponent the ratio is large where S^{-1} shrinks the
    // weighted coordinate block of z; equivalently `m(T y) / m(y)` with T = S
    // and y = S^{-1} z. For a negative exponent use T = S^{-1}.
    let t = if exp > 0.0 { s.clone() } else { s.inverse() };
    let (first, second) = if spatial {
        (t.block_a(), t.block_b())
    } else {
        (t.block_d(), t.block_c())
    };
    let e1 = {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    };
    let base = norm2(&mat_vec(&first, &e1));
    // Column of the off-diagonal block with the largest norm.
    let (col, cn) = (0..d)
        .map(|j| (j, second.column(j).norm()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    if cn == 0.0 {
        return Err(Error::Domain("off-diagonal block vanishes".into()));
    }
    let scale = 2.0 * (base + 1.0) / cn;
    let tm = t.matrix();
    let inv = s.inverse().into_matrix();
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut y = vec![0.0; 2 * d];
        let (keep, grow) = if spatial { (0, d) } else { (d, 0) };
        y[keep] = 1.0;
        y[grow + col] = n * scale;
        let z = if exp > 0.0 { mat_vec(tm, &y) } else { y.clone() };
        let ratio = w.eval(&z) / w.eval(&mat_vec(&inv, &z));
        out.push((n, ratio));
    }
    Ok(out)
}
