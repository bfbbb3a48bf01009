//! Sweeps of the Gaussian witness over `eps`, exponent fitting and the
//! numerical cross-checks behind `verify`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify_unweighted, classify_weighted, Exponent, ExponentPair, Verdict};
use crate::error::{Error, Result};
use crate::gaussian::{
    ambiguity_gaussian, excess, mixed_norm_dilated, plan_witness, profile, witness_point, Regime,
    WitnessCase,
};
use crate::linalg::{self, default_tolerance};
use crate::symplectic::{factorize, Generator, MatrixFile, SymplecticMatrix};
use crate::tfa::{
    check_symplectic_covariance, discrete_ambiguity, mixed_grid_norm, Grid, SampledField, SampledSignal,
};
use crate::weights::WeightSpec;

pub const CSV_HEADER: &str = "eps,norm_base,norm_dilated,ratio,log_ratio";
pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_FIT_TOLERANCE: f64 = 0.02;

/// A product of generators, applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub d: usize,
    pub factors: Vec<Generator>,
}

impl Recipe {
    pub fn build(&self) -> Result<SymplecticMatrix> {
        let mut acc = SymplecticMatrix::identity(self.d);
        for g in &self.factors {
            acc = acc.compose(&SymplecticMatrix::generator(g, self.d)?)?;
        }
        Ok(acc)
    }
}

/// Where a sweep or CLI command takes its matrix from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Path { path: PathBuf },
    Inline(MatrixFile),
    Recipe(Recipe),
}

impl MatrixSource {
    /// Relative paths are resolved against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<SymplecticMatrix> {
        match self {
            Self::Path { path } => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                load_matrix(&path)
            }
            Self::Inline(file) => file.to_symplectic(),
            Self::Recipe(r) => r.build(),
        }
    }
}

/// Read a matrix file: either `{d, rows}` or a recipe `{d, factors}`.
pub fn load_matrix(path: &Path) -> Result<SymplecticMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let source: MatrixSource = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match source {
        MatrixSource::Path { .. } => Err(Error::Config(format!(
            "{}: a matrix file cannot point to another file",
            path.display()
        ))),
        other => other.load(path.parent()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Geometric in `eps`.
    #[default]
    Geometric,
    /// Geometric in `eps^2 - 1`, which resolves `eps -> 1+`.
    GeometricExcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 1.0) || !self.max.is_finite() || !(self.max > self.min) {
            return Err(Error::Config(format!(
                "eps grid needs 1 < min < max < inf, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::Config("eps grid needs at least 2 points".into()));
        }
        let last = (self.count - 1) as f64;
        let values: Vec<f64> = match self.spacing {
            Spacing::Geometric => {
                let r = (self.max / self.min).ln();
                (0..self.count).map(|i| self.min * (r * i as f64 / last).exp()).collect()
            }
            Spacing::GeometricExcess => {
                let (lo, hi) = (excess(self.min).ln(), excess(self.max).ln());
                (0..self.count)
                    .map(|i| (1.0 + (lo + (hi - lo) * i as f64 / last).exp()).sqrt())
                    .collect()
            }
        };
        if values.windows(2).any(|w| !(w[1] > w[0])) || values[0] <= 1.0 {
            return Err(Error::Config("eps grid is not strictly increasing above 1".into()));
        }
        Ok(values)
    }
}

fn default_fit_window() -> f64 {
    0.5
}

fn default_fit_tolerance() -> f64 {
    DEFAULT_FIT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub matrix: MatrixSource,
    pub p: Exponent,
    pub q: Exponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    pub eps: EpsGrid,
    /// Fraction of the `ln(eps^2 - 1)` range used by the fit.
    #[serde(default = "default_fit_window")]
    pub fit_window: f64,
    #[serde(default = "default_fit_tolerance")]
    pub fit_tolerance: f64,
    /// Overrides the end of the range the fit uses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_file(path: &Path) -> Result<(Self, Option<PathBuf>)> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok((cfg, path.parent().map(Path::to_path_buf)))
    }

    pub fn exponents(&self) -> ExponentPair {
        ExponentPair::new(self.p, self.q)
    }

    fn validate(&self) -> Result<()> {
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return Err(Error::Config(format!("fit_window must lie in (0, 1], got {}", self.fit_window)));
        }
        if !(self.fit_tolerance > 0.0) {
            return Err(Error::Config("fit_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub norm_base: f64,
    pub norm_dilated: f64,
    pub ratio: f64,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Config(format!("fit needs at least 2 points, window holds {n}")));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Config("fit window has no spread in ln(eps^2 - 1)".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit { slope, intercept: my - slope * mx, points: n })
}

/// Fit `log_ratio` against `ln(eps^2 - 1)` over the top (`Upper`) or bottom
/// (`Lower`) fraction `window` of the abscissa range.
pub fn fit_exponent(rows: &[SweepRow], window: f64, regime: Regime) -> Result<LineFit> {
    let xy: Vec<(f64, f64)> = rows.iter().map(|r| (excess(r.eps).ln(), r.log_ratio)).collect();
    let lo = xy.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = xy.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo) * window;
    let slack = 1e-12 * (hi - lo).max(1.0);
    let chosen: Vec<(f64, f64)> = xy
        .into_iter()
        .filter(|&(x, _)| match regime {
            Regime::Upper => x >= hi - span - slack,
            Regime::Lower => x <= lo + span + slack,
        })
        .collect();
    fit_line(&chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: u32,
    pub d: usize,
    pub p: Exponent,
    pub q: Exponent,
    pub case: WitnessCase,
    pub regime: Regime,
    pub fit_window: f64,
    pub fit_points: usize,
    pub fitted_exponent: f64,
    pub intercept: f64,
    pub predicted_exponent: f64,
    pub fit_tolerance: f64,
    pub agreement: bool,
    /// The log-ratio grows without bound as `eps -> 1+`.
    pub divergent_at_one: bool,
    pub verdict: Verdict,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.eps, r.norm_base, r.norm_dilated, r.ratio, r.log_ratio);
        }
        out
    }
}

pub fn run_sweep(cfg: &SweepConfig, base: Option<&Path>) -> Result<SweepReport> {
    cfg.validate()?;
    let s = cfg.matrix.load(base)?;
    let e = cfg.exponents();
    let verdict = match &cfg.weight {
        Some(w) => {
            if w.d != s.dim() {
                return Err(Error::Config(format!("weight has d={}, matrix has d={}", w.d, s.dim())));
            }
            classify_weighted(&s, e, w)?
        }
        None => classify_unweighted(&s, e),
    };
    let plan = plan_witness(&s, e)?;
    let rows = cfg
        .eps
        .values()?
        .into_iter()
        .map(|eps| {
            let pt = witness_point(&plan, eps, e)?;
            let log_ratio = pt.log_ratio();
            Ok(SweepRow {
                eps,
                norm_base: pt.log_base.exp(),
                norm_dilated: pt.log_dilated.exp(),
                ratio: log_ratio.exp(),
                log_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let regime = cfg.regime.unwrap_or(plan.regime);
    let fit = fit_exponent(&rows, cfg.fit_window, regime)?;
    let agreement = (fit.slope - plan.predicted).abs() <= cfg.fit_tolerance;
    Ok(SweepReport {
        schema: REPORT_SCHEMA,
        d: s.dim(),
        p: e.p,
        q: e.q,
        case: plan.case,
        regime,
        fit_window: cfg.fit_window,
        fit_points: fit.points,
        fitted_exponent: fit.slope,
        intercept: fit.intercept,
        predicted_exponent: plan.predicted,
        fit_tolerance: cfg.fit_tolerance,
        agreement,
        divergent_at_one: regime == Regime::Lower && fit.slope < -cfg.fit_tolerance,
        verdict,
        rows,
    })
}

/// Options for [`run_verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub e: ExponentPair,
    pub eps: f64,
    pub grid: Grid,
    /// Signal and window for the covariance check; Gaussians when absent.
    pub signals: Option<(SampledSignal, SampledSignal)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub d: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

pub const FACTOR_TOLERANCE: f64 = 1e-10;
pub const COVARIANCE_TOLERANCE: f64 = 1e-3;
pub const AMBIGUITY_TOLERANCE: f64 = 1e-3;
pub const NORM_TOLERANCE: f64 = 1e-2;

/// Sup-distance between the sampled ambiguity function of
/// `g(sqrt(eps^2 - 1) t)` against `g` and its closed form.
pub fn ambiguity_oracle_error(grid: Grid, eps: f64) -> Result<f64> {
    let g = SampledSignal::gaussian(grid);
    let f = SampledSignal::dilated_gaussian(grid, 1.0 / excess(eps).sqrt());
    let amb = discrete_ambiguity(&f, &g)?;
    let d = grid.rank;
    let mut worst = 0.0_f64;
    for (i, v) in amb.values.iter().enumerate() {
        let z = amb.grid.point(i);
        let want = ambiguity_gaussian(eps, &z[..d], &z[d..])?;
        worst = worst.max((v - want).norm());
    }
    Ok(worst)
}

/// Relative gap between the closed-form mixed norm of `profile o S^{-1}` and
/// its Riemann sum on the grid.
pub fn norm_oracle_error(s: &SymplecticMatrix, eps: f64, e: ExponentPair, grid: Grid) -> Result<f64> {
    let d = s.dim();
    let inv = s.inverse().into_matrix();
    let field = SampledField::from_fn(d, grid.n, grid.t, |x, w| {
        let z: Vec<f64> = x.iter().chain(w).copied().collect();
        let y = linalg::mat_vec(&inv, &z);
        Complex64::new(profile(eps, &y[..d], &y[d..]), 0.0)
    })?;
    let numeric = mixed_grid_norm(&field, e, None)?;
    let exact = mixed_norm_dilated(s, eps, e)?.value;
    Ok((numeric - exact).abs() / exact)
}

pub fn run_verify(s: &SymplecticMatrix, opts: &VerifyOptions) -> Result<VerifyReport> {
    let d = s.dim();
    if opts.grid.rank != d {
        return Err(Error::Dimension(format!("grid has rank {}, matrix has d={d}", opts.grid.rank)));
    }
    let fact = factorize(s, default_tolerance())?;
    let mut checks = vec![CheckResult::new("factorization_relative_error", fact.relative_error(s), FACTOR_TOLERANCE)];
    let (f, g) = match &opts.signals {
        Some((f, g)) => (f.clone(), g.clone()),
        None => (SampledSignal::dilated_gaussian(opts.grid, 0.8), SampledSignal::gaussian(opts.grid)),
    };
    checks.push(CheckResult::new(
        "symplectic_covariance",
        check_symplectic_covariance(&f, &g, &fact)?,
        COVARIANCE_TOLERANCE,
    ));
    checks.push(CheckResult::new(
        "ambiguity_closed_form",
        ambiguity_oracle_error(opts.grid, opts.eps)?,
        AMBIGUITY_TOLERANCE,
    ));
    checks.push(CheckResult::new(
        "mixed_norm_closed_form",
        norm_oracle_error(s, opts.eps, opts.e, opts.grid)?,
        NORM_TOLERANCE,
    ));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        schema: REPORT_SCHEMA,
        d,
        n: opts.grid.n,
        t: opts.grid.t,
        eps: opts.eps,
        checks,
        pass,
    })
}
