use super::SampledField;
use crate::classifier::{Exponent, ExponentPair};
use crate::error::{Error, Result};
use crate::weights::Weight;

fn lp(values: impl Iterator<Item = f64>, p: Exponent, cell: f64) -> f64 {
    match p {
        Exponent::Infinity => values.fold(0.0, f64::max),
        Exponent::Finite(p) => (values.map(|v| v.powf(p)).sum::<f64>() * cell).powf(1.0 / p),
    }
}

/// Riemann-sum `L^{p,q}_m` norm: weighted `l^p` over the `x` axes, then
/// `l^q` over the `w` axes, with maxima for infinite exponents.
pub fn mixed_grid_norm(f: &SampledField, e: ExponentPair, w: Option<&dyn Weight>) -> Result<f64> {
    if let Some(w) = w {
        if w.dim() != f.d {
            return Err(Error::Dimension(format!(
                "weight has d={}, field has d={}",
                w.dim(),
                f.d
            )));
        }
    }
    let block = f.signal_grid().len();
    let cell = f.signal_grid().cell_volume();
    let weight: Vec<f64> = match w {
        Some(w) => (0..f.grid.len()).map(|i| w.eval(&f.grid.point(i))).collect(),
        None => vec![1.0; f.grid.len()],
    };
    let inner: Vec<f64> = (0..block)
        .map(|wi| {
            lp((0..block).map(|xi| f.values[xi * block + wi].norm() * weight[xi * block + wi]), e.p, cell)
        })
        .collect();
    Ok(lp(inner.into_iter(), e.q, cell))
}
