use num_complex::Complex64;

use super::fourier::{czt_along, GridFourier, Spectrum};
use super::{SampledField, SampledSignal};
use crate::error::{Error, Result};

/// `A(f, g)(x, w) = int f(t + x/2) conj(g(t - x/2)) exp(-2 pi i w.t) dt` on
/// the phase-space grid. Half-sample shifts are spectral phase ramps; the
/// `t` integral is a Riemann sum evaluated by chirp-z.
pub fn discrete_ambiguity(f: &SampledSignal, g: &SampledSignal) -> Result<SampledField> {
    if !f.grid.same_as(&g.grid) {
        return Err(Error::GridMismatch("signals live on different grids".into()));
    }
    f.grid.check_frequency_window()?;
    let grid = f.grid;
    let (d, n, t) = (grid.rank, grid.n, grid.t);
    let fs = Spectrum::new(&f.values, n, d, t);
    let gs = Spectrum::new(&g.values, n, d, t);
    let fourier = GridFourier::new(n, t);
    let block = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); block * block];
    for xi in 0..block {
        let x = grid.point(xi);
        let plus: Vec<f64> = x.iter().map(|v| v / 2.0).collect();
        let minus: Vec<f64> = x.iter().map(|v| -v / 2.0).collect();
        let a = fs.shifted(&plus);
        let b = gs.shifted(&minus);
        let slot = &mut out[xi * block..(xi + 1) * block];
        for ((s, u), v) in slot.iter_mut().zip(&a).zip(&b) {
            *s = u * v.conj();
        }
        for axis in 0..d {
            czt_along(slot, n, d, axis, &fourier.forward);
        }
    }
    SampledField::new(d, n, t, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfa::Grid;

    #[test]
    fn origin_value_is_squared_norm() {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let g = SampledSignal::gaussian(grid);
        let a = discrete_ambiguity(&g, &g).unwrap();
        let origin = a.grid.flatten(&[64, 64]);
        assert!((a.values[origin].re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_grids() {
        let a = SampledSignal::gaussian(Grid::new(1, 64, 8.0).unwrap());
        let b = SampledSignal::gaussian(Grid::new(1, 64, 10.0).unwrap());
        assert!(matches!(discrete_ambiguity(&a, &b), Err(Error::GridMismatch(_))));
    }
}
