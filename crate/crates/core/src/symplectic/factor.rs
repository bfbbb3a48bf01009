use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{dilation, lower_shear, quasi_permutation_product, upper_shear, SymplecticMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, min_singular_value};

/// `S = prod_{i in J} Pi_i * V_Q * D_L * U_P`, with `J` a sorted list of
/// 1-based quasi-permutation indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub d: usize,
    pub index_set: Vec<usize>,
    #[serde(with = "linalg::rows")]
    pub q: DMatrix<f64>,
    #[serde(with = "linalg::rows")]
    pub l: DMatrix<f64>,
    #[serde(with = "linalg::rows")]
    pub p: DMatrix<f64>,
}

impl Factorization {
    pub fn identity(d: usize) -> Self {
        Self {
            d,
            index_set: Vec::new(),
            q: DMatrix::zeros(d, d),
            l: DMatrix::identity(d, d),
            p: DMatrix::zeros(d, d),
        }
    }

    /// Check shapes, index range, symmetry and invertibility.
    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        for (name, m) in [("Q", &self.q), ("L", &self.l), ("P", &self.p)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("{name} must be {d}x{d}")));
            }
        }
        if let Some(&i) = self.index_set.iter().find(|&&i| i == 0 || i > 2 * d) {
            return Err(Error::Parameter(format!("index {i} outside 1..={}", 2 * d)));
        }
        let tol = linalg::default_tolerance();
        if !linalg::is_symmetric(&self.q, tol) || !linalg::is_symmetric(&self.p, tol) {
            return Err(Error::Parameter("Q and P must be symmetric".into()));
        }
        if self.l.determinant() == 0.0 {
            return Err(Error::Parameter("L is singular".into()));
        }
        Ok(())
    }

    pub fn quasi_permutation_part(&self) -> DMatrix<f64> {
        quasi_permutation_product(&self.index_set, self.d)
    }

    /// The product of all factors.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let dl = dilation(&self.l).unwrap_or_else(|| DMatrix::from_element(2 * self.d, 2 * self.d, f64::NAN));
        self.quasi_permutation_part() * lower_shear(&self.q) * dl * upper_shear(&self.p)
    }

    /// `|reconstruct - S|_F / max(1, |S|_F)`.
    pub fn relative_error(&self, s: &SymplecticMatrix) -> f64 {
        (self.reconstruct() - s.matrix()).norm() / s.matrix().norm().max(1.0)
    }
}

/// Admissibility threshold for a pivot block relative to the best possible
/// conditioning of the first block column.
fn admissibility_threshold(d: usize) -> f64 {
    1.0 / (2.0 * (1.0 + 2.0 * (d * d) as f64).sqrt())
}

/// Rows `i in J` of the first block column after left-multiplying with the
/// inverse quasi-permutations: `-C_i` replaces `A_i`.
fn pivot_block(a: &DMatrix<f64>, c: &DMatrix<f64>, set: &[usize]) -> DMatrix<f64> {
    let mut y = a.clone();
    for &i in set {
        y.set_row(i - 1, &(-c.row(i - 1)));
    }
    y
}

/// All subsets of `1..=d` in lexicographic order of their sorted sequences.
fn lexicographic_subsets(d: usize) -> Vec<Vec<usize>> {
    fn visit(start: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for i in start..=d {
            cur.push(i);
            visit(i + 1, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    visit(1, d, &mut Vec::new(), &mut out);
    out
}

const EXHAUSTIVE_LIMIT: usize = 16;

fn choose_index_set(a: &DMatrix<f64>, c: &DMatrix<f64>, d: usize) -> Result<Vec<usize>> {
    let mut stacked = DMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(a);
    stacked.view_mut((d, 0), (d, d)).copy_from(c);
    let scale = min_singular_value(&stacked);
    if !(scale > 0.0) {
        return Err(Error::Factorization("first block column is rank deficient".into()));
    }
    let threshold = admissibility_threshold(d) * scale;
    let score = |set: &[usize]| min_singular_value(&pivot_block(a, c, set));

    if d <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for set in lexicographic_subsets(d) {
            let s = score(&set);
            if s >= threshold {
                return Ok(set);
            }
            if best.as_ref().map_or(true, |(b, _)| s > *b) {
                best = Some((s, set));
            }
        }
        return best
            .filter(|(s, _)| *s > 0.0)
            .map(|(_, set)| set)
            .ok_or_else(|| Error::Factorization("no invertible pivot block".into()));
    }

    // Large d: single-index toggles starting from the empty set.
    let mut member = vec![false; d];
    let current = |member: &[bool]| -> Vec<usize> {
        (0..d).filter(|&i| member[i]).map(|i| i + 1).collect()
    };
    let mut best = score(&[]);
    loop {
        if best >= threshold {
            break;
        }
        let mut improved = None;
        for i in 0..d {
            member[i] = !member[i];
            let s = score(&current(&member));
            member[i] = !member[i];
            if s > best {
                best = s;
                improved = Some(i);
            }
        }
        match improved {
            Some(i) => member[i] = !member[i],
            None => break,
        }
    }
    if best > 0.0 {
        Ok(current(&member))
    } else {
        Err(Error::Factorization("no invertible pivot block".into()))
    }
}

/// Factor `S = prod_{i in J} Pi_i V_Q D_L U_P`.
///
/// `J` is the lexicographically smallest subset of `1..=d` whose pivot block
/// is well conditioned relative to the first block column; `L` is that
/// block, and `Q`, `P` are read off and symmetrized.
pub fn factorize(s: &SymplecticMatrix, tol: f64) -> Result<Factorization> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let scale = s.matrix().norm_squared().max(1.0);
    let defect = s.defect();
    if defect > tol * scale {
        return Err(Error::NotSymplectic { defect, tol: tol * scale });
    }
    let d = s.dim();
    let set = choose_index_set(&s.block_a(), &s.block_c(), d)?;
    let undo = quasi_permutation_product(&set, d).transpose();
    let m = undo * s.matrix();
    let l = m.view((0, 0), (d, d)).into_owned();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Factorization("pivot block is singular".into()))?;
    let p = linalg::symmetrize(&(&l_inv * m.view((0, d), (d, d))));
    let q = linalg::symmetrize(&(m.view((d, 0), (d, d)) * &l_inv));
    let fact = Factorization { d, index_set: set, q, l, p };
    let err = fact.relative_error(s);
    if !(err <= tol * s.matrix().norm().max(1.0)) {
        return Err(Error::Factorization(format!(
            "reconstruction error {err:.3e} exceeds tolerance"
        )));
    }
    Ok(fact)
}
