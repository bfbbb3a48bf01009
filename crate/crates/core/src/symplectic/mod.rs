//! Symplectic matrices: validation, generators, structural predicates and
//! the JSON matrix format.
//!
//! Index conventions: coordinates are `(x_1..x_d, w_1..w_d)` and the
//! standard form is `J = [[0, I], [-I, 0]]`. Quasi-permutation indices are
//! 1-based, `1..=2d`; for `i <= d` the generator sends `e_i -> -e_{i+d}` and
//! `e_{i+d} -> e_i`, and index `i + d` denotes its transpose.

mod factor;
mod special;

pub use factor::{factorize, Factorization};
pub use special::{reduce_special, SpecialForm, Variant};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, default_tolerance, max_abs};

/// The standard symplectic matrix of size `2d`.
pub fn standard_form(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, i + d)] = 1.0;
        j[(i + d, i)] = -1.0;
    }
    j
}

fn half_dim(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || m.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "side length must be positive and even, got {}",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `max |(M^T J M - J)_{ij}|`.
pub fn symplectic_defect(m: &DMatrix<f64>) -> Result<f64> {
    let d = half_dim(m)?;
    let j = standard_form(d);
    Ok(max_abs(&(m.transpose() * &j * m - j)))
}

/// Absolute test `max |M^T J M - J| <= tol`.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    Ok(symplectic_defect(m)? <= tol)
}

/// Building blocks of the symplectic group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `[[I, P], [0, I]]` with `P` symmetric.
    UpperShear {
        #[serde(with = "linalg::rows")]
        p: DMatrix<f64>,
    },
    /// `[[I, 0], [Q, I]]` with `Q` symmetric.
    LowerShear {
        #[serde(with = "linalg::rows")]
        q: DMatrix<f64>,
    },
    /// `diag(L, L^{-T})` with `L` invertible.
    Dilation {
        #[serde(with = "linalg::rows")]
        l: DMatrix<f64>,
    },
    /// Elementary quasi-permutation with 1-based index in `1..=2d`.
    QuasiPermutation { index: usize },
    /// The standard form `J`, the product of the first `d` quasi-permutations.
    Standard,
}

fn check_square(name: &str, m: &DMatrix<f64>, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Parameter(format!(
            "{name} must be {d}x{d}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn check_symmetric(name: &str, m: &DMatrix<f64>, d: usize) -> Result<()> {
    check_square(name, m, d)?;
    if !linalg::is_symmetric(m, default_tolerance()) {
        return Err(Error::Parameter(format!("{name} must be symmetric")));
    }
    Ok(())
}

pub(crate) fn upper_shear(p: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.nrows();
    let mut m = DMatrix::identity(2 * d, 2 * d);
    m.view_mut((0, d), (d, d)).copy_from(p);
    m
}

pub(crate) fn lower_shear(q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = q.nrows();
    let mut m = DMatrix::identity(2 * d, 2 * d);
    m.view_mut((d, 0), (d, d)).copy_from(q);
    m
}

/// `diag(L, L^{-T})`; `None` when `L` is singular.
pub(crate) fn dilation(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let d = l.nrows();
    let inv = l.clone().try_inverse()?;
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(l);
    m.view_mut((d, d), (d, d)).copy_from(&inv.transpose());
    Some(m)
}

/// Quasi-permutation with 1-based index; indices above `d` give transposes.
pub(crate) fn quasi_permutation(index: usize, d: usize) -> DMatrix<f64> {
    let base = if index > d { index - d } else { index } - 1;
    let sign = if index > d { -1.0 } else { 1.0 };
    let mut m = DMatrix::identity(2 * d, 2 * d);
    m[(base, base)] = 0.0;
    m[(base + d, base + d)] = 0.0;
    m[(base + d, base)] = -sign;
    m[(base, base + d)] = sign;
    m
}

/// Product of the quasi-permutations over the given 1-based indices.
pub(crate) fn quasi_permutation_product(indices: &[usize], d: usize) -> DMatrix<f64> {
    indices
        .iter()
        .fold(DMatrix::identity(2 * d, 2 * d), |acc, &i| acc * quasi_permutation(i, d))
}

/// A validated real symplectic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    d: usize,
    m: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validate with the default tolerance.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, default_tolerance())
    }

    /// Validate `M^T J M = J` with a tolerance relative to `max(1, |M|_F^2)`,
    /// the natural scale of the quadratic expression.
    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
        }
        let d = half_dim(&m)?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix has non-finite entries".into()));
        }
        let defect = symplectic_defect(&m)?;
        let scaled = tol * m.norm_squared().max(1.0);
        if defect > scaled {
            return Err(Error::NotSymplectic { defect, tol: scaled });
        }
        Ok(Self { d, m })
    }

    /// Wrap a matrix that is symplectic by construction.
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        let d = m.nrows() / 2;
        Self { d, m }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_trusted(DMatrix::identity(2 * d, 2 * d))
    }

    pub fn standard(d: usize) -> Self {
        Self::from_trusted(standard_form(d))
    }

    pub fn generator(kind: &Generator, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("d must be positive".into()));
        }
        let m = match kind {
            Generator::UpperShear { p } => {
                check_symmetric("P", p, d)?;
                upper_shear(&linalg::symmetrize(p))
            }
            Generator::LowerShear { q } => {
                check_symmetric("Q", q, d)?;
                lower_shear(&linalg::symmetrize(q))
            }
            Generator::Dilation { l } => {
                check_square("L", l, d)?;
                dilation(l).ok_or_else(|| Error::Parameter("L is singular".into()))?
            }
            Generator::QuasiPermutation { index } => {
                if *index == 0 || *index > 2 * d {
                    return Err(Error::Parameter(format!(
                        "quasi-permutation index {index} outside 1..={}",
                        2 * d
                    )));
                }
                quasi_permutation(*index, d)
            }
            Generator::Standard => standard_form(d),
        };
        Ok(Self::from_trusted(m))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn block_a(&self) -> DMatrix<f64> {
        self.m.view((0, 0), (self.d, self.d)).into_owned()
    }

    pub fn block_b(&self) -> DMatrix<f64> {
        self.m.view((0, self.d), (self.d, self.d)).into_owned()
    }

    pub fn block_c(&self) -> DMatrix<f64> {
        self.m.view((self.d, 0), (self.d, self.d)).into_owned()
    }

    pub fn block_d(&self) -> DMatrix<f64> {
        self.m.view((self.d, self.d), (self.d, self.d)).into_owned()
    }

    pub fn defect(&self) -> f64 {
        symplectic_defect(&self.m).unwrap_or(f64::INFINITY)
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// `S^{-1} = J^{-1} S^T J = -J S^T J`.
    pub fn inverse(&self) -> Self {
        let j = standard_form(self.d);
        Self::from_trusted(-(&j * self.m.transpose() * &j))
    }

    pub fn transpose(&self) -> Self {
        Self::from_trusted(self.m.transpose())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "cannot multiply d={} by d={}",
                self.d, other.d
            )));
        }
        Ok(Self::from_trusted(&self.m * &other.m))
    }

    /// `max |C| <= tol`.
    pub fn is_upper_block_triangular(&self, tol: f64) -> bool {
        max_abs(&self.block_c()) <= tol
    }

    /// `max |B| <= tol`.
    pub fn is_lower_block_triangular(&self, tol: f64) -> bool {
        max_abs(&self.block_b()) <= tol
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile { d: self.d, rows: linalg::rows::to_rows(&self.m) }
    }
}

/// On-disk matrix format `{"d": int, "rows": [[...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let m = linalg::rows::from_rows(&self.rows).map_err(Error::Dimension)?;
        if m.nrows() != 2 * self.d || m.ncols() != 2 * self.d {
            return Err(Error::Dimension(format!(
                "d={} requires a {}x{} matrix, got {}x{}",
                self.d,
                2 * self.d,
                2 * self.d,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m)
    }

    pub fn to_symplectic(&self) -> Result<SymplecticMatrix> {
        SymplecticMatrix::new(self.to_matrix()?)
    }
}

impl Serialize for SymplecticMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymplecticMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        MatrixFile::deserialize(d)?.to_symplectic().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, v.len() / rows, v)
    }

    #[test]
    fn predicate_examples() {
        assert!(is_symplectic(&standard_form(1), 1e-12).unwrap());
        assert!(is_symplectic(&m(2, &[2.0, 0.0, 0.0, 0.5]), 1e-12).unwrap());
        assert!(!is_symplectic(&m(2, &[2.0, 0.0, 0.0, 2.0]), 1e-12).unwrap());
        assert!(matches!(
            is_symplectic(&DMatrix::identity(3, 3), 1e-9),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn standard_is_product_of_first_quasi_permutations() {
        for d in 1..4 {
            let idx: Vec<usize> = (1..=d).collect();
            assert_eq!(quasi_permutation_product(&idx, d), standard_form(d));
        }
        assert_eq!(standard_form(1), m(2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn quasi_permutation_action() {
        let pi = quasi_permutation(1, 2);
        let e = |k: usize| {
            let mut v = nalgebra::DVector::zeros(4);
            v[k] = 1.0;
            v
        };
        assert_eq!(&pi * e(0), -e(2));
        assert_eq!(&pi * e(2), e(0));
        assert_eq!(&pi * e(1), e(1));
        assert_eq!(&pi * e(3), e(3));
        assert_eq!(quasi_permutation(3, 2), pi.transpose());
    }

    #[test]
    fn generator_parameter_errors() {
        let ns = m(2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            SymplecticMatrix::generator(&Generator::UpperShear { p: ns.clone() }, 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SymplecticMatrix::generator(&Generator::Dilation { l: DMatrix::zeros(2, 2) }, 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            SymplecticMatrix::generator(&Generator::QuasiPermutation { index: 5 }, 2),
            Err(Error::Parameter(_))
        ));
        let up = SymplecticMatrix::generator(&Generator::UpperShear { p: DMatrix::zeros(3, 3) }, 3)
            .unwrap();
        assert_eq!(up.matrix(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn inverse_examples() {
        let j = SymplecticMatrix::standard(1);
        assert_eq!(j.inverse().matrix(), &(-standard_form(1)));
        let l = m(2, &[2.0, 1.0, 0.0, 3.0]);
        let dl = SymplecticMatrix::generator(&Generator::Dilation { l: l.clone() }, 2).unwrap();
        let dl_inv = SymplecticMatrix::generator(
            &Generator::Dilation { l: l.try_inverse().unwrap() },
            2,
        )
        .unwrap();
        assert!(max_abs(&(dl.inverse().matrix() - dl_inv.matrix())) < 1e-14);
    }

    #[test]
    fn triangular_predicates() {
        let q = m(1, &[1.0]);
        let up = SymplecticMatrix::generator(&Generator::UpperShear { p: q.clone() }, 1).unwrap();
        let vq = SymplecticMatrix::generator(&Generator::LowerShear { q }, 1).unwrap();
        assert!(up.is_upper_block_triangular(1e-12));
        assert!(!vq.is_upper_block_triangular(1e-12));
        assert!(!SymplecticMatrix::standard(1).is_upper_block_triangular(1e-12));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let j = SymplecticMatrix::standard(2);
        let s = serde_json::to_string(&j).unwrap();
        let back: SymplecticMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
        let bad = r#"{"d":1,"rows":[[2,0],[0,2]]}"#;
        assert!(serde_json::from_str::<SymplecticMatrix>(bad).is_err());
        let wrong = MatrixFile { d: 2, rows: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert!(matches!(wrong.to_matrix(), Err(Error::Dimension(_))));
    }
}
