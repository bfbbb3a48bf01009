//! Boundedness verdicts for the change of variables `F -> F o S^{-1}` on
//! mixed-norm spaces, with and without weights.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, default_tolerance};
use crate::symplectic::{reduce_special, SymplecticMatrix, Variant};
use crate::weights::{equivalence_under, Equivalence, Family, Weight};

/// A Lebesgue exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(v: f64) -> Result<Self> {
        if v == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if v.is_finite() && v >= 1.0 {
            Ok(Exponent::Finite(v))
        } else {
            Err(Error::Parameter(format!("exponent must lie in [1, inf], got {v}")))
        }
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("cannot parse exponent {s:?}")))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::new(v),
            Raw::Text(t) => t.parse(),
        }
        .map_err(D::Error::custom)
    }
}

/// Inner exponent `p` (space) and outer exponent `q` (frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: Exponent,
    pub q: Exponent,
}

impl ExponentPair {
    pub fn new(p: Exponent, q: Exponent) -> Self {
        Self { p, q }
    }

    pub fn parse(p: &str, q: &str) -> Result<Self> {
        Ok(Self { p: p.parse()?, q: q.parse()? })
    }

    pub fn finite(p: f64, q: f64) -> Result<Self> {
        Ok(Self { p: Exponent::new(p)?, q: Exponent::new(q)? })
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }

    /// `1/(2p) - 1/(2q)`.
    pub fn half_gap(&self) -> f64 {
        0.5 * (self.p.reciprocal() - self.q.reciprocal())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    BoundedAutomorphism,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    PEqualsQ,
    UpperBlockTriangular,
    NotUpperTriangular,
    WeightTransferRm,
    WeightTransferTm,
    WeightEquivalence,
    OpenCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub reason: Reason,
    pub details: String,
    /// Untouched coordinates in the reduced form used to explain the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default, with = "opt_rows")]
    pub q_prime: Option<DMatrix<f64>>,
    /// Growth exponent of the Gaussian witness family; `None` for `p = q`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

mod opt_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<DMatrix<f64>>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(crate::linalg::rows::to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DMatrix<f64>>, D::Error> {
        use serde::de::Error as _;
        Option::<Vec<Vec<f64>>>::deserialize(d)?
            .map(|r| crate::linalg::rows::from_rows(&r).map_err(D::Error::custom))
            .transpose()
    }
}

/// `(d - k)(1/(2p) - 1/(2q))`.
pub fn blowup_exponent(d: usize, k: usize, e: ExponentPair) -> Result<f64> {
    if k > d {
        return Err(Error::Parameter(format!("k={k} exceeds d={d}")));
    }
    if e.is_diagonal() {
        return Err(Error::Domain("p = q gives a degenerate exponent".into()));
    }
    Ok((d - k) as f64 * e.half_gap())
}

pub fn classify_unweighted(s: &SymplecticMatrix, e: ExponentPair) -> Verdict {
    let tol = default_tolerance();
    if e.is_diagonal() {
        return Verdict {
            status: Status::BoundedAutomorphism,
            reason: Reason::PEqualsQ,
            details: format!("p = q = {}: the change of variables preserves the L^p norm", e.p),
            k: None,
            q_prime: None,
            exponent: None,
        };
    }
    // Reduction data for the report; the verdict itself depends only on C.
    let variant = if e.half_gap() > 0.0 { Variant::VQThenPi } else { Variant::PiThenVQ };
    let reduced = reduce_special(&s.inverse(), variant, tol).ok();
    let k = reduced.as_ref().map(|f| f.k);
    let q_prime = reduced.as_ref().map(|f| f.q_prime.map(|v| v + 0.0));
    let exponent = k.map(|k| blowup_exponent(s.dim(), k, e).unwrap_or(0.0));
    if s.is_upper_block_triangular(tol) {
        Verdict {
            status: Status::BoundedAutomorphism,
            reason: Reason::UpperBlockTriangular,
            details: "lower-left block vanishes".into(),
            k,
            q_prime,
            exponent,
        }
    } else {
        Verdict {
            status: Status::Unbounded,
            reason: Reason::NotUpperTriangular,
            details: format!(
                "p != q and the lower-left block has max entry {:.3e}",
                linalg::max_abs(&s.block_c())
            ),
            k,
            q_prime,
            exponent,
        }
    }
}

/// Verdict on the weighted space `L^{p,q}_m`.
///
/// Only the analytic families are supported. For a family that is not
/// comparable with its transform, the ratio `m / m o S^{-1}` is unbounded
/// above and its infimum is zero, so neither transfer argument applies and
/// the verdict is inconclusive.
pub fn classify_weighted(s: &SymplecticMatrix, e: ExponentPair, w: &dyn Weight) -> Result<Verdict> {
    let spec = w
        .analytic()
        .ok_or_else(|| Error::Capability("only the analytic weight families get verdicts".into()))?;
    if spec.d != s.dim() {
        return Err(Error::Dimension(format!(
            "weight has d={}, matrix has d={}",
            spec.d,
            s.dim()
        )));
    }
    let base = classify_unweighted(s, e);
    if equivalence_under(spec, s) == Equivalence::Equivalent {
        return Ok(Verdict {
            reason: Reason::WeightEquivalence,
            details: format!("weight is comparable with its transform; {}", base.details),
            ..base
        });
    }
    // Non-equivalent spatial/frequency weights: sup ratio = inf, inf ratio = 0.
    let (r_finite, t_positive) = match spec.family {
        Family::RadialLog { .. } => (true, true),
        Family::Spatial { .. } | Family::Frequency { .. } => (false, false),
    };
    let verdict = match base.status {
        Status::BoundedAutomorphism if r_finite => Verdict {
            reason: Reason::WeightTransferRm,
            details: "unweighted operator bounded and weight ratio bounded above".into(),
            ..base
        },
        Status::Unbounded if t_positive => Verdict {
            reason: Reason::WeightTransferTm,
            details: "unweighted operator unbounded and weight ratio bounded below".into(),
            ..base
        },
        _ => Verdict {
            status: Status::Inconclusive,
            reason: Reason::OpenCase,
            details: format!(
                "weight not comparable with its transform (ratio unbounded above, infimum 0); \
                 unweighted verdict would be {:?}",
                base.status
            ),
            ..base
        },
    };
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::Generator;
    use crate::weights::{FnWeight, WeightSpec};

    fn pair(p: &str, q: &str) -> ExponentPair {
        ExponentPair::parse(p, q).unwrap()
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::Finite(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        let e: ExponentPair = serde_json::from_str(r#"{"p":1,"q":"inf"}"#).unwrap();
        assert_eq!(e, pair("1", "inf"));
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"p":1.0,"q":"inf"}"#);
    }

    #[test]
    fn blowup_examples() {
        assert_eq!(blowup_exponent(1, 0, pair("1", "inf")).unwrap(), 0.5);
        assert_eq!(blowup_exponent(3, 3, pair("1", "2")).unwrap(), 0.0);
        assert_eq!(blowup_exponent(2, 1, pair("2", "4")).unwrap(), 0.125);
        assert!(matches!(blowup_exponent(2, 1, pair("3", "3")), Err(Error::Domain(_))));
    }

    #[test]
    fn unweighted_examples() {
        let j = SymplecticMatrix::standard(1);
        let v = classify_unweighted(&j, pair("3", "3"));
        assert_eq!((v.status, v.reason), (Status::BoundedAutomorphism, Reason::PEqualsQ));
        let v = classify_unweighted(&j, pair("1", "inf"));
        assert_eq!((v.status, v.reason), (Status::Unbounded, Reason::NotUpperTriangular));
        assert_eq!(v.k, Some(0));
        assert_eq!(v.exponent, Some(0.5));
        let up = SymplecticMatrix::generator(
            &Generator::UpperShear { p: DMatrix::from_element(1, 1, 2.0) },
            1,
        )
        .unwrap();
        let v = classify_unweighted(&up, pair("1", "2"));
        assert_eq!((v.status, v.reason), (Status::BoundedAutomorphism, Reason::UpperBlockTriangular));
    }

    #[test]
    fn verdict_json_shape() {
        let v = classify_unweighted(&SymplecticMatrix::standard(1), pair("2", "2"));
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["status"], "bounded_automorphism");
        assert_eq!(j["reason"], "p_equals_q");
    }

    #[test]
    fn weighted_examples() {
        let j = SymplecticMatrix::standard(1);
        let m = WeightSpec::radial_log(2.0, 1.0, 1).unwrap();
        let v = classify_weighted(&j, pair("1", "2"), &m).unwrap();
        assert_eq!((v.status, v.reason), (Status::Unbounded, Reason::WeightEquivalence));

        let p = WeightSpec::spatial(1.0, 1).unwrap();
        let v = classify_weighted(&j, pair("1", "2"), &p).unwrap();
        assert_eq!((v.status, v.reason), (Status::Inconclusive, Reason::OpenCase));

        // Lower shear has B = 0, so the spatial weight is comparable.
        let vq = SymplecticMatrix::generator(
            &Generator::LowerShear { q: DMatrix::from_element(1, 1, 1.0) },
            1,
        )
        .unwrap();
        let v = classify_weighted(&vq, pair("1", "2"), &p).unwrap();
        assert_eq!((v.status, v.reason), (Status::Unbounded, Reason::WeightEquivalence));

        let custom = FnWeight { d: 1, f: |_: &[f64]| 1.0 };
        assert!(matches!(
            classify_weighted(&j, pair("1", "2"), &custom),
            Err(Error::Capability(_))
        ));
    }
}
