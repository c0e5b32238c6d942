//! The coefficient family: p-norms `N_p` for `p` in `[1, ∞]` and the
//! squared-Euclidean pseudo-coefficient `L = N_2²`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent of a p-norm. Infinity is its own variant rather than a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

/// A distance-defining function on row vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    PNorm(Exponent),
    SquaredEuclidean,
}

// Largest binary exponent of the summands before the unscaled sum risks
// overflow or underflow.
const SAFE_EXP2: f64 = 1000.0;

impl Coefficient {
    pub const MANHATTAN: Coefficient = Coefficient::PNorm(Exponent::Finite(1.0));
    pub const EUCLIDEAN: Coefficient = Coefficient::PNorm(Exponent::Finite(2.0));
    pub const CHEBYSHEV: Coefficient = Coefficient::PNorm(Exponent::Infinity);

    /// Finite p-norm. Rejects `p < 1` and non-finite `p`; use
    /// [`Coefficient::CHEBYSHEV`] for `p = ∞`.
    pub fn p_norm(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Coefficient::PNorm(Exponent::Finite(p)))
        } else if p == f64::INFINITY {
            Ok(Coefficient::CHEBYSHEV)
        } else {
            Err(Error::InvalidArgument(format!(
                "p-norm exponent must lie in [1, inf], got {p}"
            )))
        }
    }

    /// `true` for every p-norm, `false` for `L`, which violates
    /// homogeneity and the triangle inequality.
    pub fn is_true_norm(&self) -> bool {
        matches!(self, Coefficient::PNorm(_))
    }

    /// Value of the coefficient on `v`.
    pub fn evaluate(&self, v: &[f64]) -> Result<f64> {
        if v.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(col) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: 0, col });
        }
        Ok(self.evaluate_unchecked(v))
    }

    /// Like [`evaluate`](Self::evaluate) without input validation. Callers
    /// guarantee a nonempty slice of finite values.
    pub(crate) fn evaluate_unchecked(&self, v: &[f64]) -> f64 {
        match *self {
            Coefficient::SquaredEuclidean => v.iter().map(|x| x * x).sum(),
            Coefficient::PNorm(Exponent::Infinity) => max_abs(v),
            Coefficient::PNorm(Exponent::Finite(p)) => p_norm_finite(v, p),
        }
    }

    /// Norm of the difference `b - a` without allocating.
    pub(crate) fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| y - x);
        match *self {
            Coefficient::SquaredEuclidean => diffs.map(|d| d * d).sum(),
            Coefficient::PNorm(Exponent::Infinity) => diffs.fold(0.0, |m, d| m.max(d.abs())),
            Coefficient::PNorm(Exponent::Finite(p)) => {
                // Short rows are the common case; keep them on the stack.
                let mut buf = [0.0f64; 16];
                if a.len() <= buf.len() {
                    for (slot, d) in buf.iter_mut().zip(diffs) {
                        *slot = d;
                    }
                    p_norm_finite(&buf[..a.len()], p)
                } else {
                    let v: Vec<f64> = diffs.collect();
                    p_norm_finite(&v, p)
                }
            }
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn p_norm_finite(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    let m = max_abs(v);
    if m == 0.0 {
        return 0.0;
    }
    // The direct form keeps integer-valued results exact; fall back to the
    // scaled form when m^p would leave the normal range.
    let e = p * m.log2();
    if e.abs() < SAFE_EXP2 {
        let s: f64 = if p == 2.0 {
            v.iter().map(|x| x * x).sum()
        } else {
            v.iter().map(|x| x.abs().powf(p)).sum()
        };
        if p == 2.0 {
            s.sqrt()
        } else {
            s.powf(p.recip())
        }
    } else {
        let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
        m * s.powf(p.recip())
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::SquaredEuclidean => f.write_str("L"),
            Coefficient::PNorm(Exponent::Infinity) => f.write_str("pinf"),
            Coefficient::PNorm(Exponent::Finite(p)) => write!(f, "p{p}"),
        }
    }
}

/// Parses `p1`, `p2`, `pinf`, `p<decimal>` and `L`, case-insensitively.
impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let bad = || Error::CoefficientSyntax(s.to_string());
        if lower == "l" {
            return Ok(Coefficient::SquaredEuclidean);
        }
        let rest = lower.strip_prefix('p').ok_or_else(bad)?;
        if rest == "inf" {
            return Ok(Coefficient::CHEBYSHEV);
        }
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
            return Err(bad());
        }
        let p: f64 = rest.parse().map_err(|_| bad())?;
        if !(p.is_finite() && p >= 1.0) {
            return Err(bad());
        }
        Ok(Coefficient::PNorm(Exponent::Finite(p)))
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn p(x: f64) -> Coefficient {
        Coefficient::p_norm(x).unwrap()
    }

    #[test]
    fn golden_values() {
        assert_eq!(Coefficient::CHEBYSHEV.evaluate(&[3.0, -30.0]).unwrap(), 30.0);
        assert_eq!(p(1.0).evaluate(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        let v = p(2.0).evaluate(&[-3.0, SQRT3]).unwrap();
        assert!((v - 2.0 * SQRT3).abs() <= 1e-12 * v);
        assert_eq!(p(1.0).evaluate(&[3.0, -30.0]).unwrap(), 33.0);
        assert_eq!(Coefficient::SquaredEuclidean.evaluate(&[1.0, 2.0]).unwrap(), 5.0);
    }

    #[test]
    fn empty_and_nonfinite_rejected() {
        assert_eq!(p(2.0).evaluate(&[]), Err(Error::EmptyVector));
        assert!(matches!(
            p(2.0).evaluate(&[1.0, f64::NAN]),
            Err(Error::NonFinite { col: 1, .. })
        ));
    }

    #[test]
    fn normhood() {
        assert!(p(2.0).is_true_norm());
        assert!(Coefficient::CHEBYSHEV.is_true_norm());
        assert!(!Coefficient::SquaredEuclidean.is_true_norm());
    }

    #[test]
    fn parse_syntax() {
        assert_eq!("p1".parse::<Coefficient>().unwrap(), p(1.0));
        assert_eq!("P2".parse::<Coefficient>().unwrap(), p(2.0));
        assert_eq!("pINF".parse::<Coefficient>().unwrap(), Coefficient::CHEBYSHEV);
        assert_eq!("p3.5".parse::<Coefficient>().unwrap(), p(3.5));
        assert_eq!("l".parse::<Coefficient>().unwrap(), Coefficient::SquaredEuclidean);
        for bad in ["", "p", "p0.5", "q2", "p-1", "pnan", "p1e3", "L2"] {
            assert!(bad.parse::<Coefficient>().is_err(), "{bad}");
        }
        for c in [p(1.0), p(3.5), Coefficient::CHEBYSHEV, Coefficient::SquaredEuclidean] {
            assert_eq!(c.to_string().parse::<Coefficient>().unwrap(), c);
        }
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let v = p(400.0).evaluate(&[1e200, 3e199]).unwrap();
        assert!(v.is_finite());
        assert!((v - 1e200).abs() <= 1e-12 * 1e200);
        let tiny = p(50.0).evaluate(&[1e-300, 0.0]).unwrap();
        assert!((tiny - 1e-300).abs() <= 1e-12 * 1e-300);
    }

    #[test]
    fn unit_vector_has_norm_one() {
        for c in [p(1.0), p(2.0), p(3.0), p(7.5), Coefficient::CHEBYSHEV] {
            assert_eq!(c.evaluate(&[1.0]).unwrap(), 1.0);
        }
    }

    fn coefficient() -> impl Strategy<Value = Coefficient> {
        prop_oneof![
            Just(p(1.0)),
            Just(p(2.0)),
            Just(Coefficient::CHEBYSHEV),
            (1.0f64..12.0).prop_map(p),
        ]
    }

    fn vector() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 1..8)
    }

    proptest! {
        #[test]
        fn zero_iff_zero_vector(c in coefficient(), v in vector()) {
            let n = c.evaluate(&v).unwrap();
            prop_assert!(n >= 0.0);
            prop_assert_eq!(n == 0.0, v.iter().all(|x| *x == 0.0));
        }

        #[test]
        fn absolute_homogeneity(c in coefficient(), v in vector(), s in -10.0f64..10.0) {
            let scaled: Vec<f64> = v.iter().map(|x| s * x).collect();
            let lhs = c.evaluate(&scaled).unwrap();
            let rhs = s.abs() * c.evaluate(&v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-300);
        }

        #[test]
        fn triangle_inequality(c in coefficient(), (v, w) in (1usize..8).prop_flat_map(|k| (
            prop::collection::vec(-100.0f64..100.0, k),
            prop::collection::vec(-100.0f64..100.0, k),
        ))) {
            let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let lhs = c.evaluate(&sum).unwrap();
            let rhs = c.evaluate(&v).unwrap() + c.evaluate(&w).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }

        #[test]
        fn zero_entries_do_not_matter(c in coefficient(), v in vector(), zeros in prop::collection::vec(0usize..8, 0..4)) {
            prop_assume!(v.iter().any(|x| *x != 0.0));
            let mut padded = v.clone();
            for z in zeros {
                let at = z.min(padded.len());
                padded.insert(at, 0.0);
            }
            let stripped: Vec<f64> = v.iter().copied().filter(|x| *x != 0.0).collect();
            let base = c.evaluate(&stripped).unwrap();
            prop_assert_eq!(c.evaluate(&padded).unwrap(), base);
            prop_assert_eq!(c.evaluate(&v).unwrap(), base);
        }

        #[test]
        fn larger_exponent_gives_smaller_norm(v in vector(), q in 1.0f64..10.0, dp in 0.0f64..10.0) {
            let small = p(q).evaluate(&v).unwrap();
            let large = p(q + dp).evaluate(&v).unwrap();
            let inf = Coefficient::CHEBYSHEV.evaluate(&v).unwrap();
            prop_assert!(large <= small * (1.0 + 1e-12));
            prop_assert!(inf <= large * (1.0 + 1e-12));
        }

        #[test]
        fn squared_euclidean_is_square_of_two_norm(v in vector()) {
            let l = Coefficient::SquaredEuclidean.evaluate(&v).unwrap();
            let n2 = p(2.0).evaluate(&v).unwrap();
            prop_assert!((l - n2 * n2).abs() <= 1e-12 * l.max(1e-300));
        }
    }
}
