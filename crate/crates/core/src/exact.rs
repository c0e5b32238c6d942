//! Exact rational distance matrices for the coefficients whose values stay
//! rational on rational data: `N_1`, `N_∞` and `L`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::coefficients::{Coefficient, Exponent};
use crate::distance::DataMatrix;
use crate::error::{Error, Result};

/// A data matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigRational>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                reason: "need a nonempty matrix with matching data length",
            });
        }
        Ok(RationalMatrix { rows, cols, data })
    }

    /// Every finite `f64` is a dyadic rational; the conversion is exact.
    pub fn from_data(x: &DataMatrix) -> Self {
        let data = x
            .as_slice()
            .iter()
            .map(|&v| BigRational::from_float(v).expect("DataMatrix entries are finite"))
            .collect();
        RationalMatrix {
            rows: x.rows(),
            cols: x.cols(),
            data,
        }
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Shape {
                rows: n,
                cols: k,
                reason: "rows have differing lengths",
            });
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&v| BigRational::from_integer(BigInt::from(v)))
            .collect();
        RationalMatrix::new(n, k, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Parses a decimal literal such as `-12.375` or `3e-2` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = [int_part, frac_part].concat();
    let mut numer: BigInt = all.parse().ok()?;
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact counterpart of [`DistanceMatrix`](crate::distance::DistanceMatrix).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalDistanceMatrix {
    order: usize,
    entries: Vec<BigRational>,
}

impl RationalDistanceMatrix {
    /// Exact `D(c, X)`. Only `p = 1`, `p = ∞` and `L` are supported.
    pub fn build(c: Coefficient, x: &RationalMatrix) -> Result<Self> {
        let eval: fn(&[BigRational], &[BigRational]) -> BigRational = match c {
            Coefficient::PNorm(Exponent::Finite(1.0)) => |a, b| {
                a.iter()
                    .zip(b)
                    .fold(BigRational::zero(), |acc, (u, v)| acc + (v - u).abs())
            },
            Coefficient::PNorm(Exponent::Infinity) => |a, b| {
                a.iter()
                    .zip(b)
                    .map(|(u, v)| (v - u).abs())
                    .max()
                    .unwrap_or_else(BigRational::zero)
            },
            Coefficient::SquaredEuclidean => |a, b| {
                a.iter().zip(b).fold(BigRational::zero(), |acc, (u, v)| {
                    let d = v - u;
                    acc + &d * &d
                })
            },
            other => {
                return Err(Error::UnsupportedCoefficient(
                    other.to_string(),
                    "exact mode needs p = 1, p = inf or L",
                ))
            }
        };
        let n = x.rows();
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = eval(x.row(i), x.row(j));
                entries[j * n + i] = d.clone();
                entries[i * n + j] = d;
            }
        }
        Ok(RationalDistanceMatrix { order: n, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }
}

/// Whether nearest-neighbor sets under `c` can be computed exactly, possibly
/// through a coefficient with the same ordering of distances.
pub fn exact_surrogate(c: Coefficient) -> Option<Coefficient> {
    match c {
        Coefficient::PNorm(Exponent::Finite(1.0)) => Some(c),
        // N_2 and L = N_2² order all pairs identically.
        Coefficient::PNorm(Exponent::Finite(2.0)) => Some(Coefficient::SquaredEuclidean),
        Coefficient::PNorm(Exponent::Infinity) | Coefficient::SquaredEuclidean => Some(c),
        _ => None,
    }
}
