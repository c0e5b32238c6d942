//! Fixed-point decimals with an explicit uncertainty radius, and the
//! constant `δ = exp(-exp(-γ))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant to 22 decimal places, as printed in the
/// source material. Truncated, so the true value exceeds it by less than
/// `2e-23`.
pub const EULER_GAMMA_22: &str = "0.5772156649015328606065";

/// Largest number of decimals [`delta_constant`] certifies.
pub const MAX_DELTA_DIGITS: u32 = 20;

const EXTRA_DIGITS: u32 = 10;

/// `mantissa · 10^-scale`, known to lie within `radius · 10^-scale` of the
/// true value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decimal {
    mantissa: BigInt,
    scale: u32,
    radius: BigUint,
}

impl Decimal {
    pub fn new(mantissa: BigInt, scale: u32, radius: BigUint) -> Self {
        Decimal {
            mantissa,
            scale,
            radius,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Uncertainty in units of the last place.
    pub fn radius(&self) -> &BigUint {
        &self.radius
    }

    pub fn with_radius(mut self, radius: BigUint) -> Self {
        self.radius = radius;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    fn denominator(&self) -> BigInt {
        num_traits::pow(BigInt::from(10), self.scale as usize)
    }

    pub fn midpoint(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), self.denominator())
    }

    /// Closed interval `[mid - r, mid + r]` as exact rationals.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        let r = BigInt::from_biguint(Sign::Plus, self.radius.clone());
        let den = self.denominator();
        (
            BigRational::new(&self.mantissa - &r, den.clone()),
            BigRational::new(&self.mantissa + r, den),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    /// Rounds half away from zero to `digits` decimals, widening the radius
    /// so the result still covers the original interval.
    pub fn round_to(&self, digits: u32) -> Decimal {
        if digits >= self.scale {
            let shift = num_traits::pow(BigInt::from(10), (digits - self.scale) as usize);
            let shift_u = shift.magnitude().clone();
            return Decimal::new(&self.mantissa * shift, digits, &self.radius * shift_u);
        }
        let unit = num_traits::pow(BigInt::from(10), (self.scale - digits) as usize);
        let half = &unit / 2;
        let (q, r) = self.mantissa.abs().div_rem(&unit);
        let mut m = if r >= half { q + 1 } else { q };
        if self.mantissa.is_negative() {
            m = -m;
        }
        // Rounding moves the value by at most half a unit; the old radius is
        // strictly smaller than one unit after ceiling division.
        let old = BigInt::from_biguint(Sign::Plus, self.radius.clone());
        let carried = (old + &half).div_ceil(&unit);
        let radius = (carried + BigInt::from(1)).magnitude().clone();
        Decimal::new(m, digits, radius)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.magnitude().to_string();
        let scale = self.scale as usize;
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let padded = format!("{digits:0>width$}", width = scale + 1);
        let (int, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int}.{frac}")
    }
}

/// Parses a plain decimal literal (`-0.125`, `3`, `.5`) exactly.
impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a decimal literal: {s:?}"));
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut m: BigInt = [int, frac].concat().parse().map_err(|_| bad())?;
        if neg {
            m = -m;
        }
        Ok(Decimal::new(m, frac.len() as u32, BigUint::zero()))
    }
}

/// `exp(x)` in fixed point with `scale` decimals; `x` is also scaled.
/// Truncation error is at most one unit per series term.
fn exp_fixed(x: &BigInt, scale: u32) -> (BigInt, u32) {
    let one = num_traits::pow(BigInt::from(10), scale as usize);
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut k = 1u32;
    while !term.is_zero() {
        term = &term * x / (&one * k);
        sum += &term;
        k += 1;
    }
    (sum, k)
}

/// `δ = exp(-exp(-γ))` rounded to `digits` decimals, from the 22-digit
/// value of γ, computed with `digits + 10` working decimals. The returned
/// radius (one unit in the last place) covers rounding, the truncation of
/// γ and series truncation.
pub fn delta_constant(digits: u32) -> Result<Decimal> {
    if digits == 0 || digits > MAX_DELTA_DIGITS {
        return Err(Error::Precision(format!(
            "delta is available to 1..={MAX_DELTA_DIGITS} decimals, asked for {digits}"
        )));
    }
    let working = digits + EXTRA_DIGITS;
    let gamma: Decimal = EULER_GAMMA_22.parse()?;
    let g = gamma.round_to(working);
    let (inner, _) = exp_fixed(&-g.mantissa, working);
    let (outer, _) = exp_fixed(&-inner, working);
    let exact = Decimal::new(outer, working, BigUint::from(1000u32));
    let rounded = exact.round_to(digits);
    // Collapse to a single unit: the accumulated error is far below half a
    // unit at `digits` decimals.
    Ok(rounded.with_radius(BigUint::from(1u32)))
}
