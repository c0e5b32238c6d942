//! Continued-fraction convergents of a number known only to within an
//! interval. A partial quotient is emitted only when both interval ends
//! agree on it, so no emitted term can be an artifact of rounding.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::decimal::Decimal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub p: u64,
    pub q: u64,
    /// Partial quotient that produced this convergent.
    pub a: u64,
    /// Set on the last convergent when the expansion was cut short for
    /// lack of input precision.
    pub truncated: bool,
}

impl Convergent {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The input is an exact rational and its expansion ended.
    Terminated,
    /// The next certified convergent has a denominator above the limit.
    DenominatorLimit,
    /// The input interval no longer pins down the next partial quotient.
    PrecisionExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergentReport {
    pub convergents: Vec<Convergent>,
    pub stop: StopReason,
    /// Denominator of the first convergent beyond the limit, when certified.
    pub next_q: Option<u128>,
    pub truncated: bool,
}

fn floor(x: &BigRational) -> BigRational {
    BigRational::from_integer(x.numer().div_floor(x.denom()))
}

/// Convergents `p/q` of `x` with `q <= max_q`. Requires `0 < x < 1` at the
/// midpoint of the input interval.
pub fn continued_fraction_convergents(x: &Decimal, max_q: u64) -> Result<ConvergentReport> {
    let mid = x.midpoint();
    if !(mid > BigRational::zero() && mid < BigRational::one()) {
        return Err(Error::InvalidArgument(format!("expected 0 < x < 1, got {x}")));
    }
    if max_q == 0 {
        return Err(Error::InvalidArgument("max_q must be positive".into()));
    }
    let (mut lo, mut hi) = x.bounds();
    let (mut p1, mut q1, mut p2, mut q2) = (1u128, 0u128, 0u128, 1u128);
    let mut convergents = Vec::new();

    let finish = |mut convergents: Vec<Convergent>, stop, next_q| {
        let truncated = stop == StopReason::PrecisionExhausted;
        if truncated {
            if let Some(last) = convergents.last_mut() {
                last.truncated = true;
            }
        }
        Ok(ConvergentReport {
            convergents,
            stop,
            next_q,
            truncated,
        })
    };

    loop {
        let a_lo = floor(&lo);
        if a_lo != floor(&hi) {
            return finish(convergents, StopReason::PrecisionExhausted, None);
        }
        let a = a_lo.to_integer().to_u128().expect("partial quotients are nonnegative");
        let p = a.checked_mul(p1).and_then(|v| v.checked_add(p2));
        let q = a.checked_mul(q1).and_then(|v| v.checked_add(q2));
        let (Some(p), Some(q)) = (p, q) else {
            return finish(convergents, StopReason::DenominatorLimit, None);
        };
        if q > max_q as u128 {
            return finish(convergents, StopReason::DenominatorLimit, Some(q));
        }
        convergents.push(Convergent {
            p: p as u64,
            q: q as u64,
            a: a as u64,
            truncated: false,
        });
        (p2, q2, p1, q1) = (p1, q1, p, q);

        let lo_rest = &lo - &a_lo;
        let hi_rest = &hi - &a_lo;
        match (lo_rest.is_zero(), hi_rest.is_zero()) {
            (true, true) => return finish(convergents, StopReason::Terminated, None),
            // The interval reaches the convergent itself; nothing further is certain.
            (true, false) | (false, true) => {
                return finish(convergents, StopReason::PrecisionExhausted, None)
            }
            (false, false) => {
                lo = lo_rest.recip();
                hi = hi_rest.recip();
            }
        }
    }
}
