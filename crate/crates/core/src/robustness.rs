//! Robustness of nearest-neighbor structure: `ROB⁺` under one appended
//! column, `ROB⁻` under leave-one-column-out, and the power-of-two column
//! that forces every row to a unique nearest neighbor.

use std::fmt;

use num_rational::Ratio;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::coefficients::{Coefficient, Exponent};
use crate::distance::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::exec;
use crate::neighbors::{nearest_sets, neighbor_sets, NeighborSets, TiePolicy};

/// A fraction kept with its defining denominator (not reduced).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalScore {
    num: u64,
    den: u64,
}

impl RationalScore {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidArgument(format!(
                "score {num}/{den} must satisfy 0 <= num <= den, den > 0"
            )));
        }
        Ok(RationalScore { num, den })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The reduced fraction, for exact comparisons across denominators.
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.num, self.den)
    }
}

impl fmt::Display for RationalScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for RationalScore {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalScore", 3)?;
        st.serialize_field("num", &self.num)?;
        st.serialize_field("den", &self.den)?;
        st.serialize_field("value", &self.value())?;
        st.end()
    }
}

/// Checks that `xp` is `x` with exactly one extra column on the right.
fn check_extension(x: &DataMatrix, xp: &DataMatrix) -> Result<()> {
    if xp.rows() != x.rows() {
        return Err(Error::NotExtension(format!(
            "row counts differ ({} vs {})",
            x.rows(),
            xp.rows()
        )));
    }
    if xp.cols() != x.cols() + 1 {
        return Err(Error::NotExtension(format!(
            "expected {} columns, got {}",
            x.cols() + 1,
            xp.cols()
        )));
    }
    for i in 0..x.rows() {
        if x.row(i) != &xp.row(i)[..x.cols()] {
            return Err(Error::NotExtension(format!(
                "row {} differs in the leading columns",
                i + 1
            )));
        }
    }
    Ok(())
}

/// `ROB⁺(c, X, X') = Σ |NEAR(c,X,i) ∩ NEAR(c,X',i)| / NEAR(c,X)`.
pub fn rob_plus(c: Coefficient, x: &DataMatrix, xp: &DataMatrix, tie: &TiePolicy) -> Result<RationalScore> {
    if x.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: x.rows(),
        });
    }
    check_extension(x, xp)?;
    let before = neighbor_sets(c, x, tie);
    let after = neighbor_sets(c, xp, tie);
    rob_plus_from_sets(&before, &after)
}

/// `ROB⁺` from precomputed neighbor sets of the base and augmented matrices.
pub fn rob_plus_from_sets(before: &NeighborSets, after: &NeighborSets) -> Result<RationalScore> {
    if before.order() != after.order() {
        return Err(Error::OrderMismatch(before.order(), after.order()));
    }
    let kept: usize = (0..before.order()).map(|i| before.overlap(after, i)).sum();
    let den = before.total();
    if den == 0 {
        return Err(Error::InvalidArgument("base matrix has no nearest neighbors".into()));
    }
    RationalScore::new(kept as u64, den as u64)
}

/// `ROB⁻(c, X) = 1 - Σ_j n_j / (n k)` where `n_j` counts rows whose
/// neighbor set changes when column `j` is dropped.
pub fn rob_minus(c: Coefficient, x: &DataMatrix, tie: &TiePolicy) -> Result<RationalScore> {
    let changed = columns_changed(c, x, tie)?;
    let n = x.rows() as u64;
    let k = x.cols() as u64;
    let total: u64 = changed.iter().map(|&v| v as u64).sum();
    RationalScore::new(n * k - total, n * k)
}

/// `n_j` for each column `j` (0-based).
pub fn columns_changed(c: Coefficient, x: &DataMatrix, tie: &TiePolicy) -> Result<Vec<usize>> {
    if x.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: x.rows(),
        });
    }
    if x.cols() < 2 {
        return Err(Error::TooFewColumns {
            needed: 2,
            got: x.cols(),
        });
    }
    let base = neighbor_sets(c, x, tie);
    let per_column = exec::map_range(x.cols(), |j| {
        let reduced = x.remove_column(j).expect("k >= 2 checked above");
        let sets = neighbor_sets(c, &reduced, tie);
        (0..x.rows())
            .filter(|&i| sets.set(i) != base.set(i))
            .count()
    });
    Ok(per_column)
}

/// Largest row count for which the spacing column `2^(i-1)` stays exact.
pub const MAX_ADVERSARIAL_ROWS: usize = 62;
/// Largest order for [`spacing_values`].
pub const MAX_SPACING_ORDER: usize = 127;

/// `u(i, j) = |2^j - 2^i|` for 1-based `i, j`, stored 0-based.
pub fn spacing_values(n: usize) -> Result<Vec<Vec<u128>>> {
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if n > MAX_SPACING_ORDER {
        return Err(Error::InvalidArgument(format!(
            "spacing values overflow 128-bit integers beyond n = {MAX_SPACING_ORDER}, got {n}"
        )));
    }
    let pow = |i: usize| 1u128 << (i + 1);
    Ok((0..n)
        .map(|i| (0..n).map(|j| pow(i).abs_diff(pow(j))).collect())
        .collect())
}

/// Output of [`adversarial_augment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarialResult {
    #[serde(skip)]
    pub augmented: DataMatrix,
    /// Scale of the appended column.
    pub t: f64,
    /// `y(i) = 2^(i-1)` for 1-based `i`.
    pub spacing: Vec<u64>,
    /// `t · y`, the column appended to the input.
    pub appended_column: Vec<f64>,
    pub original_near_total: usize,
    pub achieved_near_total: usize,
    pub rob_plus: RationalScore,
    /// Number of scale adjustments tried before the check passed.
    pub iterations: u32,
}

const MAX_SCALE_STEPS: u32 = 200;

/// Appends the column `t·y`, `y(i) = 2^(i-1)`, choosing `t` so that every row
/// of the result has a unique nearest neighbor.
///
/// For `p = ∞` the scale grows from 1 by doubling until the appended column
/// dominates all original distances, so each row's neighbor is the row with
/// the nearest spacing value. For finite `p` it shrinks from 1 by
/// halving until each row's unique neighbor is a member of its original
/// nearest-neighbor set. The power-of-two spacing makes every row of
/// `|y(j) - y(i)|` free of repeats, which is what breaks the ties.
///
/// The result is verified by recomputing the neighbor sets; `ROB⁺` of the
/// input with respect to the result is then at most `n / NEAR(c, X)`.
pub fn adversarial_augment(c: Coefficient, x: &DataMatrix, tie: &TiePolicy) -> Result<AdversarialResult> {
    let exponent = match c {
        Coefficient::PNorm(e) => e,
        Coefficient::SquaredEuclidean => {
            return Err(Error::UnsupportedCoefficient(
                c.to_string(),
                "the construction is stated for p-norms",
            ))
        }
    };
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if n > MAX_ADVERSARIAL_ROWS {
        return Err(Error::InvalidArgument(format!(
            "spacing column is exact only up to {MAX_ADVERSARIAL_ROWS} rows, got {n}"
        )));
    }
    let spacing: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    let original = neighbor_sets(c, x, tie);
    let grow = exponent == Exponent::Infinity;
    let base = DistanceMatrix::build(c, x);

    let mut t = 1.0f64;
    for step in 0..=MAX_SCALE_STEPS {
        let column: Vec<f64> = spacing.iter().map(|&y| t * y as f64).collect();
        let augmented = x.append_columns(std::slice::from_ref(&column))?;
        let after = nearest_sets(&DistanceMatrix::build(c, &augmented), tie);
        let unique = after.total() == n;
        let settled = if grow {
            dominates(&base, &column)
        } else {
            (0..n).all(|i| after.overlap(&original, i) == 1)
        };
        if unique && settled {
            let score = rob_plus_from_sets(&original, &after)?;
            debug_assert!(score.num <= n as u64);
            return Ok(AdversarialResult {
                augmented,
                t,
                spacing,
                appended_column: column,
                original_near_total: original.total(),
                achieved_near_total: after.total(),
                rob_plus: score,
                iterations: step,
            });
        }
        t = if grow { t * 2.0 } else { t * 0.5 };
    }
    Err(Error::ConstructionFailed(format!(
        "no scale within {MAX_SCALE_STEPS} steps gave unique nearest neighbors"
    )))
}

/// Whether `|col[j] - col[i]|` exceeds every off-diagonal distance in `d`.
fn dominates(d: &DistanceMatrix, col: &[f64]) -> bool {
    let n = d.order();
    (0..n).all(|i| (i + 1..n).all(|j| (col[j] - col[i]).abs() > d.get(i, j)))
}
