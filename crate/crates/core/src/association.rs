//! Agreement between two distance matrices built from the same data:
//! concordance of nearest-neighbor sets and the correlation coefficient.

use serde::{Serialize, Serializer};

use crate::coefficients::Coefficient;
use crate::distance::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::neighbors::{neighbor_sets, TiePolicy};
use crate::robustness::RationalScore;

/// Which index pairs a distance matrix is averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleSpace {
    /// All `n²` index pairs, each with measure `1/n²`.
    #[default]
    FullGrid,
    /// Pairs `i < j`, each with measure `2/(n(n-1))`.
    UpperTriangle,
}

impl SampleSpace {
    pub fn label(&self) -> &'static str {
        match self {
            SampleSpace::FullGrid => "grid",
            SampleSpace::UpperTriangle => "upper",
        }
    }
}

impl std::str::FromStr for SampleSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grid" | "full" => Ok(SampleSpace::FullGrid),
            "upper" | "triangle" => Ok(SampleSpace::UpperTriangle),
            _ => Err(Error::InvalidArgument(format!("unknown sample space {s:?}"))),
        }
    }
}

impl Serialize for SampleSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// `CORD(m, nrm, X)`: rows whose nearest-neighbor sets agree, over `n`.
pub fn concordance(m: Coefficient, nrm: Coefficient, x: &DataMatrix, tie: &TiePolicy) -> RationalScore {
    let a = neighbor_sets(m, x, tie);
    let b = neighbor_sets(nrm, x, tie);
    let agree = (0..x.rows()).filter(|&i| a.set(i) == b.set(i)).count();
    RationalScore::new(agree as u64, x.rows() as u64).expect("agree <= n and n >= 1")
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `E(D)`: `2S/n²` on the full grid, `2S/(n(n-1))` on the upper triangle,
/// where `S` is the sum of the strictly upper entries.
pub fn expectation(d: &DistanceMatrix, conv: SampleSpace) -> Result<f64> {
    let n = d.order() as f64;
    let s = compensated_sum(d.upper_triangle());
    match conv {
        SampleSpace::FullGrid => Ok(2.0 * s / (n * n)),
        SampleSpace::UpperTriangle if d.order() < 2 => Err(Error::TooFewRows {
            needed: 2,
            got: d.order(),
        }),
        SampleSpace::UpperTriangle => Ok(2.0 * s / (n * (n - 1.0))),
    }
}

/// Entrywise product `A ∘ B`.
pub fn hadamard(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<DistanceMatrix> {
    a.hadamard(b)
}

/// Variances at or below this are treated as zero and leave ρ undefined.
pub const VARIANCE_FLOOR: f64 = 1e-24;

/// Correlation between two distance matrices. `rho` is `None` when either
/// variance is degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub rho: Option<f64>,
    #[serde(rename = "cov")]
    pub covariance: f64,
    pub var_m: f64,
    pub var_n: f64,
    pub convention: SampleSpace,
}

impl CorrelationResult {
    pub fn is_defined(&self) -> bool {
        self.rho.is_some()
    }
}

/// `ρ(m, nrm, X)` computed through expectations of Hadamard products.
pub fn correlation(m: Coefficient, nrm: Coefficient, x: &DataMatrix, conv: SampleSpace) -> Result<CorrelationResult> {
    let dm = DistanceMatrix::build(m, x);
    let dn = DistanceMatrix::build(nrm, x);
    correlation_of(&dm, &dn, conv)
}

/// Correlation of two explicit distance matrices of the same order.
pub fn correlation_of(dm: &DistanceMatrix, dn: &DistanceMatrix, conv: SampleSpace) -> Result<CorrelationResult> {
    let e_m = expectation(dm, conv)?;
    let e_n = expectation(dn, conv)?;
    let e_mn = expectation(&dm.hadamard(dn)?, conv)?;
    let e_mm = expectation(&dm.hadamard(dm)?, conv)?;
    let e_nn = expectation(&dn.hadamard(dn)?, conv)?;
    let covariance = e_mn - e_m * e_n;
    let var_m = (e_mm - e_m * e_m).max(0.0);
    let var_n = (e_nn - e_n * e_n).max(0.0);
    let rho = (var_m > VARIANCE_FLOOR && var_n > VARIANCE_FLOOR)
        .then(|| covariance / (var_m * var_n).sqrt());
    Ok(CorrelationResult {
        rho,
        covariance,
        var_m,
        var_n,
        convention: conv,
    })
}
