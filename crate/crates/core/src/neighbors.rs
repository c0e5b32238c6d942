//! Nearest-neighbor sets `NEAR(N, X, i)` and their aggregate size `NEAR(N, X)`.
//!
//! Ties are exact in the underlying mathematics but floating point perturbs
//! algebraically equal distances, so the float path compares against the row
//! minimum with a combined absolute/relative tolerance. The rational path
//! in [`nearest_sets_exact`] compares exactly.

use std::collections::BTreeSet;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::coefficients::Coefficient;
use crate::distance::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::exact::{exact_surrogate, RationalDistanceMatrix, RationalMatrix};
use crate::exec;
use crate::rng::stream_rng;

/// How rows at distance zero from row `i` are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicateRule {
    /// Zero is the smallest possible off-diagonal entry; duplicates are
    /// nearest neighbors of each other.
    #[default]
    ZeroCounts,
    /// Only positive entries compete. A row with no positive entry has no
    /// nearest neighbor.
    SmallestPositive,
}

/// Tolerances used to decide that two floating-point distances tie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiePolicy {
    relative_tolerance: f64,
    absolute_tolerance: f64,
    duplicates: DuplicateRule,
}

impl Default for TiePolicy {
    fn default() -> Self {
        TiePolicy {
            relative_tolerance: 1e-9,
            absolute_tolerance: 0.0,
            duplicates: DuplicateRule::ZeroCounts,
        }
    }
}

impl TiePolicy {
    pub fn new(relative_tolerance: f64, absolute_tolerance: f64) -> Result<Self> {
        let ok = |t: f64| t.is_finite() && t >= 0.0;
        if !ok(relative_tolerance) || !ok(absolute_tolerance) {
            return Err(Error::InvalidArgument(format!(
                "tie tolerances must be finite and nonnegative, got {relative_tolerance} and {absolute_tolerance}"
            )));
        }
        Ok(TiePolicy {
            relative_tolerance,
            absolute_tolerance,
            duplicates: DuplicateRule::ZeroCounts,
        })
    }

    /// Zero tolerances: only bit-identical distances tie.
    pub fn exact() -> Self {
        TiePolicy {
            relative_tolerance: 0.0,
            absolute_tolerance: 0.0,
            duplicates: DuplicateRule::ZeroCounts,
        }
    }

    pub fn with_duplicates(mut self, rule: DuplicateRule) -> Self {
        self.duplicates = rule;
        self
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn absolute_tolerance(&self) -> f64 {
        self.absolute_tolerance
    }

    pub fn duplicates(&self) -> DuplicateRule {
        self.duplicates
    }

    fn threshold(&self, min: f64) -> f64 {
        min + self
            .absolute_tolerance
            .max(self.relative_tolerance * min)
    }
}

/// Per-row nearest-neighbor index sets (0-based, sorted, never containing
/// the row itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSets {
    sets: Vec<Vec<usize>>,
}

impl NeighborSets {
    /// Wraps explicit sets. Each set is sorted and deduplicated.
    pub fn from_sets(sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        let mut out = Vec::with_capacity(n);
        for (i, s) in sets.into_iter().enumerate() {
            let s: BTreeSet<usize> = s.into_iter().collect();
            if s.contains(&i) || s.iter().any(|&j| j >= n) {
                return Err(Error::InvalidArgument(format!(
                    "neighbor set {i} must exclude {i} and stay below {n}"
                )));
            }
            out.push(s.into_iter().collect());
        }
        Ok(NeighborSets { sets: out })
    }

    pub fn order(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// `NEAR(N, X)`: the sum of the set sizes.
    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// Size of `set(i) ∩ other.set(i)`.
    pub fn overlap(&self, other: &NeighborSets, i: usize) -> usize {
        let (a, b) = (&self.sets[i], &other.sets[i]);
        let (mut x, mut y, mut count) = (0, 0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
        count
    }

    /// Sets after relabeling: row `i` of the result is row `perm[i]` here.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        crate::distance::check_permutation(perm, self.order())?;
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let sets = perm
            .iter()
            .map(|&old| {
                let mut s: Vec<usize> = self.sets[old].iter().map(|&j| inverse[j]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        Ok(NeighborSets { sets })
    }

    /// Checks `n <= total <= n(n-1)`, `1 <= |set i| <= n-1` and
    /// `total != n(n-1) - 1` (for `n > 1`), and emptiness for `n = 1`.
    pub fn check_bounds(&self) -> Result<()> {
        let n = self.order();
        let total = self.total();
        let fail = |what: String| Err(Error::ConstructionFailed(what));
        if n == 1 {
            return if total == 0 {
                Ok(())
            } else {
                fail("a single row has no nearest neighbor".into())
            };
        }
        if let Some(i) = self.sets.iter().position(|s| s.is_empty() || s.len() > n - 1) {
            return fail(format!("row {} has {} nearest neighbors", i + 1, self.sets[i].len()));
        }
        if total < n || total > n * (n - 1) {
            return fail(format!("NEAR total {total} outside [{n}, {}]", n * (n - 1)));
        }
        if total == n * (n - 1) - 1 {
            return fail(format!("NEAR total {total} equals n(n-1)-1"));
        }
        Ok(())
    }
}

/// JSON form: `{"sets": [[...]], "total": t}` with 1-based indices.
impl Serialize for NeighborSets {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<Vec<usize>> = self
            .sets
            .iter()
            .map(|set| set.iter().map(|j| j + 1).collect())
            .collect();
        let mut st = s.serialize_struct("NeighborSets", 2)?;
        st.serialize_field("sets", &one_based)?;
        st.serialize_field("total", &self.total())?;
        st.end()
    }
}

/// `NEAR(N, X, i)` for every row of `d`.
pub fn nearest_sets(d: &DistanceMatrix, tie: &TiePolicy) -> NeighborSets {
    let n = d.order();
    let sets = (0..n).map(|i| row_neighbors(d.row(i), i, tie)).collect();
    // A chain of near-ties each inside the tolerance can make the relation
    // asymmetric, so the n(n-1)-1 exclusion is checked by callers through
    // `check_bounds` rather than asserted here.
    NeighborSets { sets }
}

fn row_neighbors(row: &[f64], i: usize, tie: &TiePolicy) -> Vec<usize> {
    let candidates = || {
        row.iter()
            .enumerate()
            .filter(move |&(j, &v)| {
                j != i && (tie.duplicates == DuplicateRule::ZeroCounts || v > 0.0)
            })
    };
    let Some(min) = candidates().map(|(_, &v)| v).min_by(f64::total_cmp) else {
        return Vec::new();
    };
    let limit = tie.threshold(min);
    candidates()
        .filter(|&(_, &v)| v <= limit)
        .map(|(j, _)| j)
        .collect()
}

/// Nearest-neighbor sets of a rational distance matrix; ties are exact.
pub fn nearest_sets_exact(d: &RationalDistanceMatrix) -> NeighborSets {
    let n = d.order();
    let sets = (0..n)
        .map(|i| {
            let row = d.row(i);
            let others = || row.iter().enumerate().filter(move |(j, _)| *j != i);
            match others().map(|(_, v)| v).min() {
                None => Vec::new(),
                Some(min) => others().filter(|(_, v)| *v == min).map(|(j, _)| j).collect(),
            }
        })
        .collect();
    let out = NeighborSets { sets };
    debug_assert!(out.check_bounds().is_ok(), "exact neighbor sets out of bounds");
    out
}

/// Convenience: `nearest_sets(D(c, X), tie)`.
pub fn neighbor_sets(c: Coefficient, x: &DataMatrix, tie: &TiePolicy) -> NeighborSets {
    nearest_sets(&DistanceMatrix::build(c, x), tie)
}

/// `NEAR(N, X)`.
pub fn near_total(s: &NeighborSets) -> usize {
    s.total()
}

/// Bounds on the empirical search in [`achievable_near_totals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Number of columns of the searched matrices.
    pub cols: usize,
    /// Integer grid `{0, .., levels - 1}` for entries.
    pub levels: u32,
    /// Enumerate the whole grid when it has at most this many matrices.
    pub exhaustive_limit: u64,
    /// Random grid matrices drawn when the grid is too large, plus the
    /// same number of continuous random matrices.
    pub random_samples: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            cols: 2,
            levels: 3,
            exhaustive_limit: 1 << 20,
            random_samples: 20_000,
        }
    }
}

/// Result of [`achievable_near_totals`]. Observed values only; not a proof
/// that other values are unattainable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearTotalsReport {
    pub n: usize,
    pub coefficient: Coefficient,
    pub observed: BTreeSet<usize>,
    pub matrices_examined: u64,
    pub exhaustive_grid: bool,
}

const SEARCH_CHUNK: u64 = 512;

/// Empirically explores which values `NEAR(c, X)` takes over `n`-row data
/// matrices: structured probes, the integer grid (exhaustively when small,
/// sampled otherwise) and continuous random matrices. Deterministic per seed.
pub fn achievable_near_totals(
    n: usize,
    c: Coefficient,
    budget: &SearchBudget,
    seed: u64,
) -> Result<NearTotalsReport> {
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if budget.cols == 0 || budget.levels == 0 {
        return Err(Error::InvalidArgument("search budget needs cols >= 1 and levels >= 1".into()));
    }
    let k = budget.cols;
    let cells = (n * k) as u32;
    let grid_size = (budget.levels as u64).checked_pow(cells);
    let exhaustive = matches!(grid_size, Some(g) if g <= budget.exhaustive_limit);
    let tie = TiePolicy::default();
    let total_of_grid = |values: &[i64]| -> usize {
        match exact_surrogate(c) {
            Some(sc) => {
                let rows: Vec<Vec<i64>> = values.chunks(k).map(<[i64]>::to_vec).collect();
                let x = RationalMatrix::from_integer_rows(&rows).expect("grid matrix is well formed");
                let d = RationalDistanceMatrix::build(sc, &x).expect("surrogate supports exact mode");
                nearest_sets_exact(&d).total()
            }
            None => {
                let data = values.iter().map(|&v| v as f64).collect();
                let x = DataMatrix::new(n, k, data).expect("grid matrix is well formed");
                neighbor_sets(c, &x, &tie).total()
            }
        }
    };

    let mut observed = BTreeSet::new();
    let mut examined = 0u64;

    // Structured probes: all rows equal, equal spacing along a line.
    let equal = DataMatrix::new(n, k, vec![0.0; n * k])?;
    observed.insert(neighbor_sets(c, &equal, &tie).total());
    let line: Vec<f64> = (0..n).flat_map(|i| std::iter::repeat_n(i as f64, k)).collect();
    observed.insert(neighbor_sets(c, &DataMatrix::new(n, k, line)?, &tie).total());
    examined += 2;

    let grid_units = if exhaustive {
        grid_size.unwrap_or(0)
    } else {
        budget.random_samples
    };
    let chunks = grid_units.div_ceil(SEARCH_CHUNK);
    let levels = budget.levels as i64;
    let grid_found = exec::map_range(chunks as usize, |chunk| {
        let mut found = BTreeSet::new();
        let mut rng = stream_rng(seed, chunk as u64);
        let start = chunk as u64 * SEARCH_CHUNK;
        let end = (start + SEARCH_CHUNK).min(grid_units);
        let mut values = vec![0i64; n * k];
        for unit in start..end {
            if exhaustive {
                let mut rest = unit;
                for v in values.iter_mut() {
                    *v = (rest % levels as u64) as i64;
                    rest /= levels as u64;
                }
            } else {
                for v in values.iter_mut() {
                    *v = rng.random_range(0..levels);
                }
            }
            found.insert(total_of_grid(&values));
        }
        found
    });
    examined += grid_units;

    let continuous_found = exec::map_range(budget.random_samples.div_ceil(SEARCH_CHUNK) as usize, |chunk| {
        let mut found = BTreeSet::new();
        let mut rng = stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, chunk as u64);
        let start = chunk as u64 * SEARCH_CHUNK;
        let end = (start + SEARCH_CHUNK).min(budget.random_samples);
        for _ in start..end {
            let data = (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = DataMatrix::new(n, k, data).expect("finite random data");
            found.insert(neighbor_sets(c, &x, &tie).total());
        }
        found
    });
    examined += budget.random_samples;

    observed.extend(grid_found.into_iter().flatten());
    observed.extend(continuous_found.into_iter().flatten());
    Ok(NearTotalsReport {
        n,
        coefficient: c,
        observed,
        matrices_examined: examined,
        exhaustive_grid: exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(rows: &[[f64; 3]]) -> DistanceMatrix {
        DistanceMatrix::from_rows(rows).unwrap()
    }

    fn sets(s: &NeighborSets) -> Vec<Vec<usize>> {
        s.sets().to_vec()
    }

    #[test]
    fn collinear_rows_from_ex3() {
        let c = 2.5;
        let m = d(&[[0.0, 2.0 * c, 3.0 * c], [2.0 * c, 0.0, c], [3.0 * c, c, 0.0]]);
        let s = nearest_sets(&m, &TiePolicy::default());
        assert_eq!(sets(&s), vec![vec![1], vec![2], vec![1]]);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn all_rows_equal() {
        let s = nearest_sets(&d(&[[0.0; 3]; 3]), &TiePolicy::default());
        assert_eq!(sets(&s), vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
        assert_eq!(near_total(&s), 6);
    }

    #[test]
    fn middle_row_ties() {
        let s = nearest_sets(
            &d(&[[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]),
            &TiePolicy::default(),
        );
        assert_eq!(sets(&s), vec![vec![1], vec![0, 2], vec![1]]);
        assert_eq!(s.total(), 4);
    }

    #[test]
    fn ex6_positions() {
        let s = nearest_sets(
            &d(&[[0.0, 3.0, 1.0], [3.0, 0.0, 4.0], [1.0, 4.0, 0.0]]),
            &TiePolicy::default(),
        );
        assert_eq!(sets(&s), vec![vec![2], vec![0], vec![0]]);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn single_row_has_no_neighbor() {
        let s = nearest_sets(&DistanceMatrix::from_rows(&[[0.0]]).unwrap(), &TiePolicy::default());
        assert_eq!(s.total(), 0);
        assert!(s.set(0).is_empty());
    }

    #[test]
    fn smallest_positive_rule() {
        let tie = TiePolicy::default().with_duplicates(DuplicateRule::SmallestPositive);
        let s = nearest_sets(&d(&[[0.0; 3]; 3]), &tie);
        assert_eq!(s.total(), 0);
        let m = d(&[[0.0, 0.0, 2.0], [0.0, 0.0, 1.0], [2.0, 1.0, 0.0]]);
        assert_eq!(sets(&nearest_sets(&m, &tie)), vec![vec![2], vec![2], vec![1]]);
        assert_eq!(
            sets(&nearest_sets(&m, &TiePolicy::default())),
            vec![vec![1], vec![0], vec![1]]
        );
    }

    #[test]
    fn tolerances() {
        let m = d(&[[0.0, 1.0, 1.0 + 1e-12], [1.0, 0.0, 5.0], [1.0 + 1e-12, 5.0, 0.0]]);
        assert_eq!(nearest_sets(&m, &TiePolicy::default()).set(0), &[1, 2]);
        assert_eq!(nearest_sets(&m, &TiePolicy::exact()).set(0), &[1]);
        let wide = TiePolicy::new(0.0, 0.5).unwrap();
        let m2 = d(&[[0.0, 1.0, 1.4], [1.0, 0.0, 5.0], [1.4, 5.0, 0.0]]);
        assert_eq!(nearest_sets(&m2, &wide).set(0), &[1, 2]);
        assert!(TiePolicy::new(-1.0, 0.0).is_err());
        assert!(TiePolicy::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn near_tie_chain_is_reported_not_hidden() {
        let m = d(&[
            [0.0, 1.0, 1.0 + 0.8e-9],
            [1.0, 0.0, 1.0 + 1.6e-9],
            [1.0 + 0.8e-9, 1.0 + 1.6e-9, 0.0],
        ]);
        let s = nearest_sets(&m, &TiePolicy::default());
        assert_eq!(s.total(), 5);
        assert!(s.check_bounds().is_err());
        assert_eq!(nearest_sets(&m, &TiePolicy::exact()).total(), 3);
    }

    #[test]
    fn bounds_check_rejects_forbidden_total() {
        // n = 3: total 5 = n(n-1) - 1 cannot come from a symmetric matrix.
        let s = NeighborSets::from_sets(vec![vec![1, 2], vec![0, 2], vec![0]]).unwrap();
        assert!(s.check_bounds().is_err());
        let ok = NeighborSets::from_sets(vec![vec![1, 2], vec![0, 2], vec![0, 1]]).unwrap();
        assert!(ok.check_bounds().is_ok());
        assert!(NeighborSets::from_sets(vec![vec![0]]).is_err());
    }

    #[test]
    fn overlap_and_relabel() {
        let a = NeighborSets::from_sets(vec![vec![1, 2], vec![0], vec![0]]).unwrap();
        let b = NeighborSets::from_sets(vec![vec![2], vec![2], vec![1]]).unwrap();
        assert_eq!(a.overlap(&b, 0), 1);
        assert_eq!(a.overlap(&b, 1), 0);
        let r = a.relabel(&[2, 0, 1]).unwrap();
        // new row 0 is old row 2 whose neighbor old 0 is now index 1.
        assert_eq!(r.sets(), &[vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn json_is_one_based() {
        let s = NeighborSets::from_sets(vec![vec![2], vec![0], vec![0]]).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"sets":[[3],[1],[1]],"total":3}"#
        );
    }

    #[test]
    fn exact_matches_brute_force_on_grid() {
        // L1 rectangle with sides 2 and 1: each vertex pairs with its short side.
        let x = RationalMatrix::from_integer_rows(&[vec![0, 0], vec![2, 0], vec![2, 1], vec![0, 1]]).unwrap();
        let d = RationalDistanceMatrix::build(Coefficient::MANHATTAN, &x).unwrap();
        assert_eq!(nearest_sets_exact(&d).sets(), &[vec![3], vec![2], vec![1], vec![0]]);

        // Integer data under N_1 is exact in f64 too, so the zero-tolerance
        // float path must agree with the rational path everywhere.
        for code in 0..3u32.pow(6) {
            let mut rest = code;
            let rows: Vec<Vec<i64>> = (0..3)
                .map(|_| {
                    (0..2)
                        .map(|_| {
                            let v = (rest % 3) as i64;
                            rest /= 3;
                            v
                        })
                        .collect()
                })
                .collect();
            let exact = nearest_sets_exact(
                &RationalDistanceMatrix::build(Coefficient::MANHATTAN, &RationalMatrix::from_integer_rows(&rows).unwrap()).unwrap(),
            );
            let floats: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let x = DataMatrix::from_rows(&floats).unwrap();
            assert_eq!(neighbor_sets(Coefficient::MANHATTAN, &x, &TiePolicy::exact()), exact);
        }
    }

    #[test]
    fn search_small_cases() {
        let budget = SearchBudget {
            cols: 1,
            levels: 4,
            ..SearchBudget::default()
        };
        let two = achievable_near_totals(2, Coefficient::EUCLIDEAN, &budget, 1).unwrap();
        assert_eq!(two.observed, BTreeSet::from([2]));
        assert!(achievable_near_totals(1, Coefficient::EUCLIDEAN, &budget, 1).is_err());
    }
}
