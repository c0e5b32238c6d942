//! Data matrices, distance matrices, and the row/column manipulations used by
//! the invariance arguments (constant-column augmentation, row removal, row
//! permutation).
//!
//! Indices in this API are 0-based. External formats (CSV/JSON emitted by the
//! CLI) use 1-based indices.

use serde::Serialize;

use crate::coefficients::Coefficient;
use crate::error::{Error, Result};
use crate::exec;

/// An `n × k` real matrix whose rows are the classified objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from row-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape {
                rows,
                cols,
                reason: "need at least one row and one column",
            });
        }
        if data.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                reason: "data length does not match shape",
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(DataMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != k) {
            return Err(Error::Shape {
                rows: n,
                cols: k,
                reason: "rows have differing lengths",
            });
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        DataMatrix::new(n, k, data)
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        DataMatrix::new(values.len(), 1, values.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Appends one constant column per entry of `constants`.
    pub fn augment_constant_columns(&self, constants: &[f64]) -> Result<Self> {
        let cols: Vec<Vec<f64>> = constants.iter().map(|&c| vec![c; self.rows]).collect();
        self.append_columns(&cols)
    }

    /// Appends the given columns (each of length `rows`) on the right.
    pub fn append_columns(&self, columns: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != self.rows) {
            return Err(Error::Shape {
                rows: bad.len(),
                cols: 1,
                reason: "appended column length differs from row count",
            });
        }
        let k = self.cols + columns.len();
        let mut data = Vec::with_capacity(self.rows * k);
        for (i, row) in self.iter_rows().enumerate() {
            data.extend_from_slice(row);
            data.extend(columns.iter().map(|c| c[i]));
        }
        DataMatrix::new(self.rows, k, data)
    }

    pub fn remove_row(&self, i: usize) -> Result<Self> {
        if self.rows < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                got: self.rows,
            });
        }
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.rows,
            });
        }
        let data = self
            .iter_rows()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .flat_map(|(_, row)| row.iter().copied())
            .collect();
        DataMatrix::new(self.rows - 1, self.cols, data)
    }

    pub fn remove_column(&self, j: usize) -> Result<Self> {
        if self.cols < 2 {
            return Err(Error::TooFewColumns {
                needed: 2,
                got: self.cols,
            });
        }
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        let data = self
            .iter_rows()
            .flat_map(|row| {
                row.iter()
                    .enumerate()
                    .filter(move |(c, _)| *c != j)
                    .map(|(_, v)| *v)
            })
            .collect();
        DataMatrix::new(self.rows, self.cols - 1, data)
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rows)?;
        let data = perm
            .iter()
            .flat_map(|&src| self.row(src).iter().copied())
            .collect();
        DataMatrix::new(self.rows, self.cols, data)
    }

    /// Keeps the first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.cols {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.cols,
            });
        }
        let data = self
            .iter_rows()
            .flat_map(|r| r[..k].iter().copied())
            .collect();
        DataMatrix::new(self.rows, k, data)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotPermutation(n));
        }
    }
    Ok(())
}

/// Symmetric, zero-diagonal, nonnegative `n × n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    order: usize,
    #[serde(serialize_with = "serialize_square")]
    entries: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient: Option<Coefficient>,
}

fn serialize_square<S: serde::Serializer>(
    entries: &[f64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let n = (entries.len() as f64).sqrt().round() as usize;
    let mut seq = s.serialize_seq(Some(n))?;
    for row in entries.chunks_exact(n.max(1)) {
        seq.serialize_element(row)?;
    }
    seq.end()
}

impl DistanceMatrix {
    /// `D(c, X)`: entry `(i, j)` is `c(x(j) - x(i))`. Each unordered pair is
    /// evaluated once and mirrored, so symmetry holds bit-for-bit.
    pub fn build(c: Coefficient, x: &DataMatrix) -> Self {
        let upper = exec::map_range(x.rows(), |i| upper_row(c, x, i));
        Self::from_upper_rows(c, x.rows(), upper)
    }

    /// Single-threaded [`build`](Self::build); always produces the same matrix.
    pub fn build_sequential(c: Coefficient, x: &DataMatrix) -> Self {
        let upper = exec::map_range_sequential(x.rows(), |i| upper_row(c, x, i));
        Self::from_upper_rows(c, x.rows(), upper)
    }

    fn from_upper_rows(c: Coefficient, n: usize, upper: Vec<Vec<f64>>) -> Self {
        let mut entries = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (off, d) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix {
            order: n,
            entries,
            coefficient: Some(c),
        }
    }

    /// Wraps an explicit square matrix after checking the distance-matrix
    /// invariants exactly.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape {
                rows: 0,
                cols: 0,
                reason: "empty distance matrix",
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::Shape {
                    rows: n,
                    cols: r.len(),
                    reason: "distance matrix must be square",
                });
            }
            entries.extend_from_slice(r);
        }
        let d = DistanceMatrix {
            order: n,
            entries,
            coefficient: None,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let n = self.order;
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                let ok = if i == j {
                    v == 0.0
                } else {
                    v >= 0.0 && v == self.get(j, i)
                };
                if !ok {
                    return Err(Error::Shape {
                        rows: n,
                        cols: n,
                        reason: "not symmetric, zero-diagonal and nonnegative",
                    });
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn coefficient(&self) -> Option<Coefficient> {
        self.coefficient
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks_exact(self.order)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Strictly-upper-triangle entries in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.order;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| self.get(i, j)))
    }

    /// Multiplies every entry by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be finite and nonnegative, got {s}"
            )));
        }
        Ok(DistanceMatrix {
            order: self.order,
            entries: self.entries.iter().map(|v| v * s).collect(),
            coefficient: None,
        })
    }

    /// Entrywise product `A ∘ B`.
    pub fn hadamard(&self, other: &DistanceMatrix) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(DistanceMatrix {
            order: self.order,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * b)
                .collect(),
            coefficient: None,
        })
    }

    /// The matrix with row and column `i` removed.
    pub fn remove_index(&self, i: usize) -> Result<Self> {
        if self.order < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                got: self.order,
            });
        }
        if i >= self.order {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.order,
            });
        }
        let keep: Vec<usize> = (0..self.order).filter(|&r| r != i).collect();
        Ok(self.select(&keep))
    }

    /// `P D Pᵀ` where row `i` of `P` picks index `perm[i]`.
    pub fn conjugate(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.order)?;
        Ok(self.select(perm))
    }

    fn select(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut entries = Vec::with_capacity(m * m);
        for &a in idx {
            entries.extend(idx.iter().map(|&b| self.get(a, b)));
        }
        DistanceMatrix {
            order: m,
            entries,
            coefficient: self.coefficient,
        }
    }
}

fn upper_row(c: Coefficient, x: &DataMatrix, i: usize) -> Vec<f64> {
    let xi = x.row(i);
    (i + 1..x.rows())
        .map(|j| c.distance(xi, x.row(j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = 1.732_050_807_568_877_2;

    fn ex4() -> DataMatrix {
        DataMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [-1.0, S], [-1.0, -S]]).unwrap()
    }

    fn assert_close(d: &DistanceMatrix, expected: &[&[f64]]) {
        assert_eq!(d.order(), expected.len());
        for (i, row) in expected.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let got = d.get(i, j);
                assert!(
                    (got - e).abs() <= 1e-12 * e.abs(),
                    "({i},{j}): {got} vs {e}"
                );
            }
        }
    }

    #[test]
    fn ex4_euclidean() {
        let d = DistanceMatrix::build(Coefficient::EUCLIDEAN, &ex4());
        let t = 2.0 * S;
        assert_close(
            &d,
            &[
                &[0.0, 2.0, 2.0, 2.0],
                &[2.0, 0.0, t, t],
                &[2.0, t, 0.0, t],
                &[2.0, t, t, 0.0],
            ],
        );
    }

    #[test]
    fn single_row_gives_zero() {
        let x = DataMatrix::from_rows(&[[4.0, -1.0, 2.0]]).unwrap();
        for c in [Coefficient::MANHATTAN, Coefficient::SquaredEuclidean] {
            assert_eq!(DistanceMatrix::build(c, &x).to_rows(), vec![vec![0.0]]);
        }
    }

    #[test]
    fn ex6_matrices() {
        let xp = DataMatrix::from_rows(&[[2.0, 50.0], [5.0, 20.0], [1.0, 10.0]]).unwrap();
        let x = xp.leading_columns(1).unwrap();
        assert_eq!(
            DistanceMatrix::build(Coefficient::MANHATTAN, &x).to_rows(),
            vec![vec![0.0, 3.0, 1.0], vec![3.0, 0.0, 4.0], vec![1.0, 4.0, 0.0]]
        );
        assert_eq!(
            DistanceMatrix::build(Coefficient::CHEBYSHEV, &xp).to_rows(),
            vec![vec![0.0, 30.0, 40.0], vec![30.0, 0.0, 10.0], vec![40.0, 10.0, 0.0]]
        );
    }

    #[test]
    fn augmentation_preserves_distances() {
        let x = DataMatrix::column(&[2.0, 5.0, 1.0]).unwrap();
        let aug = x.augment_constant_columns(&[0.0]).unwrap();
        assert_eq!(aug.cols(), 2);
        assert_eq!(aug.column_values(1), vec![0.0; 3]);
        assert_eq!(
            DistanceMatrix::build(Coefficient::MANHATTAN, &aug),
            DistanceMatrix::build(Coefficient::MANHATTAN, &x)
        );
        assert_eq!(x.augment_constant_columns(&[]).unwrap(), x);

        let x8 = DataMatrix::column(&[1.0, 2.0, 3.0]).unwrap();
        let aug8 = x8.augment_constant_columns(&[7.0, 7.0]).unwrap();
        assert_eq!(aug8.cols(), 3);
        assert_eq!(
            DistanceMatrix::build(Coefficient::EUCLIDEAN, &aug8),
            DistanceMatrix::build(Coefficient::EUCLIDEAN, &x8)
        );
    }

    #[test]
    fn remove_row_matches_ex9() {
        let y = ex4().remove_row(0).unwrap();
        assert_eq!(
            y,
            DataMatrix::from_rows(&[[2.0, 0.0], [-1.0, S], [-1.0, -S]]).unwrap()
        );
        let two = DataMatrix::from_rows(&[[1.0], [3.0]]).unwrap();
        let one = two.remove_row(1).unwrap();
        assert_eq!(one.rows(), 1);
        assert_eq!(
            DistanceMatrix::build(Coefficient::EUCLIDEAN, &one).to_rows(),
            vec![vec![0.0]]
        );
        assert!(matches!(
            one.remove_row(0),
            Err(Error::TooFewRows { .. })
        ));
        assert!(matches!(
            two.remove_row(2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn remove_column_matches_ex7() {
        let z = DataMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap();
        let x = z.remove_column(1).unwrap();
        let y = z.remove_column(0).unwrap();
        let c = Coefficient::p_norm(3.0).unwrap();
        assert_eq!(
            DistanceMatrix::build(c, &x).to_rows(),
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]
        );
        assert_eq!(
            DistanceMatrix::build(c, &y).to_rows(),
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]
        );
        assert!(matches!(
            x.remove_column(0),
            Err(Error::TooFewColumns { .. })
        ));
    }

    #[test]
    fn permute_rows_swaps() {
        let x = DataMatrix::column(&[2.0, 5.0, 1.0]).unwrap();
        assert_eq!(x.permute_rows(&[0, 1, 2]).unwrap(), x);
        let swapped = x.permute_rows(&[1, 0, 2]).unwrap();
        assert_eq!(
            DistanceMatrix::build(Coefficient::MANHATTAN, &swapped).to_rows(),
            vec![vec![0.0, 3.0, 4.0], vec![3.0, 0.0, 1.0], vec![4.0, 1.0, 0.0]]
        );
        assert!(matches!(
            x.permute_rows(&[0, 0, 2]),
            Err(Error::NotPermutation(3))
        ));
        assert!(x.permute_rows(&[0, 1]).is_err());
        assert!(x.permute_rows(&[0, 1, 3]).is_err());
    }

    #[test]
    fn invalid_matrices_rejected() {
        assert!(DataMatrix::new(0, 1, vec![]).is_err());
        assert!(DataMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DataMatrix::new(2, 2, vec![1.0, 2.0, f64::INFINITY, 0.0]),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[[0.0, 1.0], [2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[[1.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]).is_err());
    }

    #[test]
    fn hadamard_checks_order() {
        let a = DistanceMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let b = DistanceMatrix::from_rows(&[[0.0]]).unwrap();
        assert_eq!(a.hadamard(&b), Err(Error::OrderMismatch(2, 1)));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let data: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x = DataMatrix::new(20, 3, data).unwrap();
        for c in [Coefficient::MANHATTAN, Coefficient::CHEBYSHEV] {
            assert_eq!(
                DistanceMatrix::build(c, &x),
                DistanceMatrix::build_sequential(c, &x)
            );
        }
    }
}
