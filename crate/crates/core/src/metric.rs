//! Explicit finite metrics and the [`Metric`] abstraction shared by all solvers.

use crate::error::{Error, Result};

/// A finite metric space on vertices `0..size()`.
pub trait Metric {
    fn size(&self) -> usize;
    fn dist(&self, a: usize, b: usize) -> i64;
}

/// A metric given as an explicit symmetric cost matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricInstance {
    cost: Vec<Vec<i64>>,
}

impl MetricInstance {
    /// Validates symmetry, zero diagonal, non-negativity, even size and the
    /// triangle inequality.
    pub fn new(cost: Vec<Vec<i64>>) -> Result<Self> {
        let n = cost.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::OddOrEmpty(n));
        }
        validate_matrix(&cost)?;
        Ok(Self { cost })
    }

    /// Builds the distance matrix of points on the line. Coincident points
    /// are allowed here, so the result is a pseudo-metric in general.
    pub fn from_line_coords(coords: &[i64]) -> Result<Self> {
        let cost = coords
            .iter()
            .map(|&a| coords.iter().map(|&b| (a - b).abs()).collect())
            .collect();
        Self::new(cost)
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.cost
    }

    /// Extends the metric with new vertices. Each row gives the distances
    /// from one new vertex to all `n + rows.len()` vertices of the extended
    /// space; the combined matrix is re-validated.
    pub fn extend(&self, rows: &[Vec<i64>]) -> Result<Self> {
        if rows.is_empty() || !rows.len().is_multiple_of(2) {
            return Err(Error::BadArrivals(rows.len()));
        }
        let total = self.n() + rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != total {
                return Err(Error::NotSquare { row: self.n() + r });
            }
        }
        let mut cost: Vec<Vec<i64>> = self
            .cost
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut row = row.clone();
                row.extend(rows.iter().map(|new| new[i]));
                row
            })
            .collect();
        cost.extend(rows.iter().cloned());
        Self::new(cost)
    }
}

impl Metric for MetricInstance {
    fn size(&self) -> usize {
        self.cost.len()
    }

    fn dist(&self, a: usize, b: usize) -> i64 {
        self.cost[a][b]
    }
}

#[allow(clippy::needless_range_loop)]
fn validate_matrix(cost: &[Vec<i64>]) -> Result<()> {
    let n = cost.len();
    for (i, row) in cost.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare { row: i });
        }
    }
    for i in 0..n {
        if cost[i][i] != 0 {
            return Err(Error::BadCost { row: i, col: i, reason: "diagonal must be zero" });
        }
        for j in 0..n {
            if cost[i][j] < 0 {
                return Err(Error::BadCost { row: i, col: j, reason: "negative cost" });
            }
            if cost[i][j] != cost[j][i] {
                return Err(Error::BadCost { row: i, col: j, reason: "matrix is not symmetric" });
            }
        }
    }
    for b in 0..n {
        for a in 0..n {
            let ab = cost[a][b];
            for c in 0..n {
                if cost[a][c] > ab + cost[b][c] {
                    return Err(Error::Triangle { a, b, c });
                }
            }
        }
    }
    Ok(())
}
