//! Exact minimum-cost assignment.
//!
//! Shortest augmenting path with dual potentials, O(n³) on the square
//! padded matrix. Among optimal assignments the lexicographically smallest
//! one is returned (columns of row 0, then row 1, ...; transposed when there
//! are more rows than columns).

use serde::{Deserialize, Serialize};

use super::MatchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Square solve. Returns the column of each row and the row/column potentials.
fn solve_square(cost: &[f64], n: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based potentials, index 0 is the virtual source column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Rectangular `rows × cols` (rows <= cols) via padding; optimum total.
fn optimum(cost: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (Vec<usize>, f64, Vec<f64>, Vec<f64>) {
    let n = cols.len();
    if rows.is_empty() {
        return (Vec::new(), 0.0, Vec::new(), Vec::new());
    }
    let max = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| cost[r][c]))
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = max + 1.0;
    let mut square = vec![pad; n * n];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            square[i * n + j] = cost[r][c];
        }
    }
    let (assign, u, v) = solve_square(&square, n);
    let assign: Vec<usize> = assign[..rows.len()].to_vec();
    let total = assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[rows[i]][cols[j]])
        .sum();
    (assign, total, u, v)
}

/// Minimum-cost injective assignment over `min(R, C)` pairs.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Assignment, MatchError> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if cost.iter().any(|r| r.len() != cols) {
        return Err(MatchError::Ragged);
    }
    if cost.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MatchError::NonFinite);
    }
    if rows == 0 || cols == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total: 0.0,
        });
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols)
            .map(|c| (0..rows).map(|r| cost[r][c]).collect())
            .collect();
        let t = solve_lexicographic(&transposed);
        let mut pairs: Vec<(usize, usize)> = t.pairs.into_iter().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        return Ok(Assignment {
            pairs,
            total: t.total,
        });
    }
    Ok(solve_lexicographic(cost))
}

/// rows <= cols. Fixes rows in order to the smallest column that still
/// admits an optimal completion.
fn solve_lexicographic(cost: &[Vec<f64>]) -> Assignment {
    let rows = cost.len();
    let cols = cost[0].len();
    let all_rows: Vec<usize> = (0..rows).collect();
    let all_cols: Vec<usize> = (0..cols).collect();
    let (first, best, u, v) = optimum(cost, &all_rows, &all_cols);
    let scale = cost
        .iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * scale * rows as f64;

    let mut pairs = Vec::with_capacity(rows);
    let mut fixed_total = 0.0;
    let mut free_cols: Vec<usize> = all_cols.clone();
    for i in 0..rows {
        let rest_rows: Vec<usize> = (i + 1..rows).collect();
        let mut chosen = None;
        for &j in &free_cols {
            // only zero reduced-cost edges can be part of an optimum
            if cost[i][j] - u[i] - v[j] > tol {
                continue;
            }
            if first[i] == j && pairs.iter().enumerate().all(|(k, &(_, c))| first[k] == c) {
                chosen = Some(j);
                break;
            }
            let rest_cols: Vec<usize> = free_cols.iter().copied().filter(|&c| c != j).collect();
            let (_, sub, _, _) = optimum(cost, &rest_rows, &rest_cols);
            if fixed_total + cost[i][j] + sub <= best + tol {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.unwrap_or(first[i]);
        fixed_total += cost[i][j];
        pairs.push((i, j));
        free_cols.retain(|&c| c != j);
    }
    Assignment {
        pairs,
        total: fixed_total,
    }
}
