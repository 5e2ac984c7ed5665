//! Minimum-cost assignment (Hungarian method with potentials), O(n²·m).

use crate::scalar::Cost;

/// Optimal assignment of rows to columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<C> {
    /// Column assigned to each row; `None` only when there are more rows than columns.
    pub row_to_col: Vec<Option<usize>>,
    pub total_cost: C,
}

/// Solves the rectangular assignment problem for `costs[row][col]`.
///
/// Every row is matched when `rows <= cols`, every column otherwise. All rows
/// must have the same length.
pub fn solve<C: Cost>(costs: &[Vec<C>]) -> Assignment<C> {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    assert!(costs.iter().all(|r| r.len() == cols), "ragged cost matrix");
    if rows == 0 || cols == 0 {
        return Assignment {
            row_to_col: vec![None; rows],
            total_cost: C::zero(),
        };
    }
    if rows <= cols {
        let matched = solve_wide(rows, cols, |r, c| costs[r][c]);
        let total_cost = sum_cost(costs, matched.iter().enumerate().map(|(r, &c)| (r, c)));
        Assignment {
            row_to_col: matched.into_iter().map(Some).collect(),
            total_cost,
        }
    } else {
        let col_to_row = solve_wide(cols, rows, |c, r| costs[r][c]);
        let mut row_to_col = vec![None; rows];
        for (c, &r) in col_to_row.iter().enumerate() {
            row_to_col[r] = Some(c);
        }
        let total_cost = sum_cost(costs, col_to_row.iter().enumerate().map(|(c, &r)| (r, c)));
        Assignment {
            row_to_col,
            total_cost,
        }
    }
}

fn sum_cost<C: Cost>(costs: &[Vec<C>], pairs: impl Iterator<Item = (usize, usize)>) -> C {
    pairs.fold(C::zero(), |acc, (r, c)| acc + costs[r][c])
}

/// Shortest augmenting path version for `n <= m`; returns the column of each row.
fn solve_wide<C: Cost>(n: usize, m: usize, cost: impl Fn(usize, usize) -> C) -> Vec<usize> {
    let inf = C::max_value();
    // 1-based with a virtual column 0, as in the classical formulation.
    let mut u = vec![C::zero(); n + 1];
    let mut v = vec![C::zero(); m + 1];
    let mut col_owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_owner[j]] = u[col_owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if col_owner[j] != 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}
