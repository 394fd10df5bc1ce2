//! Minimum-cost assignment (Hungarian method, shortest-augmenting-path
//! form) and bipartite feasibility matching. Internal helpers for the
//! alignment metrics.

/// Minimum-cost perfect assignment on a square cost matrix.
/// Returns `assignment` with `assignment[row] = col`, plus the total cost.
/// O(n³); costs must be finite.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");
    if n == 0 {
        return (Vec::new(), 0.0);
    }

    // Potentials and matching, 1-indexed with a virtual column 0.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        // Unwind the augmenting path.
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (assignment, total)
}

/// Whether a perfect matching exists in a bipartite graph given as an
/// adjacency matrix (rows → columns). Kuhn's augmenting-path algorithm.
pub fn perfect_matching_exists(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    if n == 0 {
        return true;
    }
    if adj.iter().any(|row| row.len() != n) {
        return false;
    }
    let mut match_col = vec![usize::MAX; n];

    fn try_augment(
        row: usize,
        adj: &[Vec<bool>],
        visited: &mut [bool],
        match_col: &mut [usize],
    ) -> bool {
        for col in 0..adj.len() {
            if adj[row][col] && !visited[col] {
                visited[col] = true;
                if match_col[col] == usize::MAX
                    || try_augment(match_col[col], adj, visited, match_col)
                {
                    match_col[col] = row;
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(row, adj, &mut visited, &mut match_col) {
            return false;
        }
    }
    true
}
