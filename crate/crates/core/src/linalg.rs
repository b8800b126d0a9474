//! Dense solves and a spectral-radius estimate, sized for the small routing
//! matrices this crate works with (tens of nodes).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    Singular { pivot: f64, column: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Relative pivot tolerance for declaring a matrix singular, scaled by the
/// matrix infinity norm.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Solves `A x = b` by LU decomposition with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "expected square {n}x{n} system with matching rhs"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let inf_norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let pivot_floor = SINGULARITY_TOLERANCE * inf_norm.max(f64::MIN_POSITIVE);

    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut x: Vec<f64> = b.to_vec();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lu[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty pivot search");
        if pivot_abs <= pivot_floor {
            return Err(LinalgError::Singular {
                pivot: pivot_abs,
                column: col,
            });
        }
        if pivot_row != col {
            lu.swap(pivot_row, col);
            x.swap(pivot_row, col);
        }
        let (pivot_rows, elim_rows) = lu.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let pivot = pivot_row[col];
        for (offset, row) in elim_rows.iter_mut().enumerate() {
            let factor = row[col] / pivot;
            if factor == 0.0 {
                continue;
            }
            row[col] = 0.0;
            for (cell, above) in row[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                *cell -= factor * above;
            }
            x[col + 1 + offset] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let mut acc = x[row];
        for k in row + 1..n {
            acc -= lu[row][k] * x[k];
        }
        x[row] = acc / lu[row][row];
    }
    Ok(x)
}

/// Power-iteration estimate of the spectral radius of a nonnegative matrix.
///
/// Normalized iteration with the growth ratio averaged geometrically over the
/// trailing iterations, which also handles periodic structure where the raw
/// ratio oscillates. Returns 0 for nilpotent matrices (the iterate hits the
/// zero vector).
pub fn spectral_radius(p: &[Vec<f64>], iterations: usize, tol: f64) -> f64 {
    let n = p.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0f64; n];
    let mut ratios: Vec<f64> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut w = vec![0.0f64; n];
        for (row, wi) in w.iter_mut().enumerate() {
            let mut acc = 0.0;
            for col in 0..n {
                acc += p[row][col] * v[col];
            }
            *wi = acc;
        }
        let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            return 0.0;
        }
        ratios.push(norm);
        for wi in &mut w {
            *wi /= norm;
        }
        v = w;
        if ratios.len() >= 2 {
            let k = ratios.len();
            if (ratios[k - 1] - ratios[k - 2]).abs() <= tol * ratios[k - 1].max(1e-300) {
                return ratios[k - 1];
            }
        }
    }
    // No pointwise convergence (e.g. periodic chains): geometric mean of the
    // trailing half of the growth ratios.
    let tail = &ratios[ratios.len() / 2..];
    (tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_known_system() {
        let a = vec![
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ];
        let b = vec![8.0, -11.0, -3.0];
        let x = solve(&a, &b).unwrap();
        let expected = [2.0, 3.0, -1.0];
        for (xi, ei) in x.iter().zip(expected) {
            assert!((xi - ei).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = solve(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn reports_singularity() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            solve(&a, &[1.0, 2.0]),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let a = vec![vec![1.0, 2.0]];
        assert!(matches!(
            solve(&a, &[1.0]),
            Err(LinalgError::Dimension(_))
        ));
    }

    #[test]
    fn spectral_radius_of_identity_is_one() {
        let p = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((spectral_radius(&p, 200, 1e-10) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_radius_of_nilpotent_routing_is_zero() {
        // Transport feeds the base and nothing cycles.
        let p = vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ];
        assert_eq!(spectral_radius(&p, 200, 1e-10), 0.0);
    }

    #[test]
    fn spectral_radius_of_periodic_chain() {
        // Two-cycle with total gain 0.9 per round trip: radius sqrt(0.9).
        let p = vec![vec![0.0, 1.0], vec![0.9, 0.0]];
        let r = spectral_radius(&p, 200, 1e-10);
        assert!((r - 0.9f64.sqrt()).abs() < 1e-6, "{r}");
    }

    #[test]
    fn spectral_radius_of_scaled_identity() {
        let p = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert!((spectral_radius(&p, 200, 1e-10) - 0.5).abs() < 1e-9);
    }
}
