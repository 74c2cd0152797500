//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves a tridiagonal system by forward elimination and back substitution.
///
/// Row `i` reads `lower[i-1]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`,
/// so `lower` and `upper` have `n − 1` entries. No pivoting is done; the
/// systems assembled by the PDE solver are diagonally dominant.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; diag.len()];
    let mut scratch = vec![0.0; diag.len()];
    solve_tridiagonal_into(lower, diag, upper, rhs, &mut scratch, &mut x)?;
    Ok(x)
}

/// Allocation-free form of [`solve_tridiagonal`]; `scratch` and `x` must have
/// length `n`.
pub fn solve_tridiagonal_into(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    scratch: &mut [f64],
    x: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    let off = n.saturating_sub(1);
    for (what, expected, found) in [
        ("sub-diagonal", off, lower.len()),
        ("super-diagonal", off, upper.len()),
        ("right-hand side", n, rhs.len()),
        ("scratch", n, scratch.len()),
        ("solution", n, x.len()),
    ] {
        if expected != found {
            return Err(Error::DimensionMismatch {
                what,
                expected,
                found,
            });
        }
    }
    if n == 0 {
        return Ok(());
    }

    // scratch holds the modified super-diagonal, x the modified rhs.
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::LinearSolveFailure { row: 0 });
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * scratch[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::LinearSolveFailure { row: i });
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
    Ok(())
}
