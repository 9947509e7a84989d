//! Sparse matrices and the linear solvers used by the Newton iterations.

mod banded;
mod iterative;
mod sparse;

pub use banded::{bandwidths, BandedLu};
pub use iterative::{cg, gmres, IterInfo};
pub use sparse::{axpy, dot, norm2, CsrMatrix, Triplets};

use crate::error::Result;

/// Symmetry hint for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    SymmetricPositiveDefinite,
    /// Symmetric and usually definite; conjugate gradients are tried first.
    SymmetricIndefinite,
    General,
}

/// Solve `m x = b`, choosing a banded direct factorization when the band is
/// narrow and a preconditioned Krylov method otherwise.
pub fn solve(m: &CsrMatrix, b: &[f64], structure: Structure, rtol: f64) -> Result<Vec<f64>> {
    let n = m.nrows;
    let (kl, ku) = bandwidths(m);
    let band_cost = n as f64 * (kl as f64 + 1.0) * (2.0 * kl as f64 + ku as f64 + 1.0);
    if band_cost <= 4.0e8 {
        return Ok(BandedLu::factor(m)?.solve(b));
    }
    let max_iter = 4 * n.max(500);
    let (x, _) = match structure {
        Structure::SymmetricPositiveDefinite => cg(m, b, None, rtol, max_iter)?,
        Structure::SymmetricIndefinite => match cg(m, b, None, rtol, max_iter) {
            Ok(out) => out,
            Err(_) => gmres(m, b, None, rtol, 60, max_iter)?,
        },
        Structure::General => gmres(m, b, None, rtol, 60, max_iter)?,
    };
    Ok(x)
}
