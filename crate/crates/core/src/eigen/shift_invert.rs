use super::lanczos::{block_lanczos, canonicalize, EigenOptions, Eigenpairs, Which};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, nrm2, SymmetricBand};
use crate::state::LinearOperator;

/// Lowest eigenpairs of a banded symmetric operator by Lanczos on
/// `(A − σ)⁻¹`, with σ placed below the spectrum so the shifted matrix
/// factors by Cholesky.
///
/// `band` must hold the same matrix that `op` applies. Residuals are
/// checked against `op` itself.
pub fn shift_invert_lowest(
    op: &dyn LinearOperator,
    band: &SymmetricBand,
    nev: usize,
    tol: f64,
    start: &[Vec<f64>],
    seed: u64,
) -> Result<Eigenpairs> {
    let n = op.dim();
    if band.dim() != n {
        return Err(Error::Dimension { expected: n, found: band.dim() });
    }
    let (g_lo, _) = band.gershgorin();
    // Estimate the wanted window from the warm start, or from a loose
    // direct solve when there is none.
    let estimate: Vec<f64> = if start.len() >= nev {
        let mut w = vec![0.0; n];
        start
            .iter()
            .map(|v| {
                op.apply(v, &mut w);
                dot(v, &w) / dot(v, v)
            })
            .collect()
    } else {
        let mut o = EigenOptions::lowest(nev, 1e-3);
        o.seed = seed;
        block_lanczos(op, &o, start)?.values
    };
    let lo = estimate.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = estimate.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut margin = 0.05 * (hi - lo) + 1e-3 * (1.0 + lo.abs());
    let mut sigma = lo - margin;
    let mut start: Vec<Vec<f64>> = start.to_vec();
    let mut inv_tol_scale = 0.1;
    let mut refactor = true;
    let mut factor = None;
    let mut total_matvecs = 0;
    let mut last: Vec<f64> = vec![];
    for attempt in 0..12 {
        if refactor {
            let mut shifted = band.clone();
            shifted.shift_diagonal(-sigma);
            match shifted.cholesky() {
                Ok(f) => factor = Some(f),
                Err(_) => {
                    margin *= 2.0;
                    sigma = (lo - margin).max(g_lo - 1.0);
                    if sigma <= g_lo - 1.0 && attempt > 6 {
                        sigma = g_lo - 1.0;
                    }
                    continue;
                }
            }
            refactor = false;
        }
        let f = factor.as_ref().expect("factored");
        // μ ≥ 1/(E_max_wanted − σ); the inner tolerance is only a target,
        // the true residual against `op` decides acceptance.
        let mu_min = 1.0 / (hi - sigma).max(1e-12);
        let mut o = EigenOptions::lowest(nev, (tol * mu_min * inv_tol_scale).max(1e-14 * mu_min));
        o.which = Which::Largest;
        o.block_size = nev.max(2);
        o.seed = seed;
        o.max_restarts = 60;
        o.max_basis = (4 * nev + 24).min(n);
        let p = match block_lanczos(f, &o, &start) {
            Ok(p) => p,
            Err(Error::NoConvergence { .. }) if attempt + 1 < 12 => {
                // Move the shift closer to the spectrum and try again.
                margin *= 0.5;
                sigma = lo - margin;
                refactor = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        total_matvecs += p.matvecs;
        let mut values = Vec::with_capacity(nev);
        let mut residuals = Vec::with_capacity(nev);
        let mut w = vec![0.0; n];
        for (mu, v) in p.values.iter().zip(&p.vectors) {
            let e = sigma + 1.0 / mu;
            op.apply(v, &mut w);
            total_matvecs += 1;
            axpy(-e, v, &mut w);
            values.push(e);
            residuals.push(nrm2(&w));
        }
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst <= tol {
            let mut out = Eigenpairs { values, vectors: p.vectors, residuals, iterations: attempt, matvecs: total_matvecs };
            canonicalize(&mut out, Which::Lowest);
            return Ok(out);
        }
        inv_tol_scale *= (0.5 * tol / worst).min(0.1);
        last = residuals;
        start = p.vectors;
    }
    Err(Error::NoConvergence { iterations: 12, worst: last.iter().cloned().fold(0.0, f64::max), residuals: last })
}
