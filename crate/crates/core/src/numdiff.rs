//! Richardson-extrapolated central differences.

use crate::error::{Error, Result};

const MAX_HALVINGS: usize = 24;

fn extrapolate<F>(base_step: f64, rel_tol: f64, what: &'static str, stencil: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    // central stencils have even error expansions: R = (4 D(h/2) - D(h)) / 3
    let mut h = base_step;
    let mut coarse = stencil(h)?;
    let mut prev: Option<f64> = None;
    let mut last_gap = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        let fine = stencil(h)?;
        let rich = (4.0 * fine - coarse) / 3.0;
        if let Some(p) = prev {
            let scale = rich.abs().max(p.abs());
            last_gap = if scale == 0.0 {
                0.0
            } else {
                (rich - p).abs() / scale
            };
            if last_gap <= rel_tol {
                return Ok(rich);
            }
        }
        prev = Some(rich);
        coarse = fine;
    }
    Err(Error::Convergence {
        what,
        achieved: last_gap,
        requested: rel_tol,
    })
}

/// First derivative of `f` at `x`.
pub(crate) fn first<F>(f: F, x: f64, base_step: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    extrapolate(base_step, rel_tol, "first derivative", |h| {
        Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
    })
}

/// Second derivative of `f` at `x`.
pub(crate) fn second<F>(f: F, x: f64, base_step: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f0 = f(x)?;
    extrapolate(base_step, rel_tol, "second derivative", |h| {
        Ok((f(x + h)? - 2.0 * f0 + f(x - h)?) / (h * h))
    })
}
