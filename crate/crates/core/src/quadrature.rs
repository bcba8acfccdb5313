//! Filon-type quadrature for ∫ f(u) e^{iau} du with smooth (complex) f.
//!
//! On each panel `[c − h, c + h]` f is projected onto Legendre polynomials
//! from its values at Gauss–Legendre nodes, and each term is integrated
//! exactly against the exponential:
//!
//! ```text
//! ∫_{−1}^{1} P_k(x) e^{iωx} dx = 2 i^k j_k(ω)
//! ```
//!
//! with j_k the spherical Bessel functions. The size of the two highest
//! coefficients serves as the panel error estimate; panels are bisected
//! until it is below their share of the tolerance.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const NODES: usize = 16;
const MAX_DEPTH: u32 = 40;

struct Rule {
    nodes: [f64; NODES],
    weights: [f64; NODES],
    /// `legendre[i][k] = (2k+1)/2 · w_i · P_k(x_i)`: projection matrix.
    projection: [[f64; NODES]; NODES],
}

fn legendre_all(x: f64) -> [f64; NODES + 1] {
    let mut p = [0.0; NODES + 1];
    p[0] = 1.0;
    p[1] = x;
    for k in 1..NODES {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES as f64;
        let mut nodes = [0.0; NODES];
        let mut weights = [0.0; NODES];
        for i in 0..NODES {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let p = legendre_all(x);
                let dp = n * (x * p[NODES] - p[NODES - 1]) / (x * x - 1.0);
                let dx = p[NODES] / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let p = legendre_all(x);
            let dp = n * (x * p[NODES] - p[NODES - 1]) / (x * x - 1.0);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        let mut projection = [[0.0; NODES]; NODES];
        for i in 0..NODES {
            let p = legendre_all(nodes[i]);
            for k in 0..NODES {
                projection[i][k] = (2.0 * k as f64 + 1.0) / 2.0 * weights[i] * p[k];
            }
        }
        Rule {
            nodes,
            weights,
            projection,
        }
    })
}

/// j_0(ω) … j_{NODES−1}(ω).
fn spherical_bessel(omega: f64) -> [f64; NODES] {
    let mut j = [0.0; NODES];
    let w = omega.abs();
    if w < 1.0 {
        // j_k(w) = w^k/(2k+1)!! Σ_m (−w²/2)^m / (m! (2k+3)(2k+5)…(2k+2m+1))
        let mut lead = 1.0;
        for (k, jk) in j.iter_mut().enumerate() {
            let kf = k as f64;
            if k > 0 {
                lead *= w / (2.0 * kf + 1.0);
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..30 {
                let mf = m as f64;
                term *= -0.5 * w * w / (mf * (2.0 * kf + 2.0 * mf + 1.0));
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *jk = lead * sum;
        }
    } else if w > NODES as f64 {
        let (s, c) = w.sin_cos();
        j[0] = s / w;
        j[1] = s / (w * w) - c / w;
        for k in 1..NODES - 1 {
            j[k + 1] = (2.0 * k as f64 + 1.0) / w * j[k] - j[k - 1];
        }
    } else {
        // Miller: backward recurrence from far above, normalized by the
        // larger of j_0 and j_1
        let top = NODES + 40;
        let mut next = 0.0;
        let mut cur = 1e-30;
        let mut tmp = [0.0; NODES];
        for k in (1..=top).rev() {
            let prev = (2.0 * k as f64 + 1.0) / w * cur - next;
            next = cur;
            cur = prev;
            if k - 1 < NODES {
                tmp[k - 1] = cur;
            }
            if cur.abs() > 1e250 {
                next *= 1e-250;
                cur *= 1e-250;
                tmp.iter_mut().for_each(|t| *t *= 1e-250);
            }
        }
        let (s, c) = w.sin_cos();
        let j0 = s / w;
        let j1 = s / (w * w) - c / w;
        let scale = if j0.abs() > j1.abs() { j0 / tmp[0] } else { j1 / tmp[1] };
        for k in 0..NODES {
            j[k] = tmp[k] * scale;
        }
    }
    if omega < 0.0 {
        // j_k(−ω) = (−1)^k j_k(ω)
        for (k, jk) in j.iter_mut().enumerate() {
            if k % 2 == 1 {
                *jk = -*jk;
            }
        }
    }
    j
}

/// One panel: value, an error estimate from the trailing coefficients, and
/// the size of ∫|f| for the rounding floor.
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, lo: f64, hi: f64) -> (Complex64, f64, f64) {
    let r = rule();
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    let mut coeffs = [Complex64::default(); NODES];
    for i in 0..NODES {
        let fx = f(c + h * r.nodes[i]);
        for (k, ck) in coeffs.iter_mut().enumerate() {
            *ck += fx * r.projection[i][k];
        }
    }
    let j = spherical_bessel(a * h);
    let mut acc = Complex64::default();
    let mut ik = Complex64::new(1.0, 0.0);
    for k in 0..NODES {
        acc += coeffs[k] * ik * (2.0 * j[k]);
        ik *= Complex64::i();
    }
    let tail = coeffs[NODES - 1].norm() + coeffs[NODES - 2].norm();
    (Complex64::from_polar(h, a * c) * acc, 2.0 * h * tail, 2.0 * h * coeffs[0].norm())
}

/// Result of an adaptive oscillatory integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Sum of accepted local error estimates.
    pub error: f64,
    pub evaluations: usize,
}

fn adapt<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    out: &mut Integral,
) -> Result<()> {
    let (v, e, size) = panel(f, a, lo, hi);
    out.evaluations += NODES;
    // coefficients at rounding level cannot shrink further
    if e <= tol || e <= 64.0 * f64::EPSILON * size {
        out.value += v;
        out.error += e;
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Convergence {
            what: "Filon quadrature",
            achieved: e,
            requested: tol,
        });
    }
    let mid = 0.5 * (lo + hi);
    adapt(f, a, lo, mid, 0.5 * tol, depth + 1, out)?;
    adapt(f, a, mid, hi, 0.5 * tol, depth + 1, out)
}

/// ∫_{lo}^{hi} f(u) e^{iau} du over the given breakpoints, to absolute
/// tolerance `tol` split evenly between the intervals.
pub fn filon<F>(f: &F, a: f64, breakpoints: &[f64], tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::invalid("breakpoints", "need at least two"));
    }
    let share = tol / (breakpoints.len() - 1) as f64;
    let mut out = Integral {
        value: Complex64::default(),
        error: 0.0,
        evaluations: 0,
    };
    for w in breakpoints.windows(2) {
        adapt(f, a, w[0], w[1], share, 0, &mut out)?;
    }
    Ok(out)
}

/// Plain Gauss–Legendre ∫_{lo}^{hi} g(u) du with the same rule.
pub fn gauss_legendre<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> f64 {
    let r = rule();
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    h * r
        .nodes
        .iter()
        .zip(&r.weights)
        .map(|(x, w)| w * g(c + h * x))
        .sum::<f64>()
}
