//! Quadratic-approximation oracle, hyperbolic diagnostics, peak metrics and
//! plane-wave-pump validity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::biphoton::BiphotonField;
use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::phasematch::QuadraticParams;
use crate::quadrature;

/// H(r, t) = q0²r² − Ω0²t².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicCoord {
    pub h: f64,
}

pub fn hyperbola_level(params: &QuadraticParams, r: f64, t: f64) -> HyperbolicCoord {
    HyperbolicCoord {
        h: (params.q0 * r).powi(2) - (params.omega0 * t).powi(2),
    }
}

/// Options for [`quadratic_psi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticOptions {
    /// |H| below this is clamped to it (sign kept, zero → +floor).
    pub h_floor: f64,
    /// Relative accuracy requested from the u-integral.
    pub rel_tol: f64,
}

impl QuadraticOptions {
    /// Floor `1e−6·(q0·r_max)²` for a field extending to `r_max`.
    pub fn for_extent(params: &QuadraticParams, r_max: f64) -> Self {
        QuadraticOptions {
            h_floor: 1e-6 * (params.q0 * r_max).powi(2),
            ..Default::default()
        }
    }
}

impl Default for QuadraticOptions {
    fn default() -> Self {
        QuadraticOptions {
            h_floor: 1e-8,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPsi {
    pub value: Complex64,
    /// The level actually used (after clamping).
    pub h: f64,
    pub clamped: bool,
    /// Error estimate of the u-integral (absolute, before the prefactor).
    pub error_bound: f64,
}

/// ψ(r, t) of the quadratic model, as a function of H only:
///
/// ```text
/// ψ = g q0² Ω0 / (8 √(π³ i)) ∫₀¹ ds s^{−3/2} e^{iH/(4s)} e^{isΔ0}
/// ```
pub fn quadratic_psi(params: &QuadraticParams, r: f64, t: f64, opts: &QuadraticOptions) -> Result<QuadraticPsi> {
    if !(r.is_finite() && t.is_finite()) {
        return Err(Error::invalid("(r, t)", "must be finite"));
    }
    let level = hyperbola_level(params, r, t).h;
    quadratic_psi_at_level(params, level, opts)
}

/// As [`quadratic_psi`] but addressed by H directly.
pub fn quadratic_psi_at_level(params: &QuadraticParams, level: f64, opts: &QuadraticOptions) -> Result<QuadraticPsi> {
    let (h, clamped) = if level.abs() < opts.h_floor {
        (if level < 0.0 { -opts.h_floor } else { opts.h_floor }, true)
    } else {
        (level, false)
    };
    let (integral, error_bound) = s_integral(h, params.delta0, opts.rel_tol)?;
    let prefactor = params.gain * params.q0 * params.q0 * params.omega0 / (8.0 * PI.powf(1.5))
        * Complex64::from_polar(1.0, -PI / 4.0);
    Ok(QuadraticPsi {
        value: prefactor * integral,
        h,
        clamped,
        error_bound,
    })
}

/// ∫₀¹ ds s^{−3/2} e^{iH/(4s)} e^{isΔ0}, via u = 1/s:
/// ∫₁^∞ du u^{−1/2} e^{iau} e^{iΔ0/u}, a = H/4.
///
/// `[1, U]` goes to adaptive Filon quadrature on octave panels; `(U, ∞)` is
/// summed from the asymptotic integration-by-parts series, with U pushed out
/// until the first omitted term is below half the tolerance.
fn s_integral(h: f64, delta0: f64, rel_tol: f64) -> Result<(Complex64, f64)> {
    let a = 0.25 * h;
    if a == 0.0 {
        return Err(Error::invalid("H", "zero level is singular"));
    }
    // magnitude scale: the Fresnel-like part is ~sqrt(π/|a|)
    let tol = rel_tol * ((PI / a.abs()).sqrt() + 2.0);

    let mut upper = (2000.0 / a.abs()).max(64.0 * delta0.abs()).max(8.0);
    let (tail, tail_bound) = loop {
        let (tail, bound) = oscillatory_tail(a, delta0, upper);
        if bound <= 0.5 * tol {
            break (tail, bound);
        }
        if upper > 1e300 {
            return Err(Error::Convergence {
                what: "quadratic-model tail",
                achieved: bound,
                requested: 0.5 * tol,
            });
        }
        upper *= 4.0;
    };

    let mut breaks = vec![1.0];
    while breaks.last().unwrap() * 2.0 < upper {
        let next = breaks.last().unwrap() * 2.0;
        breaks.push(next);
    }
    breaks.push(upper);
    let envelope = |u: f64| Complex64::from_polar(u.powf(-0.5), delta0 / u);
    let head = quadrature::filon(&envelope, a, &breaks, 0.5 * tol)?;
    Ok((head.value + tail, head.error + tail_bound))
}

/// ∫_U^∞ f(u) e^{iau} du with f = u^{−1/2} e^{iΔ0/u}, by repeated
/// integration by parts: −e^{iaU} Σ_k (−1)^k f^{(k)}(U) / (ia)^{k+1}.
/// Returns the sum and the magnitude of the first omitted term.
fn oscillatory_tail(a: f64, delta0: f64, upper: f64) -> (Complex64, f64) {
    let u = upper;
    let i = Complex64::i();
    let f = Complex64::from_polar(u.powf(-0.5), delta0 / u);
    // log-derivative g = f'/f and its derivatives
    let g0 = Complex64::new(-0.5 / u, 0.0) - i * delta0 / (u * u);
    let g1 = Complex64::new(0.5 / (u * u), 0.0) + i * 2.0 * delta0 / u.powi(3);
    let g2 = Complex64::new(-1.0 / u.powi(3), 0.0) - i * 6.0 * delta0 / u.powi(4);
    let g3 = Complex64::new(3.0 / u.powi(4), 0.0) + i * 24.0 * delta0 / u.powi(5);
    let d1 = f * g0;
    let d2 = f * (g0 * g0 + g1);
    let d3 = f * (g0 * g0 * g0 + 3.0 * g0 * g1 + g2);
    let d4 = f * (g0.powi(4) + 6.0 * g0 * g0 * g1 + 3.0 * g1 * g1 + 4.0 * g0 * g2 + g3);
    let ia = i * a;
    let terms = [f / ia, -d1 / ia.powi(2), d2 / ia.powi(3), -d3 / ia.powi(4)];
    let sum: Complex64 = terms.iter().sum();
    let next = (d4 / ia.powi(5)).norm();
    (-Complex64::from_polar(1.0, a * u) * sum, next)
}

/// Peak width and location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMetrics {
    pub fwhm: f64,
    pub peak_value: f64,
    pub peak_location: f64,
    pub baseline: f64,
}

/// FWHM by linear interpolation of the half-maximum crossings; the baseline
/// is the median of the outer 5% of samples at each window edge.
pub fn fwhm(profile: &[f64], axis: &[f64]) -> Result<PeakMetrics> {
    if profile.len() != axis.len() {
        return Err(Error::GridMismatch(format!(
            "profile has {} samples, axis {}",
            profile.len(),
            axis.len()
        )));
    }
    let n = profile.len();
    if n < 3 {
        return Err(Error::PeakNotResolved);
    }
    let edge = (n / 20).max(1);
    let mut edges: Vec<f64> = profile[..edge]
        .iter()
        .chain(&profile[n - edge..])
        .copied()
        .collect();
    edges.sort_by(|a, b| a.total_cmp(b));
    let baseline = if edges.len() % 2 == 1 {
        edges[edges.len() / 2]
    } else {
        0.5 * (edges[edges.len() / 2 - 1] + edges[edges.len() / 2])
    };
    let (peak_idx, &peak_value) = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if !(peak_value > baseline) {
        return Err(Error::PeakNotResolved);
    }
    let half = baseline + 0.5 * (peak_value - baseline);
    let cross = |a: usize, b: usize| {
        // a above, b below (or equal)
        let (ya, yb) = (profile[a], profile[b]);
        axis[a] + (half - ya) / (yb - ya) * (axis[b] - axis[a])
    };
    let left = (0..peak_idx)
        .rev()
        .find(|&i| profile[i] <= half)
        .map(|i| cross(i + 1, i))
        .ok_or(Error::PeakNotResolved)?;
    let right = (peak_idx + 1..n)
        .find(|&i| profile[i] <= half)
        .map(|i| cross(i - 1, i))
        .ok_or(Error::PeakNotResolved)?;
    Ok(PeakMetrics {
        fwhm: right - left,
        peak_value,
        peak_location: axis[peak_idx],
        baseline,
    })
}

/// Fitted asymptote slopes of the two X branches (s/m).
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    /// Slope of the t > 0 branch.
    pub positive: f64,
    /// Slope magnitude of the t < 0 branch.
    pub negative: f64,
    /// Accepted (r, t) ridge points of each branch.
    pub positive_points: Vec<(f64, f64)>,
    pub negative_points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeOptions {
    /// Ridge maxima below this fraction of max |ψ| are treated as noise.
    pub noise_floor: f64,
    /// Minimum |t| offset of a ridge maximum, in time samples.
    pub min_offset: usize,
    pub min_points: usize,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        RidgeOptions {
            noise_floor: 1e-2,
            min_offset: 2,
            min_points: 3,
        }
    }
}

/// Least-squares slope (through the origin) of the per-radius temporal
/// argmax of |ψ|, over the outer half of the radii where a ridge is seen.
pub fn ridge_slope(field: &BiphotonField, opts: &RidgeOptions) -> Result<RidgeFit> {
    let grid = field.grid();
    let r = grid.r_nodes();
    let t = grid.t_nodes();
    let c = grid.center();
    let mag = field.values().mapv(|v| v.norm());
    let global = mag.iter().cloned().fold(0.0, f64::max);
    if global == 0.0 {
        return Err(Error::RidgeNotDetected("field is identically zero".into()));
    }
    let floor = opts.noise_floor * global;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (n, row) in mag.rows().into_iter().enumerate() {
        let on_axis = row[c];
        let best = |range: &mut dyn Iterator<Item = usize>| {
            range
                .map(|k| (k, row[k]))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
        };
        let (kp, vp) = best(&mut (c + 1..row.len()));
        let (kn, vn) = best(&mut (0..c));
        if vp >= floor && vp > on_axis && kp - c >= opts.min_offset {
            pos.push((r[n], t[kp]));
        }
        if vn >= floor && vn > on_axis && c - kn >= opts.min_offset {
            neg.push((r[n], -t[kn]));
        }
    }
    let fit = |pts: &[(f64, f64)], label: &str| -> Result<(f64, Vec<(f64, f64)>)> {
        if pts.len() < 2 * opts.min_points {
            return Err(Error::RidgeNotDetected(format!(
                "{label} branch: {} ridge points above the noise floor",
                pts.len()
            )));
        }
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        let cut = 0.5 * (lo + hi);
        let outer: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 >= cut).collect();
        if outer.len() < opts.min_points {
            return Err(Error::RidgeNotDetected(format!(
                "{label} branch: only {} points in the outer half",
                outer.len()
            )));
        }
        let num: f64 = outer.iter().map(|(x, y)| x * y).sum();
        let den: f64 = outer.iter().map(|(x, _)| x * x).sum();
        Ok((num / den, outer))
    };
    let (positive, positive_points) = fit(&pos, "t > 0")?;
    let (negative, negative_points) = fit(&neg, "t < 0")?;
    Ok(RidgeFit {
        positive,
        negative,
        positive_points,
        negative_points,
    })
}

/// Default ratio for "much larger than".
pub const PWP_THRESHOLD: f64 = 10.0;

/// Plane-wave-pump validity for a pump of waist `w_p` and duration `τ_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwpReport {
    /// Pump walk-off transverse shift ρ·l_c (m).
    pub walkoff_shift: f64,
    /// Signal–pump group delay |1/v_s − 1/v_p|·l_c (s).
    pub gvm_delay: f64,
    pub pump_waist: f64,
    pub pump_duration: f64,
    pub space_ratio: f64,
    pub time_ratio: f64,
    pub threshold: f64,
    pub space_ok: bool,
    pub time_ok: bool,
}

impl PwpReport {
    pub fn passes(&self) -> bool {
        self.space_ok && self.time_ok
    }
}

pub fn pwp_validity(crystal: &CrystalSpec, pump_waist: f64, pump_duration: f64, threshold: f64) -> Result<PwpReport> {
    if !(pump_waist > 0.0) {
        return Err(Error::invalid("pump_waist", format!("must be positive, got {pump_waist}")));
    }
    if !(pump_duration > 0.0) {
        return Err(Error::invalid(
            "pump_duration",
            format!("must be positive, got {pump_duration}"),
        ));
    }
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold", "must be positive"));
    }
    let walkoff_shift = crystal.walkoff_angle()? * crystal.length();
    let gvm_delay = crystal.group_delay_mismatch()?;
    let space_ratio = pump_waist / walkoff_shift;
    let time_ratio = pump_duration / gvm_delay;
    Ok(PwpReport {
        walkoff_shift,
        gvm_delay,
        pump_waist,
        pump_duration,
        space_ratio,
        time_ratio,
        threshold,
        space_ok: space_ratio >= threshold,
        time_ok: time_ratio >= threshold,
    })
}

/// Pearson correlation coefficient of two equally long samples.
pub fn shape_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::GridMismatch(format!("{} vs {} samples", a.len(), b.len())));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::SimGrid;
    use ndarray::Array2;
    use std::sync::Arc;

    fn params(delta0: f64) -> QuadraticParams {
        QuadraticParams {
            delta0,
            omega0: 5.2e13,
            q0: 6.1e4,
            gain: 1e-3,
        }
    }

    #[test]
    fn hyperbola_basics() {
        let p = params(0.0);
        let r = 40e-6;
        let t = p.q0 / p.omega0 * r;
        assert!(hyperbola_level(&p, r, t).h.abs() < 1e-9);
        assert_eq!(hyperbola_level(&p, 0.0, 3e-14).h, -(p.omega0 * 3e-14).powi(2));
        assert_eq!(hyperbola_level(&p, r, 1e-13), hyperbola_level(&p, r, -1e-13));
        assert_eq!(hyperbola_level(&p, 0.0, 0.0).h, 0.0);
    }

    #[test]
    fn delta0_zero_has_fresnel_form() {
        // ∫₁^∞ u^{-1/2} e^{iau} du = sqrt(π/a) e^{iπ/4} − ∫₀¹ u^{-1/2} e^{iau} du
        for &h in &[40.0, 4.0, -12.0] {
            let (got, _) = s_integral(h, 0.0, 1e-12).unwrap();
            let a: f64 = 0.25 * h;
            let sign = a.signum();
            let full = (PI / a.abs()).sqrt() * Complex64::from_polar(1.0, sign * PI / 4.0);
            // ∫₀¹ u^{-1/2} e^{iau} du = 2 ∫₀¹ e^{iav²} dv, Simpson with 20000 panels
            let m = 20000;
            let mut acc = Complex64::default();
            for k in 0..=m {
                let v = k as f64 / m as f64;
                let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += Complex64::from_polar(w, a * v * v);
            }
            let head = 2.0 * acc / (3.0 * m as f64);
            let exact = full - head;
            assert!((got - exact).norm() < 1e-9 * exact.norm(), "h={h}: {got} vs {exact}");
        }
    }

    #[test]
    fn floor_clamps_level() {
        let p = params(0.0);
        let opts = QuadraticOptions {
            h_floor: 1e-3,
            ..Default::default()
        };
        let v = quadratic_psi_at_level(&p, 0.0, &opts).unwrap();
        assert!(v.clamped);
        assert_eq!(v.h, 1e-3);
        let v = quadratic_psi_at_level(&p, -1e-5, &opts).unwrap();
        assert_eq!(v.h, -1e-3);
        let v = quadratic_psi_at_level(&p, 0.5, &opts).unwrap();
        assert!(!v.clamped);
    }

    #[test]
    fn fwhm_triangle_and_gaussian() {
        let axis: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.01).collect();
        let tri: Vec<f64> = axis.iter().map(|x| (1.0 - x.abs()).max(0.0)).collect();
        let m = fwhm(&tri, &axis).unwrap();
        assert!((m.fwhm - 1.0).abs() < 1e-12);
        assert_eq!(m.peak_location, 0.0);

        let sigma = 1.3;
        let axis: Vec<f64> = (-400..=400).map(|i| i as f64 * sigma / 20.0).collect();
        let g: Vec<f64> = axis.iter().map(|t| (-t * t / (2.0 * sigma * sigma)).exp()).collect();
        let m = fwhm(&g, &axis).unwrap();
        let exact = 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma;
        assert!((m.fwhm / exact - 1.0).abs() < 0.005);
    }

    #[test]
    fn fwhm_rejects_ramp() {
        let axis: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(fwhm(&axis.clone(), &axis), Err(Error::PeakNotResolved));
        let flat = vec![1.0; 10];
        assert_eq!(fwhm(&flat, &axis[..10]), Err(Error::PeakNotResolved));
    }

    #[test]
    fn fwhm_ignores_pedestal() {
        let axis: Vec<f64> = (-300..=300).map(|i| i as f64 * 0.01).collect();
        let p: Vec<f64> = axis.iter().map(|x| 0.2 + (1.0 - x.abs()).max(0.0)).collect();
        let m = fwhm(&p, &axis).unwrap();
        assert!((m.baseline - 0.2).abs() < 1e-12);
        assert!((m.fwhm - 1.0).abs() < 1e-9);
    }

    fn synthetic_x(slope: f64, with_arms: bool) -> BiphotonField {
        let grid = Arc::new(SimGrid::new(128, 2e6, 1025, 2e15).unwrap());
        let r = grid.r_nodes().to_vec();
        let t = grid.t_nodes().to_vec();
        let width = 3.0 * grid.dt();
        let values = Array2::from_shape_fn((r.len(), t.len()), |(n, k)| {
            let central = (-(t[k] / (5.0 * width)).powi(2) - (r[n] / 5e-6).powi(2)).exp();
            let arms = if with_arms {
                let d1 = t[k] - slope * r[n];
                let d2 = t[k] + slope * r[n];
                0.3 * ((-(d1 / width).powi(2)).exp() + (-(d2 / width).powi(2)).exp())
            } else {
                0.0
            };
            num_complex::Complex64::new(central + arms, 0.0)
        });
        BiphotonField::from_values(grid, values).unwrap()
    }

    #[test]
    fn ridge_of_synthetic_x() {
        let slope = 1.1e-9;
        let fit = ridge_slope(&synthetic_x(slope, true), &RidgeOptions::default()).unwrap();
        assert!((fit.positive / slope - 1.0).abs() < 0.01, "{}", fit.positive);
        assert!((fit.negative / slope - 1.0).abs() < 0.01, "{}", fit.negative);
    }

    #[test]
    fn ridge_missing_for_central_peak() {
        let err = ridge_slope(&synthetic_x(1.1e-9, false), &RidgeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::RidgeNotDetected(_)));
    }

    #[test]
    fn pwp_limits() {
        let c = crate::testdata::bbo();
        let rep = pwp_validity(&c, f64::INFINITY, f64::INFINITY, PWP_THRESHOLD).unwrap();
        assert!(rep.passes());
        let rep = pwp_validity(&c, 1.0, 1.0, PWP_THRESHOLD).unwrap();
        let at_shift = pwp_validity(&c, rep.walkoff_shift, 1.0, PWP_THRESHOLD).unwrap();
        assert!(!at_shift.space_ok);
        assert!((at_shift.space_ratio - 1.0).abs() < 1e-12);
        assert!(pwp_validity(&c, -1.0, 1.0, PWP_THRESHOLD).is_err());
    }

    #[test]
    fn correlation_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((shape_correlation(&a, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((shape_correlation(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(shape_correlation(&a, &[1.0]).is_err());
    }
}
