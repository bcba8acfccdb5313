//! Plane-wave-pump phase mismatch, spectral biphoton amplitude and the
//! quadratic (paraxial, second-order dispersion) parameters.

use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;
use num_complex::Complex64;

use crate::biphoton::SimGrid;
use crate::dispersion::{kz_from, CrystalSpec, FieldRole};
use crate::error::{Error, Result};

/// Gain above which the first-order (low-gain) amplitude is questionable.
pub const LOW_GAIN_LIMIT: f64 = 0.1;

/// Default parametric gain.
pub const DEFAULT_GAIN: f64 = 1e-3;

/// Unnormalized sinc, sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Parameters of the quadratic expansion `Δ0 + ω²/Ω0² − q²/q0²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticParams {
    /// Collinear mismatch at degeneracy times l_c (dimensionless).
    pub delta0: f64,
    /// rad/s
    pub omega0: f64,
    /// rad/m
    pub q0: f64,
    pub gain: f64,
}

impl QuadraticParams {
    /// Quadratic approximation of Δ_pw·l_c.
    pub fn mismatch(&self, q: f64, omega: f64) -> f64 {
        self.delta0 + (omega / self.omega0).powi(2) - (q / self.q0).powi(2)
    }

    /// Asymptote slope q0/Ω0 of the X (s/m).
    pub fn asymptote_slope(&self) -> f64 {
        self.q0 / self.omega0
    }

    pub fn with_delta0(self, delta0: f64) -> Self {
        QuadraticParams { delta0, ..self }
    }
}

/// Exact mismatch Δ_pw(q, ω) = k_sz(q, ω) + k_sz(q, −ω) − k_p in rad/m.
pub fn delta_pw(crystal: &CrystalSpec, q: f64, omega: f64) -> Result<f64> {
    let kp = crystal.wave_number(FieldRole::PumpExtraordinary, 0.0)?;
    let a = crystal.kz(FieldRole::SignalOrdinary, q, omega)?;
    let b = crystal.kz(FieldRole::SignalOrdinary, q, -omega)?;
    Ok(a + b - kp)
}

/// g·e^{iΔl/2}·sinc(Δl/2) for a dimensionless mismatch Δl = Δ_pw·l_c.
pub fn amplitude_from_mismatch(gain: f64, mismatch: f64) -> Complex64 {
    let half = 0.5 * mismatch;
    Complex64::from_polar(gain * sinc(half), half)
}

/// Spectral biphoton amplitude V(q, ω).
pub fn spectral_amplitude(crystal: &CrystalSpec, gain: f64, q: f64, omega: f64) -> Result<Complex64> {
    let d = delta_pw(crystal, q, omega)?;
    Ok(amplitude_from_mismatch(gain, d * crystal.length()))
}

pub fn quadratic_params(crystal: &CrystalSpec, gain: f64) -> Result<QuadraticParams> {
    if !(gain >= 0.0 && gain.is_finite()) {
        return Err(Error::invalid("gain", format!("must be non-negative, got {gain}")));
    }
    if gain > LOW_GAIN_LIMIT {
        log::warn!("gain {gain} exceeds {LOW_GAIN_LIMIT}; first-order amplitude assumes g << 1");
    }
    let ctx = crystal.wave_context()?;
    let l = crystal.length();
    Ok(QuadraticParams {
        delta0: (2.0 * ctx.k_signal - ctx.k_pump) * l,
        omega0: (1.0 / (ctx.gvd_signal * l)).sqrt(),
        q0: (ctx.k_signal / l).sqrt(),
        gain,
    })
}

/// Collinear degenerate mismatch Δ0(θ) = (2k_s − k_p(θ))·l_c.
pub fn collinear_mismatch(crystal: &CrystalSpec, theta: f64) -> Result<f64> {
    let c = crystal.with_cut_angle(theta)?;
    let ks = c.wave_number(FieldRole::SignalOrdinary, 0.0)?;
    let kp = c.wave_number(FieldRole::PumpExtraordinary, 0.0)?;
    Ok((2.0 * ks - kp) * c.length())
}

/// Cut angle at which Δ0 = 0, by bisection to |Δ0| < 1e−6.
pub fn degeneracy_angle(crystal: &CrystalSpec) -> Result<f64> {
    degeneracy_angle_with_tolerance(crystal, 1e-6)
}

pub fn degeneracy_angle_with_tolerance(crystal: &CrystalSpec, tol: f64) -> Result<f64> {
    const SCAN: usize = 180;
    let f = |t: f64| collinear_mismatch(crystal, t);
    // bracket by scanning the open interval
    let eps = 1e-6;
    let mut lo = eps;
    let mut flo = f(lo)?;
    let mut bracket = None;
    for i in 1..=SCAN {
        let hi = eps + (FRAC_PI_2 - 2.0 * eps) * i as f64 / SCAN as f64;
        let fhi = f(hi)?;
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo.signum() != fhi.signum() {
            bracket = Some((lo, hi, flo));
            break;
        }
        lo = hi;
        flo = fhi;
    }
    let (mut a, mut b, mut fa) = bracket.ok_or(Error::NoPhaseMatching)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.abs() < tol || (b - a) < 1e-15 {
            if fm.abs() >= tol {
                return Err(Error::Convergence {
                    what: "degeneracy angle bisection",
                    achieved: fm.abs(),
                    requested: tol,
                });
            }
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Err(Error::Convergence {
        what: "degeneracy angle bisection",
        achieved: (b - a),
        requested: tol,
    })
}

/// Δ_pw·l_c sampled on a grid; evanescent nodes are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchField {
    /// `values[[i, j]]` = Δ_pw(q_i, ω_j)·l_c; NaN where masked.
    pub values: Array2<f64>,
    pub propagating: Array2<bool>,
}

impl MismatchField {
    /// `offset` is added to every node (dimensionless); use it to override Δ0.
    pub fn compute(crystal: &CrystalSpec, grid: &SimGrid, offset: f64) -> Result<Self> {
        let omegas = grid.omega_nodes();
        let qs = grid.q_nodes();
        let kp = crystal.wave_number(FieldRole::PumpExtraordinary, 0.0)?;
        let k_plus: Vec<f64> = omegas
            .iter()
            .map(|&w| crystal.wave_number(FieldRole::SignalOrdinary, w))
            .collect::<Result<_>>()?;
        let l = crystal.length();
        let (nq, nw) = (qs.len(), omegas.len());
        let mut values = Array2::from_elem((nq, nw), f64::NAN);
        let mut propagating = Array2::from_elem((nq, nw), false);
        for j in 0..nw {
            let ka = k_plus[j];
            let kb = k_plus[nw - 1 - j];
            for (i, &q) in qs.iter().enumerate() {
                if let (Ok(a), Ok(b)) = (kz_from(ka, q), kz_from(kb, q)) {
                    values[[i, j]] = (a + b - kp) * l + offset;
                    propagating[[i, j]] = true;
                }
            }
        }
        Ok(MismatchField { values, propagating })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::bbo;
    use std::f64::consts::PI;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-15);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
        assert!((sinc(0.5) - 0.5f64.sin() / 0.5).abs() < 1e-16);
    }

    #[test]
    fn amplitude_special_points() {
        assert_eq!(amplitude_from_mismatch(1e-3, 0.0), Complex64::new(1e-3, 0.0));
        assert!(amplitude_from_mismatch(1e-3, 2.0 * PI).norm() < 1e-18);
        for d in [-7.0, -1.0, 0.3, 4.0, 25.0] {
            assert!(amplitude_from_mismatch(1e-3, d).norm() <= 1e-3);
        }
    }

    #[test]
    fn mismatch_is_even_in_omega() {
        let c = bbo();
        let ws = c.signal_frequency();
        for &(q, w) in &[(0.0, 0.1), (2e5, 0.05), (8e5, 0.3), (1.2e6, 0.2)] {
            let a = delta_pw(&c, q, w * ws).unwrap();
            let b = delta_pw(&c, q, -w * ws).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mismatch_decreases_with_q() {
        let c = bbo();
        let w = 0.01 * c.signal_frequency();
        let mut prev = delta_pw(&c, 0.0, w).unwrap();
        for i in 1..20 {
            let d = delta_pw(&c, i as f64 * 2e4, w).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn degeneracy_angle_bbo() {
        let c = bbo();
        let theta = degeneracy_angle(&c).unwrap();
        assert!((theta.to_degrees() - 33.436).abs() < 0.25, "{}", theta.to_degrees());
        let tuned = c.with_cut_angle(theta).unwrap();
        assert!(quadratic_params(&tuned, 1e-3).unwrap().delta0.abs() < 1e-3);
        let lo = collinear_mismatch(&c, theta - 1f64.to_radians()).unwrap();
        let hi = collinear_mismatch(&c, theta + 1f64.to_radians()).unwrap();
        assert!(lo.signum() != hi.signum());
        let finer = degeneracy_angle_with_tolerance(&c, 5e-7).unwrap();
        assert!((finer - theta).abs() < 1e-9);
    }

    #[test]
    fn no_phase_matching_detected() {
        // identical principal indices: no birefringence to offset dispersion
        let o = crate::dispersion::SellmeierSet::new(
            crate::dispersion::SellmeierForm::FourTerm,
            vec![2.7359, 0.01878, 0.01822, 0.0],
            (0.19e-6, 3.5e-6),
        )
        .unwrap();
        let e = crate::dispersion::SellmeierSet::new(
            crate::dispersion::SellmeierForm::FourTerm,
            vec![2.7359, 0.01878, 0.01822, 0.0],
            (0.19e-6, 3.5e-6),
        )
        .unwrap();
        let iso = CrystalSpec::new("iso", o, e, 0.5, 4e-3, 352e-9).unwrap();
        assert_eq!(degeneracy_angle(&iso), Err(Error::NoPhaseMatching));
    }

    #[test]
    fn quadratic_scaling_in_length() {
        let c = bbo();
        let p1 = quadratic_params(&c, 1e-3).unwrap();
        let p2 = quadratic_params(&c.with_length(2.0 * c.length()).unwrap(), 1e-3).unwrap();
        assert!((p1.omega0 / p2.omega0 - 2f64.sqrt()).abs() < 1e-12);
        assert!(p1.q0 > 0.0 && p1.omega0 > 0.0);
    }

    #[test]
    fn quadratic_expansion_residual_small_box() {
        // grid comparison against the exact mismatch, relative to the span
        let c = bbo();
        let p = quadratic_params(&c, 1e-3).unwrap();
        let ws = c.signal_frequency();
        let ks = c.wave_context().unwrap().k_signal;
        let n = 41;
        let mut exact = Vec::new();
        let mut approx = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let q = 0.02 * ks * i as f64 / (n - 1) as f64;
                let w = 0.02 * ws * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
                exact.push(delta_pw(&c, q, w).unwrap() * c.length());
                approx.push(p.mismatch(q, w));
            }
        }
        let lo = exact.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let worst = exact
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst / (hi - lo) <= 0.02, "residual {}", worst / (hi - lo));
    }
}
