//! End-to-end runs: crystal + filters + grid → amplitude, profiles, widths,
//! and the bandwidth calibration.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::analytics::{fwhm, PeakMetrics};
use crate::biphoton::{
    integrated_coincidence, on_axis_spectrum, radial_cut, GridSpec, SimGrid, SpectralAmplitude,
    TimeProfile,
};
use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::filters::{apply_angular, apply_spectral, AngularFilter, SpectralFilter};

/// Zero-padding factor for on-axis temporal profiles.
pub const ON_AXIS_OVERSAMPLE: usize = 8;
/// Radial extent and sample count of the t = 0 spatial cut.
pub const SPATIAL_CUT_EXTENT: f64 = 20e-6;
pub const SPATIAL_CUT_SAMPLES: usize = 801;

#[derive(Debug, Clone)]
pub struct Simulation {
    pub crystal: CrystalSpec,
    pub gain: f64,
    pub grid: GridSpec,
    pub spectral: Option<SpectralFilter>,
    pub angular: Option<AngularFilter>,
    /// Constant added to Δ·l_c everywhere.
    pub mismatch_offset: f64,
}

impl Simulation {
    pub fn new(crystal: CrystalSpec, gain: f64) -> Self {
        Simulation {
            crystal,
            gain,
            grid: GridSpec::default(),
            spectral: None,
            angular: None,
            mismatch_offset: 0.0,
        }
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_spectral(mut self, filter: Option<SpectralFilter>) -> Self {
        self.spectral = filter;
        self
    }

    pub fn with_angular(mut self, filter: Option<AngularFilter>) -> Self {
        self.angular = filter;
        self
    }

    pub fn with_mismatch_offset(mut self, offset: f64) -> Self {
        self.mismatch_offset = offset;
        self
    }

    /// Resolve `self.grid`; auto extents follow the spectral filter only.
    pub fn resolve_grid(&self) -> Result<Arc<SimGrid>> {
        Ok(Arc::new(self.grid.resolve(&self.crystal, self.spectral.as_ref())?))
    }

    /// V on `grid` before any filter.
    pub fn raw_amplitude(&self, grid: Arc<SimGrid>) -> Result<SpectralAmplitude> {
        SpectralAmplitude::compute_with_offset(&self.crystal, grid, self.gain, self.mismatch_offset)
    }

    /// Spectral then angular filter, each only if configured.
    pub fn filter(&self, v: &SpectralAmplitude) -> SpectralAmplitude {
        let v = match &self.spectral {
            Some(f) => apply_spectral(v, f),
            None => v.clone(),
        };
        match &self.angular {
            Some(a) => apply_angular(&v, a),
            None => v,
        }
    }

    pub fn amplitude(&self) -> Result<SpectralAmplitude> {
        let grid = self.resolve_grid()?;
        Ok(self.filter(&self.raw_amplitude(grid)?))
    }
}

/// |ψ(0, t)|² on the oversampled time axis.
pub fn on_axis_intensity(v: &SpectralAmplitude) -> (Vec<f64>, Vec<f64>) {
    let profile = crate::biphoton::on_axis_temporal(v, ON_AXIS_OVERSAMPLE);
    let intensity = profile.intensity();
    (profile.times, intensity)
}

pub fn temporal_fwhm(v: &SpectralAmplitude) -> Result<PeakMetrics> {
    let (t, i) = on_axis_intensity(v);
    fwhm(&i, &t)
}

/// |ψ(x, 0)|² along a transverse line through the axis, x ∈ [−extent, extent].
pub fn spatial_profile(v: &SpectralAmplitude, extent: f64, samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples < 3 || !(extent > 0.0) {
        return Err(Error::invalid("spatial cut", "need extent > 0 and at least 3 samples"));
    }
    let half = samples / 2;
    let radii: Vec<f64> = (0..=half).map(|i| extent * i as f64 / half as f64).collect();
    let cut = radial_cut(v, 0.0, &radii)?;
    let mut x = Vec::with_capacity(2 * half + 1);
    let mut y = Vec::with_capacity(2 * half + 1);
    for i in (1..=half).rev() {
        x.push(-radii[i]);
        y.push(cut[i].norm_sqr());
    }
    for i in 0..=half {
        x.push(radii[i]);
        y.push(cut[i].norm_sqr());
    }
    Ok((x, y))
}

pub fn spatial_fwhm(v: &SpectralAmplitude) -> Result<PeakMetrics> {
    let (x, y) = spatial_profile(v, SPATIAL_CUT_EXTENT, SPATIAL_CUT_SAMPLES)?;
    fwhm(&y, &x)
}

/// FWHM of the position-integrated coincidence from a near field.
pub fn integrated_fwhm(psi: &crate::biphoton::BiphotonField) -> Result<PeakMetrics> {
    let i = integrated_coincidence(psi);
    fwhm(&i, psi.grid().t_nodes())
}

/// Fitted spectral-filter bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub bandwidth: f64,
    pub fwhm: f64,
    pub evaluations: usize,
}

/// Bisection (in log Ω_f) for the bandwidth at which the on-axis |ψ(0,t)|²
/// FWHM equals `target`. `v` must be unfiltered; only its on-axis spectrum
/// is used, since the spectral filter does not depend on q.
pub fn calibrate_bandwidth(
    v: &SpectralAmplitude,
    order: u32,
    target: f64,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<Calibration> {
    if !(target > 0.0) {
        return Err(Error::invalid("target", "FWHM target must be positive"));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", format!("need 0 < lo < hi, got ({lo:e}, {hi:e})")));
    }
    let spectrum = on_axis_spectrum(v);
    let d_omega = v.grid().d_omega();
    let omega = v.grid().omega_nodes().to_vec();
    let mut evaluations = 0;
    let mut width = |bandwidth: f64| -> Result<f64> {
        evaluations += 1;
        let f = SpectralFilter::symmetric(order, bandwidth)?;
        let filtered: Vec<_> = spectrum
            .iter()
            .zip(&omega)
            .map(|(s, &w)| s * f.transmission(w))
            .collect();
        let p = crate::biphoton::padded_profile(&filtered, d_omega, ON_AXIS_OVERSAMPLE);
        Ok(fwhm(&p.intensity(), &p.times)?.fwhm)
    };
    // width decreases with bandwidth
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (wa, wb) = (width(lo)?, width(hi)?);
    if !(wa >= target && wb <= target) {
        return Err(Error::Convergence {
            what: "bandwidth bracket",
            achieved: if wa < target { wa } else { wb },
            requested: target,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let w = width(mid.exp())?;
        if (w / target - 1.0).abs() <= rel_tol {
            return Ok(Calibration {
                bandwidth: mid.exp(),
                fwhm: w,
                evaluations,
            });
        }
        if w > target {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let bw = (0.5 * (a + b)).exp();
    let achieved = width(bw)?;
    Err(Error::Convergence {
        what: "bandwidth calibration",
        achieved,
        requested: target,
    })
}

/// Calibrate the spectral-filter bandwidth of `sim` (order from its filter,
/// or the default) on the grid the calibrated run itself resolves to:
/// the fit is repeated if the auto grid moves with the bandwidth.
pub fn calibrate(sim: &Simulation, target: f64, bracket: (f64, f64), rel_tol: f64) -> Result<Calibration> {
    let order = sim.spectral.map(|f| f.order).unwrap_or(crate::filters::DEFAULT_ORDER);
    let mut guess = SpectralFilter::symmetric(order, bracket.1)?;
    let mut grid = Arc::new(sim.grid.resolve(&sim.crystal, Some(&guess))?);
    for _ in 0..4 {
        let raw = sim.raw_amplitude(Arc::clone(&grid))?;
        let cal = calibrate_bandwidth(&raw, order, target, bracket, rel_tol)?;
        guess = SpectralFilter::symmetric(order, cal.bandwidth)?;
        let next = Arc::new(sim.grid.resolve(&sim.crystal, Some(&guess))?);
        if next.same_lattice(&grid) {
            return Ok(cal);
        }
        grid = next;
    }
    Err(Error::Convergence {
        what: "calibration grid",
        achieved: guess.bandwidth,
        requested: target,
    })
}

/// One aperture of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// External cutoff angle (rad); π/2 is all-pass.
    pub alpha_max: f64,
    pub profile: TimeProfile,
    pub metrics: PeakMetrics,
}

/// On-axis temporal profile and width for each aperture, applied to `v`.
pub fn aperture_sweep(
    v: &SpectralAmplitude,
    alphas: &[f64],
    mapping: crate::filters::AngleMapping,
) -> Result<Vec<SweepPoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            let filtered = if alpha >= FRAC_PI_2 {
                v.clone()
            } else {
                apply_angular(v, &AngularFilter::new(alpha, mapping)?)
            };
            let profile = crate::biphoton::on_axis_temporal(&filtered, ON_AXIS_OVERSAMPLE);
            let metrics = fwhm(&profile.intensity(), &profile.times)?;
            Ok(SweepPoint {
                alpha_max: alpha,
                profile,
                metrics,
            })
        })
        .collect()
}
