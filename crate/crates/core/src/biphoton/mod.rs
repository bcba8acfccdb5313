//! Spectral amplitude V(q, ω) and its transforms: the near-field biphoton
//! amplitude ψ(r, t), far-field time profiles and integrated coincidences.
//!
//! Conventions (radial symmetry, r = |x|):
//!
//! ```text
//! V(q, t) = ∫ dω/(2π) e^{−iωt} V(q, ω)
//! ψ(r, t) = ∫ q dq/(2π) J₀(qr) V(q, t)
//! ```
//!
//! Matrices are stored row-major with q (or r) along rows and ω (or t)
//! along columns, both ascending.

mod grid;
pub mod hankel;

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

pub use grid::{auto_omega_max, auto_q_max, max_phase_matched_q, GridSpec, SimGrid, DEFAULT_N_OMEGA, DEFAULT_N_Q};

use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::phasematch::{amplitude_from_mismatch, MismatchField};

/// V(q_i, ω_j) on a grid.
#[derive(Debug, Clone)]
pub struct SpectralAmplitude {
    grid: Arc<SimGrid>,
    values: Array2<Complex64>,
    gain: f64,
    carrier: f64,
}

impl SpectralAmplitude {
    /// Evaluate V on every node; evanescent nodes are set to zero.
    pub fn compute(crystal: &CrystalSpec, grid: Arc<SimGrid>, gain: f64) -> Result<Self> {
        Self::compute_with_offset(crystal, grid, gain, 0.0)
    }

    /// As [`compute`](Self::compute) with a constant added to Δ·l_c.
    pub fn compute_with_offset(
        crystal: &CrystalSpec,
        grid: Arc<SimGrid>,
        gain: f64,
        mismatch_offset: f64,
    ) -> Result<Self> {
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(Error::invalid("gain", format!("must be non-negative, got {gain}")));
        }
        let field = MismatchField::compute(crystal, &grid, mismatch_offset)?;
        let values = Array2::from_shape_fn(field.values.dim(), |ix| {
            if field.propagating[ix] {
                amplitude_from_mismatch(gain, field.values[ix])
            } else {
                Complex64::default()
            }
        });
        Ok(SpectralAmplitude {
            grid,
            values,
            gain,
            carrier: crystal.signal_frequency(),
        })
    }

    /// Wrap precomputed values; `carrier` is the degenerate signal frequency.
    pub fn from_values(grid: Arc<SimGrid>, values: Array2<Complex64>, gain: f64, carrier: f64) -> Result<Self> {
        if values.dim() != (grid.n_q(), grid.n_omega()) {
            return Err(Error::GridMismatch(format!(
                "values {:?} on a {}x{} grid",
                values.dim(),
                grid.n_q(),
                grid.n_omega()
            )));
        }
        Ok(SpectralAmplitude {
            grid,
            values,
            gain,
            carrier,
        })
    }

    pub fn grid(&self) -> &Arc<SimGrid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Degenerate signal frequency ω_s (rad/s).
    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub(crate) fn map_values<F>(&self, f: F) -> SpectralAmplitude
    where
        F: Fn((usize, usize), Complex64) -> Complex64,
    {
        let mut values = self.values.clone();
        for (ix, v) in values.indexed_iter_mut() {
            *v = f(ix, *v);
        }
        SpectralAmplitude {
            values,
            ..self.clone_shell()
        }
    }

    fn clone_shell(&self) -> SpectralAmplitude {
        SpectralAmplitude {
            grid: Arc::clone(&self.grid),
            values: Array2::zeros((0, 0)),
            gain: self.gain,
            carrier: self.carrier,
        }
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: Complex64, other: &SpectralAmplitude, b: Complex64) -> Result<Self> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch("amplitudes on different grids".into()));
        }
        let values = ndarray::Zip::from(&self.values)
            .and(&other.values)
            .map_collect(|x, y| a * x + b * y);
        Ok(SpectralAmplitude {
            values,
            ..self.clone_shell()
        })
    }

    pub fn scaled(&self, c: f64) -> SpectralAmplitude {
        SpectralAmplitude {
            values: self.values.mapv(|v| v * c),
            gain: self.gain * c,
            ..self.clone_shell()
        }
    }

    /// Maximum of |V(q, ω) − V(q, −ω)|.
    pub fn parity_residual(&self) -> f64 {
        let nw = self.grid.n_omega();
        let mut worst: f64 = 0.0;
        for row in self.values.rows() {
            for j in 0..nw / 2 {
                worst = worst.max((row[j] - row[nw - 1 - j]).norm());
            }
        }
        worst
    }
}

/// ψ(r_n, t_k) on the conjugate lattice.
#[derive(Debug, Clone)]
pub struct BiphotonField {
    grid: Arc<SimGrid>,
    values: Array2<Complex64>,
}

impl BiphotonField {
    pub fn from_values(grid: Arc<SimGrid>, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.n_q(), grid.n_omega()) {
            return Err(Error::GridMismatch(format!(
                "field {:?} on a {}x{} grid",
                values.dim(),
                grid.n_q(),
                grid.n_omega()
            )));
        }
        Ok(BiphotonField { grid, values })
    }

    pub fn grid(&self) -> &Arc<SimGrid> {
        &self.grid
    }

    /// Units m⁻²·s⁻¹.
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    /// max |ψ(r, t) − ψ(r, −t)| / max |ψ|.
    pub fn time_parity_residual(&self) -> f64 {
        let nt = self.grid.n_omega();
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for row in self.values.rows() {
            for k in 0..nt / 2 {
                worst = worst.max((row[k] - row[nt - 1 - k]).norm());
            }
        }
        worst / peak
    }
}

/// Complex profile on an ascending time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl TimeProfile {
    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Centered DFT: `out[k] = scale · Σ_j x[j] e^{−2πi (j−M)(k−M)/N}`, `M = ⌊N/2⌋`.
fn centered_dft(rows: &mut [Complex64], n: usize, scale: f64) {
    let m = n / 2;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    rows.par_chunks_mut(n).for_each(|row| {
        row.rotate_left(m);
        fft.process(row);
        row.rotate_right(m);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
}

/// V(q, t_k) for every q row.
pub fn time_rows(v: &SpectralAmplitude) -> Array2<Complex64> {
    let grid = v.grid();
    let n = grid.n_omega();
    let mut out = v.values().as_standard_layout().into_owned();
    centered_dft(
        out.as_slice_mut().expect("standard layout"),
        n,
        grid.d_omega() / (2.0 * PI),
    );
    out
}

/// Near-field biphoton amplitude ψ(r, t).
pub fn near_field(v: &SpectralAmplitude) -> Result<BiphotonField> {
    let grid = Arc::clone(v.grid());
    let vt = time_rows(v);
    let values = grid.hankel().forward_columns(vt.view())?;
    BiphotonField::from_values(grid, values)
}

/// Far-field temporal amplitude V(q_i, t) at one q node.
pub fn far_field_temporal(v: &SpectralAmplitude, q_index: usize) -> Result<TimeProfile> {
    let grid = v.grid();
    if q_index >= grid.n_q() {
        return Err(Error::IndexOutOfRange {
            index: q_index,
            len: grid.n_q(),
        });
    }
    let mut row = v.values().row(q_index).to_vec();
    let n = row.len();
    centered_dft(&mut row, n, grid.d_omega() / (2.0 * PI));
    Ok(TimeProfile {
        times: grid.t_nodes().to_vec(),
        values: row,
    })
}

/// ψ(r = 0, ω) = (1/2π) Σ_m w_m V(q_m, ω), with J₀(0) = 1.
pub fn on_axis_spectrum(v: &SpectralAmplitude) -> Vec<Complex64> {
    let w = v.grid().hankel().q_weights();
    let mut acc = vec![Complex64::default(); v.grid().n_omega()];
    for (row, wm) in v.values().rows().into_iter().zip(w) {
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x * *wm;
        }
    }
    acc.iter_mut().for_each(|a| *a /= 2.0 * PI);
    acc
}

/// ψ(0, t), band-limited interpolation by zero padding: the time step is
/// `dt / oversample` and the span is unchanged.
pub fn on_axis_temporal(v: &SpectralAmplitude, oversample: usize) -> TimeProfile {
    let spectrum = on_axis_spectrum(v);
    padded_profile(&spectrum, v.grid().d_omega(), oversample.max(1))
}

/// Time profile of an on-axis spectrum sampled at spacing `d_omega`,
/// zero-padded by `oversample`.
pub fn padded_profile(spectrum: &[Complex64], d_omega: f64, oversample: usize) -> TimeProfile {
    let m = spectrum.len() / 2;
    // n = N_ω·oversample keeps every native time node on the fine axis
    let n = spectrum.len() * oversample;
    let big_m = n / 2;
    let mut buf = vec![Complex64::default(); n];
    buf[big_m - m..=big_m + m].copy_from_slice(spectrum);
    centered_dft(&mut buf, n, d_omega / (2.0 * PI));
    let dt = 2.0 * PI / (n as f64 * d_omega);
    let times: Vec<f64> = (0..n).map(|k| (k as f64 - big_m as f64) * dt).collect();
    // keep one native period: |t| ≤ π/dω
    let half_period = PI / d_omega;
    let (times, values): (Vec<f64>, Vec<Complex64>) = times
        .into_iter()
        .zip(buf)
        .filter(|(t, _)| t.abs() <= half_period)
        .unzip();
    TimeProfile { times, values }
}

/// V(q_m, t) at one arbitrary time for all q nodes.
fn time_slice(v: &SpectralAmplitude, t: f64) -> Vec<Complex64> {
    let grid = v.grid();
    let phases: Vec<Complex64> = grid
        .omega_nodes()
        .iter()
        .map(|w| Complex64::from_polar(1.0, -w * t))
        .collect();
    let scale = grid.d_omega() / (2.0 * PI);
    v.values()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(&phases).map(|(x, p)| x * p).sum::<Complex64>() * scale)
        .collect()
}

/// ψ(r, t) at arbitrary radii for a fixed time, by direct Bessel quadrature.
pub fn radial_cut(v: &SpectralAmplitude, t: f64, radii: &[f64]) -> Result<Vec<Complex64>> {
    let slice = time_slice(v, t);
    let hankel = v.grid().hankel();
    radii
        .par_iter()
        .map(|&r| hankel.evaluate_at(&slice, r))
        .collect()
}

/// Position-integrated coincidence from the near field:
/// `I(t) = 2π Σ_n w_n |ψ(r_n, t)|²`.
pub fn integrated_coincidence(psi: &BiphotonField) -> Vec<f64> {
    let w = psi.grid().hankel().r_weights();
    let mut acc = vec![0.0; psi.grid().n_omega()];
    for (row, wn) in psi.values().rows().into_iter().zip(w) {
        for (a, x) in acc.iter_mut().zip(row) {
            *a += wn * x.norm_sqr();
        }
    }
    acc.iter_mut().for_each(|a| *a *= 2.0 * PI);
    acc
}

/// The same quantity from the far field: `(1/2π) Σ_m w_m |V(q_m, t)|²`.
pub fn integrated_coincidence_spectral(v: &SpectralAmplitude) -> Vec<f64> {
    let vt = time_rows(v);
    let w = v.grid().hankel().q_weights();
    let mut acc = vec![0.0; v.grid().n_omega()];
    for (row, wm) in vt.rows().into_iter().zip(w) {
        for (a, x) in acc.iter_mut().zip(row) {
            *a += wm * x.norm_sqr();
        }
    }
    acc.iter_mut().for_each(|a| *a /= 2.0 * PI);
    acc
}

/// max over t of |I_space − I_spectral| / max(I_space, I_spectral), ignoring
/// times where both vanish.
pub fn parseval_residual(spatial: &[f64], spectral: &[f64]) -> f64 {
    spatial
        .iter()
        .zip(spectral)
        .filter(|(a, b)| a.abs().max(b.abs()) > 0.0)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
        .fold(0.0, f64::max)
}
