use std::f64::consts::PI;

use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::filters::SpectralFilter;
use crate::dispersion::FieldRole;
use crate::phasematch::delta_pw;

use super::hankel::Qdht;

pub const DEFAULT_N_Q: usize = 1024;
pub const DEFAULT_N_OMEGA: usize = 4097;

/// Sampling lattice shared by spectral and space-time fields.
///
/// Frequencies are `ω_j = (j − M)·dω`, `j = 0..2M`, so the set is symmetric
/// about degeneracy; the conjugate times are `t_k = (k − M)·dt` with
/// `dt = 2π / (N_ω dω)`.
#[derive(Debug, Clone)]
pub struct SimGrid {
    hankel: Qdht,
    omega: Vec<f64>,
    times: Vec<f64>,
    omega_max: f64,
}

impl SimGrid {
    pub fn new(n_q: usize, q_max: f64, n_omega: usize, omega_max: f64) -> Result<Self> {
        if n_omega < 3 || n_omega % 2 == 0 {
            return Err(Error::invalid(
                "n_omega",
                format!("must be odd and >= 3 for a symmetric grid, got {n_omega}"),
            ));
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::invalid("omega_max", format!("must be positive, got {omega_max}")));
        }
        let hankel = Qdht::new(n_q, q_max)?;
        let m = (n_omega / 2) as i64;
        let d_omega = omega_max / m as f64;
        let dt = 2.0 * PI / (n_omega as f64 * d_omega);
        let omega = (-m..=m).map(|j| j as f64 * d_omega).collect();
        let times = (-m..=m).map(|k| k as f64 * dt).collect();
        Ok(SimGrid {
            hankel,
            omega,
            times,
            omega_max,
        })
    }

    pub fn hankel(&self) -> &Qdht {
        &self.hankel
    }

    pub fn n_q(&self) -> usize {
        self.hankel.len()
    }

    pub fn n_omega(&self) -> usize {
        self.omega.len()
    }

    pub fn q_nodes(&self) -> &[f64] {
        self.hankel.q_nodes()
    }

    pub fn r_nodes(&self) -> &[f64] {
        self.hankel.r_nodes()
    }

    pub fn omega_nodes(&self) -> &[f64] {
        &self.omega
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.times
    }

    pub fn q_max(&self) -> f64 {
        self.hankel.q_max()
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn d_omega(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Index of ω = 0 (and t = 0).
    pub fn center(&self) -> usize {
        self.omega.len() / 2
    }

    pub fn same_lattice(&self, other: &SimGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.omega == other.omega && self.hankel.q_nodes() == other.hankel.q_nodes())
    }
}

/// Requested grid; `None` extents are derived from crystal and filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_q: usize,
    pub n_omega: usize,
    pub q_max: Option<f64>,
    pub omega_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_q: DEFAULT_N_Q,
            n_omega: DEFAULT_N_OMEGA,
            q_max: None,
            omega_max: None,
        }
    }
}

/// Fraction of the Sellmeier-limited offset usable as ω_max.
const RANGE_MARGIN: f64 = 0.98;
/// Frequency samples used to locate the widest phase-matched q.
const Q_SCAN: usize = 512;

impl GridSpec {
    pub fn with_sizes(n_q: usize, n_omega: usize) -> Self {
        GridSpec {
            n_q,
            n_omega,
            ..Default::default()
        }
    }

    pub fn resolve(&self, crystal: &CrystalSpec, filter: Option<&SpectralFilter>) -> Result<SimGrid> {
        let omega_max = match self.omega_max {
            Some(w) => w,
            None => auto_omega_max(crystal, filter),
        };
        let q_max = match self.q_max {
            Some(q) => q,
            None => auto_q_max(crystal, omega_max)?,
        };
        SimGrid::new(self.n_q, q_max, self.n_omega, omega_max)
    }
}

/// 3× the filter bandwidth, capped inside the Sellmeier range.
pub fn auto_omega_max(crystal: &CrystalSpec, filter: Option<&SpectralFilter>) -> f64 {
    let edge = RANGE_MARGIN * crystal.max_signal_offset();
    match filter {
        Some(f) => (3.0 * f.bandwidth + f.center_offset.abs()).min(edge),
        None => edge,
    }
}

/// Largest q with Δ_pw(q, ω) = 0 for |ω| ≤ `omega_max` (0 if none).
pub fn max_phase_matched_q(crystal: &CrystalSpec, omega_max: f64) -> Result<f64> {
    let mut widest: f64 = 0.0;
    for i in 0..=Q_SCAN {
        let w = omega_max * i as f64 / Q_SCAN as f64;
        let k_lo = crystal.wave_number(FieldRole::SignalOrdinary, -w)?;
        let g = |q: f64| delta_pw(crystal, q, w);
        if g(0.0)? < 0.0 {
            continue;
        }
        let (mut a, mut b) = (0.0, k_lo);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if g(mid)? >= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        widest = widest.max(a);
    }
    Ok(widest)
}

/// 1.2× the largest phase-matched q inside |ω| ≤ ω_max.
pub fn auto_q_max(crystal: &CrystalSpec, omega_max: f64) -> Result<f64> {
    let widest = max_phase_matched_q(crystal, omega_max)?;
    if widest == 0.0 {
        return Err(Error::invalid(
            "q_max",
            "no phase-matched mode inside the frequency band; set q_max explicitly",
        ));
    }
    Ok(1.2 * widest)
}
