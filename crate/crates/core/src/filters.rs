//! Detection filters acting on the spectral amplitude.
//!
//! Both filters multiply the amplitude V (single-photon transmission), so a
//! coincidence rate picks up the square of the transmission.

use std::f64::consts::FRAC_PI_2;

use ndarray::Array2;

use crate::biphoton::{SimGrid, SpectralAmplitude};
use crate::dispersion::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: u32 = 8;

/// Super-gaussian `T(ω) = exp(−((ω − ω_c)/Ω_f)^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFilter {
    pub order: u32,
    /// Ω_f, half-width at 1/e of the amplitude transmission (rad/s).
    pub bandwidth: f64,
    pub center_offset: f64,
}

impl SpectralFilter {
    pub fn new(order: u32, bandwidth: f64, center_offset: f64) -> Result<Self> {
        if order < 2 || order % 2 != 0 {
            return Err(Error::invalid("order", format!("must be even and >= 2, got {order}")));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth", format!("must be positive, got {bandwidth}")));
        }
        if !center_offset.is_finite() {
            return Err(Error::invalid("center_offset", "must be finite"));
        }
        Ok(SpectralFilter {
            order,
            bandwidth,
            center_offset,
        })
    }

    pub fn symmetric(order: u32, bandwidth: f64) -> Result<Self> {
        Self::new(order, bandwidth, 0.0)
    }

    pub fn transmission(&self, omega: f64) -> f64 {
        if self.bandwidth.is_infinite() {
            return 1.0;
        }
        let x = (omega - self.center_offset) / self.bandwidth;
        (-x.powi(self.order as i32)).exp()
    }

    /// Half-width |ω − ω_c| at which the transmission drops to `level`.
    pub fn band_edge(&self, level: f64) -> f64 {
        self.bandwidth * (-level.ln()).powf(1.0 / self.order as f64) + self.center_offset.abs()
    }
}

/// How the aperture angle maps to a transverse wave-vector cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleMapping {
    /// `q_cut(ω) = ((ω_s + ω)/c)·sin α_max`, the in-air angle of each photon.
    #[default]
    PhotonFrequency,
    /// `q_cut = (ω_s/c)·sin α_max` for every frequency.
    Degenerate,
}

/// Hard circular stop in the far-field plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularFilter {
    /// External propagation-angle cutoff (rad).
    pub alpha_max: f64,
    pub mapping: AngleMapping,
}

impl AngularFilter {
    pub fn new(alpha_max: f64, mapping: AngleMapping) -> Result<Self> {
        if !(alpha_max > 0.0 && alpha_max <= FRAC_PI_2) {
            return Err(Error::invalid(
                "alpha_max",
                format!("must lie in (0, 90] deg, got {} deg", alpha_max.to_degrees()),
            ));
        }
        Ok(AngularFilter { alpha_max, mapping })
    }

    pub fn from_degrees(alpha_deg: f64) -> Result<Self> {
        Self::new(alpha_deg.to_radians(), AngleMapping::PhotonFrequency)
    }

    pub fn is_all_pass(&self) -> bool {
        self.alpha_max >= FRAC_PI_2
    }

    /// Transverse cutoff for a photon at offset ω from the carrier ω_s.
    pub fn q_cut(&self, carrier: f64, omega: f64) -> f64 {
        let freq = match self.mapping {
            AngleMapping::PhotonFrequency => carrier + omega,
            AngleMapping::Degenerate => carrier,
        };
        freq / SPEED_OF_LIGHT * self.alpha_max.sin()
    }
}

/// Filter transmission sampled on one grid.
#[derive(Debug, Clone)]
pub struct Transmission {
    grid: std::sync::Arc<SimGrid>,
    values: Array2<f64>,
}

impl Transmission {
    pub fn spectral(grid: &std::sync::Arc<SimGrid>, filter: &SpectralFilter) -> Self {
        let row: Vec<f64> = grid.omega_nodes().iter().map(|&w| filter.transmission(w)).collect();
        Transmission {
            grid: std::sync::Arc::clone(grid),
            values: Array2::from_shape_fn((grid.n_q(), grid.n_omega()), |(_, j)| row[j]),
        }
    }

    pub fn angular(grid: &std::sync::Arc<SimGrid>, filter: &AngularFilter, carrier: f64) -> Self {
        let q = grid.q_nodes();
        let w = grid.omega_nodes();
        let all_pass = filter.is_all_pass();
        Transmission {
            grid: std::sync::Arc::clone(grid),
            values: Array2::from_shape_fn((grid.n_q(), grid.n_omega()), |(i, j)| {
                if all_pass || q[i] <= filter.q_cut(carrier, w[j]) {
                    1.0
                } else {
                    0.0
                }
            }),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn apply(&self, v: &SpectralAmplitude) -> Result<SpectralAmplitude> {
        if !self.grid.same_lattice(v.grid()) {
            return Err(Error::GridMismatch(
                "filter transmission sampled on a different grid".into(),
            ));
        }
        Ok(v.map_values(|ix, x| if self.values[ix] == 1.0 { x } else { x * self.values[ix] }))
    }
}

/// Multiply V by the super-gaussian transmission.
pub fn apply_spectral(v: &SpectralAmplitude, filter: &SpectralFilter) -> SpectralAmplitude {
    let row: Vec<f64> = v
        .grid()
        .omega_nodes()
        .iter()
        .map(|&w| filter.transmission(w))
        .collect();
    v.map_values(|(_, j), x| if row[j] == 1.0 { x } else { x * row[j] })
}

/// Zero every node with q > q_cut(ω).
pub fn apply_angular(v: &SpectralAmplitude, filter: &AngularFilter) -> SpectralAmplitude {
    if filter.is_all_pass() {
        return v.map_values(|_, x| x);
    }
    let q = v.grid().q_nodes().to_vec();
    let w = v.grid().omega_nodes().to_vec();
    let carrier = v.carrier();
    v.map_values(|(i, j), x| {
        if q[i] <= filter.q_cut(carrier, w[j]) {
            x
        } else {
            Default::default()
        }
    })
}
