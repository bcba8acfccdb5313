//! Space-time (X-shaped) correlations of photon pairs from parametric
//! down-conversion in a uniaxial crystal, in the plane-wave-pump limit.
//!
//! Pipeline: [`dispersion`] → [`phasematch`] → [`biphoton`] (Hankel in q,
//! FFT in ω) → [`filters`] → [`analytics`].

pub mod analytics;
pub mod biphoton;
pub mod dispersion;
pub mod error;
pub mod filters;
pub mod keyval;
mod numdiff;
pub mod phasematch;
pub mod pipeline;
pub mod quadrature;
pub mod testdata;

pub use analytics::{
    fwhm, hyperbola_level, pwp_validity, quadratic_psi, ridge_slope, shape_correlation,
    HyperbolicCoord, PeakMetrics, PwpReport, QuadraticOptions, QuadraticPsi, RidgeFit,
    RidgeOptions,
};
pub use biphoton::{BiphotonField, GridSpec, SimGrid, SpectralAmplitude, TimeProfile};
pub use dispersion::{CrystalSpec, FieldRole, SellmeierForm, SellmeierSet, SPEED_OF_LIGHT};
pub use error::{Error, Result};
pub use filters::{AngleMapping, AngularFilter, SpectralFilter};
pub use phasematch::{degeneracy_angle, quadratic_params, QuadraticParams};
pub use pipeline::{Calibration, Simulation};
