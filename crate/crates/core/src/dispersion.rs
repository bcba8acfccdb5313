//! Refractive indices, wave numbers and dispersion derivatives of a uniaxial
//! crystal.
//!
//! All quantities are SI. Frequencies passed to [`CrystalSpec::wave_number`]
//! and [`CrystalSpec::kz`] are offsets from the carrier of the chosen field:
//! `ω_s = ω_p / 2` for the ordinary signal, `ω_p` for the extraordinary pump.
//! The pump is always collinear, so its index is taken at the cut angle.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::keyval::{Document, Section};
use crate::numdiff;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Functional form of a Sellmeier fit, with λ in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SellmeierForm {
    /// `n² = A + B/(λ² − C) − D·λ²`
    FourTerm,
    /// `n² = 1 + Σ Bᵢ·λ²/(λ² − Cᵢ)`, coefficients given as `B₁, C₁, B₂, C₂, …`
    Sellmeier,
}

impl SellmeierForm {
    pub fn identifier(self) -> &'static str {
        match self {
            SellmeierForm::FourTerm => "four-term",
            SellmeierForm::Sellmeier => "sellmeier",
        }
    }

    pub fn from_identifier(id: &str) -> Result<Self> {
        match id.trim() {
            "four-term" => Ok(SellmeierForm::FourTerm),
            "sellmeier" => Ok(SellmeierForm::Sellmeier),
            other => Err(Error::UnknownForm(other.to_string())),
        }
    }
}

impl fmt::Display for SellmeierForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.identifier())
    }
}

/// Sellmeier coefficients for one principal polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierSet {
    form: SellmeierForm,
    coefficients: Vec<f64>,
    /// (λ_min, λ_max) in metres.
    valid_range: (f64, f64),
}

impl SellmeierSet {
    /// Number of range samples used to check `n² > 1` at construction.
    const RANGE_CHECK_SAMPLES: usize = 512;

    pub fn new(form: SellmeierForm, coefficients: Vec<f64>, valid_range: (f64, f64)) -> Result<Self> {
        match form {
            SellmeierForm::FourTerm if coefficients.len() != 4 => {
                return Err(Error::invalid(
                    "coefficients",
                    format!("four-term form needs 4 coefficients, got {}", coefficients.len()),
                ))
            }
            SellmeierForm::Sellmeier if coefficients.is_empty() || coefficients.len() % 2 != 0 => {
                return Err(Error::invalid(
                    "coefficients",
                    "sellmeier form needs B, C pairs".to_string(),
                ))
            }
            _ => {}
        }
        let (lo, hi) = valid_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(
                "range_um",
                format!("need 0 < min < max, got ({lo:e}, {hi:e})"),
            ));
        }
        let set = SellmeierSet {
            form,
            coefficients,
            valid_range,
        };
        for i in 0..=Self::RANGE_CHECK_SAMPLES {
            let lam = lo + (hi - lo) * i as f64 / Self::RANGE_CHECK_SAMPLES as f64;
            let n2 = set.index_squared_unchecked(lam);
            if !(n2 > 1.0) || !n2.is_finite() {
                return Err(Error::invalid(
                    "coefficients",
                    format!("n^2 = {n2} <= 1 at {:.4} um", lam * 1e6),
                ));
            }
        }
        Ok(set)
    }

    pub fn form(&self) -> SellmeierForm {
        self.form
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    fn index_squared_unchecked(&self, wavelength: f64) -> f64 {
        let l2 = (wavelength * 1e6).powi(2);
        let c = &self.coefficients;
        match self.form {
            SellmeierForm::FourTerm => c[0] + c[1] / (l2 - c[2]) - c[3] * l2,
            SellmeierForm::Sellmeier => {
                1.0 + c
                    .chunks_exact(2)
                    .map(|bc| bc[0] * l2 / (l2 - bc[1]))
                    .sum::<f64>()
            }
        }
    }

    pub fn check_range(&self, wavelength: f64) -> Result<()> {
        let (min, max) = self.valid_range;
        if wavelength >= min && wavelength <= max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                wavelength,
                min,
                max,
            })
        }
    }

    /// Refractive index at vacuum wavelength `wavelength` (m).
    pub fn index(&self, wavelength: f64) -> Result<f64> {
        self.check_range(wavelength)?;
        Ok(self.index_squared_unchecked(wavelength).sqrt())
    }

    fn from_section(sec: &Section) -> Result<Self> {
        let form = SellmeierForm::from_identifier(sec.require("form")?)?;
        let coefficients = sec.parse_list("coefficients")?.ok_or_else(|| Error::MissingKey {
            section: sec.name.clone(),
            key: "coefficients".into(),
        })?;
        let range = sec.parse_list("range_um")?.ok_or_else(|| Error::MissingKey {
            section: sec.name.clone(),
            key: "range_um".into(),
        })?;
        if range.len() != 2 {
            return Err(Error::invalid("range_um", "expected two values"));
        }
        SellmeierSet::new(form, coefficients, (range[0] * 1e-6, range[1] * 1e-6))
    }
}

/// Which field a wave number refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    SignalOrdinary,
    PumpExtraordinary,
}

/// Collinear wave numbers at the carriers plus signal GVD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    /// k_s(0, 0), rad/m
    pub k_signal: f64,
    /// k_p(0, 0), rad/m
    pub k_pump: f64,
    /// d²k_s/dω² at degeneracy, s²/m
    pub gvd_signal: f64,
}

/// Material model of a type-I (e → oo) down-converter.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub name: String,
    /// Literature reference of the Sellmeier data.
    pub source: String,
    ordinary: SellmeierSet,
    extraordinary: SellmeierSet,
    cut_angle: f64,
    length: f64,
    pump_wavelength: f64,
}

impl CrystalSpec {
    pub fn new(
        name: impl Into<String>,
        ordinary: SellmeierSet,
        extraordinary: SellmeierSet,
        cut_angle: f64,
        length: f64,
        pump_wavelength: f64,
    ) -> Result<Self> {
        if !(cut_angle > 0.0 && cut_angle < FRAC_PI_2) {
            return Err(Error::invalid(
                "cut_angle",
                format!("must lie in (0, 90) deg, got {} deg", cut_angle.to_degrees()),
            ));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("length", format!("must be positive, got {length}")));
        }
        if !(pump_wavelength > 0.0 && pump_wavelength.is_finite()) {
            return Err(Error::invalid(
                "pump_wavelength",
                format!("must be positive, got {pump_wavelength}"),
            ));
        }
        let spec = CrystalSpec {
            name: name.into(),
            source: String::new(),
            ordinary,
            extraordinary,
            cut_angle,
            length,
            pump_wavelength,
        };
        // both carriers must be evaluable
        spec.ordinary.check_range(2.0 * pump_wavelength)?;
        spec.ordinary.check_range(pump_wavelength)?;
        spec.extraordinary.check_range(pump_wavelength)?;
        Ok(spec)
    }

    /// Parse a crystal-data document.
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let root = doc.root();
        let num = |key: &str| -> Result<f64> {
            root.parse_value::<f64>(key)?.ok_or_else(|| Error::MissingKey {
                section: String::new(),
                key: key.to_string(),
            })
        };
        let ordinary = SellmeierSet::from_section(doc.require_section("ordinary")?)?;
        let extraordinary = SellmeierSet::from_section(doc.require_section("extraordinary")?)?;
        let mut spec = CrystalSpec::new(
            root.get("name").unwrap_or("unnamed"),
            ordinary,
            extraordinary,
            num("cut_angle_deg")?.to_radians(),
            num("length_mm")? * 1e-3,
            num("pump_wavelength_nm")? * 1e-9,
        )?;
        spec.source = root.get("source").unwrap_or_default().to_string();
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Serialize back to the crystal-data format.
    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let root = doc.section_mut("");
        root.set("name", &self.name);
        if !self.source.is_empty() {
            root.set("source", &self.source);
        }
        root.set("cut_angle_deg", encode(self.cut_angle.to_degrees(), self.cut_angle, f64::to_radians));
        root.set("length_mm", encode(self.length * 1e3, self.length, |v| v * 1e-3));
        root.set(
            "pump_wavelength_nm",
            encode(self.pump_wavelength * 1e9, self.pump_wavelength, |v| v * 1e-9),
        );
        for (name, set) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            let sec = doc.section_mut(name);
            sec.set("form", set.form.identifier());
            let coeffs: Vec<String> = set.coefficients.iter().map(|c| format!("{c}")).collect();
            sec.set("coefficients", coeffs.join(", "));
            sec.set(
                "range_um",
                format!(
                    "{}, {}",
                    encode(set.valid_range.0 * 1e6, set.valid_range.0, |v| v * 1e-6),
                    encode(set.valid_range.1 * 1e6, set.valid_range.1, |v| v * 1e-6)
                ),
            );
        }
        doc
    }

    pub fn ordinary(&self) -> &SellmeierSet {
        &self.ordinary
    }

    pub fn extraordinary(&self) -> &SellmeierSet {
        &self.extraordinary
    }

    pub fn cut_angle(&self) -> f64 {
        self.cut_angle
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn pump_wavelength(&self) -> f64 {
        self.pump_wavelength
    }

    pub fn with_cut_angle(&self, cut_angle: f64) -> Result<Self> {
        let mut out = self.clone();
        if !(cut_angle > 0.0 && cut_angle < FRAC_PI_2) {
            return Err(Error::invalid("cut_angle", "must lie in (0, pi/2)"));
        }
        out.cut_angle = cut_angle;
        Ok(out)
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("length", "must be positive"));
        }
        let mut out = self.clone();
        out.length = length;
        Ok(out)
    }

    pub fn pump_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.pump_wavelength
    }

    /// Degenerate signal carrier ω_s = ω_p / 2.
    pub fn signal_frequency(&self) -> f64 {
        0.5 * self.pump_frequency()
    }

    pub fn index_ordinary(&self, wavelength: f64) -> Result<f64> {
        self.ordinary.index(wavelength)
    }

    /// Extraordinary-wave index at angle `theta` to the optic axis.
    pub fn index_extraordinary(&self, wavelength: f64, theta: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::invalid("theta", format!("{theta} outside [0, pi/2]")));
        }
        let no = self.ordinary.index(wavelength)?;
        let ne = self.extraordinary.index(wavelength)?;
        let (s, c) = theta.sin_cos();
        Ok(1.0 / (c * c / (no * no) + s * s / (ne * ne)).sqrt())
    }

    fn carrier(&self, role: FieldRole) -> f64 {
        match role {
            FieldRole::SignalOrdinary => self.signal_frequency(),
            FieldRole::PumpExtraordinary => self.pump_frequency(),
        }
    }

    /// Wave number k(ω_carrier + ω_offset) in rad/m.
    pub fn wave_number(&self, role: FieldRole, omega_offset: f64) -> Result<f64> {
        let omega = self.carrier(role) + omega_offset;
        if !(omega > 0.0) {
            return Err(Error::invalid(
                "omega_offset",
                format!("total frequency {omega:e} rad/s is not positive"),
            ));
        }
        let wavelength = 2.0 * PI * SPEED_OF_LIGHT / omega;
        let n = match role {
            FieldRole::SignalOrdinary => self.index_ordinary(wavelength)?,
            FieldRole::PumpExtraordinary => self.index_extraordinary(wavelength, self.cut_angle)?,
        };
        Ok(n * omega / SPEED_OF_LIGHT)
    }

    /// Longitudinal wave-vector component sqrt(k² − q²), non-paraxial.
    pub fn kz(&self, role: FieldRole, q: f64, omega_offset: f64) -> Result<f64> {
        let k = self.wave_number(role, omega_offset)?;
        kz_from(k, q)
    }

    /// Group-velocity dispersion of the signal at degeneracy, s²/m.
    pub fn gvd_signal(&self) -> Result<f64> {
        let step = 0.05 * self.signal_frequency();
        numdiff::second(
            |w| self.wave_number(FieldRole::SignalOrdinary, w),
            0.0,
            step,
            1e-6,
        )
    }

    /// Inverse group velocity dk/dω at the carrier of `role`, s/m.
    pub fn inverse_group_velocity(&self, role: FieldRole) -> Result<f64> {
        let step = 0.02 * self.carrier(role);
        numdiff::first(|w| self.wave_number(role, w), 0.0, step, 1e-9)
    }

    /// Temporal delay between signal and pump accumulated over the crystal, s.
    pub fn group_delay_mismatch(&self) -> Result<f64> {
        let ds = self.inverse_group_velocity(FieldRole::SignalOrdinary)?;
        let dp = self.inverse_group_velocity(FieldRole::PumpExtraordinary)?;
        Ok((ds - dp).abs() * self.length)
    }

    /// Pump walk-off ρ = −(1/n)·dn/dθ at the cut angle.
    pub fn walkoff_angle(&self) -> Result<f64> {
        self.walkoff_angle_at(self.cut_angle)
    }

    /// Walk-off at an arbitrary propagation angle θ ∈ [0, π/2].
    pub fn walkoff_angle_at(&self, theta: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::invalid("theta", format!("{theta} outside [0, pi/2]")));
        }
        let lam = self.pump_wavelength;
        let n = self.index_extraordinary(lam, theta)?;
        // the index is even about both 0 and π/2; reflect so the stencil stays in range
        let index_at = |t: f64| {
            let t = t.abs();
            let t = if t > FRAC_PI_2 { PI - t } else { t };
            self.index_extraordinary(lam, t)
        };
        let step = 1e-2;
        let dn = match numdiff::first(index_at, theta, step, 1e-8) {
            Ok(d) => d,
            // at the symmetry points dn/dθ vanishes and the relative test never settles
            Err(Error::Convergence { .. }) if theta < 1e-6 || FRAC_PI_2 - theta < 1e-6 => 0.0,
            Err(e) => return Err(e),
        };
        Ok(-dn / n)
    }

    pub fn wave_context(&self) -> Result<WaveContext> {
        Ok(WaveContext {
            k_signal: self.wave_number(FieldRole::SignalOrdinary, 0.0)?,
            k_pump: self.wave_number(FieldRole::PumpExtraordinary, 0.0)?,
            gvd_signal: self.gvd_signal()?,
        })
    }

    /// Largest signal frequency offset |ω| such that both ω_s ± |ω| lie
    /// inside the ordinary Sellmeier range.
    pub fn max_signal_offset(&self) -> f64 {
        let (lmin, lmax) = self.ordinary.valid_range;
        let ws = self.signal_frequency();
        let w_hi = 2.0 * PI * SPEED_OF_LIGHT / lmin;
        let w_lo = 2.0 * PI * SPEED_OF_LIGHT / lmax;
        (w_hi - ws).min(ws - w_lo).max(0.0)
    }
}

/// Shortest text among `guess` and its near neighbours that decodes back to
/// exactly `target`, so unit conversions survive a write/parse cycle.
fn encode(guess: f64, target: f64, decode: impl Fn(f64) -> f64) -> String {
    (-8i64..=8)
        .map(|k| f64::from_bits((guess.to_bits() as i64 + k) as u64))
        .filter(|&v| decode(v) == target)
        .map(|v| format!("{v}"))
        .min_by_key(|s| s.len())
        .unwrap_or_else(|| format!("{guess}"))
}

/// sqrt(k² − q²) with the evanescence check.
pub fn kz_from(k: f64, q: f64) -> Result<f64> {
    let q = q.abs();
    if q > k {
        return Err(Error::Evanescent { q, k });
    }
    Ok(((k - q) * (k + q)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::bbo;

    #[test]
    fn four_term_by_hand() {
        // n_o² at 0.704 um, evaluated term by term
        let l2 = 0.704f64 * 0.704;
        let expected = (2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2).sqrt();
        let n = bbo().index_ordinary(704e-9).unwrap();
        assert!((n - expected).abs() < 1e-15);
        assert!((n - 1.663_889_35).abs() < 1e-8);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = bbo();
        let (lo, hi) = c.ordinary().valid_range();
        let err = c.index_ordinary(lo * (1.0 - 1e-9)).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
        assert!(err.to_string().contains("outside Sellmeier range"));
        assert!(c.index_ordinary(hi * (1.0 + 1e-9)).is_err());
        assert!(c.index_ordinary(lo).is_ok());
    }

    #[test]
    fn extraordinary_limits() {
        let c = bbo();
        let lam = 352e-9;
        let no = c.index_ordinary(lam).unwrap();
        let ne = c.extraordinary().index(lam).unwrap();
        assert_eq!(c.index_extraordinary(lam, 0.0).unwrap(), no);
        assert!((c.index_extraordinary(lam, FRAC_PI_2).unwrap() - ne).abs() < 1e-15);
        let mid = c.index_extraordinary(lam, c.cut_angle()).unwrap();
        assert!(ne < mid && mid < no);
    }

    #[test]
    fn wave_numbers_at_carriers() {
        let c = bbo();
        let ws = c.signal_frequency();
        let ks = c.wave_number(FieldRole::SignalOrdinary, 0.0).unwrap();
        assert!((ks - c.index_ordinary(704e-9).unwrap() * ws / SPEED_OF_LIGHT).abs() < 1e-6);
        let kp = c.wave_number(FieldRole::PumpExtraordinary, 0.0).unwrap();
        let ne = c.index_extraordinary(352e-9, c.cut_angle()).unwrap();
        assert!((kp - ne * 2.0 * ws / SPEED_OF_LIGHT).abs() < 1e-6);
        let kplus = c.wave_number(FieldRole::SignalOrdinary, 0.2 * ws).unwrap();
        let kminus = c.wave_number(FieldRole::SignalOrdinary, -0.2 * ws).unwrap();
        assert!(kplus > ks && ks > kminus && kminus > 0.0);
    }

    #[test]
    fn kz_limits() {
        let c = bbo();
        let k = c.wave_number(FieldRole::SignalOrdinary, 1e14).unwrap();
        assert_eq!(c.kz(FieldRole::SignalOrdinary, 0.0, 1e14).unwrap(), k);
        assert_eq!(c.kz(FieldRole::SignalOrdinary, k, 1e14).unwrap(), 0.0);
        let kz = c.kz(FieldRole::SignalOrdinary, 0.6 * k, 1e14).unwrap();
        assert!(((kz * kz + 0.36 * k * k) / (k * k) - 1.0).abs() < 1e-12);
        assert!(matches!(
            c.kz(FieldRole::SignalOrdinary, 1.0001 * k, 1e14),
            Err(Error::Evanescent { .. })
        ));
    }

    #[test]
    fn gvd_positive_and_in_band() {
        let c = bbo();
        let gvd = c.gvd_signal().unwrap();
        assert!(gvd > 0.0);
        let omega0 = 1.0 / (gvd * c.length()).sqrt();
        assert!((1e13..1e14).contains(&omega0), "Omega0 = {omega0:e}");
    }

    #[test]
    fn walkoff_vanishes_on_axes() {
        let c = bbo();
        assert!(c.walkoff_angle_at(0.0).unwrap().abs() < 1e-9);
        assert!(c.walkoff_angle_at(FRAC_PI_2).unwrap().abs() < 1e-9);
        assert!(c.walkoff_angle_at(1e-4).unwrap() < 1e-4);
        let rho = c.walkoff_angle().unwrap();
        assert!(rho > 0.0);
        let shift = rho * c.length();
        assert!((150e-6..600e-6).contains(&shift), "walk-off shift {shift:e}");
    }

    #[test]
    fn parse_rejects_unknown_form() {
        let text = crate::testdata::BBO_TEXT.replacen("form = four-term", "form = cauchy", 1);
        assert_eq!(
            CrystalSpec::parse(&text).unwrap_err(),
            Error::UnknownForm("cauchy".into())
        );
    }

    #[test]
    fn parse_validates_geometry() {
        let text = crate::testdata::BBO_TEXT.replace("cut_angle_deg = 33.436", "cut_angle_deg = 95");
        assert!(matches!(
            CrystalSpec::parse(&text),
            Err(Error::InvalidParameter { name: "cut_angle", .. })
        ));
        let text = crate::testdata::BBO_TEXT.replace("length_mm = 4", "length_mm = -1");
        assert!(CrystalSpec::parse(&text).is_err());
    }

    #[test]
    fn document_round_trip() {
        let c = bbo();
        let again = CrystalSpec::parse(&c.to_document().to_string()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn sellmeier_pairs_form() {
        // fused-silica-like three-pole fit
        let set = SellmeierSet::new(
            SellmeierForm::Sellmeier,
            vec![0.6961663, 0.0684043f64.powi(2), 0.4079426, 0.1162414f64.powi(2), 0.8974794, 9.896161f64.powi(2)],
            (0.21e-6, 3.71e-6),
        )
        .unwrap();
        let n = set.index(0.5876e-6).unwrap();
        assert!((n - 1.4585).abs() < 2e-4);
        assert!(SellmeierSet::new(SellmeierForm::Sellmeier, vec![1.0], (0.3e-6, 1e-6)).is_err());
    }
}
