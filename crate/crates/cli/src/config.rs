//! Run configuration: the key–value file, flag overrides and validation.

use std::path::{Path, PathBuf};

use xent_core::keyval::{Document, Section};
use xent_core::{AngleMapping, AngularFilter, CrystalSpec, GridSpec, SpectralFilter};

use crate::error::CliError;

/// Section and key of every configurable value, in serialization order.
/// The flag name is the key with `_` replaced by `-`.
pub const KEYS: &[(&str, &str)] = &[
    ("run", "crystal_file"),
    ("run", "gain"),
    ("run", "output_dir"),
    ("run", "pump_waist_um"),
    ("run", "pump_duration_ps"),
    ("run", "pwp_threshold"),
    ("run", "sweep_alpha_deg"),
    ("run", "target_fwhm_fs"),
    ("run", "delta0_override"),
    ("run", "map_stride"),
    ("run", "map_r_max_um"),
    ("run", "map_t_max_fs"),
    ("grid", "n_q"),
    ("grid", "n_omega"),
    ("grid", "q_max"),
    ("grid", "omega_max"),
    ("filter.spectral", "order"),
    ("filter.spectral", "bandwidth"),
    ("filter.spectral", "center_offset"),
    ("filter.angular", "alpha_max_deg"),
    ("filter.angular", "mapping"),
];

/// Where a value was given; relative paths resolve against this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    File,
    Flag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub crystal_file: String,
    pub gain: f64,
    pub output_dir: String,
    pub pump_waist_um: f64,
    pub pump_duration_ps: f64,
    pub pwp_threshold: f64,
    pub sweep_alpha_deg: Vec<f64>,
    pub target_fwhm_fs: f64,
    pub delta0_override: Option<f64>,
    pub map_stride: usize,
    pub map_r_max_um: f64,
    pub map_t_max_fs: f64,
    pub grid: GridSpec,
    /// `None` when `bandwidth = off`.
    pub spectral: Option<SpectralFilter>,
    pub spectral_order: u32,
    pub alpha_max_deg: Option<f64>,
    pub mapping: AngleMapping,
    crystal_path: PathBuf,
    output_path: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn number(sec: &Section, key: &str, default: f64) -> Result<f64, CliError> {
    sec.parse_value::<f64>(key)
        .map(|v| v.unwrap_or(default))
        .map_err(|e| config_err(e.to_string()))
}

/// A number or one of the given keywords (→ `None`).
fn number_or(sec: &Section, key: &str, keywords: &[&str]) -> Result<Option<f64>, CliError> {
    match sec.get(key) {
        None => Ok(None),
        Some(v) if keywords.contains(&v.to_ascii_lowercase().as_str()) => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| config_err(format!("[{}] {key} = `{v}`: expected a number or {}", sec.name, keywords.join("/")))),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

fn mapping_name(m: AngleMapping) -> &'static str {
    match m {
        AngleMapping::PhotonFrequency => "photon-frequency",
        AngleMapping::Degenerate => "degenerate",
    }
}

fn fmt_opt(v: Option<f64>, none: &str) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| none.to_string())
}

impl RunConfig {
    /// Read `path` (if any), apply `overrides` as (key, value) with keys from
    /// [`KEYS`], and validate. File paths are relative to the config file,
    /// flag paths to the working directory.
    pub fn load(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self, CliError> {
        let (mut doc, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                let doc = Document::parse(&text)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (doc, base)
            }
            None => (Document::default(), PathBuf::new()),
        };
        let (mut crystal_origin, mut output_origin) = (Origin::File, Origin::File);
        for (key, value) in overrides {
            let (section, _) = KEYS
                .iter()
                .find(|(_, k)| k == key)
                .ok_or_else(|| config_err(format!("unknown key `{key}`")))?;
            doc.section_mut(section).set(*key, value.clone());
            match *key {
                "crystal_file" => crystal_origin = Origin::Flag,
                "output_dir" => output_origin = Origin::Flag,
                _ => {}
            }
        }
        for sec in doc.sections() {
            for (k, _) in sec.entries() {
                if !KEYS.iter().any(|(s, key)| *s == sec.name && *key == k) {
                    return Err(config_err(format!("unknown key `{k}` in [{}]", sec.name)));
                }
            }
        }
        Self::from_document(&doc, &base, crystal_origin, output_origin)
    }

    fn from_document(doc: &Document, base: &Path, crystal_origin: Origin, output_origin: Origin) -> Result<Self, CliError> {
        let empty = Section::default();
        let run = doc.section("run").unwrap_or(&empty);
        let grid = doc.section("grid").unwrap_or(&empty);
        let spectral = doc.section("filter.spectral").unwrap_or(&empty);
        let angular = doc.section("filter.angular").unwrap_or(&empty);

        let crystal_file = run
            .get("crystal_file")
            .ok_or_else(|| config_err("[run] crystal_file is required"))?
            .to_string();
        let output_dir = run.get("output_dir").unwrap_or("out").to_string();
        let resolve = |raw: &str, origin: Origin| match origin {
            Origin::File => base.join(raw),
            Origin::Flag => PathBuf::from(raw),
        };

        let gain = number(run, "gain", xent_core::phasematch::DEFAULT_GAIN)?;
        if !(gain >= 0.0 && gain.is_finite()) {
            return Err(config_err(format!("gain must be non-negative, got {gain}")));
        }
        let sweep_alpha_deg = run
            .parse_list("sweep_alpha_deg")
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or_else(|| vec![1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 12.0, 90.0]);
        for a in &sweep_alpha_deg {
            if !(*a > 0.0 && *a <= 90.0) {
                return Err(config_err(format!("sweep_alpha_deg entries must lie in (0, 90], got {a}")));
            }
        }
        let map_stride = run
            .parse_value::<usize>("map_stride")
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or(1);
        if map_stride == 0 {
            return Err(config_err("map_stride must be at least 1"));
        }

        let n_q = grid
            .parse_value::<usize>("n_q")
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or(xent_core::biphoton::DEFAULT_N_Q);
        let mut n_omega = grid
            .parse_value::<usize>("n_omega")
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or(xent_core::biphoton::DEFAULT_N_OMEGA);
        if n_omega % 2 == 0 {
            log::warn!("n_omega = {n_omega} is even; using {} for a symmetric frequency axis", n_omega + 1);
            n_omega += 1;
        }
        let q_max = number_or(grid, "q_max", &["auto"])?;
        let omega_max = number_or(grid, "omega_max", &["auto"])?;
        if let Some(q) = q_max {
            positive("q_max", q)?;
        }
        if let Some(w) = omega_max {
            positive("omega_max", w)?;
        }

        let spectral_order = spectral
            .parse_value::<u32>("order")
            .map_err(|e| config_err(e.to_string()))?
            .unwrap_or(xent_core::filters::DEFAULT_ORDER);
        let center_offset = number(spectral, "center_offset", 0.0)?;
        let spectral_filter = match number_or(spectral, "bandwidth", &["off"])? {
            Some(bw) => Some(
                SpectralFilter::new(spectral_order, bw, center_offset).map_err(|e| config_err(e.to_string()))?,
            ),
            None => None,
        };
        let alpha_max_deg = number_or(angular, "alpha_max_deg", &["off"])?;
        let mapping = match angular.get("mapping").unwrap_or("photon-frequency") {
            "photon-frequency" => AngleMapping::PhotonFrequency,
            "degenerate" => AngleMapping::Degenerate,
            other => {
                return Err(config_err(format!(
                    "[filter.angular] mapping = `{other}`: expected photon-frequency or degenerate"
                )))
            }
        };
        if let Some(a) = alpha_max_deg {
            AngularFilter::new(a.to_radians(), mapping).map_err(|e| config_err(e.to_string()))?;
        }

        Ok(RunConfig {
            crystal_path: resolve(&crystal_file, crystal_origin),
            output_path: resolve(&output_dir, output_origin),
            crystal_file,
            gain,
            output_dir,
            pump_waist_um: positive("pump_waist_um", number(run, "pump_waist_um", 300.0)?)?,
            pump_duration_ps: positive("pump_duration_ps", number(run, "pump_duration_ps", 2.0)?)?,
            pwp_threshold: positive("pwp_threshold", number(run, "pwp_threshold", 10.0)?)?,
            sweep_alpha_deg,
            target_fwhm_fs: positive("target_fwhm_fs", number(run, "target_fwhm_fs", 4.4)?)?,
            delta0_override: number_or(run, "delta0_override", &["off"])?,
            map_stride,
            map_r_max_um: positive("map_r_max_um", number(run, "map_r_max_um", 100.0)?)?,
            map_t_max_fs: positive("map_t_max_fs", number(run, "map_t_max_fs", 300.0)?)?,
            grid: GridSpec {
                n_q,
                n_omega,
                q_max,
                omega_max,
            },
            spectral: spectral_filter,
            spectral_order,
            alpha_max_deg,
            mapping,
        })
    }

    /// Fully resolved configuration, every key present.
    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let run = doc.section_mut("run");
        run.set("crystal_file", &self.crystal_file);
        run.set("gain", self.gain.to_string());
        run.set("output_dir", &self.output_dir);
        run.set("pump_waist_um", self.pump_waist_um.to_string());
        run.set("pump_duration_ps", self.pump_duration_ps.to_string());
        run.set("pwp_threshold", self.pwp_threshold.to_string());
        let alphas: Vec<String> = self.sweep_alpha_deg.iter().map(f64::to_string).collect();
        run.set("sweep_alpha_deg", alphas.join(", "));
        run.set("target_fwhm_fs", self.target_fwhm_fs.to_string());
        run.set("delta0_override", fmt_opt(self.delta0_override, "off"));
        run.set("map_stride", self.map_stride.to_string());
        run.set("map_r_max_um", self.map_r_max_um.to_string());
        run.set("map_t_max_fs", self.map_t_max_fs.to_string());
        let grid = doc.section_mut("grid");
        grid.set("n_q", self.grid.n_q.to_string());
        grid.set("n_omega", self.grid.n_omega.to_string());
        grid.set("q_max", fmt_opt(self.grid.q_max, "auto"));
        grid.set("omega_max", fmt_opt(self.grid.omega_max, "auto"));
        let spectral = doc.section_mut("filter.spectral");
        spectral.set("order", self.spectral_order.to_string());
        spectral.set("bandwidth", fmt_opt(self.spectral.map(|f| f.bandwidth), "off"));
        spectral.set(
            "center_offset",
            self.spectral.map(|f| f.center_offset).unwrap_or(0.0).to_string(),
        );
        let angular = doc.section_mut("filter.angular");
        angular.set("alpha_max_deg", fmt_opt(self.alpha_max_deg, "off"));
        angular.set("mapping", mapping_name(self.mapping));
        doc
    }

    pub fn output_path(&self) -> &Path {
        &self.output_path
    }

    pub fn load_crystal(&self) -> Result<CrystalSpec, CliError> {
        CrystalSpec::from_file(&self.crystal_path).map_err(CliError::from)
    }

    pub fn angular(&self) -> Option<AngularFilter> {
        self.alpha_max_deg
            .map(|a| AngularFilter::new(a.to_radians(), self.mapping).expect("validated on load"))
    }
}
