use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use xent_core::analytics::{
    hyperbola_level, pwp_validity, quadratic_psi, ridge_slope, shape_correlation, PeakMetrics, QuadraticOptions,
    RidgeOptions,
};
use xent_core::biphoton::{integrated_coincidence, integrated_coincidence_spectral, near_field, parseval_residual};
use xent_core::keyval::Document;
use xent_core::pipeline::{
    aperture_sweep, calibrate, integrated_fwhm, on_axis_intensity, spatial_profile, temporal_fwhm,
    SPATIAL_CUT_EXTENT, SPATIAL_CUT_SAMPLES,
};
use xent_core::{quadratic_params, CrystalSpec, QuadraticParams, Simulation, SpectralFilter};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{normalized, write_report, write_summary, Csv, Meta};

const FS: f64 = 1e-15;
const UM: f64 = 1e-6;
const CALIBRATION_BRACKET: (f64, f64) = (1e14, 1.2e15);
/// |H| below which points are left out of the oracle correlation.
const ORACLE_MIN_LEVEL: f64 = 10.0;

/// Loaded crystal, resolved config text and output directory of one run.
pub struct Context {
    pub cfg: RunConfig,
    crystal: CrystalSpec,
    config_text: String,
    crystal_text: String,
    out: PathBuf,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let crystal = cfg.load_crystal()?;
        let out = cfg.output_path().to_path_buf();
        std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        Ok(Context {
            config_text: cfg.to_document().to_string(),
            crystal_text: crystal.to_document().to_string(),
            cfg,
            crystal,
            out,
        })
    }

    fn meta(&self, command: &'static str) -> Meta {
        Meta::new(command, self.config_text.clone(), self.crystal_text.clone())
    }

    fn params(&self) -> Result<QuadraticParams, CliError> {
        let p = quadratic_params(&self.crystal, self.cfg.gain)?;
        Ok(match self.cfg.delta0_override {
            Some(d) => p.with_delta0(d),
            None => p,
        })
    }

    fn simulation(&self, with_angular: bool) -> Result<Simulation, CliError> {
        let offset = match self.cfg.delta0_override {
            Some(d) => d - quadratic_params(&self.crystal, self.cfg.gain)?.delta0,
            None => 0.0,
        };
        Ok(Simulation::new(self.crystal.clone(), self.cfg.gain)
            .with_grid(self.cfg.grid)
            .with_spectral(self.cfg.spectral)
            .with_angular(if with_angular { self.cfg.angular() } else { None })
            .with_mismatch_offset(offset))
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}

/// FWHM, or NaN when the profile has no resolvable peak (e.g. zero gain).
fn width(metrics: xent_core::Result<PeakMetrics>, what: &str) -> Result<f64, CliError> {
    match metrics {
        Ok(m) => Ok(m.fwhm),
        Err(xent_core::Error::PeakNotResolved) => {
            log::warn!("{what}: no peak resolved, width reported as NaN");
            Ok(f64::NAN)
        }
        Err(e) => Err(e.into()),
    }
}

/// |V(q, ω)| on the grid, ω-major.
pub fn pm_map(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let v = ctx.simulation(true)?.amplitude()?;
    let grid = v.grid();
    let meta = ctx.meta("pm-map").with_grid(grid);
    let peak = v.values().iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let mut csv = Csv::create(
        &ctx.out,
        "pm_map.csv",
        &meta,
        &[("omega_rad_s", "rad/s"), ("q_rad_m", "rad/m"), ("abs_v", "1"), ("abs_v_norm", "1")],
    )?;
    let stride = ctx.cfg.map_stride;
    for j in (0..grid.n_omega()).step_by(stride) {
        for i in (0..grid.n_q()).step_by(stride) {
            let a = v.values()[[i, j]].norm();
            csv.row(&[grid.omega_nodes()[j], grid.q_nodes()[i], a, a * scale])?;
        }
    }
    println!("pm-map: max |V| = {peak:.6e} on {} x {} nodes", grid.n_q(), grid.n_omega());
    Ok(vec![csv.finish()?])
}

/// Near-field map inside |t| ≤ map_t_max, r ≤ map_r_max, on-axis and t = 0
/// cuts, widths and (optionally) the quadratic-model comparison.
pub fn xcorr(ctx: &Context, oracle: bool) -> Result<Vec<PathBuf>, CliError> {
    let v = ctx.simulation(true)?.amplitude()?;
    let psi = near_field(&v)?;
    let grid = psi.grid().clone();
    let meta = ctx.meta("xcorr").with_grid(&grid);
    let params = ctx.params()?;
    let (r_max, t_max) = (ctx.cfg.map_r_max_um * UM, ctx.cfg.map_t_max_fs * FS);
    let rows: Vec<usize> = (0..grid.n_q()).filter(|&n| grid.r_nodes()[n] <= r_max).collect();
    let cols: Vec<usize> = (0..grid.n_omega()).filter(|&k| grid.t_nodes()[k].abs() <= t_max).collect();
    let points: Vec<(usize, usize)> = cols.iter().flat_map(|&k| rows.iter().map(move |&n| (n, k))).collect();
    let full: Vec<f64> = points.iter().map(|&(n, k)| psi.values()[[n, k]].norm()).collect();
    let full_norm = normalized(&full);

    let mut columns = vec![("t_fs", "fs"), ("r_um", "um"), ("abs_psi", "m^-2 s^-1"), ("abs_psi_norm", "1")];
    let quad = if oracle {
        columns.extend([("abs_psi_quadratic", "m^-2 s^-1"), ("level_h", "1"), ("clamped", "0/1")]);
        let opts = QuadraticOptions::for_extent(&params, r_max);
        let q: Vec<_> = points
            .par_iter()
            .map(|&(n, k)| quadratic_psi(&params, grid.r_nodes()[n], grid.t_nodes()[k], &opts))
            .collect::<xent_core::Result<_>>()?;
        Some(q)
    } else {
        None
    };
    let mut csv = Csv::create(&ctx.out, "xcorr_map.csv", &meta, &columns)?;
    for (idx, &(n, k)) in points.iter().enumerate() {
        let mut row = vec![grid.t_nodes()[k] / FS, grid.r_nodes()[n] / UM, full[idx], full_norm[idx]];
        if let Some(q) = &quad {
            row.extend([q[idx].value.norm(), q[idx].h, if q[idx].clamped { 1.0 } else { 0.0 }]);
        }
        csv.row(&row)?;
    }
    let mut files = vec![csv.finish()?];

    let (t, on_axis) = on_axis_intensity(&v);
    let mut csv = Csv::create(
        &ctx.out,
        "xcorr_temporal.csv",
        &meta,
        &[("t_fs", "fs"), ("intensity", "m^-4 s^-2"), ("intensity_norm", "1")],
    )?;
    write_profile(&mut csv, &t, &on_axis, FS, t_max)?;
    files.push(csv.finish()?);

    let (x, across) = spatial_profile(&v, SPATIAL_CUT_EXTENT, SPATIAL_CUT_SAMPLES)?;
    let mut csv = Csv::create(
        &ctx.out,
        "xcorr_spatial.csv",
        &meta,
        &[("x_um", "um"), ("intensity", "m^-4 s^-2"), ("intensity_norm", "1")],
    )?;
    write_profile(&mut csv, &x, &across, UM, f64::INFINITY)?;
    files.push(csv.finish()?);

    let t_width = width(xent_core::analytics::fwhm(&on_axis, &t), "temporal cut")?;
    let x_width = width(xent_core::analytics::fwhm(&across, &x), "spatial cut")?;
    let parity = psi.time_parity_residual();
    let (ridge_pos, ridge_neg) = match ridge_slope(&psi, &RidgeOptions::default()) {
        Ok(fit) => (fit.positive, fit.negative),
        Err(e) => {
            log::warn!("{e}");
            (f64::NAN, f64::NAN)
        }
    };
    let mut summary = vec![
        ("temporal_fwhm", t_width / FS, "fs"),
        ("spatial_fwhm", x_width / UM, "um"),
        ("peak_abs_psi", full.iter().cloned().fold(0.0, f64::max), "m^-2 s^-1"),
        ("time_parity_residual", parity, "1"),
        ("delta0", params.delta0, "1"),
        ("omega0", params.omega0, "rad/s"),
        ("q0", params.q0, "rad/m"),
        ("asymptote_slope", params.asymptote_slope(), "s/m"),
        ("ridge_slope_positive", ridge_pos, "s/m"),
        ("ridge_slope_negative", ridge_neg, "s/m"),
    ];
    if let Some(q) = &quad {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (idx, &(n, k)) in points.iter().enumerate() {
            if hyperbola_level(&params, grid.r_nodes()[n], grid.t_nodes()[k]).h.abs() >= ORACLE_MIN_LEVEL {
                a.push(full[idx]);
                b.push(q[idx].value.norm());
            }
        }
        let corr = shape_correlation(&a, &b).unwrap_or(f64::NAN);
        summary.push(("oracle_shape_correlation", corr, "1"));
    }
    files.push(write_summary(&ctx.out, "xcorr_summary.csv", &meta, &summary)?);
    println!(
        "xcorr: temporal FWHM {:.3} fs, spatial FWHM {:.3} um, time parity residual {parity:.2e}",
        t_width / FS,
        x_width / UM
    );
    Ok(files)
}

/// Profile rows with |axis| ≤ `limit` (in SI), axis written in `unit`.
fn write_profile(csv: &mut Csv, axis: &[f64], values: &[f64], unit: f64, limit: f64) -> Result<(), CliError> {
    let norm = normalized(values);
    for ((a, v), n) in axis.iter().zip(values).zip(&norm) {
        if a.abs() <= limit {
            csv.row(&[a / unit, *v, *n])?;
        }
    }
    Ok(())
}

/// Resolved on-axis vs position-integrated coincidence.
pub fn coincidence(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let v = ctx.simulation(true)?.amplitude()?;
    let psi = near_field(&v)?;
    let grid = psi.grid().clone();
    let meta = ctx.meta("coincidence").with_grid(&grid);

    let (t, on_axis) = on_axis_intensity(&v);
    let mut csv = Csv::create(
        &ctx.out,
        "coincidence_resolved.csv",
        &meta,
        &[("t_fs", "fs"), ("intensity", "m^-4 s^-2"), ("intensity_norm", "1")],
    )?;
    write_profile(&mut csv, &t, &on_axis, FS, ctx.cfg.map_t_max_fs * FS)?;
    let mut files = vec![csv.finish()?];

    let spatial = integrated_coincidence(&psi);
    let spectral = integrated_coincidence_spectral(&v);
    let norm = normalized(&spatial);
    let mut csv = Csv::create(
        &ctx.out,
        "coincidence_integrated.csv",
        &meta,
        &[
            ("t_fs", "fs"),
            ("integrated_spatial", "m^-2 s^-2"),
            ("integrated_spectral", "m^-2 s^-2"),
            ("integrated_norm", "1"),
        ],
    )?;
    for (k, &tk) in grid.t_nodes().iter().enumerate() {
        csv.row(&[tk / FS, spatial[k], spectral[k], norm[k]])?;
    }
    files.push(csv.finish()?);

    let resolved = width(temporal_fwhm(&v), "on-axis coincidence")?;
    let integrated = width(integrated_fwhm(&psi), "integrated coincidence")?;
    let residual = parseval_residual(&spatial, &spectral);
    files.push(write_summary(
        &ctx.out,
        "coincidence_summary.csv",
        &meta,
        &[
            ("resolved_fwhm", resolved / FS, "fs"),
            ("integrated_fwhm", integrated / FS, "fs"),
            ("width_ratio", integrated / resolved, "1"),
            ("parseval_residual", residual, "1"),
        ],
    )?);
    println!(
        "coincidence: resolved {:.3} fs, integrated {:.2} fs, Parseval residual {residual:.2e}",
        resolved / FS,
        integrated / FS
    );
    Ok(files)
}

/// On-axis temporal profile per far-field aperture.
pub fn filter_sweep(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    if ctx.cfg.alpha_max_deg.is_some() {
        log::warn!("[filter.angular] alpha_max_deg is replaced by sweep_alpha_deg in a sweep");
    }
    let v = ctx.simulation(false)?.amplitude()?;
    let meta = ctx.meta("filter-sweep").with_grid(v.grid());
    let alphas: Vec<f64> = ctx
        .cfg
        .sweep_alpha_deg
        .iter()
        .map(|d| if *d >= 90.0 { FRAC_PI_2 } else { d.to_radians() })
        .collect();
    let sweep = aperture_sweep(&v, &alphas, ctx.cfg.mapping)?;

    let mut csv = Csv::create(
        &ctx.out,
        "sweep_profiles.csv",
        &meta,
        &[("alpha_deg", "deg"), ("t_fs", "fs"), ("intensity", "m^-4 s^-2"), ("intensity_norm", "1")],
    )?;
    let t_max = ctx.cfg.map_t_max_fs * FS;
    for (deg, point) in ctx.cfg.sweep_alpha_deg.iter().zip(&sweep) {
        let intensity = point.profile.intensity();
        let norm = normalized(&intensity);
        for ((t, i), n) in point.profile.times.iter().zip(&intensity).zip(&norm) {
            if t.abs() <= t_max {
                csv.row(&[*deg, t / FS, *i, *n])?;
            }
        }
    }
    let mut files = vec![csv.finish()?];

    let mut csv = Csv::create(
        &ctx.out,
        "sweep_fwhm.csv",
        &meta,
        &[("alpha_deg", "deg"), ("fwhm_fs", "fs"), ("peak_intensity", "m^-4 s^-2")],
    )?;
    for (deg, point) in ctx.cfg.sweep_alpha_deg.iter().zip(&sweep) {
        csv.row(&[*deg, point.metrics.fwhm / FS, point.metrics.peak_value])?;
        println!("filter-sweep: alpha {deg:>6} deg  FWHM {:8.3} fs", point.metrics.fwhm / FS);
    }
    files.push(csv.finish()?);
    Ok(files)
}

/// Plane-wave-pump validity for the configured pump.
pub fn validate_pwp(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    let report = pwp_validity(
        &ctx.crystal,
        ctx.cfg.pump_waist_um * UM,
        ctx.cfg.pump_duration_ps * 1e-12,
        ctx.cfg.pwp_threshold,
    )?;
    let mut doc = Document::default();
    let sec = doc.section_mut("pwp");
    sec.set("walkoff_shift_um", format!("{:.9e}", report.walkoff_shift / UM));
    sec.set("gvm_delay_fs", format!("{:.9e}", report.gvm_delay / FS));
    sec.set("pump_waist_um", ctx.cfg.pump_waist_um.to_string());
    sec.set("pump_duration_ps", ctx.cfg.pump_duration_ps.to_string());
    sec.set("space_ratio", format!("{:.9e}", report.space_ratio));
    sec.set("time_ratio", format!("{:.9e}", report.time_ratio));
    sec.set("threshold", report.threshold.to_string());
    sec.set("space_ok", report.space_ok.to_string());
    sec.set("time_ok", report.time_ok.to_string());
    sec.set("passes", report.passes().to_string());
    let path = write_report(&ctx.out, "pwp.txt", &ctx.meta("validate-pwp"), &doc.to_string())?;
    println!(
        "validate-pwp: walk-off {:.1} um (ratio {:.2}, {}), GVM delay {:.0} fs (ratio {:.2}, {})",
        report.walkoff_shift / UM,
        report.space_ratio,
        if report.space_ok { "ok" } else { "fail" },
        report.gvm_delay / FS,
        report.time_ratio,
        if report.time_ok { "ok" } else { "fail" },
    );
    Ok(vec![path])
}

/// Fit the spectral-filter bandwidth to the target on-axis FWHM.
pub fn calibrate_filter(ctx: &Context) -> Result<Vec<PathBuf>, CliError> {
    if ctx.cfg.spectral.is_some_and(|f| f.center_offset != 0.0) {
        log::warn!("calibration fits a centred filter; center_offset is ignored");
    }
    let order = ctx.cfg.spectral_order;
    let seed = SpectralFilter::symmetric(order, CALIBRATION_BRACKET.1)?;
    let sim = ctx.simulation(false)?.with_spectral(Some(seed));
    let cal = calibrate(&sim, ctx.cfg.target_fwhm_fs * FS, CALIBRATION_BRACKET, 1e-4)?;
    let mut doc = Document::default();
    let sec = doc.section_mut("filter.spectral");
    sec.set("order", order.to_string());
    sec.set("bandwidth", format!("{:.5e}", cal.bandwidth));
    sec.set("center_offset", "0");
    let sec = doc.section_mut("calibration");
    sec.set("target_fwhm_fs", ctx.cfg.target_fwhm_fs.to_string());
    sec.set("achieved_fwhm_fs", format!("{:.6}", cal.fwhm / FS));
    sec.set("bandwidth_rad_s", format!("{:e}", cal.bandwidth));
    sec.set("evaluations", cal.evaluations.to_string());
    let path = write_report(&ctx.out, "calibration.txt", &ctx.meta("calibrate"), &doc.to_string())?;
    println!(
        "calibrate: bandwidth {:.5e} rad/s gives on-axis FWHM {:.4} fs",
        cal.bandwidth,
        cal.fwhm / FS
    );
    Ok(vec![path])
}
