//! Scenario execution: configuration resolution, the analysis pipeline and
//! parameter sweeps.

use crate::output::{self, OutputContext};
use crate::scenario::{Analysis, EnvelopeChoice, ModelChoice, Scenario, TiltChoice};
use spdc_core::dispersion::{phase_matching_angle, CrystalSpec, PmType, WaveRole};
use spdc_core::grid::{FrequencyGrid, PumpSpec};
use spdc_core::material::Material;
use spdc_core::phase_matching::{
    auto_grid, bandwidth_report, joint_spectrum_with_model, BandwidthReport, JointSpectrum,
    ModelOrder, SpectrumWarning,
};
use spdc_core::tilt::{
    angular_dispersion, matched_pair, optimal_tilt_type1, optimal_tilt_type2, tilt_from_dispersion,
    GratingSpec,
};
use spdc_core::units::omega_of_wavelength;
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{stage}: {message}")]
    Numerical {
        stage: &'static str,
        message: String,
    },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::Io(_) => 3,
        }
    }

    fn numerical(stage: &'static str) -> impl Fn(&dyn std::fmt::Display) -> CliError {
        move |e| CliError::Numerical {
            stage,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

macro_rules! num_err {
    ($stage:literal, $expr:expr) => {
        $expr.map_err(|e| CliError::numerical($stage)(&e))
    };
}

/// Execution record of one scenario run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario_echo: String,
    pub scenario_hash: String,
    /// Named summary numbers, in emission order.
    pub summary: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub manifest: Vec<PathBuf>,
    pub engine_version: String,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Fully resolved physical configuration of a scenario.
pub struct Resolved {
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub lambda_signal: f64,
    pub xi_pump: Option<f64>,
    pub order: ModelOrder,
    pub baseline_order: ModelOrder,
    /// Extra summary entries produced during resolution (tilt details).
    pub notes: Vec<(String, f64)>,
}

pub fn resolve(s: &Scenario) -> Result<Resolved, CliError> {
    let material = Material::resolve(&s.material)
        .map_err(|e| CliError::Validation(format!("material `{}`: {e}", s.material)))?;
    let lambda_p = s.pump_wavelength;
    let lambda_s = s.signal_wavelength.unwrap_or(2.0 * lambda_p);
    let lambda_i = 1.0 / (1.0 / lambda_p - 1.0 / lambda_s);

    let cut = match s.cut_angle {
        Some(a) => a,
        None => num_err!(
            "phase-matching",
            phase_matching_angle(&material, lambda_p, s.pm_type, lambda_s, lambda_i)
        )?,
    };
    let crystal = num_err!(
        "crystal",
        CrystalSpec::new(material, cut, s.length, s.pm_type)
    )?;

    let pump = match s.envelope {
        EnvelopeChoice::Cw => PumpSpec::cw(lambda_p),
        EnvelopeChoice::Gaussian => num_err!(
            "pump",
            PumpSpec::gaussian(lambda_p, s.pump_bandwidth.unwrap_or(0.0))
        )?,
    };

    let mut notes = vec![("crystal.cut-angle-deg".into(), cut.to_degrees())];
    let xi_pump = match s.tilt {
        TiltChoice::None => None,
        TiltChoice::Explicit(a) => Some(a),
        TiltChoice::Optimal => {
            let om_s = omega_of_wavelength(lambda_s);
            let om_i = omega_of_wavelength(lambda_p) - om_s;
            let sig = num_err!("tilt", crystal.sample(WaveRole::Signal, om_s))?;
            let xi = match s.pm_type {
                PmType::TypeII => {
                    let idl = num_err!("tilt", crystal.sample(WaveRole::Idler, om_i))?;
                    num_err!("tilt", optimal_tilt_type2(&sig, &idl))?
                }
                PmType::TypeI => num_err!("tilt", optimal_tilt_type1(&sig))?,
            };
            Some(xi)
        }
        TiltChoice::GratingPair {
            groove_density_per_mm,
            order,
            diffraction_angle,
        } => {
            let gr1 = num_err!(
                "tilt",
                GratingSpec::from_diffraction_angle(
                    1e-3 / groove_density_per_mm,
                    order,
                    diffraction_angle,
                    lambda_p,
                )
            )?;
            let eps = num_err!("tilt", angular_dispersion(&gr1))?;
            let xi = tilt_from_dispersion(eps, lambda_p);
            let (gr2, setup) = num_err!("tilt", matched_pair(&gr1, lambda_s))?;
            notes.push((
                "tilt.gr2-groove-density-per-mm".into(),
                1e-3 / gr2.groove_spacing,
            ));
            notes.push(("tilt.gr2-order".into(), gr2.order as f64));
            notes.push((
                "tilt.gr2-diffraction-deg".into(),
                gr2.diffraction.to_degrees(),
            ));
            notes.push(("tilt.xi-signal-deg".into(), setup.xi_signal.to_degrees()));
            notes.push(("tilt.magnification-pump".into(), setup.mag_pump));
            Some(xi)
        }
    };
    if let Some(xi) = xi_pump {
        notes.push(("tilt.xi-pump-deg".into(), xi.to_degrees().abs()));
    }

    let tilted = xi_pump.map(|x| x != 0.0).unwrap_or(false);
    let (order, baseline_order) = match s.model {
        ModelChoice::Auto => (
            if tilted {
                ModelOrder::Taylor4
            } else {
                ModelOrder::Exact
            },
            ModelOrder::Exact,
        ),
        ModelChoice::Fixed(o) => {
            if tilted && o == ModelOrder::Exact {
                return Err(CliError::Validation(
                    "the exact model cannot represent pulse-front tilt; pick taylor2..4".into(),
                ));
            }
            (o, o)
        }
    };

    Ok(Resolved {
        crystal,
        pump,
        lambda_signal: lambda_s,
        xi_pump,
        order,
        baseline_order,
        notes,
    })
}

fn grid_for(
    r: &Resolved,
    crystal: &CrystalSpec,
    xi: Option<f64>,
    order: ModelOrder,
    points: usize,
    half_span: Option<f64>,
) -> Result<FrequencyGrid, CliError> {
    match half_span {
        Some(h) => {
            let ws = omega_of_wavelength(r.lambda_signal);
            let wi = omega_of_wavelength(r.pump.wavelength) - ws;
            num_err!("grid", FrequencyGrid::new(ws, wi, h, points))
        }
        None => num_err!(
            "grid",
            auto_grid(crystal, &r.pump, r.lambda_signal, xi, order, points)
        ),
    }
}

fn spectrum_for(
    r: &Resolved,
    crystal: &CrystalSpec,
    xi: Option<f64>,
    order: ModelOrder,
    grid: &FrequencyGrid,
) -> Result<JointSpectrum, CliError> {
    num_err!(
        "joint-spectrum",
        joint_spectrum_with_model(crystal, &r.pump, xi, grid, order)
    )
}

fn push_bandwidth_summary(summary: &mut Vec<(String, f64)>, prefix: &str, rep: &BandwidthReport) {
    summary.push((
        format!("{prefix}.singles-fwhm-nm"),
        rep.singles.lambda_fwhm * 1e9,
    ));
    summary.push((
        format!("{prefix}.singles-fwhm-rad-s"),
        rep.singles.omega_fwhm,
    ));
    summary.push((
        format!("{prefix}.antidiagonal-fwhm-nm"),
        rep.antidiagonal.lambda_fwhm * 1e9,
    ));
    summary.push((
        format!("{prefix}.antidiagonal-fwhm-rad-s"),
        rep.antidiagonal.omega_fwhm,
    ));
}

/// Execute a scenario: run the requested analyses in dependency order and
/// emit CSV plus plot-script files into the output directory.
pub fn run(
    s: &Scenario,
    source_text: &str,
    out_override: Option<PathBuf>,
    grid_override: Option<usize>,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let r = resolve(s)?;
    let hash = output::scenario_hash(source_text);
    if s.analyses.is_empty() {
        return Ok(RunReport {
            scenario_echo: crate::scenario::render(s),
            scenario_hash: hash,
            summary: r.notes,
            warnings: Vec::new(),
            manifest: Vec::new(),
            engine_version: format!("spdc-core {}", env!("CARGO_PKG_VERSION")),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    }
    let out_dir = out_override.unwrap_or_else(|| s.output_dir.clone());
    let mut ctx = OutputContext::create(&out_dir, &hash)?;
    let header = csv_header(&hash);

    let mut summary: Vec<(String, f64)> = r.notes.clone();
    let mut warnings: Vec<String> = Vec::new();
    let points = grid_override.or(s.grid_points).unwrap_or(1024);
    if points < 256 {
        warnings.push(format!(
            "grid: {points} points per axis is below the 256-point production floor"
        ));
    }

    let grid = grid_for(&r, &r.crystal, r.xi_pump, r.order, points, s.grid_half_span)?;
    let js = spectrum_for(&r, &r.crystal, r.xi_pump, r.order, &grid)?;
    for w in &js.warnings {
        warnings.push(match w {
            SpectrumWarning::SincZeroOutsideGrid => {
                "joint-spectrum: first sinc zero outside the grid span".into()
            }
        });
    }

    // untilted baseline shares everything except the tilt
    let tilted = r.xi_pump.map(|x| x != 0.0).unwrap_or(false);
    let baseline = if tilted {
        let bgrid = grid_for(&r, &r.crystal, None, r.baseline_order, points, None)?;
        Some(spectrum_for(
            &r,
            &r.crystal,
            None,
            r.baseline_order,
            &bgrid,
        )?)
    } else {
        None
    };

    for analysis in s.analyses.iter() {
        match analysis {
            Analysis::JointSpectrum => {
                ctx.write_file("joint_spectrum.csv", |w| {
                    spdc_core::export::write_joint_csv(&js, &header, w)
                })?;
                ctx.write_file("joint_spectrum.bin", |w| {
                    spdc_core::export::write_joint_binary(&js, w)
                })?;
                ctx.write_file("joint_spectrum.gp", |w| output::write_joint_gnuplot(&js, w))?;
            }
            Analysis::Bandwidth => {
                let rep = num_err!("bandwidth", bandwidth_report(&js))?;
                push_bandwidth_summary(&mut summary, "bandwidth", &rep);
                if rep.multi_lobed {
                    warnings.push("bandwidth: profile has several above-half lobes".into());
                }
                let mut rows = vec![("configured", rep)];
                if let Some(bjs) = &baseline {
                    let brep = num_err!("bandwidth", bandwidth_report(bjs))?;
                    push_bandwidth_summary(&mut summary, "bandwidth.untilted", &brep);
                    summary.push((
                        "bandwidth.antidiagonal-ratio".into(),
                        rep.antidiagonal.omega_fwhm / brep.antidiagonal.omega_fwhm,
                    ));
                    rows.push(("untilted-baseline", brep));
                }
                ctx.write_file("bandwidth.csv", |w| output::write_bandwidth_csv(&rows, w))?;
            }
            Analysis::Biphoton => {
                let wf = num_err!("biphoton", spdc_core::biphoton::temporal_biphoton(&js))?;
                summary.push(("biphoton.rms-fs".into(), wf.rms_width * 1e15));
                summary.push(("biphoton.fwhm-fs".into(), wf.fwhm * 1e15));
                summary.push((
                    "biphoton.rms-amplitude-convention-fs".into(),
                    wf.rms_width_amplitude * 1e15,
                ));
                summary.push((
                    "biphoton.transform-limit-ratio".into(),
                    wf.transform_limit_ratio,
                ));
                if wf.fwhm_ill_defined {
                    warnings
                        .push("biphoton: FWHM ill-defined (multi-lobed), widest reported".into());
                }
                ctx.write_file("biphoton.csv", |w| {
                    spdc_core::export::write_waveform_csv(&wf, &header, w)
                })?;
                ctx.write_file("biphoton.gp", |w| output::write_biphoton_gnuplot(w))?;
                if let Some(bjs) = &baseline {
                    let bwf = num_err!("biphoton", spdc_core::biphoton::temporal_biphoton(bjs))?;
                    summary.push(("biphoton.untilted.rms-fs".into(), bwf.rms_width * 1e15));
                    summary.push(("biphoton.untilted.fwhm-fs".into(), bwf.fwhm * 1e15));
                    ctx.write_file("biphoton_untilted.csv", |w| {
                        spdc_core::export::write_waveform_csv(&bwf, &header, w)
                    })?;
                }
            }
            Analysis::Entanglement => {
                if js.is_line() {
                    // cw: double-Gaussian model from the measured bandwidth
                    let rep = num_err!("entanglement", bandwidth_report(&js))?;
                    if rep.multi_lobed {
                        warnings.push(
                            "entanglement: multi-lobed spectrum, gaussian fit is approximate"
                                .into(),
                        );
                    }
                    let model = num_err!(
                        "entanglement",
                        spdc_core::entanglement::bandwidth_to_model(&rep, &r.pump)
                    )?;
                    let sim = spdc_core::entanglement::gaussian_entropy(&model);
                    summary.push(("entanglement.bandwidth-ratio".into(), model.ratio()));
                    summary.push(("entanglement.schmidt-number".into(), sim.schmidt_number));
                    summary.push(("entanglement.entropy-ebits".into(), sim.entropy));
                    ctx.write_file("entropy_table.csv", |w| {
                        output::write_entropy_table(&model, &sim, w)
                    })?;
                } else {
                    let sch = num_err!(
                        "entanglement",
                        spdc_core::entanglement::schmidt_decompose(&js)
                    )?;
                    if sch.truncated {
                        warnings.push("entanglement: spectrum clipped by the grid".into());
                    }
                    summary.push(("entanglement.schmidt-number".into(), sch.schmidt_number));
                    summary.push(("entanglement.entropy-ebits".into(), sch.entropy));
                    ctx.write_file("schmidt.csv", |w| {
                        spdc_core::export::write_schmidt_csv(&sch, &header, w)
                    })?;
                }
            }
            Analysis::ScalingSweep => {
                let rows = length_sweep_rows(&r, &s.sweep_lengths, points)?;
                let pairs: Vec<(f64, f64)> = rows.iter().map(|row| (row.0, row.1)).collect();
                match spdc_core::numeric::power_law_exponent(&pairs) {
                    Some(exp) => summary.push(("sweep.length-exponent".into(), exp)),
                    None => warnings.push(
                        "scaling-sweep: exponent undefined (degenerate length values)".into(),
                    ),
                }
                ctx.write_file("sweep.csv", |w| {
                    output::write_sweep_csv("length_m", &rows, w)
                })?;
            }
        }
    }

    let report = RunReport {
        scenario_echo: crate::scenario::render(s),
        scenario_hash: hash,
        summary,
        warnings,
        manifest: ctx.manifest_with_report(),
        engine_version: format!("spdc-core {}", env!("CARGO_PKG_VERSION")),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    ctx.write_report(&report)?;
    Ok(report)
}

/// (length or parameter value, antidiag FWHM rad/s, antidiag nm, singles nm)
type SweepRow = (f64, f64, f64, f64);

fn length_sweep_rows(
    r: &Resolved,
    lengths: &[f64],
    points: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for &l in lengths {
        let crystal = num_err!(
            "scaling-sweep",
            CrystalSpec::new(
                r.crystal.material.clone(),
                r.crystal.cut_angle,
                l,
                r.crystal.pm_type
            )
        )?;
        let grid = grid_for(r, &crystal, r.xi_pump, r.order, points, None)?;
        let js = spectrum_for(r, &crystal, r.xi_pump, r.order, &grid)?;
        let rep = num_err!("scaling-sweep", bandwidth_report(&js))?;
        rows.push((
            l,
            rep.antidiagonal.omega_fwhm,
            rep.antidiagonal.lambda_fwhm * 1e9,
            rep.singles.lambda_fwhm * 1e9,
        ));
    }
    Ok(rows)
}

/// Sweep parameter accepted by `spdc sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Length,
    Tilt,
    Wavelength,
}

impl std::str::FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "length" => Ok(SweepParameter::Length),
            "tilt" => Ok(SweepParameter::Tilt),
            "wavelength" => Ok(SweepParameter::Wavelength),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

/// Run a bandwidth sweep over `values` of `parameter`, emitting `sweep.csv`
/// and (for length sweeps) the fitted log-log exponent.
pub fn sweep(
    s: &Scenario,
    source_text: &str,
    parameter: SweepParameter,
    values: &[f64],
    out_override: Option<PathBuf>,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    if values.len() < 3 {
        return Err(CliError::Validation(format!(
            "sweep needs at least 3 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|&v| v <= 0.0) && parameter != SweepParameter::Tilt {
        return Err(CliError::Validation(
            "sweep values of a physical scale must be positive".into(),
        ));
    }

    let out_dir = out_override.unwrap_or_else(|| s.output_dir.clone());
    let hash = output::scenario_hash(source_text);
    let mut ctx = OutputContext::create(&out_dir, &hash)?;
    let mut summary = Vec::new();
    let mut warnings = Vec::new();

    let (column, rows) = match parameter {
        SweepParameter::Length => {
            let r = resolve(s)?;
            (
                "length_m",
                length_sweep_rows(&r, values, s.grid_points.unwrap_or(1024))?,
            )
        }
        SweepParameter::Tilt => {
            let mut rows = Vec::new();
            for &xi in values {
                let mut variant = s.clone();
                variant.tilt = TiltChoice::Explicit(xi);
                let r = resolve(&variant)?;
                let points = s.grid_points.unwrap_or(1024);
                let grid = grid_for(&r, &r.crystal, r.xi_pump, r.order, points, None)?;
                let js = spectrum_for(&r, &r.crystal, r.xi_pump, r.order, &grid)?;
                let rep = num_err!("sweep", bandwidth_report(&js))?;
                rows.push((
                    xi,
                    rep.antidiagonal.omega_fwhm,
                    rep.antidiagonal.lambda_fwhm * 1e9,
                    rep.singles.lambda_fwhm * 1e9,
                ));
            }
            ("tilt_rad", rows)
        }
        SweepParameter::Wavelength => {
            let mut rows = Vec::new();
            for &lam in values {
                let mut variant = s.clone();
                variant.pump_wavelength = lam;
                variant.signal_wavelength = None;
                variant.cut_angle = None; // re-matched at each wavelength
                let r = resolve(&variant)?;
                let points = s.grid_points.unwrap_or(1024);
                let grid = grid_for(&r, &r.crystal, r.xi_pump, r.order, points, None)?;
                let js = spectrum_for(&r, &r.crystal, r.xi_pump, r.order, &grid)?;
                let rep = num_err!("sweep", bandwidth_report(&js))?;
                rows.push((
                    lam,
                    rep.antidiagonal.omega_fwhm,
                    rep.antidiagonal.lambda_fwhm * 1e9,
                    rep.singles.lambda_fwhm * 1e9,
                ));
            }
            ("pump_wavelength_m", rows)
        }
    };

    if parameter == SweepParameter::Length {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
        match spdc_core::numeric::power_law_exponent(&pairs) {
            Some(exp) => summary.push(("sweep.length-exponent".to_string(), exp)),
            None => warnings.push("sweep: exponent undefined (degenerate length values)".into()),
        }
    }
    ctx.write_file("sweep.csv", |w| output::write_sweep_csv(column, &rows, w))?;

    let report = RunReport {
        scenario_echo: crate::scenario::render(s),
        scenario_hash: hash,
        summary,
        warnings,
        manifest: ctx.manifest_with_report(),
        engine_version: format!("spdc-core {}", env!("CARGO_PKG_VERSION")),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    ctx.write_report(&report)?;
    Ok(report)
}

fn csv_header(hash: &str) -> Vec<String> {
    vec![
        format!("scenario-hash = {hash}"),
        format!("engine = spdc-core {}", env!("CARGO_PKG_VERSION")),
    ]
}
