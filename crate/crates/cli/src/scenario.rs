//! Scenario configuration: a line-oriented `[section]` / `key = value`
//! format with SI-unit suffixes.
//!
//! ```text
//! [crystal]
//! material = BBO            # registry name or a material-file path
//! pm-type = type-II
//! length = 2 mm
//! # cut-angle = 41.79 deg   # optional; solved from phase matching if absent
//!
//! [pump]
//! wavelength = 405 nm
//! envelope = cw             # cw | gaussian
//! # bandwidth = 2 THz       # gaussian only, intensity FWHM (THz = ordinary frequency)
//!
//! [signal]                  # optional; defaults to the degenerate pair
//! # wavelength = 810 nm
//!
//! [tilt]                    # optional; defaults to mode = none
//! mode = explicit           # none | explicit | optimal | grating-pair
//! angle = 38 deg            # explicit only
//! # groove-density = 1200 /mm     # grating-pair only
//! # order = -1
//! # diffraction-angle = -52 deg
//!
//! [grid]                    # optional
//! # points = 1024           # power of two
//! # half-span = 100 THz
//! # model = auto            # auto | exact | taylor2 | taylor3 | taylor4
//!
//! [run]
//! analyses = joint-spectrum, bandwidth
//! output-dir = out/fig3
//! # lengths = 1 mm, 2 mm, 4 mm, 8 mm   # scaling-sweep values
//! ```
//!
//! Unsuffixed numbers are strict SI (metres, radians, rad/s). Frequency
//! suffixes (THz/GHz/MHz) denote ordinary frequency and are converted by
//! 2π. Rendered scenarios use bare SI values, so render → parse round-trips
//! exactly.

use spdc_core::dispersion::PmType;
use spdc_core::phase_matching::ModelOrder;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{}", self.render())]
pub struct ScenarioErrors {
    pub errors: Vec<(usize, String)>,
}

impl ScenarioErrors {
    fn render(&self) -> String {
        let mut s = String::from("invalid scenario:");
        for (line, msg) in &self.errors {
            if *line == 0 {
                let _ = write!(s, "\n  {msg}");
            } else {
                let _ = write!(s, "\n  line {line}: {msg}");
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeChoice {
    Cw,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltChoice {
    None,
    /// Pump pulse-front tilt in radians.
    Explicit(f64),
    /// Bandwidth-maximizing tilt for the crystal's phase-matching type.
    Optimal,
    GratingPair {
        groove_density_per_mm: f64,
        order: i32,
        diffraction_angle: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Auto,
    Fixed(ModelOrder),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Analysis {
    JointSpectrum,
    Bandwidth,
    Biphoton,
    Entanglement,
    ScalingSweep,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::JointSpectrum => "joint-spectrum",
            Analysis::Bandwidth => "bandwidth",
            Analysis::Biphoton => "biphoton",
            Analysis::Entanglement => "entanglement",
            Analysis::ScalingSweep => "scaling-sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub material: String,
    pub pm_type: PmType,
    /// Crystal length, metres.
    pub length: f64,
    /// Cut angle override, radians.
    pub cut_angle: Option<f64>,
    /// Pump central wavelength, metres.
    pub pump_wavelength: f64,
    pub envelope: EnvelopeChoice,
    /// Gaussian pump intensity-FWHM bandwidth, rad/s.
    pub pump_bandwidth: Option<f64>,
    /// Signal central wavelength, metres (degenerate when absent).
    pub signal_wavelength: Option<f64>,
    pub tilt: TiltChoice,
    pub grid_points: Option<usize>,
    /// Grid half-span override, rad/s.
    pub grid_half_span: Option<f64>,
    pub model: ModelChoice,
    pub analyses: BTreeSet<Analysis>,
    /// Crystal lengths for the scaling sweep, metres.
    pub sweep_lengths: Vec<f64>,
    pub output_dir: PathBuf,
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Angle,
    AngularFrequency,
}

fn parse_quantity(value: &str, dim: Dim) -> Result<f64, String> {
    let value = value.trim();
    let (num_str, unit) = match value.find(|c: char| c.is_ascii_alphabetic() || c == '/') {
        Some(idx) => (value[..idx].trim(), value[idx..].trim()),
        None => (value, ""),
    };
    let num: f64 = num_str
        .parse()
        .map_err(|_| format!("`{num_str}` is not a number"))?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let scale = match (dim, unit) {
        (Dim::Length, "") | (Dim::Length, "m") => 1.0,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Length, "um") => 1e-6,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Angle, "") | (Dim::Angle, "rad") => 1.0,
        (Dim::Angle, "deg") => std::f64::consts::PI / 180.0,
        (Dim::AngularFrequency, "") => 1.0,
        (Dim::AngularFrequency, "THz") => two_pi * 1e12,
        (Dim::AngularFrequency, "GHz") => two_pi * 1e9,
        (Dim::AngularFrequency, "MHz") => two_pi * 1e6,
        (Dim::AngularFrequency, "Hz") => two_pi,
        _ => return Err(format!("unit `{unit}` does not fit this key")),
    };
    Ok(num * scale)
}

struct Collector {
    errors: Vec<(usize, String)>,
}

impl Collector {
    fn push(&mut self, line: usize, msg: impl Into<String>) {
        self.errors.push((line, msg.into()));
    }
}

/// Parse and fully validate a scenario, reporting every error found.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioErrors> {
    let mut c = Collector { errors: Vec::new() };

    // (section, key, value, line)
    let mut entries: Vec<(String, String, String, usize)> = Vec::new();
    let mut section = String::new();
    let mut sections_seen: BTreeSet<String> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if !["crystal", "pump", "signal", "tilt", "grid", "run"].contains(&section.as_str()) {
                c.push(line_no, format!("unknown section `[{section}]`"));
            }
            sections_seen.insert(section.clone());
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                if section.is_empty() {
                    c.push(
                        line_no,
                        format!("`{}` appears before any [section]", k.trim()),
                    );
                } else {
                    entries.push((
                        section.clone(),
                        k.trim().to_string(),
                        v.trim().to_string(),
                        line_no,
                    ));
                }
            }
            None => c.push(line_no, format!("expected `key = value`, got `{line}`")),
        }
    }

    for required in ["crystal", "pump", "run"] {
        if !sections_seen.contains(required) {
            c.push(0, format!("missing required section `[{required}]`"));
        }
    }

    let mut material = None;
    let mut pm_type = None;
    let mut length = None;
    let mut cut_angle = None;
    let mut pump_wavelength = None;
    let mut envelope = None;
    let mut pump_bandwidth = None;
    let mut signal_wavelength = None;
    let mut tilt_mode: Option<(String, usize)> = None;
    let mut tilt_angle = None;
    let mut groove_density = None;
    let mut order = None;
    let mut diffraction_angle = None;
    let mut grid_points = None;
    let mut grid_half_span = None;
    let mut model = ModelChoice::Auto;
    let mut analyses: Option<(BTreeSet<Analysis>, usize)> = None;
    let mut sweep_lengths: Vec<f64> = Vec::new();
    let mut output_dir = None;

    for (sec, key, value, line) in &entries {
        let line = *line;
        let quantity = |c: &mut Collector, dim| match parse_quantity(value, dim) {
            Ok(v) => Some(v),
            Err(e) => {
                c.push(line, format!("{key}: {e}"));
                None
            }
        };
        match (sec.as_str(), key.as_str()) {
            ("crystal", "material") => material = Some(value.clone()),
            ("crystal", "pm-type") => match value.as_str() {
                "type-I" | "type-1" => pm_type = Some(PmType::TypeI),
                "type-II" | "type-2" => pm_type = Some(PmType::TypeII),
                other => c.push(
                    line,
                    format!("pm-type must be type-I or type-II, got `{other}`"),
                ),
            },
            ("crystal", "length") => {
                if let Some(v) = quantity(&mut c, Dim::Length) {
                    if v > 0.0 {
                        length = Some(v);
                    } else {
                        c.push(
                            line,
                            format!("crystal length must satisfy L > 0, got {v} m"),
                        );
                    }
                }
            }
            ("crystal", "cut-angle") => {
                if let Some(v) = quantity(&mut c, Dim::Angle) {
                    if (0.0..=std::f64::consts::FRAC_PI_2).contains(&v) {
                        cut_angle = Some(v);
                    } else {
                        c.push(line, "cut-angle must lie in [0, 90 deg]".to_string());
                    }
                }
            }
            ("pump", "wavelength") => {
                if let Some(v) = quantity(&mut c, Dim::Length) {
                    if v > 0.0 {
                        pump_wavelength = Some(v);
                    } else {
                        c.push(line, "pump wavelength must be positive".to_string());
                    }
                }
            }
            ("pump", "envelope") => match value.as_str() {
                "cw" => envelope = Some(EnvelopeChoice::Cw),
                "gaussian" => envelope = Some(EnvelopeChoice::Gaussian),
                other => c.push(
                    line,
                    format!("envelope must be cw or gaussian, got `{other}`"),
                ),
            },
            ("pump", "bandwidth") => {
                if let Some(v) = quantity(&mut c, Dim::AngularFrequency) {
                    if v > 0.0 {
                        pump_bandwidth = Some(v);
                    } else {
                        c.push(line, "pump bandwidth must be positive".to_string());
                    }
                }
            }
            ("signal", "wavelength") => signal_wavelength = quantity(&mut c, Dim::Length),
            ("tilt", "mode") => tilt_mode = Some((value.clone(), line)),
            ("tilt", "angle") => tilt_angle = quantity(&mut c, Dim::Angle),
            ("tilt", "groove-density") => {
                let v = value.trim_end_matches("/mm").trim();
                match v.parse::<f64>() {
                    Ok(d) if d > 0.0 => groove_density = Some(d),
                    _ => c.push(line, format!("groove-density: `{value}` is not per-mm")),
                }
            }
            ("tilt", "order") => match value.parse::<i32>() {
                Ok(m) => order = Some(m),
                Err(_) => c.push(line, format!("order: `{value}` is not an integer")),
            },
            ("tilt", "diffraction-angle") => diffraction_angle = quantity(&mut c, Dim::Angle),
            ("grid", "points") => match value.parse::<usize>() {
                Ok(n) if n.is_power_of_two() && n >= 16 => grid_points = Some(n),
                _ => c.push(
                    line,
                    format!("points must be a power of two >= 16, got `{value}`"),
                ),
            },
            ("grid", "half-span") => grid_half_span = quantity(&mut c, Dim::AngularFrequency),
            ("grid", "model") => match value.as_str() {
                "auto" => model = ModelChoice::Auto,
                "exact" => model = ModelChoice::Fixed(ModelOrder::Exact),
                "taylor2" => model = ModelChoice::Fixed(ModelOrder::Taylor2),
                "taylor3" => model = ModelChoice::Fixed(ModelOrder::Taylor3),
                "taylor4" => model = ModelChoice::Fixed(ModelOrder::Taylor4),
                other => c.push(line, format!("unknown model `{other}`")),
            },
            ("run", "analyses") => {
                let mut set = BTreeSet::new();
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match item {
                        "joint-spectrum" => drop(set.insert(Analysis::JointSpectrum)),
                        "bandwidth" => drop(set.insert(Analysis::Bandwidth)),
                        "biphoton" => drop(set.insert(Analysis::Biphoton)),
                        "entanglement" => drop(set.insert(Analysis::Entanglement)),
                        "scaling-sweep" => drop(set.insert(Analysis::ScalingSweep)),
                        other => c.push(line, format!("unknown analysis `{other}`")),
                    }
                }
                analyses = Some((set, line));
            }
            ("run", "lengths") => {
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match parse_quantity(item, Dim::Length) {
                        Ok(v) if v > 0.0 => sweep_lengths.push(v),
                        Ok(v) => c.push(line, format!("sweep length must be positive, got {v} m")),
                        Err(e) => c.push(line, format!("lengths: {e}")),
                    }
                }
            }
            ("run", "output-dir") => output_dir = Some(PathBuf::from(value)),
            (sec, key) => c.push(line, format!("unknown key `{key}` in section `[{sec}]`")),
        }
    }

    // cross-field validation
    let envelope = envelope.unwrap_or(EnvelopeChoice::Cw);
    if envelope == EnvelopeChoice::Gaussian && pump_bandwidth.is_none() {
        c.push(0, "gaussian envelope requires `bandwidth` in [pump]");
    }
    if envelope == EnvelopeChoice::Cw && pump_bandwidth.is_some() {
        c.push(0, "`bandwidth` is only meaningful for a gaussian envelope");
    }

    let tilt = match tilt_mode {
        None => TiltChoice::None,
        Some((mode, line)) => match mode.as_str() {
            "none" => TiltChoice::None,
            "optimal" => TiltChoice::Optimal,
            "explicit" => match tilt_angle {
                Some(a) => TiltChoice::Explicit(a),
                None => {
                    c.push(line, "tilt mode `explicit` requires `angle`");
                    TiltChoice::None
                }
            },
            "grating-pair" => match (groove_density, order, diffraction_angle) {
                (Some(d), Some(m), Some(b)) => TiltChoice::GratingPair {
                    groove_density_per_mm: d,
                    order: m,
                    diffraction_angle: b,
                },
                _ => {
                    c.push(
                        line,
                        "tilt mode `grating-pair` requires `groove-density`, `order` and `diffraction-angle`",
                    );
                    TiltChoice::None
                }
            },
            other => {
                c.push(line, format!("unknown tilt mode `{other}`"));
                TiltChoice::None
            }
        },
    };

    let analyses = match analyses {
        Some((set, line)) => {
            if set.contains(&Analysis::ScalingSweep) && sweep_lengths.is_empty() {
                c.push(line, "scaling-sweep requires `lengths` in [run]");
            }
            if set.contains(&Analysis::Biphoton) && envelope != EnvelopeChoice::Cw {
                c.push(line, "biphoton analysis requires a cw pump envelope");
            }
            set
        }
        None => {
            if sections_seen.contains("run") {
                c.push(0, "missing `analyses` in [run] (may be an empty list)");
            }
            BTreeSet::new()
        }
    };

    if sections_seen.contains("crystal") {
        if material.is_none() {
            c.push(0, "missing `material` in [crystal]");
        }
        if pm_type.is_none() {
            c.push(0, "missing `pm-type` in [crystal]");
        }
        if length.is_none() && !c.errors.iter().any(|(_, m)| m.contains("L > 0")) {
            c.push(0, "missing `length` in [crystal]");
        }
    }
    if sections_seen.contains("pump") && pump_wavelength.is_none() {
        c.push(0, "missing `wavelength` in [pump]");
    }

    // the referenced material must exist (registry name or readable file)
    if let Some(name) = &material {
        if let Err(e) = spdc_core::material::Material::resolve(name) {
            c.push(0, format!("material `{name}`: {e}"));
        }
    }
    if let (Some(lp), Some(ls)) = (pump_wavelength, signal_wavelength) {
        if ls <= lp {
            c.push(0, "signal wavelength must exceed the pump wavelength");
        }
    }

    if !c.errors.is_empty() {
        return Err(ScenarioErrors { errors: c.errors });
    }

    Ok(Scenario {
        material: material.unwrap(),
        pm_type: pm_type.unwrap(),
        length: length.unwrap(),
        cut_angle,
        pump_wavelength: pump_wavelength.unwrap(),
        envelope,
        pump_bandwidth,
        signal_wavelength,
        tilt,
        grid_points,
        grid_half_span,
        model,
        analyses,
        sweep_lengths,
        output_dir: output_dir.unwrap_or_else(|| PathBuf::from("out")),
    })
}

/// Canonical text form; `parse_scenario(render(s)) == s`.
pub fn render(s: &Scenario) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "[crystal]");
    let _ = writeln!(t, "material = {}", s.material);
    let _ = writeln!(
        t,
        "pm-type = {}",
        match s.pm_type {
            PmType::TypeI => "type-I",
            PmType::TypeII => "type-II",
        }
    );
    let _ = writeln!(t, "length = {}", s.length);
    if let Some(a) = s.cut_angle {
        let _ = writeln!(t, "cut-angle = {a}");
    }
    let _ = writeln!(t, "\n[pump]");
    let _ = writeln!(t, "wavelength = {}", s.pump_wavelength);
    let _ = writeln!(
        t,
        "envelope = {}",
        match s.envelope {
            EnvelopeChoice::Cw => "cw",
            EnvelopeChoice::Gaussian => "gaussian",
        }
    );
    if let Some(b) = s.pump_bandwidth {
        let _ = writeln!(t, "bandwidth = {b}");
    }
    if let Some(ls) = s.signal_wavelength {
        let _ = writeln!(t, "\n[signal]");
        let _ = writeln!(t, "wavelength = {ls}");
    }
    let _ = writeln!(t, "\n[tilt]");
    match s.tilt {
        TiltChoice::None => {
            let _ = writeln!(t, "mode = none");
        }
        TiltChoice::Explicit(a) => {
            let _ = writeln!(t, "mode = explicit");
            let _ = writeln!(t, "angle = {a}");
        }
        TiltChoice::Optimal => {
            let _ = writeln!(t, "mode = optimal");
        }
        TiltChoice::GratingPair {
            groove_density_per_mm,
            order,
            diffraction_angle,
        } => {
            let _ = writeln!(t, "mode = grating-pair");
            let _ = writeln!(t, "groove-density = {groove_density_per_mm}");
            let _ = writeln!(t, "order = {order}");
            let _ = writeln!(t, "diffraction-angle = {diffraction_angle}");
        }
    }
    let _ = writeln!(t, "\n[grid]");
    if let Some(n) = s.grid_points {
        let _ = writeln!(t, "points = {n}");
    }
    if let Some(h) = s.grid_half_span {
        let _ = writeln!(t, "half-span = {h}");
    }
    let _ = writeln!(
        t,
        "model = {}",
        match s.model {
            ModelChoice::Auto => "auto",
            ModelChoice::Fixed(ModelOrder::Exact) => "exact",
            ModelChoice::Fixed(ModelOrder::Taylor2) => "taylor2",
            ModelChoice::Fixed(ModelOrder::Taylor3) => "taylor3",
            ModelChoice::Fixed(ModelOrder::Taylor4) => "taylor4",
        }
    );
    let _ = writeln!(t, "\n[run]");
    let names: Vec<&str> = s.analyses.iter().map(|a| a.name()).collect();
    let _ = writeln!(t, "analyses = {}", names.join(", "));
    if !s.sweep_lengths.is_empty() {
        let items: Vec<String> = s.sweep_lengths.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(t, "lengths = {}", items.join(", "));
    }
    let _ = writeln!(t, "output-dir = {}", s.output_dir.display());
    t
}
