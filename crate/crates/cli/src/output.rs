//! Output-directory management: lock file, manifest, CSV and gnuplot
//! emission, and the run report.

use crate::pipeline::{CliError, RunReport};
use sha2::{Digest, Sha256};
use spdc_core::phase_matching::{BandwidthReport, JointSpectrum};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const LOCK_FILE: &str = ".spdc.lock";
pub const REPORT_FILE: &str = "run_report.txt";

/// SHA-256 of the scenario text, hex.
pub fn scenario_hash(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Output directory with an exclusive lock held for the run's duration.
pub struct OutputContext {
    dir: PathBuf,
    hash: String,
    manifest: Vec<PathBuf>,
    lock: Option<PathBuf>,
}

impl OutputContext {
    pub fn create(dir: &Path, hash: &str) -> Result<OutputContext, CliError> {
        fs::create_dir_all(dir)?;
        let lock = dir.join(LOCK_FILE);
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
        {
            Ok(_) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(CliError::Io(format!(
                    "output directory {} is locked by another run (remove {} if stale)",
                    dir.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(e.into()),
        }
        Ok(OutputContext {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            manifest: Vec::new(),
            lock: Some(lock),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn write_file<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let path = self.dir.join(name);
        let mut f = io::BufWriter::new(fs::File::create(&path)?);
        body(&mut f)?;
        f.flush()?;
        self.manifest.push(PathBuf::from(name));
        Ok(())
    }

    pub fn manifest_with_report(&self) -> Vec<PathBuf> {
        let mut m = self.manifest.clone();
        m.push(PathBuf::from(REPORT_FILE));
        m
    }

    pub fn write_report(mut self, report: &RunReport) -> Result<(), CliError> {
        let path = self.dir.join(REPORT_FILE);
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        write_report_text(report, &mut f)?;
        f.flush()?;
        if let Some(lock) = self.lock.take() {
            let _ = fs::remove_file(lock);
        }
        Ok(())
    }
}

impl Drop for OutputContext {
    fn drop(&mut self) {
        if let Some(lock) = self.lock.take() {
            let _ = fs::remove_file(lock);
        }
    }
}

pub fn write_report_text(report: &RunReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "# run report")?;
    writeln!(out, "engine = {}", report.engine_version)?;
    writeln!(out, "scenario-hash = {}", report.scenario_hash)?;
    writeln!(out, "elapsed-ms = {:.1}", report.elapsed_ms)?;
    writeln!(out, "\n[summary]")?;
    for (k, v) in &report.summary {
        writeln!(out, "{k} = {v:.12e}")?;
    }
    writeln!(out, "\n[warnings]")?;
    for w in &report.warnings {
        writeln!(out, "- {w}")?;
    }
    writeln!(out, "\n[manifest]")?;
    for p in &report.manifest {
        writeln!(out, "{}", p.display())?;
    }
    writeln!(out, "\n[scenario]")?;
    for line in report.scenario_echo.lines() {
        writeln!(out, "  {line}")?;
    }
    Ok(())
}

pub fn write_bandwidth_csv(
    rows: &[(&str, BandwidthReport)],
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# bandwidth report")?;
    writeln!(
        out,
        "# columns: case, singles_fwhm_nm, singles_fwhm_nm_linear, singles_fwhm_rad_s, \
         antidiag_fwhm_nm, antidiag_fwhm_nm_linear, antidiag_fwhm_rad_s"
    )?;
    for (name, r) in rows {
        writeln!(
            out,
            "{name},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.singles.lambda_fwhm * 1e9,
            r.singles.lambda_fwhm_linear * 1e9,
            r.singles.omega_fwhm,
            r.antidiagonal.lambda_fwhm * 1e9,
            r.antidiagonal.lambda_fwhm_linear * 1e9,
            r.antidiagonal.omega_fwhm,
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv(
    param_column: &str,
    rows: &[(f64, f64, f64, f64)],
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# parameter sweep")?;
    writeln!(
        out,
        "# columns: {param_column}, antidiag_fwhm_rad_s, antidiag_fwhm_nm, singles_fwhm_nm"
    )?;
    for (p, dw, dlm, dls) in rows {
        writeln!(out, "{p:.12e},{dw:.12e},{dlm:.12e},{dls:.12e}")?;
    }
    Ok(())
}

pub fn write_entropy_table(
    simulated: &spdc_core::entanglement::DoubleGaussianModel,
    sim_spectrum: &spdc_core::entanglement::SchmidtSpectrum,
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# double-gaussian entanglement table")?;
    writeln!(
        out,
        "# columns: case, biphoton_bandwidth_rad_s, pump_bandwidth_rad_s, ratio, schmidt_number, entropy_ebits"
    )?;
    writeln!(
        out,
        "simulated,{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
        simulated.biphoton_bandwidth,
        simulated.pump_bandwidth,
        simulated.ratio(),
        sim_spectrum.schmidt_number,
        sim_spectrum.entropy,
    )?;
    for (label, ratio) in [("reference-3.3e6", 3.3e6), ("reference-8.4e7", 8.4e7)] {
        let model =
            spdc_core::entanglement::DoubleGaussianModel::new(1.0, ratio).expect("positive");
        let s = spdc_core::entanglement::gaussian_entropy(&model);
        writeln!(
            out,
            "{label},,,{ratio:.12e},{:.12e},{:.12e}",
            s.schmidt_number, s.entropy
        )?;
    }
    Ok(())
}

pub fn write_joint_gnuplot(js: &JointSpectrum, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "set datafile separator ','")?;
    if js.is_line() {
        writeln!(out, "set xlabel 'signal detuning (rad/s)'")?;
        writeln!(out, "set ylabel 'joint spectral density'")?;
        writeln!(
            out,
            "plot 'joint_spectrum.csv' using 1:($3**2+$4**2) with lines title 'density'"
        )?;
    } else {
        writeln!(out, "set xlabel 'signal detuning (rad/s)'")?;
        writeln!(out, "set ylabel 'idler detuning (rad/s)'")?;
        writeln!(out, "set view map")?;
        writeln!(
            out,
            "splot 'joint_spectrum.csv' using 1:2:($3**2+$4**2) with points palette pt 5 ps 0.4 title 'density'"
        )?;
    }
    Ok(())
}

pub fn write_biphoton_gnuplot(out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "set datafile separator ','")?;
    writeln!(out, "set xlabel 'tau = t1 - t2 (fs)'")?;
    writeln!(out, "set ylabel '|Psi|^2'")?;
    writeln!(
        out,
        "plot 'biphoton.csv' using 1:2 with lines title 'correlation'"
    )?;
    Ok(())
}
