//! File exports: CSV writers with `#`-prefixed unit headers, and the
//! versioned binary grid dump.
//!
//! Binary layout, little-endian, 64-byte header:
//!
//! ```text
//! offset  size  field
//!      0     8  magic "SPDCJSA1"
//!      8     4  u32 version (1)
//!     12     4  u32 points per axis
//!     16     8  f64 signal centre (rad/s)
//!     24     8  f64 idler centre (rad/s)
//!     32     8  f64 half-span (rad/s)
//!     40     4  u32 kind (0 = antidiagonal line, 1 = full grid)
//!     44     4  u32 reserved (0)
//!     48     8  f64 phase offset (rad)
//!     56     8  reserved (0)
//!     64     .  amplitude data: (re, im) f64 pairs, row-major for grids
//! ```

use crate::biphoton::BiphotonWaveform;
use crate::entanglement::SchmidtSpectrum;
use crate::grid::FrequencyGrid;
use crate::phase_matching::{Amplitude, JointSpectrum, ModelTag};
use num_complex::Complex64;
use std::io::{self, Read, Write};

pub const BINARY_MAGIC: &[u8; 8] = b"SPDCJSA1";
pub const BINARY_VERSION: u32 = 1;

/// CSV of the joint spectrum: `omega_s, omega_i, re, im` (detunings, rad/s).
pub fn write_joint_csv(
    js: &JointSpectrum,
    extra_header: &[String],
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# joint spectral amplitude")?;
    for line in extra_header {
        writeln!(out, "# {line}")?;
    }
    writeln!(
        out,
        "# columns: omega_s_detuning[rad/s], omega_i_detuning[rad/s], re_phi, im_phi"
    )?;
    writeln!(out, "# phase_offset_rad = {:.12e}", js.phase_offset)?;
    let om = js.grid.detunings();
    match &js.amplitude {
        Amplitude::Line(v) => {
            for (k, phi) in v.iter().enumerate() {
                writeln!(
                    out,
                    "{:.12e},{:.12e},{:.12e},{:.12e}",
                    om[k], -om[k], phi.re, phi.im
                )?;
            }
        }
        Amplitude::Grid(a) => {
            for (j, &os) in om.iter().enumerate() {
                for (k, &oi) in om.iter().enumerate() {
                    let phi = a[(j, k)];
                    writeln!(
                        out,
                        "{:.12e},{:.12e},{:.12e},{:.12e}",
                        os, oi, phi.re, phi.im
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// CSV of the temporal biphoton: `tau_fs, density, re, im`.
pub fn write_waveform_csv(
    w: &BiphotonWaveform,
    extra_header: &[String],
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# temporal biphoton")?;
    for line in extra_header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# columns: tau[fs], abs_psi_sq, re_psi, im_psi")?;
    for (t, a) in w.tau.iter().zip(&w.amplitude) {
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            t * 1e15,
            a.norm_sqr(),
            a.re,
            a.im
        )?;
    }
    Ok(())
}

/// CSV of Schmidt coefficients: `n, lambda_n`, then a summary comment.
pub fn write_schmidt_csv(
    s: &SchmidtSpectrum,
    extra_header: &[String],
    out: &mut dyn Write,
) -> io::Result<()> {
    writeln!(out, "# Schmidt spectrum")?;
    for line in extra_header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# columns: n, lambda_n")?;
    for (n, l) in s.coefficients.iter().enumerate() {
        writeln!(out, "{n},{l:.12e}")?;
    }
    writeln!(
        out,
        "# summary: schmidt_number = {:.12e}, entropy_ebits = {:.12e}",
        s.schmidt_number, s.entropy
    )?;
    if s.coefficients_elided {
        writeln!(out, "# coefficients elided (mode count too large)")?;
    }
    Ok(())
}

/// Versioned binary dump of the amplitude grid.
pub fn write_joint_binary(js: &JointSpectrum, out: &mut dyn Write) -> io::Result<()> {
    let mut header = [0u8; 64];
    header[0..8].copy_from_slice(BINARY_MAGIC);
    header[8..12].copy_from_slice(&BINARY_VERSION.to_le_bytes());
    header[12..16].copy_from_slice(&(js.grid.points as u32).to_le_bytes());
    header[16..24].copy_from_slice(&js.grid.signal_center.to_le_bytes());
    header[24..32].copy_from_slice(&js.grid.idler_center.to_le_bytes());
    header[32..40].copy_from_slice(&js.grid.half_span.to_le_bytes());
    let kind: u32 = match js.amplitude {
        Amplitude::Line(_) => 0,
        Amplitude::Grid(_) => 1,
    };
    header[40..44].copy_from_slice(&kind.to_le_bytes());
    header[48..56].copy_from_slice(&js.phase_offset.to_le_bytes());
    out.write_all(&header)?;

    let mut dump = |c: &Complex64| -> io::Result<()> {
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())
    };
    match &js.amplitude {
        Amplitude::Line(v) => {
            for c in v {
                dump(c)?;
            }
        }
        Amplitude::Grid(a) => {
            for c in a.iter() {
                dump(c)?;
            }
        }
    }
    Ok(())
}

/// Read back a binary dump written by [`write_joint_binary`].
pub fn read_joint_binary(input: &mut dyn Read) -> io::Result<JointSpectrum> {
    let mut header = [0u8; 64];
    input.read_exact(&mut header)?;
    if &header[0..8] != BINARY_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported version {version}"),
        ));
    }
    let points = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let f64_at = |r: std::ops::Range<usize>| f64::from_le_bytes(header[r].try_into().unwrap());
    let signal_center = f64_at(16..24);
    let idler_center = f64_at(24..32);
    let half_span = f64_at(32..40);
    let kind = u32::from_le_bytes(header[40..44].try_into().unwrap());
    let phase_offset = f64_at(48..56);

    let grid = FrequencyGrid::new(signal_center, idler_center, half_span, points)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let count = if kind == 0 { points } else { points * points };
    let mut data = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        data.push(Complex64::new(
            f64::from_le_bytes(buf[0..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        ));
    }
    let amplitude = if kind == 0 {
        Amplitude::Line(data)
    } else {
        Amplitude::Grid(
            ndarray::Array2::from_shape_vec((points, points), data)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?,
        )
    };
    Ok(JointSpectrum {
        grid,
        amplitude,
        model: ModelTag::ExactUntilted, // not carried by the dump
        phase_offset,
        warnings: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::omega_of_wavelength;
    use proptest::prelude::*;

    fn arb_line_spectrum() -> impl Strategy<Value = JointSpectrum> {
        (4usize..7, proptest::collection::vec(-1.0f64..1.0, 128)).prop_map(|(log2n, values)| {
            let n = 1usize << log2n;
            let ws0 = omega_of_wavelength(810e-9);
            let grid = FrequencyGrid::new(ws0, ws0, 1e13, n).unwrap();
            let line: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(values[k % values.len()], values[(k + 7) % values.len()]))
                .collect();
            JointSpectrum {
                grid,
                amplitude: Amplitude::Line(line),
                model: ModelTag::ExactUntilted,
                phase_offset: 0.123,
                warnings: vec![],
            }
        })
    }

    proptest! {
        #[test]
        fn binary_round_trip(js in arb_line_spectrum()) {
            let mut buf = Vec::new();
            write_joint_binary(&js, &mut buf).unwrap();
            prop_assert_eq!(buf.len(), 64 + 16 * js.grid.points);
            let back = read_joint_binary(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back.grid.points, js.grid.points);
            prop_assert_eq!(back.phase_offset, js.phase_offset);
            match (&back.amplitude, &js.amplitude) {
                (Amplitude::Line(a), Amplitude::Line(b)) => prop_assert_eq!(a, b),
                _ => prop_assert!(false),
            }
        }
    }

    #[test]
    fn csv_headers_present() {
        let ws0 = omega_of_wavelength(810e-9);
        let grid = FrequencyGrid::new(ws0, ws0, 1e13, 16).unwrap();
        let js = JointSpectrum {
            grid,
            amplitude: Amplitude::Line(vec![Complex64::new(1.0, 0.0); 16]),
            model: ModelTag::ExactUntilted,
            phase_offset: 0.0,
            warnings: vec![],
        };
        let mut buf = Vec::new();
        write_joint_csv(&js, &["hash = abc".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# hash = abc"));
        assert!(text.contains("# columns: omega_s_detuning"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 16);
    }
}
