//! Material dispersion data: coefficient sets, the line-oriented material
//! file format, and the built-in registry.
//!
//! File grammar (one material per file, `#` starts a comment):
//!
//! ```text
//! name = BBO
//! form = quadratic
//! ordinary = 2.7359 0.01878 0.01822 -0.01354
//! extraordinary = 2.3753 0.01224 0.01667 -0.01516
//! range-um = 0.22 1.06
//! ```
//!
//! Supported `form` values (λ in micrometres throughout):
//! - `quadratic`: n² = c₀ + c₁/(λ² − c₂) + c₃·λ²              (4 coefficients)
//! - `sellmeier`: n² = 1 + Σⱼ Bⱼλ²/(λ² − Cⱼ)                  (2k coefficients, pairs Bⱼ Cⱼ)
//! - `constant`:  n  = c₀                                      (1 coefficient)

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing key `{0}` in material file")]
    MissingKey(&'static str),
    #[error("unknown material `{0}` (not a registry name and not a readable file)")]
    UnknownMaterial(String),
    #[error("wavelength {lambda_um} um outside validity range [{min_um}, {max_um}] um")]
    WavelengthOutOfRange {
        lambda_um: f64,
        min_um: f64,
        max_um: f64,
    },
    #[error("dispersion formula produced n^2 = {n_sq} at {lambda_um} um (expect 1 < n < 4)")]
    InvalidIndex { n_sq: f64, lambda_um: f64 },
}

/// Dispersion-formula variant of a coefficient set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionForm {
    /// n² = c₀ + c₁/(λ² − c₂) + c₃λ²
    Quadratic,
    /// n² = 1 + Σ Bⱼλ²/(λ² − Cⱼ)
    Sellmeier,
    /// n = c₀
    Constant,
}

/// One principal-index coefficient set with its validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierSet {
    pub material_name: String,
    pub form: DispersionForm,
    pub coefficients: Vec<f64>,
    /// Wavelength validity range in metres.
    pub range: (f64, f64),
}

impl SellmeierSet {
    pub fn new(
        material_name: impl Into<String>,
        form: DispersionForm,
        coefficients: Vec<f64>,
        range_um: (f64, f64),
    ) -> Self {
        SellmeierSet {
            material_name: material_name.into(),
            form,
            coefficients,
            range: (range_um.0 * 1e-6, range_um.1 * 1e-6),
        }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.range.0 && lambda <= self.range.1
    }

    /// Principal refractive index at vacuum wavelength `lambda` (m).
    pub fn index(&self, lambda: f64) -> Result<f64, MaterialError> {
        if !self.contains(lambda) {
            return Err(MaterialError::WavelengthOutOfRange {
                lambda_um: lambda * 1e6,
                min_um: self.range.0 * 1e6,
                max_um: self.range.1 * 1e6,
            });
        }
        let l2 = (lambda * 1e6).powi(2);
        let c = &self.coefficients;
        let n_sq = match self.form {
            DispersionForm::Quadratic => c[0] + c[1] / (l2 - c[2]) + c[3] * l2,
            DispersionForm::Sellmeier => {
                1.0 + c
                    .chunks_exact(2)
                    .map(|bc| bc[0] * l2 / (l2 - bc[1]))
                    .sum::<f64>()
            }
            DispersionForm::Constant => c[0] * c[0],
        };
        if !(n_sq > 1.0 && n_sq < 16.0) {
            return Err(MaterialError::InvalidIndex {
                n_sq,
                lambda_um: lambda * 1e6,
            });
        }
        Ok(n_sq.sqrt())
    }
}

/// Ordinary/extraordinary coefficient-set pair for a uniaxial crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub ordinary: SellmeierSet,
    pub extraordinary: SellmeierSet,
}

impl Material {
    /// Parse the line-oriented key-value material format.
    pub fn parse(text: &str) -> Result<Material, MaterialError> {
        let mut name: Option<String> = None;
        let mut form: Option<DispersionForm> = None;
        let mut ordinary: Option<Vec<f64>> = None;
        let mut extraordinary: Option<Vec<f64>> = None;
        let mut range: Option<(f64, f64)> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(MaterialError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_floats = |v: &str| -> Result<Vec<f64>, MaterialError> {
                v.split_whitespace()
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| MaterialError::Parse {
                            line: line_no,
                            message: format!("`{t}` is not a number"),
                        })
                    })
                    .collect()
            };
            match key {
                "name" => name = Some(value.to_string()),
                "form" => {
                    form = Some(match value {
                        "quadratic" => DispersionForm::Quadratic,
                        "sellmeier" => DispersionForm::Sellmeier,
                        "constant" => DispersionForm::Constant,
                        other => {
                            return Err(MaterialError::Parse {
                                line: line_no,
                                message: format!("unknown form `{other}`"),
                            })
                        }
                    })
                }
                "ordinary" => ordinary = Some(parse_floats(value)?),
                "extraordinary" => extraordinary = Some(parse_floats(value)?),
                "range-um" => {
                    let v = parse_floats(value)?;
                    if v.len() != 2 || v[0] <= 0.0 || v[1] <= v[0] {
                        return Err(MaterialError::Parse {
                            line: line_no,
                            message: "range-um needs two increasing positive values".into(),
                        });
                    }
                    range = Some((v[0], v[1]));
                }
                other => {
                    return Err(MaterialError::Parse {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        let name = name.ok_or(MaterialError::MissingKey("name"))?;
        let form = form.ok_or(MaterialError::MissingKey("form"))?;
        let ordinary = ordinary.ok_or(MaterialError::MissingKey("ordinary"))?;
        let extraordinary = extraordinary.ok_or(MaterialError::MissingKey("extraordinary"))?;
        let range = range.ok_or(MaterialError::MissingKey("range-um"))?;

        let expect = |c: &[f64]| -> Result<(), MaterialError> {
            let ok = match form {
                DispersionForm::Quadratic => c.len() == 4,
                DispersionForm::Sellmeier => !c.is_empty() && c.len().is_multiple_of(2),
                DispersionForm::Constant => c.len() == 1,
            };
            if ok {
                Ok(())
            } else {
                Err(MaterialError::Parse {
                    line: 0,
                    message: format!("coefficient count {} does not fit form", c.len()),
                })
            }
        };
        expect(&ordinary)?;
        expect(&extraordinary)?;

        Ok(Material {
            ordinary: SellmeierSet::new(name.clone(), form, ordinary, range),
            extraordinary: SellmeierSet::new(name.clone(), form, extraordinary, range),
            name,
        })
    }

    /// Look up a built-in material by (case-insensitive) name, or parse the
    /// file at `name` if it is a path.
    pub fn resolve(name: &str) -> Result<Material, MaterialError> {
        match name.to_ascii_lowercase().as_str() {
            "bbo" => Material::parse(BBO_DATA),
            "bbo-kato" => Material::parse(BBO_KATO_DATA),
            _ => match std::fs::read_to_string(name) {
                Ok(text) => Material::parse(&text),
                Err(_) => Err(MaterialError::UnknownMaterial(name.to_string())),
            },
        }
    }

    /// Test fiction: wavelength-independent indices.
    pub fn constant_index(n_o: f64, n_e: f64) -> Material {
        Material {
            name: "constant".into(),
            ordinary: SellmeierSet::new(
                "constant",
                DispersionForm::Constant,
                vec![n_o],
                (0.01, 100.0),
            ),
            extraordinary: SellmeierSet::new(
                "constant",
                DispersionForm::Constant,
                vec![n_e],
                (0.01, 100.0),
            ),
        }
    }
}

/// Default beta-barium borate coefficients (shipped file `data/bbo.mat`).
pub const BBO_DATA: &str = include_str!("../data/bbo.mat");
/// Alternate BBO coefficient set (shipped file `data/bbo_kato.mat`).
pub const BBO_KATO_DATA: &str = include_str!("../data/bbo_kato.mat");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_bbo_parses() {
        let m = Material::resolve("BBO").unwrap();
        assert_eq!(m.name, "BBO");
        assert_eq!(m.ordinary.form, DispersionForm::Quadratic);
        // frozen against an independent evaluation of the shipped set
        let n = m.ordinary.index(810e-9).unwrap();
        assert!((n - 1.6602583173).abs() < 1e-9, "n_o(810) = {n}");
        let ne = m.extraordinary.index(810e-9).unwrap();
        assert!((ne - 1.5441811980).abs() < 1e-9, "n_e(810) = {ne}");
    }

    #[test]
    fn out_of_range_rejected() {
        let m = Material::resolve("BBO").unwrap();
        assert!(matches!(
            m.ordinary.index(1.5e-6),
            Err(MaterialError::WavelengthOutOfRange { .. })
        ));
        assert!(m.ordinary.index(0.1e-6).is_err());
    }

    #[test]
    fn invalid_index_reported_as_data_error() {
        // quadratic form with a pole right inside the range drives n^2 negative
        let s = SellmeierSet::new(
            "junk",
            DispersionForm::Quadratic,
            vec![1.5, -2.0, 0.5, 0.0],
            (0.6, 0.9),
        );
        assert!(matches!(
            s.index(0.72e-6),
            Err(MaterialError::InvalidIndex { .. })
        ));
    }

    #[test]
    fn unknown_key_has_line_number() {
        let err = Material::parse("name = x\nbogus = 1\n").unwrap_err();
        match err {
            MaterialError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn index_in_physical_band_over_validity() {
        let m = Material::resolve("BBO").unwrap();
        for set in [&m.ordinary, &m.extraordinary] {
            let (lo, hi) = set.range;
            for i in 0..=200 {
                let lam = lo + (hi - lo) * i as f64 / 200.0;
                let n = set.index(lam).unwrap();
                assert!(n > 1.0 && n < 4.0);
            }
        }
    }
}
