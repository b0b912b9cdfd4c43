//! Reading angle files.
//!
//! Numbers may be separated by whitespace, commas or semicolons, any number
//! per line. `#` starts a comment.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{EssError, Result};
use crate::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Degrees,
    Radians,
}

impl AngleUnit {
    /// Shift applied when none is given: degrees are assumed to be compass
    /// bearings in `[0, 360)` and are moved onto `[-pi, pi)` by `-pi`.
    pub fn default_shift(self) -> f64 {
        match self {
            AngleUnit::Degrees => -PI,
            AngleUnit::Radians => 0.0,
        }
    }
}

impl FromStr for AngleUnit {
    type Err = EssError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deg" | "degree" | "degrees" => Ok(AngleUnit::Degrees),
            "rad" | "radian" | "radians" => Ok(AngleUnit::Radians),
            other => Err(EssError::InvalidConfig(format!(
                "unknown angle unit {other:?} (expected degrees or radians)"
            ))),
        }
    }
}

impl fmt::Display for AngleUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleUnit::Degrees => "degrees",
            AngleUnit::Radians => "radians",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub unit: AngleUnit,
    /// Radians added after unit conversion, before wrapping.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleDataset {
    pub name: String,
    /// Radians in `[-pi, pi)`.
    pub angles: Vec<f64>,
    pub provenance: Provenance,
}

impl AngleDataset {
    pub fn from_text(name: &str, text: &str, unit: AngleUnit, shift: Option<f64>) -> Result<Self> {
        let raw = parse_numbers(text)?;
        let shift = shift.unwrap_or_else(|| unit.default_shift());
        let angles = raw
            .into_iter()
            .map(|v| {
                let rad = match unit {
                    AngleUnit::Degrees => v.to_radians(),
                    AngleUnit::Radians => v,
                };
                wrap_angle(rad + shift)
            })
            .collect();
        Ok(Self {
            name: name.to_string(),
            angles,
            provenance: Provenance {
                source: name.to_string(),
                unit,
                shift,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// SHA-256 of the transformed angles, each rounded to 1e-9 rad and
    /// written one per line with nine decimals.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for a in &self.angles {
            h.update(format!("{a:.9}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Reads `path`, converts to radians, adds `shift` (default per unit) and
/// wraps onto `[-pi, pi)`.
pub fn ingest(path: impl AsRef<Path>, unit: AngleUnit, shift: Option<f64>) -> Result<AngleDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| EssError::Io(format!("{}: {e}", path.display())))?;
    let mut ds = AngleDataset::from_text(&path.display().to_string(), &text, unit, shift)?;
    if let Some(stem) = path.file_stem() {
        ds.name = stem.to_string_lossy().into_owned();
    }
    Ok(ds)
}

/// Every number in `text`; errors name the 1-based line of the first bad
/// token.
pub fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for tok in content
            .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
            .filter(|t| !t.is_empty())
        {
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    return Err(EssError::Parse {
                        line: i + 1,
                        token: tok.to_string(),
                    })
                }
            }
        }
    }
    if out.is_empty() {
        return Err(EssError::InsufficientData { needed: 1, got: 0 });
    }
    Ok(out)
}
