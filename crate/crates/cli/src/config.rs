use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ppsim::{BellKind, PpsParams, DEFAULT_TOLERANCE};

use crate::angles::parse_angle;
use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PPSIM_OUTPUT_DIR";

/// Row cap for grid scans.
pub const MAX_GRID_ROWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Gen,
    Verify,
    Bell,
    Ghz,
    Chsh,
    Density,
    NotDemo,
    Resources,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Gen => "gen",
            Protocol::Verify => "verify",
            Protocol::Bell => "bell",
            Protocol::Ghz => "ghz",
            Protocol::Chsh => "chsh",
            Protocol::Density => "density",
            Protocol::NotDemo => "not-demo",
            Protocol::Resources => "resources",
        }
    }

    fn supports_csv(&self) -> bool {
        matches!(self, Protocol::Bell | Protocol::Ghz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// An angle in a config file: a number of radians or an expression like `"pi/4"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Radians(f64),
    Expr(String),
}

impl AngleSpec {
    pub fn radians(&self) -> Result<f64, CliError> {
        match self {
            AngleSpec::Radians(v) => Ok(*v),
            AngleSpec::Expr(s) => parse_angle(s).map_err(CliError::Usage),
        }
    }
}

fn default_p() -> u32 {
    3
}

fn default_s() -> u32 {
    2
}

fn default_grid() -> usize {
    16
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Everything one run needs. Mirrors the JSON accepted by `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Protocol,
    #[serde(default = "default_p")]
    pub p: u32,
    #[serde(default = "default_s")]
    pub s: u32,
    /// Ascending coefficients, monic; defaults to the built-in table.
    #[serde(default)]
    pub poly: Option<Vec<u32>>,
    #[serde(default)]
    pub variant: Option<BellKind>,
    #[serde(default)]
    pub parties: Option<usize>,
    #[serde(default)]
    pub angles: Option<Vec<AngleSpec>>,
    /// Field labels as antilog exponents `j` (label `alpha^j`).
    #[serde(default)]
    pub labels: Option<Vec<usize>>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Real amplitudes for `not-demo`; both default to `1/sqrt 2`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl RunConfig {
    pub fn new(protocol: Protocol) -> Self {
        Self {
            protocol,
            p: default_p(),
            s: default_s(),
            poly: None,
            variant: None,
            parties: None,
            angles: None,
            labels: None,
            grid: default_grid(),
            alpha: None,
            beta: None,
            output: None,
            format: None,
            tolerance: default_tolerance(),
        }
    }

    pub fn with_field(mut self, p: u32, s: u32) -> Self {
        self.p = p;
        self.s = s;
        self
    }

    pub fn with_angles(mut self, angles: &[f64]) -> Self {
        self.angles = Some(angles.iter().map(|&a| AngleSpec::Radians(a)).collect());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad config: {e}")))
    }

    pub fn params(&self) -> Result<PpsParams, CliError> {
        let params = match &self.poly {
            Some(poly) => PpsParams::new(self.p, self.s, poly.clone()),
            None => PpsParams::from_table(self.p, self.s),
        };
        params.map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(if self.protocol.supports_csv() {
            Format::Csv
        } else {
            Format::Json
        })
    }

    pub fn variant(&self) -> BellKind {
        self.variant.unwrap_or(BellKind::PsiPlus)
    }

    pub fn angles(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.angles
            .as_ref()
            .map(|a| a.iter().map(AngleSpec::radians).collect())
            .transpose()
    }

    /// Number of fields the protocol acts on, if it has one.
    pub fn field_count(&self) -> Option<usize> {
        match self.protocol {
            Protocol::Bell | Protocol::Chsh => Some(2),
            Protocol::Ghz => Some(self.parties.unwrap_or(3)),
            Protocol::Density => Some(self.parties.unwrap_or(2)),
            Protocol::NotDemo => Some(1),
            Protocol::Resources => Some(self.parties.unwrap_or(3)),
            Protocol::Gen | Protocol::Verify => None,
        }
    }

    /// Reject inconsistent settings before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Usage(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.grid == 0 {
            return Err(CliError::Usage("grid must be >= 1".into()));
        }
        if self.format() == Format::Csv && !self.protocol.supports_csv() {
            return Err(CliError::Usage(format!(
                "{} emits JSON only",
                self.protocol.name()
            )));
        }
        let angles = self.angles()?;
        match self.protocol {
            Protocol::Ghz if self.parties.unwrap_or(3) < 3 => {
                return Err(CliError::Usage("ghz needs --parties >= 3".into()));
            }
            Protocol::Density if self.parties.is_some_and(|n| n < 3) => {
                return Err(CliError::Usage(
                    "density: --parties selects a GHZ state and must be >= 3".into(),
                ));
            }
            Protocol::Resources if self.parties.is_some_and(|n| n < 2) => {
                return Err(CliError::Usage("resources needs --parties >= 2".into()));
            }
            _ => {}
        }
        if let Some(angles) = &angles {
            let expected = match self.protocol {
                Protocol::Chsh => Some(4),
                Protocol::Bell | Protocol::Ghz => self.field_count(),
                _ => None,
            };
            match expected {
                Some(n) if n != angles.len() => {
                    return Err(CliError::Usage(format!(
                        "{} expects {n} angles, got {}",
                        self.protocol.name(),
                        angles.len()
                    )));
                }
                None => {
                    return Err(CliError::Usage(format!(
                        "{} takes no angles",
                        self.protocol.name()
                    )));
                }
                _ => {}
            }
        } else if self.protocol == Protocol::Ghz {
            let rows = self
                .grid
                .checked_pow(self.parties.unwrap_or(3) as u32)
                .filter(|&r| r <= MAX_GRID_ROWS);
            if rows.is_none() {
                return Err(CliError::Usage(format!(
                    "grid scan of {}^{} points exceeds {MAX_GRID_ROWS} rows; pass --angles or a smaller --grid",
                    self.grid,
                    self.parties.unwrap_or(3)
                )));
            }
        }
        if let (Some(labels), Some(n)) = (&self.labels, self.field_count()) {
            if labels.len() != n {
                return Err(CliError::Usage(format!(
                    "{} expects {n} labels, got {}",
                    self.protocol.name(),
                    labels.len()
                )));
            }
        }
        Ok(())
    }
}
