//! JSON run configuration: device frequencies in explicit angular units,
//! protocol and integrator settings, optional sweep grid, and the seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{QubitId, QubitParams, ResonatorParams};
use crate::propagator::{IntegratorConfig, Method, DEFAULT_NORM_TOLERANCE};
use crate::protocol::{build_schedule, Schedule};

/// Seed used when the configuration does not set one.
pub const DEFAULT_SEED: u64 = 12345;

/// Frequency unit convention; only angular (rad/s) is supported, and the
/// field is mandatory so rad/s versus Hz can never be silently confused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub omega02: f64,
    pub omega12: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub omega_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub qubit_a: QubitSection,
    pub qubit_b: QubitSection,
    pub resonator: ResonatorSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub rabi_tilde: f64,
}

fn default_norm_tolerance() -> f64 {
    DEFAULT_NORM_TOLERANCE
}

/// Integrator overrides; `dt` left unset selects the schedule default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_norm_tolerance")]
    pub norm_tolerance: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: None,
            norm_tolerance: DEFAULT_NORM_TOLERANCE,
        }
    }
}

/// Swept quantity; grid values are dimensionless pulse-strength ratios
/// Ω̃/s, with 0 as the vanishing-Stark sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RabiOverS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// One run's complete configuration. Unknown fields are rejected so typos
/// fail loudly instead of silently running defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: Units,
    pub device: DeviceSection,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

impl RunConfig {
    /// Reference device at a detuning ratio r: g = 3.0e9 rad/s,
    /// ω_c = 1.0e11 rad/s, ω₀₂ = ω_c + r·g, ω₁₂ = ω₀₂ − 1.0e10 rad/s,
    /// Ω̃ = r·g, identical qubits.
    pub fn default_device(ratio: f64) -> Self {
        let g = 3.0e9;
        let omega_c = 1.0e11;
        let omega02 = omega_c + ratio * g;
        let qubit = QubitSection {
            omega02,
            omega12: omega02 - 1.0e10,
            g,
        };
        Self {
            units: Units::Angular,
            device: DeviceSection {
                qubit_a: qubit,
                qubit_b: qubit,
                resonator: ResonatorSection { omega_c },
            },
            protocol: ProtocolSection {
                rabi_tilde: ratio * g,
            },
            integrator: IntegratorSection::default(),
            sweep: None,
            seed: DEFAULT_SEED,
            output_path: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("configuration parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read configuration {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("device.qubit_a.omega02", self.device.qubit_a.omega02),
            ("device.qubit_a.omega12", self.device.qubit_a.omega12),
            ("device.qubit_a.g", self.device.qubit_a.g),
            ("device.qubit_b.omega02", self.device.qubit_b.omega02),
            ("device.qubit_b.omega12", self.device.qubit_b.omega12),
            ("device.qubit_b.g", self.device.qubit_b.g),
            ("device.resonator.omega_c", self.device.resonator.omega_c),
            ("protocol.rabi_tilde", self.protocol.rabi_tilde),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and positive, got {value:.6e}"
                )));
            }
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Config(format!(
                    "integrator.dt must be finite and positive, got {dt:.6e}"
                )));
            }
        }
        if !(self.integrator.norm_tolerance.is_finite() && self.integrator.norm_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "integrator.norm_tolerance must be finite and positive, got {:.6e}",
                self.integrator.norm_tolerance
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.grid.is_empty() {
                return Err(Error::Config("sweep.grid must not be empty".into()));
            }
            for &value in &sweep.grid {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::Config(format!(
                        "sweep.grid values must be finite and non-negative, got {value:.6e}"
                    )));
                }
            }
            if sweep.grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "sweep.grid must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn qubit_a(&self) -> Result<QubitParams> {
        let q = &self.device.qubit_a;
        QubitParams::new(QubitId::A, q.omega02, q.omega12, q.g)
    }

    pub fn qubit_b(&self) -> Result<QubitParams> {
        let q = &self.device.qubit_b;
        QubitParams::new(QubitId::B, q.omega02, q.omega12, q.g)
    }

    pub fn resonator(&self) -> Result<ResonatorParams> {
        ResonatorParams::new(self.device.resonator.omega_c)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        build_schedule(
            self.qubit_a()?,
            self.qubit_b()?,
            self.resonator()?,
            self.protocol.rabi_tilde,
        )
    }

    /// Integrator for this run: an explicit dt is taken as given, otherwise
    /// the schedule picks dt from its fastest retained phase; the norm
    /// tolerance always comes from the configuration.
    pub fn integrator(&self, schedule: &Schedule) -> Result<IntegratorConfig> {
        match self.integrator.dt {
            Some(dt) => {
                IntegratorConfig::new(Method::RungeKutta4, dt, self.integrator.norm_tolerance)
            }
            None => {
                let base = schedule.default_integrator()?;
                IntegratorConfig::new(base.method, base.dt, self.integrator.norm_tolerance)
            }
        }
    }
}
