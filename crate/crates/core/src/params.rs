//! Physical and effective parameter sets.
//!
//! All frequencies, detunings, couplings and damping rates are angular
//! (rad/s). Lengths are in metres, masses in kilograms, powers in watts,
//! temperatures in kelvin. Position, momentum, charge and flux are the
//! dimensionless quadratures of the linearized model.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::SteadyState;

/// Reduced Planck constant, J s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact SI).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact SI).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Bose-Einstein occupation `1 / (exp(hbar*omega / (k_B*T)) - 1)`.
///
/// The `T = 0` limit is 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if !(temperature >= 0.0) {
        return Err(Error::param(
            "temperature",
            format!("must be >= 0, got {temperature}"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Laboratory-level inputs of the hybrid system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub cavity_length: f64,
    pub laser_wavelength: f64,
    pub laser_power: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub mirror_mass: f64,
    pub gamma_m: f64,
    pub gamma_at: f64,
    pub gamma_lc: f64,
    pub omega_lc: f64,
    /// Circuit inductance in henry. Only needed when a DC bias is applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inductance: Option<f64>,
    /// Atomic detuning from the laser, `omega_at - omega_l`.
    pub delta_at: f64,
    /// Cavity detuning from the laser, `omega_cav - omega_l`.
    pub delta_cav: f64,
    /// Collective atom-field coupling `sqrt(N) * G_at`.
    pub g_at_eff: f64,
    /// Bare electromechanical coupling `G_LC` entering `hbar G_LC q^2 x`.
    #[serde(default)]
    pub g_lc_bare: f64,
    #[serde(default)]
    pub dc_bias_voltage: f64,
    pub temperature: f64,
    /// Circuit bath temperature; defaults to `temperature`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_lc: Option<f64>,
    /// Scale applied to the flux-noise diffusion entry (1.0 keeps the
    /// standard diffusion matrix).
    #[serde(default = "unit", skip_serializing_if = "is_unit")]
    pub lc_noise_factor: f64,
}

/// Coefficients of the linearized fluctuation model. These are exactly the
/// symbols of the drift matrix plus the two bath occupations of the
/// diffusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveParams {
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub gamma_at: f64,
    pub gamma_lc: f64,
    pub delta_cav_eff: f64,
    pub delta_at: f64,
    pub omega_lc_eff: f64,
    pub g_om_eff: f64,
    pub g_lc_eff: f64,
    pub g_at_eff: f64,
    pub nbar_m: f64,
    pub nbar_lc: f64,
}

/// User-facing form of [`EffectiveParams`]: bath occupations may be given
/// directly or derived from temperatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveInput {
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub gamma_at: f64,
    pub gamma_lc: f64,
    pub delta_cav_eff: f64,
    pub delta_at: f64,
    pub omega_lc_eff: f64,
    pub g_om_eff: f64,
    pub g_lc_eff: f64,
    pub g_at_eff: f64,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_lc: Option<f64>,
    /// Overrides the occupation derived from `temperature`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar_m: Option<f64>,
    /// Overrides the occupation derived from `temperature_lc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar_lc: Option<f64>,
    #[serde(default = "unit", skip_serializing_if = "is_unit")]
    pub lc_noise_factor: f64,
}

/// A parameter file: either effective coefficients pinned directly or a
/// physical description that goes through the mean-field solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum ParamConfig {
    #[serde(rename = "EFFECTIVE", alias = "effective")]
    Effective(EffectiveInput),
    #[serde(rename = "PHYSICAL", alias = "physical")]
    Physical(PhysicalParams),
}

fn unit() -> f64 {
    1.0
}

fn is_unit(v: &f64) -> bool {
    *v == 1.0
}

/// How a sweepable field is expressed on a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisUnit {
    /// Angular frequency; axis values are in units of the base `omega_m`.
    OmegaM,
    /// Axis values are the raw field value in SI units.
    Si,
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(key, format!("must be finite and > 0, got {v}")))
    }
}

fn check_non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(key, format!("must be finite, got {v}")))
    }
}

fn unknown_field(name: &str, mode: &str) -> Error {
    Error::param(name, format!("not a sweepable {mode} parameter"))
}

impl PhysicalParams {
    /// Laboratory values of the `table1` preset. The circuit frequency is placed at `omega_m`, the
    /// cavity at `delta_cav = omega_m`, the atoms at `delta_at = -2.5 omega_m`,
    /// and no DC bias is applied.
    pub fn table1() -> Self {
        let omega_m = 2.0 * PI * 1e7;
        PhysicalParams {
            cavity_length: 1e-3,
            laser_wavelength: 1064e-9,
            laser_power: 35e-3,
            kappa: PI * 1e7,
            omega_m,
            mirror_mass: 10e-12,
            gamma_m: 200.0 * PI,
            gamma_at: PI * 1e7,
            gamma_lc: 200.0 * PI,
            omega_lc: omega_m,
            inductance: None,
            delta_at: -2.5 * omega_m,
            delta_cav: omega_m,
            g_at_eff: 1.2 * PI * 1e7,
            g_lc_bare: 0.0,
            dc_bias_voltage: 0.0,
            temperature: 10e-3,
            temperature_lc: None,
            lc_noise_factor: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("cavity_length", self.cavity_length)?;
        check_positive("laser_wavelength", self.laser_wavelength)?;
        check_non_negative("laser_power", self.laser_power)?;
        check_positive("kappa", self.kappa)?;
        check_positive("omega_m", self.omega_m)?;
        check_positive("mirror_mass", self.mirror_mass)?;
        check_positive("gamma_m", self.gamma_m)?;
        check_positive("gamma_at", self.gamma_at)?;
        check_positive("gamma_lc", self.gamma_lc)?;
        check_positive("omega_lc", self.omega_lc)?;
        check_finite("delta_at", self.delta_at)?;
        check_finite("delta_cav", self.delta_cav)?;
        check_non_negative("g_at_eff", self.g_at_eff)?;
        check_finite("g_lc_bare", self.g_lc_bare)?;
        check_finite("dc_bias_voltage", self.dc_bias_voltage)?;
        check_non_negative("temperature", self.temperature)?;
        if let Some(t) = self.temperature_lc {
            check_non_negative("temperature_lc", t)?;
        }
        check_non_negative("lc_noise_factor", self.lc_noise_factor)?;
        match self.inductance {
            Some(l) => check_positive("inductance", l)?,
            None if self.dc_bias_voltage != 0.0 => {
                return Err(Error::param(
                    "inductance",
                    "required when dc_bias_voltage is non-zero",
                ))
            }
            None => {}
        }
        if self.laser_frequency() + self.delta_cav <= 0.0 {
            return Err(Error::param(
                "delta_cav",
                "puts the cavity resonance at a non-positive frequency",
            ));
        }
        Ok(())
    }

    /// Laser angular frequency `2 pi c / lambda`.
    pub fn laser_frequency(&self) -> f64 {
        2.0 * PI * C_LIGHT / self.laser_wavelength
    }

    pub fn cavity_frequency(&self) -> f64 {
        self.laser_frequency() + self.delta_cav
    }

    /// Mechanical zero-point length `sqrt(hbar / (m omega_m))`.
    pub fn zero_point_position(&self) -> f64 {
        (HBAR / (self.mirror_mass * self.omega_m)).sqrt()
    }

    /// Single-photon optomechanical coupling `omega_cav x0 / L`.
    pub fn g_om(&self) -> f64 {
        self.cavity_frequency() * self.zero_point_position() / self.cavity_length
    }

    /// Circuit zero-point charge `sqrt(hbar / (L omega_LC))`; zero without
    /// an inductance.
    pub fn zero_point_charge(&self) -> f64 {
        match self.inductance {
            Some(l) => (HBAR / (l * self.omega_lc)).sqrt(),
            None => 0.0,
        }
    }

    /// DC drive of the flux quadrature, `q0 V / hbar` (rad/s).
    pub fn bias_drive(&self) -> f64 {
        if self.dc_bias_voltage == 0.0 {
            0.0
        } else {
            self.zero_point_charge() * self.dc_bias_voltage / HBAR
        }
    }

    pub fn circuit_temperature(&self) -> f64 {
        self.temperature_lc.unwrap_or(self.temperature)
    }

    pub fn field_unit(name: &str) -> Option<AxisUnit> {
        use AxisUnit::*;
        Some(match name {
            "kappa" | "omega_m" | "gamma_m" | "gamma_at" | "gamma_lc" | "omega_lc"
            | "delta_at" | "delta_cav" | "g_at_eff" | "g_lc_bare" => OmegaM,
            "cavity_length" | "laser_wavelength" | "laser_power" | "mirror_mass"
            | "inductance" | "dc_bias_voltage" | "temperature" | "temperature_lc"
            | "lc_noise_factor" => Si,
            _ => return None,
        })
    }

    /// Sets a field by its config-file name.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "cavity_length" => self.cavity_length = value,
            "laser_wavelength" => self.laser_wavelength = value,
            "laser_power" => self.laser_power = value,
            "kappa" => self.kappa = value,
            "omega_m" => self.omega_m = value,
            "mirror_mass" => self.mirror_mass = value,
            "gamma_m" => self.gamma_m = value,
            "gamma_at" => self.gamma_at = value,
            "gamma_lc" => self.gamma_lc = value,
            "omega_lc" => self.omega_lc = value,
            "inductance" => self.inductance = Some(value),
            "delta_at" => self.delta_at = value,
            "delta_cav" => self.delta_cav = value,
            "g_at_eff" => self.g_at_eff = value,
            "g_lc_bare" => self.g_lc_bare = value,
            "dc_bias_voltage" => self.dc_bias_voltage = value,
            "temperature" => self.temperature = value,
            "temperature_lc" => self.temperature_lc = Some(value),
            "lc_noise_factor" => self.lc_noise_factor = value,
            _ => return Err(unknown_field(name, "PHYSICAL")),
        }
        Ok(())
    }
}

/// Cavity drive amplitude `E = sqrt(2 P kappa / (hbar omega_l))`.
pub fn drive_amplitude(params: &PhysicalParams) -> f64 {
    (2.0 * params.laser_power * params.kappa / (HBAR * params.laser_frequency())).sqrt()
}

/// Maps a mean-field steady state onto the linearized-model coefficients.
///
/// Uses `|a_s|` for the optomechanical coupling, i.e. the laser phase is
/// chosen so that the intracavity amplitude is real and non-negative.
pub fn effective_from_physical(params: &PhysicalParams, ss: &SteadyState) -> Result<EffectiveParams> {
    let g_om = params.g_om();
    let omega_lc_eff = params.omega_lc + 2.0 * params.g_lc_bare * ss.x_s;
    let nbar_m = thermal_occupation(params.omega_m, params.temperature)?;
    let nbar_lc = thermal_occupation(omega_lc_eff, params.circuit_temperature())?;
    Ok(EffectiveParams {
        omega_m: params.omega_m,
        kappa: params.kappa,
        gamma_m: params.gamma_m,
        gamma_at: params.gamma_at,
        gamma_lc: params.gamma_lc,
        delta_cav_eff: params.delta_cav - g_om * ss.x_s,
        delta_at: params.delta_at,
        omega_lc_eff,
        g_om_eff: std::f64::consts::SQRT_2 * ss.a_s.norm() * g_om,
        g_lc_eff: 2.0 * ss.q_s * params.g_lc_bare,
        g_at_eff: params.g_at_eff,
        nbar_m,
        nbar_lc,
    })
}

impl EffectiveParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("omega_m", self.omega_m)?;
        check_positive("kappa", self.kappa)?;
        check_positive("omega_lc_eff", self.omega_lc_eff)?;
        check_non_negative("gamma_m", self.gamma_m)?;
        check_non_negative("gamma_at", self.gamma_at)?;
        check_non_negative("gamma_lc", self.gamma_lc)?;
        check_finite("delta_cav_eff", self.delta_cav_eff)?;
        check_finite("delta_at", self.delta_at)?;
        check_finite("g_om_eff", self.g_om_eff)?;
        check_finite("g_lc_eff", self.g_lc_eff)?;
        check_finite("g_at_eff", self.g_at_eff)?;
        check_non_negative("nbar_m", self.nbar_m)?;
        check_non_negative("nbar_lc", self.nbar_lc)?;
        Ok(())
    }
}

impl EffectiveInput {
    /// The base point shared by the bundled figure recipes: `Delta'_cav = omega_LC'
    /// = omega_m`, `G'_om = 0.6 omega_m`, `G'_LC = 0.4 omega_m`, `table1` rates,
    /// `T = 10 mK` and `Delta_at = -2.5 omega_m`.
    pub fn figure_base() -> Self {
        let omega_m = 2.0 * PI * 1e7;
        EffectiveInput {
            omega_m,
            kappa: PI * 1e7,
            gamma_m: 200.0 * PI,
            gamma_at: PI * 1e7,
            gamma_lc: 200.0 * PI,
            delta_cav_eff: omega_m,
            delta_at: -2.5 * omega_m,
            omega_lc_eff: omega_m,
            g_om_eff: 0.6 * omega_m,
            g_lc_eff: 0.4 * omega_m,
            g_at_eff: 1.2 * PI * 1e7,
            temperature: 10e-3,
            temperature_lc: None,
            nbar_m: None,
            nbar_lc: None,
            lc_noise_factor: 1.0,
        }
    }

    pub fn resolve(&self) -> Result<EffectiveParams> {
        check_non_negative("temperature", self.temperature)?;
        check_non_negative("lc_noise_factor", self.lc_noise_factor)?;
        check_positive("omega_m", self.omega_m)?;
        check_positive("omega_lc_eff", self.omega_lc_eff)?;
        let nbar_m = match self.nbar_m {
            Some(n) => n,
            None => thermal_occupation(self.omega_m, self.temperature)?,
        };
        let t_lc = self.temperature_lc.unwrap_or(self.temperature);
        check_non_negative("temperature_lc", t_lc)?;
        let nbar_lc = match self.nbar_lc {
            Some(n) => n,
            None => thermal_occupation(self.omega_lc_eff, t_lc)?,
        };
        let p = EffectiveParams {
            omega_m: self.omega_m,
            kappa: self.kappa,
            gamma_m: self.gamma_m,
            gamma_at: self.gamma_at,
            gamma_lc: self.gamma_lc,
            delta_cav_eff: self.delta_cav_eff,
            delta_at: self.delta_at,
            omega_lc_eff: self.omega_lc_eff,
            g_om_eff: self.g_om_eff,
            g_lc_eff: self.g_lc_eff,
            g_at_eff: self.g_at_eff,
            nbar_m,
            nbar_lc,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn field_unit(name: &str) -> Option<AxisUnit> {
        use AxisUnit::*;
        Some(match name {
            "omega_m" | "kappa" | "gamma_m" | "gamma_at" | "gamma_lc" | "delta_cav_eff"
            | "delta_at" | "omega_lc_eff" | "g_om_eff" | "g_lc_eff" | "g_at_eff" => OmegaM,
            "temperature" | "temperature_lc" | "nbar_m" | "nbar_lc" | "lc_noise_factor" => Si,
            _ => return None,
        })
    }

    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "omega_m" => self.omega_m = value,
            "kappa" => self.kappa = value,
            "gamma_m" => self.gamma_m = value,
            "gamma_at" => self.gamma_at = value,
            "gamma_lc" => self.gamma_lc = value,
            "delta_cav_eff" => self.delta_cav_eff = value,
            "delta_at" => self.delta_at = value,
            "omega_lc_eff" => self.omega_lc_eff = value,
            "g_om_eff" => self.g_om_eff = value,
            "g_lc_eff" => self.g_lc_eff = value,
            "g_at_eff" => self.g_at_eff = value,
            "temperature" => self.temperature = value,
            "temperature_lc" => self.temperature_lc = Some(value),
            "nbar_m" => self.nbar_m = Some(value),
            "nbar_lc" => self.nbar_lc = Some(value),
            "lc_noise_factor" => self.lc_noise_factor = value,
            _ => return Err(unknown_field(name, "EFFECTIVE")),
        }
        Ok(())
    }
}

impl ParamConfig {
    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn omega_m(&self) -> f64 {
        match self {
            ParamConfig::Effective(p) => p.omega_m,
            ParamConfig::Physical(p) => p.omega_m,
        }
    }

    pub fn lc_noise_factor(&self) -> f64 {
        match self {
            ParamConfig::Effective(p) => p.lc_noise_factor,
            ParamConfig::Physical(p) => p.lc_noise_factor,
        }
    }

    pub fn field_unit(&self, name: &str) -> Option<AxisUnit> {
        match self {
            ParamConfig::Effective(_) => EffectiveInput::field_unit(name),
            ParamConfig::Physical(_) => PhysicalParams::field_unit(name),
        }
    }

    pub fn set_field(&mut self, name: &str, value: f64) -> Result<()> {
        match self {
            ParamConfig::Effective(p) => p.set_field(name, value),
            ParamConfig::Physical(p) => p.set_field(name, value),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ParamConfig::Effective(p) => p.resolve().map(|_| ()),
            ParamConfig::Physical(p) => p.validate(),
        }
    }
}
