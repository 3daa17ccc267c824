//! Linearized fluctuation dynamics `du/dt = A u + n`.
//!
//! Quadrature ordering is fixed throughout the crate:
//! `u = (dx, dp, dX, dY, dx_c, dy_c, dq, dphi)`, i.e. mirror, cavity,
//! atomic ensemble, circuit. Quadratures are normalized so that each has
//! vacuum variance 1/2.

use std::fmt;
use std::str::FromStr;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::EffectiveParams;

pub type Matrix8 = SMatrix<f64, 8, 8>;

pub const QUADRATURE_NAMES: [&str; 8] = ["x", "p", "X", "Y", "x_c", "y_c", "q", "phi"];

/// One of the four oscillators, each owning two adjacent quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subsystem {
    /// Mechanical oscillator (moving mirror).
    #[serde(rename = "MO")]
    Mo,
    /// Cavity field.
    #[serde(rename = "CAV")]
    Cav,
    /// Atomic ensemble.
    #[serde(rename = "AE")]
    Ae,
    /// LC circuit.
    #[serde(rename = "LC")]
    Lc,
}

impl Subsystem {
    pub const ALL: [Subsystem; 4] = [Subsystem::Mo, Subsystem::Cav, Subsystem::Ae, Subsystem::Lc];

    /// Zero-based index of the position-like quadrature; the momentum-like
    /// one follows it.
    pub fn offset(self) -> usize {
        match self {
            Subsystem::Mo => 0,
            Subsystem::Cav => 2,
            Subsystem::Ae => 4,
            Subsystem::Lc => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Subsystem::Mo => "MO",
            Subsystem::Cav => "CAV",
            Subsystem::Ae => "AE",
            Subsystem::Lc => "LC",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MO" => Ok(Subsystem::Mo),
            "CAV" => Ok(Subsystem::Cav),
            "AE" => Ok(Subsystem::Ae),
            "LC" => Ok(Subsystem::Lc),
            other => Err(Error::param(
                "bipartitions",
                format!("unknown subsystem `{other}` (expected MO, CAV, AE or LC)"),
            )),
        }
    }
}

/// An ordered pair of distinct subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Bipartition {
    first: Subsystem,
    second: Subsystem,
}

impl Bipartition {
    pub fn new(first: Subsystem, second: Subsystem) -> Result<Self, Error> {
        if first == second {
            return Err(Error::SameSubsystem(first.to_string()));
        }
        Ok(Bipartition { first, second })
    }

    pub fn first(&self) -> Subsystem {
        self.first
    }

    pub fn second(&self) -> Subsystem {
        self.second
    }

    pub fn swapped(&self) -> Self {
        Bipartition {
            first: self.second,
            second: self.first,
        }
    }

    /// The three pairs of macroscopic subsystems.
    pub fn macroscopic() -> [Bipartition; 3] {
        use Subsystem::*;
        [
            Bipartition { first: Mo, second: Ae },
            Bipartition { first: Mo, second: Lc },
            Bipartition { first: Ae, second: Lc },
        ]
    }

    /// All six unordered pairs, in the fixed subsystem order.
    pub fn all_pairs() -> Vec<Bipartition> {
        let mut out = Vec::with_capacity(6);
        for (i, &a) in Subsystem::ALL.iter().enumerate() {
            for &b in &Subsystem::ALL[i + 1..] {
                out.push(Bipartition { first: a, second: b });
            }
        }
        out
    }

    /// Parses a comma-separated list such as `MO-AE,AE-LC`.
    pub fn parse_list(s: &str) -> Result<Vec<Bipartition>, Error> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect()
    }

    /// Column-name form used in CSV headers, e.g. `MO_AE`.
    pub fn key(&self) -> String {
        format!("{}_{}", self.first, self.second)
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.second)
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(['-', '_']).ok_or_else(|| {
            Error::param("bipartitions", format!("`{s}` is not of the form A-B"))
        })?;
        Bipartition::new(a.parse()?, b.parse()?)
    }
}

impl TryFrom<String> for Bipartition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Bipartition> for String {
    fn from(b: Bipartition) -> Self {
        b.to_string()
    }
}

/// Drift matrix of the linearized Langevin equations.
///
/// The cavity mean amplitude is taken real and non-negative, so radiation
/// pressure couples the mirror momentum to the amplitude quadrature `X` only.
pub fn build_drift(p: &EffectiveParams) -> Matrix8 {
    let mut a = Matrix8::zeros();
    // mirror
    a[(0, 1)] = p.omega_m;
    a[(1, 0)] = -p.omega_m;
    a[(1, 1)] = -p.gamma_m;
    a[(1, 2)] = p.g_om_eff;
    a[(1, 6)] = -p.g_lc_eff;
    // cavity
    a[(2, 2)] = -p.kappa;
    a[(2, 3)] = p.delta_cav_eff;
    a[(2, 5)] = p.g_at_eff;
    a[(3, 0)] = p.g_om_eff;
    a[(3, 2)] = -p.delta_cav_eff;
    a[(3, 3)] = -p.kappa;
    a[(3, 4)] = -p.g_at_eff;
    // atoms
    a[(4, 3)] = p.g_at_eff;
    a[(4, 4)] = -p.gamma_at;
    a[(4, 5)] = p.delta_at;
    a[(5, 2)] = -p.g_at_eff;
    a[(5, 4)] = -p.delta_at;
    a[(5, 5)] = -p.gamma_at;
    // circuit
    a[(6, 7)] = p.omega_lc_eff;
    a[(7, 0)] = -p.g_lc_eff;
    a[(7, 6)] = -p.omega_lc_eff;
    a[(7, 7)] = -p.gamma_lc;
    a
}

/// Diagonal diffusion matrix
/// `Diag[0, gamma_m(2n_m+1), kappa, kappa, gamma_at, gamma_at, 0, gamma_LC(2n_LC+1)]`.
pub fn build_diffusion(p: &EffectiveParams) -> Matrix8 {
    build_diffusion_scaled(p, 1.0)
}

/// [`build_diffusion`] with the flux-noise entry multiplied by
/// `lc_noise_factor`.
pub fn build_diffusion_scaled(p: &EffectiveParams, lc_noise_factor: f64) -> Matrix8 {
    let diag = [
        0.0,
        p.gamma_m * (2.0 * p.nbar_m + 1.0),
        p.kappa,
        p.kappa,
        p.gamma_at,
        p.gamma_at,
        0.0,
        lc_noise_factor * p.gamma_lc * (2.0 * p.nbar_lc + 1.0),
    ];
    Matrix8::from_diagonal(&nalgebra::SVector::<f64, 8>::from(diag))
}

/// Writes a matrix as CSV with a header naming the quadratures.
pub fn matrix_csv(m: &Matrix8) -> String {
    let mut out = QUADRATURE_NAMES.join(",");
    out.push('\n');
    for i in 0..8 {
        let row: Vec<String> = (0..8).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
