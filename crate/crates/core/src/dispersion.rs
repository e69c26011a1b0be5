//! Dispersion relations of the four hopping models and the factorized
//! four-momentum energy mismatch.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Hopping model selection. `nearest` is the integrable reference chain,
/// `nnn` adds a next-nearest neighbor term with amplitude `eta`, `exp` has
/// exponentially decaying hopping with rate `zeta > 0`, and `mth` is pure
/// m-th neighbor hopping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DispersionModel {
    #[serde(rename = "nearest")]
    Nearest,
    #[serde(rename = "nnn")]
    NextNearest { eta: f64 },
    #[serde(rename = "exp")]
    Exponential { zeta: f64 },
    #[serde(rename = "mth")]
    MthNeighbor { m: u32 },
}

/// Reduces a momentum to the Brillouin zone `[-1/2, 1/2)`.
pub fn reduce_momentum(k: f64) -> f64 {
    k - (k + 0.5).floor()
}

/// `omega_bas = 4 sin(pi(k1-k3)) sin(pi(k1-k4))` written in difference
/// coordinates; the state-independent first factor of the energy mismatch.
pub fn omega_bar_bas(dk12: f64, dk34: f64) -> f64 {
    2.0 * ((TAU * dk34).cos() - (TAU * dk12).cos())
}

impl DispersionModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DispersionModel::Nearest => Ok(()),
            DispersionModel::NextNearest { eta } => {
                if eta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidModel("eta must be finite".into()))
                }
            }
            DispersionModel::Exponential { zeta } => {
                if zeta.is_finite() && zeta > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidModel(format!(
                        "zeta must be positive and finite, got {zeta}"
                    )))
                }
            }
            DispersionModel::MthNeighbor { m } => {
                if m >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidModel("m must be at least 1".into()))
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DispersionModel::Nearest => "nearest",
            DispersionModel::NextNearest { .. } => "nnn",
            DispersionModel::Exponential { .. } => "exp",
            DispersionModel::MthNeighbor { .. } => "mth",
        }
    }

    /// Single-particle energy. Periodic with period 1 and even in `k`.
    /// The exponential model always uses the closed form, never the series.
    pub fn omega(&self, k: f64) -> f64 {
        let k = reduce_momentum(k);
        match *self {
            DispersionModel::Nearest => 1.0 - (TAU * k).cos(),
            DispersionModel::NextNearest { eta } => {
                1.0 - (TAU * k).cos() - eta * (2.0 * TAU * k).cos()
            }
            DispersionModel::Exponential { zeta } => {
                -0.5 * (1.0 + zeta.sinh() / (zeta.cosh() - (TAU * k).cos()))
            }
            DispersionModel::MthNeighbor { m } => -(TAU * f64::from(m) * k).cos(),
        }
    }

    /// Analytic derivative d omega / dk.
    pub fn omega_prime(&self, k: f64) -> f64 {
        let k = reduce_momentum(k);
        match *self {
            DispersionModel::Nearest => TAU * (TAU * k).sin(),
            DispersionModel::NextNearest { eta } => {
                TAU * (TAU * k).sin() + 2.0 * TAU * eta * (2.0 * TAU * k).sin()
            }
            DispersionModel::Exponential { zeta } => {
                let den = zeta.cosh() - (TAU * k).cos();
                PI * zeta.sinh() * (TAU * k).sin() / (den * den)
            }
            DispersionModel::MthNeighbor { m } => {
                let m = f64::from(m);
                TAU * m * (TAU * m * k).sin()
            }
        }
    }

    /// Energy mismatch `omega(k1) + omega(k2) - omega(k3) - omega(k4)`,
    /// grouped so the trivial and exchange collisions give an exact zero.
    pub fn omega_bar(&self, k1: f64, k2: f64, k3: f64, k4: f64) -> f64 {
        (self.omega(k1) - self.omega(k3)) + (self.omega(k2) - self.omega(k4))
    }

    /// Second factor of the factorized energy mismatch in sum/difference
    /// coordinates. `s12` lives on `[-1, 1)`: `cos(pi s12)` has period 2, so
    /// the sum momentum must come from actual representatives and is not
    /// reduced mod 1.
    ///
    /// For `nnn` this is `cos(pi s12) + 2 eta cos(2 pi s12)(cos(2 pi dk12) +
    /// cos(2 pi dk34))`; for `exp` it is the cubic in `cos(pi s12)`. The
    /// `nearest`/`mth` models factor through a plain sine product instead and
    /// are rejected here.
    pub fn omega_bar_add(&self, s12: f64, dk12: f64, dk34: f64) -> Result<f64> {
        match *self {
            DispersionModel::NextNearest { eta } => {
                let c12 = (TAU * dk12).cos();
                let c34 = (TAU * dk34).cos();
                Ok((PI * s12).cos() + 2.0 * eta * (TAU * s12).cos() * (c12 + c34))
            }
            DispersionModel::Exponential { zeta } => {
                let ch = zeta.cosh();
                let a = (TAU * dk12).cos();
                let b = (TAU * dk34).cos();
                let c = (PI * s12).cos();
                Ok(-c * c * c + c * (1.0 + ch * ch + a * b) - ch * (a + b))
            }
            _ => Err(Error::UnsupportedModel {
                kind: self.kind_name(),
            }),
        }
    }
}
