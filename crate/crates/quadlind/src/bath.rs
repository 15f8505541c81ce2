//! Thermal baths: statistics, occupation functions, spectral densities and
//! the decay / gain rates they induce on dressed modes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nambu::{phi_coefficients, BogoliubovTransform};

#[derive(Debug, Error)]
pub enum BathError {
    #[error("bose occupation diverges at energy {eps} <= chemical potential {eta}")]
    DivergentOccupation { eps: f64, eta: f64 },
    #[error("spectral density requires a positive frequency, got {0}")]
    NonPositiveFrequency(f64),
    #[error("zero-frequency dressed modes are not supported")]
    ZeroFrequencyUnsupported,
    #[error("invalid bath: {0}")]
    InvalidBath(String),
}

/// Particle statistics of a bath; `zeta` is +1 for fermions, -1 for bosons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

impl Statistics {
    pub fn zeta(self) -> f64 {
        match self {
            Statistics::Bose => -1.0,
            Statistics::Fermi => 1.0,
        }
    }
}

/// Spectral density J(omega) of a bath, defined for omega > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpectralDensity {
    /// Wide-band limit: J(omega) = gamma.
    Flat { gamma: f64 },
    /// J(omega) = pi * alpha * omega * exp(-omega / cutoff).
    Ohmic { alpha: f64, cutoff: f64 },
}

/// A thermal bath attached to one system mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Index of the system mode this bath couples to.
    pub mode: usize,
    pub statistics: Statistics,
    pub temperature: f64,
    pub chemical_potential: f64,
    pub spectral_density: SpectralDensity,
}

impl BathSpec {
    pub fn validate(&self) -> Result<(), BathError> {
        if self.temperature < 0.0 {
            return Err(BathError::InvalidBath("temperature must be non-negative".into()));
        }
        match self.spectral_density {
            SpectralDensity::Flat { gamma } => {
                if gamma < 0.0 {
                    return Err(BathError::InvalidBath("flat density must be non-negative".into()));
                }
            }
            SpectralDensity::Ohmic { alpha, cutoff } => {
                if alpha < 0.0 || cutoff <= 0.0 {
                    return Err(BathError::InvalidBath(
                        "ohmic density needs alpha >= 0 and cutoff > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Validate a bath set against a system size: indices in range, at most one
/// bath per mode, each bath individually valid.
pub fn validate_baths(baths: &[BathSpec], n_modes: usize) -> Result<(), BathError> {
    let mut seen = vec![false; n_modes];
    for b in baths {
        b.validate()?;
        if b.mode >= n_modes {
            return Err(BathError::InvalidBath(format!(
                "bath mode index {} out of range for {n_modes} modes",
                b.mode
            )));
        }
        if seen[b.mode] {
            return Err(BathError::InvalidBath(format!(
                "more than one bath attached to mode {}",
                b.mode
            )));
        }
        seen[b.mode] = true;
    }
    Ok(())
}

/// Mean occupation f(eps) = 1 / (zeta + exp((eps - eta)/T)).
///
/// At T = 0 the Fermi function becomes a step (1 below eta, 0 above, 1/2 at
/// eta) and the Bose function vanishes for eps > eta.
pub fn occupation(b: &BathSpec, eps: f64) -> Result<f64, BathError> {
    let eta = b.chemical_potential;
    if b.temperature == 0.0 {
        return match b.statistics {
            Statistics::Fermi => Ok(if eps < eta {
                1.0
            } else if eps > eta {
                0.0
            } else {
                0.5
            }),
            Statistics::Bose => {
                if eps > eta {
                    Ok(0.0)
                } else {
                    Err(BathError::DivergentOccupation { eps, eta })
                }
            }
        };
    }
    if b.statistics == Statistics::Bose && eps <= eta {
        return Err(BathError::DivergentOccupation { eps, eta });
    }
    let x = (eps - eta) / b.temperature;
    // Evaluate stably for large |x|.
    let zeta = b.statistics.zeta();
    if x > 700.0 {
        Ok((-x).exp())
    } else {
        Ok(1.0 / (zeta + x.exp()))
    }
}

/// J(omega) for omega > 0.
pub fn spectral_density(b: &BathSpec, omega: f64) -> Result<f64, BathError> {
    if omega <= 0.0 {
        return Err(BathError::NonPositiveFrequency(omega));
    }
    Ok(match b.spectral_density {
        SpectralDensity::Flat { gamma } => gamma,
        SpectralDensity::Ohmic { alpha, cutoff } => {
            std::f64::consts::PI * alpha * omega * (-omega / cutoff).exp()
        }
    })
}

/// One-sided rate lambda(omega): J(omega)[1 - zeta f(omega)] for omega > 0,
/// J(-omega) f(-omega) for omega < 0. Zero frequency is rejected; see
/// [`lambda_rate_zero`] for the static branch.
pub fn lambda_rate(b: &BathSpec, omega: f64) -> Result<f64, BathError> {
    if omega > 0.0 {
        Ok(spectral_density(b, omega)? * (1.0 - b.statistics.zeta() * occupation(b, omega)?))
    } else if omega < 0.0 {
        Ok(spectral_density(b, -omega)? * occupation(b, -omega)?)
    } else {
        Err(BathError::ZeroFrequencyUnsupported)
    }
}

/// The static (omega = 0) rate branch, J(0)[1 + (1 - zeta) f(0)].
///
/// Provided for completeness only: every builder in this crate rejects
/// zero-frequency dressed modes upstream, and the bose case at eta = 0
/// diverges through the occupation.
pub fn lambda_rate_zero(b: &BathSpec) -> Result<f64, BathError> {
    let j0 = match b.spectral_density {
        SpectralDensity::Flat { gamma } => gamma,
        SpectralDensity::Ohmic { .. } => 0.0,
    };
    Ok(j0 * (1.0 + (1.0 - b.statistics.zeta()) * occupation(b, 0.0)?))
}

/// Net decay rate of dressed mode k:
/// Gamma_k = sum_n J_n(Omega_k) |phi_{n,k}|^2 [1 - zeta_n f_n(Omega_k) - f_n(Omega_k)].
///
/// Negative values signal incoherent gain (possible only with fermi baths at
/// chemical potential above the dressed frequency).
pub fn total_rate(
    baths: &[BathSpec],
    bt: &BogoliubovTransform,
    k: usize,
) -> Result<f64, BathError> {
    let n_modes = bt.n_modes();
    if k >= n_modes {
        return Err(BathError::InvalidBath(format!(
            "dressed index {k} out of range for {n_modes} modes"
        )));
    }
    validate_baths(baths, n_modes)?;
    let omega_k = bt.dressed_freq[k];
    let mut gamma = 0.0;
    for b in baths {
        let phi = phi_coefficients(bt, b.mode)
            .map_err(|e| BathError::InvalidBath(e.to_string()))?;
        let f = occupation(b, omega_k)?;
        gamma += spectral_density(b, omega_k)?
            * phi[k].norm_sqr()
            * (1.0 - b.statistics.zeta() * f - f);
    }
    Ok(gamma)
}
