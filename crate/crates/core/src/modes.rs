//! Normal-mode spectrum of the coupled microwave/mechanical pair.
//!
//! The two hybrid branches obey
//!
//! ```text
//! omega_pm^2 = ((delta_c^2 + omega_b^2) +- sqrt((omega_b^2 - delta_c^2)^2
//!              + 16 g_lin^2 delta_c omega_b)) / 2
//! ```
//!
//! The lower branch closes at the critical coupling
//! `g_cp = sqrt(delta_c omega_b) / 2`; beyond it the squared frequency turns
//! negative and the linearized dynamics are unstable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operating point of the linearized system. Angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingPoint {
    /// Mechanical frequency omega_b.
    pub omega_b: f64,
    /// Effective cavity detuning Delta_c (red-detuned branch, positive).
    pub delta_c: f64,
    /// Linearized electromechanical coupling G.
    pub g_lin: f64,
}

impl WorkingPoint {
    pub fn new(omega_b: f64, delta_c: f64, g_lin: f64) -> Result<Self> {
        let w = Self {
            omega_b,
            delta_c,
            g_lin,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_b.is_finite() && self.omega_b > 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega_b must be finite and positive, got {}",
                self.omega_b
            )));
        }
        if !(self.delta_c.is_finite() && self.delta_c > 0.0) {
            return Err(Error::InvalidParams(format!(
                "delta_c must be finite and positive, got {}",
                self.delta_c
            )));
        }
        if !(self.g_lin.is_finite() && self.g_lin >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "g_lin must be finite and non-negative, got {}",
                self.g_lin
            )));
        }
        Ok(())
    }
}

/// Stability classification of the lower branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// omega_minus^2 > eps_crit: both modes oscillatory.
    Stable,
    /// |omega_minus^2| <= eps_crit: lower branch treated as closed.
    Critical,
    /// omega_minus^2 < -eps_crit: lower branch exponentially unstable.
    Unstable,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Stable => "stable",
            Regime::Critical => "critical",
            Regime::Unstable => "unstable",
        };
        f.write_str(s)
    }
}

/// Both squared branch frequencies plus the regime call and, where defined,
/// the normal-mode splitting `d = omega_plus - omega_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub omega_minus_sq: f64,
    pub omega_plus_sq: f64,
    pub regime: Regime,
    /// `None` in the unstable regime, where the lower mode has no real
    /// frequency. At the critical point this equals `omega_plus`.
    pub splitting: Option<f64>,
}

impl ModeSpectrum {
    pub fn omega_plus(&self) -> f64 {
        self.omega_plus_sq.sqrt()
    }

    /// Lower-branch frequency; zero at criticality, `None` when unstable.
    pub fn omega_minus(&self) -> Option<f64> {
        match self.regime {
            Regime::Stable => Some(self.omega_minus_sq.sqrt()),
            Regime::Critical => Some(0.0),
            Regime::Unstable => None,
        }
    }
}

/// Classification band for "numerically at the critical point", scaled to
/// the squared-frequency magnitude of the problem.
pub fn default_eps_crit(omega_b: f64, delta_c: f64) -> f64 {
    1e-9 * (delta_c * delta_c + omega_b * omega_b)
}

/// Coupling at which the lower branch closes: `sqrt(delta_c omega_b) / 2`.
pub fn critical_coupling(omega_b: f64, delta_c: f64) -> f64 {
    assert!(
        omega_b > 0.0 && delta_c > 0.0,
        "critical_coupling requires positive frequencies"
    );
    (delta_c * omega_b).sqrt() / 2.0
}

/// Detuning at which a fixed coupling becomes critical: `4 g_lin^2 / omega_b`.
pub fn critical_detuning(g_lin: f64, omega_b: f64) -> f64 {
    assert!(
        omega_b > 0.0 && g_lin >= 0.0,
        "critical_detuning requires omega_b > 0 and g_lin >= 0"
    );
    4.0 * g_lin * g_lin / omega_b
}

/// Evaluates both branches at a working point.
///
/// The lower branch is computed from the product of the two quadratic roots,
/// `omega_minus^2 = x (x - 4 g^2) / omega_plus^2` with `x = delta_c omega_b`,
/// which stays accurate near the critical point where the textbook
/// half-difference form cancels catastrophically. `x` is rounded once, so the
/// result is bit-exact under swapping `omega_b` and `delta_c`.
pub fn mode_spectrum(w: &WorkingPoint, eps_crit: Option<f64>) -> ModeSpectrum {
    let wb2 = w.omega_b * w.omega_b;
    let dc2 = w.delta_c * w.delta_c;
    let sum = dc2 + wb2;
    let x = w.delta_c * w.omega_b;
    let g2 = w.g_lin * w.g_lin;

    let diff = wb2 - dc2;
    let disc = diff * diff + 16.0 * g2 * x;
    let omega_plus_sq = 0.5 * (sum + disc.sqrt());
    let omega_minus_sq = x * (x - 4.0 * g2) / omega_plus_sq;

    let eps = eps_crit.unwrap_or_else(|| default_eps_crit(w.omega_b, w.delta_c));
    let (regime, splitting) = if omega_minus_sq > eps {
        let d = omega_plus_sq.sqrt() - omega_minus_sq.sqrt();
        (Regime::Stable, Some(d))
    } else if omega_minus_sq < -eps {
        (Regime::Unstable, None)
    } else {
        (Regime::Critical, Some(omega_plus_sq.sqrt()))
    };

    ModeSpectrum {
        omega_minus_sq,
        omega_plus_sq,
        regime,
        splitting,
    }
}

/// Which knob a spectrum sweep turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Sweep g_lin at fixed (omega_b, delta_c).
    Coupling { omega_b: f64, delta_c: f64 },
    /// Sweep delta_c at fixed (omega_b, g_lin).
    Detuning { omega_b: f64, g_lin: f64 },
}

/// One sweep sample: the axis value and the spectrum evaluated there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub spectrum: ModeSpectrum,
}

/// Evaluates the spectrum across a strictly increasing grid of axis values.
///
/// Grid points falling in the unstable regime are kept (with the splitting
/// absent), so a sweep across the critical point records the closure.
pub fn sweep_modes(
    axis: &SweepAxis,
    grid: &[f64],
    eps_crit: Option<f64>,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidParams(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    grid.iter()
        .map(|&axis_value| {
            let w = match *axis {
                SweepAxis::Coupling { omega_b, delta_c } => {
                    WorkingPoint::new(omega_b, delta_c, axis_value)?
                }
                SweepAxis::Detuning { omega_b, g_lin } => {
                    WorkingPoint::new(omega_b, axis_value, g_lin)?
                }
            };
            Ok(SweepPoint {
                axis_value,
                spectrum: mode_spectrum(&w, eps_crit),
            })
        })
        .collect()
}
