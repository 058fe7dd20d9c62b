//! Splitting response to a small mechanical-frequency shift.
//!
//! An external force gradient pulls `omega_b` to `omega_b + delta`. The
//! observable is the change of the normal-mode splitting,
//! `delta_d = d(omega_b + delta) - d(omega_b)`. Read out at fixed coupling
//! the response is tiny; re-tuning the coupling to the critical point of the
//! shifted system (where the lower branch closes and the splitting slope
//! diverges) enhances it by orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{critical_coupling, mode_spectrum, ModeSpectrum, Regime, WorkingPoint};

/// How the coupling is handled while the mechanical frequency shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingPolicy {
    /// Keep `g_lin` frozen at the base value for both evaluations.
    FixedG,
    /// Re-tune `g_lin` to the critical coupling of the shifted frequency,
    /// `g = sqrt(delta_c (omega_b + delta)) / 2`, in both evaluations.
    CriticalTracking,
}

/// One shift measurement: base operating point, frequency shift, policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftScenario {
    pub base: WorkingPoint,
    pub delta_omega_b: f64,
    pub policy: CouplingPolicy,
}

/// Operating point stripped of the coupling, for operations that choose the
/// coupling themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePoint {
    pub omega_b: f64,
    pub delta_c: f64,
}

impl BasePoint {
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
        Ok(())
    }
}

fn require_spectrum_defined(w: &WorkingPoint, s: &ModeSpectrum) -> Result<f64> {
    if s.regime == Regime::Unstable {
        return Err(Error::UnstableWorkingPoint {
            omega_b: w.omega_b,
            delta_c: w.delta_c,
            g_lin: w.g_lin,
        });
    }
    Ok(s.splitting.expect("splitting defined outside unstable regime"))
}

/// Splitting change for one scenario.
///
/// A zero shift returns exactly zero under both policies because the two
/// evaluations coincide bitwise. Errors if the mechanical frequency would be
/// pulled non-positive or if an evaluation lands in the unstable regime
/// (under critical tracking that happens for upward shifts, where the base
/// point sits beyond its own critical coupling).
pub fn splitting_shift(s: &ShiftScenario, eps_crit: Option<f64>) -> Result<f64> {
    s.base.validate()?;
    if !s.delta_omega_b.is_finite() {
        return Err(Error::InvalidParams(format!(
            "delta_omega_b must be finite, got {}",
            s.delta_omega_b
        )));
    }
    let shifted_omega_b = s.base.omega_b + s.delta_omega_b;
    if shifted_omega_b <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "shift {} pulls omega_b = {} non-positive",
            s.delta_omega_b, s.base.omega_b
        )));
    }

    let g = match s.policy {
        CouplingPolicy::FixedG => s.base.g_lin,
        CouplingPolicy::CriticalTracking => critical_coupling(shifted_omega_b, s.base.delta_c),
    };

    let before = WorkingPoint {
        omega_b: s.base.omega_b,
        delta_c: s.base.delta_c,
        g_lin: g,
    };
    let after = WorkingPoint {
        omega_b: shifted_omega_b,
        ..before
    };

    let d_before = require_spectrum_defined(&before, &mode_spectrum(&before, eps_crit))?;
    let d_after = require_spectrum_defined(&after, &mode_spectrum(&after, eps_crit))?;
    Ok(d_after - d_before)
}

/// Independent variable of a response curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndependentVar {
    Coupling,
    FrequencyShift,
}

/// Sampled response `delta_d` against one independent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub independent: IndependentVar,
    /// `(independent_value, delta_d)` pairs in grid order.
    pub samples: Vec<(f64, f64)>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("response grid is empty".into()));
    }
    if grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidParams(
            "response grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Fixed-coupling response `delta_d(g)` for one frequency shift, across a
/// coupling grid that must stay at or below the shifted critical coupling.
pub fn response_vs_coupling(
    base: &BasePoint,
    delta_omega_b: f64,
    grid: &[f64],
    eps_crit: Option<f64>,
) -> Result<ResponseCurve> {
    base.validate()?;
    check_grid(grid)?;
    let shifted_omega_b = base.omega_b + delta_omega_b;
    if !(delta_omega_b.is_finite() && shifted_omega_b > 0.0) {
        return Err(Error::InvalidParams(format!(
            "invalid frequency shift {delta_omega_b}"
        )));
    }
    let limit = critical_coupling(shifted_omega_b, base.delta_c);
    if let Some(&value) = grid.iter().find(|&&g| g > limit) {
        return Err(Error::GridExceedsCritical { value, limit });
    }

    let samples = grid
        .iter()
        .map(|&g| {
            let scenario = ShiftScenario {
                base: WorkingPoint {
                    omega_b: base.omega_b,
                    delta_c: base.delta_c,
                    g_lin: g,
                },
                delta_omega_b,
                policy: CouplingPolicy::FixedG,
            };
            Ok((g, splitting_shift(&scenario, eps_crit)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ResponseCurve {
        independent: IndependentVar::Coupling,
        samples,
    })
}

/// Critically tracked response `delta_d(delta)` across a grid of frequency
/// shifts.
pub fn response_vs_shift(
    base: &BasePoint,
    grid: &[f64],
    eps_crit: Option<f64>,
) -> Result<ResponseCurve> {
    base.validate()?;
    check_grid(grid)?;
    let samples = grid
        .iter()
        .map(|&delta| {
            let scenario = ShiftScenario {
                base: WorkingPoint {
                    omega_b: base.omega_b,
                    delta_c: base.delta_c,
                    g_lin: 0.0,
                },
                delta_omega_b: delta,
                policy: CouplingPolicy::CriticalTracking,
            };
            Ok((delta, splitting_shift(&scenario, eps_crit)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ResponseCurve {
        independent: IndependentVar::FrequencyShift,
        samples,
    })
}

/// Relative width at which the inversion bracket stops shrinking.
pub const INVERT_REL_TOL: f64 = 1e-10;

/// Smallest detectable downward frequency shift for a given splitting floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinShiftResult {
    /// Resolvable splitting change fed into the inversion.
    pub delta_d_min: f64,
    /// Magnitude of the matching frequency shift.
    pub min_detectable_shift: f64,
    /// Bisection steps plus the final secant polish.
    pub iterations: usize,
    /// Forward-map residual at the returned shift.
    pub residual: f64,
}

/// Inverts the critically tracked response: finds `x > 0` with
/// `delta_d(-x) = delta_d_min`.
///
/// The forward map is monotone in `x`, so the bracket is shrunk by bisection
/// to a relative width of `INVERT_REL_TOL`, then one secant step polishes the
/// result. The bracket must straddle the target and stay inside
/// `(0, omega_b)`.
pub fn invert_min_shift(
    base: &BasePoint,
    delta_d_min: f64,
    bracket: (f64, f64),
    eps_crit: Option<f64>,
) -> Result<MinShiftResult> {
    base.validate()?;
    if !(delta_d_min.is_finite() && delta_d_min > 0.0) {
        return Err(Error::InvalidParams(format!(
            "delta_d_min must be finite and positive, got {delta_d_min}"
        )));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi && hi < base.omega_b) {
        return Err(Error::InvalidParams(format!(
            "bracket ({lo}, {hi}) must satisfy 0 < lo < hi < omega_b"
        )));
    }

    let forward = |x: f64| -> Result<f64> {
        let scenario = ShiftScenario {
            base: WorkingPoint {
                omega_b: base.omega_b,
                delta_c: base.delta_c,
                g_lin: 0.0,
            },
            delta_omega_b: -x,
            policy: CouplingPolicy::CriticalTracking,
        };
        Ok(splitting_shift(&scenario, eps_crit)? - delta_d_min)
    };

    let mut f_lo = forward(lo)?;
    let mut f_hi = forward(hi)?;
    for (x, f) in [(lo, f_lo), (hi, f_hi)] {
        if f == 0.0 {
            return Ok(MinShiftResult {
                delta_d_min,
                min_detectable_shift: x,
                iterations: 0,
                residual: 0.0,
            });
        }
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketInvalid {
            lo,
            hi,
            target: delta_d_min,
        });
    }

    let mut iterations = 0usize;
    while hi - lo > INVERT_REL_TOL * 0.5 * (lo + hi) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = forward(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            lo = mid;
            f_lo = 0.0;
            hi = mid;
            f_hi = 0.0;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    // one secant step squeezes out the remaining bracket width
    let x = if f_hi == f_lo {
        0.5 * (lo + hi)
    } else {
        (hi - f_hi * (hi - lo) / (f_hi - f_lo)).clamp(lo, hi)
    };
    let residual = forward(x)?;
    iterations += 1;

    Ok(MinShiftResult {
        delta_d_min,
        min_detectable_shift: x,
        iterations,
        residual,
    })
}
