//! Drive-level description of the hybrid system and its linearization.
//!
//! A microwave cavity (frequency `omega_c`, linewidth `kappa_c`) is driven
//! with power `P` at bare detuning `delta_c_bare` and couples to a mechanical
//! membrane (`omega_b`) with single-photon rate `g_c`, plus optionally to an
//! atomic/qubit mode (`omega_a`, `g_a`). The circulating photon number pulls
//! the effective detuning `Delta_c` away from the bare one through the
//! radiation-pressure spring, which closes a cubic equation:
//!
//! ```text
//! (Delta_c - delta_c_bare)(kappa_c^2 + Delta_c^2) + C = 0,
//! C = 4 g_c^2 P kappa_c / (hbar omega_b (omega_c - delta_c_bare))
//! ```
//!
//! Its real roots are found in closed form and polished by Newton steps; the
//! root nearest the bare detuning is the physical operating branch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::WorkingPoint;

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054571817e-34;

/// Default scaled-residual bound for the detuning cubic.
pub const DEFAULT_DETUNING_TOL: f64 = 1e-10;

fn default_hbar() -> f64 {
    HBAR
}

/// Physical drive parameters. Frequencies and rates in rad/s, power in W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub omega_b: f64,
    pub omega_c: f64,
    pub delta_c_bare: f64,
    pub kappa_c: f64,
    pub g_c: f64,
    pub g_a: f64,
    pub omega_a: f64,
    pub power: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_b", self.omega_b),
            ("omega_c", self.omega_c),
            ("kappa_c", self.kappa_c),
            ("hbar", self.hbar),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        let non_negative = [
            ("delta_c_bare", self.delta_c_bare),
            ("g_c", self.g_c),
            ("g_a", self.g_a),
            ("omega_a", self.omega_a),
            ("power", self.power),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.delta_c_bare >= self.omega_c {
            return Err(Error::InvalidParams(format!(
                "delta_c_bare ({}) must stay below omega_c ({})",
                self.delta_c_bare, self.omega_c
            )));
        }
        Ok(())
    }

    /// Inhomogeneous term `C` of the detuning cubic.
    fn drive_term(&self) -> f64 {
        4.0 * self.g_c * self.g_c * self.power * self.kappa_c
            / (self.hbar * self.omega_b * (self.omega_c - self.delta_c_bare))
    }

    /// Intracavity photon number at effective detuning `delta_c`.
    fn photon_number(&self, delta_c: f64) -> f64 {
        2.0 * self.power * self.kappa_c
            / (self.hbar
                * (self.omega_c - self.delta_c_bare)
                * (self.kappa_c * self.kappa_c + delta_c * delta_c))
    }

    /// Cubic residual at candidate root `x`.
    fn cubic_residual(&self, x: f64, c: f64) -> f64 {
        (x - self.delta_c_bare) * (self.kappa_c * self.kappa_c + x * x) + c
    }

    fn cubic_derivative(&self, x: f64) -> f64 {
        self.kappa_c * self.kappa_c + x * x + 2.0 * x * (x - self.delta_c_bare)
    }

    /// Normalization for the cubic residual; falls back to `kappa_c^3` when
    /// the bare detuning vanishes.
    fn residual_scale(&self) -> f64 {
        let k2 = self.kappa_c * self.kappa_c;
        if self.delta_c_bare != 0.0 {
            self.delta_c_bare.abs() * k2
        } else {
            self.kappa_c * k2
        }
    }
}

/// All real roots of the detuning cubic, ascending, plus the physical pick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetuningRoots {
    pub roots: Vec<f64>,
    /// Index of the root nearest the bare detuning.
    pub selected_index: usize,
    /// Scaled residual of each root, same order as `roots`.
    pub scaled_residuals: Vec<f64>,
    /// Bound the residuals were required to meet.
    pub residual_bound: f64,
}

impl DetuningRoots {
    pub fn selected(&self) -> f64 {
        self.roots[self.selected_index]
    }
}

/// Effective linearized parameters at the selected detuning root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizedParams {
    pub omega_b: f64,
    pub delta_c: f64,
    pub g_lin: f64,
    /// Atomic frequency dressed by the cavity population.
    pub omega_a_tilde: f64,
}

impl LinearizedParams {
    /// Mode-level working point; fails if the effective detuning ended up on
    /// the non-positive branch where the splitting model does not apply.
    pub fn to_working_point(&self) -> Result<WorkingPoint> {
        WorkingPoint::new(self.omega_b, self.delta_c, self.g_lin)
    }
}

/// Real roots of `t^3 + p t + q = 0` (depressed cubic).
fn depressed_roots(p: f64, q: f64) -> Vec<f64> {
    if q == 0.0 {
        return if p < 0.0 {
            let r = (-p).sqrt();
            vec![-r, 0.0, r]
        } else {
            vec![0.0]
        };
    }
    let half_q = 0.5 * q;
    let delta = half_q * half_q + (p / 3.0).powi(3);
    if delta > 0.0 {
        // one real root; pick the cube-root branch that avoids cancellation
        let s = delta.sqrt();
        let u = (-half_q - q.signum() * s).cbrt();
        // u * v = -p / 3 for the conjugate pair
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        vec![u + v]
    } else {
        // three real roots (trigonometric form); p < 0 here
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let mut out: Vec<f64> = (0..3).map(|k| m * (phi - tau * k as f64).cos()).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// Solves the detuning cubic to a scaled residual below `tol`.
///
/// Roots come from the closed-form discriminant split and are each polished
/// with Newton iterations on the monic cubic. With zero drive the bare
/// detuning is returned exactly.
pub fn solve_effective_detuning(p: &DriveParams, tol: f64) -> Result<DetuningRoots> {
    p.validate()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "detuning tolerance must be finite and positive, got {tol}"
        )));
    }

    let c = p.drive_term();
    if c == 0.0 {
        return Ok(DetuningRoots {
            roots: vec![p.delta_c_bare],
            selected_index: 0,
            scaled_residuals: vec![0.0],
            residual_bound: tol,
        });
    }

    // monic form x^3 + a2 x^2 + a1 x + a0
    let a2 = -p.delta_c_bare;
    let a1 = p.kappa_c * p.kappa_c;
    let a0 = c - p.delta_c_bare * a1;

    let shift = a2 / 3.0;
    let dp = a1 - a2 * a2 / 3.0;
    let dq = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;

    let scale = p.residual_scale();
    let mut roots: Vec<f64> = depressed_roots(dp, dq).into_iter().map(|t| t - shift).collect();

    for r in roots.iter_mut() {
        let mut x = *r;
        for _ in 0..50 {
            let f = p.cubic_residual(x, c);
            if f.abs() <= 0.25 * tol * scale {
                break;
            }
            let df = p.cubic_derivative(x);
            if df == 0.0 {
                break;
            }
            let step = f / df;
            let next = x - step;
            if next == x {
                break;
            }
            x = next;
        }
        *r = x;
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs() + b.abs()));
    assert!(!roots.is_empty(), "a real cubic always has a real root");

    let scaled_residuals: Vec<f64> = roots
        .iter()
        .map(|&x| (p.cubic_residual(x, c) / scale).abs())
        .collect();
    if let Some((i, &worst)) = scaled_residuals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
    {
        if worst > tol {
            let _ = i;
            return Err(Error::NonConvergence {
                iterations: 50,
                residual: worst,
            });
        }
    }

    let selected_index = roots
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1 - p.delta_c_bare).abs();
            let db = (b.1 - p.delta_c_bare).abs();
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();

    Ok(DetuningRoots {
        roots,
        selected_index,
        scaled_residuals,
        residual_bound: tol,
    })
}

/// Evaluates the linearized coupling and dressed frequencies at the selected
/// detuning root.
pub fn linearize(p: &DriveParams, roots: &DetuningRoots) -> Result<LinearizedParams> {
    p.validate()?;
    let delta_c = roots.selected();

    // re-derive the residual instead of trusting the stored diagnostic
    let c = p.drive_term();
    let scaled = (p.cubic_residual(delta_c, c) / p.residual_scale()).abs();
    if scaled > roots.residual_bound {
        return Err(Error::InvalidRoot {
            root: delta_c,
            residual: scaled,
            bound: roots.residual_bound,
        });
    }

    let n_c = p.photon_number(delta_c);
    let g_lin = p.g_c * n_c.sqrt();
    let omega_a_tilde = p.omega_a - 2.0 * p.g_a * p.g_c * n_c / p.omega_b;

    Ok(LinearizedParams {
        omega_b: p.omega_b,
        delta_c,
        g_lin,
        omega_a_tilde,
    })
}
