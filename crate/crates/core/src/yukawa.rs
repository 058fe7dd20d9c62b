//! Yukawa-corrected gravity of a cylindrical source plate.
//!
//! The pair interaction is `V(r) = -G m1 m2 / r (1 + alpha e^{-r/lambda})`.
//! Integrated over a cylinder (radius `R`, thickness `D`, density `rho`) at
//! on-axis gap `h`, the plate limit `R >> D, R >> h` gives the closed form
//!
//! ```text
//! E(h) = -G m rho 2 pi R D
//!        + G m rho alpha 2 pi lambda [e^{-R/lambda} D
//!          - lambda e^{-h/lambda} (1 - e^{-D/lambda})]
//! ```
//!
//! whose gradient shifts the resonance of a test oscillator. An adaptive
//! axisymmetric quadrature of the raw pair potential over the cylinder
//! volume serves as the independent check of the closed form.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newtonian gravitational constant, CODATA 2018 [m^3 kg^-1 s^-2].
pub const DEFAULT_G_NEWTON: f64 = 6.67430e-11;

/// Range above which the plate-limit force law is not certified.
pub const MAX_PLATE_LAMBDA: f64 = 1e-6;

/// Default "much greater than" factor for the plate-regime flags.
pub const DEFAULT_REGIME_RATIO: f64 = 10.0;

/// Density of a ⁵⁸Ni block: natural nickel (8908 kg/m^3) scaled by the
/// isotopic mass ratio 57.9353 / 58.6934.
pub const RHO_NI_58: f64 = 8792.941836731217;

/// Density of a ⁶⁴Ni block: natural nickel scaled by 63.9280 / 58.6934.
pub const RHO_NI_64: f64 = 9702.464399745117;

fn default_g_newton() -> f64 {
    DEFAULT_G_NEWTON
}

/// Strength and range of the Yukawa correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YukawaParams {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(default = "default_g_newton")]
    pub g_newton: f64,
}

impl YukawaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite, got {}",
                self.alpha
            )));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and positive, got {}",
                self.lambda
            )));
        }
        if !(self.g_newton.is_finite() && self.g_newton > 0.0) {
            return Err(Error::InvalidParams(format!(
                "g_newton must be finite and positive, got {}",
                self.g_newton
            )));
        }
        Ok(())
    }

    /// The plate-limit force law is only certified for lambda <= 1e-6 m.
    pub fn check_plate_limit(&self) -> Result<()> {
        if self.lambda > MAX_PLATE_LAMBDA {
            return Err(Error::AssumptionViolation {
                lambda: self.lambda,
                max_lambda: MAX_PLATE_LAMBDA,
            });
        }
        Ok(())
    }
}

/// Cylindrical source plate with the test mass on its axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSource {
    /// R [m].
    pub radius: f64,
    /// D [m], axial extent.
    pub thickness: f64,
    /// rho [kg/m^3].
    pub density: f64,
    /// h [m], gap between the test mass and the near face.
    pub separation: f64,
}

impl CylinderSource {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius", self.radius),
            ("thickness", self.thickness),
            ("density", self.density),
            ("separation", self.separation),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "cylinder {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// True when the plate-limit closed form is trusted: R at least `ratio`
    /// times both the thickness and the gap.
    pub fn in_plate_regime(&self, ratio: f64) -> bool {
        self.radius >= ratio * self.thickness && self.radius >= ratio * self.separation
    }

    pub fn check_plate_regime(&self) -> Result<()> {
        if !self.in_plate_regime(DEFAULT_REGIME_RATIO) {
            return Err(Error::RegimeViolation {
                radius: self.radius,
                thickness: self.thickness,
                separation: self.separation,
                ratio: DEFAULT_REGIME_RATIO,
            });
        }
        Ok(())
    }
}

/// Test oscillator (the membrane) facing the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillator {
    /// Membrane mass [kg].
    pub mass: f64,
    /// Resonance frequency [rad/s].
    pub omega_b: f64,
    /// Membrane-source gap a [m].
    pub separation_a: f64,
}

impl Oscillator {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("omega_b", self.omega_b),
            ("separation_a", self.separation_a),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "oscillator {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Densities of the two isotopically pure nickel blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopePair {
    /// ⁵⁸Ni block [kg/m^3].
    pub rho_58: f64,
    /// ⁶⁴Ni block [kg/m^3]; must exceed rho_58.
    pub rho_64: f64,
}

impl Default for IsotopePair {
    fn default() -> Self {
        Self {
            rho_58: RHO_NI_58,
            rho_64: RHO_NI_64,
        }
    }
}

impl IsotopePair {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho_58", self.rho_58), ("rho_64", self.rho_64)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.rho_64 > self.rho_58) {
            return Err(Error::InvalidParams(format!(
                "rho_64 ({}) must exceed rho_58 ({})",
                self.rho_64, self.rho_58
            )));
        }
        Ok(())
    }
}

/// Point-mass pair energy `-G m1 m2 / r (1 + alpha e^{-r/lambda})` [J].
pub fn yukawa_pair_potential(m1: f64, m2: f64, r: f64, yp: &YukawaParams) -> f64 {
    assert!(r > 0.0, "pair separation must be positive");
    -yp.g_newton * m1 * m2 / r * (1.0 + yp.alpha * (-r / yp.lambda).exp())
}

/// Newtonian and Yukawa parts of the closed-form cylinder energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderEnergy {
    pub newton: f64,
    pub yukawa: f64,
}

impl CylinderEnergy {
    pub fn total(&self) -> f64 {
        self.newton + self.yukawa
    }
}

/// Plate-limit closed form of the cylinder energy at gap `h` [J].
///
/// Fails with `RegimeViolation` outside `R >= 10 D, R >= 10 h`; use the
/// `_unchecked` variant to evaluate anyway (the result is then unvalidated).
pub fn cylinder_yukawa_energy_closed(
    c: &CylinderSource,
    m: f64,
    yp: &YukawaParams,
) -> Result<CylinderEnergy> {
    c.validate()?;
    yp.validate()?;
    c.check_plate_regime()?;
    Ok(cylinder_yukawa_energy_closed_unchecked(c, m, yp))
}

/// Closed form without the plate-regime gate.
pub fn cylinder_yukawa_energy_closed_unchecked(
    c: &CylinderSource,
    m: f64,
    yp: &YukawaParams,
) -> CylinderEnergy {
    let pref = yp.g_newton * m * c.density * 2.0 * std::f64::consts::PI;
    let newton = -pref * c.radius * c.thickness;
    let lam = yp.lambda;
    // 1 - e^{-D/lambda} via expm1 keeps thin plates (D << lambda) accurate
    let absorb = -(-c.thickness / lam).exp_m1();
    let yukawa = pref
        * yp.alpha
        * lam
        * ((-c.radius / lam).exp() * c.thickness - lam * (-c.separation / lam).exp() * absorb);
    CylinderEnergy { newton, yukawa }
}

/// Exact on-axis Newtonian energy of a uniform cylinder:
/// `-2 pi G m rho (Phi(h+D) - Phi(h))` with
/// `Phi(z) = (z sqrt(z^2+R^2) + R^2 asinh(z/R))/2 - z^2/2`.
fn on_axis_newton_energy(c: &CylinderSource, m: f64, g_newton: f64) -> f64 {
    let r2 = c.radius * c.radius;
    let phi = |z: f64| 0.5 * (z * (z * z + r2).sqrt() + r2 * (z / c.radius).asinh()) - 0.5 * z * z;
    let lo = c.separation;
    let hi = c.separation + c.thickness;
    -2.0 * std::f64::consts::PI * g_newton * m * c.density * (phi(hi) - phi(lo))
}

// Gauss-Legendre nodes/weights on [-1, 1]; the 5- and 7-point rules share a
// cell, their difference is the embedded error estimate.
const G5: [(f64, f64); 5] = [
    (-0.906179845938664, 0.23692688505618908),
    (-0.5384693101056831, 0.47862867049936647),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.47862867049936647),
    (0.906179845938664, 0.23692688505618908),
];
const G7: [(f64, f64); 7] = [
    (-0.9491079123427585, 0.1294849661688697),
    (-0.7415311855993945, 0.27970539148927664),
    (-0.4058451513773972, 0.3818300505051189),
    (0.0, 0.4179591836734694),
    (0.4058451513773972, 0.3818300505051189),
    (0.7415311855993945, 0.27970539148927664),
    (0.9491079123427585, 0.1294849661688697),
];

/// Scaled Yukawa integrand `u e^{-sigma} / sigma`, `sigma = |(u, w)|`, in
/// units of lambda. Bounded by 1 everywhere since `u <= sigma`.
fn scaled_integrand(u: f64, w: f64) -> f64 {
    let sigma = (u * u + w * w).sqrt();
    if sigma == 0.0 {
        return 0.0;
    }
    u * (-sigma).exp() / sigma
}

fn tensor_rule(rule: &[(f64, f64)], u0: f64, u1: f64, w0: f64, w1: f64) -> f64 {
    let cu = 0.5 * (u0 + u1);
    let hu = 0.5 * (u1 - u0);
    let cw = 0.5 * (w0 + w1);
    let hw = 0.5 * (w1 - w0);
    let mut acc = 0.0;
    for &(xu, wu) in rule {
        let u = cu + hu * xu;
        let mut inner = 0.0;
        for &(xw, ww) in rule {
            inner += ww * scaled_integrand(u, cw + hw * xw);
        }
        acc += wu * inner;
    }
    acc * hu * hw
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    u0: f64,
    u1: f64,
    w0: f64,
    w1: f64,
    value: f64,
    err: f64,
}

impl Cell {
    fn evaluate(u0: f64, u1: f64, w0: f64, w1: f64) -> Self {
        let fine = tensor_rule(&G7, u0, u1, w0, w1);
        let coarse = tensor_rule(&G5, u0, u1, w0, w1);
        Cell {
            u0,
            u1,
            w0,
            w1,
            value: fine,
            err: (fine - coarse).abs(),
        }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Quadrature result: exact Newtonian term plus adaptively integrated
/// Yukawa term with its relative error estimate and cell count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEnergy {
    pub newton: f64,
    pub yukawa: f64,
    /// Estimated relative error of the Yukawa term.
    pub error_estimate: f64,
    /// Number of cells evaluated.
    pub cells: usize,
}

impl QuadratureEnergy {
    pub fn total(&self) -> f64 {
        self.newton + self.yukawa
    }
}

/// Exponent width beyond which contributions underflow any f64 total.
const DECAY_HORIZON: f64 = 760.0;
/// Absolute floor so refinement never chases sub-representable mass
/// (e.g. the e^{-R/lambda} corner at macroscopic R).
const ABS_FLOOR: f64 = 1e-300;
const MAX_CELLS: usize = 60_000;

/// Integrates the pair potential over the cylinder volume.
///
/// The Newtonian part has an exact on-axis antiderivative and is taken from
/// it directly. The Yukawa part is reduced to the axisymmetric double
/// integral of `u e^{-sigma}/sigma` over `(r, z)` in units of lambda and
/// integrated by adaptive cell subdivision with an embedded 7/5-point
/// Gauss error estimate, refining the worst cell first. The domain is
/// truncated at the exponential-underflow horizon.
pub fn cylinder_yukawa_energy_quadrature(
    c: &CylinderSource,
    m: f64,
    yp: &YukawaParams,
    tol: f64,
) -> Result<QuadratureEnergy> {
    c.validate()?;
    yp.validate()?;
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidParams(format!(
            "test mass must be finite and positive, got {m}"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "quadrature tolerance must be finite and positive, got {tol}"
        )));
    }

    let newton = on_axis_newton_energy(c, m, yp.g_newton);
    let lam = yp.lambda;
    let w_lo = c.separation / lam;
    let prefactor =
        -2.0 * std::f64::consts::PI * yp.g_newton * m * c.density * yp.alpha * lam * lam;

    // nothing representable survives e^{-w_lo}: the term is exactly zero
    if yp.alpha == 0.0 || w_lo > DECAY_HORIZON {
        return Ok(QuadratureEnergy {
            newton,
            yukawa: 0.0,
            error_estimate: 0.0,
            cells: 0,
        });
    }

    let w_hi = ((c.separation + c.thickness) / lam).min(w_lo + DECAY_HORIZON);
    let u_hi = (c.radius / lam).min(w_lo + DECAY_HORIZON);

    // geometric seed strips, finest toward the near face and the axis where
    // the integrand peaks
    let breaks = |lo: f64, hi: f64| -> Vec<f64> {
        let mut b = vec![lo];
        let span = hi - lo;
        for k in (0..10).rev() {
            let x = lo + span / (1u64 << k) as f64;
            if x > *b.last().unwrap() && x < hi {
                b.push(x);
            }
        }
        b.push(hi);
        b
    };
    let ub = breaks(0.0, u_hi);
    let wb = breaks(w_lo, w_hi);

    let mut heap = BinaryHeap::new();
    let mut cells = 0usize;
    for uw in ub.windows(2) {
        for ww in wb.windows(2) {
            heap.push(Cell::evaluate(uw[0], uw[1], ww[0], ww[1]));
            cells += 1;
        }
    }

    let mut total: f64 = heap.iter().map(|c| c.value).sum();
    let mut err_total: f64 = heap.iter().map(|c| c.err).sum();
    let mut done: Vec<Cell> = Vec::new();

    while err_total > (tol * total.abs()).max(ABS_FLOOR) {
        let worst = match heap.pop() {
            Some(c) => c,
            None => break,
        };
        let du = worst.u1 - worst.u0;
        let dw = worst.w1 - worst.w0;
        // cell too thin to split further in either direction
        if du <= f64::EPSILON * worst.u1.abs().max(1.0)
            && dw <= f64::EPSILON * worst.w1.abs().max(1.0)
        {
            done.push(worst);
            continue;
        }
        if cells + 2 > MAX_CELLS {
            heap.push(worst);
            break;
        }
        let (a, b) = if du >= dw {
            let mid = 0.5 * (worst.u0 + worst.u1);
            (
                Cell::evaluate(worst.u0, mid, worst.w0, worst.w1),
                Cell::evaluate(mid, worst.u1, worst.w0, worst.w1),
            )
        } else {
            let mid = 0.5 * (worst.w0 + worst.w1);
            (
                Cell::evaluate(worst.u0, worst.u1, worst.w0, mid),
                Cell::evaluate(worst.u0, worst.u1, mid, worst.w1),
            )
        };
        cells += 2;
        total += a.value + b.value - worst.value;
        err_total += a.err + b.err - worst.err;
        heap.push(a);
        heap.push(b);
    }

    // recompute the sums in a fixed order to shed accumulated drift
    let mut all: Vec<Cell> = heap.into_vec();
    all.extend(done);
    all.sort_by(|x, y| {
        (x.w0, x.u0)
            .partial_cmp(&(y.w0, y.u0))
            .unwrap_or(Ordering::Equal)
    });
    let total: f64 = all.iter().map(|c| c.value).sum();
    let err_total: f64 = all.iter().map(|c| c.err).sum();

    let error_estimate = if total != 0.0 {
        err_total / total.abs()
    } else {
        0.0
    };
    if error_estimate > tol && err_total > ABS_FLOOR {
        return Err(Error::QuadratureNonConvergence {
            error_estimate,
            cells,
        });
    }

    Ok(QuadratureEnergy {
        newton,
        yukawa: prefactor * total,
        error_estimate,
        cells,
    })
}

/// Plate-limit Yukawa force on the membrane:
/// `-e^{-a/lambda} G m rho alpha 2 pi lambda` [N].
///
/// Assumes the source is much thicker than lambda, so the plate absorbs the
/// full exponential tail.
pub fn yukawa_plate_force(rho: f64, osc: &Oscillator, yp: &YukawaParams) -> Result<f64> {
    osc.validate()?;
    yp.validate()?;
    yp.check_plate_limit()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParams(format!(
            "density must be finite and positive, got {rho}"
        )));
    }
    Ok(-(-osc.separation_a / yp.lambda).exp()
        * yp.g_newton
        * osc.mass
        * rho
        * yp.alpha
        * 2.0
        * std::f64::consts::PI
        * yp.lambda)
}

/// Gradient of the plate force with respect to the gap:
/// `e^{-a/lambda} G m rho alpha 2 pi` [N/m].
pub fn yukawa_plate_force_gradient(rho: f64, osc: &Oscillator, yp: &YukawaParams) -> Result<f64> {
    osc.validate()?;
    yp.validate()?;
    yp.check_plate_limit()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParams(format!(
            "density must be finite and positive, got {rho}"
        )));
    }
    Ok((-osc.separation_a / yp.lambda).exp()
        * yp.g_newton
        * osc.mass
        * rho
        * yp.alpha
        * 2.0
        * std::f64::consts::PI)
}

/// Resonance pull of a force gradient: `-(dF/da) / (2 m omega_b)` [rad/s].
pub fn frequency_shift(force_gradient: f64, osc: &Oscillator) -> f64 {
    -force_gradient / (2.0 * osc.mass * osc.omega_b)
}

/// Frequency shifts induced on the membrane by each isotope block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferentialShift {
    /// Shift facing the ⁵⁸Ni block [rad/s].
    pub delta_r: f64,
    /// Shift facing the ⁶⁴Ni block [rad/s].
    pub delta_b: f64,
}

impl DifferentialShift {
    pub fn difference(&self) -> f64 {
        self.delta_r - self.delta_b
    }
}

/// Shifts for the two isotope blocks under identical geometry.
///
/// The membrane mass appears in both the plate-force gradient and the
/// shift denominator, so it cancels; the formula below is the canceled
/// form, making the result bit-identical under any mass rescaling. All
/// density-independent backgrounds are taken equal between the blocks and
/// never enter.
pub fn differential_shift(
    pair: &IsotopePair,
    osc: &Oscillator,
    yp: &YukawaParams,
) -> Result<DifferentialShift> {
    pair.validate()?;
    osc.validate()?;
    yp.validate()?;
    yp.check_plate_limit()?;
    let common = (-osc.separation_a / yp.lambda).exp() * yp.g_newton * yp.alpha
        * std::f64::consts::PI
        / osc.omega_b;
    Ok(DifferentialShift {
        delta_r: -common * pair.rho_58,
        delta_b: -common * pair.rho_64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GN: f64 = 6.674e-11;

    fn example_cylinder() -> CylinderSource {
        CylinderSource {
            radius: 1e-2,
            thickness: 1e-3,
            density: 8908.0,
            separation: 5e-9,
        }
    }

    fn yp(alpha: f64, lambda: f64) -> YukawaParams {
        YukawaParams {
            alpha,
            lambda,
            g_newton: GN,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn isotope_density_constants_follow_mass_scaling() {
        assert_eq!(RHO_NI_58, 8908.0 * 57.9353 / 58.6934);
        assert_eq!(RHO_NI_64, 8908.0 * 63.9280 / 58.6934);
        assert!(IsotopePair::default().validate().is_ok());
    }

    #[test]
    fn pair_potential_examples() {
        let p = yp(1.0, 1.0);
        // reference from extended-precision arithmetic of the same formula
        assert!(rel(
            yukawa_pair_potential(1.0, 1.0, 1.0, &p),
            -9.129227390378206e-11
        ) < 1e-15);
        let newtonian = yukawa_pair_potential(1.0, 1.0, 1.0, &yp(0.0, 1.0));
        assert_eq!(newtonian, -GN);
        let far = yukawa_pair_potential(1.0, 1.0, 100.0, &yp(1.0, 1.0));
        assert!(rel(far, -GN / 100.0) < 1e-12);
    }

    #[test]
    fn closed_form_matches_reference_values() {
        let e = cylinder_yukawa_energy_closed(&example_cylinder(), 1e-15, &yp(1.0, 1e-9)).unwrap();
        assert!(rel(e.newton, -3.7354788261695832e-26) < 1e-14);
        assert!(rel(e.yukawa, -2.5169458346936646e-41) < 1e-14);
    }

    #[test]
    fn closed_form_alpha_zero_is_h_independent() {
        let mut c = example_cylinder();
        let e1 = cylinder_yukawa_energy_closed(&c, 1e-15, &yp(0.0, 1e-9)).unwrap();
        c.separation = 7e-8;
        let e2 = cylinder_yukawa_energy_closed(&c, 1e-15, &yp(0.0, 1e-9)).unwrap();
        assert_eq!(e1.yukawa, 0.0);
        assert_eq!(e1.total(), e2.total());
    }

    #[test]
    fn regime_gate_rejects_squat_cylinders() {
        let c = CylinderSource {
            radius: 1e-3,
            thickness: 1e-3,
            density: 8908.0,
            separation: 5e-9,
        };
        assert!(matches!(
            cylinder_yukawa_energy_closed(&c, 1e-15, &yp(1.0, 1e-9)),
            Err(Error::RegimeViolation { .. })
        ));
        // forced evaluation still works, just unvalidated
        let e = cylinder_yukawa_energy_closed_unchecked(&c, 1e-15, &yp(1.0, 1e-9));
        assert!(e.total() < 0.0);
    }

    #[test]
    fn quadrature_agrees_with_closed_form_on_reference_geometry() {
        let q = cylinder_yukawa_energy_quadrature(&example_cylinder(), 1e-15, &yp(1.0, 1e-9), 1e-7)
            .unwrap();
        // exact on-axis Newtonian value, from 60-digit evaluation
        assert!(rel(q.newton, -3.5549196028146515e-26) < 1e-13);
        assert!(rel(q.yukawa, -2.5169458346936646e-41) < 1e-6);
        assert!(q.error_estimate <= 1e-7);
        assert!(q.cells > 0);
    }

    #[test]
    fn quadrature_alpha_zero_reduces_to_exact_newton() {
        let q =
            cylinder_yukawa_energy_quadrature(&example_cylinder(), 1e-15, &yp(0.0, 1e-9), 1e-9)
                .unwrap();
        assert_eq!(q.yukawa, 0.0);
        assert_eq!(q.cells, 0);
        assert_eq!(q.total(), q.newton);
    }

    #[test]
    fn quadrature_thin_disk_scales_linearly_in_thickness() {
        let lambda = 1e-7;
        let base = CylinderSource {
            radius: 1e-4,
            thickness: 1e-9,
            density: 8908.0,
            separation: 2e-8,
        };
        let e1 = cylinder_yukawa_energy_quadrature(&base, 1e-15, &yp(1.0, lambda), 1e-9)
            .unwrap()
            .yukawa;
        let half = CylinderSource {
            thickness: base.thickness / 2.0,
            ..base
        };
        let e2 = cylinder_yukawa_energy_quadrature(&half, 1e-15, &yp(1.0, lambda), 1e-9)
            .unwrap()
            .yukawa;
        assert!(rel(e1 / e2, 2.0) < 1e-2, "ratio {}", e1 / e2);
    }

    #[test]
    fn plate_force_matches_reference_and_limits() {
        let osc = Oscillator {
            mass: 1e-15,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        let f = yukawa_plate_force(8908.0, &osc, &yp(1.0, 1e-9)).unwrap();
        assert!(rel(f, -2.5169458346936646e-32) < 1e-14);
        assert_eq!(
            yukawa_plate_force(8908.0, &osc, &yp(0.0, 1e-9)).unwrap(),
            0.0
        );
        let contact = Oscillator {
            separation_a: 1e-300,
            ..osc
        };
        let fc = yukawa_plate_force(8908.0, &contact, &yp(1.0, 1e-9)).unwrap();
        assert!(rel(fc, -GN * 1e-15 * 8908.0 * 2.0 * std::f64::consts::PI * 1e-9) < 1e-12);
        assert!(matches!(
            yukawa_plate_force(8908.0, &osc, &yp(1.0, 2e-6)),
            Err(Error::AssumptionViolation { .. })
        ));
    }

    #[test]
    fn frequency_shift_sign_and_units() {
        let osc = Oscillator {
            mass: 1e-15,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        assert_eq!(frequency_shift(0.0, &osc), 0.0);
        assert!(frequency_shift(1e-20, &osc) < 0.0);
        let grad = 2.0 * osc.mass * osc.omega_b * osc.omega_b;
        assert_eq!(frequency_shift(grad, &osc), -osc.omega_b);
    }

    #[test]
    fn differential_shift_matches_reference() {
        let osc = Oscillator {
            mass: 1e-15,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        let s = differential_shift(&IsotopePair::default(), &osc, &yp(1e10, 1e-9)).unwrap();
        assert!(rel(s.delta_r, -1.2422181371050908e-3) < 1e-14);
        assert!(rel(s.delta_b, -1.3707104488775279e-3) < 1e-14);
        assert!(rel(s.difference(), 1.2849231177243714e-4) < 1e-12);
    }

    #[test]
    fn differential_shift_is_mass_invariant_bitwise() {
        let yp10 = yp(1e10, 1e-9);
        let pair = IsotopePair::default();
        let base = Oscillator {
            mass: 1e-15,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        let s0 = differential_shift(&pair, &base, &yp10).unwrap();
        for scale in [1e-3, 0.5, 3.0, 1e6] {
            let scaled = Oscillator {
                mass: base.mass * scale,
                ..base
            };
            let s = differential_shift(&pair, &scaled, &yp10).unwrap();
            assert_eq!(s.delta_r.to_bits(), s0.delta_r.to_bits());
            assert_eq!(s.delta_b.to_bits(), s0.delta_b.to_bits());
        }
    }

    #[test]
    fn gradient_route_agrees_with_canceled_form() {
        let osc = Oscillator {
            mass: 3.1e-16,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        let p = yp(1e10, 1e-9);
        let pair = IsotopePair::default();
        let s = differential_shift(&pair, &osc, &p).unwrap();
        let via_gradient =
            frequency_shift(yukawa_plate_force_gradient(pair.rho_58, &osc, &p).unwrap(), &osc);
        assert!(rel(via_gradient, s.delta_r) < 1e-14);
    }

    #[test]
    fn equal_densities_give_zero_difference() {
        let osc = Oscillator {
            mass: 1e-15,
            omega_b: 1e5,
            separation_a: 5e-9,
        };
        let pair = IsotopePair {
            rho_58: 9000.0,
            rho_64: 9000.0,
        };
        // equal densities violate the pair invariant, so build shifts directly
        assert!(pair.validate().is_err());
        let sr = frequency_shift(
            yukawa_plate_force_gradient(9000.0, &osc, &yp(1.0, 1e-9)).unwrap(),
            &osc,
        );
        let sb = frequency_shift(
            yukawa_plate_force_gradient(9000.0, &osc, &yp(1.0, 1e-9)).unwrap(),
            &osc,
        );
        assert_eq!(sr - sb, 0.0);
    }
}
