//! End-to-end prospective exclusion bound on the Yukawa strength.
//!
//! The chain runs: splitting resolution `delta_d_min` -> smallest detectable
//! frequency shift (inverting the critically tracked response) -> bound on
//! `|alpha|` at each interaction range from the isotope-differential scheme,
//!
//! ```text
//! |alpha|(lambda) = omega_b |delta_omega_b|_m e^{a/lambda}
//!                   / (G_newton pi (rho_64 - rho_58))
//! ```
//!
//! The formula follows from differentiating the plate force law, where the
//! `2 pi lambda` prefactor loses its lambda to the derivative, leaving no
//! residual lambda power; the round-trip tests against `differential_shift`
//! hold it to that form.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{invert_min_shift, BasePoint, MinShiftResult};
use crate::yukawa::{IsotopePair, Oscillator, YukawaParams, DEFAULT_G_NEWTON, MAX_PLATE_LAMBDA};

/// Smallest separation covered by the default grid [m].
pub const DEFAULT_LAMBDA_MIN: f64 = 3e-10;
/// Largest separation covered by the default grid; also the plate-limit cap.
pub const DEFAULT_LAMBDA_MAX: f64 = 1e-6;
/// Points in the default grid.
pub const DEFAULT_LAMBDA_POINTS: usize = 200;

/// Default membrane-source gap a [m].
pub const DEFAULT_SEPARATION_A: f64 = 5e-9;

fn default_separation_a() -> f64 {
    DEFAULT_SEPARATION_A
}

fn default_g_newton() -> f64 {
    DEFAULT_G_NEWTON
}

fn default_grid() -> Vec<f64> {
    default_lambda_grid()
}

/// Log-spaced grid of interaction ranges with exact endpoints.
pub fn default_lambda_grid() -> Vec<f64> {
    log_spaced(DEFAULT_LAMBDA_MIN, DEFAULT_LAMBDA_MAX, DEFAULT_LAMBDA_POINTS)
}

/// `n` log-spaced points over `[lo, hi]`, endpoints exact.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && lo < hi, "need n >= 2 and 0 < lo < hi");
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Everything the bound depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintInput {
    /// Operating point (omega_b, delta_c); the coupling is chosen by the
    /// critical-tracking readout.
    pub working: BasePoint,
    /// Resolvable splitting change [rad/s].
    pub delta_d_min: f64,
    #[serde(default)]
    pub pair: IsotopePair,
    /// Membrane-source gap a [m].
    #[serde(default = "default_separation_a")]
    pub separation_a: f64,
    #[serde(default = "default_g_newton")]
    pub g_newton: f64,
    /// Interaction ranges to evaluate, strictly increasing, all <= 1e-6 m.
    #[serde(default = "default_grid")]
    pub lambda_grid: Vec<f64>,
}

impl ConstraintInput {
    pub fn validate(&self) -> Result<()> {
        self.working.validate()?;
        self.pair.validate()?;
        if !(self.delta_d_min.is_finite() && self.delta_d_min > 0.0) {
            return Err(Error::InvalidParams(format!(
                "delta_d_min must be finite and positive, got {}",
                self.delta_d_min
            )));
        }
        if !(self.separation_a.is_finite() && self.separation_a > 0.0) {
            return Err(Error::InvalidParams(format!(
                "separation_a must be finite and positive, got {}",
                self.separation_a
            )));
        }
        if !(self.g_newton.is_finite() && self.g_newton > 0.0) {
            return Err(Error::InvalidParams(format!(
                "g_newton must be finite and positive, got {}",
                self.g_newton
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidParams("lambda_grid is empty".into()));
        }
        if self.lambda_grid.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::InvalidParams(
                "lambda_grid must be strictly increasing".into(),
            ));
        }
        let first = self.lambda_grid[0];
        if !(first.is_finite() && first > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda_grid values must be positive, got {first}"
            )));
        }
        let last = *self.lambda_grid.last().unwrap();
        if last > MAX_PLATE_LAMBDA {
            return Err(Error::AssumptionViolation {
                lambda: last,
                max_lambda: MAX_PLATE_LAMBDA,
            });
        }
        Ok(())
    }
}

/// Default inversion bracket for the shift floor, relative to omega_b.
pub fn default_bracket(omega_b: f64) -> (f64, f64) {
    (1e-12 * omega_b, 0.9 * omega_b)
}

/// Smallest detectable differential shift: inverts the tracked splitting
/// response at `delta_d_min`. The two-block readout is taken at face value,
/// `|delta_r - delta_b|_m ~= |delta_omega_b|_m`.
pub fn min_detectable_difference(working: &BasePoint, delta_d_min: f64) -> Result<MinShiftResult> {
    invert_min_shift(working, delta_d_min, default_bracket(working.omega_b), None)
}

/// Bound on the Yukawa strength at one interaction range.
pub fn alpha_bound(lambda: f64, shift_floor: f64, input: &ConstraintInput) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite and positive, got {lambda}"
        )));
    }
    if lambda > MAX_PLATE_LAMBDA {
        return Err(Error::AssumptionViolation {
            lambda,
            max_lambda: MAX_PLATE_LAMBDA,
        });
    }
    if !(shift_floor.is_finite() && shift_floor >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "shift_floor must be finite and non-negative, got {shift_floor}"
        )));
    }
    Ok(
        input.working.omega_b * shift_floor * (input.separation_a / lambda).exp()
            / (input.g_newton * std::f64::consts::PI * (input.pair.rho_64 - input.pair.rho_58)),
    )
}

/// Provenance of the shift floor used for a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub input: ConstraintInput,
    /// |delta_omega_b|_m actually used [rad/s].
    pub shift_floor: f64,
    /// Present when the floor came from the splitting inversion; absent for
    /// an explicit override. Reruns recompute the inversion when present.
    pub inversion: Option<MinShiftResult>,
}

/// Prospective exclusion bound over the lambda grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionCurve {
    /// `(lambda [m], |alpha|)` pairs, strictly decreasing in |alpha|.
    pub points: Vec<(f64, f64)>,
    pub meta: CurveMeta,
}

/// Full pipeline: inversion for the shift floor, then the bound per range.
pub fn exclusion_curve(input: &ConstraintInput) -> Result<ExclusionCurve> {
    input.validate()?;
    let inv = min_detectable_difference(&input.working, input.delta_d_min)?;
    build_curve(input, inv.min_detectable_shift, Some(inv))
}

/// Pipeline with an externally supplied shift floor (e.g. the quoted 10 Hz).
pub fn exclusion_curve_with_floor(
    input: &ConstraintInput,
    shift_floor: f64,
) -> Result<ExclusionCurve> {
    input.validate()?;
    build_curve(input, shift_floor, None)
}

fn build_curve(
    input: &ConstraintInput,
    shift_floor: f64,
    inversion: Option<MinShiftResult>,
) -> Result<ExclusionCurve> {
    if !(shift_floor.is_finite() && shift_floor > 0.0) {
        return Err(Error::InvalidParams(format!(
            "shift floor must be finite and positive, got {shift_floor}"
        )));
    }
    let points = input
        .lambda_grid
        .iter()
        .map(|&lam| Ok((lam, alpha_bound(lam, shift_floor, input)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    if let Some(pair) = points.windows(2).find(|p| !(p[0].1 > p[1].1)) {
        return Err(Error::InvalidParams(format!(
            "exclusion curve not strictly decreasing between lambda = {} and {}",
            pair[0].0, pair[1].0
        )));
    }
    if points.iter().any(|&(_, a)| !(a > 0.0)) {
        return Err(Error::InvalidParams(
            "exclusion curve contains a non-positive bound".into(),
        ));
    }
    Ok(ExclusionCurve {
        points,
        meta: CurveMeta {
            input: input.clone(),
            shift_floor,
            inversion,
        },
    })
}

/// Re-runs the pipeline recorded in a meta sidecar.
pub fn rebuild_from_meta(meta: &CurveMeta) -> Result<ExclusionCurve> {
    if meta.inversion.is_some() {
        exclusion_curve(&meta.input)
    } else {
        exclusion_curve_with_floor(&meta.input, meta.shift_floor)
    }
}

/// Oscillator matching a curve point, for forward-consistency checks.
/// The mass is arbitrary; it cancels in the differential shift.
pub fn round_trip_difference(lambda: f64, abs_alpha: f64, input: &ConstraintInput) -> Result<f64> {
    let osc = Oscillator {
        mass: 1.0,
        omega_b: input.working.omega_b,
        separation_a: input.separation_a,
    };
    let yp = YukawaParams {
        alpha: abs_alpha,
        lambda,
        g_newton: input.g_newton,
    };
    let s = crate::yukawa::differential_shift(&input.pair, &osc, &yp)?;
    Ok(s.difference().abs())
}

/// Digitized published bound, read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorBound {
    pub label: String,
    /// `(lambda [m], |alpha|)`, strictly increasing in lambda.
    pub points: Vec<(f64, f64)>,
}

impl PriorBound {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let label = label.into();
        if points.len() < 2 {
            return Err(Error::PriorCsv(format!(
                "prior '{label}' needs at least two points"
            )));
        }
        if points
            .iter()
            .any(|&(l, a)| !(l.is_finite() && l > 0.0 && a.is_finite() && a > 0.0))
        {
            return Err(Error::PriorCsv(format!(
                "prior '{label}' contains non-positive or non-finite values"
            )));
        }
        if points.windows(2).any(|p| !(p[0].0 < p[1].0)) {
            return Err(Error::PriorCsv(format!(
                "prior '{label}' must be strictly increasing in lambda"
            )));
        }
        Ok(Self { label, points })
    }

    /// Parses `lambda_m,abs_alpha` CSV rows.
    pub fn from_csv(reader: impl BufRead, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let mut points = Vec::new();
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            Some((_, Err(e))) => return Err(Error::PriorCsv(format!("{label}: {e}"))),
            None => return Err(Error::PriorCsv(format!("{label}: empty file"))),
        };
        if header.trim() != "lambda_m,abs_alpha" {
            return Err(Error::PriorCsv(format!(
                "{label}: expected header 'lambda_m,abs_alpha', got '{}'",
                header.trim()
            )));
        }
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::PriorCsv(format!("{label}: {e}")))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| {
                        Error::PriorCsv(format!("{label}: line {}: missing field", idx + 1))
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::PriorCsv(format!("{label}: line {}: {e}", idx + 1)))
            };
            let lam = parse(fields.next())?;
            let alpha = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::PriorCsv(format!(
                    "{label}: line {}: expected two fields",
                    idx + 1
                )));
            }
            points.push((lam, alpha));
        }
        Self::new(label, points)
    }

    pub fn lambda_span(&self) -> (f64, f64) {
        (self.points[0].0, self.points.last().unwrap().0)
    }

    /// Log-log linear interpolation; errors outside the tabulated span.
    pub fn interpolate_log_log(&self, lambda: f64) -> Result<f64> {
        interpolate_log_log(&self.points, lambda).ok_or_else(|| {
            let (lo, hi) = self.lambda_span();
            Error::OutOfRange {
                label: self.label.clone(),
                lambda,
                lo,
                hi,
            }
        })
    }
}

/// Log-log linear interpolation over sorted `(x, y)` pairs, both positive.
pub fn interpolate_log_log(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (points.first()?, points.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let j = points.partition_point(|&(px, _)| px < x);
    if j < points.len() && points[j].0 == x {
        return Some(points[j].1);
    }
    let (x0, y0) = points[j - 1];
    let (x1, y1) = points[j];
    let t = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    Some((y0.ln() + t * (y1.ln() - y0.ln())).exp())
}

/// One prior evaluated at the query range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub label: String,
    pub prior_alpha: f64,
    /// prior / ours; > 1 means our bound is tighter there.
    pub ratio: f64,
}

/// A prior that could not be evaluated at the query range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPrior {
    pub label: String,
    pub span: (f64, f64),
}

/// Improvement report against previously published bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub lambda_query: f64,
    pub ours_alpha: f64,
    pub entries: Vec<ComparisonEntry>,
    pub skipped: Vec<SkippedPrior>,
    /// Lambda span of our grid where our bound undercuts every covering
    /// prior; `None` when no grid point qualifies.
    pub most_stringent: Option<(f64, f64)>,
}

/// Evaluates prior/ours ratios at `lambda_query` and locates the region
/// where our curve is the most stringent. Priors not covering the query are
/// skipped, not fatal.
pub fn compare_bounds(
    ours: &ExclusionCurve,
    priors: &[PriorBound],
    lambda_query: f64,
) -> Result<ComparisonReport> {
    let ours_alpha = interpolate_log_log(&ours.points, lambda_query).ok_or_else(|| {
        Error::OutOfRange {
            label: "exclusion curve".into(),
            lambda: lambda_query,
            lo: ours.points.first().map(|p| p.0).unwrap_or(f64::NAN),
            hi: ours.points.last().map(|p| p.0).unwrap_or(f64::NAN),
        }
    })?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for prior in priors {
        match prior.interpolate_log_log(lambda_query) {
            Ok(prior_alpha) => entries.push(ComparisonEntry {
                label: prior.label.clone(),
                prior_alpha,
                ratio: prior_alpha / ours_alpha,
            }),
            Err(Error::OutOfRange { .. }) => skipped.push(SkippedPrior {
                label: prior.label.clone(),
                span: prior.lambda_span(),
            }),
            Err(e) => return Err(e),
        }
    }

    let mut lo = None;
    let mut hi = None;
    for &(lam, alpha) in &ours.points {
        let mut covered = false;
        let mut beats_all = true;
        for prior in priors {
            if let Ok(pa) = prior.interpolate_log_log(lam) {
                covered = true;
                if alpha >= pa {
                    beats_all = false;
                    break;
                }
            }
        }
        if covered && beats_all {
            lo.get_or_insert(lam);
            hi = Some(lam);
        }
    }
    let most_stringent = lo.zip(hi);

    Ok(ComparisonReport {
        lambda_query,
        ours_alpha,
        entries,
        skipped,
        most_stringent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input() -> ConstraintInput {
        ConstraintInput {
            working: BasePoint {
                omega_b: 1e5,
                delta_c: 1e5,
            },
            delta_d_min: 1e3,
            pair: IsotopePair::default(),
            separation_a: 5e-9,
            g_newton: 6.674e-11,
            lambda_grid: default_lambda_grid(),
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn alpha_bound_matches_reference() {
        // frozen from a 60-digit evaluation of the same formula
        let a = alpha_bound(1e-9, 10.0, &input()).unwrap();
        assert!(rel(a, 778256680268172.9) < 1e-14);
        assert_eq!(alpha_bound(1e-9, 0.0, &input()).unwrap(), 0.0);
        assert!(matches!(
            alpha_bound(2e-6, 10.0, &input()),
            Err(Error::AssumptionViolation { .. })
        ));
    }

    #[test]
    fn tail_has_no_lambda_power() {
        // log-bound differences must be explained by the exponent alone
        let input = input();
        let (l1, l2) = (1e-9, 7.3e-8);
        let a1 = alpha_bound(l1, 10.0, &input).unwrap();
        let a2 = alpha_bound(l2, 10.0, &input).unwrap();
        let lhs = a1.ln() - a2.ln();
        let rhs = input.separation_a * (1.0 / l1 - 1.0 / l2);
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 3e-10);
        assert_eq!(*g.last().unwrap(), 1e-6);
        assert!(g.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn min_detectable_difference_matches_reference() {
        let working = BasePoint {
            omega_b: 1e5,
            delta_c: 1e5,
        };
        let r = min_detectable_difference(&working, 1e3).unwrap();
        assert!(rel(r.min_detectable_shift, 20.43475220508055) < 1e-9);
        let r4 = min_detectable_difference(&working, 4e3).unwrap();
        assert!(r4.min_detectable_shift > r.min_detectable_shift);
    }

    #[test]
    fn curve_is_strictly_decreasing_and_round_trips() {
        let input = input();
        let curve = exclusion_curve(&input).unwrap();
        assert_eq!(curve.points.len(), 200);
        assert!(curve.points.windows(2).all(|p| p[0].1 > p[1].1));
        let floor = curve.meta.shift_floor;
        for &(lam, alpha) in curve.points.iter().step_by(37) {
            let back = round_trip_difference(lam, alpha, &input).unwrap();
            assert!(rel(back, floor) < 1e-10, "lambda {lam}: {back} vs {floor}");
        }
    }

    #[test]
    fn floor_override_scales_linearly() {
        let input = input();
        let c1 = exclusion_curve_with_floor(&input, 10.0).unwrap();
        let c2 = exclusion_curve_with_floor(&input, 20.0).unwrap();
        for (p1, p2) in c1.points.iter().zip(&c2.points) {
            assert_eq!(p2.1, 2.0 * p1.1);
        }
        assert!(c1.meta.inversion.is_none());
    }

    #[test]
    fn halving_density_gap_doubles_bound() {
        let mut halved = input();
        halved.pair.rho_64 = halved.pair.rho_58 + (halved.pair.rho_64 - halved.pair.rho_58) / 2.0;
        let a1 = alpha_bound(1e-9, 10.0, &input()).unwrap();
        let a2 = alpha_bound(1e-9, 10.0, &halved).unwrap();
        assert!(rel(a2, 2.0 * a1) < 1e-15);
    }

    #[test]
    fn meta_rebuild_is_bit_identical() {
        let curve = exclusion_curve(&input()).unwrap();
        let json = serde_json::to_string(&curve.meta).unwrap();
        let meta: CurveMeta = serde_json::from_str(&json).unwrap();
        let again = rebuild_from_meta(&meta).unwrap();
        assert_eq!(curve.points.len(), again.points.len());
        for (a, b) in curve.points.iter().zip(&again.points) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn prior_csv_parses_and_validates() {
        let csv = "lambda_m,abs_alpha\n1e-9,1e15\n1e-8,1e12\n";
        let p = PriorBound::from_csv(csv.as_bytes(), "demo").unwrap();
        assert_eq!(p.points.len(), 2);
        assert_eq!(p.lambda_span(), (1e-9, 1e-8));

        let bad_header = "lambda,alpha\n1e-9,1e15\n";
        assert!(PriorBound::from_csv(bad_header.as_bytes(), "x").is_err());
        let unsorted = "lambda_m,abs_alpha\n1e-8,1e12\n1e-9,1e15\n";
        assert!(PriorBound::from_csv(unsorted.as_bytes(), "x").is_err());
        let negative = "lambda_m,abs_alpha\n1e-9,-3\n1e-8,1e12\n";
        assert!(PriorBound::from_csv(negative.as_bytes(), "x").is_err());
        let garbage = "lambda_m,abs_alpha\n1e-9,abc\n";
        assert!(PriorBound::from_csv(garbage.as_bytes(), "x").is_err());
    }

    #[test]
    fn power_law_interpolation_is_exact() {
        // y = K x^p is a straight line in log-log space, so interpolation
        // must reproduce it to rounding
        let k = 3.7e2;
        let p = -2.4;
        let f = |x: f64| k * x.powf(p);
        let prior = PriorBound::new(
            "power",
            vec![(1e-10, f(1e-10)), (1e-8, f(1e-8)), (1e-6, f(1e-6))],
        )
        .unwrap();
        for x in [3.3e-10, 1e-9, 4.7e-8, 9.9e-7] {
            let y = prior.interpolate_log_log(x).unwrap();
            assert!(rel(y, f(x)) < 1e-12, "x = {x}");
        }
        assert!(matches!(
            prior.interpolate_log_log(1e-11),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn compare_reports_ratios_and_skips_uncovering_priors() {
        let input = input();
        let ours = exclusion_curve_with_floor(&input, 10.0).unwrap();
        let identical = PriorBound::new("self", ours.points.clone()).unwrap();
        let seven_x = PriorBound::new(
            "7x",
            ours.points.iter().map(|&(l, a)| (l, 7.0 * a)).collect(),
        )
        .unwrap();
        let narrow = PriorBound::new("narrow", vec![(1e-8, 1e10), (1e-7, 1e9)]).unwrap();

        let report = compare_bounds(&ours, &[identical, seven_x, narrow], 1e-9).unwrap();
        assert!(rel(report.entries[0].ratio, 1.0) < 1e-12);
        assert!(rel(report.entries[1].ratio, 7.0) < 1e-12);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].label, "narrow");
        // against the 7x prior (and ties with itself) we are never strictly
        // better everywhere; the identical prior blocks strictness
        assert!(report.most_stringent.is_none());

        let report = compare_bounds(
            &ours,
            &[PriorBound::new(
                "loose",
                ours.points.iter().map(|&(l, a)| (l, 2.0 * a)).collect(),
            )
            .unwrap()],
            1e-9,
        )
        .unwrap();
        let (lo, hi) = report.most_stringent.unwrap();
        assert_eq!(lo, ours.points[0].0);
        assert_eq!(hi, ours.points.last().unwrap().0);
    }
}
