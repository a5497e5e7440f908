//! Polynomial damage curves: mortality relative risk (quartic) and task
//! productivity (cubic) as functions of indoor air temperature.
//!
//! Both curves are least-squares fits to tabulated points and are then
//! normalized: the relative-risk minimum over the valid range is scaled to 1,
//! and the productivity maximum is scaled to 1.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid spacing used to check curve normalization (°C).
pub const NORMALIZATION_GRID_STEP: f64 = 0.1;

/// Default cold-limb relative-risk points (°C, RR). Minimum-mortality
/// temperature sits near 20 °C with a flat bottom across the thermostat band.
pub const DEFAULT_RR_POINTS: [[f64; 2]; 12] = [
    [-15.0, 1.6186],
    [-10.0, 1.369],
    [-5.0, 1.2031],
    [0.0, 1.1],
    [5.0, 1.0416],
    [10.0, 1.013],
    [15.0, 1.0021],
    [18.0, 1.0003],
    [20.0, 1.0],
    [22.0, 1.0002],
    [24.0, 1.0005],
    [26.0, 1.0008],
];
pub const DEFAULT_RR_RANGE: [f64; 2] = [-15.0, 26.0];

/// Default relative task performance points (°C, level), peak near 21.7 °C.
pub const DEFAULT_PRODUCTIVITY_POINTS: [[f64; 2]; 19] = [
    [15.0, 0.9019],
    [16.0, 0.9309],
    [17.0, 0.9542],
    [18.0, 0.9723],
    [19.0, 0.9854],
    [20.0, 0.994],
    [21.0, 0.9983],
    [22.0, 0.9989],
    [23.0, 0.9961],
    [24.0, 0.9902],
    [25.0, 0.9816],
    [26.0, 0.9707],
    [27.0, 0.9579],
    [28.0, 0.9435],
    [29.0, 0.9279],
    [30.0, 0.9115],
    [31.0, 0.8946],
    [32.0, 0.8777],
    [33.0, 0.8611],
];
pub const DEFAULT_PRODUCTIVITY_RANGE: [f64; 2] = [15.0, 33.0];

/// How a curve is specified in configuration: either tabulated points to fit,
/// or explicit coefficients (highest power first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Fit {
        fit_points: Vec<[f64; 2]>,
        valid_range: [f64; 2],
    },
    Coefficients {
        coefficients: Vec<f64>,
        valid_range: [f64; 2],
    },
}

impl CurveSpec {
    pub fn default_rr() -> Self {
        CurveSpec::Fit {
            fit_points: DEFAULT_RR_POINTS.to_vec(),
            valid_range: DEFAULT_RR_RANGE,
        }
    }

    pub fn default_productivity() -> Self {
        CurveSpec::Fit {
            fit_points: DEFAULT_PRODUCTIVITY_POINTS.to_vec(),
            valid_range: DEFAULT_PRODUCTIVITY_RANGE,
        }
    }
}

/// Where a fitted curve came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProvenance {
    pub points: Vec<[f64; 2]>,
    /// RMS residual of the raw least-squares fit, before normalization.
    pub rms_residual: f64,
    /// Divisor applied to the raw coefficients (raw extremum value).
    pub normalization: f64,
    /// Location of the normalized extremum (°C).
    pub extremum_at: f64,
}

/// Quartic relative risk of mortality, `a1 T^4 + a2 T^3 + a3 T^2 + a4 T + a5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RRModel {
    pub coefficients: [f64; 5],
    pub valid_range: [f64; 2],
    pub provenance: Option<FitProvenance>,
}

/// Cubic relative productivity, `d1 T^3 + d2 T^2 + d3 T + d4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductivityModel {
    pub coefficients: [f64; 4],
    pub valid_range: [f64; 2],
    pub provenance: Option<FitProvenance>,
}

impl RRModel {
    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        match spec {
            CurveSpec::Fit {
                fit_points,
                valid_range,
            } => Self::fit(fit_points, *valid_range),
            CurveSpec::Coefficients {
                coefficients,
                valid_range,
            } => {
                let coefficients: [f64; 5] = coefficients.as_slice().try_into().map_err(|_| {
                    Error::Config(format!(
                        "relative risk model needs 5 coefficients, got {}",
                        coefficients.len()
                    ))
                })?;
                Self::from_coefficients(coefficients, *valid_range)
            }
        }
    }

    /// Accepts user coefficients only if they are already normalized.
    pub fn from_coefficients(coefficients: [f64; 5], valid_range: [f64; 2]) -> Result<Self> {
        let model = Self {
            coefficients,
            valid_range,
            provenance: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Least-squares quartic through `points`, scaled so its minimum over
    /// `valid_range` is exactly 1.
    pub fn fit(points: &[[f64; 2]], valid_range: [f64; 2]) -> Result<Self> {
        check_range(valid_range)?;
        let (raw, rms_residual) = fit_polynomial(points, 4)?;
        let (extremum_at, min) = extremum(&raw, valid_range, Extremum::Min);
        if min <= 0.0 {
            return Err(Error::Config(format!(
                "fitted relative risk has non-positive minimum {min} at {extremum_at} °C"
            )));
        }
        let mut coefficients = [0.0; 5];
        for (c, r) in coefficients.iter_mut().zip(&raw) {
            *c = r / min;
        }
        let model = Self {
            coefficients,
            valid_range,
            provenance: Some(FitProvenance {
                points: points.to_vec(),
                rms_residual,
                normalization: min,
                extremum_at,
            }),
        };
        model.validate()?;
        Ok(model)
    }

    /// Minimum over the 0.1 °C grid must lie in `[1 - 1e-9, 1 + 1e-6]`.
    pub fn validate(&self) -> Result<()> {
        check_range(self.valid_range)?;
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("non-finite relative risk coefficient".into()));
        }
        let min = grid_values(&self.coefficients, self.valid_range).fold(f64::INFINITY, f64::min);
        if !(1.0 - 1e-9..=1.0 + 1e-6).contains(&min) {
            return Err(Error::Config(format!(
                "relative risk model is not normalized: grid minimum {min} (expected 1)"
            )));
        }
        Ok(())
    }

    /// Temperature of minimum mortality (°C).
    pub fn minimum_mortality_temperature(&self) -> f64 {
        extremum(&self.coefficients, self.valid_range, Extremum::Min).0
    }
}

impl ProductivityModel {
    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        match spec {
            CurveSpec::Fit {
                fit_points,
                valid_range,
            } => Self::fit(fit_points, *valid_range),
            CurveSpec::Coefficients {
                coefficients,
                valid_range,
            } => {
                let coefficients: [f64; 4] = coefficients.as_slice().try_into().map_err(|_| {
                    Error::Config(format!(
                        "productivity model needs 4 coefficients, got {}",
                        coefficients.len()
                    ))
                })?;
                Self::from_coefficients(coefficients, *valid_range)
            }
        }
    }

    pub fn from_coefficients(coefficients: [f64; 4], valid_range: [f64; 2]) -> Result<Self> {
        let model = Self {
            coefficients,
            valid_range,
            provenance: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Least-squares cubic through `points`, scaled so its maximum over
    /// `valid_range` is exactly 1.
    pub fn fit(points: &[[f64; 2]], valid_range: [f64; 2]) -> Result<Self> {
        check_range(valid_range)?;
        let (raw, rms_residual) = fit_polynomial(points, 3)?;
        let (extremum_at, max) = extremum(&raw, valid_range, Extremum::Max);
        if max <= 0.0 {
            return Err(Error::Config(format!(
                "fitted productivity has non-positive maximum {max} at {extremum_at} °C"
            )));
        }
        let mut coefficients = [0.0; 4];
        for (c, r) in coefficients.iter_mut().zip(&raw) {
            *c = r / max;
        }
        let model = Self {
            coefficients,
            valid_range,
            provenance: Some(FitProvenance {
                points: points.to_vec(),
                rms_residual,
                normalization: max,
                extremum_at,
            }),
        };
        model.validate()?;
        Ok(model)
    }

    /// Maximum over the valid range must lie in `[1 - 1e-6, 1]`.
    pub fn validate(&self) -> Result<()> {
        check_range(self.valid_range)?;
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("non-finite productivity coefficient".into()));
        }
        let (_, max) = extremum(&self.coefficients, self.valid_range, Extremum::Max);
        // 1e-12 absorbs the rounding of the normalizing division.
        if !(1.0 - 1e-6..=1.0 + 1e-12).contains(&max) {
            return Err(Error::Config(format!(
                "productivity model is not normalized: maximum {max} (expected 1)"
            )));
        }
        Ok(())
    }

    /// Temperature of peak productivity (°C).
    pub fn optimum_temperature(&self) -> f64 {
        extremum(&self.coefficients, self.valid_range, Extremum::Max).0
    }
}

/// Relative risk at `t_in`, clamped to the model's valid range.
pub fn relative_risk(t_in: f64, model: &RRModel) -> f64 {
    let [lo, hi] = model.valid_range;
    polyval(&model.coefficients, t_in.clamp(lo, hi))
}

/// Productivity level in `[0, 1]` at `t_in`, clamped to the valid range.
pub fn productivity(t_in: f64, model: &ProductivityModel) -> f64 {
    let [lo, hi] = model.valid_range;
    polyval(&model.coefficients, t_in.clamp(lo, hi)).clamp(0.0, 1.0)
}

/// Horner evaluation, coefficients highest power first.
pub fn polyval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().fold(0.0, |acc, c| acc * x + c)
}

fn check_range(range: [f64; 2]) -> Result<()> {
    if !(range[0].is_finite() && range[1].is_finite() && range[0] < range[1]) {
        return Err(Error::Config(format!("invalid curve range {range:?}")));
    }
    Ok(())
}

fn grid_values(coefficients: &[f64], range: [f64; 2]) -> impl Iterator<Item = f64> + '_ {
    let n = ((range[1] - range[0]) / NORMALIZATION_GRID_STEP).round() as usize;
    (0..=n).map(move |i| {
        let t = (range[0] + i as f64 * NORMALIZATION_GRID_STEP).min(range[1]);
        polyval(coefficients, t)
    })
}

/// Least-squares polynomial of `degree`, returned highest power first,
/// together with the RMS residual at the points.
pub fn fit_polynomial(points: &[[f64; 2]], degree: usize) -> Result<(Vec<f64>, f64)> {
    if points.len() <= degree {
        return Err(Error::Config(format!(
            "need more than {degree} points for a degree-{degree} fit, got {}",
            points.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite curve fit point".into()));
    }
    let cols = degree + 1;
    let mut design = DMatrix::from_fn(points.len(), cols, |r, c| {
        points[r][0].powi((degree - c) as i32)
    });
    // Column equilibration keeps the Vandermonde system well conditioned.
    let scales: Vec<f64> = (0..cols)
        .map(|c| {
            let n = design.column(c).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (c, s) in scales.iter().enumerate() {
        design.column_mut(c).unscale_mut(*s);
    }
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|p| p[1]));
    let svd = design.svd(true, true);
    let solution = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Config(format!("curve fit failed: {e}")))?;
    let coefficients: Vec<f64> = solution.iter().zip(&scales).map(|(x, s)| x / s).collect();
    let sse: f64 = points
        .iter()
        .map(|p| (polyval(&coefficients, p[0]) - p[1]).powi(2))
        .sum();
    Ok((coefficients, (sse / points.len() as f64).sqrt()))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Global extremum of a polynomial over a closed interval: endpoints plus
/// every stationary point found by bracketing sign changes of the derivative.
fn extremum(coefficients: &[f64], range: [f64; 2], kind: Extremum) -> (f64, f64) {
    let degree = coefficients.len() - 1;
    let derivative: Vec<f64> = coefficients[..degree]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (degree - i) as f64)
        .collect();
    let better = |a: f64, b: f64| match kind {
        Extremum::Min => a < b,
        Extremum::Max => a > b,
    };
    let mut best = (range[0], polyval(coefficients, range[0]));
    let mut consider = |t: f64| {
        let v = polyval(coefficients, t);
        if better(v, best.1) {
            best = (t, v);
        }
    };
    consider(range[1]);

    const SCAN: usize = 20_000;
    let h = (range[1] - range[0]) / SCAN as f64;
    let mut prev_t = range[0];
    let mut prev_d = polyval(&derivative, prev_t);
    for i in 1..=SCAN {
        let t = if i == SCAN { range[1] } else { range[0] + i as f64 * h };
        let d = polyval(&derivative, t);
        if d == 0.0 {
            consider(t);
        } else if prev_d.signum() != d.signum() && prev_d != 0.0 {
            consider(bisect(&derivative, prev_t, t));
        }
        prev_t = t;
        prev_d = d;
    }
    best
}

fn bisect(f: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = polyval(f, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = polyval(f, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_rr() -> RRModel {
        RRModel::from_spec(&CurveSpec::default_rr()).unwrap()
    }

    fn default_prod() -> ProductivityModel {
        ProductivityModel::from_spec(&CurveSpec::default_productivity()).unwrap()
    }

    #[test]
    fn fit_recovers_exact_polynomial() {
        let truth = [2e-4, -3e-3, 0.05, -0.4, 1.5];
        let points: Vec<[f64; 2]> = (-10..=30)
            .map(|t| [t as f64, polyval(&truth, t as f64)])
            .collect();
        let (coeffs, rms) = fit_polynomial(&points, 4).unwrap();
        assert!(rms < 1e-10, "rms {rms}");
        for (a, b) in coeffs.iter().zip(truth) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rr_is_one_at_minimum_mortality_temperature() {
        let model = default_rr();
        let mmt = model.minimum_mortality_temperature();
        assert!((relative_risk(mmt, &model) - 1.0).abs() < 1e-12);
        assert!((19.0..21.0).contains(&mmt), "mmt {mmt}");
    }

    #[test]
    fn rr_clamps_below_range() {
        let model = default_rr();
        let lo = model.valid_range[0];
        assert_eq!(relative_risk(lo - 30.0, &model), relative_risk(lo, &model));
    }

    #[test]
    fn rr_cold_limb_shape() {
        let model = default_rr();
        let cold = relative_risk(-10.0, &model);
        assert!(cold > 1.0 && cold < 2.0, "{cold}");
        assert!(cold > relative_risk(10.0, &model));
    }

    #[test]
    fn rr_never_below_one_on_fine_grid() {
        let model = default_rr();
        let [lo, hi] = model.valid_range;
        let n = 100_000;
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            assert!(relative_risk(t, &model) >= 1.0 - 1e-9, "t {t}");
        }
    }

    #[test]
    fn rr_cold_limb_is_monotone() {
        let model = default_rr();
        let mmt = model.minimum_mortality_temperature();
        let mut t = model.valid_range[0];
        let mut prev = relative_risk(t, &model);
        while t + 0.1 < mmt {
            t += 0.1;
            let v = relative_risk(t, &model);
            assert!(v <= prev, "RR rises at {t}");
            prev = v;
        }
    }

    #[test]
    fn unnormalized_coefficients_are_rejected() {
        let err = RRModel::from_coefficients([0.0, 0.0, 1e-3, -0.04, 1.5], [-15.0, 26.0]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn fitted_coefficients_round_trip_through_validation() {
        let fitted = default_rr();
        let again = RRModel::from_coefficients(fitted.coefficients, fitted.valid_range).unwrap();
        assert_eq!(again.coefficients, fitted.coefficients);
    }

    #[test]
    fn productivity_peaks_at_one_in_optimal_band() {
        let model = default_prod();
        let opt = model.optimum_temperature();
        assert!((21.0..=23.5).contains(&opt), "optimum {opt}");
        assert!((productivity(opt, &model) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn productivity_clamps_and_orders() {
        let model = default_prod();
        let low = productivity(-40.0, &model);
        assert_eq!(low, productivity(model.valid_range[0], &model));
        assert!(low >= 0.0);
        assert!(productivity(18.0, &model) > productivity(10.0, &model));
    }

    #[test]
    fn productivity_stays_in_unit_interval() {
        let model = ProductivityModel::fit(
            &[[0.0, 0.0], [10.0, 0.8], [20.0, 1.0], [30.0, 0.5], [40.0, -0.4]],
            [0.0, 40.0],
        )
        .unwrap();
        for t in -50..90 {
            let p = productivity(t as f64, &model);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(fit_polynomial(&[[0.0, 1.0], [1.0, 2.0]], 4).is_err());
    }
}
