use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Windows whose acceptance probability falls below this are rejected at
/// construction; rejection sampling would otherwise spin.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Normal distribution restricted to `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncNormalParams {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl TruncNormalParams {
    pub const fn new(mean: f64, std: f64, min: f64, max: f64) -> Self {
        Self { mean, std, min, max }
    }

    /// Percent-valued parameters on `[0, 100]`.
    pub const fn percent(mean: f64, std: f64) -> Self {
        Self::new(mean, std, 0.0, 100.0)
    }

    /// Probability mass of the untruncated normal inside `[min, max]`.
    pub fn acceptance_probability(&self) -> f64 {
        match Normal::new(self.mean, self.std) {
            Ok(normal) => (normal.cdf(self.max) - normal.cdf(self.min)).max(0.0),
            Err(_) => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mean, self.std, self.min, self.max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config(format!("non-finite truncated normal parameters {self:?}")));
        }
        if self.std <= 0.0 {
            return Err(Error::Config(format!("truncated normal std must be > 0, got {}", self.std)));
        }
        if self.min > self.max {
            return Err(Error::Config(format!(
                "truncated normal window is empty: min {} > max {}",
                self.min, self.max
            )));
        }
        let p = self.acceptance_probability();
        if p < MIN_ACCEPTANCE {
            return Err(Error::Config(format!(
                "truncated normal window [{}, {}] has acceptance probability {p:.3e} < {MIN_ACCEPTANCE:e}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// A validated truncated normal, sampled by rejection from the parent normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    params: TruncNormalParams,
}

impl TruncatedNormal {
    pub fn new(params: TruncNormalParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &TruncNormalParams {
        &self.params
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = &self.params;
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = p.mean + p.std * z;
            if x >= p.min && x <= p.max {
                return x;
            }
        }
    }
}

/// One draw from `params`; validates on every call. Prefer building a
/// [`TruncatedNormal`] once when sampling in a loop.
pub fn sample_truncated_normal<R: Rng + ?Sized>(params: &TruncNormalParams, rng: &mut R) -> Result<f64> {
    Ok(TruncatedNormal::new(*params)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_stay_in_window() {
        let dist = TruncatedNormal::new(TruncNormalParams::new(0.5, 2.0, 0.0, 1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x = dist.sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn tiny_std_concentrates_on_mean() {
        let dist = TruncatedNormal::new(TruncNormalParams::new(42.0, 1e-9, 0.0, 100.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert!((dist.sample(&mut rng) - 42.0).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_window_is_rejected() {
        // 10 sigma above the mean: acceptance ~ 7.6e-24
        let err = TruncatedNormal::new(TruncNormalParams::new(0.0, 1.0, 10.0, 11.0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(TruncNormalParams::new(0.0, 0.0, -1.0, 1.0).validate().is_err());
        assert!(TruncNormalParams::new(0.0, 1.0, 1.0, -1.0).validate().is_err());
        assert!(TruncNormalParams::new(f64::NAN, 1.0, -1.0, 1.0).validate().is_err());
    }
}
