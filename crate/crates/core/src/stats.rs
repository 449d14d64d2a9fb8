use statrs::distribution::{ContinuousCDF, Normal};

/// `q` such that a standard normal variable lies in `(-q, q)` with
/// probability `alpha`.
pub fn two_sided_quantile(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "confidence level must lie in (0, 1)");
    let normal = Normal::standard();
    normal.inverse_cdf(0.5 + alpha / 2.0)
}

/// Streaming mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Half-width of the normal-approximation confidence interval.
    pub fn half_width(&self, q: f64) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            q * (self.variance() / self.count as f64).sqrt()
        }
    }
}
