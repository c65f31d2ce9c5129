//! Per-sample error measures and their Monte-Carlo aggregation.

use num_complex::Complex64;

/// `‖ĥ − h‖² / ‖h‖²`, or `None` when `h` is identically zero.
pub fn nmse(h_hat: &[Complex64], h: &[Complex64]) -> Option<f64> {
    let power: f64 = h.iter().map(|x| x.norm_sqr()).sum();
    if power == 0.0 {
        return None;
    }
    let err: f64 = h_hat.iter().zip(h).map(|(a, b)| (a - b).norm_sqr()).sum();
    Some(err / power)
}

/// Missed detections and false alarms of one activity decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UadErrors {
    pub missed: usize,
    pub false_alarms: usize,
}

impl UadErrors {
    pub fn count(detected: &[bool], truth: &[bool]) -> Self {
        let mut e = Self::default();
        for (&d, &t) in detected.iter().zip(truth) {
            match (d, t) {
                (false, true) => e.missed += 1,
                (true, false) => e.false_alarms += 1,
                _ => {}
            }
        }
        e
    }

    pub fn total(&self) -> usize {
        self.missed + self.false_alarms
    }
}

/// Running mean and standard error of a scalar sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMean {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `NaN` when empty.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Standard error of the mean; zero with fewer than two samples.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        libm::sqrt(var / self.count as f64)
    }
}
