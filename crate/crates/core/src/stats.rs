//! Streaming moments and small fitting helpers.

use serde::{Deserialize, Serialize};

use crate::parallel::Merge;

/// Running count, mean and centered second moment (Welford / Chan).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl Merge for Moments {
    fn merge(&mut self, other: Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let nb = other.count as f64;
        let nf = n as f64;
        self.mean += delta * nb / nf;
        self.m2 += other.m2 + delta * delta * self.count as f64 * nb / nf;
        self.count = n;
    }
}

/// A fixed number of statistics accumulated over the same samples, plus a
/// truncation counter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiMoments {
    pub stats: Vec<Moments>,
    pub truncated: u64,
    pub samples: u64,
}

impl MultiMoments {
    pub fn new(width: usize) -> Self {
        MultiMoments { stats: vec![Moments::default(); width], truncated: 0, samples: 0 }
    }

    #[inline]
    pub fn record(&mut self, truncated: bool) {
        self.samples += 1;
        self.truncated += u64::from(truncated);
    }

    pub fn truncation_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.truncated as f64 / self.samples as f64
        }
    }
}

impl Merge for MultiMoments {
    fn merge(&mut self, other: Self) {
        if self.stats.len() < other.stats.len() {
            self.stats.resize(other.stats.len(), Moments::default());
        }
        for (a, b) in self.stats.iter_mut().zip(other.stats) {
            a.merge(b);
        }
        self.truncated += other.truncated;
        self.samples += other.samples;
    }
}

/// Weighted least-squares line `y = a + b x`. Returns `(intercept, slope, slope_se)`.
///
/// Weights are `1 / se^2`. When every `se` is zero the fit is unweighted.
pub fn weighted_line(points: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let all_exact = points.iter().all(|p| p.2 <= 0.0);
    let floor = points.iter().map(|p| p.2).filter(|s| *s > 0.0).fold(f64::INFINITY, f64::min);
    let weight = |se: f64| {
        if all_exact {
            1.0
        } else {
            let se = if se > 0.0 { se } else { floor * 1e-3 };
            1.0 / (se * se)
        }
    };
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, se) in points {
        let w = weight(se);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let slope_se = if all_exact { 0.0 } else { (sw / det).sqrt() };
    Some((intercept, slope, slope_se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, 9.0, -3.0, 0.25];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m.mean - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<_> = (1..=6).map(|n| (n as f64, 0.5 + 2.0 * n as f64, 0.0)).collect();
        let (a, b, se) = weighted_line(&pts).unwrap();
        assert!((a - 0.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && se == 0.0);
        assert!(weighted_line(&pts[..1]).is_none());
    }

    proptest! {
        #[test]
        fn merge_equals_sequential(xs in prop::collection::vec(-1e3f64..1e3, 1..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = Moments::default();
            xs.iter().for_each(|&x| whole.push(x));
            let mut left = Moments::default();
            let mut right = Moments::default();
            xs[..split].iter().for_each(|&x| left.push(x));
            xs[split..].iter().for_each(|&x| right.push(x));
            left.merge(right);
            prop_assert_eq!(left.count, whole.count);
            prop_assert!((left.mean - whole.mean).abs() <= 1e-9 * (1.0 + whole.mean.abs()));
            prop_assert!((left.m2 - whole.m2).abs() <= 1e-7 * (1.0 + whole.m2.abs()));
        }
    }
}
