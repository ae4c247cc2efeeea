//! Batch-means confidence intervals.

use serde::Serialize;

/// Number of batches a simulation run is split into.
pub const BATCHES: usize = 20;

/// 0.975 quantile of Student's t with `BATCHES - 1` degrees of freedom.
pub const T_QUANTILE: f64 = 2.093024054408263;

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Estimate {
            mean,
            half_width: 0.0,
        }
    }

    /// Whether `value` lies within `k` half-widths of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.half_width
    }
}

/// Combines a whole-run point estimate with the spread of per-batch
/// estimates. Batches whose value is undefined (NaN) are skipped; with fewer
/// than two usable batches the half-width is infinite.
pub fn batch_estimate(point: f64, batches: &[f64]) -> Estimate {
    let usable: Vec<f64> = batches.iter().copied().filter(|v| v.is_finite()).collect();
    if usable.len() < 2 {
        return Estimate {
            mean: point,
            half_width: f64::INFINITY,
        };
    }
    let k = usable.len() as f64;
    let mean = usable.iter().sum::<f64>() / k;
    let var = usable.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let t = if usable.len() == BATCHES {
        T_QUANTILE
    } else {
        // Slightly conservative normal-theory fallback for uneven runs.
        T_QUANTILE.max(1.96 + 2.5 / (k - 1.0))
    };
    Estimate {
        mean: point,
        half_width: t * (var / k).sqrt(),
    }
}

/// Splits `total` items into `BATCHES` contiguous ranges of near-equal size
/// and returns the batch index of item `idx`.
pub fn batch_of(idx: u64, total: u64) -> usize {
    debug_assert!(idx < total);
    ((u128::from(idx) * BATCHES as u128) / u128::from(total)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_batches_have_zero_width() {
        let e = batch_estimate(3.0, &[3.0; BATCHES]);
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.half_width, 0.0);
        assert!(e.covers(3.0, 1.0));
    }

    #[test]
    fn half_width_matches_hand_computation() {
        let v: Vec<f64> = (0..BATCHES).map(|i| i as f64).collect();
        let e = batch_estimate(9.5, &v);
        // sample variance of 0..19 is 35
        let expect = T_QUANTILE * (35.0f64 / 20.0).sqrt();
        assert!((e.half_width - expect).abs() < 1e-12);
    }

    #[test]
    fn degenerate_input() {
        assert!(batch_estimate(1.0, &[1.0]).half_width.is_infinite());
        assert!(batch_estimate(1.0, &[f64::NAN, 2.0])
            .half_width
            .is_infinite());
    }

    #[test]
    fn batches_partition_evenly() {
        let total = 1003;
        let mut counts = [0u32; BATCHES];
        for i in 0..total {
            counts[batch_of(i, total)] += 1;
        }
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1);
        assert_eq!(batch_of(0, total), 0);
        assert_eq!(batch_of(total - 1, total), BATCHES - 1);
    }
}
