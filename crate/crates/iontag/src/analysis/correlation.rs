//! Second-order correlation: histogram of delays between two detection
//! channels, with background estimate and peak significance.

use super::AnalysisError;

/// Binned delay histogram `counts[k]` for lags `(k - K) * bin_width` with
/// `K = (n_bins - 1) / 2`; the lag grid is symmetric about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub bin_width_s: f64,
    pub counts: Vec<u64>,
    /// Mean counts over all bins excluding the central 3 (the peak region).
    pub background: f64,
    /// Index offset of the maximum bin relative to zero lag.
    pub peak_bin: i64,
}

impl CorrelationHistogram {
    pub fn half_bins(&self) -> i64 {
        (self.counts.len() as i64 - 1) / 2
    }

    pub fn lag_of(&self, index: usize) -> f64 {
        (index as i64 - self.half_bins()) as f64 * self.bin_width_s
    }

    pub fn peak_counts(&self) -> u64 {
        self.counts[(self.peak_bin + self.half_bins()) as usize]
    }

    pub fn counts_at_lag_bin(&self, k: i64) -> u64 {
        self.counts[(k + self.half_bins()) as usize]
    }
}

/// Delay histogram of `b - a` pair delays within `±max_lag`, computed by a
/// two-pointer sweep over the sorted inputs in
/// `O(len_a + len_b + pairs_in_range)`.
pub fn g2(
    times_a: &[f64],
    times_b: &[f64],
    bin_width_s: f64,
    max_lag_s: f64,
) -> Result<CorrelationHistogram, AnalysisError> {
    if bin_width_s <= 0.0 || max_lag_s <= 0.0 {
        return Err(AnalysisError::NonPositiveBin(bin_width_s.min(max_lag_s)));
    }
    let half = (max_lag_s / bin_width_s).round().max(1.0) as i64;
    let n_bins = (2 * half + 1) as usize;
    let mut counts = vec![0u64; n_bins];
    let reach = (half as f64 + 0.5) * bin_width_s;

    let mut lo = 0usize;
    for &a in times_a {
        while lo < times_b.len() && times_b[lo] < a - reach {
            lo += 1;
        }
        let mut j = lo;
        while j < times_b.len() && times_b[j] < a + reach {
            let k = ((times_b[j] - a) / bin_width_s).round() as i64;
            if k.abs() <= half {
                counts[(k + half) as usize] += 1;
            }
            j += 1;
        }
    }

    let background = off_peak_mean(&counts);
    let peak_bin = peak_index(&counts) - half;
    Ok(CorrelationHistogram {
        bin_width_s,
        counts,
        background,
        peak_bin,
    })
}

/// Background estimate: mean over all bins excluding the central three.
fn off_peak_mean(counts: &[u64]) -> f64 {
    let half = (counts.len() as i64 - 1) / 2;
    let mut sum = 0u64;
    let mut n = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        if (i as i64 - half).abs() > 1 {
            sum += c;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Index of the maximum bin; ties resolve toward the center, then toward
/// negative lags, keeping the result deterministic.
fn peak_index(counts: &[u64]) -> i64 {
    let half = (counts.len() as i64 - 1) / 2;
    let mut best = 0i64;
    let mut best_count = 0u64;
    let mut best_dist = i64::MAX;
    for (i, &c) in counts.iter().enumerate() {
        let k = i as i64;
        let dist = (k - half).abs();
        if c > best_count || (c == best_count && dist < best_dist) {
            best = k;
            best_count = c;
            best_dist = dist;
        }
    }
    best
}

/// Peak excess over the Poissonian background, in units of its standard
/// deviation: `(peak - B) / sqrt(B)`.
pub fn peak_significance(hist: &CorrelationHistogram) -> Result<f64, AnalysisError> {
    if hist.background <= 0.0 {
        return Err(AnalysisError::ZeroBackground);
    }
    Ok((hist.peak_counts() as f64 - hist.background) / hist.background.sqrt())
}
