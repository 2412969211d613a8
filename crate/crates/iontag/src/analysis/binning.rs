//! Fluorescence traces: time-binned detection counts of one channel.

use super::AnalysisError;
use crate::sim::TimeTagStream;

/// Counts per time bin for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FluorescenceTrace {
    pub bin_s: f64,
    pub counts: Vec<u32>,
}

impl FluorescenceTrace {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        self.counts.iter().map(|&c| f64::from(c)).sum::<f64>() / self.counts.len() as f64
    }
}

/// Exact integer counts of `channel` per half-open bin `[i t_b, (i+1) t_b)`.
///
/// The trace spans the whole stream (all channels), so traces binned from
/// the same stream align bin for bin.
pub fn bin_counts(
    stream: &TimeTagStream,
    channel: u8,
    t_b: f64,
) -> Result<FluorescenceTrace, AnalysisError> {
    if t_b <= 0.0 {
        return Err(AnalysisError::NonPositiveBin(t_b));
    }
    if stream.is_empty() {
        return Ok(FluorescenceTrace {
            bin_s: t_b,
            counts: Vec::new(),
        });
    }
    let n_bins = (stream.duration_s() / t_b).floor() as usize + 1;
    let mut counts = vec![0u32; n_bins];
    for tag in stream.tags() {
        if tag.channel != channel {
            continue;
        }
        let i = (stream.ticks_to_seconds(tag.ticks) / t_b) as usize;
        counts[i.min(n_bins - 1)] += 1;
    }
    Ok(FluorescenceTrace { bin_s: t_b, counts })
}
