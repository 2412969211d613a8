//! Time-tagged photon detection records.

use thiserror::Error;

/// Fixed channel assignment, mirroring the experiment wiring: both
/// fluorescence PMTs are combined into a single channel.
pub mod channel {
    /// Herald detector behind the source filter cavities.
    pub const HERALD: u8 = 0;
    /// Combined fluorescence PMT channel (397 nm).
    pub const FLUORESCENCE: u8 = 1;
    /// Single-photon detector on the 393 nm Raman line.
    pub const RAMAN_393: u8 = 2;
    /// Pulse-sequence markers.
    pub const MARKER: u8 = 3;
    pub const COUNT: u8 = 4;
}

/// One detection record: channel id and timestamp in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeTag {
    pub channel: u8,
    pub ticks: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("tick resolution must be positive")]
    ZeroTickResolution,
    #[error("timestamps decrease at record {index}")]
    NonMonotonic { index: usize },
    #[error("records with equal timestamps must be ordered by channel (record {index})")]
    TieOrder { index: usize },
}

/// An ordered stream of time tags with its tick resolution.
///
/// Invariant: timestamps are nondecreasing, ties ordered by channel id.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    tick_ps: u32,
    tags: Vec<TimeTag>,
}

impl TimeTagStream {
    pub fn new(tick_ps: u32) -> Result<Self, StreamError> {
        if tick_ps == 0 {
            return Err(StreamError::ZeroTickResolution);
        }
        Ok(TimeTagStream {
            tick_ps,
            tags: Vec::new(),
        })
    }

    /// Wrap already-ordered records, validating the ordering invariant.
    pub fn from_sorted(tick_ps: u32, tags: Vec<TimeTag>) -> Result<Self, StreamError> {
        if tick_ps == 0 {
            return Err(StreamError::ZeroTickResolution);
        }
        for (i, pair) in tags.windows(2).enumerate() {
            if pair[1].ticks < pair[0].ticks {
                return Err(StreamError::NonMonotonic { index: i + 1 });
            }
            if pair[1].ticks == pair[0].ticks && pair[1].channel < pair[0].channel {
                return Err(StreamError::TieOrder { index: i + 1 });
            }
        }
        Ok(TimeTagStream { tick_ps, tags })
    }

    /// Sort records into the canonical order and wrap them.
    pub fn from_unsorted(tick_ps: u32, mut tags: Vec<TimeTag>) -> Result<Self, StreamError> {
        if tick_ps == 0 {
            return Err(StreamError::ZeroTickResolution);
        }
        tags.sort_unstable_by_key(|t| (t.ticks, t.channel));
        Ok(TimeTagStream { tick_ps, tags })
    }

    pub fn tick_ps(&self) -> u32 {
        self.tick_ps
    }

    pub fn tags(&self) -> &[TimeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn seconds_to_ticks(&self, t_s: f64) -> u64 {
        (t_s * 1e12 / f64::from(self.tick_ps)).round().max(0.0) as u64
    }

    pub fn ticks_to_seconds(&self, ticks: u64) -> f64 {
        ticks as f64 * f64::from(self.tick_ps) * 1e-12
    }

    /// Detection times of one channel, in seconds.
    pub fn channel_times(&self, channel: u8) -> Vec<f64> {
        self.tags
            .iter()
            .filter(|t| t.channel == channel)
            .map(|t| self.ticks_to_seconds(t.ticks))
            .collect()
    }

    pub fn counts_in_channel(&self, channel: u8) -> usize {
        self.tags.iter().filter(|t| t.channel == channel).count()
    }

    /// Time of the last record, seconds; 0 for an empty stream.
    pub fn duration_s(&self) -> f64 {
        self.tags
            .last()
            .map_or(0.0, |t| self.ticks_to_seconds(t.ticks))
    }

    /// Deterministic sorted merge of streams from parallel trajectories;
    /// the result is independent of the input order. All streams must
    /// share one tick resolution.
    pub fn merge(streams: &[TimeTagStream]) -> Result<TimeTagStream, StreamError> {
        let tick_ps = streams.first().map_or(1000, TimeTagStream::tick_ps);
        if streams.iter().any(|s| s.tick_ps() != tick_ps) {
            return Err(StreamError::ZeroTickResolution);
        }
        let mut tags: Vec<TimeTag> = streams
            .iter()
            .flat_map(|s| s.tags().iter().copied())
            .collect();
        tags.sort_unstable_by_key(|t| (t.ticks, t.channel));
        TimeTagStream::from_sorted(tick_ps, tags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_validated() {
        let bad = vec![
            TimeTag {
                channel: 0,
                ticks: 5,
            },
            TimeTag {
                channel: 0,
                ticks: 4,
            },
        ];
        assert!(matches!(
            TimeTagStream::from_sorted(1000, bad),
            Err(StreamError::NonMonotonic { index: 1 })
        ));
        let tie = vec![
            TimeTag {
                channel: 2,
                ticks: 5,
            },
            TimeTag {
                channel: 0,
                ticks: 5,
            },
        ];
        assert!(matches!(
            TimeTagStream::from_sorted(1000, tie),
            Err(StreamError::TieOrder { index: 1 })
        ));
    }

    #[test]
    fn unsorted_input_is_canonicalized() {
        let tags = vec![
            TimeTag {
                channel: 1,
                ticks: 7,
            },
            TimeTag {
                channel: 0,
                ticks: 7,
            },
            TimeTag {
                channel: 0,
                ticks: 2,
            },
        ];
        let s = TimeTagStream::from_unsorted(1000, tags).unwrap();
        assert_eq!(
            s.tags(),
            &[
                TimeTag {
                    channel: 0,
                    ticks: 2
                },
                TimeTag {
                    channel: 0,
                    ticks: 7
                },
                TimeTag {
                    channel: 1,
                    ticks: 7
                },
            ]
        );
    }

    #[test]
    fn tick_conversions_roundtrip() {
        let s = TimeTagStream::new(1000).unwrap();
        assert_eq!(s.seconds_to_ticks(1.0), 1_000_000_000);
        let t = 1234.5679;
        let back = s.ticks_to_seconds(s.seconds_to_ticks(t));
        assert!((back - t).abs() < 1e-9);
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(TimeTagStream::new(0).is_err());
    }
}
