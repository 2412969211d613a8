//! Quantum-jump localization: moving-average threshold crossings buffer the
//! nearby detection times, a gap scan then assigns the transition photon.

use super::{bin_counts, AnalysisError};
use crate::sim::TimeTagStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpDirection {
    DarkToBright,
    BrightToDark,
}

/// One detected jump candidate: the buffered window of detection times
/// around a moving-average threshold crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    pub direction: JumpDirection,
    /// Buffered detection times (seconds, ascending), at most `N` of them.
    pub window: Vec<f64>,
    /// Time of the trace bin at which the crossing fired.
    pub crossing_time_s: f64,
}

impl JumpEvent {
    /// Assign the transition photon inside this window.
    ///
    /// Falls back to the window's edge tag when the gap scan finds no
    /// qualifying pair but the window is dense from its very first (last)
    /// tag: that happens when no dark count preceded the transition, so the
    /// buffer opens exactly at the transition photon.
    pub fn extract(&self, tau_th: f64) -> Result<f64, AnalysisError> {
        match extract_transition_photon(&self.window, tau_th, self.direction) {
            Ok(t) => Ok(t),
            Err(AnalysisError::AmbiguousWindow) if self.window.len() >= 2 => {
                let w = &self.window;
                match self.direction {
                    JumpDirection::DarkToBright if w[1] - w[0] < tau_th => Ok(w[0]),
                    JumpDirection::BrightToDark if w[w.len() - 1] - w[w.len() - 2] < tau_th => {
                        Ok(w[w.len() - 1])
                    }
                    _ => Err(AnalysisError::AmbiguousWindow),
                }
            }
            Err(e) => Err(e),
        }
    }
}

/// Detect threshold crossings of the `N`-bin moving average of the binned
/// trace of `channel`, buffering the last `N` detection times at each
/// crossing.
///
/// For bright-to-dark jumps the average decays below `n_th` a few bins into
/// the dark period, so the buffer of the most recent `N` detections
/// straddles the transition. Dark-to-bright detection runs the same
/// algorithm on the time-reversed stream, which maps the rising edge onto a
/// falling one; the two directions are exact mirror images.
pub fn detect_jumps(
    stream: &TimeTagStream,
    channel: u8,
    n_th: u32,
    t_b: f64,
    n_window: usize,
    direction: JumpDirection,
) -> Result<Vec<JumpEvent>, AnalysisError> {
    if n_window < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: n_window,
        });
    }
    let trace = bin_counts(stream, channel, t_b)?;
    let times = stream.channel_times(channel);
    match direction {
        JumpDirection::BrightToDark => Ok(detect_falling(
            &trace.counts,
            &times,
            n_th,
            t_b,
            n_window,
            direction,
        )),
        JumpDirection::DarkToBright => {
            // Time-reverse: t -> t_end - t maps rising edges to falling ones.
            let t_end = (trace.counts.len() as f64) * t_b;
            let rev_counts: Vec<u32> = trace.counts.iter().rev().copied().collect();
            let rev_times: Vec<f64> = times.iter().rev().map(|&t| t_end - t).collect();
            let mut events =
                detect_falling(&rev_counts, &rev_times, n_th, t_b, n_window, direction);
            for ev in &mut events {
                ev.window = ev.window.iter().rev().map(|&t| t_end - t).collect();
                ev.crossing_time_s = t_end - ev.crossing_time_s;
            }
            events.reverse();
            Ok(events)
        }
    }
}

/// Falling-edge detector on a binned trace: fires where the trailing
/// `n`-bin average crosses from above `n_th` to below it.
fn detect_falling(
    counts: &[u32],
    times: &[f64],
    n_th: u32,
    t_b: f64,
    n: usize,
    direction: JumpDirection,
) -> Vec<JumpEvent> {
    let mut events = Vec::new();
    let threshold = f64::from(n_th);
    let mut window_sum = 0u64;
    let mut armed = false;
    let mut tag_idx = 0usize;
    // Ring buffer of the last n detection times.
    let mut buffer: Vec<f64> = Vec::with_capacity(n);
    let mut buffer_pos = 0usize;

    for (i, &c) in counts.iter().enumerate() {
        // Ingest this bin's tags into the ring buffer.
        let bin_end = (i as f64 + 1.0) * t_b;
        while tag_idx < times.len() && times[tag_idx] < bin_end {
            if buffer.len() < n {
                buffer.push(times[tag_idx]);
            } else {
                buffer[buffer_pos] = times[tag_idx];
                buffer_pos = (buffer_pos + 1) % n;
            }
            tag_idx += 1;
        }
        window_sum += u64::from(c);
        if i >= n {
            window_sum -= u64::from(counts[i - n]);
        }
        let filled = (i + 1).min(n);
        let avg = window_sum as f64 / filled as f64;
        if avg > threshold {
            armed = true;
        } else if armed && avg < threshold {
            armed = false;
            if !buffer.is_empty() {
                let mut window: Vec<f64> = buffer.clone();
                window.sort_by(|a, b| a.partial_cmp(b).unwrap());
                events.push(JumpEvent {
                    direction,
                    window,
                    crossing_time_s: bin_end,
                });
            }
        }
    }
    events
}

/// Assign the transition photon inside a buffered window: the first (for
/// dark-to-bright) detection whose gap to its predecessor exceeds `tau_th`
/// while the following gap stays below it, or the mirrored condition for
/// the last photon of a bright period.
pub fn extract_transition_photon(
    window: &[f64],
    tau_th: f64,
    direction: JumpDirection,
) -> Result<f64, AnalysisError> {
    if window.is_empty() {
        return Err(AnalysisError::EmptyWindow);
    }
    let n = window.len();
    match direction {
        JumpDirection::DarkToBright => {
            for i in 1..n.saturating_sub(1) {
                let gap_before = window[i] - window[i - 1];
                let gap_after = window[i + 1] - window[i];
                if gap_before > tau_th && gap_after < tau_th {
                    return Ok(window[i]);
                }
            }
            Err(AnalysisError::AmbiguousWindow)
        }
        JumpDirection::BrightToDark => {
            for i in (1..n.saturating_sub(1)).rev() {
                let gap_after = window[i + 1] - window[i];
                let gap_before = window[i] - window[i - 1];
                if gap_after > tau_th && gap_before < tau_th {
                    return Ok(window[i]);
                }
            }
            Err(AnalysisError::AmbiguousWindow)
        }
    }
}

/// Durations between paired bright-to-dark and dark-to-bright transition
/// times; unpaired events at the trace edges are dropped.
pub fn dark_period_durations(events: &[(f64, JumpDirection)]) -> Vec<f64> {
    let mut sorted: Vec<&(f64, JumpDirection)> = events.iter().collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = Vec::new();
    let mut dark_since: Option<f64> = None;
    for (t, dir) in sorted {
        match dir {
            JumpDirection::BrightToDark => dark_since = Some(*t),
            JumpDirection::DarkToBright => {
                if let Some(t0) = dark_since.take() {
                    if *t > t0 {
                        out.push(*t - t0);
                    }
                }
            }
        }
    }
    out
}
