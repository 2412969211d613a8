//! Ground-truth record of ion state transitions, the validation oracle for
//! the jump-analysis pipeline.

use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonState {
    /// Fluorescing on the cycling transition.
    Bright,
    /// Shelved in the metastable level, exposed to the source.
    Dark,
    /// Consumed / waiting for the next preparation pulse (pulsed schemes).
    Idle,
}

impl fmt::Display for IonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IonState::Bright => "bright",
            IonState::Dark => "dark",
            IonState::Idle => "idle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionCause {
    Spontaneous,
    SpdcAbsorption,
    Pump,
    ProtocolPulse,
}

impl fmt::Display for TransitionCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransitionCause::Spontaneous => "spontaneous",
            TransitionCause::SpdcAbsorption => "spdc_absorption",
            TransitionCause::Pump => "pump",
            TransitionCause::ProtocolPulse => "protocol_pulse",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTransition {
    pub time_s: f64,
    pub from: IonState,
    pub to: IonState,
    pub cause: TransitionCause,
}

/// Ordered list of ion state transitions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthLog {
    transitions: Vec<StateTransition>,
}

impl GroundTruthLog {
    pub fn new() -> Self {
        GroundTruthLog::default()
    }

    pub fn record(&mut self, time_s: f64, from: IonState, to: IonState, cause: TransitionCause) {
        self.transitions.push(StateTransition {
            time_s,
            from,
            to,
            cause,
        });
    }

    pub fn transitions(&self) -> &[StateTransition] {
        &self.transitions
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Times of transitions into `to`.
    pub fn times_into(&self, to: IonState) -> Vec<f64> {
        self.transitions
            .iter()
            .filter(|t| t.to == to)
            .map(|t| t.time_s)
            .collect()
    }

    pub fn count_caused_by(&self, cause: TransitionCause) -> usize {
        self.transitions.iter().filter(|t| t.cause == cause).count()
    }

    /// True dark-period durations (dark entry to the next dark exit).
    pub fn dark_durations(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut entered: Option<f64> = None;
        for t in &self.transitions {
            if t.to == IonState::Dark {
                entered = Some(t.time_s);
            } else if t.from == IonState::Dark {
                if let Some(t0) = entered.take() {
                    out.push(t.time_s - t0);
                }
            }
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "time_s,from,to,cause")?;
        for t in &self.transitions {
            writeln!(w, "{:.9},{},{},{}", t.time_s, t.from, t.to, t.cause)?;
        }
        Ok(())
    }
}
