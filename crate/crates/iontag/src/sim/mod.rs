//! Monte Carlo event engine: the ion state machine under lasers and SPDC
//! photons, producing time-tag streams and a ground-truth transition log.
//!
//! Four detection schemes are modeled. In the quantum-jump schemes the
//! absorption of a source photon flips the fluorescence state of the ion:
//! scheme A pumps the ion *into* the dark metastable level via the 850 nm
//! line, scheme B pumps it *out* of it via the 854 nm line. In the pulsed
//! schemes C/D the ion is prepared in a metastable level and the absorption
//! is signaled by a single 393 nm Raman photon instead of a fluorescence
//! change.
//!
//! The engine is event-driven (next-event time sampling), so dwell-time
//! statistics are exact exponentials with no discretization bias.

mod ground_truth;
mod jitter;
mod timetag;

pub use ground_truth::{GroundTruthLog, IonState, StateTransition, TransitionCause};
pub use jitter::{detector_jitter, JitterModel, FWHM_TO_SIGMA};
pub use timetag::{channel, StreamError, TimeTag, TimeTagStream};

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::atom::{
    zeeman_shift, AtomError, BranchingConstants, MagneticField, PolarizationState, Sublevel, Term,
    TransitionTable,
};
use crate::half::Half;
use crate::math::lorentzian_peak;
use crate::rng::{exp_sample, stream_id, trajectory_stream};
use crate::source::{PairEvent, PairIter, SourceConfig, SourceError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid trajectory config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// The four absorption-detection schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// 850 nm absorption, signaled by a bright-to-dark quantum jump.
    A,
    /// 854 nm absorption, signaled by a dark-to-bright quantum jump.
    B,
    /// 850 nm absorption from a prepared D3/2 state, signaled by a 393 nm photon.
    C,
    /// 854 nm absorption from a prepared D5/2 state, signaled by a 393 nm photon.
    D,
}

/// Which photon polarizations the prepared ion absorbs.
#[derive(Debug, Clone, PartialEq)]
pub enum Acceptance {
    /// Sublevel mixture: polarization-insensitive, line centered on the
    /// zero-field transition frequency.
    Unpolarized,
    /// Optically pumped to the two outermost Zeeman sublevels of D5/2;
    /// `upper = true` selects m = +5/2, +3/2 (sensitive to sigma-),
    /// `upper = false` the mirrored pair (sensitive to sigma+).
    PumpedOuter { upper: bool },
    /// Idealized pure acceptance state (used by the entanglement scans,
    /// where field orientation and pump polarization pick one basis state).
    Pure { accepted: PolarizationState },
}

/// Trajectory configuration; rates are detected rates, i.e. detector and
/// collection efficiencies are already folded in.
#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub scheme: Scheme,
    pub duration_s: f64,
    /// Detected fluorescence rate in the bright state, counts/s.
    pub r_on: f64,
    /// Detector dark-count rate on the fluorescence channel, counts/s.
    pub r_dark: f64,
    /// Bright-to-dark optical pumping rate (scheme B), 1/s.
    pub pump_rate_850: f64,
    /// Spontaneous lifetime of the metastable state, s.
    pub tau0_s: f64,
    pub source: SourceConfig,
    /// Absorption rate at resonance and matched polarization, 1/s; the one
    /// calibrated knob absorbing focusing and overlap efficiencies.
    pub absorption_peak_rate: f64,
    /// Detection efficiency for the 393 nm Raman photon (schemes C/D).
    pub detection_efficiency_393: f64,
    pub field: MagneticField,
    pub acceptance: Acceptance,
    /// Atomic absorption linewidth (FWHM), MHz.
    pub atom_fwhm_mhz: f64,
    /// Preparation cycle period for the pulsed schemes C/D, s.
    pub cycle_period_s: f64,
    pub branching: BranchingConstants,
    pub tick_ps: u32,
    pub jitter: JitterModel,
    pub master_seed: u64,
    /// Index of this trajectory within a multi-trajectory run; selects the
    /// per-trajectory RNG stream block under the shared master seed.
    pub trajectory_index: u64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            scheme: Scheme::B,
            duration_s: 10.0,
            r_on: 5.0e4,
            r_dark: 100.0,
            pump_rate_850: 1.0,
            tau0_s: 1.11,
            source: SourceConfig::default(),
            absorption_peak_rate: 0.0,
            detection_efficiency_393: 1.0,
            field: MagneticField::default_lab(),
            acceptance: Acceptance::Unpolarized,
            atom_fwhm_mhz: 22.0,
            cycle_period_s: 0.02,
            branching: BranchingConstants::default(),
            tick_ps: 1000,
            jitter: JitterModel::default(),
            master_seed: 0,
            trajectory_index: 0,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if self.duration_s < 0.0 {
            return bad("duration must be nonnegative");
        }
        if self.r_on < 0.0 || self.r_dark < 0.0 || self.pump_rate_850 < 0.0 {
            return bad("rates must be nonnegative");
        }
        if self.tau0_s <= 0.0 {
            return bad("tau0 must be positive");
        }
        if self.absorption_peak_rate < 0.0 {
            return bad("absorption_peak_rate must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.detection_efficiency_393) {
            return bad("detection_efficiency_393 must lie in [0, 1]");
        }
        if self.atom_fwhm_mhz <= 0.0 {
            return bad("atomic linewidth must be positive");
        }
        if matches!(self.scheme, Scheme::C | Scheme::D) && self.cycle_period_s <= 0.0 {
            return bad("pulsed schemes need a positive cycle period");
        }
        if self.tick_ps == 0 {
            return bad("tick resolution must be positive");
        }
        if matches!(self.scheme, Scheme::C)
            && matches!(self.acceptance, Acceptance::PumpedOuter { .. })
        {
            return bad("scheme C prepares D3/2; outer-D5/2 pumping applies to schemes B/D");
        }
        self.source.validate()?;
        Ok(())
    }
}

/// Per-photon absorption response: a weighted sum of Zeeman lines times a
/// polarization overlap, scaled to `absorption_peak_rate` per unit photon
/// flux.
pub struct AbsorptionModel {
    lines: Vec<(f64, f64)>, // (center MHz, weight), weights sum to 1
    accepted: Option<PolarizationState>,
    per_photon: f64,
    atom_fwhm_mhz: f64,
}

impl AbsorptionModel {
    pub fn build(cfg: &TrajectoryConfig, table: &TransitionTable) -> Result<Self, SimError> {
        let lines: Vec<(f64, f64)>;
        let accepted: Option<PolarizationState>;
        match &cfg.acceptance {
            Acceptance::Unpolarized => {
                lines = vec![(0.0, 1.0)];
                accepted = None;
            }
            Acceptance::PumpedOuter { upper } => {
                let (sign, pol) = if *upper {
                    (1, PolarizationState::sigma_minus())
                } else {
                    (-1, PolarizationState::sigma_plus())
                };
                let q = Half::int(-sign);
                let mut raw = Vec::new();
                for m2 in [5 * sign, 3 * sign] {
                    let m_d = Half::halves(m2);
                    let m_p = m_d + q;
                    let d = Sublevel::new(Term::D52, m_d)?;
                    let p = Sublevel::new(Term::P32, m_p)?;
                    let weight = 0.5 * table.coupling(d, p, q)?;
                    let center = zeeman_shift(p, &cfg.field) - zeeman_shift(d, &cfg.field);
                    raw.push((center, weight));
                }
                let total: f64 = raw.iter().map(|(_, w)| w).sum();
                lines = raw.into_iter().map(|(c, w)| (c, w / total)).collect();
                accepted = Some(pol);
            }
            Acceptance::Pure { accepted: state } => {
                lines = vec![(0.0, 1.0)];
                accepted = Some(*state);
            }
        }
        let per_photon = if cfg.source.pair_rate > 0.0 {
            cfg.absorption_peak_rate / cfg.source.pair_rate
        } else {
            0.0
        };
        Ok(AbsorptionModel {
            lines,
            accepted,
            per_photon,
            atom_fwhm_mhz: cfg.atom_fwhm_mhz,
        })
    }

    /// Absorption probability for one arriving signal photon.
    pub fn probability(&self, pair: &PairEvent) -> f64 {
        let overlap = match &self.accepted {
            None => 1.0,
            Some(a) => a.overlap(&pair.signal_polarization),
        };
        let shape: f64 = self
            .lines
            .iter()
            .map(|(c, w)| w * lorentzian_peak(pair.signal_detuning_mhz - c, self.atom_fwhm_mhz))
            .sum();
        (self.per_photon * shape * overlap).min(1.0)
    }

    /// Absorption-line centers and weights, MHz.
    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }
}

/// Scheme B / scheme A efficiency ratio: relative line strength times the
/// ratio of the useful branching fractions.
pub fn relative_scheme_efficiency(table: &TransitionTable) -> f64 {
    let s854 = table
        .line(Term::P32, Term::D52)
        .expect("854 line")
        .rel_strength;
    let s850 = table
        .line(Term::P32, Term::D32)
        .expect("850 line")
        .rel_strength;
    let b_s = table.branching(Term::P32, Term::S12).expect("393 branch");
    let b_d5 = table.branching(Term::P32, Term::D52).expect("854 branch");
    (s854 / s850) * (b_s / b_d5)
}

struct TagBuffer {
    tags: Vec<TimeTag>,
    tick_ps: u32,
}

impl TagBuffer {
    fn push(&mut self, channel: u8, t_s: f64) {
        let ticks = (t_s * 1e12 / f64::from(self.tick_ps)).round().max(0.0) as u64;
        self.tags.push(TimeTag { channel, ticks });
    }
}

/// Run one trajectory. Deterministic in `cfg.master_seed`: per-component
/// ChaCha streams make the output identical across runs and platforms.
pub fn simulate(cfg: &TrajectoryConfig) -> Result<(TimeTagStream, GroundTruthLog), SimError> {
    cfg.validate()?;
    let table = TransitionTable::new(cfg.branching.clone());
    table.validate()?;
    let absorption = AbsorptionModel::build(cfg, &table)?;

    let mut buf = TagBuffer {
        tags: Vec::new(),
        tick_ps: cfg.tick_ps,
    };
    let mut log = GroundTruthLog::new();
    let duration = cfg.duration_s;

    if duration > 0.0 {
        let tstream = |purpose| trajectory_stream(cfg.master_seed, cfg.trajectory_index, purpose);
        let mut rng_ion = tstream(stream_id::ION);
        let mut rng_fluor = tstream(stream_id::FLUORESCENCE);
        let mut rng_jitter = tstream(stream_id::JITTER);
        let rng_pairs = tstream(stream_id::PAIRS);

        // Dark counts cover the whole acquisition independent of ion state.
        if cfg.r_dark > 0.0 {
            let mut rng_dark = tstream(stream_id::DARK_COUNTS);
            let mut t = exp_sample(&mut rng_dark, cfg.r_dark);
            while t < duration {
                buf.push(channel::FLUORESCENCE, t);
                t += exp_sample(&mut rng_dark, cfg.r_dark);
            }
        }

        let pairs = PairIter::new(&cfg.source, duration, rng_pairs)?;
        match cfg.scheme {
            Scheme::A | Scheme::B => run_jump_scheme(
                cfg,
                &table,
                &absorption,
                pairs,
                &mut buf,
                &mut log,
                &mut rng_ion,
                &mut rng_fluor,
                &mut rng_jitter,
            ),
            Scheme::C | Scheme::D => run_pulsed_scheme(
                cfg,
                &table,
                &absorption,
                pairs,
                &mut buf,
                &mut log,
                &mut rng_ion,
                &mut rng_jitter,
            ),
        }
    }

    let stream = TimeTagStream::from_unsorted(cfg.tick_ps, buf.tags)?;
    Ok((stream, log))
}

/// Fluorescence photons of one bright interval `[t0, t1)`.
fn emit_fluorescence(
    buf: &mut TagBuffer,
    rng_fluor: &mut ChaCha8Rng,
    rng_jitter: &mut ChaCha8Rng,
    jitter: &JitterModel,
    r_on: f64,
    t0: f64,
    t1: f64,
) {
    if r_on <= 0.0 {
        return;
    }
    let mut t = t0 + exp_sample(rng_fluor, r_on);
    while t < t1 {
        buf.push(
            channel::FLUORESCENCE,
            t + detector_jitter(jitter, rng_jitter),
        );
        t += exp_sample(rng_fluor, r_on);
    }
}

#[allow(clippy::too_many_arguments)]
fn run_jump_scheme(
    cfg: &TrajectoryConfig,
    table: &TransitionTable,
    absorption: &AbsorptionModel,
    pairs: PairIter<ChaCha8Rng>,
    buf: &mut TagBuffer,
    log: &mut GroundTruthLog,
    rng_ion: &mut ChaCha8Rng,
    rng_fluor: &mut ChaCha8Rng,
    rng_jitter: &mut ChaCha8Rng,
) {
    let duration = cfg.duration_s;
    let branch_to_d52 = table
        .branching(Term::P32, Term::D52)
        .expect("tabulated line");
    let decay_rate = 1.0 / cfg.tau0_s;

    let mut state = IonState::Bright;
    let mut state_since = 0.0;
    // Next scheduled (non-photon) transition, +inf when none applies.
    let mut next_scheduled = match cfg.scheme {
        Scheme::B if cfg.pump_rate_850 > 0.0 => exp_sample(rng_ion, cfg.pump_rate_850),
        _ => f64::INFINITY,
    };

    let mut pairs = pairs.peekable();
    loop {
        let pair_t = pairs.peek().map_or(f64::INFINITY, |p| p.time_s);
        if next_scheduled >= duration && pair_t >= duration {
            break;
        }
        if next_scheduled <= pair_t {
            let t = next_scheduled;
            match state {
                IonState::Bright => {
                    // Scheme B only: pumped into the dark state.
                    emit_fluorescence(
                        buf,
                        rng_fluor,
                        rng_jitter,
                        &cfg.jitter,
                        cfg.r_on,
                        state_since,
                        t,
                    );
                    log.record(t, IonState::Bright, IonState::Dark, TransitionCause::Pump);
                    state = IonState::Dark;
                    state_since = t;
                    next_scheduled = t + exp_sample(rng_ion, decay_rate);
                }
                IonState::Dark => {
                    log.record(
                        t,
                        IonState::Dark,
                        IonState::Bright,
                        TransitionCause::Spontaneous,
                    );
                    state = IonState::Bright;
                    state_since = t;
                    next_scheduled = match cfg.scheme {
                        Scheme::B if cfg.pump_rate_850 > 0.0 => {
                            t + exp_sample(rng_ion, cfg.pump_rate_850)
                        }
                        _ => f64::INFINITY,
                    };
                }
                IonState::Idle => unreachable!("jump schemes never idle"),
            }
        } else {
            let pair = pairs.next().expect("peeked");
            if pair.herald_detected {
                buf.push(
                    channel::HERALD,
                    pair.time_s + detector_jitter(&cfg.jitter, rng_jitter),
                );
            }
            match (cfg.scheme, state) {
                (Scheme::B, IonState::Dark) => {
                    if rng_ion.random::<f64>() < absorption.probability(&pair) {
                        log.record(
                            pair.time_s,
                            IonState::Dark,
                            IonState::Bright,
                            TransitionCause::SpdcAbsorption,
                        );
                        state = IonState::Bright;
                        state_since = pair.time_s;
                        next_scheduled = if cfg.pump_rate_850 > 0.0 {
                            pair.time_s + exp_sample(rng_ion, cfg.pump_rate_850)
                        } else {
                            f64::INFINITY
                        };
                    }
                }
                // Scheme A: absorption on the 850 line, followed by
                // decay into D5/2 with the tabulated branching fraction.
                (Scheme::A, IonState::Bright)
                    if rng_ion.random::<f64>() < absorption.probability(&pair)
                        && rng_ion.random::<f64>() < branch_to_d52 =>
                {
                    emit_fluorescence(
                        buf,
                        rng_fluor,
                        rng_jitter,
                        &cfg.jitter,
                        cfg.r_on,
                        state_since,
                        pair.time_s,
                    );
                    log.record(
                        pair.time_s,
                        IonState::Bright,
                        IonState::Dark,
                        TransitionCause::SpdcAbsorption,
                    );
                    state = IonState::Dark;
                    state_since = pair.time_s;
                    next_scheduled = pair.time_s + exp_sample(rng_ion, decay_rate);
                }
                _ => {}
            }
        }
    }
    if state == IonState::Bright {
        emit_fluorescence(
            buf,
            rng_fluor,
            rng_jitter,
            &cfg.jitter,
            cfg.r_on,
            state_since,
            duration,
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn run_pulsed_scheme(
    cfg: &TrajectoryConfig,
    table: &TransitionTable,
    absorption: &AbsorptionModel,
    pairs: PairIter<ChaCha8Rng>,
    buf: &mut TagBuffer,
    log: &mut GroundTruthLog,
    rng_ion: &mut ChaCha8Rng,
    rng_jitter: &mut ChaCha8Rng,
) {
    let duration = cfg.duration_s;
    let branch_to_s = table
        .branching(Term::P32, Term::S12)
        .expect("tabulated line");
    let decay_rate = 1.0 / cfg.tau0_s;

    let mut state = IonState::Idle;
    let mut cycle = 0u64;
    let mut next_prepare = 0.0f64;
    let mut next_decay = f64::INFINITY;
    let mut pairs = pairs.peekable();

    loop {
        let pair_t = pairs.peek().map_or(f64::INFINITY, |p| p.time_s);
        let next_t = next_prepare.min(next_decay).min(pair_t);
        if next_t >= duration {
            break;
        }
        if next_prepare <= next_decay && next_prepare <= pair_t {
            let t = next_prepare;
            buf.push(channel::MARKER, t);
            log.record(t, state, IonState::Dark, TransitionCause::ProtocolPulse);
            state = IonState::Dark;
            next_decay = t + exp_sample(rng_ion, decay_rate);
            cycle += 1;
            next_prepare = cycle as f64 * cfg.cycle_period_s;
        } else if next_decay <= pair_t {
            let t = next_decay;
            // Quadrupole decay back to the ground state: no 393 nm photon.
            log.record(
                t,
                IonState::Dark,
                IonState::Idle,
                TransitionCause::Spontaneous,
            );
            state = IonState::Idle;
            next_decay = f64::INFINITY;
        } else {
            let pair = pairs.next().expect("peeked");
            if pair.herald_detected {
                buf.push(
                    channel::HERALD,
                    pair.time_s + detector_jitter(&cfg.jitter, rng_jitter),
                );
            }
            if state == IonState::Dark && rng_ion.random::<f64>() < absorption.probability(&pair) {
                // Raman transition to the ground state; the emitted 393 nm
                // photon is detected with the configured efficiency.
                log.record(
                    pair.time_s,
                    IonState::Dark,
                    IonState::Idle,
                    TransitionCause::SpdcAbsorption,
                );
                state = IonState::Idle;
                next_decay = f64::INFINITY;
                if rng_ion.random::<f64>() < branch_to_s * cfg.detection_efficiency_393 {
                    buf.push(
                        channel::RAMAN_393,
                        pair.time_s + detector_jitter(&cfg.jitter, rng_jitter),
                    );
                }
            }
        }
    }
}
