//! Heralded photon-to-qubit state transfer.
//!
//! The ion is prepared in the symmetric superposition of |D5/2, m = ±3/2⟩
//! by a sigma-minus 397 nm pump, a resonant RF pi/2 pulse on the ground
//! state qubit and two 729 nm pi pulses. An absorbed 854 nm photon then
//! drives a Raman transition to the ground state: the sigma+ component of
//! the photon maps onto |S1/2, m = -1/2⟩ and the sigma- component onto
//! |S1/2, m = +1/2⟩, while the emitted 393 nm photon (the equally polarized
//! pi decay of both paths) heralds the event without revealing the path.
//!
//! The relative qubit phase precesses at the Zeeman splitting; recording
//! the herald detection time lets software unwind it. Timing jitter on the
//! herald then leaves the Gaussian residual dephasing
//! `exp(-(2 pi Δ_Z sigma_t)^2 / 2)`.

use num_complex::Complex64 as C64;
use rand::RngExt;

use super::ProtocolError;
use crate::atom::{dipole_weight, PolarizationState};
use crate::half::Half;
use crate::rng::{stream, stream_id};
use crate::sim::{detector_jitter, JitterModel};

/// One phase of the preparation/detection pulse sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PulsePhase {
    pub name: String,
    pub duration_s: f64,
    pub op: PhaseOp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseOp {
    /// Doppler cooling; dead time for the state evolution.
    Cool,
    /// Circularly polarized 397 nm pumping into one S1/2 sublevel.
    Pump397 { sigma_minus: bool },
    /// Resonant RF rotation of the S1/2 Zeeman qubit (area in radians).
    RfPulse { area_rad: f64 },
    /// 729 nm pi-type pulse moving one S1/2 sublevel to a D5/2 sublevel
    /// (`target_m_twice` = 2m of the destination).
    Pulse729 {
        from_m_twice: i32,
        target_m_twice: i32,
        area_rad: f64,
    },
    /// Exposure to the source with the 393 nm detector gated on.
    Expose,
}

/// Ordered, non-overlapping pulse phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub phases: Vec<PulsePhase>,
}

impl PulseSequence {
    /// The standard transfer preparation: cool, pump to |S, -1/2⟩, RF pi/2,
    /// two 729 nm pi pulses to m = -3/2 and m = +3/2, then exposure.
    pub fn standard_transfer() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        let phase = |name: &str, duration_s: f64, op: PhaseOp| PulsePhase {
            name: name.to_string(),
            duration_s,
            op,
        };
        PulseSequence {
            phases: vec![
                phase("cool", 5e-3, PhaseOp::Cool),
                phase("pump", 50e-6, PhaseOp::Pump397 { sigma_minus: true }),
                phase(
                    "rf_half",
                    10e-6,
                    PhaseOp::RfPulse {
                        area_rad: FRAC_PI_2,
                    },
                ),
                phase(
                    "shelve_minus",
                    10e-6,
                    PhaseOp::Pulse729 {
                        from_m_twice: -1,
                        target_m_twice: -3,
                        area_rad: PI,
                    },
                ),
                phase(
                    "shelve_plus",
                    10e-6,
                    PhaseOp::Pulse729 {
                        from_m_twice: 1,
                        target_m_twice: 3,
                        area_rad: PI,
                    },
                ),
                phase("expose", 10e-6, PhaseOp::Expose),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.phases.iter().any(|p| p.duration_s <= 0.0) {
            return Err(ProtocolError::InvalidConfig(
                "pulse phases need positive durations".into(),
            ));
        }
        Ok(())
    }
}

/// Amplitudes over {|D5/2, m = -3/2⟩, |D5/2, m = +3/2⟩}; the squared norm
/// may fall below one when pulse errors leave population behind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DManifoldState {
    pub minus: C64,
    pub plus: C64,
}

impl DManifoldState {
    pub fn population(&self) -> f64 {
        self.minus.norm_sqr() + self.plus.norm_sqr()
    }
}

/// Ground-state Zeeman qubit over {|S1/2, m = -1/2⟩, |S1/2, m = +1/2⟩}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonQubitState {
    pub amp_minus: C64,
    pub amp_plus: C64,
    /// Qubit splitting used for the phase bookkeeping, MHz.
    pub zeeman_mhz: f64,
    /// Time the stored amplitudes refer to, seconds.
    pub reference_time_s: f64,
}

impl IonQubitState {
    pub fn new(amp_minus: C64, amp_plus: C64, zeeman_mhz: f64, reference_time_s: f64) -> Self {
        let norm = (amp_minus.norm_sqr() + amp_plus.norm_sqr()).sqrt();
        IonQubitState {
            amp_minus: amp_minus / norm,
            amp_plus: amp_plus / norm,
            zeeman_mhz,
            reference_time_s,
        }
    }

    pub fn fidelity(&self, other: &IonQubitState) -> f64 {
        (self.amp_minus.conj() * other.amp_minus + self.amp_plus.conj() * other.amp_plus).norm_sqr()
    }
}

/// Noise and detection model of one transfer attempt.
#[derive(Debug, Clone)]
pub struct TransferConfig {
    /// S1/2 qubit Zeeman splitting, MHz.
    pub zeeman_splitting_mhz: f64,
    /// Fractional pulse-area miscalibration applied to every pulse.
    pub pulse_area_error: f64,
    /// Herald detector timing jitter.
    pub jitter: JitterModel,
    pub detection_efficiency_393: f64,
    /// P3/2 -> S1/2 branching fraction.
    pub branching_s: f64,
    /// Absorption probability per attempt for a fully matched path.
    pub absorption_prob: f64,
    /// Exposure window per attempt, seconds.
    pub exposure_s: f64,
    /// Unwind the accumulated Zeeman phase from the herald timestamp.
    pub phase_tracking: bool,
    pub master_seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            zeeman_splitting_mhz: 10.0,
            pulse_area_error: 0.0,
            jitter: JitterModel::off(),
            detection_efficiency_393: 1.0,
            branching_s: 0.9344,
            absorption_prob: 0.5,
            exposure_s: 10e-6,
            phase_tracking: true,
            master_seed: 0,
        }
    }
}

/// Apply the preparation sequence with a common fractional area error on
/// every pulse; returns the resulting D-manifold amplitudes (unnormalized:
/// residual ground-state population is simply absent).
pub fn prepare_transfer_state(
    sequence: &PulseSequence,
    area_error: f64,
) -> Result<DManifoldState, ProtocolError> {
    sequence.validate()?;
    // Ground-state qubit amplitudes (m = -1/2, +1/2) then shelving.
    let mut s = [C64::new(0.0, 0.0); 2];
    let mut d = DManifoldState {
        minus: C64::new(0.0, 0.0),
        plus: C64::new(0.0, 0.0),
    };
    let mut pumped = false;
    let mut rf_done = false;
    let mut shelved = [false, false];
    for phase in &sequence.phases {
        match phase.op {
            PhaseOp::Cool => {}
            PhaseOp::Pump397 { sigma_minus } => {
                s = [C64::new(0.0, 0.0); 2];
                if sigma_minus {
                    s[0] = C64::new(1.0, 0.0);
                } else {
                    s[1] = C64::new(1.0, 0.0);
                }
                pumped = true;
            }
            PhaseOp::RfPulse { area_rad } => {
                if !pumped {
                    return Err(ProtocolError::InvalidConfig(
                        "RF pulse before optical pumping".into(),
                    ));
                }
                let theta = 0.5 * area_rad * (1.0 + area_error);
                let (sin, cos) = theta.sin_cos();
                // Rotation about y: real amplitudes, no relative phase.
                let new0 = s[0] * cos - s[1] * sin;
                let new1 = s[0] * sin + s[1] * cos;
                s = [new0, new1];
                rf_done = true;
            }
            PhaseOp::Pulse729 {
                from_m_twice,
                target_m_twice,
                area_rad,
            } => {
                if !rf_done {
                    return Err(ProtocolError::InvalidConfig(
                        "729 nm pulse before the RF rotation".into(),
                    ));
                }
                let idx = match from_m_twice {
                    -1 => 0usize,
                    1 => 1usize,
                    _ => {
                        return Err(ProtocolError::InvalidConfig(
                            "729 nm pulse must start from S1/2 m = ±1/2".into(),
                        ))
                    }
                };
                let transferred = (0.5 * area_rad * (1.0 + area_error)).sin();
                let amp = s[idx] * transferred;
                s[idx] *= (0.5 * area_rad * (1.0 + area_error)).cos();
                match target_m_twice {
                    -3 => {
                        d.minus = amp;
                        shelved[0] = true;
                    }
                    3 => {
                        d.plus = amp;
                        shelved[1] = true;
                    }
                    _ => {
                        return Err(ProtocolError::InvalidConfig(
                            "transfer shelves into D5/2 m = ±3/2".into(),
                        ))
                    }
                }
            }
            PhaseOp::Expose => {}
        }
    }
    if !(pumped && rf_done && shelved[0] && shelved[1]) {
        return Err(ProtocolError::InvalidConfig(
            "sequence must pump, rotate and shelve both qubit paths".into(),
        ));
    }
    Ok(d)
}

/// Outcome of one exposure attempt.
#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub heralded: bool,
    pub herald_time_s: Option<f64>,
    pub state: Option<IonQubitState>,
    /// Fidelity against the ideal map of the input photon, when known.
    pub fidelity: Option<f64>,
}

/// Squared coupling of the shelved D5/2 sublevels to their pi-decay P3/2
/// partners; equal for both paths by mirror symmetry.
fn raman_coupling() -> f64 {
    dipole_weight(
        Half::halves(5),
        Half::halves(-3),
        Half::halves(3),
        Half::halves(-1),
    )
}

/// Expose a prepared ion to one photon and gate the 393 nm detector.
///
/// On absorption the photon's circular components map onto the ground
/// state qubit; detection of the Raman photon heralds the transfer. The
/// qubit phase accumulated until the (jittered) herald timestamp is
/// unwound when phase tracking is enabled.
pub fn absorb_and_herald(
    prepared: &DManifoldState,
    photon: &PolarizationState,
    cfg: &TransferConfig,
    attempt_start_s: f64,
    rng: &mut impl RngExt,
) -> Result<TransferOutcome, ProtocolError> {
    let (sigma_plus, sigma_minus) = photon.sigma_components([0.0, 0.0, 1.0])?;
    // sigma+ drives m = -3/2 -> P(-1/2); sigma- drives m = +3/2 -> P(+1/2).
    let cg = raman_coupling();
    let c_minus = sigma_plus * prepared.minus * cg.sqrt();
    let c_plus = sigma_minus * prepared.plus * cg.sqrt();
    let strength = (c_minus.norm_sqr() + c_plus.norm_sqr()) / cg;

    let not_heralded = TransferOutcome {
        heralded: false,
        herald_time_s: None,
        state: None,
        fidelity: None,
    };
    if rng.random::<f64>() >= cfg.absorption_prob * strength {
        return Ok(not_heralded);
    }
    let t_abs = attempt_start_s + rng.random::<f64>() * cfg.exposure_s;
    if rng.random::<f64>() >= cfg.branching_s * cfg.detection_efficiency_393 {
        return Ok(not_heralded);
    }
    let t_det = t_abs + detector_jitter(&cfg.jitter, rng);

    let omega = std::f64::consts::TAU * cfg.zeeman_splitting_mhz * 1e6;
    // The qubit forms at t_abs; its relative phase precesses from then on.
    // Phase tracking rewinds by the *measured* detection time, leaving only
    // the jitter-induced error; without tracking the full precession since
    // the attempt start stays in the state.
    let phase_error = if cfg.phase_tracking {
        omega * (t_det - cfg.jitter.offset_s - t_abs)
    } else {
        omega * (t_abs - attempt_start_s)
    };
    let rotated_plus = c_plus * C64::from_polar(1.0, phase_error);
    let state = IonQubitState::new(
        c_minus,
        rotated_plus,
        cfg.zeeman_splitting_mhz,
        attempt_start_s,
    );

    // Ideal map of the same photon for the fidelity reference.
    let target = IonQubitState::new(sigma_plus, sigma_minus, cfg.zeeman_splitting_mhz, 0.0);
    let fidelity = target.fidelity(&state);
    Ok(TransferOutcome {
        heralded: true,
        herald_time_s: Some(t_det),
        state: Some(state),
        fidelity: Some(fidelity),
    })
}

#[derive(Debug, Clone)]
pub struct TransferReport {
    pub n_inputs: usize,
    pub n_heralded: usize,
    pub attempts: usize,
    pub mean_fidelity: f64,
    pub fidelity_se: f64,
    pub success_probability: f64,
}

/// Repeat prepare-expose-herald over Haar-random input photons; fidelity
/// averages over heralded runs only.
pub fn transfer_fidelity_experiment(
    cfg: &TransferConfig,
    n_inputs: usize,
) -> Result<TransferReport, ProtocolError> {
    if n_inputs == 0 {
        return Err(ProtocolError::InvalidConfig(
            "need at least one input state".into(),
        ));
    }
    // Input states and detection dynamics draw from separate streams, so
    // runs differing only in detection parameters see identical inputs.
    let mut rng_inputs = stream(cfg.master_seed, stream_id::PROTOCOL);
    let mut rng = stream(cfg.master_seed, stream_id::ION);
    let sequence = PulseSequence::standard_transfer();
    let max_attempts_per_input = 10_000usize;

    let mut fidelities = Vec::with_capacity(n_inputs);
    let mut attempts = 0usize;
    let mut clock = 0.0f64;
    let cycle = 20e-3; // preparation + exposure repetition period
    for _ in 0..n_inputs {
        // Haar-random pure polarization.
        let photon = loop {
            let g = [
                crate::rng::normal_sample(&mut rng_inputs),
                crate::rng::normal_sample(&mut rng_inputs),
                crate::rng::normal_sample(&mut rng_inputs),
                crate::rng::normal_sample(&mut rng_inputs),
            ];
            if let Ok(p) = PolarizationState::new(C64::new(g[0], g[1]), C64::new(g[2], g[3])) {
                break p;
            }
        };
        let mut heralded = false;
        for _ in 0..max_attempts_per_input {
            attempts += 1;
            clock += cycle;
            let prepared = prepare_transfer_state(&sequence, cfg.pulse_area_error)?;
            let outcome = absorb_and_herald(&prepared, &photon, cfg, clock, &mut rng)?;
            if outcome.heralded {
                fidelities.push(outcome.fidelity.expect("heralded outcomes carry fidelity"));
                heralded = true;
                break;
            }
        }
        if !heralded {
            return Err(ProtocolError::InvalidConfig(
                "no herald within the attempt budget; raise the detection efficiency".into(),
            ));
        }
    }
    let n = fidelities.len() as f64;
    let mean = fidelities.iter().sum::<f64>() / n;
    let var = fidelities
        .iter()
        .map(|f| (f - mean) * (f - mean))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    Ok(TransferReport {
        n_inputs,
        n_heralded: fidelities.len(),
        attempts,
        mean_fidelity: mean,
        fidelity_se: (var / n).sqrt(),
        success_probability: fidelities.len() as f64 / attempts as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_preparation_is_symmetric() {
        let seq = PulseSequence::standard_transfer();
        let d = prepare_transfer_state(&seq, 0.0).unwrap();
        assert!((d.population() - 1.0).abs() < 1e-12);
        assert!((d.minus.norm() - d.plus.norm()).abs() < 1e-12);
        // Real rotation: no relative phase.
        assert!((d.minus * d.plus.conj()).im.abs() < 1e-12);
        assert!((d.minus * d.plus.conj()).re > 0.0);
    }

    #[test]
    fn pi_instead_of_pi_half_populates_one_sublevel() {
        let mut seq = PulseSequence::standard_transfer();
        for p in &mut seq.phases {
            if let PhaseOp::RfPulse { area_rad } = &mut p.op {
                *area_rad = std::f64::consts::PI;
            }
        }
        let d = prepare_transfer_state(&seq, 0.0).unwrap();
        assert!(d.minus.norm() < 1e-12);
        assert!((d.plus.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_percent_area_error_keeps_preparation_fidelity() {
        let seq = PulseSequence::standard_transfer();
        let d = prepare_transfer_state(&seq, 0.01).unwrap();
        let ideal = std::f64::consts::FRAC_1_SQRT_2;
        let overlap = (d.minus * ideal + d.plus * ideal).norm_sqr();
        assert!(overlap >= 0.999, "prep fidelity {overlap}");
    }

    #[test]
    fn malformed_sequences_are_rejected() {
        let mut seq = PulseSequence::standard_transfer();
        seq.phases
            .retain(|p| !matches!(p.op, PhaseOp::RfPulse { .. }));
        assert!(prepare_transfer_state(&seq, 0.0).is_err());
        let mut seq = PulseSequence::standard_transfer();
        seq.phases[0].duration_s = 0.0;
        assert!(prepare_transfer_state(&seq, 0.0).is_err());
    }

    #[test]
    fn sigma_plus_photon_maps_to_m_minus_half() {
        let cfg = TransferConfig::default();
        let seq = PulseSequence::standard_transfer();
        let d = prepare_transfer_state(&seq, 0.0).unwrap();
        let mut rng = stream(1, 7);
        // Retry until heralded (absorption_prob < 1).
        let outcome = loop {
            let o = absorb_and_herald(&d, &PolarizationState::sigma_plus(), &cfg, 0.0, &mut rng)
                .unwrap();
            if o.heralded {
                break o;
            }
        };
        let q = outcome.state.unwrap();
        assert!((q.amp_minus.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((outcome.fidelity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_transfer_is_perfect_for_arbitrary_inputs() {
        let cfg = TransferConfig::default();
        let report = transfer_fidelity_experiment(&cfg, 500).unwrap();
        assert!(
            (report.mean_fidelity - 1.0).abs() < 1e-12,
            "{}",
            report.mean_fidelity
        );
    }

    #[test]
    fn tracking_off_dephases_to_two_thirds() {
        let cfg = TransferConfig {
            phase_tracking: false,
            master_seed: 3,
            ..TransferConfig::default()
        };
        let report = transfer_fidelity_experiment(&cfg, 20_000).unwrap();
        assert!(
            (report.mean_fidelity - 2.0 / 3.0).abs() < 0.01,
            "mean fidelity {}",
            report.mean_fidelity
        );
    }

    #[test]
    fn noise_model_keeps_high_fidelity() {
        let cfg = TransferConfig {
            pulse_area_error: 0.01,
            jitter: JitterModel::new(1e-9),
            master_seed: 4,
            ..TransferConfig::default()
        };
        let report = transfer_fidelity_experiment(&cfg, 2000).unwrap();
        assert!(report.mean_fidelity >= 0.95, "{}", report.mean_fidelity);
    }

    #[test]
    fn heralded_fidelity_does_not_depend_on_detection_efficiency() {
        let mut results = Vec::new();
        for eta in [0.01, 0.1, 1.0] {
            // Same master seed: every efficiency sees the same input states.
            let cfg = TransferConfig {
                pulse_area_error: 0.01,
                jitter: JitterModel::new(1e-9),
                detection_efficiency_393: eta,
                master_seed: 5,
                ..TransferConfig::default()
            };
            let report = transfer_fidelity_experiment(&cfg, 1500).unwrap();
            results.push((eta, report.mean_fidelity, report.fidelity_se.max(1e-6)));
            // Success probability scales with the efficiency.
            assert!(
                (report.success_probability - cfg.absorption_prob * 0.5 * cfg.branching_s * eta)
                    .abs()
                    < 0.25 * cfg.absorption_prob * 0.5 * cfg.branching_s * eta
                        + 3.0 / report.attempts as f64,
            );
        }
        let (slope, sigma) = crate::analysis::weighted_line_slope(&results).unwrap();
        assert!(slope.abs() <= 2.0 * sigma, "slope {slope} ± {sigma}");
    }
}
