//! Herald-arm polarization analyzer: optional quarter- and half-wave plates
//! followed by a fixed polarizer.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::atom::PolarizationState;

/// Jones matrix of an ideal half-wave plate with fast axis at `theta`.
pub fn hwp_matrix(theta: f64) -> Matrix2<C64> {
    let (s, c) = (2.0 * theta).sin_cos();
    Matrix2::new(
        C64::new(c, 0.0),
        C64::new(s, 0.0),
        C64::new(s, 0.0),
        C64::new(-c, 0.0),
    )
}

/// Jones matrix of an ideal quarter-wave plate with fast axis at `theta`.
pub fn qwp_matrix(theta: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    let i = C64::new(0.0, 1.0);
    let cc = C64::new(c * c, 0.0);
    let ss = C64::new(s * s, 0.0);
    let sc = C64::new(s * c, 0.0);
    Matrix2::new(cc + i * ss, sc - i * sc, sc - i * sc, ss + i * cc)
}

/// Transmission axis of the analyzer's polarizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizerAxis {
    Horizontal,
    Vertical,
}

/// Waveplate angles (radians) plus polarizer; `polarizer: None` means the
/// herald arm performs no polarization selection at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    pub qwp: Option<f64>,
    pub hwp: Option<f64>,
    pub polarizer: Option<PolarizerAxis>,
}

impl AnalyzerSetting {
    /// No polarization analysis in the herald arm.
    pub fn open() -> Self {
        AnalyzerSetting {
            qwp: None,
            hwp: None,
            polarizer: None,
        }
    }

    /// Polarizer only.
    pub fn polarizer(axis: PolarizerAxis) -> Self {
        AnalyzerSetting {
            qwp: None,
            hwp: None,
            polarizer: Some(axis),
        }
    }

    /// HWP at `theta` before a horizontal polarizer: sweeps the linear
    /// measurement basis.
    pub fn linear_sweep(theta: f64) -> Self {
        AnalyzerSetting {
            qwp: None,
            hwp: Some(theta),
            polarizer: Some(PolarizerAxis::Horizontal),
        }
    }

    /// QWP at 45 degrees plus HWP at `theta` before a horizontal polarizer:
    /// sweeps a great circle through the circular states.
    pub fn circular_sweep(theta: f64) -> Self {
        AnalyzerSetting {
            qwp: Some(std::f64::consts::FRAC_PI_4),
            hwp: Some(theta),
            polarizer: Some(PolarizerAxis::Horizontal),
        }
    }

    /// The pure state this setting projects onto, i.e. the input
    /// polarization with unit transmission amplitude: `(HWP QWP)† |axis⟩`.
    /// `None` when there is no polarizer.
    pub fn projector(&self) -> Option<PolarizationState> {
        let axis = self.polarizer?;
        let mut v = match axis {
            PolarizerAxis::Horizontal => {
                nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
            }
            PolarizerAxis::Vertical => {
                nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
            }
        };
        if let Some(theta) = self.hwp {
            v = hwp_matrix(theta).adjoint() * v;
        }
        if let Some(theta) = self.qwp {
            v = qwp_matrix(theta).adjoint() * v;
        }
        Some(PolarizationState::new(v[0], v[1]).expect("waveplates are unitary"))
    }
}

/// A horizontally polarized photon sent through a QWP at `theta`: the
/// preparation used to sweep settings from one circular pole through linear
/// to the other pole.
pub fn qwp_prepared(theta: f64) -> PolarizationState {
    let v = qwp_matrix(theta) * nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    PolarizationState::new(v[0], v[1]).expect("waveplates are unitary")
}
