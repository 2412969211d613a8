//! Single-photon polarization states in the {H, V} Jones basis.

use num_complex::Complex64 as C64;

use super::AtomError;

const NORM_TOL: f64 = 1e-12;

/// Pure polarization state: two complex amplitudes on {H, V} plus the
/// propagation direction (unit vector).
///
/// Circular conventions, for propagation along the +z quantization axis:
/// `sigma+ = L = (H + iV)/sqrt(2)` drives `Δm = +1`;
/// `sigma- = R = (H - iV)/sqrt(2)` drives `Δm = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub h: C64,
    pub v: C64,
    pub direction: [f64; 3],
}

impl PolarizationState {
    /// Normalized state from raw amplitudes, propagating along +z.
    pub fn new(h: C64, v: C64) -> Result<Self, AtomError> {
        Self::with_direction(h, v, [0.0, 0.0, 1.0])
    }

    pub fn with_direction(h: C64, v: C64, direction: [f64; 3]) -> Result<Self, AtomError> {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if norm < NORM_TOL {
            return Err(AtomError::ZeroAmplitude);
        }
        let dn = (direction[0] * direction[0]
            + direction[1] * direction[1]
            + direction[2] * direction[2])
            .sqrt();
        if dn < NORM_TOL {
            return Err(AtomError::ZeroAmplitude);
        }
        Ok(PolarizationState {
            h: h / norm,
            v: v / norm,
            direction: [direction[0] / dn, direction[1] / dn, direction[2] / dn],
        })
    }

    pub fn horizontal() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap()
    }

    pub fn vertical() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).unwrap()
    }

    pub fn diagonal() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap()
    }

    pub fn antidiagonal() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(-1.0, 0.0)).unwrap()
    }

    /// Linear polarization at `angle` radians from H.
    pub fn linear(angle: f64) -> Self {
        Self::new(C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)).unwrap()
    }

    /// Left circular; drives `Δm = +1` when propagating along +z.
    pub fn sigma_plus() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap()
    }

    /// Right circular; drives `Δm = -1` when propagating along +z.
    pub fn sigma_minus() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, -1.0)).unwrap()
    }

    pub fn left() -> Self {
        Self::sigma_plus()
    }

    pub fn right() -> Self {
        Self::sigma_minus()
    }

    /// `⟨self|other⟩` in the Jones basis.
    pub fn inner(&self, other: &PolarizationState) -> C64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// Squared overlap `|⟨self|other⟩|²`; symmetric and global-phase
    /// invariant.
    pub fn overlap(&self, other: &PolarizationState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Decompose onto the circular basis relative to a quantization axis:
    /// returns `(amp_sigma_plus, amp_sigma_minus)` as seen by the atom.
    ///
    /// Valid only for propagation (anti)parallel to the axis; propagation
    /// against the axis swaps the helicities.
    pub fn sigma_components(&self, axis: [f64; 3]) -> Result<(C64, C64), AtomError> {
        let dot =
            self.direction[0] * axis[0] + self.direction[1] * axis[1] + self.direction[2] * axis[2];
        let axis_norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let cosang = dot / axis_norm;
        if (cosang.abs() - 1.0).abs() > 1e-9 {
            return Err(AtomError::NonAxialPropagation);
        }
        let i = C64::new(0.0, 1.0);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        // ⟨sigma±|psi⟩ for +z propagation.
        let plus = (self.h - i * self.v) * inv_sqrt2;
        let minus = (self.h + i * self.v) * inv_sqrt2;
        if cosang > 0.0 {
            Ok((plus, minus))
        } else {
            Ok((minus, plus))
        }
    }

    /// Build from circular amplitudes relative to the +z axis.
    pub fn from_sigma_components(plus: C64, minus: C64) -> Result<Self, AtomError> {
        let i = C64::new(0.0, 1.0);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self::new((plus + minus) * inv_sqrt2, (plus - minus) * i * inv_sqrt2)
    }

    /// Poincare-sphere coordinates `(s1, s2, s3)`:
    /// `s1 = |h|² - |v|²`, `s2 = 2 Re(h* v)`, `s3 = 2 Im(h* v)`;
    /// circular states sit at `s3 = ±1`.
    pub fn poincare(&self) -> [f64; 3] {
        let hv = self.h.conj() * self.v;
        [
            self.h.norm_sqr() - self.v.norm_sqr(),
            2.0 * hv.re,
            2.0 * hv.im,
        ]
    }

    /// Inverse of [`poincare`](Self::poincare), up to a global phase.
    pub fn from_poincare(s: [f64; 3]) -> Result<Self, AtomError> {
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(AtomError::NotOnSphere(norm));
        }
        let h = ((1.0 + s[0]) / 2.0).sqrt();
        if h < NORM_TOL {
            return Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        }
        let v = C64::new(s[1], s[2]) / (2.0 * h);
        Self::new(C64::new(h, 0.0), v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlaps() {
        let sp = PolarizationState::sigma_plus();
        let sm = PolarizationState::sigma_minus();
        let h = PolarizationState::horizontal();
        assert!((sp.overlap(&sp) - 1.0).abs() < 1e-12);
        assert!(sp.overlap(&sm) < 1e-12);
        assert!((h.overlap(&sp) - 0.5).abs() < 1e-12);
        assert!((sp.overlap(&h) - h.overlap(&sp)).abs() < 1e-15);
    }

    #[test]
    fn global_phase_invariance() {
        let phase = C64::from_polar(1.0, 1.234);
        let a = PolarizationState::diagonal();
        let b = PolarizationState::new(a.h * phase, a.v * phase).unwrap();
        assert!((a.overlap(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_decomposition_roundtrip() {
        let st = PolarizationState::new(C64::new(0.6, 0.1), C64::new(-0.3, 0.73)).unwrap();
        let (p, m) = st.sigma_components([0.0, 0.0, 1.0]).unwrap();
        assert!((p.norm_sqr() + m.norm_sqr() - 1.0).abs() < 1e-12);
        let back = PolarizationState::from_sigma_components(p, m).unwrap();
        assert!((st.overlap(&back) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counterpropagation_swaps_helicity() {
        let sp = PolarizationState::with_direction(
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            [0.0, 0.0, -1.0],
        )
        .unwrap();
        let (p, m) = sp.sigma_components([0.0, 0.0, 1.0]).unwrap();
        assert!(p.norm_sqr() < 1e-12);
        assert!((m.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transverse_propagation_rejected() {
        let st = PolarizationState::with_direction(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            [1.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            st.sigma_components([0.0, 0.0, 1.0]),
            Err(AtomError::NonAxialPropagation)
        ));
    }

    #[test]
    fn poincare_roundtrip() {
        for st in [
            PolarizationState::horizontal(),
            PolarizationState::vertical(),
            PolarizationState::diagonal(),
            PolarizationState::sigma_plus(),
            PolarizationState::new(C64::new(0.8, 0.0), C64::new(0.36, 0.48)).unwrap(),
        ] {
            let s = st.poincare();
            let norm: f64 = s.iter().map(|x| x * x).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-12);
            let back = PolarizationState::from_poincare(s).unwrap();
            assert!((st.overlap(&back) - 1.0).abs() < 1e-12);
        }
        assert!((PolarizationState::sigma_plus().poincare()[2] - 1.0).abs() < 1e-12);
    }
}
