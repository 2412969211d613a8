//! Two-photon polarization states of an SPDC pair.
//!
//! Density matrices act on the product basis {HH, HV, VH, VV}, first slot
//! signal (sent to the ion), second slot idler (the herald arm).

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;

use super::SourceError;
use crate::atom::PolarizationState;

const TOL: f64 = 1e-12;

/// Maximally entangled target states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    fn vector(self) -> Vector4<C64> {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        match self {
            BellState::PhiPlus => Vector4::new(s, z, z, s),
            BellState::PhiMinus => Vector4::new(s, z, z, -s),
            BellState::PsiPlus => Vector4::new(z, s, s, z),
            BellState::PsiMinus => Vector4::new(z, s, -s, z),
        }
    }
}

/// Two-photon polarization density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPolarizationState {
    rho: Matrix4<C64>,
}

impl PairPolarizationState {
    /// Validate and wrap an arbitrary density matrix.
    pub fn from_density(rho: Matrix4<C64>) -> Result<Self, SourceError> {
        for i in 0..4 {
            for j in 0..4 {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > TOL {
                    return Err(SourceError::NotHermitian);
                }
            }
        }
        let trace: C64 = (0..4).map(|i| rho[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TOL || trace.im.abs() > TOL {
            return Err(SourceError::TraceNotOne(trace.re));
        }
        let eig = rho.symmetric_eigen();
        if eig.eigenvalues.iter().any(|&e| e < -TOL) {
            return Err(SourceError::NotPositive);
        }
        Ok(PairPolarizationState { rho })
    }

    pub fn density(&self) -> &Matrix4<C64> {
        &self.rho
    }

    /// Product state `|signal⟩ ⊗ |idler⟩`.
    pub fn product(signal: &PolarizationState, idler: &PolarizationState) -> Self {
        let psi = Vector4::new(
            signal.h * idler.h,
            signal.h * idler.v,
            signal.v * idler.h,
            signal.v * idler.v,
        );
        PairPolarizationState {
            rho: psi * psi.adjoint(),
        }
    }

    pub fn bell(which: BellState) -> Self {
        let psi = which.vector();
        PairPolarizationState {
            rho: psi * psi.adjoint(),
        }
    }

    /// Werner state: target Bell state with visibility `p`, mixed with white
    /// noise `(1 - p) I/4`.
    pub fn werner(target: BellState, p: f64) -> Result<Self, SourceError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SourceError::VisibilityOutOfRange(p));
        }
        let pure = Self::bell(target).rho;
        let id = Matrix4::identity().map(|x: C64| x * 0.25 * (1.0 - p));
        Ok(PairPolarizationState {
            rho: pure.map(|x| x * p) + id,
        })
    }

    /// Reduced state of the signal photon (idler traced out).
    pub fn signal_marginal(&self) -> PartnerState {
        let mut m = Matrix2::zeros();
        for s in 0..2 {
            for sp in 0..2 {
                for i in 0..2 {
                    m[(s, sp)] += self.rho[(2 * s + i, 2 * sp + i)];
                }
            }
        }
        PartnerState { density: m }
    }

    /// Project the idler onto the pure state `herald`; returns the Born
    /// probability and the conditional (normalized) signal state.
    pub fn project_idler(
        &self,
        herald: &PolarizationState,
    ) -> Result<(f64, PartnerState), SourceError> {
        let a = [herald.h, herald.v];
        let mut m = Matrix2::zeros();
        for s in 0..2 {
            for sp in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..2 {
                    for ip in 0..2 {
                        acc += a[i].conj() * self.rho[(2 * s + i, 2 * sp + ip)] * a[ip];
                    }
                }
                m[(s, sp)] = acc;
            }
        }
        let prob = (m[(0, 0)] + m[(1, 1)]).re;
        if prob < TOL {
            return Err(SourceError::IncompatibleHeraldSetting);
        }
        Ok((
            prob,
            PartnerState {
                density: m.map(|x| x / prob),
            },
        ))
    }
}

/// Conditional single-photon polarization state (2x2 density matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerState {
    density: Matrix2<C64>,
}

impl PartnerState {
    pub fn density(&self) -> &Matrix2<C64> {
        &self.density
    }

    pub fn purity(&self) -> f64 {
        (self.density * self.density).trace().re
    }

    /// `⟨a|rho|a⟩` for a pure analyzer state.
    pub fn expectation(&self, accepted: &PolarizationState) -> f64 {
        let a = [accepted.h, accepted.v];
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                acc += a[i].conj() * self.density[(i, j)] * a[j];
            }
        }
        acc.re
    }

    /// The state as a pure polarization vector, when its purity allows.
    pub fn as_pure(&self, tol: f64) -> Option<PolarizationState> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        Some(self.eigen_ensemble()[0].1)
    }

    /// Eigen-decomposition as a two-point ensemble of pure states with
    /// probabilities; the faithful unraveling used when sampling photons
    /// from a mixed conditional state.
    pub fn eigen_ensemble(&self) -> Vec<(f64, PolarizationState)> {
        let eig = self.density.symmetric_eigen();
        let mut out: Vec<(f64, PolarizationState)> = Vec::with_capacity(2);
        for k in 0..2 {
            let w = eig.eigenvalues[k].max(0.0);
            let col = eig.eigenvectors.column(k);
            if w > 1e-9 {
                if let Ok(state) = PolarizationState::new(col[0], col[1]) {
                    out.push((w, state));
                }
            }
        }
        out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let total: f64 = out.iter().map(|(w, _)| w).sum();
        for item in &mut out {
            item.0 /= total;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::PolarizationState as Pol;

    #[test]
    fn bell_and_werner_are_valid_density_matrices() {
        for b in [
            BellState::PhiPlus,
            BellState::PhiMinus,
            BellState::PsiPlus,
            BellState::PsiMinus,
        ] {
            let rho = *PairPolarizationState::bell(b).density();
            PairPolarizationState::from_density(rho).unwrap();
        }
        let w = PairPolarizationState::werner(BellState::PsiPlus, 0.7).unwrap();
        PairPolarizationState::from_density(*w.density()).unwrap();
        assert!(PairPolarizationState::werner(BellState::PsiPlus, 1.3).is_err());
    }

    #[test]
    fn product_projection() {
        // |H⟩|V⟩ heralded on V: certain outcome, partner H.
        let pair = PairPolarizationState::product(&Pol::horizontal(), &Pol::vertical());
        let (p, partner) = pair.project_idler(&Pol::vertical()).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let pure = partner.as_pure(1e-9).unwrap();
        assert!((pure.overlap(&Pol::horizontal()) - 1.0).abs() < 1e-12);
        // Heralding on the orthogonal setting is impossible.
        assert!(matches!(
            pair.project_idler(&Pol::horizontal()),
            Err(SourceError::IncompatibleHeraldSetting)
        ));
    }

    #[test]
    fn bell_marginals_and_conditionals() {
        let pair = PairPolarizationState::bell(BellState::PsiPlus);
        let (p, partner) = pair.project_idler(&Pol::horizontal()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let pure = partner.as_pure(1e-9).unwrap();
        assert!((pure.overlap(&Pol::vertical()) - 1.0).abs() < 1e-12);
        // Deterministic partner in all three bases.
        for herald in [Pol::diagonal(), Pol::sigma_plus(), Pol::antidiagonal()] {
            let (p, partner) = pair.project_idler(&herald).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
            assert!((partner.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_probabilities_sum_to_one_over_any_basis() {
        let pair = PairPolarizationState::werner(BellState::PhiMinus, 0.83).unwrap();
        for (a, b) in [
            (Pol::horizontal(), Pol::vertical()),
            (Pol::diagonal(), Pol::antidiagonal()),
            (Pol::sigma_plus(), Pol::sigma_minus()),
        ] {
            let (pa, _) = pair.project_idler(&a).unwrap();
            let (pb, _) = pair.project_idler(&b).unwrap();
            assert!((pa + pb - 1.0).abs() < 1e-9);
        }
    }

    /// Brute-force 4x4 oracle for the Werner conditional state: build the
    /// projected matrix elementwise and compare purity.
    #[test]
    fn werner_conditional_matches_direct_projection() {
        let p = 0.9;
        let pair = PairPolarizationState::werner(BellState::PsiPlus, p).unwrap();
        let herald = Pol::diagonal();
        let (prob, partner) = pair.project_idler(&herald).unwrap();

        // Oracle: K = I ⊗ |a⟩⟨a|, rho_c = Tr_idler(K rho K) / Tr(K rho).
        let a = [herald.h, herald.v];
        let rho = pair.density();
        let mut proj: Matrix2<C64> = Matrix2::zeros();
        for s in 0..2 {
            for sp in 0..2 {
                for i in 0..2 {
                    for ip in 0..2 {
                        proj[(s, sp)] += a[i].conj() * rho[(2 * s + i, 2 * sp + ip)] * a[ip];
                    }
                }
            }
        }
        let tr = (proj[(0, 0)] + proj[(1, 1)]).re;
        assert!((tr - prob).abs() < 1e-12);
        let oracle = proj.map(|x| x / tr);
        let oracle_purity = (oracle * oracle).trace().re;
        assert!((partner.purity() - oracle_purity).abs() < 1e-12);
        // Analytic check: conditioned Werner state has eigenvalues
        // ((1+p)/2, (1-p)/2).
        let expected = (1.0 + p) * (1.0 + p) / 4.0 + (1.0 - p) * (1.0 - p) / 4.0;
        assert!((partner.purity() - expected).abs() < 1e-12);
    }

    #[test]
    fn eigen_ensemble_reconstructs_density() {
        let pair = PairPolarizationState::werner(BellState::PsiPlus, 0.6).unwrap();
        let (_, partner) = pair.project_idler(&Pol::horizontal()).unwrap();
        let ens = partner.eigen_ensemble();
        let mut rebuilt = Matrix2::zeros();
        for (w, st) in &ens {
            let v = nalgebra::Vector2::new(st.h, st.v);
            rebuilt += (v * v.adjoint()).map(|x| x * *w);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((rebuilt[(i, j)] - partner.density()[(i, j)]).norm() < 1e-9);
            }
        }
    }
}
