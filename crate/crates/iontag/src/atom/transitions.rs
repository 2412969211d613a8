//! Fine-structure transitions of Ca-40+: branching ratios, wavelengths,
//! relative line strengths and Zeeman/polarization coupling weights.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::clebsch::dipole_weight;
use super::{AtomError, Sublevel, Term};
use crate::half::Half;

/// Measured branching fractions and the 854/850 strength ratio.
///
/// All values are configurable; the defaults are the measured numbers for
/// Ca-40+ (P3/2 decays to S1/2, D5/2, D3/2 with 93.44%, 5.90%, 0.66%;
/// P1/2 leaks 6.4% to D3/2; the D5/2-P3/2 line is ~6x stronger than
/// D3/2-P3/2).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingConstants {
    pub p32_to_s12: f64,
    pub p32_to_d52: f64,
    pub p32_to_d32: f64,
    pub p12_to_s12: f64,
    pub p12_to_d32: f64,
    /// Relative oscillator strength of D5/2-P3/2 over D3/2-P3/2.
    pub strength_ratio_854_over_850: f64,
}

impl Default for BranchingConstants {
    fn default() -> Self {
        BranchingConstants {
            p32_to_s12: 0.9344,
            p32_to_d52: 0.0590,
            p32_to_d32: 0.0066,
            p12_to_s12: 0.936,
            p12_to_d32: 0.064,
            strength_ratio_854_over_850: 6.0,
        }
    }
}

/// One dipole line between fine-structure terms.
#[derive(Debug, Clone)]
pub struct Line {
    pub upper: Term,
    pub lower: Term,
    pub branching: f64,
    pub wavelength_nm: f64,
    pub rel_strength: f64,
    /// (2*m_lower, 2*m_upper) -> squared CG weight; q = m_upper - m_lower.
    couplings: BTreeMap<(i32, i32), f64>,
}

impl Line {
    fn new(
        upper: Term,
        lower: Term,
        branching: f64,
        wavelength_nm: f64,
        rel_strength: f64,
    ) -> Self {
        let mut couplings = BTreeMap::new();
        for mu in upper.j().projections() {
            for ml in lower.j().projections() {
                let w = dipole_weight(lower.j(), ml, upper.j(), mu);
                if w != 0.0 {
                    couplings.insert((ml.twice(), mu.twice()), w);
                }
            }
        }
        Line {
            upper,
            lower,
            branching,
            wavelength_nm,
            rel_strength,
            couplings,
        }
    }

    /// Squared coupling weight for the decay `m_upper -> m_lower`; zero when
    /// the projections fall outside the multiplets or `|Δm| > 1`.
    pub fn weight(&self, m_lower: Half, m_upper: Half) -> f64 {
        self.couplings
            .get(&(m_lower.twice(), m_upper.twice()))
            .copied()
            .unwrap_or(0.0)
    }
}

/// All tabulated dipole lines, keyed by `(upper, lower)` term.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    lines: BTreeMap<(Term, Term), Line>,
    constants: BranchingConstants,
}

impl Default for TransitionTable {
    fn default() -> Self {
        TransitionTable::new(BranchingConstants::default())
    }
}

impl TransitionTable {
    pub fn new(constants: BranchingConstants) -> Self {
        let c = &constants;
        let defs = [
            (Term::P12, Term::S12, c.p12_to_s12, 397.0, 1.0),
            (Term::P12, Term::D32, c.p12_to_d32, 866.0, 1.0),
            (Term::P32, Term::S12, c.p32_to_s12, 393.0, 1.0),
            (
                Term::P32,
                Term::D52,
                c.p32_to_d52,
                854.0,
                c.strength_ratio_854_over_850,
            ),
            (Term::P32, Term::D32, c.p32_to_d32, 850.0, 1.0),
        ];
        let mut lines = BTreeMap::new();
        for (upper, lower, br, wl, strength) in defs {
            lines.insert((upper, lower), Line::new(upper, lower, br, wl, strength));
        }
        TransitionTable { lines, constants }
    }

    pub fn constants(&self) -> &BranchingConstants {
        &self.constants
    }

    pub fn line(&self, upper: Term, lower: Term) -> Result<&Line, AtomError> {
        self.lines
            .get(&(upper, lower))
            .ok_or(AtomError::UnknownLine { upper, lower })
    }

    pub fn lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.values()
    }

    pub fn branching(&self, upper: Term, lower: Term) -> Result<f64, AtomError> {
        Ok(self.line(upper, lower)?.branching)
    }

    /// Squared Clebsch-Gordan weight of `lower -> upper` absorption with
    /// polarization index `q` (in units of Δm). Zero unless `q = m_upper -
    /// m_lower` and both projections are inside their multiplets.
    pub fn coupling(&self, lower: Sublevel, upper: Sublevel, q: Half) -> Result<f64, AtomError> {
        let line = self.line(upper.term, lower.term)?;
        if upper.m - lower.m != q {
            return Ok(0.0);
        }
        Ok(line.weight(lower.m, upper.m))
    }

    /// Check the configured invariants; used at startup and in tests.
    pub fn validate(&self) -> Result<(), AtomError> {
        for upper in [Term::P12, Term::P32] {
            let total: f64 = self
                .lines
                .values()
                .filter(|l| l.upper == upper)
                .map(|l| l.branching)
                .sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(AtomError::BranchingNotNormalized { upper, total });
            }
        }
        for line in self.lines.values() {
            for mu in line.upper.j().projections() {
                let total: f64 = line
                    .lower
                    .j()
                    .projections()
                    .map(|ml| line.weight(ml, mu))
                    .sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(AtomError::CouplingNotNormalized {
                        upper: line.upper,
                        lower: line.lower,
                        total,
                    });
                }
            }
        }
        Ok(())
    }

    /// Human-readable constants table (levels, lifetimes, branching ratios,
    /// coupling weights), for documentation and reports.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Ca-40+ level constants");
        let _ = writeln!(out, "  term     J    g_J       lifetime");
        for term in [Term::S12, Term::D32, Term::D52, Term::P12, Term::P32] {
            let lifetime = match term.lifetime_s() {
                Some(t) => format!("{t:.3e} s"),
                None => "stable".to_string(),
            };
            let _ = writeln!(
                out,
                "  {:<6} {:>4} {:>8.5}  {}",
                term.label(),
                term.j().to_string(),
                term.g_j(),
                lifetime
            );
        }
        let _ = writeln!(out, "\nDipole lines (upper -> lower)");
        let _ = writeln!(
            out,
            "  line             wavelength  branching  rel. strength"
        );
        for line in self.lines.values() {
            let _ = writeln!(
                out,
                "  {:<6} -> {:<6} {:>7.0} nm   {:>7.4}    {:>5.2}",
                line.upper.label(),
                line.lower.label(),
                line.wavelength_nm,
                line.branching,
                line.rel_strength
            );
        }
        let _ = writeln!(out, "\nCoupling weights |<j_l m_l; 1 q | j_u m_u>|^2");
        for line in self.lines.values() {
            let _ = writeln!(out, "  {} -> {}", line.upper.label(), line.lower.label());
            for ((ml, mu), w) in &line.couplings {
                let _ = writeln!(
                    out,
                    "    m_u = {:>4} -> m_l = {:>4}  (q = {:>2}): {:.6}",
                    Half::halves(*mu).to_string(),
                    Half::halves(*ml).to_string(),
                    (*mu - *ml) / 2,
                    w
                );
            }
        }
        out
    }
}
