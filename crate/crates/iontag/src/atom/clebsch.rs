//! Clebsch-Gordan coefficients for dipole coupling weights.
//!
//! Racah's closed form, evaluated with a small factorial table. Arguments
//! are half-integers; every factorial argument below is guaranteed integral
//! for a valid triad.

use crate::half::Half;

fn fact(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n as u64).map(|k| k as f64).product()
}

/// `⟨j1 m1; j2 m2 | J M⟩` with `M = m1 + m2`.
///
/// Returns 0 for violated selection rules (triangle, projection bounds,
/// mismatched total M).
pub fn clebsch_gordan(j1: Half, m1: Half, j2: Half, m2: Half, j: Half, m: Half) -> f64 {
    if (m1 + m2) != m
        || m1.abs() > j1
        || m2.abs() > j2
        || m.abs() > j
        || j > j1 + j2
        || j < (j1 - j2).abs()
        || (j1 + j2 - j).twice() % 2 != 0
    {
        return 0.0;
    }
    // All in doubled units; each `h(..)` is an even doubled value => integer.
    let int = |h: Half| -> i32 {
        debug_assert!(h.twice() % 2 == 0);
        h.twice() / 2
    };

    let prefactor = (f64::from(j.twice() + 1)
        * fact(int(j1 + j2 - j))
        * fact(int(j1 - j2 + j))
        * fact(int(-j1 + j2 + j))
        / fact(int(j1 + j2 + j) + 1))
    .sqrt()
        * (fact(int(j + m))
            * fact(int(j - m))
            * fact(int(j1 - m1))
            * fact(int(j1 + m1))
            * fact(int(j2 - m2))
            * fact(int(j2 + m2)))
        .sqrt();

    let mut sum = 0.0;
    for k in 0.. {
        let a = int(j1 + j2 - j) - k;
        let b = int(j1 - m1) - k;
        let c = int(j2 + m2) - k;
        let d = int(j - j2 + m1) + k;
        let e = int(j - j1 - m2) + k;
        if a < 0 || b < 0 || c < 0 {
            break;
        }
        if d < 0 || e < 0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / (fact(k) * fact(a) * fact(b) * fact(c) * fact(d) * fact(e));
    }
    prefactor * sum
}

/// Squared CG weight for a dipole line `upper (j_u, m_u) -> lower (j_l, m_l)`
/// with photon polarization index `q = m_u - m_l`.
///
/// Normalized so that for each upper sublevel the weights summed over all
/// `(m_l, q)` of one fine-structure line equal 1.
pub fn dipole_weight(j_lower: Half, m_lower: Half, j_upper: Half, m_upper: Half) -> f64 {
    let q = m_upper - m_lower;
    if q.abs() > Half::int(1) {
        return 0.0;
    }
    let c = clebsch_gordan(j_lower, m_lower, Half::int(1), q, j_upper, m_upper);
    c * c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i32) -> Half {
        Half::halves(twice)
    }

    #[test]
    fn textbook_values() {
        // ⟨1/2 1/2; 1/2 -1/2 | 1 0⟩ = 1/√2
        let c = clebsch_gordan(h(1), h(1), h(1), h(-1), h(2), h(0));
        assert!((c - 0.5f64.sqrt()).abs() < 1e-12);
        // ⟨1/2 1/2; 1/2 -1/2 | 0 0⟩ = 1/√2
        let c = clebsch_gordan(h(1), h(1), h(1), h(-1), h(0), h(0));
        assert!((c - 0.5f64.sqrt()).abs() < 1e-12);
        // ⟨1 0; 1 0 | 2 0⟩ = √(2/3)
        let c = clebsch_gordan(h(2), h(0), h(2), h(0), h(4), h(0));
        assert!((c - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // Stretch state is exact: ⟨5/2 5/2; 1 1 | 7/2 7/2⟩ = 1
        let c = clebsch_gordan(h(5), h(5), h(2), h(2), h(7), h(7));
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_rules_zero() {
        assert_eq!(clebsch_gordan(h(1), h(1), h(1), h(1), h(2), h(0)), 0.0);
        assert_eq!(clebsch_gordan(h(1), h(3), h(1), h(-1), h(2), h(2)), 0.0);
        assert_eq!(clebsch_gordan(h(1), h(1), h(1), h(1), h(6), h(2)), 0.0);
    }

    #[test]
    fn completeness_per_upper_sublevel() {
        // For every P3/2 sublevel decaying to D5/2, weights over (m_l, q) sum to 1.
        let ju = h(3);
        let jl = h(5);
        for mu in ju.projections() {
            let total: f64 = jl
                .projections()
                .map(|ml| dipole_weight(jl, ml, ju, mu))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "m_u = {mu}: {total}");
        }
    }

    #[test]
    fn known_d52_p32_weights() {
        // Hard-coded cross-check of the computed table for the 854 nm line:
        // |⟨5/2 m_l; 1 q | 3/2 m_u⟩|² from standard angular-momentum tables.
        let jl = h(5);
        let ju = h(3);
        let cases = [
            // (2*m_l, 2*m_u, weight)
            (5, 3, 2.0 / 3.0),  // sigma-: m_u - m_l = -1
            (3, 3, 4.0 / 15.0), // pi
            (1, 3, 1.0 / 15.0), // sigma+
            (3, 1, 2.0 / 5.0),  // sigma-
            (1, 1, 2.0 / 5.0),  // pi
            (-1, 1, 1.0 / 5.0), // sigma+
        ];
        for (ml2, mu2, expect) in cases {
            let w = dipole_weight(jl, h(ml2), ju, h(mu2));
            assert!(
                (w - expect).abs() < 1e-12,
                "m_l {ml2}/2, m_u {mu2}/2: {w} vs {expect}"
            );
        }
    }
}
