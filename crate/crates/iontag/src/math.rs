//! Small numeric helpers shared across modules.

/// Peak-normalized Lorentzian, `1 / (1 + (2 x / fwhm)^2)`.
///
/// Equals 1 at `x = 0` and 1/2 at `|x| = fwhm/2`.
pub fn lorentzian_peak(x: f64, fwhm: f64) -> f64 {
    let u = 2.0 * x / fwhm;
    1.0 / (1.0 + u * u)
}

/// `ln(n!)` for integer `n`, exact table below 21, Stirling-free Lanczos
/// ln-gamma otherwise.
pub fn ln_factorial(n: u64) -> f64 {
    const TABLE: [f64; 21] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
        6227020800.0,
        87178291200.0,
        1307674368000.0,
        20922789888000.0,
        355687428096000.0,
        6402373705728000.0,
        121645100408832000.0,
        2432902008176640000.0,
    ];
    if n < 21 {
        TABLE[n as usize].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Lanczos approximation of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7, n = 9 coefficients (Godfrey); |rel err| < 1e-13 on x > 0.5.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.5203681218851,
        -1259.1392167224028,
        771.3234287776531,
        -176.6150291621406,
        12.507343278686905,
        -0.13857109526572012,
        9.984369578019572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Poisson probability mass `P(X = k)` for mean `mu`.
pub fn poisson_pmf(k: u64, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - ln_factorial(k)).exp()
}

/// Upper tail `P(X >= k)` for a Poisson with mean `mu`.
///
/// Summed forward from `k` so small tails keep full relative accuracy
/// (complementing the CDF would cancel catastrophically).
pub fn poisson_sf(k: u64, mu: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mu == 0.0 {
        return 0.0;
    }
    let mut term = poisson_pmf(k, mu);
    let mut total = term;
    let mut j = k;
    let horizon = k + 200 + (10.0 * mu) as u64;
    while j < horizon {
        j += 1;
        term *= mu / j as f64;
        total += term;
        if term < total * 1e-18 {
            break;
        }
    }
    total.min(1.0)
}
