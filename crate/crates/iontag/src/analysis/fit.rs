//! Model fits: exponential dwell times (maximum likelihood), Lorentzian
//! lineshapes (Levenberg-Marquardt) and fixed-period sinusoids (weighted
//! linear least squares).
//!
//! All fits report 1-sigma parameter uncertainties from the Fisher
//! information at the optimum.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3, Vector4};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Exponential,
    Lorentzian,
    SinusoidFixedPeriod,
}

/// Fit output: parameter values, their 1-sigma uncertainties and the norm
/// of the weighted residual vector.
///
/// Parameter order by model:
/// * `Exponential`: `[tau]`
/// * `Lorentzian`: `[center, fwhm, amplitude, offset]`
/// * `SinusoidFixedPeriod`: `[amplitude, phase, offset]`
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub residual_norm: f64,
}

/// Maximum-likelihood exponential fit: `tau = mean`, `sigma = tau/sqrt(n)`.
pub fn fit_exponential(durations: &[f64]) -> Result<FitResult, AnalysisError> {
    if durations.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: durations.len(),
        });
    }
    if durations.iter().any(|&d| d <= 0.0) {
        return Err(AnalysisError::NonPositiveDuration);
    }
    let n = durations.len() as f64;
    let tau = durations.iter().sum::<f64>() / n;
    Ok(FitResult {
        model: FitModel::Exponential,
        params: vec![tau],
        uncertainties: vec![tau / n.sqrt()],
        residual_norm: 0.0,
    })
}

/// Absorption rate implied by the dwell-time change:
/// `R = 1/tau_on - 1/tau_off`.
pub fn derived_absorption_rate(tau_on: f64, tau_off: f64) -> Result<f64, AnalysisError> {
    if tau_on <= 0.0 || tau_off <= 0.0 {
        return Err(AnalysisError::NonPositiveDuration);
    }
    if tau_on > tau_off {
        return Err(AnalysisError::TauOrder { tau_on, tau_off });
    }
    Ok(1.0 / tau_on - 1.0 / tau_off)
}

fn lorentzian_model(x: f64, p: &Vector4<f64>) -> f64 {
    let (center, fwhm, amp, offset) = (p[0], p[1], p[2], p[3]);
    let u = 2.0 * (x - center) / fwhm;
    offset + amp / (1.0 + u * u)
}

fn lorentzian_gradient(x: f64, p: &Vector4<f64>) -> Vector4<f64> {
    let (center, fwhm, amp, _) = (p[0], p[1], p[2], p[3]);
    let u = 2.0 * (x - center) / fwhm;
    let d = 1.0 + u * u;
    let d2 = d * d;
    Vector4::new(
        4.0 * amp * u / (fwhm * d2),
        2.0 * amp * u * u / (fwhm * d2),
        1.0 / d,
        1.0,
    )
}

/// Weighted Lorentzian least squares on `(x, y, sigma)` points via
/// Levenberg-Marquardt.
///
/// Initial guesses: the peak sample for the center, the minimum for the
/// offset, and a second-moment width estimate.
pub fn fit_lorentzian(points: &[(f64, f64, f64)]) -> Result<FitResult, AnalysisError> {
    const MAX_ITERATIONS: usize = 200;
    if points.len() < 5 {
        return Err(AnalysisError::TooFewPoints {
            needed: 5,
            got: points.len(),
        });
    }
    if points.iter().any(|&(_, _, s)| s <= 0.0) {
        return Err(AnalysisError::NonPositiveUncertainty);
    }

    // Initialization.
    let (mut x_peak, mut y_max, mut y_min) = (points[0].0, f64::MIN, f64::MAX);
    for &(x, y, _) in points {
        if y > y_max {
            y_max = y;
            x_peak = x;
        }
        y_min = y_min.min(y);
    }
    let mut m0 = 0.0;
    let mut m2 = 0.0;
    for &(x, y, _) in points {
        let w = (y - y_min).max(0.0);
        m0 += w;
        m2 += w * (x - x_peak) * (x - x_peak);
    }
    let spread = if m0 > 0.0 { (m2 / m0).sqrt() } else { 1.0 };
    let mut p = Vector4::new(
        x_peak,
        (2.0 * spread).max(1e-9),
        (y_max - y_min).max(1e-12),
        y_min,
    );

    let cost_of = |p: &Vector4<f64>| -> f64 {
        points
            .iter()
            .map(|&(x, y, s)| {
                let r = (y - lorentzian_model(x, p)) / s;
                r * r
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut cost = cost_of(&p);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        // Build the normal equations.
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for &(x, y, s) in points {
            let g = lorentzian_gradient(x, &p) / s;
            let r = (y - lorentzian_model(x, &p)) / s;
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] *= 1.0 + lambda;
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let candidate = p + step;
        if candidate[1] <= 0.0 {
            lambda *= 10.0;
            continue;
        }
        let new_cost = cost_of(&candidate);
        if new_cost < cost {
            let improvement = cost - new_cost;
            p = candidate;
            cost = new_cost;
            lambda = (lambda * 0.3).max(1e-12);
            let scale = step.norm() / (p.norm() + 1e-12);
            if scale < 1e-10 || improvement < 1e-12 * (1.0 + cost) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // The simplex cannot move: accept if already at a minimum.
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(AnalysisError::FitNonConvergence(MAX_ITERATIONS));
    }

    // Fisher covariance at the optimum.
    let mut jtj = Matrix4::<f64>::zeros();
    for &(x, _, s) in points {
        let g = lorentzian_gradient(x, &p) / s;
        jtj += g * g.transpose();
    }
    let cov = jtj.try_inverse().ok_or(AnalysisError::DegenerateDesign)?;
    let uncertainties: Vec<f64> = (0..4).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();

    Ok(FitResult {
        model: FitModel::Lorentzian,
        params: vec![p[0], p[1], p[2], p[3]],
        uncertainties,
        residual_norm: cost.sqrt(),
    })
}

/// A fixed-period sinusoid fit with its visibility (amplitude / offset).
#[derive(Debug, Clone, PartialEq)]
pub struct SinusoidFit {
    pub result: FitResult,
    pub visibility: f64,
    pub visibility_sigma: f64,
}

/// Weighted linear least squares of `y = a sin(2 pi x / period) +
/// b cos(2 pi x / period) + c` on `(x, y, sigma)` points; reported as
/// `[amplitude, phase, offset]` with `y = A sin(2 pi x / period + phase) + c`.
pub fn fit_sinusoid_fixed_period(
    points: &[(f64, f64, f64)],
    period: f64,
) -> Result<SinusoidFit, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    if points.iter().any(|&(_, _, s)| s <= 0.0) {
        return Err(AnalysisError::NonPositiveUncertainty);
    }
    if period <= 0.0 {
        return Err(AnalysisError::NonPositiveBin(period));
    }
    let span = points.iter().map(|p| p.0).fold(f64::MIN, f64::max)
        - points.iter().map(|p| p.0).fold(f64::MAX, f64::min);
    if span < period * (1.0 - 1e-9) {
        return Err(AnalysisError::InsufficientSpan);
    }

    let omega = std::f64::consts::TAU / period;
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for &(x, y, s) in points {
        let row = Vector3::new((omega * x).sin() / s, (omega * x).cos() / s, 1.0 / s);
        ata += row * row.transpose();
        aty += row * (y / s);
    }
    let cov = ata.try_inverse().ok_or(AnalysisError::DegenerateDesign)?;
    let sol = cov * aty;
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    let amplitude = a.hypot(b);
    let phase = b.atan2(a);
    let residual_norm = points
        .iter()
        .map(|&(x, y, s)| {
            let f = a * (omega * x).sin() + b * (omega * x).cos() + c;
            let r = (y - f) / s;
            r * r
        })
        .sum::<f64>()
        .sqrt();

    // Propagate (a, b, c) covariance onto amplitude, phase, offset and the
    // visibility A/c.
    let da = Vector3::new(a / amplitude.max(1e-300), b / amplitude.max(1e-300), 0.0);
    let dphase = if amplitude > 0.0 {
        Vector3::new(
            -b / (amplitude * amplitude),
            a / (amplitude * amplitude),
            0.0,
        )
    } else {
        Vector3::zeros()
    };
    let doffset = Vector3::new(0.0, 0.0, 1.0);
    let sig = |g: &Vector3<f64>| (g.transpose() * cov * g)[(0, 0)].max(0.0).sqrt();

    let result = FitResult {
        model: FitModel::SinusoidFixedPeriod,
        params: vec![amplitude, phase, c],
        uncertainties: vec![sig(&da), sig(&dphase), sig(&doffset)],
        residual_norm,
    };
    let visibility = amplitude / c;
    let dvis = Vector3::new(
        a / (amplitude.max(1e-300) * c),
        b / (amplitude.max(1e-300) * c),
        -amplitude / (c * c),
    );
    let visibility_sigma = sig(&dvis);
    Ok(SinusoidFit {
        result,
        visibility,
        visibility_sigma,
    })
}

/// Ordinary R^2 of a fitted curve against the data, weights ignored.
pub fn r_squared(points: &[(f64, f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - model(p.0);
            r * r
        })
        .sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Evaluate a fitted model at `x` (for plotting and R^2 checks).
pub fn evaluate(fit: &FitResult, x: f64, period: Option<f64>) -> f64 {
    match fit.model {
        FitModel::Exponential => (-x / fit.params[0]).exp() / fit.params[0],
        FitModel::Lorentzian => lorentzian_model(
            x,
            &Vector4::new(fit.params[0], fit.params[1], fit.params[2], fit.params[3]),
        ),
        FitModel::SinusoidFixedPeriod => {
            let period = period.expect("sinusoid evaluation needs its period");
            let omega = std::f64::consts::TAU / period;
            fit.params[0] * (omega * x + fit.params[1]).sin() + fit.params[2]
        }
    }
}

/// Weighted mean and its standard error, for combining repeated fits.
pub fn weighted_mean(values: &[(f64, f64)]) -> (f64, f64) {
    let mut wsum = 0.0;
    let mut xsum = 0.0;
    for &(x, s) in values {
        let w = 1.0 / (s * s);
        wsum += w;
        xsum += w * x;
    }
    (xsum / wsum, (1.0 / wsum).sqrt())
}

/// Weighted straight-line fit `y = m x + q`; returns `(m, sigma_m)`.
/// Used for trend checks such as fidelity versus detection efficiency.
pub fn weighted_line_slope(points: &[(f64, f64, f64)]) -> Result<(f64, f64), AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let mut a = DMatrix::<f64>::zeros(points.len(), 2);
    let mut y = DVector::<f64>::zeros(points.len());
    for (i, &(x, v, s)) in points.iter().enumerate() {
        a[(i, 0)] = x / s;
        a[(i, 1)] = 1.0 / s;
        y[i] = v / s;
    }
    let ata = a.transpose() * &a;
    let cov = ata.try_inverse().ok_or(AnalysisError::DegenerateDesign)?;
    let sol = &cov * a.transpose() * y;
    Ok((sol[0], cov[(0, 0)].max(0.0).sqrt()))
}
