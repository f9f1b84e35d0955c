//! Closed-form regret bound values.
//!
//! The harness puts these theoretical ceilings next to the empirical regret.
//! They are upper bounds with large constants; at desk scale the interesting
//! check is that measured regret sits (far) below them.

use scrible_core::{Error, Result};

/// Expected-regret bound
/// `4d√(νT·ln(1/δ)) + 2dT(ν + 2√ν)·((1-δ)/δ)·ε + δGDT + 2Tε`.
pub fn theorem1_bound(
    dimension: usize,
    horizon: usize,
    nu: f64,
    delta: f64,
    epsilon: f64,
    norm_cap: f64,
    radius: f64,
) -> Result<f64> {
    if dimension == 0 || horizon == 0 {
        return Err(Error::InvalidArgument(
            "dimension and horizon must be at least 1".into(),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
    }
    if !(nu >= 1.0) {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
    }
    let d = dimension as f64;
    let t = horizon as f64;
    let exploration = 4.0 * d * (nu * t * (1.0 / delta).ln()).sqrt();
    let error_term = 2.0 * d * t * (nu + 2.0 * nu.sqrt()) * ((1.0 - delta) / delta) * epsilon;
    let shrinkage = delta * norm_cap * radius * t;
    let perturbation = 2.0 * t * epsilon;
    Ok(exploration + error_term + shrinkage + perturbation)
}

/// The count `C = ⌈ln GD⌉·⌈ln((GD)²T)⌉` entering the high-probability bound.
pub fn theorem2_c(norm_cap: f64, radius: f64, horizon: usize) -> Result<f64> {
    let gd = norm_cap * radius;
    let c1 = gd.ln().ceil();
    if !(c1 > 0.0) {
        return Err(Error::DomainViolation(format!(
            "⌈ln GD⌉ = {c1} is not positive: the bound degenerates for GD ≤ 1"
        )));
    }
    let c2 = (gd * gd * horizon as f64).ln().ceil();
    if !(c2 > 0.0) {
        return Err(Error::DomainViolation(format!(
            "⌈ln((GD)²T)⌉ = {c2} is not positive"
        )));
    }
    Ok(c1 * c2)
}

/// High-probability bound: [`theorem1_bound`] plus
/// `C·(2GD·ln(C/γ) + (1+ε)·√(8T·ln(C/γ)))`, holding with probability `1-γ`.
#[allow(clippy::too_many_arguments)]
pub fn theorem2_bound(
    dimension: usize,
    horizon: usize,
    nu: f64,
    delta: f64,
    epsilon: f64,
    norm_cap: f64,
    radius: f64,
    gamma: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument("gamma must lie in (0, 1)".into()));
    }
    let base = theorem1_bound(dimension, horizon, nu, delta, epsilon, norm_cap, radius)?;
    let c = theorem2_c(norm_cap, radius, horizon)?;
    let t = horizon as f64;
    let log_term = (c / gamma).ln();
    let tail = c * (2.0 * norm_cap * radius * log_term
        + (1.0 + epsilon) * (8.0 * t * log_term).sqrt());
    Ok(base + tail)
}
