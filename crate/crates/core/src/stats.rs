//! Concentration bounds behind the protocol's confidence statements.
//!
//! Everything runs on the Kullback-Leibler divergence between Bernoulli
//! distributions, D(x||y) = x ln(x/y) + (1-x) ln((1-x)/(1-y)): observing a
//! success rate of p_s + delta on a state whose true rate is at most p_s
//! happens with probability at most exp(-N D(p_s + delta || p_s)), so the
//! confidence 1 - exp(-N D) converges to one exponentially fast in the
//! number of copies. Natural logarithms throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bernoulli Kullback-Leibler divergence D(x || y), natural log.
///
/// Continuous limits at x = 0 and x = 1 are taken; y on the boundary is a
/// domain error.
pub fn kl_divergence(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("KL divergence needs x in [0, 1], got {x}")));
    }
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("KL divergence needs y in (0, 1), got {y}")));
    }
    let mut d = 0.0;
    if x > 0.0 {
        d += x * (x / y).ln();
    }
    if x < 1.0 {
        d += (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln();
    }
    Ok(d.max(0.0))
}

/// A confidence statement. `conclusive` is false when the observed rate did
/// not exceed the separable bound, in which case the protocol reports
/// nothing (value 0) rather than failing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub value: f64,
    pub conclusive: bool,
}

impl Confidence {
    pub fn inconclusive() -> Self {
        Confidence { value: 0.0, conclusive: false }
    }
}

/// Lower bound 1 - exp(-N D(p_s + delta || p_s)) on the detection
/// confidence after `n` rounds with observed deviation `delta`.
pub fn confidence_min(delta: f64, p_s: f64, n: u64) -> Result<Confidence> {
    if n == 0 {
        return Err(Error::Domain("confidence needs at least one round".into()));
    }
    if p_s + delta > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "observed rate p_s + delta = {} exceeds 1",
            p_s + delta
        )));
    }
    if delta <= 0.0 {
        return Ok(Confidence::inconclusive());
    }
    let x = (p_s + delta).min(1.0);
    let d = kl_divergence(x, p_s)?;
    Ok(Confidence { value: -(-(n as f64) * d).exp_m1(), conclusive: true })
}

/// Copies needed to reach confidence `c0` on an ideal preparation:
/// N_max = -ln(1 - c0) / D(p_e || p_s).
pub fn n_max(c0: f64, p_s: f64, p_e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c0) {
        return Err(Error::Domain(format!("target confidence must lie in [0, 1), got {c0}")));
    }
    if !(p_s > 0.0 && p_s < p_e && p_e <= 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < p_s < p_e <= 1, got p_s = {p_s}, p_e = {p_e}"
        )));
    }
    let d = kl_divergence(p_e, p_s)?;
    Ok(-(1.0 - c0).ln() / d)
}

/// How the logarithmic rate constant K is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateApproximation {
    /// K = 1 / D(p_s + delta0 || p_s).
    Exact,
    /// K ~ 1 / (alpha n), for families whose separable bound decays like
    /// exp(-alpha n) while the gap stays constant.
    ExponentialSeparableBound { alpha_times_n: f64 },
    /// K ~ 2 p_s (1 - p_s) / delta0^2, for gaps shrinking with system size.
    SmallGap,
}

/// Rate constant K in N_max = -K ln(1 - C0).
pub fn rate_constant(p_s: f64, delta0: f64, approx: RateApproximation) -> Result<f64> {
    match approx {
        RateApproximation::Exact => {
            if !(p_s > 0.0 && delta0 > 0.0 && p_s + delta0 <= 1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "need 0 < p_s < p_s + delta0 <= 1, got p_s = {p_s}, delta0 = {delta0}"
                )));
            }
            Ok(1.0 / kl_divergence((p_s + delta0).min(1.0), p_s)?)
        }
        RateApproximation::ExponentialSeparableBound { alpha_times_n } => {
            if alpha_times_n <= 0.0 {
                return Err(Error::Domain(format!(
                    "alpha * n must be positive, got {alpha_times_n}"
                )));
            }
            Ok(1.0 / alpha_times_n)
        }
        RateApproximation::SmallGap => {
            if delta0 <= 0.0 {
                return Err(Error::Domain(format!("delta0 must be positive, got {delta0}")));
            }
            if !(0.0..=1.0).contains(&p_s) {
                return Err(Error::Domain(format!("p_s must lie in [0, 1], got {p_s}")));
            }
            Ok(2.0 * p_s * (1.0 - p_s) / (delta0 * delta0))
        }
    }
}
