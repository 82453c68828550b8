//! Closed-form rate expressions for the tractable special cases: a single
//! occupied mode measured together with vacuum modes, and the general
//! two-mode source, both over a purely lossy channel. Also the trusted
//! security bound in the vacuum-mode case and its limits.
//!
//! Printed closed forms are regression-checked against the matrix pipeline;
//! the pipeline is authoritative if they ever disagree.

use crate::error::{Error, Result};

fn check_modes(modes: usize) -> Result<f64> {
    if modes == 0 {
        return Err(Error::OutOfDomain("mode count must be >= 1".into()));
    }
    Ok(modes as f64)
}

fn check_variance(v: f64) -> Result<()> {
    if !(v >= 1.0 && v.is_finite()) {
        return Err(Error::OutOfDomain(format!("variance {v} must be >= 1")));
    }
    Ok(())
}

fn check_transmittance(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::OutOfDomain(format!(
            "transmittance {t} outside (0, 1]"
        )));
    }
    Ok(())
}

fn check_lambda1_sq(l: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&l) {
        return Err(Error::OutOfDomain(format!("lambda1^2 {l} outside [0, 1]")));
    }
    Ok(())
}

/// Mutual information between the trusted parties when all `modes` detected
/// modes but one are vacuum (single occupied mode of variance `v`, balanced
/// detection, pure-loss channel of transmittance `t`).
pub fn vacuum_modes_mutual_information(modes: usize, v: f64, t: f64) -> Result<f64> {
    let n = check_modes(modes)?;
    check_variance(v)?;
    check_transmittance(t)?;
    let num = n + t * (v - 1.0);
    let den = t * (n - 2.0) * (v - 1.0) / (n + v - 1.0) + n;
    Ok(0.5 * (num / den).log2())
}

/// Information leaking to an individual-attack eavesdropper about Bob's data
/// in the vacuum-mode case with untrusted detection (auxiliary LOC outputs
/// and channel environment all measured by Eve).
pub fn vacuum_modes_eve_information(modes: usize, v: f64, t: f64) -> Result<f64> {
    let n = check_modes(modes)?;
    check_variance(v)?;
    check_transmittance(t)?;
    let factor = t * (n - 2.0) * (v - 1.0) / (n * n * (n + v - 1.0)) + 1.0 / n;
    Ok(0.5 * ((n + t * (v - 1.0)) * factor).log2())
}

/// Information leaking to an individual-attack eavesdropper in the
/// vacuum-mode case when the detection is trusted (Eve only measures the
/// channel environment).
pub fn trusted_vacuum_eve_information(modes: usize, v: f64, t: f64) -> Result<f64> {
    let n = check_modes(modes)?;
    check_variance(v)?;
    check_transmittance(t)?;
    let num = (n + t * (v - 1.0)) * (t * (v - 1.0) - v);
    let den = t * (n - 1.0) * (v - 1.0) - n * v;
    Ok(0.5 * (num / den).log2())
}

/// Mutual information for the two-mode source measured through a balancedly
/// modeled coupler of weight `lambda1_sq`, pure-loss channel.
pub fn two_mode_mutual_information(lambda1_sq: f64, v1: f64, v2: f64, t: f64) -> Result<f64> {
    check_lambda1_sq(lambda1_sq)?;
    check_variance(v1)?;
    check_variance(v2)?;
    check_transmittance(t)?;
    let c1 = (v1 * v1 - 1.0).sqrt();
    let c2 = (v2 * v2 - 1.0).sqrt();
    let a = lambda1_sq * (v1 - v2) + v2;
    let num = t * (lambda1_sq * c1 + (1.0 - lambda1_sq) * c2).powi(2);
    let den = a * (1.0 + t * (a - 1.0));
    if num >= den {
        return Err(Error::Numerical(
            "correlation term exceeds variance product".into(),
        ));
    }
    Ok(0.5 * (1.0 / (1.0 - num / den)).log2())
}

/// Conditional variance of Bob's measured quadrature given an
/// individual-attack eavesdropper measuring both channel environments and
/// both untrusted LOC auxiliary outputs, for the two-mode source over a
/// pure-loss channel.
pub fn two_mode_untrusted_conditional_variance(
    lambda1_sq: f64,
    v1: f64,
    v2: f64,
    t: f64,
) -> Result<f64> {
    check_lambda1_sq(lambda1_sq)?;
    check_variance(v1)?;
    check_variance(v2)?;
    check_transmittance(t)?;
    let c1 = (v1 * v1 - 1.0).sqrt();
    let c2 = (v2 * v2 - 1.0).sqrt();
    let bracket = 2.0 + v1 - v2 - 2.0 * v1 * v2 + 2.0 * c1 * c2
        - 2.0 * lambda1_sq * (1.0 - v1 * v2 + c1 * c2);
    let num = t * (v2 - 1.0 + lambda1_sq * bracket);
    let den = lambda1_sq * v1 + (1.0 - lambda1_sq) * v2;
    Ok(1.0 / (1.0 - num / den))
}

/// Eavesdropper information for the two-mode untrusted case, combining the
/// conditional variance above with `V_B = T (lambda1^2 V1 + lambda2^2 V2) + 1 - T`.
pub fn two_mode_untrusted_eve_information(
    lambda1_sq: f64,
    v1: f64,
    v2: f64,
    t: f64,
) -> Result<f64> {
    let v_b = t * (lambda1_sq * v1 + (1.0 - lambda1_sq) * v2) + 1.0 - t;
    let v_be = two_mode_untrusted_conditional_variance(lambda1_sq, v1, v2, t)?;
    if v_be <= 0.0 {
        return Err(Error::Numerical(format!(
            "nonpositive conditional variance {v_be}"
        )));
    }
    Ok(0.5 * (v_b / v_be).log2())
}

/// Asymptotic (`V1 -> infinity`) trusted collective key rate with one
/// balanced vacuum mode: `1/2 log2((1 - T/2) / (1 - T))`.
pub fn asymptotic_two_mode_trusted_rate(t: f64) -> Result<f64> {
    check_transmittance(t)?;
    if t >= 1.0 {
        return Err(Error::OutOfDomain("diverges at t = 1".into()));
    }
    Ok(0.5 * ((1.0 - t / 2.0) / (1.0 - t)).log2())
}

/// Asymptotic (`V -> infinity`) single-mode collective key rate over pure
/// loss: `log2(1 / (1 - T))`.
pub fn asymptotic_single_mode_rate(t: f64) -> Result<f64> {
    check_transmittance(t)?;
    if t >= 1.0 {
        return Err(Error::OutOfDomain("diverges at t = 1".into()));
    }
    Ok((1.0 / (1.0 - t)).log2())
}

/// Identifier plus parameters of one closed-form expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFormula {
    /// Trusted-party mutual information, single occupied mode with vacuum
    /// modes, pure loss.
    VacuumModesMutualInformation { modes: usize, v: f64, t: f64 },
    /// Individual-attack leakage, vacuum modes, untrusted detection.
    VacuumModesEveInformation { modes: usize, v: f64, t: f64 },
    /// Individual-attack leakage, vacuum modes, trusted detection.
    TrustedVacuumEveInformation { modes: usize, v: f64, t: f64 },
    /// Trusted-party mutual information, two-mode source.
    TwoModeMutualInformation {
        lambda1_sq: f64,
        v1: f64,
        v2: f64,
        t: f64,
    },
    /// Individual-attack leakage, two-mode source, untrusted detection.
    TwoModeEveInformation {
        lambda1_sq: f64,
        v1: f64,
        v2: f64,
        t: f64,
    },
    /// Strong-signal limit of the trusted two-mode collective rate.
    AsymptoticTwoModeTrustedRate { t: f64 },
    /// Strong-signal limit of the single-mode collective rate.
    AsymptoticSingleModeRate { t: f64 },
}

/// Literal evaluation of the selected closed form, in bits.
pub fn analytic_rate(formula: &AnalyticFormula) -> Result<f64> {
    match *formula {
        AnalyticFormula::VacuumModesMutualInformation { modes, v, t } => {
            vacuum_modes_mutual_information(modes, v, t)
        }
        AnalyticFormula::VacuumModesEveInformation { modes, v, t } => {
            vacuum_modes_eve_information(modes, v, t)
        }
        AnalyticFormula::TrustedVacuumEveInformation { modes, v, t } => {
            trusted_vacuum_eve_information(modes, v, t)
        }
        AnalyticFormula::TwoModeMutualInformation {
            lambda1_sq,
            v1,
            v2,
            t,
        } => two_mode_mutual_information(lambda1_sq, v1, v2, t),
        AnalyticFormula::TwoModeEveInformation {
            lambda1_sq,
            v1,
            v2,
            t,
        } => two_mode_untrusted_eve_information(lambda1_sq, v1, v2, t),
        AnalyticFormula::AsymptoticTwoModeTrustedRate { t } => asymptotic_two_mode_trusted_rate(t),
        AnalyticFormula::AsymptoticSingleModeRate { t } => asymptotic_single_mode_rate(t),
    }
}

/// Outcome of solving the trusted vacuum-mode security bound for one
/// variable while the others are fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSolution {
    /// Threshold value of the solved variable at which the individual-attack
    /// key rate crosses zero.
    Threshold(f64),
    /// The protocol stays secure for every value of the solved variable in
    /// its domain.
    AlwaysSecure,
    /// No value of the solved variable gives a nonnegative rate.
    NeverSecure,
}

/// Security bound for trusted detection with vacuum modes,
/// `1/N = (1 - T)(V - 1) / (3V - 2T(V - 1) - 1)`, solved for the mode count:
/// secure while `N <= threshold`.
pub fn trusted_vacuum_bound_modes(v: f64, t: f64) -> Result<BoundSolution> {
    check_variance(v)?;
    check_transmittance(t)?;
    if v == 1.0 || t == 1.0 {
        return Ok(BoundSolution::AlwaysSecure);
    }
    let n = (3.0 * v - 2.0 * t * (v - 1.0) - 1.0) / ((1.0 - t) * (v - 1.0));
    Ok(BoundSolution::Threshold(n))
}

/// The same bound solved for the channel transmittance: secure while
/// `T >= threshold`.
pub fn trusted_vacuum_bound_transmittance(modes: usize, v: f64) -> Result<BoundSolution> {
    let n = check_modes(modes)?;
    check_variance(v)?;
    if v == 1.0 {
        return Ok(BoundSolution::AlwaysSecure);
    }
    if modes <= 2 {
        // the crossing equation has no solution; secure at any transmittance
        return Ok(BoundSolution::AlwaysSecure);
    }
    let t = (n * (v - 1.0) - (3.0 * v - 1.0)) / ((v - 1.0) * (n - 2.0));
    if t <= 0.0 {
        Ok(BoundSolution::AlwaysSecure)
    } else {
        Ok(BoundSolution::Threshold(t))
    }
}

/// The same bound solved for the source variance: secure while
/// `V <= threshold`.
pub fn trusted_vacuum_bound_variance(modes: usize, t: f64) -> Result<BoundSolution> {
    let n = check_modes(modes)?;
    check_transmittance(t)?;
    let den = n * (1.0 - t) + 2.0 * t - 3.0;
    if den <= 0.0 {
        return Ok(BoundSolution::AlwaysSecure);
    }
    Ok(BoundSolution::Threshold(1.0 + 2.0 / den))
}

/// Strong-attenuation (`T -> 0`) limit of the mode-count bound,
/// `1/N = (V - 1)/(3V - 1)`; returns the threshold mode count.
pub fn trusted_vacuum_bound_modes_strong_attenuation_limit(v: f64) -> Result<f64> {
    check_variance(v)?;
    if v == 1.0 {
        return Err(Error::OutOfDomain("undefined at v = 1".into()));
    }
    Ok((3.0 * v - 1.0) / (v - 1.0))
}

/// Source-variance threshold below which the untrusted two-mode protocol with
/// a strong main mode breaks at any transmittance:
/// `V2 < 1 - lambda1^2 + 1/(4 - 4 lambda1^2)` for `lambda1^2 in (0, 0.5)`.
pub fn unbalanced_source_threshold(lambda1_sq: f64) -> Result<f64> {
    if !(lambda1_sq > 0.0 && lambda1_sq < 0.5) {
        return Err(Error::OutOfDomain(format!(
            "lambda1^2 {lambda1_sq} outside (0, 0.5)"
        )));
    }
    Ok(1.0 - lambda1_sq + 1.0 / (4.0 - 4.0 * lambda1_sq))
}
