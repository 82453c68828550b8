//! Mutual information, eavesdropper bounds, and key rates for all four
//! scenario quadrants (trusted/untrusted detection, individual/collective
//! attacks), plus closed-form specializations and parameter scans.
//!
//! Reverse reconciliation throughout: eavesdropper bounds reference Bob's
//! measurement. Negative key rates are reported as-is, never clamped.

mod closed_form;
mod scan;

pub use closed_form::{
    analytic_rate, asymptotic_single_mode_rate, asymptotic_two_mode_trusted_rate,
    trusted_vacuum_bound_modes, trusted_vacuum_bound_modes_strong_attenuation_limit,
    trusted_vacuum_bound_transmittance, trusted_vacuum_bound_variance,
    trusted_vacuum_eve_information, two_mode_mutual_information,
    two_mode_untrusted_conditional_variance, two_mode_untrusted_eve_information,
    unbalanced_source_threshold, vacuum_modes_eve_information, vacuum_modes_mutual_information,
    AnalyticFormula, BoundSolution,
};
pub use scan::{
    contour, diagonal_crossing, find_zero_crossing, linear_grid, log_grid, secure_boundary_v1,
    sweep, ContourGrid, ContourPoint, SweepAxis, SweepGrid, SweepPoint,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    condition_on_homodyne, partial_trace, CovarianceMatrix, ModeIndexSet, Quadrature,
};
use crate::protocol::{assemble, ignorant_matrix, AssembledState, Attack, Scenario, Trust};

/// Which eavesdropper bound a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveBoundKind {
    ShannonIndividual,
    HolevoCollective,
}

/// Key-rate result with its ingredients and the scenario it came from.
///
/// `key_rate = beta * i_ab - eve_bound` for collective attacks and
/// `key_rate = i_ab - eve_bound` for individual attacks (no efficiency factor,
/// matching the individual-attack analysis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub i_ab: f64,
    pub eve_bound: f64,
    pub eve_bound_kind: EveBoundKind,
    pub beta: f64,
    pub key_rate: f64,
    pub scenario_echo: Scenario,
}

/// Shannon mutual information of a two-mode Gaussian state measured by
/// homodyne detection on both modes: `1/2 log2(V_A / V_{A|B})`.
pub fn mutual_information(gamma_ab: &CovarianceMatrix) -> Result<f64> {
    mutual_information_in(gamma_ab, Quadrature::X)
}

/// [`mutual_information`] with an explicit quadrature choice; the two choices
/// agree for every state built in this crate (common local-oscillator phase).
pub fn mutual_information_in(gamma_ab: &CovarianceMatrix, quad: Quadrature) -> Result<f64> {
    if gamma_ab.modes() != 2 {
        return Err(Error::BadDimension(gamma_ab.dim()));
    }
    let va = gamma_ab.variance(0, quad);
    let vb = gamma_ab.variance(1, quad);
    let c = gamma_ab.correlation(0, 1, quad);
    if vb <= 0.0 {
        return Err(Error::Numerical(format!("nonpositive variance {vb}")));
    }
    let cond = va - c * c / vb;
    if cond <= 0.0 {
        return Err(Error::Numerical(format!(
            "nonpositive conditional variance {cond}"
        )));
    }
    Ok(0.5 * (va / cond).log2())
}

/// Shannon bound on the information an individual-attack eavesdropper gains
/// about Bob's data: `1/2 log2(V_B / V_{B|E})`, with `V_{B|E}` obtained by
/// Gaussian conditioning of Bob's measured quadrature on homodyne outcomes of
/// every mode Eve holds: the channel environment always, plus both sides'
/// LOC auxiliary outputs when detection is untrusted.
///
/// Requires a state assembled with an explicit environment (pure loss).
pub fn individual_eve_information(state: &AssembledState, trust: Trust) -> Result<f64> {
    individual_eve_information_in(state, trust, Quadrature::X)
}

/// [`individual_eve_information`] with an explicit quadrature choice.
pub fn individual_eve_information_in(
    state: &AssembledState,
    trust: Trust,
    quad: Quadrature,
) -> Result<f64> {
    let env = state.env.as_ref().ok_or(Error::RequiresPureLoss)?;
    let mut eve_modes: Vec<usize> = env.indices().to_vec();
    if trust == Trust::Untrusted {
        eve_modes.extend_from_slice(state.aux_alice.indices());
        eve_modes.extend_from_slice(state.aux_bob.indices());
    }
    let eve_set = ModeIndexSet::new(eve_modes)?;
    let v_b = state.gamma_full.variance(state.measured_bob, quad);
    let cond = condition_on_homodyne(&state.gamma_full, &eve_set, quad)?;
    // position of Bob's measured mode among the remaining modes
    let rank = (0..state.measured_bob)
        .filter(|m| !eve_set.contains(*m))
        .count();
    let v_be = cond.variance(rank, quad);
    if v_be <= 0.0 {
        return Err(Error::Numerical(format!(
            "nonpositive conditional variance {v_be}"
        )));
    }
    Ok(0.5 * (v_b / v_be).log2())
}

/// Holevo bound on a collective-attack eavesdropper's information about Bob's
/// data, `chi_BE = S(gamma_E) - S(gamma_E|B)`, evaluated through purification
/// duality on the trusted side.
///
/// Untrusted detection: Eve purifies the measured two-mode state, so
/// `chi = S(gamma_A1B1) - S(gamma_A1|B1)`. Trusted detection: the LOC
/// auxiliary outputs stay with the trusted parties, so Eve purifies the full
/// `2N`-mode LOC output state and `chi = S(gamma_trusted) - S(gamma_rest|B1)`.
pub fn holevo_bound(state: &AssembledState, trust: Trust) -> Result<f64> {
    holevo_bound_in(state, trust, Quadrature::X)
}

/// [`holevo_bound`] with an explicit quadrature choice.
pub fn holevo_bound_in(state: &AssembledState, trust: Trust, quad: Quadrature) -> Result<f64> {
    match trust {
        Trust::Untrusted => holevo_from_measured_pair_in(&state.measured_pair()?, quad),
        Trust::Trusted => {
            let trusted = partial_trace(&state.gamma_full, &state.trusted_modes())?;
            let s_total = trusted.von_neumann_entropy()?;
            let cond =
                condition_on_homodyne(&trusted, &ModeIndexSet::single(state.measured_bob), quad)?;
            Ok(s_total - cond.von_neumann_entropy()?)
        }
    }
}

/// Holevo bound computed directly from a measured two-mode matrix (the
/// "ignorant" view): `S(gamma_AB) - S(gamma_A|B)`.
pub fn holevo_from_measured_pair(gamma_ab: &CovarianceMatrix) -> Result<f64> {
    holevo_from_measured_pair_in(gamma_ab, Quadrature::X)
}

fn holevo_from_measured_pair_in(gamma_ab: &CovarianceMatrix, quad: Quadrature) -> Result<f64> {
    if gamma_ab.modes() != 2 {
        return Err(Error::BadDimension(gamma_ab.dim()));
    }
    let s_ab = gamma_ab.von_neumann_entropy()?;
    let cond = condition_on_homodyne(gamma_ab, &ModeIndexSet::single(1), quad)?;
    Ok(s_ab - cond.von_neumann_entropy()?)
}

/// Lower bound on the secure key rate for the scenario, dispatching on attack
/// class and detection trust.
///
/// The untrusted collective branch evaluates on the measured two-mode matrix
/// (the weighted-average state the ignorant parties reconstruct); its
/// equality with the reduced assembled state is a tested invariant.
pub fn key_rate(s: &Scenario) -> Result<KeyRateReport> {
    key_rate_in(s, Quadrature::X)
}

/// [`key_rate`] with an explicit measured-quadrature choice; exposed for the
/// x/p symmetry property suites.
pub fn key_rate_in(s: &Scenario, quad: Quadrature) -> Result<KeyRateReport> {
    match s.attack {
        Attack::Individual => {
            let state = assemble(s, true)?;
            let i_ab = mutual_information_in(&state.measured_pair()?, quad)?;
            let eve = individual_eve_information_in(&state, s.detection_trust, quad)?;
            Ok(KeyRateReport {
                i_ab,
                eve_bound: eve,
                eve_bound_kind: EveBoundKind::ShannonIndividual,
                beta: s.beta,
                key_rate: i_ab - eve,
                scenario_echo: s.clone(),
            })
        }
        Attack::Collective => {
            let (i_ab, chi) = match s.detection_trust {
                Trust::Untrusted => {
                    let pair = ignorant_matrix(s)?;
                    (
                        mutual_information_in(&pair, quad)?,
                        holevo_from_measured_pair_in(&pair, quad)?,
                    )
                }
                Trust::Trusted => {
                    let state = assemble(s, false)?;
                    (
                        mutual_information_in(&state.measured_pair()?, quad)?,
                        holevo_bound_in(&state, Trust::Trusted, quad)?,
                    )
                }
            };
            Ok(KeyRateReport {
                i_ab,
                eve_bound: chi,
                eve_bound_kind: EveBoundKind::HolevoCollective,
                beta: s.beta,
                key_rate: s.beta * i_ab - chi,
                scenario_echo: s.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{bosonic_entropy, tmsv};
    use crate::network::{ChannelSpec, DetectionWeights};
    use crate::protocol::SourceSpec;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {b}, got {a} (diff {:.3e})",
            (a - b).abs()
        );
    }

    fn scenario(
        vs: Vec<f64>,
        weights: DetectionWeights,
        t: f64,
        eps: f64,
        trust: Trust,
        attack: Attack,
        beta: f64,
    ) -> Scenario {
        Scenario::symmetric(
            SourceSpec::new(vs).unwrap(),
            weights,
            ChannelSpec::new(t, eps).unwrap(),
            trust,
            attack,
            beta,
        )
        .unwrap()
    }

    #[test]
    fn mutual_information_of_product_state_is_zero() {
        let g = crate::gaussian::tensor(
            &CovarianceMatrix::thermal(3.0).unwrap(),
            &CovarianceMatrix::thermal(2.0).unwrap(),
        );
        assert_eq!(mutual_information(&g).unwrap(), 0.0);
    }

    #[test]
    fn mutual_information_of_twin_beam() {
        // V_A = V, V_{A|B} = 1/V
        let v = 3.0;
        let i = mutual_information(&tmsv(v).unwrap()).unwrap();
        assert_close(i, 0.5 * (v * v).log2(), 1e-12);
    }

    #[test]
    fn single_mode_perfect_channel_rate_is_mutual_information() {
        let s = scenario(
            vec![3.0],
            DetectionWeights::balanced(1),
            1.0,
            0.0,
            Trust::Trusted,
            Attack::Collective,
            1.0,
        );
        let r = key_rate(&s).unwrap();
        assert_close(r.i_ab, 0.5 * 9.0_f64.log2(), 1e-12);
        assert_close(r.eve_bound, 0.0, 1e-9);
        assert_close(r.key_rate, 1.584962500721156, 1e-9);
    }

    #[test]
    fn single_mode_trust_models_coincide() {
        for (t, eps) in [(1.0, 0.0), (0.6, 0.03), (0.1, 0.05)] {
            let mk = |trust| {
                scenario(
                    vec![3.0],
                    DetectionWeights::balanced(1),
                    t,
                    eps,
                    trust,
                    Attack::Collective,
                    0.95,
                )
            };
            let r_t = key_rate(&mk(Trust::Trusted)).unwrap();
            let r_u = key_rate(&mk(Trust::Untrusted)).unwrap();
            assert_close(r_t.key_rate, r_u.key_rate, 1e-9);
        }
    }

    #[test]
    fn untrusted_vacuum_mode_holevo_matches_entropic_function() {
        // one extra vacuum mode, perfect channel: chi = G((nu-1)/2) with
        // nu = sqrt((V+1)/2); at V = 3 that is sqrt(2) and chi ~ 0.7983
        let v = 3.0;
        let s = scenario(
            vec![v, 1.0],
            DetectionWeights::balanced(2),
            1.0,
            0.0,
            Trust::Untrusted,
            Attack::Collective,
            1.0,
        );
        let r = key_rate(&s).unwrap();
        let nu = ((v + 1.0) / 2.0_f64).sqrt();
        assert_close(r.eve_bound, bosonic_entropy((nu - 1.0) / 2.0), 1e-10);
        assert_close(r.eve_bound, 0.798257, 1e-5);
        assert_close(r.i_ab, 0.5, 1e-12);
        assert!(r.key_rate < 0.0);
    }

    #[test]
    fn untrusted_vacuum_mode_individual_rate_is_zero_for_any_t() {
        for k in 0..20 {
            let t = 0.05 + 0.95 * (k as f64) / 19.0;
            let s = scenario(
                vec![3.0, 1.0],
                DetectionWeights::balanced(2),
                t,
                0.0,
                Trust::Untrusted,
                Attack::Individual,
                1.0,
            );
            let r = key_rate(&s).unwrap();
            assert_eq!(r.eve_bound_kind, EveBoundKind::ShannonIndividual);
            assert_close(r.key_rate, 0.0, 1e-9);
        }
    }

    #[test]
    fn trusted_vacuum_mode_individual_rate_is_positive() {
        let s = scenario(
            vec![3.0, 1.0],
            DetectionWeights::balanced(2),
            0.4,
            0.0,
            Trust::Trusted,
            Attack::Individual,
            1.0,
        );
        let r = key_rate(&s).unwrap();
        assert!(r.key_rate > 0.0, "K = {}", r.key_rate);
    }

    #[test]
    fn trusted_bound_is_tighter_than_untrusted() {
        for (t, v2) in [(0.8, 1.0), (0.5, 1.3), (0.2, 2.0)] {
            let mk = |trust| {
                scenario(
                    vec![3.0, v2],
                    DetectionWeights::balanced(2),
                    t,
                    0.0,
                    trust,
                    Attack::Collective,
                    1.0,
                )
            };
            let chi_t = key_rate(&mk(Trust::Trusted)).unwrap().eve_bound;
            let chi_u = key_rate(&mk(Trust::Untrusted)).unwrap().eve_bound;
            assert!(
                chi_t <= chi_u + 1e-10,
                "trusted {chi_t} vs untrusted {chi_u}"
            );
        }
    }

    #[test]
    fn report_combination_invariants() {
        let s = scenario(
            vec![3.0, 1.1],
            DetectionWeights::balanced(2),
            0.5,
            0.02,
            Trust::Trusted,
            Attack::Collective,
            0.9,
        );
        let r = key_rate(&s).unwrap();
        assert_close(r.key_rate, r.beta * r.i_ab - r.eve_bound, 1e-15);

        let si = scenario(
            vec![3.0, 1.1],
            DetectionWeights::balanced(2),
            0.5,
            0.0,
            Trust::Trusted,
            Attack::Individual,
            0.9,
        );
        let ri = key_rate(&si).unwrap();
        assert_close(ri.key_rate, ri.i_ab - ri.eve_bound, 1e-15);
    }

    #[test]
    fn individual_attack_requires_environment() {
        let s = scenario(
            vec![3.0, 1.0],
            DetectionWeights::balanced(2),
            0.5,
            0.0,
            Trust::Untrusted,
            Attack::Individual,
            1.0,
        );
        let state = assemble(&s, false).unwrap();
        assert!(matches!(
            individual_eve_information(&state, Trust::Untrusted),
            Err(Error::RequiresPureLoss)
        ));
    }

    #[test]
    fn rates_agree_between_quadratures() {
        let s = scenario(
            vec![3.0, 1.4],
            DetectionWeights::from_squared(&[0.7, 0.3]).unwrap(),
            0.45,
            0.03,
            Trust::Trusted,
            Attack::Collective,
            0.95,
        );
        let rx = key_rate_in(&s, Quadrature::X).unwrap();
        let rp = key_rate_in(&s, Quadrature::P).unwrap();
        assert_close(rx.key_rate, rp.key_rate, 1e-10);
    }
}
