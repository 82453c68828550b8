//! Protocol scenario assembly: multimode twin-beam source, channel on the
//! transmitted beams, LOC networks on both detectors, and the mode
//! bookkeeping each trust model needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{partial_trace, tensor, tmsv, CovarianceMatrix, ModeIndexSet};
use crate::network::{
    apply_channel, apply_loc, apply_lossy_channel_with_environment, ChannelSpec, DetectionWeights,
};

/// Per-mode source variances in shot-noise units; `V_i = 1` marks an
/// unoccupied (vacuum) mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    variances: Vec<f64>,
}

impl SourceSpec {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::InvalidScenario(
                "source must have at least one mode".into(),
            ));
        }
        for &v in &variances {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::UnphysicalVariance(v));
            }
        }
        Ok(SourceSpec { variances })
    }

    pub fn single(v: f64) -> Result<Self> {
        SourceSpec::new(vec![v])
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }
}

/// Whether the LOC auxiliary outputs are protected inside the trusted
/// stations or attributed to the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trust {
    Trusted,
    Untrusted,
}

/// Eavesdropper capability class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attack {
    Individual,
    Collective,
}

/// Complete protocol scenario.
///
/// Alice's and Bob's detection weights are kept independent for generality;
/// every worked configuration in this crate uses symmetric weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub source: SourceSpec,
    pub alice_weights: DetectionWeights,
    pub bob_weights: DetectionWeights,
    pub channel: ChannelSpec,
    pub detection_trust: Trust,
    pub attack: Attack,
    pub beta: f64,
}

impl Scenario {
    pub fn new(
        source: SourceSpec,
        alice_weights: DetectionWeights,
        bob_weights: DetectionWeights,
        channel: ChannelSpec,
        detection_trust: Trust,
        attack: Attack,
        beta: f64,
    ) -> Result<Self> {
        let n = source.len();
        if alice_weights.len() != n || bob_weights.len() != n {
            return Err(Error::InvalidScenario(format!(
                "weight lists ({}, {}) do not match source length {n}",
                alice_weights.len(),
                bob_weights.len()
            )));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "reconciliation efficiency {beta} outside (0, 1]"
            )));
        }
        if attack == Attack::Individual && !channel.is_pure_loss() {
            return Err(Error::RequiresPureLoss);
        }
        Ok(Scenario {
            source,
            alice_weights,
            bob_weights,
            channel,
            detection_trust,
            attack,
            beta,
        })
    }

    /// Scenario with the same weights on both detectors.
    pub fn symmetric(
        source: SourceSpec,
        weights: DetectionWeights,
        channel: ChannelSpec,
        detection_trust: Trust,
        attack: Attack,
        beta: f64,
    ) -> Result<Self> {
        Scenario::new(
            source,
            weights.clone(),
            weights,
            channel,
            detection_trust,
            attack,
            beta,
        )
    }

    pub fn mode_count(&self) -> usize {
        self.source.len()
    }
}

/// Fully assembled protocol state with mode bookkeeping.
///
/// Mode layout of `gamma_full`: Alice's LOC outputs `0..N` (measured output
/// first), Bob's LOC outputs `N..2N` (measured output first), then channel
/// environment modes `2N..3N` when explicitly modeled.
#[derive(Debug, Clone)]
pub struct AssembledState {
    pub gamma_full: CovarianceMatrix,
    pub measured_alice: usize,
    pub measured_bob: usize,
    pub aux_alice: ModeIndexSet,
    pub aux_bob: ModeIndexSet,
    pub env: Option<ModeIndexSet>,
}

impl AssembledState {
    /// Reduced state of the measured pair `(A1, B1)`, Alice first.
    pub fn measured_pair(&self) -> Result<CovarianceMatrix> {
        partial_trace(
            &self.gamma_full,
            &ModeIndexSet::new(vec![self.measured_alice, self.measured_bob])?,
        )
    }

    /// All LOC output modes on the trusted sides (everything but the channel
    /// environment).
    pub fn trusted_modes(&self) -> ModeIndexSet {
        ModeIndexSet::from_range(0..2 * self.aux_alice.len() + 2)
    }
}

/// Assembles the scenario state: tensor of per-mode twin beams, channel on
/// all of Bob's modes (explicit environment when `with_environment`), then
/// the LOC on each side. `with_environment` requires pure loss.
pub fn assemble(s: &Scenario, with_environment: bool) -> Result<AssembledState> {
    let n = s.mode_count();
    let vs = s.source.variances();

    // pairs come out as (A1, B1, A2, B2, ...); reorder to (A1..AN, B1..BN)
    let mut gamma = tmsv(vs[0])?;
    for &v in &vs[1..] {
        gamma = tensor(&gamma, &tmsv(v)?);
    }
    let order: Vec<usize> = (0..n)
        .map(|i| 2 * i)
        .chain((0..n).map(|i| 2 * i + 1))
        .collect();
    gamma = partial_trace(&gamma, &ModeIndexSet::new(order)?)?;

    let bob_modes = ModeIndexSet::from_range(n..2 * n);
    let env = if with_environment {
        let (g, env) = apply_lossy_channel_with_environment(&gamma, &bob_modes, &s.channel)?;
        gamma = g;
        Some(env)
    } else {
        gamma = apply_channel(&gamma, &bob_modes, &s.channel)?;
        None
    };

    let alice_modes: Vec<usize> = (0..n).collect();
    let bob_mode_list: Vec<usize> = (n..2 * n).collect();
    gamma = apply_loc(&gamma, &s.alice_weights, &alice_modes)?;
    gamma = apply_loc(&gamma, &s.bob_weights, &bob_mode_list)?;

    Ok(AssembledState {
        gamma_full: gamma,
        measured_alice: 0,
        measured_bob: n,
        aux_alice: ModeIndexSet::from_range(1..n),
        aux_bob: ModeIndexSet::from_range(n + 1..2 * n),
        env,
    })
}

/// Two-mode covariance matrix seen by parties ignorant of the multimode
/// structure: the weighted combination of the per-mode post-channel twin-beam
/// matrices. With symmetric weights this is exactly the `lambda_i^2`-weighted
/// average; it always equals the `(A1, B1)` reduction of the assembled state.
pub fn ignorant_matrix(s: &Scenario) -> Result<CovarianceMatrix> {
    let t = s.channel.transmittance();
    let eps = s.channel.excess_noise();
    let sqrt_t = t.sqrt();
    let la = s.alice_weights.lambdas();
    let lb = s.bob_weights.lambdas();

    let mut m = nalgebra::DMatrix::zeros(4, 4);
    for (i, &v) in s.source.variances().iter().enumerate() {
        let a = v;
        let b = t * (v + eps) + 1.0 - t;
        let c = sqrt_t * (v * v - 1.0).sqrt();
        let (wa, wb) = (la[i] * la[i], lb[i] * lb[i]);
        let wc = la[i] * lb[i];
        m[(0, 0)] += wa * a;
        m[(1, 1)] += wa * a;
        m[(2, 2)] += wb * b;
        m[(3, 3)] += wb * b;
        m[(0, 2)] += wc * c;
        m[(2, 0)] += wc * c;
        m[(1, 3)] -= wc * c;
        m[(3, 1)] -= wc * c;
    }
    CovarianceMatrix::from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Quadrature;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {b}, got {a} (diff {:.3e})",
            (a - b).abs()
        );
    }

    fn scenario(vs: Vec<f64>, weights: DetectionWeights, t: f64, eps: f64) -> Scenario {
        Scenario::symmetric(
            SourceSpec::new(vs).unwrap(),
            weights,
            ChannelSpec::new(t, eps).unwrap(),
            Trust::Untrusted,
            Attack::Collective,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn single_mode_perfect_channel_is_plain_twin_beam() {
        let s = scenario(vec![3.0], DetectionWeights::balanced(1), 1.0, 0.0);
        let st = assemble(&s, false).unwrap();
        let dev = (st.gamma_full.matrix() - tmsv(3.0).unwrap().matrix()).amax();
        assert!(dev <= 1e-12);
        assert!(st.aux_alice.is_empty());
        assert!(st.aux_bob.is_empty());
    }

    #[test]
    fn vacuum_mode_halves_alice_variance() {
        // one occupied and one vacuum mode, balanced detection, perfect channel
        let v = 3.0;
        let s = scenario(vec![v, 1.0], DetectionWeights::balanced(2), 1.0, 0.0);
        let st = assemble(&s, false).unwrap();
        let pair = st.measured_pair().unwrap();
        assert_close(pair.variance(0, Quadrature::X), (v + 1.0) / 2.0, 1e-12);
        assert_close(pair.variance(1, Quadrature::X), (v + 1.0) / 2.0, 1e-12);
    }

    #[test]
    fn balanced_source_decouples_measured_pair_from_auxiliaries() {
        let s = scenario(vec![2.5, 2.5], DetectionWeights::balanced(2), 0.7, 0.02);
        let st = assemble(&s, false).unwrap();
        let g = st.gamma_full.matrix();
        // correlation block between (A1, B1) and (A2, B2)
        for &a in &[0usize, 1, 4, 5] {
            for &b in &[2usize, 3, 6, 7] {
                assert!(g[(a, b)].abs() <= 1e-12, "({a},{b}) = {}", g[(a, b)]);
            }
        }
    }

    #[test]
    fn ignorant_matrix_single_mode_is_post_channel_twin_beam() {
        let s = scenario(vec![3.0], DetectionWeights::balanced(1), 0.6, 0.05);
        let g = ignorant_matrix(&s).unwrap();
        assert_close(g.variance(0, Quadrature::X), 3.0, 1e-15);
        assert_close(g.variance(1, Quadrature::X), 0.6 * 3.05 + 0.4, 1e-15);
        assert_close(
            g.correlation(0, 1, Quadrature::X),
            0.6_f64.sqrt() * 8.0_f64.sqrt(),
            1e-15,
        );
    }

    #[test]
    fn ignorant_matrix_two_mode_entries() {
        // two-mode closed-form entries: Alice variance lambda1^2 (V1 - V2) + V2,
        // correlation sqrt(T) (lambda1^2 C1 + lambda2^2 C2)
        let (v1, v2, l1sq, t) = (3.0, 2.0, 0.7, 0.8);
        let w = DetectionWeights::from_squared(&[l1sq, 1.0 - l1sq]).unwrap();
        let s = scenario(vec![v1, v2], w, t, 0.0);
        let g = ignorant_matrix(&s).unwrap();
        let a = l1sq * (v1 - v2) + v2;
        let c = t.sqrt()
            * (l1sq * (v1 * v1 - 1.0_f64).sqrt() + (1.0 - l1sq) * (v2 * v2 - 1.0_f64).sqrt());
        assert_close(g.variance(0, Quadrature::X), a, 1e-12);
        assert_close(g.variance(1, Quadrature::X), 1.0 + t * (a - 1.0), 1e-12);
        assert_close(g.correlation(0, 1, Quadrature::X), c, 1e-12);
        assert_close(g.correlation(0, 1, Quadrature::P), -c, 1e-12);
    }

    #[test]
    fn vacuum_mode_measured_pair_symplectic_spectrum() {
        // one vacuum mode, perfect channel: both symplectic eigenvalues of
        // the measured pair equal sqrt((V + 1) / 2)
        let v = 3.0;
        let s = scenario(vec![v, 1.0], DetectionWeights::balanced(2), 1.0, 0.0);
        let nus = ignorant_matrix(&s)
            .unwrap()
            .symplectic_eigenvalues()
            .unwrap();
        let expect = ((v + 1.0) / 2.0_f64).sqrt();
        assert_close(nus[0], expect, 1e-12);
        assert_close(nus[1], expect, 1e-12);
    }

    #[test]
    fn ignorant_matrix_partial_knowledge_alice_variance() {
        // three-mode configuration used in the partial-knowledge analysis
        let w = DetectionWeights::from_squared(&[0.95, 0.025, 0.025]).unwrap();
        let s = scenario(vec![5.0, 1.5, 1.1], w, 0.5, 0.05);
        let g = ignorant_matrix(&s).unwrap();
        assert_close(g.variance(0, Quadrature::X), 4.815, 1e-12);
    }

    #[test]
    fn ignorant_matrix_equals_reduced_assembled_state() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let vs: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
            let gains: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..2.0)).collect();
            let t = rng.random_range(0.05..=1.0);
            let eps = rng.random_range(0.0..0.2);
            let s = scenario(vs, DetectionWeights::from_gains(&gains).unwrap(), t, eps);
            let direct = ignorant_matrix(&s).unwrap();
            let st = assemble(&s, false).unwrap();
            let reduced = st.measured_pair().unwrap();
            let dev = (direct.matrix() - reduced.matrix()).amax();
            assert!(dev <= 1e-10, "deviation {dev:.3e}");
        }
    }

    #[test]
    fn assemble_with_environment_tracks_env_modes() {
        let s = scenario(vec![3.0, 1.0], DetectionWeights::balanced(2), 0.5, 0.0);
        let st = assemble(&s, true).unwrap();
        assert_eq!(st.gamma_full.modes(), 6);
        assert_eq!(st.env.as_ref().unwrap().indices(), &[4, 5]);
        assert_eq!(st.measured_bob, 2);
    }

    #[test]
    fn assemble_with_environment_rejects_noise() {
        let s = scenario(vec![3.0], DetectionWeights::balanced(1), 0.5, 0.01);
        assert!(matches!(assemble(&s, true), Err(Error::RequiresPureLoss)));
    }

    #[test]
    fn scenario_validation() {
        let src = SourceSpec::new(vec![2.0, 2.0]).unwrap();
        let w1 = DetectionWeights::balanced(1);
        let w2 = DetectionWeights::balanced(2);
        assert!(Scenario::symmetric(
            src.clone(),
            w1,
            ChannelSpec::identity(),
            Trust::Trusted,
            Attack::Collective,
            1.0
        )
        .is_err());
        assert!(Scenario::symmetric(
            src.clone(),
            w2.clone(),
            ChannelSpec::identity(),
            Trust::Trusted,
            Attack::Collective,
            0.0
        )
        .is_err());
        assert!(matches!(
            Scenario::symmetric(
                src,
                w2,
                ChannelSpec::new(0.5, 0.05).unwrap(),
                Trust::Trusted,
                Attack::Individual,
                1.0
            ),
            Err(Error::RequiresPureLoss)
        ));
    }

    #[test]
    fn source_spec_rejects_subvacuum() {
        assert!(SourceSpec::new(vec![2.0, 0.9]).is_err());
        assert!(SourceSpec::new(vec![]).is_err());
    }

    proptest! {
        // adding a vacuum mode with weight l2 pulls Alice's variance toward 1
        #[test]
        fn vacuum_mode_shrinks_alice_variance_linearly(
            v in 1.0f64..10.0,
            l2 in 0.01f64..0.99,
        ) {
            let w = DetectionWeights::from_squared(&[1.0 - l2, l2]).unwrap();
            let s_old = scenario(vec![v], DetectionWeights::balanced(1), 1.0, 0.0);
            let s_new = scenario(vec![v, 1.0], w, 1.0, 0.0);
            let va_old = ignorant_matrix(&s_old).unwrap().variance(0, Quadrature::X);
            let va_new = ignorant_matrix(&s_new).unwrap().variance(0, Quadrature::X);
            prop_assert!((va_new - ((1.0 - l2) * va_old + l2)).abs() <= 1e-12);
        }

        // with all source variances equal the measured pair is exactly the
        // single-mode post-channel twin beam
        #[test]
        fn symmetrized_source_collapses_to_single_mode(
            v in 1.0f64..10.0,
            t in 0.05f64..=1.0,
            eps in 0.0f64..0.2,
            gains in proptest::collection::vec(0.05f64..2.0, 2..5),
        ) {
            let n = gains.len();
            let w = DetectionWeights::from_gains(&gains).unwrap();
            let s = scenario(vec![v; n], w, t, eps);
            let st = assemble(&s, false).unwrap();
            let pair = st.measured_pair().unwrap();
            let single = ignorant_matrix(
                &scenario(vec![v], DetectionWeights::balanced(1), t, eps),
            ).unwrap();
            let dev = (pair.matrix() - single.matrix()).amax();
            prop_assert!(dev <= 1e-10);
        }
    }
}
