//! Partial-knowledge analysis: the effective source and channel parameters a
//! less-informed party would infer from the measured two-mode covariance
//! matrix, obtained by exact moment matching.
//!
//! The fit targets the three independent moments of the measured x-block
//! (Alice variance, Bob variance, correlation), which is everything an
//! observer without mode-structure knowledge can access.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ChannelSpec, DetectionWeights};
use crate::protocol::{Attack, Scenario, SourceSpec, Trust};
use crate::security::{key_rate, KeyRateReport};

/// How the trusted parties group the true modes: each group is one assumed
/// mode whose internal structure they cannot resolve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeModel {
    groups: Vec<Vec<usize>>,
}

impl KnowledgeModel {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidGrouping("empty group".into()));
        }
        let mut all: Vec<usize> = groups.iter().flatten().copied().collect();
        all.sort_unstable();
        for pair in all.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidGrouping(format!(
                    "mode {} appears in two groups",
                    pair[0]
                )));
            }
        }
        Ok(KnowledgeModel { groups })
    }

    /// Full knowledge: every true mode is its own assumed mode.
    pub fn full(n: usize) -> Self {
        KnowledgeModel {
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// No structure knowledge: all modes collapsed into one.
    pub fn ignorant(n: usize) -> Self {
        KnowledgeModel {
            groups: vec![(0..n).collect()],
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn assumed_modes(&self) -> usize {
        self.groups.len()
    }

    fn check_partition(&self, n: usize) -> Result<()> {
        let mut all: Vec<usize> = self.groups.iter().flatten().copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidGrouping(format!(
                "groups must partition modes 0..{n}"
            )));
        }
        Ok(())
    }
}

/// Effective parameters reproducing the measured two-mode matrix under an
/// assumed mode structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    /// Effective variance per assumed mode (weight-averaged within groups).
    pub variances: Vec<f64>,
    /// Squared detection weight per assumed mode.
    pub weights_squared: Vec<f64>,
    pub transmittance: f64,
    pub excess_noise: f64,
}

impl EffectiveModel {
    /// Scenario the trusted parties would analyze: their assumed modes with
    /// trusted detection over the effective channel.
    pub fn scenario(&self, trust: Trust, attack: Attack, beta: f64) -> Result<Scenario> {
        Scenario::symmetric(
            SourceSpec::new(self.variances.clone())?,
            DetectionWeights::from_squared(&self.weights_squared)?,
            ChannelSpec::new(self.transmittance, self.excess_noise)?,
            trust,
            attack,
            beta,
        )
    }
}

/// Fits `(V_eff per group, T_eff, eps_eff)` by moment matching:
///
/// - group variance from Alice's measured variance:
///   `V_g = sum_in_group(lambda_i^2 V_i) / sum_in_group(lambda_i^2)`;
/// - `T_eff` from correlation matching:
///   `T_eff = T (sum_i lambda_i^2 C_i / sum_g w_g C(V_g))^2`;
/// - `eps_eff` from Bob-variance matching:
///   `eps_eff = ((T - T_eff)(Vbar - 1) + T eps) / T_eff`.
///
/// Requires symmetric detection weights (all worked configurations are).
pub fn effective_parameters(s: &Scenario, model: &KnowledgeModel) -> Result<EffectiveModel> {
    let n = s.mode_count();
    model.check_partition(n)?;
    let la = s.alice_weights.lambdas();
    let lb = s.bob_weights.lambdas();
    if la.iter().zip(lb.iter()).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::InvalidScenario(
            "effective-parameter fit requires symmetric detection weights".into(),
        ));
    }
    let l2: Vec<f64> = la.iter().map(|l| l * l).collect();
    let vs = s.source.variances();
    let t = s.channel.transmittance();
    let eps = s.channel.excess_noise();

    let mut variances = Vec::with_capacity(model.assumed_modes());
    let mut weights_squared = Vec::with_capacity(model.assumed_modes());
    for group in model.groups() {
        let w_g: f64 = group.iter().map(|&i| l2[i]).sum();
        let v_g = if w_g > 0.0 {
            group.iter().map(|&i| l2[i] * vs[i]).sum::<f64>() / w_g
        } else {
            1.0
        };
        weights_squared.push(w_g);
        variances.push(v_g);
    }

    let corr = |v: f64| (v * v - 1.0).sqrt();
    let true_factor: f64 = l2.iter().zip(vs.iter()).map(|(w, &v)| w * corr(v)).sum();
    let eff_factor: f64 = weights_squared
        .iter()
        .zip(variances.iter())
        .map(|(w, &v)| w * corr(v))
        .sum();

    let transmittance = if eff_factor > 0.0 {
        t * (true_factor / eff_factor).powi(2)
    } else if true_factor.abs() <= 1e-15 {
        t
    } else {
        return Err(Error::DegenerateFit(
            "unit effective variance with nonzero correlations".into(),
        ));
    };

    let v_bar: f64 = l2.iter().zip(vs.iter()).map(|(w, &v)| w * v).sum();
    let excess_noise = ((t - transmittance) * (v_bar - 1.0) + t * eps) / transmittance;

    Ok(EffectiveModel {
        variances,
        weights_squared,
        transmittance,
        excess_noise,
    })
}

/// Collective key rate the trusted parties obtain at each knowledge level,
/// analyzing their assumed modes with trusted detection over the effective
/// channel. Returns `(assumed mode count, report)` per level.
pub fn knowledge_rate_comparison(
    s: &Scenario,
    models: &[KnowledgeModel],
) -> Result<Vec<(usize, KeyRateReport)>> {
    models
        .iter()
        .map(|model| {
            let eff = effective_parameters(s, model)?;
            let scenario = eff.scenario(Trust::Trusted, Attack::Collective, s.beta)?;
            Ok((model.assumed_modes(), key_rate(&scenario)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ignorant_matrix;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {b}, got {a} (diff {:.3e})",
            (a - b).abs()
        );
    }

    /// Three-mode reference configuration for the partial-knowledge analysis.
    fn reference_scenario(t: f64) -> Scenario {
        Scenario::symmetric(
            SourceSpec::new(vec![5.0, 1.5, 1.1]).unwrap(),
            DetectionWeights::from_squared(&[0.95, 0.025, 0.025]).unwrap(),
            ChannelSpec::new(t, 0.05).unwrap(),
            Trust::Trusted,
            Attack::Collective,
            0.95,
        )
        .unwrap()
    }

    #[test]
    fn identity_fit_at_full_knowledge() {
        let s = reference_scenario(0.5);
        let eff = effective_parameters(&s, &KnowledgeModel::full(3)).unwrap();
        assert_eq!(eff.variances, vec![5.0, 1.5, 1.1]);
        assert_close(eff.transmittance, 0.5, 1e-14);
        assert_close(eff.excess_noise, 0.05, 1e-12);
    }

    #[test]
    fn single_mode_truth_fits_identically() {
        let s = Scenario::symmetric(
            SourceSpec::new(vec![4.0]).unwrap(),
            DetectionWeights::balanced(1),
            ChannelSpec::new(0.3, 0.02).unwrap(),
            Trust::Trusted,
            Attack::Collective,
            1.0,
        )
        .unwrap();
        let eff = effective_parameters(&s, &KnowledgeModel::ignorant(1)).unwrap();
        assert_eq!(eff.variances, vec![4.0]);
        assert_close(eff.transmittance, 0.3, 1e-14);
        assert_close(eff.excess_noise, 0.02, 1e-12);
    }

    #[test]
    fn ignorant_collapse_reproduces_reference_values() {
        let s = reference_scenario(0.5);
        let eff = effective_parameters(&s, &KnowledgeModel::ignorant(3)).unwrap();
        assert_close(eff.variances[0], 4.815, 1e-12);
        assert_close(eff.transmittance / 0.5, 0.993, 5e-4);
        assert_close(eff.excess_noise, 0.0773, 5e-5);
    }

    #[test]
    fn two_group_collapse_reproduces_reference_values() {
        let s = reference_scenario(0.5);
        let model = KnowledgeModel::new(vec![vec![0], vec![1, 2]]).unwrap();
        let eff = effective_parameters(&s, &model).unwrap();
        assert_close(eff.variances[0], 5.0, 1e-12);
        assert_close(eff.variances[1], 1.3, 1e-12);
        assert_close(eff.weights_squared[1], 0.05, 1e-12);
        assert_close(eff.transmittance / 0.5, 0.999, 5e-4);
        assert_close(eff.excess_noise, 0.0535, 5e-5);
    }

    #[test]
    fn moment_match_is_exact() {
        for t in [0.1, 0.5, 0.9] {
            let s = reference_scenario(t);
            for model in [
                KnowledgeModel::ignorant(3),
                KnowledgeModel::new(vec![vec![0], vec![1, 2]]).unwrap(),
                KnowledgeModel::full(3),
            ] {
                let eff = effective_parameters(&s, &model).unwrap();
                let eff_scenario = eff.scenario(s.detection_trust, s.attack, s.beta).unwrap();
                let true_pair = ignorant_matrix(&s).unwrap();
                let eff_pair = ignorant_matrix(&eff_scenario).unwrap();
                let dev = (true_pair.matrix() - eff_pair.matrix()).amax();
                assert!(dev <= 1e-10, "deviation {dev:.3e}");
            }
        }
    }

    #[test]
    fn effective_noise_grows_as_knowledge_shrinks() {
        let s = reference_scenario(0.5);
        let eps3 = effective_parameters(&s, &KnowledgeModel::full(3))
            .unwrap()
            .excess_noise;
        let eps2 =
            effective_parameters(&s, &KnowledgeModel::new(vec![vec![0], vec![1, 2]]).unwrap())
                .unwrap()
                .excess_noise;
        let eps1 = effective_parameters(&s, &KnowledgeModel::ignorant(3))
            .unwrap()
            .excess_noise;
        assert!(eps3 < eps2 && eps2 < eps1, "{eps3} {eps2} {eps1}");
    }

    #[test]
    fn rates_ordered_by_knowledge_over_distance() {
        let models = [
            KnowledgeModel::full(3),
            KnowledgeModel::new(vec![vec![0], vec![1, 2]]).unwrap(),
            KnowledgeModel::ignorant(3),
        ];
        for d_km in [0.0, 10.0, 25.0] {
            let t = crate::network::transmittance_from_distance_km(d_km);
            let s = reference_scenario(t);
            let rates = knowledge_rate_comparison(&s, &models).unwrap();
            assert_eq!(rates[0].0, 3);
            assert_eq!(rates[1].0, 2);
            assert_eq!(rates[2].0, 1);
            let k: Vec<f64> = rates.iter().map(|(_, r)| r.key_rate).collect();
            assert!(
                k[0] >= k[1] - 1e-12 && k[1] >= k[2] - 1e-12,
                "at {d_km} km: {k:?}"
            );
        }
    }

    #[test]
    fn full_knowledge_equals_direct_computation() {
        let s = reference_scenario(0.4);
        let direct = key_rate(&s).unwrap().key_rate;
        let via_fit = knowledge_rate_comparison(&s, &[KnowledgeModel::full(3)]).unwrap()[0]
            .1
            .key_rate;
        assert_close(via_fit, direct, 1e-10);
    }

    #[test]
    fn grouping_validation() {
        assert!(KnowledgeModel::new(vec![]).is_err());
        assert!(KnowledgeModel::new(vec![vec![0], vec![0, 1]]).is_err());
        let s = reference_scenario(0.5);
        let bad = KnowledgeModel::new(vec![vec![0], vec![1]]).unwrap();
        assert!(effective_parameters(&s, &bad).is_err());
    }

    #[test]
    fn asymmetric_weights_are_rejected() {
        let s = Scenario::new(
            SourceSpec::new(vec![3.0, 2.0]).unwrap(),
            DetectionWeights::from_squared(&[0.7, 0.3]).unwrap(),
            DetectionWeights::balanced(2),
            ChannelSpec::new(0.5, 0.0).unwrap(),
            Trust::Trusted,
            Attack::Collective,
            1.0,
        )
        .unwrap();
        assert!(effective_parameters(&s, &KnowledgeModel::ignorant(2)).is_err());
    }

    #[test]
    fn vacuum_only_group_keeps_identity_channel() {
        let s = Scenario::symmetric(
            SourceSpec::new(vec![1.0, 1.0]).unwrap(),
            DetectionWeights::balanced(2),
            ChannelSpec::new(0.5, 0.0).unwrap(),
            Trust::Trusted,
            Attack::Collective,
            1.0,
        )
        .unwrap();
        let eff = effective_parameters(&s, &KnowledgeModel::ignorant(2)).unwrap();
        assert_close(eff.transmittance, 0.5, 1e-14);
        assert_close(eff.variances[0], 1.0, 1e-14);
    }
}
