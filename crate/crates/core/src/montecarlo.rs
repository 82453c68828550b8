//! Seeded simulation of protocol runs with fluctuating per-mode source
//! variances, quantifying how increasing the mode count stabilizes the key
//! rate.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DetectionWeights;
use crate::protocol::{Scenario, SourceSpec};
use crate::security::{key_rate, KeyRateReport};

/// Name of the generator behind the draws, recorded in output metadata:
/// series are reproducible across implementations only for the same
/// algorithm.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Normal-law fluctuation of per-mode source variances.
///
/// `spread` is the second parameter of the normal law; by default it is read
/// as the variance (standard `N(mu, sigma^2)` notation), with
/// `spread_is_std` switching to the standard-deviation reading for
/// sensitivity checks. Draws are clamped at the vacuum floor 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSpec {
    pub mean: f64,
    pub spread: f64,
    pub spread_is_std: bool,
    pub n_modes: usize,
    pub n_runs: usize,
    pub seed: u64,
}

impl FluctuationSpec {
    pub fn new(mean: f64, spread: f64, n_modes: usize, n_runs: usize, seed: u64) -> Result<Self> {
        let spec = FluctuationSpec {
            mean,
            spread,
            spread_is_std: false,
            n_modes,
            n_runs,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mean_ok = self.mean.is_finite() && self.mean > 1.0;
        if !mean_ok {
            return Err(Error::OutOfDomain(format!(
                "mean variance {} must be > 1",
                self.mean
            )));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::OutOfDomain(format!(
                "spread {} must be >= 0",
                self.spread
            )));
        }
        if self.n_modes == 0 || self.n_runs == 0 {
            return Err(Error::OutOfDomain(
                "mode and run counts must be positive".into(),
            ));
        }
        Ok(())
    }

    fn std_dev(&self) -> f64 {
        if self.spread_is_std {
            self.spread
        } else {
            self.spread.sqrt()
        }
    }
}

/// One simulated protocol run.
#[derive(Debug, Clone)]
pub struct FluctuationRun {
    pub run_index: u64,
    /// FNV-1a hash of the clamped variance draws, for reproducibility checks.
    pub draws_hash: u64,
    pub report: KeyRateReport,
}

/// Complete simulated series with its generator metadata.
#[derive(Debug, Clone)]
pub struct FluctuationSeries {
    pub rng_algorithm: &'static str,
    pub spec: FluctuationSpec,
    /// Fraction of draws that hit the vacuum clamp (monitored, not asserted).
    pub clamped_fraction: f64,
    pub runs: Vec<FluctuationRun>,
}

impl FluctuationSeries {
    pub fn key_rates(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.report.key_rate).collect()
    }
}

/// Summary statistics of a key-rate series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub fraction_positive: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x1_0000_0000_01b3);
        }
    }
    h
}

/// Runs the fluctuating-source simulation: each run draws `n_modes`
/// independent variances from the normal law, clamps them at 1.0, builds a
/// balanced-weight scenario with `base`'s channel, trust model, attack class
/// and efficiency, and computes its key rate.
///
/// Per-run generators are seeded from `(seed, run_index)`, so the series is
/// deterministic and independent of execution order.
pub fn run_fluctuating(spec: &FluctuationSpec, base: &Scenario) -> Result<FluctuationSeries> {
    spec.validate()?;
    let normal = Normal::new(spec.mean, spec.std_dev())
        .map_err(|e| Error::OutOfDomain(format!("normal law: {e}")))?;
    let weights = DetectionWeights::balanced(spec.n_modes);
    let mut runs = Vec::with_capacity(spec.n_runs);
    let mut clamped: u64 = 0;

    let series_key = splitmix64(spec.seed);
    for run_index in 0..spec.n_runs as u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(series_key ^ run_index));
        let draws: Vec<f64> = (0..spec.n_modes)
            .map(|_| {
                let v: f64 = normal.sample(&mut rng);
                if v < 1.0 {
                    clamped += 1;
                    1.0
                } else {
                    v
                }
            })
            .collect();
        let draws_hash = fnv1a64(&draws);
        let scenario = Scenario::symmetric(
            SourceSpec::new(draws)?,
            weights.clone(),
            base.channel,
            base.detection_trust,
            base.attack,
            base.beta,
        )?;
        runs.push(FluctuationRun {
            run_index,
            draws_hash,
            report: key_rate(&scenario)?,
        });
    }

    Ok(FluctuationSeries {
        rng_algorithm: RNG_ALGORITHM,
        spec: *spec,
        clamped_fraction: clamped as f64 / (spec.n_runs * spec.n_modes) as f64,
        runs,
    })
}

/// Sample statistics of a series; errors on an empty one.
pub fn summarize(series: &FluctuationSeries) -> Result<SeriesSummary> {
    summarize_rates(&series.key_rates())
}

/// Sample statistics of raw key rates.
pub fn summarize_rates(rates: &[f64]) -> Result<SeriesSummary> {
    if rates.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    let std_dev = if rates.len() > 1 {
        (rates.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let fraction_positive = rates.iter().filter(|k| **k > 0.0).count() as f64 / n;
    Ok(SeriesSummary {
        mean,
        std_dev,
        min,
        fraction_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ChannelSpec;
    use crate::protocol::{Attack, Trust};

    fn base_scenario() -> Scenario {
        Scenario::symmetric(
            SourceSpec::new(vec![3.0]).unwrap(),
            DetectionWeights::balanced(1),
            ChannelSpec::new(0.03, 0.05).unwrap(),
            Trust::Untrusted,
            Attack::Collective,
            0.95,
        )
        .unwrap()
    }

    #[test]
    fn identical_seeds_give_identical_series() {
        let spec = FluctuationSpec::new(3.0, 0.75, 5, 40, 11).unwrap();
        let a = run_fluctuating(&spec, &base_scenario()).unwrap();
        let b = run_fluctuating(&spec, &base_scenario()).unwrap();
        for (ra, rb) in a.runs.iter().zip(b.runs.iter()) {
            assert_eq!(ra.draws_hash, rb.draws_hash);
            assert_eq!(ra.report.key_rate.to_bits(), rb.report.key_rate.to_bits());
        }
        assert_eq!(a.rng_algorithm, "chacha12");
    }

    #[test]
    fn different_seeds_differ() {
        let s1 = FluctuationSpec::new(3.0, 0.75, 5, 10, 1).unwrap();
        let s2 = FluctuationSpec::new(3.0, 0.75, 5, 10, 2).unwrap();
        let a = run_fluctuating(&s1, &base_scenario()).unwrap();
        let b = run_fluctuating(&s2, &base_scenario()).unwrap();
        assert_ne!(a.runs[0].draws_hash, b.runs[0].draws_hash);
    }

    #[test]
    fn zero_spread_collapses_to_single_mode_rate() {
        let spec = FluctuationSpec::new(3.0, 0.0, 7, 5, 42).unwrap();
        let series = run_fluctuating(&spec, &base_scenario()).unwrap();
        let single = key_rate(&base_scenario()).unwrap().key_rate;
        for run in &series.runs {
            assert!(
                (run.report.key_rate - single).abs() <= 1e-12,
                "{} vs {single}",
                run.report.key_rate
            );
        }
        let summary = summarize(&series).unwrap();
        assert_eq!(summary.std_dev, 0.0);
    }

    #[test]
    fn more_modes_stabilize_the_rate() {
        let mk = |n_modes| FluctuationSpec::new(3.0, 0.75, n_modes, 200, 7).unwrap();
        let few = summarize(&run_fluctuating(&mk(5), &base_scenario()).unwrap()).unwrap();
        let many = summarize(&run_fluctuating(&mk(100), &base_scenario()).unwrap()).unwrap();
        assert!(
            many.std_dev < few.std_dev,
            "std {} !< {}",
            many.std_dev,
            few.std_dev
        );
    }

    #[test]
    fn clamping_stays_rare_at_reference_parameters() {
        let spec = FluctuationSpec::new(3.0, 0.75, 10, 200, 3).unwrap();
        let series = run_fluctuating(&spec, &base_scenario()).unwrap();
        // |3 - 1| / sqrt(0.75) ~ 2.3 sigma; monitored, not asserted by spec,
        // but the module-level sanity bound is generous
        assert!(series.clamped_fraction < 0.05);
    }

    #[test]
    fn spread_interpretation_flag_changes_draws() {
        let mut spec = FluctuationSpec::new(3.0, 0.75, 5, 10, 9).unwrap();
        let a = run_fluctuating(&spec, &base_scenario()).unwrap();
        spec.spread_is_std = true;
        let b = run_fluctuating(&spec, &base_scenario()).unwrap();
        assert_ne!(a.runs[0].draws_hash, b.runs[0].draws_hash);
    }

    #[test]
    fn summarize_statistics() {
        assert!(summarize_rates(&[]).is_err());
        let s = summarize_rates(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.fraction_positive, 1.0);
        let m = summarize_rates(&[-1.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.min, -1.0);
        assert_eq!(m.fraction_positive, 0.5);
    }

    #[test]
    fn spec_validation() {
        assert!(FluctuationSpec::new(1.0, 0.75, 5, 10, 0).is_err());
        assert!(FluctuationSpec::new(3.0, -0.1, 5, 10, 0).is_err());
        assert!(FluctuationSpec::new(3.0, 0.75, 0, 10, 0).is_err());
        assert!(FluctuationSpec::new(3.0, 0.75, 5, 0, 0).is_err());
    }
}
