//! Symplectic transformations: two-mode beamsplitters, synthesis of the
//! linear-optical coupling (LOC) network that emulates a multimode homodyne
//! detector, and the lossy/noisy channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{tensor, CovarianceMatrix, ModeIndexSet};

/// Normalized detection weights `lambda_i` of a multimode homodyne detector,
/// one per mode: the measured quadrature is `sum_i lambda_i x_i` with
/// `sum_i lambda_i^2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionWeights {
    lambdas: Vec<f64>,
}

impl DetectionWeights {
    /// Builds weights from raw (unnormalized) homodyne gains `G_i >= 0`;
    /// normalization `lambda_i = G_i / sqrt(sum G_n^2)` is applied here.
    pub fn from_gains(gains: &[f64]) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidWeights(
                "gains must be finite and nonnegative".into(),
            ));
        }
        let norm_sq: f64 = gains.iter().map(|g| g * g).sum();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidWeights(
                "at least one gain must be > 0".into(),
            ));
        }
        let norm = norm_sq.sqrt();
        Ok(DetectionWeights {
            lambdas: gains.iter().map(|g| g / norm).collect(),
        })
    }

    /// Builds weights from squared-weight proportions (`lambda_i^2`
    /// proportional to the given values).
    pub fn from_squared(weights_sq: &[f64]) -> Result<Self> {
        if weights_sq.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(
                "squared weights must be finite and nonnegative".into(),
            ));
        }
        let gains: Vec<f64> = weights_sq.iter().map(|w| w.sqrt()).collect();
        DetectionWeights::from_gains(&gains)
    }

    /// Balanced detection of `n` modes: all `lambda_i^2 = 1/n`.
    pub fn balanced(n: usize) -> Self {
        DetectionWeights {
            lambdas: vec![(1.0 / n as f64).sqrt(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambdas_squared(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l * l).collect()
    }
}

/// Channel acting identically on every transmitted mode: transmittance `T`
/// in `(0, 1]` and input-referred excess noise `eps >= 0` in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    transmittance: f64,
    excess_noise: f64,
}

impl ChannelSpec {
    pub fn new(transmittance: f64, excess_noise: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::InvalidChannel(format!(
                "transmittance {transmittance} outside (0, 1]"
            )));
        }
        if !(excess_noise >= 0.0 && excess_noise.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "excess noise {excess_noise} must be >= 0"
            )));
        }
        Ok(ChannelSpec {
            transmittance,
            excess_noise,
        })
    }

    /// Perfect channel: `T = 1`, no excess noise.
    pub fn identity() -> Self {
        ChannelSpec {
            transmittance: 1.0,
            excess_noise: 0.0,
        }
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    pub fn is_pure_loss(&self) -> bool {
        self.excess_noise == 0.0
    }
}

/// Transmittance of standard telecom fiber (-0.2 dB/km) at `d` kilometers.
pub fn transmittance_from_distance_km(d: f64) -> f64 {
    10.0_f64.powf(-0.2 * d / 10.0)
}

/// Applies a beamsplitter of transmittance `t` between modes `i` and `j`:
/// `x_i -> sqrt(t) x_i + sqrt(1-t) x_j`, `x_j -> -sqrt(1-t) x_i + sqrt(t) x_j`,
/// identically on `p`. The minus sign sits on the reflected port of the first
/// input; one convention is fixed so auxiliary-mode correlations are
/// reproducible.
pub fn apply_beamsplitter(
    gamma: &CovarianceMatrix,
    i: usize,
    j: usize,
    t: f64,
) -> Result<CovarianceMatrix> {
    let modes = gamma.modes();
    if i >= modes {
        return Err(Error::ModeIndexOutOfRange { index: i, modes });
    }
    if j >= modes {
        return Err(Error::ModeIndexOutOfRange { index: j, modes });
    }
    if i == j {
        return Err(Error::DuplicateModeIndex(i));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain(format!(
            "beamsplitter transmittance {t} outside [0, 1]"
        )));
    }
    let c = t.sqrt();
    let s = (1.0 - t).sqrt();
    let mut m = gamma.matrix().clone();
    let n = m.nrows();
    let pairs = [(2 * i, 2 * j), (2 * i + 1, 2 * j + 1)];
    // congruence S gamma S^T as a row pass followed by a column pass
    for &(a, b) in &pairs {
        for col in 0..n {
            let ra = m[(a, col)];
            let rb = m[(b, col)];
            m[(a, col)] = c * ra + s * rb;
            m[(b, col)] = -s * ra + c * rb;
        }
    }
    for &(a, b) in &pairs {
        for row in 0..n {
            let ca = m[(row, a)];
            let cb = m[(row, b)];
            m[(row, a)] = c * ca + s * cb;
            m[(row, b)] = -s * ca + c * cb;
        }
    }
    CovarianceMatrix::from_matrix(m)
}

/// Synthesizes the LOC network realizing given detection weights as an
/// ordered list of `(i, j, t)` beamsplitter steps over modes `0..N`, with
/// mode 0 the accumulator that ends up carrying `sum_i lambda_i x_i`.
///
/// Step `k` couples the accumulator with mode `k+1` at
/// `t_k = (sum_{j<=k} lambda_j^2) / (sum_{j<=k+1} lambda_j^2)`. Zero-weight
/// modes yield `t = 1` no-op steps, kept so mode indexing stays stable.
pub fn synthesize_loc(weights: &DetectionWeights) -> Vec<(usize, usize, f64)> {
    let l2 = weights.lambdas_squared();
    let mut steps = Vec::with_capacity(l2.len().saturating_sub(1));
    let mut prefix = l2[0];
    for (k, &w) in l2.iter().enumerate().skip(1) {
        let next = prefix + w;
        let t = if next <= 0.0 { 1.0 } else { prefix / next };
        steps.push((0, k, t));
        prefix = next;
    }
    steps
}

/// Applies the LOC of `weights` to the listed modes of `gamma` (the first
/// listed mode is the accumulator / measured output).
pub fn apply_loc(
    gamma: &CovarianceMatrix,
    weights: &DetectionWeights,
    modes: &[usize],
) -> Result<CovarianceMatrix> {
    if modes.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} modes",
            weights.len(),
            modes.len()
        )));
    }
    let mut g = gamma.clone();
    for (i, j, t) in synthesize_loc(weights) {
        g = apply_beamsplitter(&g, modes[i], modes[j], t)?;
    }
    Ok(g)
}

/// Applies the channel to every listed mode: diagonal blocks become
/// `T (block + eps I) + (1 - T) I`; correlations with unlisted modes scale by
/// `sqrt(T)`, correlations among listed modes by `T`.
pub fn apply_channel(
    gamma: &CovarianceMatrix,
    modes: &ModeIndexSet,
    ch: &ChannelSpec,
) -> Result<CovarianceMatrix> {
    for &m in modes.indices() {
        if m >= gamma.modes() {
            return Err(Error::ModeIndexOutOfRange {
                index: m,
                modes: gamma.modes(),
            });
        }
    }
    let t = ch.transmittance();
    let sqrt_t = t.sqrt();
    let add = t * ch.excess_noise() + 1.0 - t;
    let mut m = gamma.matrix().clone();
    let n = m.nrows();
    let listed: Vec<usize> = modes
        .indices()
        .iter()
        .flat_map(|&k| [2 * k, 2 * k + 1])
        .collect();
    for &r in &listed {
        for c in 0..n {
            m[(r, c)] *= sqrt_t;
        }
    }
    for &c in &listed {
        for r in 0..n {
            m[(r, c)] *= sqrt_t;
        }
    }
    for &r in &listed {
        m[(r, r)] += add;
    }
    CovarianceMatrix::from_matrix(m)
}

/// Purely lossy channel with the environment kept explicit: one vacuum mode
/// is appended per listed mode and coupled to it on a beamsplitter of
/// transmittance `T`, so an eavesdropper can be handed the environment
/// outputs. Returns the enlarged state and the environment mode indices.
pub fn apply_lossy_channel_with_environment(
    gamma: &CovarianceMatrix,
    modes: &ModeIndexSet,
    ch: &ChannelSpec,
) -> Result<(CovarianceMatrix, ModeIndexSet)> {
    if !ch.is_pure_loss() {
        return Err(Error::RequiresPureLoss);
    }
    for &m in modes.indices() {
        if m >= gamma.modes() {
            return Err(Error::ModeIndexOutOfRange {
                index: m,
                modes: gamma.modes(),
            });
        }
    }
    let base = gamma.modes();
    let mut g = tensor(gamma, &CovarianceMatrix::vacuum(modes.len()));
    for (k, &signal) in modes.indices().iter().enumerate() {
        g = apply_beamsplitter(&g, signal, base + k, ch.transmittance())?;
    }
    let env = ModeIndexSet::from_range(base..base + modes.len());
    Ok((g, env))
}
