//! Parameter sweeps and security-region boundary searches over scenario
//! templates. Grid points run on a worker pool; output ordering follows the
//! grid index regardless of scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{transmittance_from_distance_km, ChannelSpec};
use crate::protocol::{Scenario, SourceSpec};
use crate::security::{key_rate, KeyRateReport};

/// Swept scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Fiber distance in km, converted to transmittance at -0.2 dB/km.
    DistanceKm,
    Transmittance,
    ExcessNoise,
    /// Source variance of one mode.
    SourceVariance {
        mode: usize,
    },
}

/// Linear grid over one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.from + h * k as f64).collect()
    }
}

/// One grid point of a sweep; failures are carried per point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub parameter: f64,
    pub outcome: std::result::Result<KeyRateReport, String>,
}

/// Clone of the template with the axis parameter substituted (re-validated).
fn scenario_at(template: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario> {
    let mut variances = template.source.variances().to_vec();
    let (t, eps) = (
        template.channel.transmittance(),
        template.channel.excess_noise(),
    );
    let channel = match axis {
        SweepAxis::DistanceKm => ChannelSpec::new(transmittance_from_distance_km(value), eps)?,
        SweepAxis::Transmittance => ChannelSpec::new(value, eps)?,
        SweepAxis::ExcessNoise => ChannelSpec::new(t, value)?,
        SweepAxis::SourceVariance { mode } => {
            if mode >= variances.len() {
                return Err(Error::ModeIndexOutOfRange {
                    index: mode,
                    modes: variances.len(),
                });
            }
            variances[mode] = value;
            template.channel
        }
    };
    Scenario::new(
        SourceSpec::new(variances)?,
        template.alice_weights.clone(),
        template.bob_weights.clone(),
        channel,
        template.detection_trust,
        template.attack,
        template.beta,
    )
}

fn run_pool<T: Send, F: Fn() -> T + Send>(jobs: usize, f: F) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluates the key rate over the grid. `jobs = 0` uses the default pool
/// size; otherwise a dedicated pool of that many workers.
pub fn sweep(template: &Scenario, grid: &SweepGrid, jobs: usize) -> Result<Vec<SweepPoint>> {
    let values = grid.values();
    let axis = grid.axis;
    run_pool(jobs, || {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &parameter)| {
                let outcome = scenario_at(template, axis, parameter)
                    .and_then(|s| key_rate(&s))
                    .map_err(|e| e.to_string());
                SweepPoint {
                    index,
                    parameter,
                    outcome,
                }
            })
            .collect()
    })
}

/// Evenly spaced grid of `steps` points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|k| lo + h * k as f64).collect()
}

/// Logarithmically spaced grid, dense at the low end (`lo > 0`).
pub fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..steps)
        .map(|k| lo * ratio.powf(k as f64 / (steps - 1) as f64))
        .collect()
}

/// Locates a zero of `f` by scanning the grid for the first sign change and
/// bisecting it, stopping when `|f| <= f_tolerance`.
pub fn find_zero_crossing<F: Fn(f64) -> Result<f64>>(
    f: F,
    grid: &[f64],
    f_tolerance: f64,
) -> std::result::Result<f64, String> {
    if grid.len() < 2 {
        return Err("bad bracket".into());
    }
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &x in grid {
        let y = f(x).map_err(|e| e.to_string())?;
        if y.abs() <= f_tolerance {
            return Ok(x);
        }
        if let Some((px, py)) = prev {
            if py.signum() != y.signum() {
                bracket = Some((px, py, x, y));
                break;
            }
        }
        prev = Some((x, y));
    }
    let (mut a, mut fa, mut b, _fb) = bracket.ok_or_else(|| {
        format!(
            "no sign change of the key rate in [{}, {}]",
            grid[0],
            grid[grid.len() - 1]
        )
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid).map_err(|e| e.to_string())?;
        if fm.abs() <= f_tolerance || (b - a) < 1e-13 * b.abs().max(1.0) {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Grid of fixed second-mode variances for a security-region boundary search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourGrid {
    pub v2_from: f64,
    pub v2_to: f64,
    pub steps: usize,
}

impl ContourGrid {
    pub fn values(&self) -> Vec<f64> {
        SweepGrid {
            axis: SweepAxis::SourceVariance { mode: 0 },
            from: self.v2_from,
            to: self.v2_to,
            steps: self.steps,
        }
        .values()
    }
}

/// One boundary point: the first-mode variance at which the key rate crosses
/// zero for the given fixed second-mode variance.
#[derive(Debug, Clone)]
pub struct ContourPoint {
    pub index: usize,
    pub v2: f64,
    pub boundary_v1: std::result::Result<f64, String>,
}

/// Finds the `K = 0` first-mode variance for a fixed `v2`: the bracket
/// `(lo, hi)` is scanned on a log-spaced grid (the boundary lives at low
/// variances) for the first sign change from the low end, then bisected to
/// `|K| <= k_tolerance`. The template must be a two-mode scenario.
pub fn secure_boundary_v1(
    template: &Scenario,
    v2: f64,
    bracket: (f64, f64),
    k_tolerance: f64,
) -> std::result::Result<f64, String> {
    if template.mode_count() != 2 {
        return Err("boundary search requires a two-mode scenario".into());
    }
    let base = scenario_at(template, SweepAxis::SourceVariance { mode: 1 }, v2)
        .map_err(|e| e.to_string())?;
    let f = |v1: f64| {
        scenario_at(&base, SweepAxis::SourceVariance { mode: 0 }, v1)
            .and_then(|s| key_rate(&s))
            .map(|r| r.key_rate)
    };
    let grid = log_grid(bracket.0.max(1.0), bracket.1, 160);
    find_zero_crossing(f, &grid, k_tolerance)
}

/// Boundary search over a grid of `v2` values; bracket failures are reported
/// per point, never fatal.
pub fn contour(
    template: &Scenario,
    grid: &ContourGrid,
    bracket: (f64, f64),
    k_tolerance: f64,
    jobs: usize,
) -> Result<Vec<ContourPoint>> {
    let values = grid.values();
    run_pool(jobs, || {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &v2)| ContourPoint {
                index,
                v2,
                boundary_v1: secure_boundary_v1(template, v2, bracket, k_tolerance),
            })
            .collect()
    })
}

/// Variance at which the key rate crosses zero along the balanced diagonal
/// `V1 = V2 = V` of a two-mode scenario.
pub fn diagonal_crossing(
    template: &Scenario,
    v_range: (f64, f64),
    k_tolerance: f64,
) -> std::result::Result<f64, String> {
    if template.mode_count() != 2 {
        return Err("diagonal crossing requires a two-mode scenario".into());
    }
    let f = |v: f64| {
        let s1 = scenario_at(template, SweepAxis::SourceVariance { mode: 0 }, v)?;
        let s2 = scenario_at(&s1, SweepAxis::SourceVariance { mode: 1 }, v)?;
        key_rate(&s2).map(|r| r.key_rate)
    };
    find_zero_crossing(f, &linear_grid(v_range.0, v_range.1, 128), k_tolerance)
}
