//! Dense symplectic linear algebra over Gaussian-state covariance matrices.
//!
//! States are zero-mean Gaussian states of `M` optical modes, described by a
//! real symmetric `2M x 2M` covariance matrix in interleaved quadrature order
//! `(x1, p1, x2, p2, ...)` and shot-noise units (vacuum variance 1).

use nalgebra::linalg::{Cholesky, SymmetricEigen};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Quadrature selector for homodyne measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    /// Offset of this quadrature within a mode's `(x, p)` pair.
    pub fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Ordered set of distinct mode indices into a [`CovarianceMatrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeIndexSet(Vec<usize>);

impl ModeIndexSet {
    /// Builds a set from the given indices, rejecting duplicates.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut seen = indices.clone();
        seen.sort_unstable();
        for pair in seen.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateModeIndex(pair[0]));
            }
        }
        Ok(ModeIndexSet(indices))
    }

    pub fn single(index: usize) -> Self {
        ModeIndexSet(vec![index])
    }

    pub fn from_range(range: std::ops::Range<usize>) -> Self {
        ModeIndexSet(range.collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }
}

/// Real symmetric covariance matrix of an `M`-mode Gaussian state.
///
/// Invariants enforced on construction: even dimension, symmetry within
/// [`tolerance::SYMMETRY`] (relative). Physicality (symplectic eigenvalues
/// `>= 1 - PHYSICALITY`) is checked by [`CovarianceMatrix::validate_physical`]
/// and asserted by the property suites rather than on every operation.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a raw matrix, validating shape and symmetry; the stored matrix
    /// is symmetrized to remove rounding skew.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || !n.is_multiple_of(2) || m.ncols() != n {
            return Err(Error::BadDimension(n));
        }
        let scale = m.amax().max(1.0);
        let mut max_dev: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                max_dev = max_dev.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_dev > tolerance::SYMMETRY * scale {
            return Err(Error::NotSymmetric(max_dev / scale));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(CovarianceMatrix {
            modes: n / 2,
            m: sym,
        })
    }

    /// Vacuum state of `modes` modes (identity matrix).
    pub fn vacuum(modes: usize) -> Self {
        CovarianceMatrix {
            modes,
            m: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Single-mode thermal state of variance `v`.
    pub fn thermal(v: f64) -> Result<Self> {
        if v < 1.0 {
            return Err(Error::UnphysicalVariance(v));
        }
        Ok(CovarianceMatrix {
            modes: 1,
            m: DMatrix::from_diagonal_element(2, 2, v),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Full quadrature dimension `2M`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Row/column index of a mode's quadrature.
    pub fn quad_index(&self, mode: usize, quad: Quadrature) -> usize {
        2 * mode + quad.offset()
    }

    /// Variance of one quadrature of one mode.
    pub fn variance(&self, mode: usize, quad: Quadrature) -> f64 {
        let k = self.quad_index(mode, quad);
        self.m[(k, k)]
    }

    /// Covariance between the same quadrature of two modes.
    pub fn correlation(&self, mode_a: usize, mode_b: usize, quad: Quadrature) -> f64 {
        let a = self.quad_index(mode_a, quad);
        let b = self.quad_index(mode_b, quad);
        self.m[(a, b)]
    }

    fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.modes {
            return Err(Error::ModeIndexOutOfRange {
                index,
                modes: self.modes,
            });
        }
        Ok(())
    }

    fn check_mode_set(&self, set: &ModeIndexSet) -> Result<()> {
        for &i in set.indices() {
            self.check_mode(i)?;
        }
        Ok(())
    }

    /// Symplectic eigenvalues, sorted in descending order.
    ///
    /// These are the `M` moduli of the spectrum of `i Omega gamma`, obtained
    /// from the singular values of `sqrt(gamma) Omega sqrt(gamma)` (similar
    /// to `Omega gamma`, and normal, so its singular values are exactly those
    /// moduli). The `2M` values come in pairs; they are deduplicated by
    /// sorting and taking every second one.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let eig = SymmetricEigen::new(self.m.clone());
        let mut sqrt_vals = eig.eigenvalues.clone();
        for v in sqrt_vals.iter_mut() {
            if *v < -tolerance::PHYSICALITY * self.m.amax().max(1.0) {
                return Err(Error::Numerical(format!(
                    "covariance matrix has negative eigenvalue {v:.3e}"
                )));
            }
            *v = v.max(0.0).sqrt();
        }
        let sqrt_m =
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let a = &sqrt_m * symplectic_form(self.modes) * &sqrt_m;
        let mut sv: Vec<f64> = a
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        debug_assert!(sv
            .chunks(2)
            .all(|c| (c[0] - c[1]).abs() <= tolerance::EIGENVALUE_PAIRING * c[0].max(1.0)));
        Ok((0..n / 2).map(|k| sv[2 * k]).collect())
    }

    /// Von Neumann entropy in bits: `sum_i G((nu_i - 1) / 2)`.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(self
            .symplectic_eigenvalues()?
            .into_iter()
            .map(|nu| bosonic_entropy((nu - 1.0) / 2.0))
            .sum())
    }

    /// Smallest symplectic eigenvalue.
    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(*self
            .symplectic_eigenvalues()?
            .last()
            .expect("at least one mode"))
    }

    /// Checks physicality: every symplectic eigenvalue `>= 1 - PHYSICALITY`.
    pub fn validate_physical(&self) -> Result<()> {
        let nu_min = self.min_symplectic_eigenvalue()?;
        if nu_min < 1.0 - tolerance::PHYSICALITY {
            return Err(Error::UnphysicalVariance(nu_min));
        }
        Ok(())
    }

    /// True when the state is pure (all symplectic eigenvalues within
    /// [`tolerance::PURITY`] of 1).
    pub fn is_pure(&self) -> Result<bool> {
        Ok(self
            .symplectic_eigenvalues()?
            .iter()
            .all(|nu| (nu - 1.0).abs() <= tolerance::PURITY))
    }
}

/// Standard symplectic form for `modes` modes in interleaved ordering:
/// a direct sum of `[[0, 1], [-1, 0]]` blocks.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Bosonic entropic function `G(x) = (x+1) log2(x+1) - x log2(x)` with the
/// continuous limit `G(0) = 0`; arguments below the cutoff return 0.
pub fn bosonic_entropy(x: f64) -> f64 {
    if x < tolerance::ENTROPY_ARGUMENT_CUTOFF {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

/// Two-mode squeezed vacuum of quadrature variance `v` per arm: diagonal
/// blocks `v*I`, off-diagonal block `sqrt(v^2-1)*diag(1,-1)`.
pub fn tmsv(v: f64) -> Result<CovarianceMatrix> {
    if v < 1.0 {
        return Err(Error::UnphysicalVariance(v));
    }
    let c = (v * v - 1.0).sqrt();
    let mut m = DMatrix::identity(4, 4) * v;
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    Ok(CovarianceMatrix { modes: 2, m })
}

/// Tensor product of two states: block-diagonal concatenation, `b`'s modes
/// appended after `a`'s.
pub fn tensor(a: &CovarianceMatrix, b: &CovarianceMatrix) -> CovarianceMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let mut m = DMatrix::zeros(na + nb, na + nb);
    m.view_mut((0, 0), (na, na)).copy_from(&a.m);
    m.view_mut((na, na), (nb, nb)).copy_from(&b.m);
    CovarianceMatrix {
        modes: a.modes + b.modes,
        m,
    }
}

/// Reduced state over `keep`, in the order given (so a permutation of all
/// modes reorders the state).
pub fn partial_trace(gamma: &CovarianceMatrix, keep: &ModeIndexSet) -> Result<CovarianceMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyModeSelection);
    }
    gamma.check_mode_set(keep)?;
    let rows: Vec<usize> = keep
        .indices()
        .iter()
        .flat_map(|&m| [2 * m, 2 * m + 1])
        .collect();
    let sub = DMatrix::from_fn(rows.len(), rows.len(), |i, j| gamma.m[(rows[i], rows[j])]);
    Ok(CovarianceMatrix {
        modes: keep.len(),
        m: sub,
    })
}

/// Conditional covariance matrix of the unmeasured modes after ideal homodyne
/// detection of one quadrature in every mode of `measured`.
///
/// Implements the Schur complement on the measured quadrature block, which is
/// the action of the Moore-Penrose pseudoinverse of the projected matrix: the
/// projector onto the measured quadratures leaves only that block, so its
/// pseudoinverse is the block inverse embedded back.
pub fn condition_on_homodyne(
    gamma: &CovarianceMatrix,
    measured: &ModeIndexSet,
    quad: Quadrature,
) -> Result<CovarianceMatrix> {
    if measured.is_empty() {
        return Err(Error::EmptyModeSelection);
    }
    gamma.check_mode_set(measured)?;
    let remaining: Vec<usize> = (0..gamma.modes)
        .filter(|m| !measured.contains(*m))
        .collect();
    if remaining.is_empty() {
        return Err(Error::NoRemainingModes);
    }
    let kept_rows: Vec<usize> = remaining.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let meas_rows: Vec<usize> = measured
        .indices()
        .iter()
        .map(|&m| gamma.quad_index(m, quad))
        .collect();

    for &r in &meas_rows {
        if gamma.m[(r, r)] <= tolerance::ENTROPY_ARGUMENT_CUTOFF {
            return Err(Error::DegenerateMeasurement);
        }
    }

    let a = DMatrix::from_fn(kept_rows.len(), kept_rows.len(), |i, j| {
        gamma.m[(kept_rows[i], kept_rows[j])]
    });
    let b = DMatrix::from_fn(kept_rows.len(), meas_rows.len(), |i, j| {
        gamma.m[(kept_rows[i], meas_rows[j])]
    });

    let correction = if meas_rows.len() == 1 {
        // single measured quadrature: exact scalar division
        let v = gamma.m[(meas_rows[0], meas_rows[0])];
        &b * b.transpose() / v
    } else {
        let c = DMatrix::from_fn(meas_rows.len(), meas_rows.len(), |i, j| {
            gamma.m[(meas_rows[i], meas_rows[j])]
        });
        let chol = Cholesky::new(c).ok_or(Error::DegenerateMeasurement)?;
        &b * chol.solve(&b.transpose())
    };

    let cond = a - correction;
    let sym = (&cond + cond.transpose()) * 0.5;
    Ok(CovarianceMatrix {
        modes: remaining.len(),
        m: sym,
    })
}
