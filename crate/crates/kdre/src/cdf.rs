//! Empirical CDF and the conditional-CDF estimator fitted on the Y sample.
//!
//! The estimator maps a point z to the vector
//! `(H_1(z), ..., H_d(z))`, where `H_l(z)` is a kernel-weighted fraction of
//! the Y points whose l-th coordinate is at most `z_l`:
//!
//! ```text
//! H_l(z) = sum_j w_{l,j}(z) * 1(Y_{j,l} <= z_l)
//! ```
//!
//! Level 1 uses uniform weights `1/m`, so `H_1` is the plain empirical CDF
//! of the first coordinate. Levels `l >= 2` use Nadaraya-Watson weights
//! proportional to `K((Y_j - z)_{1..l-1} / eps_{l-1})`, normalized to sum
//! to one; if every kernel value underflows, the weights fall back to
//! uniform and the evaluation is flagged.
//!
//! Internally `H_l` is computed as the single quotient
//! `sum_{j: indicator} k_j / sum_j k_j` of the raw kernel values. This is
//! Nadaraya-Watson weighting written with one division, and since a partial
//! sum of nonnegative addends (taken in the same index order) never exceeds
//! the full sum even in floating point, the result is guaranteed to stay in
//! `[0, 1]` and to be monotone in `z_l`.

use crate::error::KdreError;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::types::SampleSet;

/// Kernel values at or below this are treated as exact zeros before
/// normalization, giving underflow a defined behavior.
pub const WEIGHT_UNDERFLOW_FLOOR: f64 = 1e-300;

/// Empirical CDF of a univariate sample: `(1/m) * #{j : Y_j <= z}`.
/// Right-continuous, ties counted inclusively.
pub fn ecdf(sample: &SampleSet, z: f64) -> f64 {
    assert_eq!(sample.dim(), 1, "ecdf requires a univariate sample");
    let count = sample.rows().filter(|row| row[0] <= z).count();
    count as f64 / sample.len() as f64
}

/// First `level - 1` coordinates of `yj - z`, the offset fed to the
/// weighting kernel of level `level`. Requires `2 <= level <= d`.
pub fn delta_projection(yj: &[f64], z: &[f64], level: usize) -> Vec<f64> {
    assert_eq!(yj.len(), z.len(), "point dimensions differ");
    assert!(
        (2..=yj.len()).contains(&level),
        "level must lie in 2..=d"
    );
    (0..level - 1).map(|k| yj[k] - z[k]).collect()
}

/// Normalized weights for one evaluation point and level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// One nonnegative weight per Y point; sums to 1 (within rounding).
    pub weights: Vec<f64>,
    /// True when the normalizer underflowed to zero and the weights were
    /// replaced by the uniform distribution.
    pub fallback: bool,
}

/// The conditional-CDF estimator fitted on a Y sample.
///
/// Immutable after fitting; evaluations at distinct points may run
/// concurrently. Sums over the sample always run in index order, so results
/// do not depend on any outer parallelism.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCdfModel {
    y: SampleSet,
    epsilons: Vec<f64>,
    // weight kernel of dimension l-1 for levels l = 2..=d
    level_kernels: Vec<KernelSpec>,
}

impl ConditionalCdfModel {
    /// Fits the model. `epsilons` must hold exactly `d - 1` positive
    /// smoothing parameters (empty for d = 1).
    pub fn fit(
        y: SampleSet,
        epsilons: &[f64],
        weight_family: KernelFamily,
    ) -> Result<Self, KdreError> {
        let d = y.dim();
        if epsilons.len() != d - 1 {
            return Err(KdreError::EpsilonCount {
                dim: d,
                expected: d - 1,
                got: epsilons.len(),
            });
        }
        for &e in epsilons {
            if !(e > 0.0) || !e.is_finite() {
                return Err(KdreError::NonPositiveBandwidth {
                    name: "epsilon",
                    value: e,
                });
            }
        }
        let level_kernels = (2..=d)
            .map(|level| KernelSpec::new(weight_family, level - 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ConditionalCdfModel {
            y,
            epsilons: epsilons.to_vec(),
            level_kernels,
        })
    }

    pub fn dim(&self) -> usize {
        self.y.dim()
    }

    pub fn y_sample(&self) -> &SampleSet {
        &self.y
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    fn assert_level(&self, level: usize) {
        assert!(
            (1..=self.dim()).contains(&level),
            "level must lie in 1..=d"
        );
    }

    /// Raw (unnormalized) kernel value for point `j` at `level >= 2`, with
    /// underflow floored to zero. `buf` is scratch of length `level - 1`.
    fn raw_weight(&self, z: &[f64], level: usize, j: usize, buf: &mut [f64]) -> f64 {
        let eps = self.epsilons[level - 2];
        let row = self.y.row(j);
        for (k, b) in buf.iter_mut().enumerate() {
            *b = (row[k] - z[k]) / eps;
        }
        let v = self.level_kernels[level - 2].eval(buf);
        if v < WEIGHT_UNDERFLOW_FLOOR {
            0.0
        } else {
            v
        }
    }

    /// Nadaraya-Watson weights at `z` for the given level. Level 1 is
    /// uniform by definition.
    pub fn nw_weights(&self, z: &[f64], level: usize) -> WeightVector {
        self.assert_level(level);
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let m = self.y.len();
        let uniform = || vec![1.0 / m as f64; m];
        if level == 1 {
            return WeightVector {
                weights: uniform(),
                fallback: false,
            };
        }
        let mut buf = vec![0.0; level - 1];
        let mut weights: Vec<f64> = (0..m)
            .map(|j| self.raw_weight(z, level, j, &mut buf))
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            WeightVector {
                weights: uniform(),
                fallback: true,
            }
        } else {
            for w in weights.iter_mut() {
                *w /= total;
            }
            WeightVector {
                weights,
                fallback: false,
            }
        }
    }

    /// `H_level(z)` together with the fallback flag of its weights.
    pub fn conditional_cdf_flagged(&self, z: &[f64], level: usize) -> (f64, bool) {
        self.assert_level(level);
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let m = self.y.len();
        let zl = z[level - 1];
        if level == 1 {
            let count = self.y.rows().filter(|row| row[0] <= zl).count();
            return (count as f64 / m as f64, false);
        }
        let mut buf = vec![0.0; level - 1];
        let mut numerator = 0.0;
        let mut total = 0.0;
        let mut indicator_count = 0usize;
        for j in 0..m {
            let w = self.raw_weight(z, level, j, &mut buf);
            total += w;
            if self.y.row(j)[level - 1] <= zl {
                numerator += w;
                indicator_count += 1;
            }
        }
        if total == 0.0 {
            (indicator_count as f64 / m as f64, true)
        } else {
            (numerator / total, false)
        }
    }

    /// `H_level(z)`; a weighted fraction in `[0, 1]`, nondecreasing in the
    /// level's own coordinate.
    pub fn conditional_cdf(&self, z: &[f64], level: usize) -> f64 {
        self.conditional_cdf_flagged(z, level).0
    }

    /// The full vector `(H_1(z), ..., H_d(z))` plus a flag that is true if
    /// any level hit the uniform-weight fallback.
    pub fn cdf_vector_flagged(&self, z: &[f64]) -> (Vec<f64>, bool) {
        let mut fallback = false;
        let values = (1..=self.dim())
            .map(|level| {
                let (v, fb) = self.conditional_cdf_flagged(z, level);
                fallback |= fb;
                v
            })
            .collect();
        (values, fallback)
    }

    pub fn cdf_vector(&self, z: &[f64]) -> Vec<f64> {
        self.cdf_vector_flagged(z).0
    }
}
