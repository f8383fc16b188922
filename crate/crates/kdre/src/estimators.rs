//! The ratio estimators.
//!
//! The direct estimator transforms every point through the fitted
//! conditional-CDF vector and averages a kernel over the transformed
//! differences:
//!
//! ```text
//! r_direct(z) = (1 / (n h^d)) * sum_i K((H(z) - H(X_i)) / h)
//! ```
//!
//! The transformed sample values `H(X_i)` do not depend on z, so they are
//! computed once per fit and cached; a grid evaluation then costs one
//! conditional-CDF vector per grid point plus `n` kernel terms. Since every
//! `H` component lies in [0, 1], each kernel argument coordinate lies in
//! `[-1/h, 1/h]`, and the estimate is bounded by `sup K / h^d`.
//!
//! The indirect baseline is the quotient of two kernel density estimates;
//! a zero denominator is surfaced as a flag, never a crash.
//!
//! All inner sums run in fixed index order so results are bit-identical
//! regardless of how callers parallelize over evaluation points.

use std::collections::BTreeMap;

use crate::cdf::ConditionalCdfModel;
use crate::error::KdreError;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::oracle::{true_ratio, GaussianPair};
use crate::types::{
    validate_coordinate_order, BandwidthSpec, CellFlags, Channel, GridSpec, RatioField, SampleSet,
};

fn pow_uint(base: f64, exp: usize) -> f64 {
    let mut out = 1.0;
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Kernel density estimate `(1 / (N h^d)) * sum_i K((z - Z_i) / h)`.
pub fn kde(sample: &SampleSet, kernel: &KernelSpec, h: f64, z: &[f64]) -> f64 {
    let d = sample.dim();
    assert_eq!(z.len(), d, "point dimension mismatch");
    assert_eq!(kernel.dim(), d, "kernel dimension mismatch");
    assert!(h > 0.0 && h.is_finite(), "bandwidth must be positive");
    let mut arg = vec![0.0; d];
    let mut sum = 0.0;
    for row in sample.rows() {
        for (k, a) in arg.iter_mut().enumerate() {
            *a = (z[k] - row[k]) / h;
        }
        sum += kernel.eval(&arg);
    }
    sum / (sample.len() as f64 * pow_uint(h, d))
}

/// The direct density-ratio estimator with its per-fit cache of transformed
/// X values. Immutable after fitting and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectKdre {
    x: SampleSet,
    cdf_model: ConditionalCdfModel,
    main_kernel: KernelSpec,
    h: f64,
    h_pow_d: f64,
    coord_order: Option<Vec<usize>>,
    // n x d row-major: H(X_i) for each (possibly reordered) X_i
    hx_cache: Vec<f64>,
}

impl DirectKdre {
    /// Fits the conditional-CDF model on `y` and precomputes `H(X_i)` for
    /// every point of `x`.
    pub fn fit(
        x: SampleSet,
        y: SampleSet,
        bandwidths: &BandwidthSpec,
        main_kernel: KernelSpec,
        weight_family: KernelFamily,
    ) -> Result<Self, KdreError> {
        Self::fit_inner(x, y, bandwidths, main_kernel, weight_family, None)
    }

    /// Like [`DirectKdre::fit`], but the conditional factorization runs in
    /// the given coordinate order (a permutation of `0..d`): level `l`
    /// conditions on original coordinates `order[0..l-1]`. The estimator is
    /// order-dependent, and evaluation points are reordered internally, so
    /// callers keep passing points in original coordinates.
    pub fn fit_with_coordinate_order(
        x: SampleSet,
        y: SampleSet,
        bandwidths: &BandwidthSpec,
        main_kernel: KernelSpec,
        weight_family: KernelFamily,
        order: &[usize],
    ) -> Result<Self, KdreError> {
        validate_coordinate_order(order, x.dim())?;
        Self::fit_inner(
            x,
            y,
            bandwidths,
            main_kernel,
            weight_family,
            Some(order.to_vec()),
        )
    }

    fn fit_inner(
        x: SampleSet,
        y: SampleSet,
        bandwidths: &BandwidthSpec,
        main_kernel: KernelSpec,
        weight_family: KernelFamily,
        order: Option<Vec<usize>>,
    ) -> Result<Self, KdreError> {
        let d = x.dim();
        if y.dim() != d {
            return Err(KdreError::DimensionMismatch {
                expected: d,
                got: y.dim(),
            });
        }
        if main_kernel.dim() != d {
            return Err(KdreError::DimensionMismatch {
                expected: d,
                got: main_kernel.dim(),
            });
        }
        if bandwidths.dim() != d {
            return Err(KdreError::EpsilonCount {
                dim: d,
                expected: d - 1,
                got: bandwidths.epsilons().len(),
            });
        }
        let (x, y) = match &order {
            Some(ord) => (x.permute_coords(ord)?, y.permute_coords(ord)?),
            None => (x, y),
        };
        let cdf_model = ConditionalCdfModel::fit(y, bandwidths.epsilons(), weight_family)?;
        let mut hx_cache = Vec::with_capacity(x.len() * d);
        for row in x.rows() {
            hx_cache.extend(cdf_model.cdf_vector(row));
        }
        Ok(DirectKdre {
            x,
            cdf_model,
            main_kernel,
            h: bandwidths.h(),
            h_pow_d: pow_uint(bandwidths.h(), d),
            coord_order: order,
            hx_cache,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// The fitted X sample, in the coordinate order used internally.
    pub fn x_sample(&self) -> &SampleSet {
        &self.x
    }

    pub fn cdf_model(&self) -> &ConditionalCdfModel {
        &self.cdf_model
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn main_kernel(&self) -> &KernelSpec {
        &self.main_kernel
    }

    pub fn coordinate_order(&self) -> Option<&[usize]> {
        self.coord_order.as_deref()
    }

    /// Cached `H(X_i)`.
    pub fn hx_cached(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.hx_cache[i * d..(i + 1) * d]
    }

    /// Upper bound of the estimate: `sup K / h^d`.
    pub fn bound(&self) -> f64 {
        self.main_kernel.sup() / self.h_pow_d
    }

    /// Estimate at `z`, plus a flag that is true when the conditional-CDF
    /// weights fell back to uniform at any level while transforming `z`.
    pub fn estimate_flagged(&self, z: &[f64]) -> (f64, bool) {
        let d = self.dim();
        assert_eq!(z.len(), d, "point dimension mismatch");
        let reordered;
        let z = match &self.coord_order {
            Some(order) => {
                reordered = order.iter().map(|&k| z[k]).collect::<Vec<f64>>();
                reordered.as_slice()
            }
            None => z,
        };
        let (h_z, fallback) = self.cdf_model.cdf_vector_flagged(z);
        let mut arg = vec![0.0; d];
        let mut sum = 0.0;
        for i in 0..self.x.len() {
            let cached = &self.hx_cache[i * d..(i + 1) * d];
            for (k, a) in arg.iter_mut().enumerate() {
                *a = (h_z[k] - cached[k]) / self.h;
            }
            sum += self.main_kernel.eval(&arg);
        }
        (sum / (self.x.len() as f64 * self.h_pow_d), fallback)
    }

    pub fn estimate(&self, z: &[f64]) -> f64 {
        self.estimate_flagged(z).0
    }
}

/// The indirect baseline: the quotient of two kernel density estimates with
/// per-sample bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct IndirectKdre {
    x: SampleSet,
    y: SampleSet,
    kde_kernel: KernelSpec,
    h_x: f64,
    h_y: f64,
}

impl IndirectKdre {
    pub fn fit(
        x: SampleSet,
        y: SampleSet,
        kde_kernel: KernelSpec,
        h_x: f64,
        h_y: f64,
    ) -> Result<Self, KdreError> {
        let d = x.dim();
        if y.dim() != d {
            return Err(KdreError::DimensionMismatch {
                expected: d,
                got: y.dim(),
            });
        }
        if kde_kernel.dim() != d {
            return Err(KdreError::DimensionMismatch {
                expected: d,
                got: kde_kernel.dim(),
            });
        }
        for (name, value) in [("h_x", h_x), ("h_y", h_y)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(KdreError::NonPositiveBandwidth { name, value });
            }
        }
        Ok(IndirectKdre {
            x,
            y,
            kde_kernel,
            h_x,
            h_y,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `f_hat(z) / g_hat(z)`. When the denominator estimate is exactly zero
    /// the value is 0 and the flag is true; such cells are excluded from
    /// error metrics downstream.
    pub fn estimate(&self, z: &[f64]) -> (f64, bool) {
        let numerator = kde(&self.x, &self.kde_kernel, self.h_x, z);
        let denominator = kde(&self.y, &self.kde_kernel, self.h_y, z);
        if denominator == 0.0 {
            (0.0, true)
        } else {
            (numerator / denominator, false)
        }
    }
}

/// Which channels to evaluate over a grid; absent sources are skipped.
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldSources<'a> {
    pub truth: Option<&'a GaussianPair>,
    pub direct: Option<&'a DirectKdre>,
    pub indirect: Option<&'a IndirectKdre>,
}

/// Evaluates the requested channels at every lattice point of `grid`.
/// Per-cell flags from the estimators are collected into the field.
pub fn evaluate_field(sources: &FieldSources, grid: &GridSpec) -> Result<RatioField, KdreError> {
    let d = grid.dim();
    for dim in [
        sources.truth.map(|t| t.dim()),
        sources.direct.map(|m| m.dim()),
        sources.indirect.map(|m| m.dim()),
    ]
    .into_iter()
    .flatten()
    {
        if dim != d {
            return Err(KdreError::DimensionMismatch {
                expected: d,
                got: dim,
            });
        }
    }
    let points = grid.lattice_points();
    let mut flags = vec![CellFlags::default(); points.len()];
    let mut channels: BTreeMap<Channel, Vec<f64>> = BTreeMap::new();
    if let Some(pair) = sources.truth {
        let values = points
            .iter()
            .map(|z| true_ratio(pair, z.coords()))
            .collect();
        channels.insert(Channel::True, values);
    }
    if let Some(model) = sources.direct {
        let mut values = Vec::with_capacity(points.len());
        for (i, z) in points.iter().enumerate() {
            let (value, fallback) = model.estimate_flagged(z.coords());
            flags[i].weight_fallback |= fallback;
            values.push(value);
        }
        channels.insert(Channel::Direct, values);
    }
    if let Some(model) = sources.indirect {
        let mut values = Vec::with_capacity(points.len());
        for (i, z) in points.iter().enumerate() {
            let (value, divide_by_zero) = model.estimate(z.coords());
            flags[i].divide_by_zero |= divide_by_zero;
            values.push(value);
        }
        channels.insert(Channel::Indirect, values);
    }
    RatioField::new(grid.clone(), channels, flags)
}
