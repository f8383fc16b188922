//! Shared domain types: points, samples, distribution and grid
//! specifications, and the evaluated ratio field. No estimation logic
//! lives here.
//!
//! Everything is immutable after construction and safe to share across
//! threads for concurrent reads.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use crate::error::KdreError;
use crate::linalg;

/// A point in R^d. Coordinates are finite and there is at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, KdreError> {
        if coords.is_empty() {
            return Err(KdreError::EmptyPoint);
        }
        for (index, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(KdreError::NonFiniteCoordinate { index });
            }
        }
        Ok(Point { coords })
    }

    /// Construction for coordinates already known to be finite.
    pub(crate) fn from_checked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.coords[k]
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

/// An ordered collection of points of one dimension, stored row-major.
///
/// Order is preserved exactly as generated or loaded; nothing in the crate
/// ever reorders a sample, so seeded runs stay reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn from_points(points: &[Point]) -> Result<Self, KdreError> {
        if points.is_empty() {
            return Err(KdreError::EmptySample);
        }
        let dim = points[0].dim();
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(KdreError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            data.extend_from_slice(p.coords());
        }
        Ok(SampleSet { dim, data })
    }

    /// Builds a sample from `len * dim` coordinates in row-major order.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self, KdreError> {
        if dim == 0 {
            return Err(KdreError::EmptyPoint);
        }
        if data.is_empty() {
            return Err(KdreError::EmptySample);
        }
        if data.len() % dim != 0 {
            return Err(KdreError::RaggedSample {
                len: data.len(),
                dim,
            });
        }
        if let Some(index) = data.iter().position(|c| !c.is_finite()) {
            return Err(KdreError::NonFiniteCoordinate { index });
        }
        Ok(SampleSet { dim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        // never true for a constructed value
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Reorders coordinates of every point: new coordinate `k` is old
    /// coordinate `order[k]`. `order` must be a permutation of `0..dim`.
    pub fn permute_coords(&self, order: &[usize]) -> Result<SampleSet, KdreError> {
        validate_coordinate_order(order, self.dim)?;
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            data.extend(order.iter().map(|&k| row[k]));
        }
        Ok(SampleSet {
            dim: self.dim,
            data,
        })
    }
}

pub(crate) fn validate_coordinate_order(order: &[usize], dim: usize) -> Result<(), KdreError> {
    let mut seen = vec![false; dim];
    let ok = order.len() == dim
        && order.iter().all(|&k| {
            if k >= dim || seen[k] {
                false
            } else {
                seen[k] = true;
                true
            }
        });
    if ok {
        Ok(())
    } else {
        Err(KdreError::InvalidCoordinateOrder {
            order: order.to_vec(),
            dim,
        })
    }
}

/// Mean vector and SPD covariance of a multivariate normal distribution.
///
/// Acceptance of the covariance is exactly "the Cholesky factorization
/// succeeds"; the lower factor is kept since sampling and density
/// evaluation both need it.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Point,
    cov: Vec<f64>,
    chol: Vec<f64>,
}

impl GaussianSpec {
    pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

    pub fn new(mean: Point, cov_rows: &[Vec<f64>]) -> Result<Self, KdreError> {
        let dim = mean.dim();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in cov_rows {
            flat.extend_from_slice(row);
        }
        if cov_rows.len() != dim || flat.len() != dim * dim {
            return Err(KdreError::CovarianceShape {
                dim,
                len: flat.len(),
            });
        }
        Self::from_flat(mean, flat)
    }

    /// `cov` is the d*d covariance in row-major order.
    pub fn from_flat(mean: Point, cov: Vec<f64>) -> Result<Self, KdreError> {
        let dim = mean.dim();
        if cov.len() != dim * dim {
            return Err(KdreError::CovarianceShape {
                dim,
                len: cov.len(),
            });
        }
        if let Some(index) = cov.iter().position(|c| !c.is_finite()) {
            return Err(KdreError::NonFiniteCoordinate { index });
        }
        for i in 0..dim {
            for j in 0..i {
                if (cov[i * dim + j] - cov[j * dim + i]).abs() > Self::SYMMETRY_TOLERANCE {
                    return Err(KdreError::CovarianceNotSymmetric { i, j });
                }
            }
        }
        let chol = linalg::cholesky_lower(&cov, dim)
            .ok_or(KdreError::CovarianceNotPositiveDefinite)?;
        Ok(GaussianSpec { mean, cov, chol })
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn mean(&self) -> &Point {
        &self.mean
    }

    pub fn cov_element(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim() + j]
    }

    /// Row-major lower Cholesky factor of the covariance.
    pub fn chol_lower(&self) -> &[f64] {
        &self.chol
    }
}

/// Main kernel bandwidth `h` plus the per-level smoothing parameters
/// `epsilon_1..epsilon_{d-1}` of the conditional-CDF weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSpec {
    h: f64,
    epsilons: Vec<f64>,
}

impl BandwidthSpec {
    pub fn new(h: f64, epsilons: Vec<f64>) -> Result<Self, KdreError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(KdreError::NonPositiveBandwidth { name: "h", value: h });
        }
        for &e in &epsilons {
            if !(e > 0.0) || !e.is_finite() {
                return Err(KdreError::NonPositiveBandwidth {
                    name: "epsilon",
                    value: e,
                });
            }
        }
        Ok(BandwidthSpec { h, epsilons })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    /// Dimension implied by the spec: one epsilon per level above the first.
    pub fn dim(&self) -> usize {
        self.epsilons.len() + 1
    }
}

/// A rectangular evaluation lattice: inclusive bounds per axis and the
/// number of points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Point,
    upper: Point,
    counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Point, upper: Point, counts: Vec<usize>) -> Result<Self, KdreError> {
        let dim = lower.dim();
        if upper.dim() != dim {
            return Err(KdreError::DimensionMismatch {
                expected: dim,
                got: upper.dim(),
            });
        }
        if counts.len() != dim {
            return Err(KdreError::DimensionMismatch {
                expected: dim,
                got: counts.len(),
            });
        }
        for axis in 0..dim {
            if counts[axis] == 0 {
                return Err(KdreError::GridCounts { axis });
            }
            if !(lower[axis] < upper[axis]) {
                return Err(KdreError::GridBounds { axis });
            }
        }
        Ok(GridSpec {
            lower,
            upper,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Total lattice size, i.e. the product of the per-axis counts.
    pub fn size(&self) -> usize {
        self.counts.iter().product()
    }

    /// Value of axis `axis` at `index`. Both endpoints are returned exactly;
    /// interior points are interpolated. An axis with a single point sits at
    /// the lower bound.
    pub fn axis_value(&self, axis: usize, index: usize) -> f64 {
        let c = self.counts[axis];
        debug_assert!(index < c);
        if index == 0 {
            return self.lower[axis];
        }
        if index + 1 == c {
            return self.upper[axis];
        }
        let t = index as f64 / (c - 1) as f64;
        self.lower[axis] + (self.upper[axis] - self.lower[axis]) * t
    }

    /// All lattice points in row-major order with the last axis varying
    /// fastest. This is the canonical cell order for fields and CSV output.
    pub fn lattice_points(&self) -> Vec<Point> {
        let d = self.dim();
        let total = self.size();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let coords = (0..d).map(|k| self.axis_value(k, idx[k])).collect();
            points.push(Point::from_checked(coords));
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        points
    }
}

/// Named output channel of a ratio field. The ordering is the canonical
/// column order in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    True,
    Direct,
    Indirect,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::True, Channel::Direct, Channel::Indirect];

    pub fn name(self) -> &'static str {
        match self {
            Channel::True => "true",
            Channel::Direct => "direct",
            Channel::Indirect => "indirect",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = KdreError;

    fn from_str(s: &str) -> Result<Self, KdreError> {
        match s {
            "true" => Ok(Channel::True),
            "direct" => Ok(Channel::Direct),
            "indirect" => Ok(Channel::Indirect),
            other => Err(KdreError::UnknownChannel(other.to_string())),
        }
    }
}

/// Per-cell status of a ratio field.
///
/// `divide_by_zero` marks an indirect estimate whose denominator KDE was
/// zero; `weight_fallback` marks a direct estimate whose conditional-CDF
/// weights degenerated to uniform. A flag only disqualifies the channel it
/// belongs to (see [`CellFlags::ok_for`]).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellFlags {
    pub divide_by_zero: bool,
    pub weight_fallback: bool,
}

impl CellFlags {
    pub fn is_ok(self) -> bool {
        !self.divide_by_zero && !self.weight_fallback
    }

    /// Whether the cell is usable for the given channel.
    pub fn ok_for(self, channel: Channel) -> bool {
        match channel {
            Channel::True => true,
            Channel::Direct => !self.weight_fallback,
            Channel::Indirect => !self.divide_by_zero,
        }
    }

    /// CSV token list: `ok`, or flag names joined by `;`.
    pub fn label(self) -> String {
        let mut tokens = Vec::new();
        if self.divide_by_zero {
            tokens.push("divide-by-zero");
        }
        if self.weight_fallback {
            tokens.push("weight-fallback");
        }
        if tokens.is_empty() {
            "ok".to_string()
        } else {
            tokens.join(";")
        }
    }
}

/// Estimates attached to a rectangular evaluation grid: one value vector per
/// channel in the lattice order of [`GridSpec::lattice_points`], plus
/// per-cell flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioField {
    grid: GridSpec,
    channels: BTreeMap<Channel, Vec<f64>>,
    flags: Vec<CellFlags>,
}

impl RatioField {
    pub fn new(
        grid: GridSpec,
        channels: BTreeMap<Channel, Vec<f64>>,
        flags: Vec<CellFlags>,
    ) -> Result<Self, KdreError> {
        let size = grid.size();
        if flags.len() != size {
            return Err(KdreError::FlagLength {
                expected: size,
                got: flags.len(),
            });
        }
        for (&channel, values) in &channels {
            if values.len() != size {
                return Err(KdreError::ChannelLength {
                    channel: channel.name(),
                    expected: size,
                    got: values.len(),
                });
            }
            for (index, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(KdreError::NonFiniteChannelValue {
                        channel: channel.name(),
                        index,
                    });
                }
                // true and direct estimates are nonnegative wherever usable
                if matches!(channel, Channel::True | Channel::Direct)
                    && flags[index].ok_for(channel)
                    && v < 0.0
                {
                    return Err(KdreError::NegativeChannelValue {
                        channel: channel.name(),
                        index,
                    });
                }
            }
        }
        Ok(RatioField {
            grid,
            channels,
            flags,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn channel(&self, channel: Channel) -> Option<&[f64]> {
        self.channels.get(&channel).map(Vec::as_slice)
    }

    pub fn channels(&self) -> impl Iterator<Item = (Channel, &[f64])> {
        self.channels.iter().map(|(&c, v)| (c, v.as_slice()))
    }

    pub fn channel_list(&self) -> Vec<Channel> {
        self.channels.keys().copied().collect()
    }

    pub fn flags(&self) -> &[CellFlags] {
        &self.flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn point_rejects_non_finite_and_empty() {
        assert_eq!(Point::new(vec![]), Err(KdreError::EmptyPoint));
        assert_eq!(
            Point::new(vec![0.0, f64::NAN]),
            Err(KdreError::NonFiniteCoordinate { index: 1 })
        );
        assert_eq!(
            Point::new(vec![f64::INFINITY]),
            Err(KdreError::NonFiniteCoordinate { index: 0 })
        );
    }

    #[test]
    fn sample_set_shape_checks() {
        assert_eq!(
            SampleSet::from_flat(2, vec![1.0, 2.0, 3.0]),
            Err(KdreError::RaggedSample { len: 3, dim: 2 })
        );
        assert_eq!(SampleSet::from_flat(1, vec![]), Err(KdreError::EmptySample));
        let s = SampleSet::from_flat(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn sample_set_permutes_coordinates() {
        let s = SampleSet::from_flat(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let p = s.permute_coords(&[2, 0, 1]).unwrap();
        assert_eq!(p.row(0), &[3.0, 1.0, 2.0]);
        assert_eq!(p.row(1), &[6.0, 4.0, 5.0]);
        assert!(s.permute_coords(&[0, 0, 1]).is_err());
        assert!(s.permute_coords(&[0, 1]).is_err());
    }

    #[test]
    fn gaussian_spec_validates_symmetry_and_spd() {
        let mean = pt(&[0.0, 0.0]);
        assert!(GaussianSpec::new(mean.clone(), &[vec![1.0, 0.2], vec![0.2, 1.0]]).is_ok());
        assert_eq!(
            GaussianSpec::new(mean.clone(), &[vec![1.0, 0.5], vec![0.2, 1.0]]),
            Err(KdreError::CovarianceNotSymmetric { i: 1, j: 0 })
        );
        // asymmetry below tolerance is accepted
        assert!(
            GaussianSpec::new(mean.clone(), &[vec![1.0, 0.2 + 5e-13], vec![0.2, 1.0]]).is_ok()
        );
        assert_eq!(
            GaussianSpec::new(mean, &[vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(KdreError::CovarianceNotPositiveDefinite)
        );
    }

    #[test]
    fn bandwidth_spec_validates_positivity() {
        assert!(BandwidthSpec::new(0.1, vec![0.1]).is_ok());
        assert!(BandwidthSpec::new(0.0, vec![]).is_err());
        assert!(BandwidthSpec::new(0.1, vec![-1.0]).is_err());
        assert!(BandwidthSpec::new(f64::NAN, vec![]).is_err());
        assert_eq!(BandwidthSpec::new(0.1, vec![0.2, 0.3]).unwrap().dim(), 3);
    }

    #[test]
    fn lattice_matches_published_grid() {
        let grid = GridSpec::new(
            pt(&[-1.5, -1.5]),
            pt(&[1.5, 1.5]),
            vec![15, 15],
        )
        .unwrap();
        let points = grid.lattice_points();
        assert_eq!(points.len(), 225);
        assert_eq!(points[0].coords(), &[-1.5, -1.5]);
        assert_eq!(points[224].coords(), &[1.5, 1.5]);
        // spacing 3/14 on both axes
        let spacing = 3.0 / 14.0;
        assert!((grid.axis_value(0, 1) - (-1.5 + spacing)).abs() < 1e-12);
    }

    #[test]
    fn lattice_univariate_endpoints() {
        let grid = GridSpec::new(pt(&[0.0]), pt(&[1.0]), vec![2]).unwrap();
        let points = grid.lattice_points();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].coords(), &[0.0]);
        assert_eq!(points[1].coords(), &[1.0]);
    }

    #[test]
    fn lattice_order_is_last_axis_fastest() {
        let grid = GridSpec::new(pt(&[0.0, 0.0]), pt(&[1.0, 1.0]), vec![3, 2]).unwrap();
        let points: Vec<Vec<f64>> = grid
            .lattice_points()
            .into_iter()
            .map(|p| p.coords().to_vec())
            .collect();
        assert_eq!(
            points,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![0.5, 0.0],
                vec![0.5, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ]
        );
    }

    #[test]
    fn single_count_axis_sits_at_lower_bound() {
        let grid = GridSpec::new(pt(&[-1.0, 2.0]), pt(&[1.0, 3.0]), vec![1, 2]).unwrap();
        let points = grid.lattice_points();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].coords(), &[-1.0, 2.0]);
        assert_eq!(points[1].coords(), &[-1.0, 3.0]);
    }

    #[test]
    fn grid_rejects_bad_bounds() {
        assert_eq!(
            GridSpec::new(pt(&[0.0]), pt(&[0.0]), vec![3]),
            Err(KdreError::GridBounds { axis: 0 })
        );
        assert_eq!(
            GridSpec::new(pt(&[0.0]), pt(&[1.0]), vec![0]),
            Err(KdreError::GridCounts { axis: 0 })
        );
    }

    #[test]
    fn channel_round_trips_names() {
        for c in Channel::ALL {
            assert_eq!(c.name().parse::<Channel>().unwrap(), c);
        }
        assert!("bogus".parse::<Channel>().is_err());
    }

    #[test]
    fn cell_flags_labels() {
        assert_eq!(CellFlags::default().label(), "ok");
        let f = CellFlags {
            divide_by_zero: true,
            weight_fallback: false,
        };
        assert_eq!(f.label(), "divide-by-zero");
        let both = CellFlags {
            divide_by_zero: true,
            weight_fallback: true,
        };
        assert_eq!(both.label(), "divide-by-zero;weight-fallback");
        assert!(both.ok_for(Channel::True));
        assert!(!both.ok_for(Channel::Direct));
        assert!(!both.ok_for(Channel::Indirect));
    }

    #[test]
    fn ratio_field_validates_lengths() {
        let grid = GridSpec::new(pt(&[0.0]), pt(&[1.0]), vec![3]).unwrap();
        let mut channels = BTreeMap::new();
        channels.insert(Channel::True, vec![1.0, 2.0]);
        let err = RatioField::new(grid.clone(), channels, vec![CellFlags::default(); 3]);
        assert!(matches!(err, Err(KdreError::ChannelLength { .. })));
        let err = RatioField::new(grid, BTreeMap::new(), vec![CellFlags::default(); 2]);
        assert!(matches!(err, Err(KdreError::FlagLength { .. })));
    }

    #[test]
    fn ratio_field_rejects_negative_true_values() {
        let grid = GridSpec::new(pt(&[0.0]), pt(&[1.0]), vec![2]).unwrap();
        let mut channels = BTreeMap::new();
        channels.insert(Channel::True, vec![1.0, -0.5]);
        let err = RatioField::new(grid, channels, vec![CellFlags::default(); 2]);
        assert!(matches!(err, Err(KdreError::NegativeChannelValue { .. })));
    }
}
