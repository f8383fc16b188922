//! Seeded multivariate normal sampling.
//!
//! The whole pipeline is pinned so that a (seed, stream id) pair produces
//! the same draws on every platform and every run:
//!
//! 1. ChaCha12 keyed by `seed_from_u64(seed)` with the 64-bit stream id set
//!    via `set_stream` — changing one stream's consumption never perturbs
//!    another stream.
//! 2. Uniforms in [0, 1) from the top 53 bits of each `next_u64`.
//! 3. Standard normals by the Marsaglia polar method (pairs are generated
//!    and the spare is kept for the next call).
//! 4. Multivariate draws as `mu + L * xi` with `L` the lower Cholesky
//!    factor of the covariance.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::KdreError;
use crate::linalg;
use crate::types::{GaussianSpec, SampleSet};

/// One reproducible random stream: a master seed plus a stream id keeping
/// independent draw sequences (such as the X and Y samples) disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    fn rng(self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Sequential standard-normal generator over one seeded stream.
pub struct NormalSource {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(stream: SeededStream) -> Self {
        NormalSource {
            rng: stream.rng(),
            spare: None,
        }
    }

    fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIT_SCALE
    }

    /// Next standard-normal draw (Marsaglia polar method).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.next_unit() - 1.0;
            let v = 2.0 * self.next_unit() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

/// Draws `count` points from N(mu, Sigma) in a fixed order.
pub fn sample_mvn(
    spec: &GaussianSpec,
    count: usize,
    stream: SeededStream,
) -> Result<SampleSet, KdreError> {
    if count == 0 {
        return Err(KdreError::ZeroSampleCount);
    }
    let d = spec.dim();
    let chol = spec.chol_lower();
    let mean = spec.mean().coords();
    let mut source = NormalSource::new(stream);
    let mut data = vec![0.0; count * d];
    let mut xi = vec![0.0; d];
    for p in 0..count {
        for x in xi.iter_mut() {
            *x = source.next_normal();
        }
        let row = &mut data[p * d..(p + 1) * d];
        linalg::lower_times_vec(chol, d, &xi, row);
        for (r, m) in row.iter_mut().zip(mean) {
            *r += m;
        }
    }
    SampleSet::from_flat(d, data)
}
