//! Kernel functions. All three families are nonnegative and integrate to 1
//! over R^dim:
//!
//! * `boxcar`: indicator of the closed unit box `[-1/2, 1/2]^dim`.
//! * `gaussian-radial`: `pi^{-dim/2} * exp(-|z|^2)` — note the exponent has
//!   no 1/2 factor; the `pi^{-dim/2}` constant normalizes it as written.
//! * `gaussian-product`: product of standard-normal densities
//!   `prod_k (2*pi)^{-1/2} * exp(-z_k^2 / 2)`, the default for the indirect
//!   KDE baseline.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::KdreError;

/// Indicator of the closed box `[-1/2, 1/2]^dim`; both endpoints inclusive.
pub fn eval_boxcar(z: &[f64]) -> f64 {
    if z.iter().all(|&v| (-0.5..=0.5).contains(&v)) {
        1.0
    } else {
        0.0
    }
}

/// `pi^{-dim/2} * exp(-|delta|_2^2)`.
pub fn eval_gaussian_radial(delta: &[f64]) -> f64 {
    let sumsq: f64 = delta.iter().map(|v| v * v).sum();
    PI.powf(-0.5 * delta.len() as f64) * (-sumsq).exp()
}

/// `prod_k (2*pi)^{-1/2} * exp(-z_k^2 / 2)`.
pub fn eval_gaussian_product(z: &[f64]) -> f64 {
    let norm = 1.0 / (2.0 * PI).sqrt();
    z.iter().map(|&v| norm * (-0.5 * v * v).exp()).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Boxcar,
    GaussianRadial,
    GaussianProduct,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Boxcar => "boxcar",
            KernelFamily::GaussianRadial => "gaussian-radial",
            KernelFamily::GaussianProduct => "gaussian-product",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = KdreError;

    fn from_str(s: &str) -> Result<Self, KdreError> {
        match s {
            "boxcar" => Ok(KernelFamily::Boxcar),
            "gaussian-radial" => Ok(KernelFamily::GaussianRadial),
            "gaussian-product" => Ok(KernelFamily::GaussianProduct),
            other => Err(KdreError::UnknownKernelFamily(other.to_string())),
        }
    }
}

/// A kernel family pinned to a dimension, with the radial normalization
/// constant precomputed (it sits in a hot loop of the conditional-CDF
/// weights).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
    radial_norm: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self, KdreError> {
        if dim == 0 {
            return Err(KdreError::ZeroKernelDimension);
        }
        Ok(KernelSpec {
            family,
            dim,
            radial_norm: PI.powf(-0.5 * dim as f64),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates the kernel. Panics if `z` does not match the pinned
    /// dimension.
    pub fn eval(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.dim, "kernel dimension mismatch");
        match self.family {
            KernelFamily::Boxcar => eval_boxcar(z),
            KernelFamily::GaussianRadial => {
                let sumsq: f64 = z.iter().map(|v| v * v).sum();
                self.radial_norm * (-sumsq).exp()
            }
            KernelFamily::GaussianProduct => eval_gaussian_product(z),
        }
    }

    /// Supremum of the kernel over R^dim (attained at the origin).
    pub fn sup(&self) -> f64 {
        match self.family {
            KernelFamily::Boxcar => 1.0,
            KernelFamily::GaussianRadial => self.radial_norm,
            KernelFamily::GaussianProduct => (2.0 * PI).powf(-0.5 * self.dim as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn boxcar_values() {
        assert_eq!(eval_boxcar(&[0.2, -0.3]), 1.0);
        assert_eq!(eval_boxcar(&[0.6, 0.0]), 0.0);
        // boundary is inclusive
        assert_eq!(eval_boxcar(&[0.5, 0.5]), 1.0);
        assert_eq!(eval_boxcar(&[-0.5]), 1.0);
    }

    #[test]
    fn gaussian_radial_values() {
        assert_relative_eq!(
            eval_gaussian_radial(&[0.0]),
            0.5641895835477563,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eval_gaussian_radial(&[0.0, 0.0]),
            0.3183098861837907,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eval_gaussian_radial(&[1.0]),
            0.20755374871029736,
            max_relative = 1e-14
        );
    }

    #[test]
    fn gaussian_product_values() {
        assert_relative_eq!(
            eval_gaussian_product(&[0.0, 0.0]),
            0.15915494309189535,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eval_gaussian_product(&[0.0]),
            0.3989422804014327,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eval_gaussian_product(&[1.0, 1.0]),
            0.05854983152431917,
            max_relative = 1e-14
        );
    }

    #[test]
    fn spec_eval_matches_free_functions() {
        let zs: [&[f64]; 3] = [&[0.3, -0.2], &[0.5, 0.5], &[1.4, -2.2]];
        for family in [
            KernelFamily::Boxcar,
            KernelFamily::GaussianRadial,
            KernelFamily::GaussianProduct,
        ] {
            let spec = KernelSpec::new(family, 2).unwrap();
            for z in zs {
                let direct = match family {
                    KernelFamily::Boxcar => eval_boxcar(z),
                    KernelFamily::GaussianRadial => eval_gaussian_radial(z),
                    KernelFamily::GaussianProduct => eval_gaussian_product(z),
                };
                assert_eq!(spec.eval(z), direct);
            }
        }
    }

    #[test]
    fn nonnegative_on_random_inputs() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        for family in [
            KernelFamily::Boxcar,
            KernelFamily::GaussianRadial,
            KernelFamily::GaussianProduct,
        ] {
            let spec = KernelSpec::new(family, 2).unwrap();
            for _ in 0..10_000 {
                let z = [unit() * 20.0 - 10.0, unit() * 20.0 - 10.0];
                assert!(spec.eval(&z) >= 0.0);
            }
        }
    }

    #[test]
    fn symmetric_under_negation() {
        let zs: [[f64; 2]; 4] = [[0.1, 0.2], [0.5, -0.5], [1.3, 0.0], [2.0, -3.0]];
        for family in [
            KernelFamily::Boxcar,
            KernelFamily::GaussianRadial,
            KernelFamily::GaussianProduct,
        ] {
            let spec = KernelSpec::new(family, 2).unwrap();
            for z in zs {
                let neg = [-z[0], -z[1]];
                assert_eq!(spec.eval(&z), spec.eval(&neg));
            }
        }
    }

    /// Midpoint quadrature of each kernel over [-6, 6]^dim. The step of 0.01
    /// keeps the quadrature error well inside the 0.1% acceptance band.
    fn quadrature(spec: &KernelSpec, step: f64) -> f64 {
        let cells = (12.0 / step).round() as usize;
        match spec.dim() {
            1 => {
                let mut total = 0.0;
                for i in 0..cells {
                    let x = -6.0 + (i as f64 + 0.5) * step;
                    total += spec.eval(&[x]);
                }
                total * step
            }
            2 => {
                let mut total = 0.0;
                for i in 0..cells {
                    let x = -6.0 + (i as f64 + 0.5) * step;
                    for j in 0..cells {
                        let y = -6.0 + (j as f64 + 0.5) * step;
                        total += spec.eval(&[x, y]);
                    }
                }
                total * step * step
            }
            _ => unreachable!("quadrature helper supports dim <= 2"),
        }
    }

    #[test]
    fn normalization_by_quadrature() {
        for family in [
            KernelFamily::Boxcar,
            KernelFamily::GaussianRadial,
            KernelFamily::GaussianProduct,
        ] {
            for dim in [1usize, 2] {
                let spec = KernelSpec::new(family, dim).unwrap();
                let integral = quadrature(&spec, 0.01);
                assert!(
                    (0.999..=1.001).contains(&integral),
                    "{family} dim {dim}: integral {integral}"
                );
            }
        }
    }

    #[test]
    fn suprema() {
        assert_eq!(KernelSpec::new(KernelFamily::Boxcar, 2).unwrap().sup(), 1.0);
        let radial = KernelSpec::new(KernelFamily::GaussianRadial, 2).unwrap();
        assert_relative_eq!(radial.sup(), 1.0 / PI, max_relative = 1e-15);
        // the supremum is attained at the origin
        assert_eq!(radial.eval(&[0.0, 0.0]), radial.sup());
        let product = KernelSpec::new(KernelFamily::GaussianProduct, 2).unwrap();
        assert_relative_eq!(product.sup(), 1.0 / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    #[should_panic(expected = "kernel dimension mismatch")]
    fn dimension_mismatch_panics() {
        let spec = KernelSpec::new(KernelFamily::Boxcar, 2).unwrap();
        spec.eval(&[0.0]);
    }

    #[test]
    fn family_names_round_trip() {
        for family in [
            KernelFamily::Boxcar,
            KernelFamily::GaussianRadial,
            KernelFamily::GaussianProduct,
        ] {
            assert_eq!(family.name().parse::<KernelFamily>().unwrap(), family);
        }
        assert!("epanechnikov".parse::<KernelFamily>().is_err());
    }
}
