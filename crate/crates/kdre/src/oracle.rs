//! Ground truth for Gaussian distribution pairs: closed-form densities, the
//! true density ratio, analytic conditional CDFs, and a seeded Monte-Carlo
//! evaluation of the limiting smoothed integral that the direct estimator
//! converges to. The Monte-Carlo value approximates the density of the
//! transformed variable `V = H(X)` at `H(z)`, which equals the ratio
//! `f(z)/g(z)` — the identity the `check` command validates numerically.

use std::f64::consts::PI;

use crate::error::KdreError;
use crate::kernels::KernelSpec;
use crate::linalg;
use crate::special::std_normal_cdf;
use crate::synth::{sample_mvn, SeededStream};
use crate::types::GaussianSpec;

/// The two Gaussian distributions of an experiment: `f` generates the X
/// sample (numerator), `g` the Y sample (denominator).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPair {
    f: GaussianSpec,
    g: GaussianSpec,
}

impl GaussianPair {
    pub fn new(f: GaussianSpec, g: GaussianSpec) -> Result<Self, KdreError> {
        if f.dim() != g.dim() {
            return Err(KdreError::DimensionMismatch {
                expected: f.dim(),
                got: g.dim(),
            });
        }
        Ok(GaussianPair { f, g })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn f(&self) -> &GaussianSpec {
        &self.f
    }

    pub fn g(&self) -> &GaussianSpec {
        &self.g
    }
}

/// Multivariate normal density, evaluated via a Cholesky solve (the
/// covariance is never inverted explicitly).
pub fn mvn_pdf(spec: &GaussianSpec, z: &[f64]) -> f64 {
    let d = spec.dim();
    assert_eq!(z.len(), d, "point dimension mismatch");
    let chol = spec.chol_lower();
    let mean = spec.mean().coords();
    let mut u: Vec<f64> = (0..d).map(|i| z[i] - mean[i]).collect();
    linalg::forward_solve(chol, d, d, &mut u);
    let quad_form: f64 = u.iter().map(|v| v * v).sum();
    let sqrt_det: f64 = (0..d).map(|i| chol[i * d + i]).product();
    let sqrt_two_pi = (2.0 * PI).sqrt();
    let mut norm = sqrt_det;
    for _ in 0..d {
        norm *= sqrt_two_pi;
    }
    (-0.5 * quad_form).exp() / norm
}

/// The true density ratio `f(z) / g(z)`; strictly positive for Gaussians.
pub fn true_ratio(pair: &GaussianPair, z: &[f64]) -> f64 {
    mvn_pdf(&pair.f, z) / mvn_pdf(&pair.g, z)
}

/// Analytic conditional CDF of coordinate `level` given the first
/// `level - 1` coordinates: `P(Y_level <= z_level | Y_1 = z_1, ...)`.
///
/// The conditional moments come from the Schur complement; the leading
/// block of the stored Cholesky factor is reused, so only two forward
/// solves are needed per call. Level 1 is the plain marginal.
pub fn gaussian_conditional_cdf(spec: &GaussianSpec, z: &[f64], level: usize) -> f64 {
    let d = spec.dim();
    assert_eq!(z.len(), d, "point dimension mismatch");
    assert!((1..=d).contains(&level), "level must lie in 1..=d");
    let mean = spec.mean().coords();
    if level == 1 {
        return std_normal_cdf((z[0] - mean[0]) / spec.cov_element(0, 0).sqrt());
    }
    let p = level - 1;
    let chol = spec.chol_lower();
    // q = L_p^{-1} b with b the cross-covariance column, r = L_p^{-1} (z - mu)
    let mut q: Vec<f64> = (0..p).map(|i| spec.cov_element(i, p)).collect();
    let mut r: Vec<f64> = (0..p).map(|i| z[i] - mean[i]).collect();
    linalg::forward_solve(chol, d, p, &mut q);
    linalg::forward_solve(chol, d, p, &mut r);
    let cond_mean = mean[p] + q.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
    let cond_var = spec.cov_element(p, p) - q.iter().map(|a| a * a).sum::<f64>();
    debug_assert!(cond_var > 0.0);
    std_normal_cdf((z[p] - cond_mean) / cond_var.sqrt())
}

/// Monte-Carlo value of the limiting integral
/// `(1/h^d) * E_F[ K((H(z) - H(X)) / h) ]`
/// using the analytic conditional CDFs of `g` (not an estimate) and `draws`
/// points of X sampled from `f` through the given stream. For small `h`
/// this approximates the true ratio at `z`.
///
/// The draw sequence is sequential over one seeded stream and the sum runs
/// in draw order, so a (z, seed) pair always produces the same value.
pub fn mc_limit_integral(
    pair: &GaussianPair,
    z: &[f64],
    kernel: &KernelSpec,
    h: f64,
    draws: usize,
    stream: SeededStream,
) -> f64 {
    let d = pair.dim();
    assert_eq!(z.len(), d, "point dimension mismatch");
    assert_eq!(kernel.dim(), d, "kernel dimension mismatch");
    assert!(h > 0.0 && h.is_finite(), "bandwidth must be positive");
    assert!(draws >= 1, "at least one draw is required");
    let h_z: Vec<f64> = (1..=d)
        .map(|level| gaussian_conditional_cdf(&pair.g, z, level))
        .collect();
    let xs = sample_mvn(&pair.f, draws, stream).expect("draw count checked above");
    let mut arg = vec![0.0; d];
    let mut sum = 0.0;
    for x in xs.rows() {
        for (k, a) in arg.iter_mut().enumerate() {
            let h_x = gaussian_conditional_cdf(&pair.g, x, k + 1);
            *a = (h_z[k] - h_x) / h;
        }
        sum += kernel.eval(&arg);
    }
    let mut h_pow_d = 1.0;
    for _ in 0..d {
        h_pow_d *= h;
    }
    sum / (draws as f64 * h_pow_d)
}
