//! Shared oracles for the integration tests: quadrature of unnormalized
//! log densities, Kolmogorov-Smirnov distances and dense Gaussian algebra.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Critical value of the one-sample KS statistic at significance 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.949 / (n as f64).sqrt()
}

/// Tabulated CDF on a uniform grid, built from an unnormalized log density
/// by the trapezoid rule.
pub struct GridCdf {
    pub lo: f64,
    pub step: f64,
    pub cdf: Vec<f64>,
    /// Normalizing constant on the log scale, relative to `shift`.
    pub log_mass: f64,
}

impl GridCdf {
    pub fn from_log_density(lo: f64, hi: f64, n: usize, log_density: impl Fn(f64) -> f64) -> GridCdf {
        let step = (hi - lo) / (n - 1) as f64;
        let logs: Vec<f64> = (0..n).map(|i| log_density(lo + i as f64 * step)).collect();
        Self::from_log_values(lo, step, &logs)
    }

    pub fn from_log_values(lo: f64, step: f64, logs: &[f64]) -> GridCdf {
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(shift.is_finite(), "log density is -inf on the whole grid");
        let dens: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
        let mut cdf = vec![0.0; dens.len()];
        for i in 1..dens.len() {
            cdf[i] = cdf[i - 1] + 0.5 * step * (dens[i] + dens[i - 1]);
        }
        let total = *cdf.last().unwrap();
        for c in &mut cdf {
            *c /= total;
        }
        GridCdf {
            lo,
            step,
            cdf,
            log_mass: total.ln() + shift,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.step;
        if t <= 0.0 {
            return 0.0;
        }
        let i = t.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        let f = t - i as f64;
        self.cdf[i] * (1.0 - f) + self.cdf[i + 1] * f
    }
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Integration range covering the samples with a margin of one sample span
/// on each side.
pub fn padded_range(samples: &[f64]) -> (f64, f64) {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    (lo - span, hi + span)
}

/// KS distance of `samples` against the density proportional to
/// `exp(log_density)`, integrated over a padded sample range.
pub fn ks_against_density(samples: &[f64], log_density: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = padded_range(samples);
    let grid = GridCdf::from_log_density(lo, hi, 30_001, log_density);
    ks_distance(samples, |x| grid.eval(x))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// AR(1) correlation matrix, row-major.
pub fn ar1(n: usize, rho: f64) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = rho.powi((i as i32 - j as i32).abs());
        }
    }
    a
}

pub fn dmat(n: usize, row_major: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, row_major)
}

/// Conditional of `x` given `d = A x + c + e`, with `x ~ N(0, prior_var I)`
/// and `e ~ N(0, noise)`, by the joint Gaussian and its Schur complement.
pub fn gaussian_posterior(
    prior_var: f64,
    a: &DMatrix<f64>,
    c: &DVector<f64>,
    noise: &DMatrix<f64>,
    d: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let sxx = DMatrix::<f64>::identity(n, n) * prior_var;
    let sxd = &sxx * a.transpose();
    let sdd = a * &sxx * a.transpose() + noise;
    let sdd_inv = sdd.try_inverse().expect("invertible data covariance");
    let gain = &sxd * &sdd_inv;
    let mean = &gain * (d - c);
    let cov = sxx - &gain * sxd.transpose();
    (mean, cov)
}

/// Log density of `N(mean, cov)` at `x`.
pub fn ln_mvn(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    let n = x.len() as f64;
    let chol = cov.clone().cholesky().expect("positive definite covariance");
    let r = x - mean;
    let sol = chol.solve(&r);
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + log_det + r.dot(&sol))
}

pub fn assert_close(a: f64, b: f64, rel: f64, what: &str) {
    let tol = rel * a.abs().max(b.abs()).max(1.0);
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tolerance {tol:e})");
}
