//! Block precomputation and block conditionals against dense Gaussian
//! algebra: the summary-statistic likelihood is written out as a joint
//! Gaussian and conditioned with nalgebra.

mod common;

use common::*;
use mrcorr::ld_reference::{uniform_partition, BlockCorr};
use mrcorr::mr_corr2::{self, BlockData};
use mrcorr::{HarmonizedDataset, SamplerState};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 10;

struct Instance {
    block: BlockData,
    state: SamplerState,
}

fn instance(seed: u64, eta: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let se_x: Vec<f64> = (0..N).map(|_| rng.random_range(0.02..0.05)).collect();
    let se_y: Vec<f64> = (0..N).map(|_| rng.random_range(0.02..0.05)).collect();
    let bx: Vec<f64> = (0..N).map(|_| rng.random_range(-0.2..0.2)).collect();
    let by: Vec<f64> = (0..N).map(|_| rng.random_range(-0.1..0.1)).collect();
    let ds = HarmonizedDataset::from_stats(bx, se_x, by, se_y).unwrap();
    let corr = BlockCorr {
        matrices: vec![ar1(N, 0.4)],
        shrinkage_lambda: 0.0,
    };
    let block = mr_corr2::precompute_blocks(&ds, &uniform_partition(N, N).unwrap(), &corr)
        .unwrap()
        .remove(0);
    let state = SamplerState {
        beta0: rng.random_range(-0.5..0.5),
        beta1: rng.random_range(-1.0..1.0),
        gamma: (0..N).map(|_| rng.random_range(-0.2..0.2)).collect(),
        alpha_tilde: (0..N).map(|_| rng.random_range(-0.05..0.05)).collect(),
        eta: vec![eta],
        sigma2_gamma: rng.random_range(0.005..0.05),
        sigma2_alpha: rng.random_range(0.001..0.01),
        omega: rng.random_range(0.05..0.95),
    };
    Instance { block, state }
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}

fn inv_diag(v: &[f64]) -> DMatrix<f64> {
    diag(&v.iter().map(|x| 1.0 / x).collect::<Vec<_>>())
}

fn vec_of(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

/// `S R S⁻¹`, the map from true effects to expected marginal estimates.
fn transfer(se: &[f64], r: &DMatrix<f64>) -> DMatrix<f64> {
    diag(se) * r * inv_diag(se)
}

fn covariance(se: &[f64], r: &DMatrix<f64>) -> DMatrix<f64> {
    diag(se) * r * diag(se)
}

fn assert_matrix_close(got: &[f64], want: &DMatrix<f64>, rel: f64, what: &str) {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..want.nrows() {
        for j in 0..want.ncols() {
            let g = got[i * want.ncols() + j];
            let w = want[(i, j)];
            assert!((g - w).abs() <= rel * scale, "{what}[{i},{j}]: {g} vs {w}");
        }
    }
}

fn assert_vector_close(got: &[f64], want: &DVector<f64>, rel: f64, what: &str) {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, (g, w)) in got.iter().zip(want.iter()).enumerate() {
        assert!((g - w).abs() <= rel * scale, "{what}[{i}]: {g} vs {w}");
    }
}

#[test]
fn kernels_and_linear_terms_match_dense_products() {
    let Instance { block, .. } = instance(1, false);
    let r = dmat(N, &ar1(N, 0.4));
    let kx = inv_diag(&block.exposure_se) * &r * inv_diag(&block.exposure_se);
    let ky = inv_diag(&block.outcome_se) * &r * inv_diag(&block.outcome_se);
    assert_matrix_close(&block.exposure_kernel, &kx, 1e-10, "exposure kernel");
    assert_matrix_close(&block.outcome_kernel, &ky, 1e-10, "outcome kernel");
    let wx = inv_diag(&block.exposure_se);
    let wy = inv_diag(&block.outcome_se);
    let lx = &wx * &wx * vec_of(&block.exposure_beta);
    let ly = &wy * &wy * vec_of(&block.outcome_beta);
    assert_vector_close(&block.exposure_linear, &lx, 1e-10, "exposure linear");
    assert_vector_close(&block.outcome_linear, &ly, 1e-10, "outcome linear");
    // the cached factor reproduces R
    let l = DMatrix::from_row_slice(N, N, &block.corr_chol);
    let rr = &l * l.transpose();
    assert_matrix_close(rr.as_slice(), &r, 1e-12, "cholesky");
}

#[test]
fn gamma_conditional_matches_joint_gaussian() {
    let r = dmat(N, &ar1(N, 0.4));
    for (seed, eta) in [(2, false), (3, true), (4, true), (5, false)] {
        let Instance { block, state } = instance(seed, eta);
        let slope = if eta { state.beta1 } else { state.beta0 };
        let tx = transfer(&block.exposure_se, &r);
        let ty = transfer(&block.outcome_se, &r);
        let mut a = DMatrix::zeros(2 * N, N);
        a.view_mut((0, 0), (N, N)).copy_from(&tx);
        a.view_mut((N, 0), (N, N)).copy_from(&(&ty * slope));
        let mut c = DVector::zeros(2 * N);
        if eta {
            c.rows_mut(N, N).copy_from(&(&ty * vec_of(&state.alpha_tilde)));
        }
        let mut noise = DMatrix::zeros(2 * N, 2 * N);
        noise.view_mut((0, 0), (N, N)).copy_from(&covariance(&block.exposure_se, &r));
        noise.view_mut((N, N), (N, N)).copy_from(&covariance(&block.outcome_se, &r));
        let mut d = DVector::zeros(2 * N);
        d.rows_mut(0, N).copy_from(&vec_of(&block.exposure_beta));
        d.rows_mut(N, N).copy_from(&vec_of(&block.outcome_beta));
        let (mean, cov) = gaussian_posterior(state.sigma2_gamma, &a, &c, &noise, &d);

        let got = mr_corr2::gamma_block_conditional(&state, &block, 0).unwrap();
        assert_vector_close(&got.mean, &mean, 1e-9, "gamma mean");
        assert_matrix_close(&got.cov, &cov, 1e-9, "gamma covariance");
    }
}

#[test]
fn alpha_conditional_matches_joint_gaussian() {
    let r = dmat(N, &ar1(N, 0.4));
    for seed in 6..10 {
        let Instance { block, state } = instance(seed, true);
        let ty = transfer(&block.outcome_se, &r);
        let c = &ty * vec_of(&state.gamma) * state.beta1;
        let noise = covariance(&block.outcome_se, &r);
        let (mean, cov) = gaussian_posterior(state.sigma2_alpha, &ty, &c, &noise, &vec_of(&block.outcome_beta));
        let got = mr_corr2::alpha_block_conditional(&state, &block, 0, true).unwrap();
        assert_vector_close(&got.mean, &mean, 1e-9, "alpha mean");
        assert_matrix_close(&got.cov, &cov, 1e-9, "alpha covariance");

        let prior = mr_corr2::alpha_block_conditional(&state, &block, 0, false).unwrap();
        assert!(prior.mean.iter().all(|&m| m == 0.0));
        assert_matrix_close(&prior.cov, &(DMatrix::identity(N, N) * state.sigma2_alpha), 1e-15, "alpha prior");
    }
}

#[test]
fn indicator_odds_match_marginal_likelihood_ratio() {
    let r = dmat(N, &ar1(N, 0.4));
    for seed in 10..16 {
        let Instance { block, state } = instance(seed, seed % 2 == 0);
        let ty = transfer(&block.outcome_se, &r);
        let g = vec_of(&state.gamma);
        let y = vec_of(&block.outcome_beta);
        let base_cov = covariance(&block.outcome_se, &r);
        // exact propagation of the pleiotropy prior through the LD transfer
        let cov1 = &base_cov + &ty * ty.transpose() * state.sigma2_alpha;
        let want = (state.omega / (1.0 - state.omega)).ln() + ln_mvn(&y, &(&ty * &g * state.beta1), &cov1)
            - ln_mvn(&y, &(&ty * &g * state.beta0), &base_cov);
        let got = mr_corr2::eta_block_log_odds(&state, &block, 0).unwrap();
        assert_close(got, want, 1e-9, "log odds");
    }
}

#[test]
fn block_log_posterior_matches_dense_likelihood() {
    let r = dmat(N, &ar1(N, 0.4));
    let hyper = mrcorr::Hyperparams::default();
    for seed in 16..20 {
        let Instance { block, state } = instance(seed, seed % 2 == 1);
        let tx = transfer(&block.exposure_se, &r);
        let ty = transfer(&block.outcome_se, &r);
        let g = vec_of(&state.gamma);
        let slope = if state.eta[0] { state.beta1 } else { state.beta0 };
        let mut big = &g * slope;
        if state.eta[0] {
            big += vec_of(&state.alpha_tilde);
        }
        let lik = ln_mvn(&vec_of(&block.exposure_beta), &(&tx * &g), &covariance(&block.exposure_se, &r))
            + ln_mvn(&vec_of(&block.outcome_beta), &(&ty * &big), &covariance(&block.outcome_se, &r));
        // differences cancel the prior, which does not depend on the data
        let mut shifted = block.clone();
        let zeros = vec![0.0; N];
        shifted.set_estimates(&zeros, &zeros);
        let lik0 = ln_mvn(&DVector::zeros(N), &(&tx * &g), &covariance(&block.exposure_se, &r))
            + ln_mvn(&DVector::zeros(N), &(&ty * &big), &covariance(&block.outcome_se, &r));
        let got = mr_corr2::log_posterior(&state, std::slice::from_ref(&block), &hyper)
            - mr_corr2::log_posterior(&state, std::slice::from_ref(&shifted), &hyper);
        assert_close(got, lik - lik0, 1e-9, "log likelihood difference");
    }
}
