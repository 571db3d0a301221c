//! Blocked Gibbs sampler for MR-Corr²: multivariate normal summary-statistic
//! likelihood within LD blocks and one spike-slab indicator per block.
//!
//! With `S = diag(se)` and block correlation `R`, the estimate vector has
//! likelihood `N(S R S⁻¹ v, S R S)` for true effects `v`. As a function of `v`
//! this has precision kernel `S⁻¹ R S⁻¹` and linear term `S⁻² v̂`, which is
//! all the conditionals need.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ld_reference::{BlockCorr, BlockPartition};
use crate::linalg;
use crate::model::{
    self, chain_key, initial_state, ln_prior_globals, ChainTrace, Constraints, GlobalStats,
    Hyperparams, McmcConfig, SamplerState, SlopeConditional, SweepFlags, SweepStreams, Trace,
    UnitKind,
};
use crate::mr_corr::apply_constraints;
use crate::par;
use crate::rng::Site;
use crate::summary_data::HarmonizedDataset;

/// Read-only per-block data and caches.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockData {
    pub start: usize,
    pub exposure_beta: Vec<f64>,
    pub exposure_se: Vec<f64>,
    pub outcome_beta: Vec<f64>,
    pub outcome_se: Vec<f64>,
    pub corr: Vec<f64>,
    pub corr_chol: Vec<f64>,
    /// `S_γ⁻¹ R S_γ⁻¹`
    pub exposure_kernel: Vec<f64>,
    /// `S_Γ⁻¹ R S_Γ⁻¹`
    pub outcome_kernel: Vec<f64>,
    /// `S_γ⁻² γ̂`
    pub exposure_linear: Vec<f64>,
    /// `S_Γ⁻² Γ̂`
    pub outcome_linear: Vec<f64>,
}

impl BlockData {
    pub fn len(&self) -> usize {
        self.exposure_beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exposure_beta.is_empty()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len()
    }

    /// Replace the effect estimates, keeping standard errors and LD.
    pub fn set_estimates(&mut self, exposure_beta: &[f64], outcome_beta: &[f64]) {
        self.exposure_beta.copy_from_slice(exposure_beta);
        self.outcome_beta.copy_from_slice(outcome_beta);
        for i in 0..self.len() {
            self.exposure_linear[i] = exposure_beta[i] / (self.exposure_se[i] * self.exposure_se[i]);
            self.outcome_linear[i] = outcome_beta[i] / (self.outcome_se[i] * self.outcome_se[i]);
        }
    }
}

fn scaled_kernel(corr: &[f64], se: &[f64]) -> Vec<f64> {
    let n = se.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = corr[i * n + j] / (se[i] * se[j]);
        }
    }
    k
}

pub fn precompute_blocks(
    dataset: &HarmonizedDataset,
    partition: &BlockPartition,
    corr: &BlockCorr,
) -> Result<Vec<BlockData>> {
    dataset.validate()?;
    if partition.n_snps() != dataset.len() {
        return Err(Error::Data(format!(
            "partition covers {} SNPs but the dataset has {}",
            partition.n_snps(),
            dataset.len()
        )));
    }
    corr.validate(partition)?;
    partition
        .blocks()
        .iter()
        .zip(&corr.matrices)
        .enumerate()
        .map(|(l, (range, r))| {
            let n = range.len();
            let slice = |v: &[f64]| v[range.clone()].to_vec();
            let mut chol = r.clone();
            linalg::cholesky_in_place(&mut chol, n)
                .map_err(|_| Error::Numeric(format!("LD matrix of block {l} is not positive definite")))?;
            let exposure_beta = slice(&dataset.exposure_beta);
            let exposure_se = slice(&dataset.exposure_se);
            let outcome_beta = slice(&dataset.outcome_beta);
            let outcome_se = slice(&dataset.outcome_se);
            let lin = |b: &[f64], s: &[f64]| b.iter().zip(s).map(|(b, s)| b / (s * s)).collect();
            Ok(BlockData {
                start: range.start,
                exposure_kernel: scaled_kernel(r, &exposure_se),
                outcome_kernel: scaled_kernel(r, &outcome_se),
                exposure_linear: lin(&exposure_beta, &exposure_se),
                outcome_linear: lin(&outcome_beta, &outcome_se),
                exposure_beta,
                exposure_se,
                outcome_beta,
                outcome_se,
                corr: r.clone(),
                corr_chol: chol,
            })
        })
        .collect()
}

/// Global parameters read by the block updates of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Globals {
    beta0: f64,
    beta1: f64,
    sigma2_gamma: f64,
    sigma2_alpha: f64,
    omega: f64,
}

impl From<&SamplerState> for Globals {
    fn from(s: &SamplerState) -> Self {
        Globals {
            beta0: s.beta0,
            beta1: s.beta1,
            sigma2_gamma: s.sigma2_gamma,
            sigma2_alpha: s.sigma2_alpha,
            omega: s.omega,
        }
    }
}

/// Multivariate normal in mean/covariance form (row-major covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBlock {
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
}

fn factor_error(l: usize, what: &str) -> Error {
    Error::Numeric(format!("{what} precision of block {l} is not positive definite"))
}

/// Precision and linear term of the gamma conditional.
fn gamma_precision(g: &Globals, block: &BlockData, eta: bool, alpha: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = block.len();
    let b = if eta { g.beta1 } else { g.beta0 };
    let mut prec = block.exposure_kernel.clone();
    for (p, k) in prec.iter_mut().zip(&block.outcome_kernel) {
        *p += b * b * k;
    }
    for i in 0..n {
        prec[i * n + i] += 1.0 / g.sigma2_gamma;
    }
    let mut h = block.outcome_linear.clone();
    if eta {
        let mut ka = vec![0.0; n];
        linalg::matvec(&block.outcome_kernel, n, alpha, &mut ka);
        for (h, ka) in h.iter_mut().zip(&ka) {
            *h -= ka;
        }
    }
    for (h, x) in h.iter_mut().zip(&block.exposure_linear) {
        *h = x + b * *h;
    }
    (prec, h)
}

/// Cholesky factor of `A = K_Γ + I/σ²_α` and `m = S_Γ⁻²Γ̂ − β₁ K_Γ γ`.
fn alpha_precision(g: &Globals, block: &BlockData, gamma: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = block.len();
    let mut a = block.outcome_kernel.clone();
    for i in 0..n {
        a[i * n + i] += 1.0 / g.sigma2_alpha;
    }
    let mut kg = vec![0.0; n];
    linalg::matvec(&block.outcome_kernel, n, gamma, &mut kg);
    let m = block
        .outcome_linear
        .iter()
        .zip(&kg)
        .map(|(l, kg)| l - g.beta1 * kg)
        .collect();
    (a, m)
}

/// Outcome log-likelihood, up to a constant, at `Γ = b γ`.
fn slope_fit(block: &BlockData, gamma: &[f64], b: f64) -> f64 {
    let n = block.len();
    b * linalg::dot(&block.outcome_linear, gamma) - 0.5 * b * b * linalg::quad_form(&block.outcome_kernel, n, gamma)
}

/// Log odds of `eta = 1` given a factored `A` (None when `σ²_α = 0`).
fn log_odds_from(g: &Globals, block: &BlockData, gamma: &[f64], a_chol: Option<(&[f64], &[f64])>) -> f64 {
    let n = block.len();
    let mut lo = (g.omega.ln() - (1.0 - g.omega).ln()) + slope_fit(block, gamma, g.beta1)
        - slope_fit(block, gamma, g.beta0);
    if let Some((chol, m)) = a_chol {
        let mut w = m.to_vec();
        linalg::solve_lower(chol, n, &mut w);
        lo += 0.5 * linalg::dot(&w, &w) - 0.5 * linalg::chol_log_det(chol, n)
            - 0.5 * n as f64 * g.sigma2_alpha.ln();
    }
    lo
}

fn gaussian_from_precision(mut prec: Vec<f64>, mut h: Vec<f64>, n: usize) -> std::result::Result<GaussianBlock, usize> {
    linalg::cholesky_in_place(&mut prec, n)?;
    linalg::chol_solve(&prec, n, &mut h);
    let mut cov = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        linalg::chol_solve(&prec, n, &mut e);
        for i in 0..n {
            cov[i * n + j] = e[i];
        }
    }
    Ok(GaussianBlock { mean: h, cov })
}

pub fn gamma_block_conditional(state: &SamplerState, block: &BlockData, l: usize) -> Result<GaussianBlock> {
    let r = block.range();
    let (prec, h) = gamma_precision(&state.into(), block, state.eta[l], &state.alpha_tilde[r]);
    gaussian_from_precision(prec, h, block.len()).map_err(|_| factor_error(l, "gamma"))
}

/// Log posterior odds of `eta_l = 1` with the block pleiotropy vector integrated out.
pub fn eta_block_log_odds(state: &SamplerState, block: &BlockData, l: usize) -> Result<f64> {
    let g = Globals::from(state);
    let gamma = &state.gamma[block.range()];
    if g.sigma2_alpha <= 0.0 {
        return Ok(log_odds_from(&g, block, gamma, None));
    }
    let (mut a, m) = alpha_precision(&g, block, gamma);
    linalg::cholesky_in_place(&mut a, block.len()).map_err(|_| factor_error(l, "pleiotropy"))?;
    Ok(log_odds_from(&g, block, gamma, Some((&a, &m))))
}

pub fn alpha_block_conditional(state: &SamplerState, block: &BlockData, l: usize, eta: bool) -> Result<GaussianBlock> {
    let n = block.len();
    if !eta {
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            cov[i * n + i] = state.sigma2_alpha;
        }
        return Ok(GaussianBlock { mean: vec![0.0; n], cov });
    }
    let (a, m) = alpha_precision(&state.into(), block, &state.gamma[block.range()]);
    gaussian_from_precision(a, m, n).map_err(|_| factor_error(l, "pleiotropy"))
}

fn block_stats(block: &BlockData, gamma: &[f64], alpha: &[f64], eta: bool) -> GlobalStats {
    let n = block.len();
    let q = linalg::quad_form(&block.outcome_kernel, n, gamma);
    let r = linalg::dot(&block.outcome_linear, gamma);
    let mut s = GlobalStats {
        n_snps: n,
        n_units: 1,
        sum_gamma_sq: linalg::dot(gamma, gamma),
        sum_alpha_sq: linalg::dot(alpha, alpha),
        ..Default::default()
    };
    if eta {
        s.pleio_quad = q;
        s.pleio_lin = r - linalg::bilinear(&block.outcome_kernel, n, alpha, gamma);
        s.n_pleiotropic = 1;
    } else {
        s.null_quad = q;
        s.null_lin = r;
    }
    s
}

/// Statistics pooled over blocks in block order.
pub fn global_stats(state: &SamplerState, blocks: &[BlockData]) -> GlobalStats {
    let mut total = GlobalStats::default();
    for (l, b) in blocks.iter().enumerate() {
        let r = b.range();
        total.add(&block_stats(b, &state.gamma[r.clone()], &state.alpha_tilde[r], state.eta[l]));
    }
    total
}

pub fn beta0_conditional(state: &SamplerState, blocks: &[BlockData], hyper: &Hyperparams) -> SlopeConditional {
    model::beta0_conditional(&global_stats(state, blocks), hyper)
}

pub fn beta1_conditional(state: &SamplerState, blocks: &[BlockData], hyper: &Hyperparams) -> SlopeConditional {
    model::beta1_conditional(&global_stats(state, blocks), hyper)
}

struct BlockSlot<'a> {
    gamma: &'a mut [f64],
    alpha: &'a mut [f64],
    eta: &'a mut bool,
}

fn gamma_step(g: &Globals, block: &BlockData, l: usize, slot: &mut BlockSlot, streams: SweepStreams) -> Result<()> {
    let n = block.len();
    let (mut prec, mut h) = gamma_precision(g, block, *slot.eta, slot.alpha);
    linalg::cholesky_in_place(&mut prec, n).map_err(|_| factor_error(l, "gamma"))?;
    let mut rng = streams.site(Site::Gamma(l));
    linalg::sample_from_precision(&prec, n, &mut h, slot.gamma, &mut rng);
    Ok(())
}

fn eta_alpha_step(
    g: &Globals,
    block: &BlockData,
    l: usize,
    slot: &mut BlockSlot,
    fixed_eta: Option<bool>,
    streams: SweepStreams,
) -> Result<()> {
    let n = block.len();
    let mut rng = streams.site(Site::EtaAlpha(l));
    let u: f64 = rng.random();
    let mut factored = None;
    if fixed_eta != Some(false) && g.sigma2_alpha > 0.0 {
        let (mut a, m) = alpha_precision(g, block, slot.gamma);
        linalg::cholesky_in_place(&mut a, n).map_err(|_| factor_error(l, "pleiotropy"))?;
        factored = Some((a, m));
    }
    let eta = match fixed_eta {
        Some(e) => e,
        None => {
            let lo = log_odds_from(g, block, slot.gamma, factored.as_ref().map(|(a, m)| (a.as_slice(), m.as_slice())));
            u < model::inclusion_probability(lo)
        }
    };
    *slot.eta = eta;
    match factored {
        Some((a, mut m)) if eta => linalg::sample_from_precision(&a, n, &mut m, slot.alpha, &mut rng),
        _ => {
            let sd = g.sigma2_alpha.sqrt();
            for a in slot.alpha.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *a = sd * z;
            }
        }
    }
    Ok(())
}

fn slot_of<'a>(state: &'a mut SamplerState, block: &BlockData, l: usize) -> BlockSlot<'a> {
    let r = block.range();
    BlockSlot {
        gamma: &mut state.gamma[r.clone()],
        alpha: &mut state.alpha_tilde[r],
        eta: &mut state.eta[l],
    }
}

/// Draw `gamma_l` from its full conditional.
pub fn update_gamma_block(state: &mut SamplerState, block: &BlockData, l: usize, streams: SweepStreams) -> Result<()> {
    let g = Globals::from(&*state);
    gamma_step(&g, block, l, &mut slot_of(state, block, l), streams)
}

/// Draw `eta_l` with the block pleiotropy vector integrated out, then the
/// pleiotropy vector given the new indicator.
pub fn update_eta_alpha_block(
    state: &mut SamplerState,
    block: &BlockData,
    l: usize,
    fixed_eta: Option<bool>,
    streams: SweepStreams,
) -> Result<()> {
    let g = Globals::from(&*state);
    eta_alpha_step(&g, block, l, &mut slot_of(state, block, l), fixed_eta, streams)
}

fn update_block(
    g: &Globals,
    block: &BlockData,
    l: usize,
    slot: &mut BlockSlot,
    fixed_eta: Option<bool>,
    streams: SweepStreams,
) -> Result<GlobalStats> {
    gamma_step(g, block, l, slot, streams)?;
    eta_alpha_step(g, block, l, slot, fixed_eta, streams)?;
    Ok(block_stats(block, slot.gamma, slot.alpha, *slot.eta))
}

/// Snapshot the globals, update every block (concurrently when enabled) and
/// return the pooled statistics.
pub fn update_blocks(
    state: &mut SamplerState,
    blocks: &[BlockData],
    constraints: &Constraints,
    streams: SweepStreams,
) -> Result<GlobalStats> {
    let g = Globals::from(&*state);
    let mut slots = Vec::with_capacity(blocks.len());
    let mut gamma = state.gamma.as_mut_slice();
    let mut alpha = state.alpha_tilde.as_mut_slice();
    for (b, eta) in blocks.iter().zip(state.eta.iter_mut()) {
        let (gh, gt) = std::mem::take(&mut gamma).split_at_mut(b.len());
        let (ah, at) = std::mem::take(&mut alpha).split_at_mut(b.len());
        gamma = gt;
        alpha = at;
        slots.push(BlockSlot { gamma: gh, alpha: ah, eta });
    }
    let fixed = constraints.fixed_eta.as_deref();
    let results = par::map_mut(&mut slots, |l, slot| {
        update_block(&g, &blocks[l], l, slot, fixed.map(|f| f[l]), streams)
    });
    let mut total = GlobalStats::default();
    for r in results {
        total.add(&r?);
    }
    Ok(total)
}

/// Barrier step after all block updates of a sweep.
pub fn update_globals<R: Rng + ?Sized>(
    state: &mut SamplerState,
    blocks: &[BlockData],
    hyper: &Hyperparams,
    constraints: &Constraints,
    rng: &mut R,
) -> SweepFlags {
    model::update_globals(state, &global_stats(state, blocks), hyper, constraints, rng)
}

pub fn sweep(
    state: &mut SamplerState,
    blocks: &[BlockData],
    hyper: &Hyperparams,
    constraints: &Constraints,
    streams: SweepStreams,
) -> Result<SweepFlags> {
    let stats = update_blocks(state, blocks, constraints, streams)?;
    let mut rng = streams.site(Site::Globals);
    Ok(model::update_globals(state, &stats, hyper, constraints, &mut rng))
}

pub fn init_state<R: Rng>(blocks: &[BlockData], hyper: &Hyperparams, rng: &mut R) -> Result<SamplerState> {
    hyper.validate()?;
    let exposure: Vec<f64> = blocks.iter().flat_map(|b| b.exposure_beta.iter().copied()).collect();
    let outcome: Vec<f64> = blocks.iter().flat_map(|b| b.outcome_beta.iter().copied()).collect();
    initial_state(&exposure, &outcome, blocks.len(), rng)
}

pub fn run_chain2(
    dataset: &HarmonizedDataset,
    partition: &BlockPartition,
    corr: &BlockCorr,
    hyper: &Hyperparams,
    config: &McmcConfig,
) -> Result<Trace> {
    let blocks = precompute_blocks(dataset, partition, corr)?;
    run_blocks(&blocks, hyper, config, &Constraints::default())
}

/// Run all chains on precomputed blocks.
pub fn run_blocks(
    blocks: &[BlockData],
    hyper: &Hyperparams,
    config: &McmcConfig,
    constraints: &Constraints,
) -> Result<Trace> {
    config.validate()?;
    constraints.validate(blocks.len())?;
    let chains = par::map_indexed(config.n_chains, |c| run_single(blocks, hyper, config, constraints, c));
    Ok(Trace {
        unit: UnitKind::Block,
        n_units: blocks.len(),
        chains: chains.into_iter().collect::<Result<_>>()?,
    })
}

fn run_single(
    blocks: &[BlockData],
    hyper: &Hyperparams,
    config: &McmcConfig,
    constraints: &Constraints,
    chain: usize,
) -> Result<ChainTrace> {
    let key = chain_key(config.seed, chain);
    let mut state = init_state(blocks, hyper, &mut key.sequential(0))?;
    apply_constraints(&mut state, constraints);
    let mut trace = ChainTrace::new(blocks.len(), config.retained_per_chain(), state.clone());
    for it in 0..config.n_iter {
        let streams = SweepStreams { key: &key, iteration: it as u64 };
        let flags = sweep(&mut state, blocks, hyper, constraints, streams)?;
        state.check_finite(it)?;
        if config.keeps(it) {
            trace.record(&state);
            trace.beta0_fallbacks += usize::from(flags.beta0_fallback);
            trace.beta1_fallbacks += usize::from(flags.beta1_fallback);
        }
    }
    trace.final_state = state;
    Ok(trace)
}

fn ln_mvn_scaled(x_hat: &[f64], se: &[f64], block: &BlockData, truth: &[f64]) -> f64 {
    // x̂ ~ N(S R S⁻¹ t, S R S)
    let n = se.len();
    let scaled: Vec<f64> = truth.iter().zip(se).map(|(t, s)| t / s).collect();
    let mut mean = vec![0.0; n];
    linalg::matvec(&block.corr, n, &scaled, &mut mean);
    let mut w: Vec<f64> = (0..n).map(|i| (x_hat[i] - se[i] * mean[i]) / se[i]).collect();
    linalg::solve_lower(&block.corr_chol, n, &mut w);
    let log_det = 2.0 * se.iter().map(|s| s.ln()).sum::<f64>() + linalg::chol_log_det(&block.corr_chol, n);
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + linalg::dot(&w, &w))
}

/// Unnormalized log joint density, evaluated with dense block likelihoods.
pub fn log_posterior(state: &SamplerState, blocks: &[BlockData], hyper: &Hyperparams) -> f64 {
    let prior = ln_prior_globals(state, hyper);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    let mut lp = prior;
    for (l, b) in blocks.iter().enumerate() {
        let r = b.range();
        let gamma = &state.gamma[r.clone()];
        let eta = state.eta[l];
        let slope = if eta { state.beta1 } else { state.beta0 };
        let big: Vec<f64> = gamma
            .iter()
            .zip(&state.alpha_tilde[r])
            .map(|(g, a)| slope * g + if eta { *a } else { 0.0 })
            .collect();
        lp += ln_mvn_scaled(&b.exposure_beta, &b.exposure_se, b, gamma);
        lp += ln_mvn_scaled(&b.outcome_beta, &b.outcome_se, b, &big);
    }
    lp
}

/// Per-block inclusion table: block index, comma-joined SNP ids, mean indicator.
pub fn write_block_inclusion<W: Write>(
    mut w: W,
    trace: &Trace,
    partition: &BlockPartition,
    snp_ids: &[String],
) -> std::io::Result<()> {
    writeln!(w, "block_index\tsnp_ids\teta_mean")?;
    for (l, (range, m)) in partition.blocks().iter().zip(trace.inclusion()).enumerate() {
        writeln!(w, "{l}\t{}\t{m}", snp_ids[range.clone()].join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ld_reference::uniform_partition;

    fn ar1(n: usize, rho: f64) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = rho.powi((i as i32 - j as i32).abs());
            }
        }
        a
    }

    fn dataset(p: usize) -> HarmonizedDataset {
        let f = |k: usize, a: f64| ((k as f64 + 1.0) * a).sin() * 0.2;
        HarmonizedDataset::from_stats(
            (0..p).map(|k| f(k, 1.3)).collect(),
            (0..p).map(|k| 0.05 + 0.01 * k as f64).collect(),
            (0..p).map(|k| f(k, 0.7)).collect(),
            (0..p).map(|k| 0.08 + 0.005 * k as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_ld_gives_diagonal_kernels() {
        let d = dataset(6);
        let part = uniform_partition(6, 3).unwrap();
        let blocks = precompute_blocks(&d, &part, &BlockCorr::identity(&part)).unwrap();
        let b = &blocks[1];
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 / d.exposure_se[3 + i].powi(2) } else { 0.0 };
                assert_eq!(b.exposure_kernel[i * 3 + j], expected);
            }
        }
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let d = dataset(6);
        let part = uniform_partition(4, 2).unwrap();
        assert!(precompute_blocks(&d, &part, &BlockCorr::identity(&part)).is_err());
    }

    #[test]
    fn coinciding_components_give_prior_odds() {
        let d = dataset(4);
        let part = uniform_partition(4, 4).unwrap();
        let corr = BlockCorr { matrices: vec![ar1(4, 0.5)], shrinkage_lambda: 0.0 };
        let blocks = precompute_blocks(&d, &part, &corr).unwrap();
        let state = SamplerState {
            beta0: 0.2,
            beta1: 0.2,
            gamma: vec![0.1, 0.2, -0.1, 0.05],
            alpha_tilde: vec![0.0; 4],
            eta: vec![false],
            sigma2_gamma: 1.0,
            sigma2_alpha: 0.0,
            omega: 0.3,
        };
        let lo = eta_block_log_odds(&state, &blocks[0], 0).unwrap();
        assert!((lo - (0.3f64 / 0.7).ln()).abs() < 1e-12);
    }
}
