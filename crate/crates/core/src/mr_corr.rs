//! Gibbs sampler for MR-Corr: independent instruments, per-SNP spike-slab
//! indicators on the orthogonal pleiotropy component.

use rand::Rng;

use crate::error::Result;
use crate::model::{
    self, chain_key, initial_state, ln_normal, ln_prior_globals, ChainTrace, Constraints,
    GlobalStats, Hyperparams, McmcConfig, Normal1, SamplerState, SlopeConditional, SweepFlags,
    SweepStreams, Trace, UnitKind,
};
use crate::par;
use crate::rng::Site;
use crate::summary_data::HarmonizedDataset;

pub fn init_state<R: Rng>(
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<SamplerState> {
    hyper.validate()?;
    dataset.validate()?;
    initial_state(&dataset.exposure_beta, &dataset.outcome_beta, dataset.len(), rng)
}

fn active_slope(state: &SamplerState, k: usize) -> f64 {
    if state.eta[k] {
        state.beta1
    } else {
        state.beta0
    }
}

pub fn gamma_conditional(state: &SamplerState, dataset: &HarmonizedDataset, k: usize) -> Normal1 {
    let b = active_slope(state, k);
    let w_x = 1.0 / (dataset.exposure_se[k] * dataset.exposure_se[k]);
    let w_y = 1.0 / (dataset.outcome_se[k] * dataset.outcome_se[k]);
    let response = dataset.outcome_beta[k] - if state.eta[k] { state.alpha_tilde[k] } else { 0.0 };
    let precision = w_x + b * b * w_y + 1.0 / state.sigma2_gamma;
    let linear = w_x * dataset.exposure_beta[k] + b * w_y * response;
    Normal1 {
        mean: linear / precision,
        var: 1.0 / precision,
    }
}

/// Log posterior odds of `eta_k = 1` with the pleiotropy effect integrated out.
pub fn eta_log_odds(state: &SamplerState, dataset: &HarmonizedDataset, k: usize) -> f64 {
    let s2 = dataset.outcome_se[k] * dataset.outcome_se[k];
    let y = dataset.outcome_beta[k];
    let g = state.gamma[k];
    (state.omega.ln() - (1.0 - state.omega).ln())
        + ln_normal(y, state.beta1 * g, s2 + state.sigma2_alpha)
        - ln_normal(y, state.beta0 * g, s2)
}

pub fn alpha_conditional(
    state: &SamplerState,
    dataset: &HarmonizedDataset,
    k: usize,
    eta: bool,
) -> Normal1 {
    if !eta {
        return Normal1 {
            mean: 0.0,
            var: state.sigma2_alpha,
        };
    }
    let w_y = 1.0 / (dataset.outcome_se[k] * dataset.outcome_se[k]);
    let precision = w_y + 1.0 / state.sigma2_alpha;
    Normal1 {
        mean: w_y * (dataset.outcome_beta[k] - state.beta1 * state.gamma[k]) / precision,
        var: 1.0 / precision,
    }
}

pub fn global_stats(state: &SamplerState, dataset: &HarmonizedDataset) -> GlobalStats {
    let mut s = GlobalStats {
        n_snps: dataset.len(),
        n_units: dataset.len(),
        ..Default::default()
    };
    for k in 0..dataset.len() {
        let w_y = 1.0 / (dataset.outcome_se[k] * dataset.outcome_se[k]);
        let g = state.gamma[k];
        let a = state.alpha_tilde[k];
        if state.eta[k] {
            s.pleio_quad += w_y * g * g;
            s.pleio_lin += w_y * (dataset.outcome_beta[k] - a) * g;
            s.n_pleiotropic += 1;
        } else {
            s.null_quad += w_y * g * g;
            s.null_lin += w_y * dataset.outcome_beta[k] * g;
        }
        s.sum_gamma_sq += g * g;
        s.sum_alpha_sq += a * a;
    }
    s
}

pub fn beta0_conditional(
    state: &SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
) -> SlopeConditional {
    model::beta0_conditional(&global_stats(state, dataset), hyper)
}

pub fn beta1_conditional(
    state: &SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
) -> SlopeConditional {
    model::beta1_conditional(&global_stats(state, dataset), hyper)
}

pub fn update_gamma(state: &mut SamplerState, dataset: &HarmonizedDataset, streams: SweepStreams) {
    for k in 0..dataset.len() {
        let c = gamma_conditional(state, dataset, k);
        state.gamma[k] = c.sample(&mut streams.site(Site::Gamma(k)));
    }
}

pub fn update_eta_alpha(
    state: &mut SamplerState,
    dataset: &HarmonizedDataset,
    constraints: &Constraints,
    streams: SweepStreams,
) {
    for k in 0..dataset.len() {
        let mut rng = streams.site(Site::EtaAlpha(k));
        let u: f64 = rng.random();
        let eta = match &constraints.fixed_eta {
            Some(fixed) => fixed[k],
            None => u < model::inclusion_probability(eta_log_odds(state, dataset, k)),
        };
        state.eta[k] = eta;
        state.alpha_tilde[k] = alpha_conditional(state, dataset, k, eta).sample(&mut rng);
    }
}

/// Returns whether the improper-conditional fallback was used.
pub fn update_beta0<R: Rng + ?Sized>(
    state: &mut SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    rng: &mut R,
) -> bool {
    let c = beta0_conditional(state, dataset, hyper);
    model::draw_slope(&mut state.beta0, c, rng)
}

pub fn update_beta1<R: Rng + ?Sized>(
    state: &mut SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    rng: &mut R,
) -> bool {
    let c = beta1_conditional(state, dataset, hyper);
    model::draw_slope(&mut state.beta1, c, rng)
}

pub fn update_variances_omega<R: Rng + ?Sized>(
    state: &mut SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    constraints: &Constraints,
    rng: &mut R,
) {
    let stats = global_stats(state, dataset);
    state.sigma2_gamma = model::sigma2_gamma_conditional(&stats, hyper).sample(rng);
    state.sigma2_alpha = model::sigma2_alpha_conditional(&stats, hyper).sample(rng);
    if let Some(w) = constraints.fixed_omega {
        state.omega = w;
    } else {
        state.omega = model::omega_conditional(&stats, hyper).sample(rng);
    }
}

/// One full sweep: gamma, (eta, alpha), beta0, beta1, variances and omega.
pub fn sweep(
    state: &mut SamplerState,
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    constraints: &Constraints,
    streams: SweepStreams,
) -> SweepFlags {
    update_gamma(state, dataset, streams);
    update_eta_alpha(state, dataset, constraints, streams);
    let mut rng = streams.site(Site::Globals);
    let beta0_fallback = update_beta0(state, dataset, hyper, &mut rng);
    let beta1_fallback = update_beta1(state, dataset, hyper, &mut rng);
    update_variances_omega(state, dataset, hyper, constraints, &mut rng);
    SweepFlags {
        beta0_fallback,
        beta1_fallback,
    }
}

pub fn run_chain(
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    config: &McmcConfig,
) -> Result<Trace> {
    run_chain_with(dataset, hyper, config, &Constraints::default())
}

pub fn run_chain_with(
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    config: &McmcConfig,
    constraints: &Constraints,
) -> Result<Trace> {
    config.validate()?;
    constraints.validate(dataset.len())?;
    let chains = par::map_indexed(config.n_chains, |c| {
        run_single(dataset, hyper, config, constraints, c)
    });
    Ok(Trace {
        unit: UnitKind::Snp,
        n_units: dataset.len(),
        chains: chains.into_iter().collect::<Result<_>>()?,
    })
}

fn run_single(
    dataset: &HarmonizedDataset,
    hyper: &Hyperparams,
    config: &McmcConfig,
    constraints: &Constraints,
    chain: usize,
) -> Result<ChainTrace> {
    let key = chain_key(config.seed, chain);
    let mut state = init_state(dataset, hyper, &mut key.sequential(0))?;
    apply_constraints(&mut state, constraints);
    let mut trace = ChainTrace::new(dataset.len(), config.retained_per_chain(), state.clone());
    for it in 0..config.n_iter {
        let streams = SweepStreams { key: &key, iteration: it as u64 };
        let flags = sweep(&mut state, dataset, hyper, constraints, streams);
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

pub(crate) fn apply_constraints(state: &mut SamplerState, constraints: &Constraints) {
    if let Some(eta) = &constraints.fixed_eta {
        state.eta.clone_from(eta);
    }
    if let Some(w) = constraints.fixed_omega {
        state.omega = w;
    }
}

/// Unnormalized log joint density of data and all latent variables.
pub fn log_posterior(state: &SamplerState, dataset: &HarmonizedDataset, hyper: &Hyperparams) -> f64 {
    let prior = ln_prior_globals(state, hyper);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    let mut lp = prior;
    for k in 0..dataset.len() {
        let g = state.gamma[k];
        let mean_y = active_slope(state, k) * g + if state.eta[k] { state.alpha_tilde[k] } else { 0.0 };
        lp += ln_normal(dataset.exposure_beta[k], g, dataset.exposure_se[k].powi(2));
        lp += ln_normal(dataset.outcome_beta[k], mean_y, dataset.outcome_se[k].powi(2));
    }
    lp
}
