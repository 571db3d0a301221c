//! Types shared by both Gibbs samplers: priors, run configuration, latent
//! state, traces and the global (non-per-unit) conditional updates.

use std::io::Write;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{self, Site, StreamKey};

/// Floor applied to sampled variances.
pub const VARIANCE_FLOOR: f64 = 1e-12;
/// Floor for the initial variance estimates.
pub const INIT_VARIANCE_FLOOR: f64 = 1e-8;

/// Prior hyperparameters. `beta_prior_var` of `None` gives the flat
/// (Jeffreys) prior on both slopes; a value gives independent `N(0, v)`
/// priors, which makes the joint model proper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub a: f64,
    pub b: f64,
    pub beta_prior_var: Option<f64>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            a_gamma: 0.001,
            b_gamma: 0.001,
            a_alpha: 0.001,
            b_alpha: 0.001,
            a: 1.0,
            b: 1.0,
            beta_prior_var: None,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_gamma", self.a_gamma),
            ("b_gamma", self.b_gamma),
            ("a_alpha", self.a_alpha),
            ("b_alpha", self.b_alpha),
            ("a", self.a),
            ("b", self.b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("hyperparameter {name} must be positive, got {v}")));
            }
        }
        if let Some(v) = self.beta_prior_var {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("beta_prior_var must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn beta_prior_precision(&self) -> f64 {
        self.beta_prior_var.map_or(0.0, |v| 1.0 / v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub n_burnin: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_iter: 10_000,
            n_burnin: 5_000,
            thin: 1,
            n_chains: 2,
            seed: 0,
        }
    }
}

impl McmcConfig {
    /// Validate and return non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n_burnin >= self.n_iter {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than the iteration count ({})",
                self.n_burnin, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::Config("at least one chain is required".into()));
        }
        let mut warnings = Vec::new();
        if self.retained_per_chain() < 100 {
            warnings.push(format!(
                "only {} retained draws per chain; summaries will be noisy",
                self.retained_per_chain()
            ));
        }
        Ok(warnings)
    }

    pub fn retained_per_chain(&self) -> usize {
        (self.n_iter - self.n_burnin) / self.thin
    }

    pub(crate) fn keeps(&self, iteration: usize) -> bool {
        iteration >= self.n_burnin && (iteration - self.n_burnin + 1) % self.thin == 0
    }
}

/// Optional clamps on the latent structure, used for oracle fits (true
/// pleiotropy indicators) and for the uncorrected comparison fit (`omega`
/// held at zero).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub fixed_eta: Option<Vec<bool>>,
    pub fixed_omega: Option<f64>,
}

impl Constraints {
    pub fn validate(&self, n_units: usize) -> Result<()> {
        if let Some(eta) = &self.fixed_eta {
            if eta.len() != n_units {
                return Err(Error::Config(format!(
                    "fixed indicator vector has length {}, expected {n_units}",
                    eta.len()
                )));
            }
        }
        if let Some(w) = self.fixed_omega {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Config(format!("fixed omega {w} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Latent state of either sampler. `eta` has one entry per SNP for the
/// independent-SNP model and one per LD block for the blocked model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerState {
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: Vec<f64>,
    pub alpha_tilde: Vec<f64>,
    pub eta: Vec<bool>,
    pub sigma2_gamma: f64,
    pub sigma2_alpha: f64,
    pub omega: f64,
}

impl SamplerState {
    pub fn n_pleiotropic(&self) -> usize {
        self.eta.iter().filter(|&&e| e).count()
    }

    pub(crate) fn check_finite(&self, iteration: usize) -> Result<()> {
        let fail = |parameter| Err(Error::NonFinite { iteration, parameter });
        if !self.beta0.is_finite() {
            return fail("beta0");
        }
        if !self.beta1.is_finite() {
            return fail("beta1");
        }
        if !self.sigma2_gamma.is_finite() {
            return fail("sigma2_gamma");
        }
        if !self.sigma2_alpha.is_finite() {
            return fail("sigma2_alpha");
        }
        if !self.omega.is_finite() {
            return fail("omega");
        }
        if !self.gamma.iter().all(|v| v.is_finite()) {
            return fail("gamma");
        }
        if !self.alpha_tilde.iter().all(|v| v.is_finite()) {
            return fail("alpha_tilde");
        }
        Ok(())
    }
}

fn floored_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var.is_finite() {
        var.max(INIT_VARIANCE_FLOOR)
    } else {
        INIT_VARIANCE_FLOOR
    }
}

/// Starting state: `gamma` at the exposure estimates, no pleiotropy
/// effects, indicators drawn with probability 0.1, slopes at zero and
/// variances at the sample variances of the estimates.
pub(crate) fn initial_state<R: Rng>(
    exposure_beta: &[f64],
    outcome_beta: &[f64],
    n_units: usize,
    rng: &mut R,
) -> Result<SamplerState> {
    let p = exposure_beta.len();
    if p < 2 {
        return Err(Error::Data(format!("at least 2 SNPs are required, got {p}")));
    }
    Ok(SamplerState {
        beta0: 0.0,
        beta1: 0.0,
        gamma: exposure_beta.to_vec(),
        alpha_tilde: vec![0.0; p],
        eta: (0..n_units).map(|_| rng.random::<f64>() < 0.1).collect(),
        sigma2_gamma: floored_variance(exposure_beta),
        sigma2_alpha: floored_variance(outcome_beta),
        omega: 0.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal1 {
    pub mean: f64,
    pub var: f64,
}

impl Normal1 {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.var.sqrt() * z
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        ln_normal(x, self.mean, self.var)
    }
}

/// Full conditional of a mixture slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeConditional {
    Gaussian(Normal1),
    /// No unit carries information and the prior is flat.
    Improper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl InvGammaParams {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = Gamma::new(self.shape, 1.0)
            .expect("inverse-gamma shape is positive")
            .sample(rng);
        (self.scale / g).max(VARIANCE_FLOOR)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        ln_inv_gamma(x, self.shape, self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w: f64 = Beta::new(self.a, self.b)
            .expect("beta parameters are positive")
            .sample(rng);
        w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }
}

pub fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var)
}

pub fn ln_inv_gamma(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

pub fn ln_beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return f64::NEG_INFINITY;
    }
    let term = |e: f64, v: f64| if e == 0.0 { 0.0 } else { e * v.ln() };
    term(a - 1.0, x) + term(b - 1.0, 1.0 - x) - ln_beta(a, b)
}

/// Probability of inclusion for a log-odds value, robust to infinities.
pub fn inclusion_probability(log_odds: f64) -> f64 {
    if log_odds >= 0.0 {
        1.0 / (1.0 + (-log_odds).exp())
    } else {
        let e = log_odds.exp();
        e / (1.0 + e)
    }
}

/// Sufficient statistics of the per-unit variables for the global updates.
/// The outcome-likelihood terms are `q = gamma' K gamma`, `r = lin' gamma`
/// and `c = alpha' K gamma` with `K` the outcome precision kernel.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GlobalStats {
    pub null_quad: f64,
    pub null_lin: f64,
    pub pleio_quad: f64,
    pub pleio_lin: f64,
    pub sum_gamma_sq: f64,
    pub sum_alpha_sq: f64,
    pub n_snps: usize,
    pub n_units: usize,
    pub n_pleiotropic: usize,
}

impl GlobalStats {
    pub(crate) fn add(&mut self, other: &GlobalStats) {
        self.null_quad += other.null_quad;
        self.null_lin += other.null_lin;
        self.pleio_quad += other.pleio_quad;
        self.pleio_lin += other.pleio_lin;
        self.sum_gamma_sq += other.sum_gamma_sq;
        self.sum_alpha_sq += other.sum_alpha_sq;
        self.n_snps += other.n_snps;
        self.n_units += other.n_units;
        self.n_pleiotropic += other.n_pleiotropic;
    }
}

fn slope_conditional(quad: f64, lin: f64, hyper: &Hyperparams) -> SlopeConditional {
    let precision = quad + hyper.beta_prior_precision();
    if precision <= f64::MIN_POSITIVE || !precision.is_finite() {
        return SlopeConditional::Improper;
    }
    SlopeConditional::Gaussian(Normal1 {
        mean: lin / precision,
        var: 1.0 / precision,
    })
}

pub(crate) fn beta0_conditional(stats: &GlobalStats, hyper: &Hyperparams) -> SlopeConditional {
    slope_conditional(stats.null_quad, stats.null_lin, hyper)
}

pub(crate) fn beta1_conditional(stats: &GlobalStats, hyper: &Hyperparams) -> SlopeConditional {
    slope_conditional(stats.pleio_quad, stats.pleio_lin, hyper)
}

/// Draw a slope; an improper conditional falls back to a unit random-walk
/// step. Returns whether the fallback was used.
pub(crate) fn draw_slope<R: Rng + ?Sized>(
    current: &mut f64,
    conditional: SlopeConditional,
    rng: &mut R,
) -> bool {
    match conditional {
        SlopeConditional::Gaussian(n) => {
            *current = n.sample(rng);
            false
        }
        SlopeConditional::Improper => {
            *current = Normal1 { mean: *current, var: 1.0 }.sample(rng);
            true
        }
    }
}

pub(crate) fn sigma2_gamma_conditional(stats: &GlobalStats, hyper: &Hyperparams) -> InvGammaParams {
    InvGammaParams {
        shape: hyper.a_gamma + stats.n_snps as f64 / 2.0,
        scale: hyper.b_gamma + stats.sum_gamma_sq / 2.0,
    }
}

pub(crate) fn sigma2_alpha_conditional(stats: &GlobalStats, hyper: &Hyperparams) -> InvGammaParams {
    InvGammaParams {
        shape: hyper.a_alpha + stats.n_snps as f64 / 2.0,
        scale: hyper.b_alpha + stats.sum_alpha_sq / 2.0,
    }
}

pub(crate) fn omega_conditional(stats: &GlobalStats, hyper: &Hyperparams) -> BetaParams {
    BetaParams {
        a: hyper.a + stats.n_pleiotropic as f64,
        b: hyper.b + (stats.n_units - stats.n_pleiotropic) as f64,
    }
}

/// Whether each slope used the improper-conditional fallback in a sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepFlags {
    pub beta0_fallback: bool,
    pub beta1_fallback: bool,
}

/// Global updates in fixed order: beta0, beta1, sigma2_gamma, sigma2_alpha, omega.
pub(crate) fn update_globals<R: Rng + ?Sized>(
    state: &mut SamplerState,
    stats: &GlobalStats,
    hyper: &Hyperparams,
    constraints: &Constraints,
    rng: &mut R,
) -> SweepFlags {
    let beta0_fallback = draw_slope(&mut state.beta0, beta0_conditional(stats, hyper), rng);
    let beta1_fallback = draw_slope(&mut state.beta1, beta1_conditional(stats, hyper), rng);
    state.sigma2_gamma = sigma2_gamma_conditional(stats, hyper).sample(rng);
    state.sigma2_alpha = sigma2_alpha_conditional(stats, hyper).sample(rng);
    state.omega = match constraints.fixed_omega {
        Some(w) => w,
        None => omega_conditional(stats, hyper).sample(rng),
    };
    SweepFlags {
        beta0_fallback,
        beta1_fallback,
    }
}

/// Joint log prior of the global parameters and indicators.
pub(crate) fn ln_prior_globals(state: &SamplerState, hyper: &Hyperparams) -> f64 {
    if !(state.sigma2_gamma > 0.0 && state.sigma2_alpha > 0.0) || !(0.0..=1.0).contains(&state.omega) {
        return f64::NEG_INFINITY;
    }
    let mut lp = ln_inv_gamma(state.sigma2_gamma, hyper.a_gamma, hyper.b_gamma)
        + ln_inv_gamma(state.sigma2_alpha, hyper.a_alpha, hyper.b_alpha)
        + ln_beta_pdf(state.omega, hyper.a, hyper.b);
    if let Some(v) = hyper.beta_prior_var {
        lp += ln_normal(state.beta0, 0.0, v) + ln_normal(state.beta1, 0.0, v);
    }
    for &e in &state.eta {
        lp += if e { state.omega.ln() } else { (1.0 - state.omega).ln() };
    }
    lp += state
        .gamma
        .iter()
        .map(|&g| ln_normal(g, 0.0, state.sigma2_gamma))
        .sum::<f64>();
    lp += state
        .alpha_tilde
        .iter()
        .map(|&a| ln_normal(a, 0.0, state.sigma2_alpha))
        .sum::<f64>();
    lp
}

/// Per-sweep random streams of one chain.
#[derive(Debug, Clone, Copy)]
pub struct SweepStreams<'a> {
    pub key: &'a StreamKey,
    pub iteration: u64,
}

impl SweepStreams<'_> {
    pub fn site(&self, site: Site) -> rng::Rng {
        // stream 0 is reserved for initialization
        self.key.rng(self.iteration + 1, site)
    }
}

pub(crate) fn chain_key(seed: u64, chain: usize) -> StreamKey {
    StreamKey::new(seed, &[rng::domain::CHAIN, chain as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub beta0: f64,
    pub beta1: f64,
    pub sigma2_gamma: f64,
    pub sigma2_alpha: f64,
    pub omega: f64,
    pub eta_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub draws: Vec<Draw>,
    /// Retained draws in which each unit had its indicator set.
    pub inclusion_counts: Vec<u64>,
    pub beta0_fallbacks: usize,
    pub beta1_fallbacks: usize,
    pub final_state: SamplerState,
}

impl ChainTrace {
    pub(crate) fn new(n_units: usize, capacity: usize, state: SamplerState) -> Self {
        ChainTrace {
            draws: Vec::with_capacity(capacity),
            inclusion_counts: vec![0; n_units],
            beta0_fallbacks: 0,
            beta1_fallbacks: 0,
            final_state: state,
        }
    }

    pub(crate) fn record(&mut self, state: &SamplerState) {
        let n = state.eta.len().max(1) as f64;
        self.draws.push(Draw {
            beta0: state.beta0,
            beta1: state.beta1,
            sigma2_gamma: state.sigma2_gamma,
            sigma2_alpha: state.sigma2_alpha,
            omega: state.omega,
            eta_mean: state.n_pleiotropic() as f64 / n,
        });
        for (c, &e) in self.inclusion_counts.iter_mut().zip(&state.eta) {
            *c += u64::from(e);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Snp,
    Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub unit: UnitKind,
    pub n_units: usize,
    pub chains: Vec<ChainTrace>,
}

impl Trace {
    pub fn n_rows(&self) -> usize {
        self.chains.iter().map(|c| c.draws.len()).sum()
    }

    pub fn beta0_by_chain(&self) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.draws.iter().map(|d| d.beta0).collect())
            .collect()
    }

    pub fn draws(&self) -> impl Iterator<Item = &Draw> {
        self.chains.iter().flat_map(|c| c.draws.iter())
    }

    /// Posterior inclusion frequency of each unit, pooled over chains.
    pub fn inclusion(&self) -> Vec<f64> {
        let total = self.n_rows().max(1) as f64;
        (0..self.n_units)
            .map(|u| self.chains.iter().map(|c| c.inclusion_counts[u]).sum::<u64>() as f64 / total)
            .collect()
    }

    pub fn fallback_counts(&self) -> (usize, usize) {
        self.chains.iter().fold((0, 0), |(a, b), c| {
            (a + c.beta0_fallbacks, b + c.beta1_fallbacks)
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "chain,draw,beta0,beta1,sigma2_gamma,sigma2_alpha,omega,eta_mean")?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (i, d) in chain.draws.iter().enumerate() {
                writeln!(
                    w,
                    "{c},{i},{},{},{},{},{},{}",
                    d.beta0, d.beta1, d.sigma2_gamma, d.sigma2_alpha, d.omega, d.eta_mean
                )?;
            }
        }
        Ok(())
    }
}
