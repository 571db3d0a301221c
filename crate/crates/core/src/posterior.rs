//! Posterior summaries, convergence diagnostics and replicate benchmarks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub null: f64,
    pub pleiotropic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub beta0_mean: f64,
    /// Posterior standard deviation.
    pub beta0_sd: f64,
    pub level: f64,
    pub credible_interval: (f64, f64),
    pub p_value: Option<f64>,
    pub beta1_mean: f64,
    pub omega_mean: f64,
    pub sigma2_gamma_mean: f64,
    pub sigma2_alpha_mean: f64,
    pub eta_inclusion: Vec<f64>,
    pub ess_beta0: f64,
    pub rhat_beta0: Option<f64>,
    pub component_occupancy: Occupancy,
    pub n_draws: usize,
    pub n_chains: usize,
    pub beta0_fallbacks: usize,
    pub beta1_fallbacks: usize,
    pub diagnostics: Vec<String>,
}

/// Two-sided Wald p-value `2 Φ(−|z|)`.
pub fn wald_p_value(mean: f64, sd: f64) -> Option<f64> {
    if !(sd > 0.0) || !mean.is_finite() {
        return None;
    }
    Some(erfc((mean / sd).abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn equal_tailed_interval(draws: &[f64], level: f64) -> (f64, f64) {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&sorted, tail), quantile_sorted(&sorted, 1.0 - tail))
}

fn autocov(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / n as f64
}

/// Multi-chain effective sample size with Geyer's initial positive
/// monotone sequence. Chains are truncated to the shortest one. Never
/// exceeds the total number of draws.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let m = chains.len();
    let total = (n * m) as f64;
    if n < 4 {
        return total;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = chains.iter().map(|c| sample_var(c)).sum::<f64>() / m as f64;
    let b_over_n = if m > 1 { sample_var(&means) } else { 0.0 };
    let var_plus = (n - 1) as f64 / n as f64 * w + b_over_n;
    if !(var_plus > 0.0) {
        return total;
    }
    let rho = |t: usize| {
        let acov = chains.iter().zip(&means).map(|(c, &mu)| autocov(c, mu, t)).sum::<f64>() / m as f64;
        1.0 - (w - acov) / var_plus
    };
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        t += 2;
    }
    (total / tau.max(f64::MIN_POSITIVE)).min(total)
}

/// Split-R̂ over chains (each split in halves). `None` with fewer than two
/// chains or zero within-chain variance.
pub fn split_rhat(chains: &[Vec<f64>]) -> Option<f64> {
    if chains.len() < 2 {
        return None;
    }
    let n = chains.iter().map(Vec::len).min()? / 2;
    if n < 2 {
        return None;
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..n], &c[c.len() - n..]])
        .collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = halves.iter().map(|h| sample_var(h)).sum::<f64>() / halves.len() as f64;
    if !(w > 0.0) {
        return None;
    }
    let var_plus = (n - 1) as f64 / n as f64 * w + sample_var(&means);
    Some((var_plus / w).sqrt())
}

pub fn summarize(trace: &Trace, level: f64) -> Result<PosteriorSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("credible level {level} outside (0, 1)")));
    }
    let n_draws = trace.n_rows();
    if n_draws == 0 {
        return Err(Error::Data("trace has no retained draws".into()));
    }
    let by_chain = trace.beta0_by_chain();
    let beta0: Vec<f64> = by_chain.iter().flatten().copied().collect();
    let avg = |f: fn(&crate::model::Draw) -> f64| trace.draws().map(f).sum::<f64>() / n_draws as f64;
    let beta0_mean = mean(&beta0);
    let beta0_sd = sample_var(&beta0).sqrt();
    let p_value = wald_p_value(beta0_mean, beta0_sd);
    let mut diagnostics = Vec::new();
    if p_value.is_none() {
        diagnostics.push("posterior sd of beta0 is zero; p-value undefined".to_string());
    }
    let (b0_fb, b1_fb) = trace.fallback_counts();
    if b0_fb > 0 {
        diagnostics.push(format!("causal component was empty in {b0_fb} retained draws"));
    }
    if b1_fb > 0 {
        diagnostics.push(format!("pleiotropic component was empty in {b1_fb} retained draws"));
    }
    let rhat = split_rhat(&by_chain);
    if let Some(r) = rhat {
        if r > 1.05 {
            diagnostics.push(format!("split R-hat of beta0 is {r:.3}; chains may not have converged"));
        }
    }
    let eta_mean = avg(|d| d.eta_mean);
    let units = trace.n_units as f64;
    Ok(PosteriorSummary {
        beta0_mean,
        beta0_sd,
        level,
        credible_interval: equal_tailed_interval(&beta0, level),
        p_value,
        beta1_mean: avg(|d| d.beta1),
        omega_mean: avg(|d| d.omega),
        sigma2_gamma_mean: avg(|d| d.sigma2_gamma),
        sigma2_alpha_mean: avg(|d| d.sigma2_alpha),
        eta_inclusion: trace.inclusion(),
        ess_beta0: effective_sample_size(&by_chain),
        rhat_beta0: rhat,
        component_occupancy: Occupancy {
            null: units * (1.0 - eta_mean),
            pleiotropic: units * eta_mean,
        },
        n_draws,
        n_chains: trace.chains.len(),
        beta0_fallbacks: b0_fb,
        beta1_fallbacks: b1_fb,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub truth: f64,
    pub alpha_level: f64,
    pub n_replicates: usize,
    pub n_failed: usize,
    pub n_missing_p_value: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub mean_estimate: f64,
    pub sd_estimate: f64,
    pub bias: f64,
    pub coverage: f64,
}

/// Aggregate replicate summaries. Replicates without a p-value count as
/// non-rejections.
pub fn benchmark_report(summaries: &[PosteriorSummary], truth: f64, alpha_level: f64) -> Result<BenchmarkReport> {
    if summaries.is_empty() {
        return Err(Error::Data("benchmark report needs at least one summary".into()));
    }
    let n = summaries.len();
    let estimates: Vec<f64> = summaries.iter().map(|s| s.beta0_mean).collect();
    let rejections = summaries
        .iter()
        .filter(|s| s.p_value.is_some_and(|p| p < alpha_level))
        .count();
    let covered = summaries
        .iter()
        .filter(|s| s.credible_interval.0 <= truth && truth <= s.credible_interval.1)
        .count();
    let mean_estimate = mean(&estimates);
    Ok(BenchmarkReport {
        truth,
        alpha_level,
        n_replicates: n,
        n_failed: 0,
        n_missing_p_value: summaries.iter().filter(|s| s.p_value.is_none()).count(),
        rejections,
        rejection_rate: rejections as f64 / n as f64,
        mean_estimate,
        sd_estimate: sample_var(&estimates).sqrt(),
        bias: mean_estimate - truth,
        coverage: covered as f64 / n as f64,
    })
}

/// Central binomial interval `[lo, hi]` holding at least `level` mass.
pub fn binomial_interval(n: u64, p: f64, level: f64) -> (u64, u64) {
    let dist = Binomial::new(p, n).expect("valid binomial parameters");
    let tail = (1.0 - level) / 2.0;
    (dist.inverse_cdf(tail), dist.inverse_cdf(1.0 - tail))
}

impl BenchmarkReport {
    pub fn render_table(&self) -> String {
        let rows = [
            ("replicates", self.n_replicates.to_string()),
            ("failed", self.n_failed.to_string()),
            ("truth", format!("{:.4}", self.truth)),
            ("alpha level", format!("{:.3}", self.alpha_level)),
            ("rejections", self.rejections.to_string()),
            ("rejection rate", format!("{:.4}", self.rejection_rate)),
            ("mean estimate", format!("{:.5}", self.mean_estimate)),
            ("sd estimate", format!("{:.5}", self.sd_estimate)),
            ("bias", format!("{:.5}", self.bias)),
            ("interval coverage", format!("{:.4}", self.coverage)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<18} {v:>12}\n"));
        }
        out
    }
}
