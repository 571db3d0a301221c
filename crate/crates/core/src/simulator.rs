//! Individual-level data generation for the two benchmark scenarios,
//! reduction to per-SNP summary statistics and replicate benchmarks.

use std::io::Write;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::ld_reference::{estimate_block_corr, uniform_partition, BlockPartition, GenotypePanel, DEFAULT_SHRINKAGE};
use crate::model::{Constraints, Hyperparams, McmcConfig};
use crate::posterior::{benchmark_report, summarize, BenchmarkReport, PosteriorSummary};
use crate::rng::{domain, StreamKey};
use crate::summary_data::{write_gwas_table, HarmonizedDataset, SnpRecord};
use crate::{mr_corr, mr_corr2, par};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub n1: usize,
    pub n2: usize,
    pub n_ref: usize,
    #[serde(alias = "L")]
    pub n_blocks: usize,
    pub block_size: usize,
    pub rho: f64,
    pub rho_alpha_gamma: f64,
    pub sparsity: f64,
    pub h2_gamma: f64,
    pub h2_alpha: f64,
    pub beta0: f64,
    pub r_confounders: usize,
    pub eta_cov_offdiag: f64,
    pub maf_range: (f64, f64),
    pub seed: u64,
    /// Share of each trait's variance explained by the confounders.
    pub confounder_share: f64,
    /// Effect of the scenario-2 shared factor on the outcome.
    pub mediator_loading: f64,
    /// Share of the exposure's residual budget carried by the shared
    /// factor's own noise in scenario 2.
    pub mediator_noise_share: f64,
    /// Fixed fraction of mechanism-2 SNPs; drawn from Beta(1, 10) when unset.
    pub q_fixed: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: 1,
            n1: 5000,
            n2: 5000,
            n_ref: 500,
            n_blocks: 50,
            block_size: 10,
            rho: 0.4,
            rho_alpha_gamma: 0.2,
            sparsity: 0.1,
            h2_gamma: 0.1,
            h2_alpha: 0.05,
            beta0: 0.0,
            r_confounders: 50,
            eta_cov_offdiag: 0.8,
            maf_range: (0.05, 0.5),
            seed: 0,
            confounder_share: 0.2,
            mediator_loading: 0.5,
            mediator_noise_share: 0.5,
            q_fixed: None,
        }
    }
}

impl ScenarioConfig {
    pub fn p(&self) -> usize {
        self.n_blocks * self.block_size
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !matches!(self.scenario, 1 | 2) {
            return fail(format!("scenario must be 1 or 2, got {}", self.scenario));
        }
        if self.n1 < 3 || self.n2 < 3 || self.n_ref < 3 {
            return fail("sample sizes must be at least 3".into());
        }
        if self.n_blocks == 0 || self.block_size == 0 || self.p() < 2 {
            return fail("need at least 2 SNPs (n_blocks * block_size)".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return fail(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if !(self.rho_alpha_gamma > -1.0 && self.rho_alpha_gamma < 1.0) {
            return fail(format!("rho_alpha_gamma must lie in (-1, 1), got {}", self.rho_alpha_gamma));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return fail(format!("sparsity must lie in [0, 1], got {}", self.sparsity));
        }
        for (name, v) in [("h2_gamma", self.h2_gamma), ("h2_alpha", self.h2_alpha)] {
            if !(0.0..1.0).contains(&v) {
                return fail(format!("{name} must lie in [0, 1), got {v}"));
            }
        }
        if self.h2_gamma + self.h2_alpha >= 1.0 {
            return fail("h2_gamma + h2_alpha must be below 1".into());
        }
        if !(0.0..1.0).contains(&self.confounder_share) {
            return fail(format!("confounder_share must lie in [0, 1), got {}", self.confounder_share));
        }
        if !(0.0..=1.0).contains(&self.mediator_noise_share) {
            return fail(format!("mediator_noise_share must lie in [0, 1], got {}", self.mediator_noise_share));
        }
        if self.eta_cov_offdiag.abs() > 1.0 {
            return fail(format!("eta_cov_offdiag must lie in [-1, 1], got {}", self.eta_cov_offdiag));
        }
        let (lo, hi) = self.maf_range;
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return fail(format!("maf_range must satisfy 0 < low <= high <= 0.5, got ({lo}, {hi})"));
        }
        if let Some(q) = self.q_fixed {
            if !(0.0..=1.0).contains(&q) {
                return fail(format!("q_fixed must lie in [0, 1], got {q}"));
            }
        }
        if !self.beta0.is_finite() || !self.mediator_loading.is_finite() {
            return fail("beta0 and mediator_loading must be finite".into());
        }
        Ok(())
    }

    pub fn partition(&self) -> BlockPartition {
        uniform_partition(self.p(), self.block_size).expect("validated dimensions")
    }
}

/// Minor allele frequency per SNP, shared by all panels of one study.
pub fn draw_mafs<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = config.maf_range;
    if lo == hi {
        return vec![lo; config.p()];
    }
    let u = Uniform::new(lo, hi).expect("validated range");
    (0..config.p()).map(|_| u.sample(rng)).collect()
}

/// Standard-normal cutpoints giving HWE dosage probabilities.
pub fn hwe_cutpoints(maf: f64) -> (f64, f64) {
    let n = Normal::standard();
    let q = 1.0 - maf;
    (n.inverse_cdf(q * q), n.inverse_cdf(1.0 - maf * maf))
}

/// Dosages from a latent Gaussian with block AR(`rho`) correlation, with
/// the minor allele counted.
pub fn gen_genotypes<R: Rng>(n: usize, config: &ScenarioConfig, mafs: &[f64], rng: &mut R) -> GenotypePanel {
    let p = config.p();
    let cuts: Vec<(f64, f64)> = mafs.iter().map(|&f| hwe_cutpoints(f)).collect();
    let innov = (1.0 - config.rho * config.rho).sqrt();
    let mut dosages = vec![0.0; n * p];
    for i in 0..n {
        let mut prev = 0.0;
        for k in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            let z = if k % config.block_size == 0 { e } else { config.rho * prev + innov * e };
            prev = z;
            let (c0, c1) = cuts[k];
            dosages[k * n + i] = if z < c0 {
                0.0
            } else if z < c1 {
                1.0
            } else {
                2.0
            };
        }
    }
    let ids = (0..p).map(|k| format!("snp{}", k + 1)).collect();
    GenotypePanel::from_columns(n, ids, dosages).expect("consistent dimensions")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    /// SNPs that keep a nonzero direct effect.
    pub mask: Vec<bool>,
}

/// Unit-variance bivariate normal `(gamma_k, alpha_k)` pairs with
/// correlation `rho_alpha_gamma`; all but `ceil(sparsity * p)` alphas zeroed.
pub fn gen_effects<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> EffectSizes {
    let p = config.p();
    let r = config.rho_alpha_gamma;
    let mut gamma = Vec::with_capacity(p);
    let mut alpha = Vec::with_capacity(p);
    for _ in 0..p {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        gamma.push(z1);
        alpha.push(r * z1 + (1.0 - r * r).sqrt() * z2);
    }
    let n_keep = ((config.sparsity * p as f64).ceil() as usize).min(p);
    let mut mask = vec![false; p];
    for k in sample_indices(rng, p, n_keep) {
        mask[k] = true;
    }
    for (a, &m) in alpha.iter_mut().zip(&mask) {
        if !m {
            *a = 0.0;
        }
    }
    EffectSizes { gamma, alpha, mask }
}

pub(crate) fn var_emp(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
}

/// Scales chosen so that, on the realized sample, the genetic component
/// explains `h2` and the confounder component `confounder_share` of a total
/// variance of `1 + var(fixed)`; the residual variance fills the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceScales {
    pub genetic_scale: f64,
    pub confounder_scale: f64,
    pub residual_var: f64,
    pub total_var: f64,
}

pub fn scale_to_heritability(
    genetic: &[f64],
    confounder: &[f64],
    fixed: Option<&[f64]>,
    h2: f64,
    confounder_share: f64,
) -> Result<VarianceScales> {
    let fixed_var = fixed.map_or(0.0, var_emp);
    let total = 1.0 + fixed_var;
    let vg = var_emp(genetic);
    let genetic_scale = if h2 == 0.0 {
        0.0
    } else if vg > 0.0 {
        (h2 * total / vg).sqrt()
    } else {
        return Err(Error::Config(format!(
            "heritability target {h2} is infeasible: the genetic component has zero variance"
        )));
    };
    let vc = var_emp(confounder);
    let confounder_scale = if confounder_share > 0.0 && vc > 0.0 {
        (confounder_share * total / vc).sqrt()
    } else {
        0.0
    };
    let combined: Vec<f64> = (0..genetic.len())
        .map(|i| genetic_scale * genetic[i] + confounder_scale * confounder[i] + fixed.map_or(0.0, |f| f[i]))
        .collect();
    let explained = var_emp(&combined);
    let residual_var = total - explained;
    if residual_var < 0.0 {
        return Err(Error::Config(format!(
            "variance budget infeasible: total {total:.4}, explained {explained:.4} (genetic target {h2}, confounder share {confounder_share}, fixed {fixed_var:.4})"
        )));
    }
    Ok(VarianceScales {
        genetic_scale,
        confounder_scale,
        residual_var,
        total_var: total,
    })
}

/// Per-SNP simple regression with intercept: `(beta, se)` per column.
pub fn marginal_regression(panel: &GenotypePanel, trait_values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = panel.n_individuals();
    let y_mean = trait_values.iter().sum::<f64>() / n as f64;
    let syy: f64 = trait_values.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    (0..panel.n_snps())
        .map(|k| {
            let g = panel.column(k);
            let g_mean = g.iter().sum::<f64>() / n as f64;
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for (gi, yi) in g.iter().zip(trait_values) {
                let d = gi - g_mean;
                sxx += d * d;
                sxy += d * (yi - y_mean);
            }
            let beta = sxy / sxx;
            let rss = (syy - beta * sxy).max(0.0);
            (beta, (rss / (n as f64 - 2.0) / sxx).sqrt())
        })
        .unzip()
}

fn genetic_score(panel: &GenotypePanel, effects: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; panel.n_individuals()];
    for (k, &b) in effects.iter().enumerate() {
        if b != 0.0 {
            for (o, g) in out.iter_mut().zip(panel.column(k)) {
                *o += b * g;
            }
        }
    }
    out
}

fn normals<R: Rng>(n: usize, sd: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Confounder loadings `(eta_x, eta_y)` with unit variances.
fn confounder_loadings<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let c = config.eta_cov_offdiag;
    (0..config.r_confounders)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            (z1, c * z1 + (1.0 - c * c).sqrt() * z2)
        })
        .unzip()
}

/// `U eta` for a fresh standard-normal confounder matrix `U`.
fn confounder_terms<R: Rng>(n: usize, loadings: &[&[f64]], rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; loadings.len()];
    for i in 0..n {
        for j in 0..loadings[0].len() {
            let u: f64 = rng.sample(StandardNormal);
            for (o, eta) in out.iter_mut().zip(loadings) {
                o[i] += u * eta[j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub scenario: u8,
    pub beta0: f64,
    /// Per-SNP exposure effects on the dosage scale.
    pub gamma: Vec<f64>,
    /// Per-SNP direct outcome effects on the dosage scale.
    pub alpha: Vec<f64>,
    pub pleiotropy_mask: Vec<bool>,
    /// SNPs acting through the shared factor (scenario 2).
    pub mechanism2: Vec<bool>,
    pub q: Option<f64>,
    pub mafs: Vec<f64>,
    pub exposure_h2: f64,
    pub outcome_h2_alpha: f64,
}

impl Truth {
    /// Whether each block holds any SNP with a pleiotropic path.
    pub fn block_indicators(&self, partition: &BlockPartition) -> Vec<bool> {
        partition
            .blocks()
            .iter()
            .map(|r| r.clone().any(|k| self.pleiotropy_mask[k] || self.mechanism2[k]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStudy {
    pub dataset: HarmonizedDataset,
    pub reference_panel: GenotypePanel,
    pub partition: BlockPartition,
    pub truth: Truth,
    pub n1: usize,
    pub n2: usize,
}

mod stream {
    pub const MAF: u64 = 0;
    pub const EFFECTS: u64 = 1;
    pub const SAMPLE1: u64 = 2;
    pub const SAMPLE2: u64 = 3;
    pub const REFERENCE: u64 = 4;
    pub const CONFOUNDERS1: u64 = 5;
    pub const CONFOUNDERS2: u64 = 6;
    pub const NOISE1: u64 = 7;
    pub const NOISE2: u64 = 8;
    pub const SPLIT: u64 = 9;
    pub const LOADINGS: u64 = 10;
}

/// Key for one replicate of a benchmark.
pub fn replicate_key(seed: u64, replicate: usize) -> StreamKey {
    StreamKey::new(seed, &[domain::SIMULATION, replicate as u64])
}

pub fn gen_scenario1(config: &ScenarioConfig, key: &StreamKey) -> Result<SimulatedStudy> {
    let mut c = config.clone();
    c.scenario = 1;
    gen_study(&c, key)
}

pub fn gen_scenario2(config: &ScenarioConfig, key: &StreamKey) -> Result<SimulatedStudy> {
    let mut c = config.clone();
    c.scenario = 2;
    gen_study(&c, key)
}

/// Generate one study following `config.scenario`.
pub fn gen_study(config: &ScenarioConfig, key: &StreamKey) -> Result<SimulatedStudy> {
    config.validate()?;
    let p = config.p();
    let mafs = draw_mafs(config, &mut key.sequential(stream::MAF));
    let effects = gen_effects(config, &mut key.sequential(stream::EFFECTS));
    let g1 = gen_genotypes(config.n1, config, &mafs, &mut key.sequential(stream::SAMPLE1));
    let g2 = gen_genotypes(config.n2, config, &mafs, &mut key.sequential(stream::SAMPLE2));
    let reference = gen_genotypes(config.n_ref, config, &mafs, &mut key.sequential(stream::REFERENCE));

    let (mechanism2, q) = if config.scenario == 2 {
        let mut rng = key.sequential(stream::SPLIT);
        let q = match config.q_fixed {
            Some(q) => q,
            None => Beta::new(1.0, 10.0).expect("valid").sample(&mut rng),
        };
        let n2 = ((q * p as f64).round() as usize).min(p);
        let mut m = vec![false; p];
        for k in sample_indices(&mut rng, p, n2) {
            m[k] = true;
        }
        (m, Some(q))
    } else {
        (vec![false; p], None)
    };
    let direct: Vec<f64> = effects.gamma.iter().zip(&mechanism2).map(|(g, &m)| if m { 0.0 } else { *g }).collect();
    let mediated: Vec<f64> = effects.gamma.iter().zip(&mechanism2).map(|(g, &m)| if m { *g } else { 0.0 }).collect();

    let (eta_x, eta_y) = confounder_loadings(config, &mut key.sequential(stream::LOADINGS));
    let conf1 = confounder_terms(config.n1, &[&eta_x], &mut key.sequential(stream::CONFOUNDERS1));
    let conf2 = confounder_terms(config.n2, &[&eta_x, &eta_y], &mut key.sequential(stream::CONFOUNDERS2));

    // exposure on sample 1 fixes the shared scales
    let direct1 = genetic_score(&g1, &direct);
    let mediated1 = genetic_score(&g1, &mediated);
    let genetic1: Vec<f64> = direct1.iter().zip(&mediated1).map(|(a, b)| a + b).collect();
    let ex_scales = scale_to_heritability(&genetic1, &conf1[0], None, config.h2_gamma, config.confounder_share)?;
    let mediator_noise_var = if config.scenario == 2 { config.mediator_noise_share * ex_scales.residual_var } else { 0.0 };
    let exposure_noise_var = ex_scales.residual_var - mediator_noise_var;

    let mut noise1 = key.sequential(stream::NOISE1);
    let e_u1 = normals(config.n1, mediator_noise_var.sqrt(), &mut noise1);
    let e_x1 = normals(config.n1, exposure_noise_var.sqrt(), &mut noise1);
    let x: Vec<f64> = (0..config.n1)
        .map(|i| ex_scales.genetic_scale * genetic1[i] + ex_scales.confounder_scale * conf1[0][i] + e_u1[i] + e_x1[i])
        .collect();

    // exposure regenerated on sample 2 with the same parameters
    let mut noise2 = key.sequential(stream::NOISE2);
    let direct2 = genetic_score(&g2, &direct);
    let mediated2 = genetic_score(&g2, &mediated);
    let e_u2 = normals(config.n2, mediator_noise_var.sqrt(), &mut noise2);
    let e_x2 = normals(config.n2, exposure_noise_var.sqrt(), &mut noise2);
    let shared2: Vec<f64> = (0..config.n2)
        .map(|i| ex_scales.genetic_scale * mediated2[i] + e_u2[i])
        .collect();
    let x2: Vec<f64> = (0..config.n2)
        .map(|i| ex_scales.genetic_scale * direct2[i] + shared2[i] + ex_scales.confounder_scale * conf2[0][i] + e_x2[i])
        .collect();
    let fixed: Vec<f64> = (0..config.n2)
        .map(|i| config.beta0 * x2[i] + if config.scenario == 2 { config.mediator_loading * shared2[i] } else { 0.0 })
        .collect();
    let pleio2 = genetic_score(&g2, &effects.alpha);
    let out_scales = scale_to_heritability(&pleio2, &conf2[1], Some(&fixed), config.h2_alpha, config.confounder_share)?;
    let e_y = normals(config.n2, out_scales.residual_var.sqrt(), &mut noise2);
    let y: Vec<f64> = (0..config.n2)
        .map(|i| fixed[i] + out_scales.genetic_scale * pleio2[i] + out_scales.confounder_scale * conf2[1][i] + e_y[i])
        .collect();

    let (bx, sx) = marginal_regression(&g1, &x);
    let (by, sy) = marginal_regression(&g2, &y);
    let check = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !(check(&bx) && check(&sx) && check(&by) && check(&sy)) {
        return Err(Error::Numeric("simulated summary statistics are not finite (monomorphic SNP?)".into()));
    }
    let dataset = HarmonizedDataset::new(g1.snp_ids().to_vec(), bx, sx, by, sy)?;
    let gamma: Vec<f64> = effects.gamma.iter().map(|g| g * ex_scales.genetic_scale).collect();
    let alpha: Vec<f64> = effects.alpha.iter().map(|a| a * out_scales.genetic_scale).collect();
    let exposure_h2 = var_emp(&genetic_score(&g1, &gamma)) / var_emp(&x);
    let outcome_h2_alpha = var_emp(&genetic_score(&g2, &alpha)) / var_emp(&y);
    Ok(SimulatedStudy {
        dataset,
        reference_panel: reference,
        partition: config.partition(),
        truth: Truth {
            scenario: config.scenario,
            beta0: config.beta0,
            gamma,
            alpha,
            pleiotropy_mask: effects.mask,
            mechanism2,
            q,
            mafs,
            exposure_h2,
            outcome_h2_alpha,
        },
        n1: config.n1,
        n2: config.n2,
    })
}

fn gwas_records(ids: &[String], beta: &[f64], se: &[f64], n: usize, block_size: usize) -> Vec<SnpRecord> {
    ids.iter()
        .enumerate()
        .map(|(k, id)| {
            let p = crate::posterior::wald_p_value(beta[k], se[k]).unwrap_or(1.0);
            SnpRecord {
                snp_id: id.clone(),
                chromosome: (k / block_size) as u32 + 1,
                position: (k % block_size) as u64 * 1000 + 1,
                effect_allele: "A".into(),
                other_allele: "G".into(),
                beta: beta[k],
                se: se[k],
                p_value: Some(p),
                sample_size: Some(n as u64),
            }
        })
        .collect()
}

impl SimulatedStudy {
    pub fn exposure_records(&self) -> Vec<SnpRecord> {
        let bs = self.partition.blocks()[0].len();
        gwas_records(&self.dataset.snp_ids, &self.dataset.exposure_beta, &self.dataset.exposure_se, self.n1, bs)
    }

    pub fn outcome_records(&self) -> Vec<SnpRecord> {
        let bs = self.partition.blocks()[0].len();
        gwas_records(&self.dataset.snp_ids, &self.dataset.outcome_beta, &self.dataset.outcome_se, self.n2, bs)
    }

    /// Write `exposure.tsv`, `outcome.tsv`, `reference.tsv`, `partition.tsv`
    /// and `truth.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| {
            let path = dir.join(name);
            std::fs::File::create(&path)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(path, e))
        };
        let wrap = |name: &str, r: std::io::Result<()>| r.map_err(|e| Error::io(dir.join(name), e));
        wrap("exposure.tsv", write_gwas_table(create("exposure.tsv")?, &self.exposure_records()))?;
        wrap("outcome.tsv", write_gwas_table(create("outcome.tsv")?, &self.outcome_records()))?;
        wrap("reference.tsv", self.reference_panel.write_tsv(create("reference.tsv")?))?;
        wrap("partition.tsv", self.partition.write_tsv(create("partition.tsv")?, &self.dataset.snp_ids))?;
        let mut w = create("truth.json")?;
        wrap(
            "truth.json",
            serde_json::to_writer_pretty(&mut w, &self.truth)
                .map_err(std::io::Error::other)
                .and_then(|_| w.flush()),
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MrCorr,
    MrCorr2,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MrCorr => "mr_corr",
            Method::MrCorr2 => "mr_corr2",
        }
    }
}

/// Slope prior variance used by benchmark fits. Under flat slope priors a
/// chain whose causal component empties can drift without bound.
pub const BENCHMARK_BETA_PRIOR_VAR: f64 = 1.0;

/// How each replicate is fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub method: Method,
    pub hyper: Hyperparams,
    pub mcmc: McmcConfig,
    pub ld_shrinkage: f64,
    /// Hold omega at this value (0 disables the pleiotropy correction).
    pub fixed_omega: Option<f64>,
    pub level: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            method: Method::MrCorr2,
            hyper: Hyperparams {
                beta_prior_var: Some(BENCHMARK_BETA_PRIOR_VAR),
                ..Hyperparams::default()
            },
            mcmc: McmcConfig {
                n_iter: 3000,
                n_burnin: 1000,
                thin: 1,
                n_chains: 1,
                seed: 0,
            },
            ld_shrinkage: DEFAULT_SHRINKAGE,
            fixed_omega: None,
            level: 0.95,
        }
    }
}

/// Fit one simulated study; the MCMC seed in `settings` is replaced by `seed`.
pub fn fit_study(study: &SimulatedStudy, settings: &FitSettings, seed: u64) -> Result<PosteriorSummary> {
    let mcmc = McmcConfig { seed, ..settings.mcmc };
    let constraints = Constraints { fixed_eta: None, fixed_omega: settings.fixed_omega };
    let trace = match settings.method {
        Method::MrCorr => {
            // one SNP per block as the near-independent instrument set
            let idx: Vec<usize> = study.partition.blocks().iter().map(|r| r.start).collect();
            let subset = study.dataset.subset(&idx);
            mr_corr::run_chain_with(&subset, &settings.hyper, &mcmc, &constraints)?
        }
        Method::MrCorr2 => {
            let corr = estimate_block_corr(&study.reference_panel, &study.partition, settings.ld_shrinkage)?;
            let blocks = mr_corr2::precompute_blocks(&study.dataset, &study.partition, &corr)?;
            mr_corr2::run_blocks(&blocks, &settings.hyper, &mcmc, &constraints)?
        }
    };
    summarize(&trace, settings.level)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub q: Option<f64>,
    pub summary: Option<PosteriorSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub scenario: u8,
    pub method: Method,
    pub report: Option<BenchmarkReport>,
    pub replicates: Vec<ReplicateResult>,
}

impl BenchmarkOutcome {
    pub fn write_replicates_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "replicate\tq\tbeta0_mean\tbeta0_sd\tci_lower\tci_upper\tp_value\terror")?;
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
        for r in &self.replicates {
            match &r.summary {
                Some(s) => writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t",
                    r.replicate,
                    opt(r.q),
                    s.beta0_mean,
                    s.beta0_sd,
                    s.credible_interval.0,
                    s.credible_interval.1,
                    opt(s.p_value)
                )?,
                None => writeln!(
                    w,
                    "{}\t{}\tNA\tNA\tNA\tNA\tNA\t{}",
                    r.replicate,
                    opt(r.q),
                    r.error.as_deref().unwrap_or("").replace('\t', " ")
                )?,
            }
        }
        Ok(())
    }
}

/// Simulate and fit `n_replicates` independent studies. A failing replicate
/// is recorded and counted but does not abort the run.
pub fn run_benchmark(
    config: &ScenarioConfig,
    n_replicates: usize,
    settings: &FitSettings,
    alpha_level: f64,
) -> Result<BenchmarkOutcome> {
    config.validate()?;
    settings.hyper.validate()?;
    settings.mcmc.validate()?;
    if n_replicates == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    if !(alpha_level > 0.0 && alpha_level < 1.0) {
        return Err(Error::Config(format!("alpha level {alpha_level} outside (0, 1)")));
    }
    let replicates = par::map_indexed(n_replicates, |r| {
        let key = replicate_key(config.seed, r);
        let fit_seed = key.child_seed(&[domain::FIT]);
        let result = gen_study(config, &key).and_then(|s| {
            let q = s.truth.q;
            fit_study(&s, settings, fit_seed).map(|sum| (q, sum))
        });
        match result {
            Ok((q, summary)) => ReplicateResult { replicate: r, q, summary: Some(summary), error: None },
            Err(e) => ReplicateResult { replicate: r, q: None, summary: None, error: Some(e.to_string()) },
        }
    });
    let summaries: Vec<PosteriorSummary> = replicates.iter().filter_map(|r| r.summary.clone()).collect();
    let n_failed = replicates.len() - summaries.len();
    let report = if summaries.is_empty() {
        None
    } else {
        let mut rep = benchmark_report(&summaries, config.beta0, alpha_level)?;
        rep.n_failed = n_failed;
        Some(rep)
    };
    Ok(BenchmarkOutcome {
        scenario: config.scenario,
        method: settings.method,
        report,
        replicates,
    })
}
