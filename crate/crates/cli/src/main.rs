//! `mrcorr` command line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mrcorr::ld_reference::{
    align_blocks, estimate_block_corr, load_partition, uniform_partition, BlockPartition, GenotypePanel,
    DEFAULT_SHRINKAGE,
};
use mrcorr::posterior::{summarize, PosteriorSummary};
use mrcorr::simulator::{gen_study, replicate_key, run_benchmark, FitSettings, Method, ScenarioConfig};
use mrcorr::summary_data::{
    harmonize, parse_gwas_table, select_instruments, ColumnMap, HarmonizeOptions, Harmonized, HarmonizedDataset,
};
use mrcorr::{mr_corr, mr_corr2, par, Hyperparams, McmcConfig, Trace};

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "mrcorr", version, about = "Mendelian randomization with correlated pleiotropy")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, env = "MRCORR_WORKERS", default_value_t = 0)]
    workers: usize,

    #[arg(long, global = true, env = "MRCORR_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Print progress and warnings to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit MR-Corr or MR-Corr2 to summary statistics.
    Fit(FitArgs),
    /// Run a simulation benchmark.
    Simulate(SimulateArgs),
    /// Estimate block LD matrices from a reference panel.
    LdEstimate(LdArgs),
    /// Export scatter-plot data from a completed fit.
    ExportScatter(ScatterArgs),
    /// Harmonize exposure and outcome tables.
    Harmonize(HarmonizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Corr,
    Corr2,
}

impl ModelArg {
    fn method(self) -> Method {
        match self {
            ModelArg::Corr => Method::MrCorr,
            ModelArg::Corr2 => Method::MrCorr2,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Harmonized table written by `harmonize` or `fit`.
    #[arg(long, conflicts_with_all = ["exposure", "outcome"])]
    harmonized: Option<PathBuf>,
    #[arg(long, requires = "outcome")]
    exposure: Option<PathBuf>,
    #[arg(long, requires = "exposure")]
    outcome: Option<PathBuf>,
    /// Independent screening study used for instrument selection.
    #[arg(long)]
    screen: Option<PathBuf>,
    /// Keep SNPs whose screening p-value is below this threshold.
    #[arg(long, default_value_t = 1.0)]
    p_sel: f64,
    /// Column overrides, e.g. `snp_id=rsid,beta=b,se=stderr`.
    #[arg(long, default_value = "")]
    columns: String,
    #[arg(long)]
    keep_palindromic: bool,
}

#[derive(Debug, Args)]
struct McmcArgs {
    #[arg(long)]
    iter: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    /// Master seed; drawn from system entropy when absent.
    #[arg(long)]
    seed: Option<u64>,
}

impl McmcArgs {
    fn apply(&self, base: McmcConfig) -> McmcConfig {
        McmcConfig {
            n_iter: self.iter.unwrap_or(base.n_iter),
            n_burnin: self.burnin.unwrap_or(base.n_burnin),
            thin: self.thin.unwrap_or(base.thin),
            n_chains: self.chains.unwrap_or(base.n_chains),
            seed: base.seed,
        }
    }
}

#[derive(Debug, Args)]
struct HyperArgs {
    #[arg(long)]
    a_gamma: Option<f64>,
    #[arg(long)]
    b_gamma: Option<f64>,
    #[arg(long)]
    a_alpha: Option<f64>,
    #[arg(long)]
    b_alpha: Option<f64>,
    /// Beta prior shape on the pleiotropic fraction.
    #[arg(long)]
    omega_a: Option<f64>,
    #[arg(long)]
    omega_b: Option<f64>,
    /// Variance of independent normal priors on both slopes (flat when absent).
    #[arg(long)]
    beta_prior_var: Option<f64>,
}

impl HyperArgs {
    fn apply(&self, base: Hyperparams) -> Hyperparams {
        Hyperparams {
            a_gamma: self.a_gamma.unwrap_or(base.a_gamma),
            b_gamma: self.b_gamma.unwrap_or(base.b_gamma),
            a_alpha: self.a_alpha.unwrap_or(base.a_alpha),
            b_alpha: self.b_alpha.unwrap_or(base.b_alpha),
            a: self.omega_a.unwrap_or(base.a),
            b: self.omega_b.unwrap_or(base.b),
            beta_prior_var: self.beta_prior_var.or(base.beta_prior_var),
        }
    }
}

#[derive(Debug, Args)]
struct BlockArgs {
    /// Reference genotype panel (TSV, or `.bin` with an `.ids` sidecar).
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Block partition over the panel SNPs.
    #[arg(long, conflicts_with = "block_size")]
    partition: Option<PathBuf>,
    /// Split the panel into consecutive blocks of this size.
    #[arg(long)]
    block_size: Option<usize>,
    /// Shrinkage toward the identity applied to each LD block.
    #[arg(long, default_value_t = DEFAULT_SHRINKAGE)]
    shrinkage: f64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "corr2")]
    model: ModelArg,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    blocks: BlockArgs,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Credible interval level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Also write the retained draws to trace.csv.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    scenario: Option<u8>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, value_enum, default_value = "corr2")]
    method: ModelArg,
    /// Nominal test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Hold the pleiotropic fraction at zero (no correction).
    #[arg(long)]
    uncorrected: bool,
    #[arg(long, default_value_t = DEFAULT_SHRINKAGE)]
    shrinkage: f64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Write the first replicate's simulated inputs under `study/`.
    #[arg(long)]
    export_study: bool,
    #[command(flatten)]
    mcmc: McmcArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct LdArgs {
    #[command(flatten)]
    blocks: BlockArgs,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    /// Directory holding the outputs of `fit`.
    #[arg(long)]
    fit_dir: PathBuf,
}

#[derive(Debug, Args)]
struct HarmonizeArgs {
    #[command(flatten)]
    input: InputArgs,
}

/// Command line misuse; maps to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<mrcorr::Error>() {
            return e.exit_code() as u8;
        }
    }
    3
}

/// Files staged in memory and written together once a command succeeds.
struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Outputs { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf).with_context(|| format!("rendering {name}"))?;
        self.add(name, buf);
        Ok(())
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Write every staged file; on failure remove those already written.
    fn commit(self) -> anyhow::Result<()> {
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| -> anyhow::Result<()> {
            fs::create_dir_all(&self.dir)
                .with_context(|| format!("creating output directory {}", self.dir.display()))?;
            for (name, bytes) in &self.files {
                let path = self.dir.join(name);
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
                written.push(path);
            }
            Ok(())
        })();
        if result.is_err() {
            for p in &written {
                let _ = fs::remove_file(p);
            }
        }
        result
    }
}

struct Ctx {
    out_dir: PathBuf,
    verbose: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("mrcorr: {}", msg.as_ref());
        }
    }
}

fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(mrcorr::Error::Data(format!("{what} {} does not exist", path.display())).into());
    }
    Ok(())
}

/// Drawn seeds use 63 bits so they can be replayed through a TOML config.
fn entropy_seed() -> u64 {
    rand::random::<u64>() >> 1
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(entropy_seed)
}

fn header(command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("generated_at".into(), json!(chrono::Utc::now().to_rfc3339()));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m
}

/// Harmonized data from either a harmonized table or raw GWAS tables.
fn load_input(input: &InputArgs, ctx: &Ctx) -> anyhow::Result<(HarmonizedDataset, Option<Harmonized>)> {
    if !(input.p_sel > 0.0 && input.p_sel <= 1.0) {
        return Err(usage(format!("--p-sel {} outside (0, 1]", input.p_sel)));
    }
    if input.p_sel < 1.0 && input.screen.is_none() {
        return Err(usage("--p-sel below 1 needs a --screen table"));
    }
    let columns = ColumnMap::from_overrides(&input.columns)?;
    let (dataset, harmonized) = match (&input.harmonized, &input.exposure, &input.outcome) {
        (Some(path), _, _) => {
            require_file(path, "harmonized table")?;
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let ds = HarmonizedDataset::read_tsv(std::io::BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))?;
            (ds, None)
        }
        (None, Some(e), Some(o)) => {
            require_file(e, "exposure table")?;
            require_file(o, "outcome table")?;
            let exposure = parse_gwas_table(e, &columns)?;
            let outcome = parse_gwas_table(o, &columns)?;
            for (name, t) in [("exposure", &exposure), ("outcome", &outcome)] {
                if !t.rejected.is_empty() {
                    ctx.note(format!("{name}: {} malformed rows skipped", t.rejected.len()));
                }
            }
            let h = harmonize(
                &exposure.records,
                &outcome.records,
                HarmonizeOptions { keep_palindromic: input.keep_palindromic },
            )?;
            (h.dataset.clone(), Some(h))
        }
        _ => return Err(usage("provide --harmonized or both --exposure and --outcome")),
    };
    let dataset = match &input.screen {
        Some(path) => {
            require_file(path, "screening table")?;
            let screen = parse_gwas_table(path, &columns)?;
            select_instruments(&screen.records, &dataset, input.p_sel)?
        }
        None => dataset,
    };
    ctx.note(format!("{} SNPs after harmonization and selection", dataset.len()));
    Ok((dataset, harmonized))
}

fn load_blocks(args: &BlockArgs) -> anyhow::Result<(GenotypePanel, BlockPartition)> {
    let reference = args.reference.as_ref().ok_or_else(|| usage("--reference is required"))?;
    require_file(reference, "reference panel")?;
    let panel = GenotypePanel::load(reference)?;
    let partition = match (&args.partition, args.block_size) {
        (Some(path), _) => {
            require_file(path, "partition")?;
            load_partition(path, panel.snp_ids())?
        }
        (None, Some(k)) => uniform_partition(panel.n_snps(), k)?,
        (None, None) => return Err(usage("--partition or --block-size is required")),
    };
    Ok((panel, partition))
}

fn cmd_fit(args: &FitArgs, ctx: &Ctx) -> anyhow::Result<()> {
    if args.model == ModelArg::Corr2 {
        if args.blocks.reference.is_none() {
            return Err(usage("--model corr2 needs --reference"));
        }
        if args.blocks.partition.is_none() && args.blocks.block_size.is_none() {
            return Err(usage("--model corr2 needs --partition or --block-size"));
        }
    }
    let seed = resolve_seed(args.mcmc.seed);
    let mcmc = McmcConfig { seed, ..args.mcmc.apply(McmcConfig::default()) };
    let hyper = args.hyper.apply(Hyperparams::default());
    hyper.validate()?;
    for w in mcmc.validate()? {
        ctx.note(w);
    }
    let (dataset, harmonized) = load_input(&args.input, ctx)?;

    let mut out = Outputs::new(&ctx.out_dir);
    let mut extra = serde_json::Map::new();
    let (dataset, trace, snp_inclusion) = match args.model {
        ModelArg::Corr => {
            let trace = mr_corr::run_chain(&dataset, &hyper, &mcmc)?;
            let incl = trace.inclusion();
            (dataset, trace, incl)
        }
        ModelArg::Corr2 => {
            let (panel, partition) = load_blocks(&args.blocks)?;
            let aligned = align_blocks(&dataset, &panel, &partition)?;
            if !aligned.dropped.is_empty() {
                ctx.note(format!("{} SNPs absent from the reference panel", aligned.dropped.len()));
            }
            let corr = estimate_block_corr(&aligned.panel, &aligned.partition, args.blocks.shrinkage)?;
            let trace = mr_corr2::run_chain2(&aligned.dataset, &aligned.partition, &corr, &hyper, &mcmc)?;
            let block_incl = trace.inclusion();
            let incl = aligned
                .partition
                .block_of_snp()
                .into_iter()
                .map(|l| block_incl[l])
                .collect();
            out.add_with("block_inclusion.tsv", |w| {
                mr_corr2::write_block_inclusion(w, &trace, &aligned.partition, &aligned.dataset.snp_ids)
            })?;
            extra.insert("n_blocks".into(), json!(aligned.partition.len()));
            extra.insert("dropped_not_in_reference".into(), json!(aligned.dropped.len()));
            extra.insert("shrinkage".into(), json!(args.blocks.shrinkage));
            (aligned.dataset, trace, incl)
        }
    };
    let summary = summarize(&trace, args.level)?;
    for d in &summary.diagnostics {
        ctx.note(d);
    }

    let mut doc = header("fit");
    doc.insert("model".into(), json!(args.model.method().as_str()));
    doc.insert("seed".into(), json!(seed));
    doc.insert(
        "config".into(),
        json!({ "mcmc": mcmc, "hyperparams": hyper, "level": args.level, "p_sel": args.input.p_sel }),
    );
    doc.insert("n_snps".into(), json!(dataset.len()));
    doc.extend(extra);
    doc.insert("summary".into(), serde_json::to_value(&summary)?);
    out.add_json("summary.json", &doc)?;
    out.add_with("harmonized.tsv", |w| dataset.write_tsv(w))?;
    if let Some(h) = &harmonized {
        out.add_with("harmonization_report.tsv", |w| h.write_report(w))?;
    }
    out.add_with("inclusion.tsv", |w| {
        writeln!(w, "snp_id\teta_mean")?;
        for (id, m) in dataset.snp_ids.iter().zip(&snp_inclusion) {
            writeln!(w, "{id}\t{m}")?;
        }
        Ok(())
    })?;
    if args.trace {
        out.add_with("trace.csv", |w| trace.write_csv(w))?;
    }
    out.commit()?;
    print_fit(&summary, &trace);
    Ok(())
}

fn print_fit(s: &PosteriorSummary, trace: &Trace) {
    let p = s.p_value.map_or_else(|| "NA".to_string(), |p| format!("{p:.3e}"));
    println!(
        "beta0 {:.5} (sd {:.5}, {:.0}% CI [{:.5}, {:.5}], p {p}); {} draws over {} chains, {} units",
        s.beta0_mean,
        s.beta0_sd,
        100.0 * s.level,
        s.credible_interval.0,
        s.credible_interval.1,
        s.n_draws,
        s.n_chains,
        trace.n_units
    );
}

fn load_scenario(args: &SimulateArgs) -> anyhow::Result<(ScenarioConfig, bool)> {
    let (mut config, file_seed) = match &args.config {
        Some(path) => {
            require_file(path, "config")?;
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let config = ScenarioConfig::from_toml_str(&text).with_context(|| format!("in {}", path.display()))?;
            let has_seed = text.parse::<toml::Table>().is_ok_and(|t| t.contains_key("seed"));
            (config, has_seed)
        }
        None => (ScenarioConfig::default(), false),
    };
    if let Some(s) = args.scenario {
        config.scenario = s;
    }
    let explicit = match args.mcmc.seed {
        Some(s) => {
            config.seed = s;
            true
        }
        None => file_seed,
    };
    if !explicit {
        config.seed = entropy_seed();
    }
    config.validate()?;
    Ok((config, explicit))
}

fn cmd_simulate(args: &SimulateArgs, ctx: &Ctx) -> anyhow::Result<()> {
    if args.replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    let (config, _) = load_scenario(args)?;
    let base = FitSettings::default();
    let settings = FitSettings {
        method: args.method.method(),
        hyper: args.hyper.apply(base.hyper),
        mcmc: args.mcmc.apply(base.mcmc),
        ld_shrinkage: args.shrinkage,
        fixed_omega: args.uncorrected.then_some(0.0),
        level: args.level,
    };
    ctx.note(format!(
        "scenario {} with {} replicates, seed {}",
        config.scenario, args.replicates, config.seed
    ));
    let outcome = run_benchmark(&config, args.replicates, &settings, args.alpha)?;

    let mut out = Outputs::new(&ctx.out_dir);
    let mut doc = header("simulate");
    doc.insert("scenario".into(), json!(outcome.scenario));
    doc.insert("method".into(), json!(outcome.method.as_str()));
    doc.insert("seed".into(), json!(config.seed));
    doc.insert("uncorrected".into(), json!(args.uncorrected));
    doc.insert("config".into(), serde_json::to_value(&config)?);
    doc.insert("fit".into(), serde_json::to_value(&settings)?);
    doc.insert("report".into(), serde_json::to_value(&outcome.report)?);
    out.add_json("benchmark.json", &doc)?;
    out.add_with("replicates.tsv", |w| outcome.write_replicates_tsv(w))?;
    if args.export_study {
        let study = gen_study(&config, &replicate_key(config.seed, 0))?;
        let dir = tempdir_in(&ctx.out_dir)?;
        study.export(&dir)?;
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            out.add(&format!("study/{name}"), fs::read(entry.path())?);
        }
        let _ = fs::remove_dir_all(&dir);
    }
    out.commit()?;
    match &outcome.report {
        Some(r) => print!("{}", r.render_table()),
        None => bail!(mrcorr::Error::Numeric("every replicate failed".into())),
    }
    Ok(())
}

/// Scratch directory next to the outputs, so exports never leave the
/// output volume.
fn tempdir_in(base: &Path) -> anyhow::Result<PathBuf> {
    let parent = if base.as_os_str().is_empty() { Path::new(".") } else { base };
    fs::create_dir_all(parent)?;
    let dir = parent.join(format!(".mrcorr-study-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_ld_estimate(args: &LdArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let (panel, partition) = load_blocks(&args.blocks)?;
    let corr = estimate_block_corr(&panel, &partition, args.blocks.shrinkage)?;
    let mut out = Outputs::new(&ctx.out_dir);
    out.add_with("ld.tsv", |w| corr.write_tsv(w))?;
    out.add_with("partition.tsv", |w| partition.write_tsv(w, panel.snp_ids()))?;
    out.commit()?;
    println!("{} SNPs in {} blocks", panel.n_snps(), partition.len());
    Ok(())
}

fn read_fit_file(dir: &Path, name: &str) -> anyhow::Result<String> {
    let path = dir.join(name);
    require_file(&path, "fit output")?;
    fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_export_scatter(args: &ScatterArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let dataset = HarmonizedDataset::read_tsv(read_fit_file(&args.fit_dir, "harmonized.tsv")?.as_bytes())?;
    let inclusion_text = read_fit_file(&args.fit_dir, "inclusion.tsv")?;
    let summary: Value = serde_json::from_str(&read_fit_file(&args.fit_dir, "summary.json")?)
        .map_err(|e| mrcorr::Error::Parse(format!("summary.json: {e}")))?;

    let mut eta = std::collections::HashMap::new();
    for (i, line) in inclusion_text.lines().enumerate().skip(1) {
        let (id, m) = line
            .split_once('\t')
            .ok_or_else(|| mrcorr::Error::Parse(format!("inclusion.tsv line {}: expected two columns", i + 1)))?;
        let m: f64 = m
            .trim()
            .parse()
            .map_err(|_| mrcorr::Error::Parse(format!("inclusion.tsv line {}: bad eta_mean", i + 1)))?;
        eta.insert(id.to_string(), m);
    }
    let field = |name: &str| -> anyhow::Result<f64> {
        summary["summary"][name]
            .as_f64()
            .ok_or_else(|| anyhow!(mrcorr::Error::Parse(format!("summary.json lacks summary.{name}"))))
    };
    let lines = json!({
        "schema_version": SCHEMA_VERSION,
        "beta0_mean": field("beta0_mean")?,
        "beta1_mean": field("beta1_mean")?,
    });

    let mut out = Outputs::new(&ctx.out_dir);
    out.add_with("scatter.tsv", |w| {
        writeln!(w, "snp_id\tgamma_hat\ts_gamma\tGamma_hat\ts_Gamma\teta_mean")?;
        for k in 0..dataset.len() {
            let id = &dataset.snp_ids[k];
            let sign = if dataset.exposure_beta[k] < 0.0 { -1.0 } else { 1.0 };
            let m = eta.get(id).map_or_else(|| "NA".to_string(), |m| m.to_string());
            writeln!(
                w,
                "{id}\t{}\t{}\t{}\t{}\t{m}",
                sign * dataset.exposure_beta[k],
                dataset.exposure_se[k],
                sign * dataset.outcome_beta[k],
                dataset.outcome_se[k]
            )?;
        }
        Ok(())
    })?;
    out.add_json("lines.json", &lines)?;
    out.commit()?;
    println!("{} SNPs exported", dataset.len());
    Ok(())
}

fn cmd_harmonize(args: &HarmonizeArgs, ctx: &Ctx) -> anyhow::Result<()> {
    if args.input.harmonized.is_some() {
        return Err(usage("harmonize takes --exposure and --outcome"));
    }
    let (dataset, harmonized) = load_input(&args.input, ctx)?;
    let h = harmonized.ok_or_else(|| usage("harmonize takes --exposure and --outcome"))?;
    let mut out = Outputs::new(&ctx.out_dir);
    out.add_with("harmonized.tsv", |w| dataset.write_tsv(w))?;
    out.add_with("harmonization_report.tsv", |w| h.write_report(w))?;
    out.commit()?;
    println!("{} SNPs harmonized ({} flipped)", dataset.len(), h.count(mrcorr::summary_data::HarmonizeAction::Flipped));
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Ctx { out_dir: cli.out_dir, verbose: cli.verbose > 0 };
    par::with_workers(cli.workers, || match &cli.command {
        Command::Fit(a) => cmd_fit(a, &ctx),
        Command::Simulate(a) => cmd_simulate(a, &ctx),
        Command::LdEstimate(a) => cmd_ld_estimate(a, &ctx),
        Command::ExportScatter(a) => cmd_export_scatter(a, &ctx),
        Command::Harmonize(a) => cmd_harmonize(a, &ctx),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = format!("{err:#}").replace(['\n', '\r'], " ");
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&err))
        }
    }
}
