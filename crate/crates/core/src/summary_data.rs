//! GWAS summary statistics: parsing, allele harmonization and instrument
//! selection against an independent screening study.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnpRecord {
    pub snp_id: String,
    pub chromosome: u32,
    pub position: u64,
    pub effect_allele: String,
    pub other_allele: String,
    pub beta: f64,
    pub se: f64,
    pub p_value: Option<f64>,
    pub sample_size: Option<u64>,
}

impl SnpRecord {
    /// Minimal record, mostly useful for tests and simulated exports.
    pub fn new(snp_id: &str, effect: &str, other: &str, beta: f64, se: f64) -> Self {
        SnpRecord {
            snp_id: snp_id.to_string(),
            chromosome: 0,
            position: 0,
            effect_allele: effect.to_ascii_uppercase(),
            other_allele: other.to_ascii_uppercase(),
            beta,
            se,
            p_value: None,
            sample_size: None,
        }
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    fn is_palindromic(&self) -> bool {
        matches!(
            (self.effect_allele.as_str(), self.other_allele.as_str()),
            ("A", "T") | ("T", "A") | ("C", "G") | ("G", "C")
        )
    }
}

/// Column roles of a GWAS table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    SnpId,
    Chromosome,
    Position,
    EffectAllele,
    OtherAllele,
    Beta,
    Se,
    PValue,
    SampleSize,
}

impl Role {
    const ALL: [Role; 9] = [
        Role::SnpId,
        Role::Chromosome,
        Role::Position,
        Role::EffectAllele,
        Role::OtherAllele,
        Role::Beta,
        Role::Se,
        Role::PValue,
        Role::SampleSize,
    ];

    fn key(self) -> &'static str {
        match self {
            Role::SnpId => "snp_id",
            Role::Chromosome => "chromosome",
            Role::Position => "position",
            Role::EffectAllele => "effect_allele",
            Role::OtherAllele => "other_allele",
            Role::Beta => "beta",
            Role::Se => "se",
            Role::PValue => "p_value",
            Role::SampleSize => "sample_size",
        }
    }

    fn default_header(self) -> &'static str {
        match self {
            Role::SnpId => "SNP",
            Role::Chromosome => "CHR",
            Role::Position => "BP",
            Role::EffectAllele => "A1",
            Role::OtherAllele => "A2",
            Role::Beta => "BETA",
            Role::Se => "SE",
            Role::PValue => "P",
            Role::SampleSize => "N",
        }
    }

    fn required(self) -> bool {
        matches!(
            self,
            Role::SnpId | Role::EffectAllele | Role::OtherAllele | Role::Beta | Role::Se
        )
    }

    fn from_key(key: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.key() == key)
    }
}

/// Maps header names to column roles. Starts from the conventional
/// `SNP CHR BP A1 A2 BETA SE P N` layout.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    names: HashMap<Role, String>,
    explicit: HashSet<Role>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            names: Role::ALL
                .into_iter()
                .map(|r| (r, r.default_header().to_string()))
                .collect(),
            explicit: HashSet::new(),
        }
    }
}

impl ColumnMap {
    pub fn set(&mut self, role: Role, header: &str) -> &mut Self {
        self.names.insert(role, header.to_string());
        self.explicit.insert(role);
        self
    }

    /// Parse overrides of the form `beta=b,se=stderr,snp_id=rsid`.
    pub fn from_overrides(spec: &str) -> Result<Self> {
        let mut map = ColumnMap::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("column mapping `{item}` is not role=header")))?;
            let role = Role::from_key(key.trim())
                .ok_or_else(|| Error::Config(format!("unknown column role `{}`", key.trim())))?;
            map.set(role, value.trim());
        }
        Ok(map)
    }

    pub fn header(&self, role: Role) -> &str {
        &self.names[&role]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowRejection {
    /// 1-based line number in the file (header is line 1).
    pub line: usize,
    pub snp_id: Option<String>,
    pub reason: String,
}

impl fmt::Display for RowRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.snp_id {
            Some(id) => write!(f, "line {} ({id}): {}", self.line, self.reason),
            None => write!(f, "line {}: {}", self.line, self.reason),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTable {
    pub records: Vec<SnpRecord>,
    pub rejected: Vec<RowRejection>,
}

impl ParsedTable {
    pub fn row_count(&self) -> usize {
        self.records.len() + self.rejected.len()
    }
}

pub fn parse_gwas_table(path: &Path, columns: &ColumnMap) -> Result<ParsedTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_gwas_reader(file, columns).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_gwas_reader<R: Read>(reader: R, columns: &ColumnMap) -> Result<ParsedTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("cannot read header: {e}")))?
        .clone();

    let mut index: HashMap<Role, usize> = HashMap::new();
    for role in Role::ALL {
        let name = columns.header(role);
        match headers.iter().position(|h| h == name) {
            Some(i) => {
                index.insert(role, i);
            }
            None if role.required() || columns.explicit.contains(&role) => {
                return Err(Error::Parse(format!(
                    "missing column `{name}` (mapped to {})",
                    role.key()
                )));
            }
            None => {}
        }
    }

    let mut out = ParsedTable::default();
    for (row_idx, row) in rdr.records().enumerate() {
        let line = row_idx + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(RowRejection {
                    line,
                    snp_id: None,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        match parse_row(&row, &index) {
            Ok(rec) => out.records.push(rec),
            Err((snp_id, reason)) => out.rejected.push(RowRejection {
                line,
                snp_id,
                reason,
            }),
        }
    }
    Ok(out)
}

type RowError = (Option<String>, String);

fn parse_row(row: &csv::StringRecord, index: &HashMap<Role, usize>) -> Result<SnpRecord, RowError> {
    let field = |role: Role| index.get(&role).and_then(|&i| row.get(i));
    let snp_id = field(Role::SnpId)
        .filter(|s| !s.is_empty())
        .ok_or((None, "missing snp id".to_string()))?
        .to_string();
    let fail = |reason: String| (Some(snp_id.clone()), reason);

    let real = |role: Role| -> Result<f64, RowError> {
        let raw = field(role).ok_or_else(|| fail(format!("missing {}", role.key())))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| fail(format!("non-numeric {} `{raw}`", role.key())))?;
        if !v.is_finite() {
            return Err(fail(format!("non-finite {}", role.key())));
        }
        Ok(v)
    };

    let beta = real(Role::Beta)?;
    let se = real(Role::Se)?;
    if se <= 0.0 {
        return Err(fail(format!("standard error must be positive, got {se}")));
    }

    let allele = |role: Role| -> Result<String, RowError> {
        let a = field(role)
            .ok_or_else(|| fail(format!("missing {}", role.key())))?
            .to_ascii_uppercase();
        if a.is_empty() || !a.bytes().all(|b| matches!(b, b'A' | b'C' | b'G' | b'T')) {
            return Err(fail(format!("invalid allele `{a}`")));
        }
        Ok(a)
    };
    let effect_allele = allele(Role::EffectAllele)?;
    let other_allele = allele(Role::OtherAllele)?;
    if effect_allele == other_allele {
        return Err(fail("effect and other allele are identical".into()));
    }

    let chromosome = match field(Role::Chromosome) {
        None | Some("") => 0,
        Some(raw) => parse_chromosome(raw).ok_or_else(|| fail(format!("bad chromosome `{raw}`")))?,
    };
    let position = match field(Role::Position) {
        None | Some("") => 0,
        Some(raw) => raw
            .parse()
            .map_err(|_| fail(format!("bad position `{raw}`")))?,
    };
    let p_value = match field(Role::PValue) {
        None | Some("") | Some("NA") => None,
        Some(_) => {
            let p = real(Role::PValue)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(fail(format!("p-value {p} outside [0, 1]")));
            }
            Some(p)
        }
    };
    let sample_size = match field(Role::SampleSize) {
        None | Some("") | Some("NA") => None,
        Some(raw) => Some(
            raw.parse::<f64>()
                .map_err(|_| fail(format!("bad sample size `{raw}`")))?
                .round() as u64,
        ),
    };

    Ok(SnpRecord {
        snp_id,
        chromosome,
        position,
        effect_allele,
        other_allele,
        beta,
        se,
        p_value,
        sample_size,
    })
}

fn parse_chromosome(raw: &str) -> Option<u32> {
    let s = raw.trim_start_matches("chr");
    match s {
        "X" | "x" => Some(23),
        "Y" | "y" => Some(24),
        "MT" | "M" => Some(26),
        _ => s.parse().ok(),
    }
}

/// Write records in the default column layout that [`parse_gwas_table`]
/// reads with `ColumnMap::default()`.
pub fn write_gwas_table<W: Write>(mut w: W, records: &[SnpRecord]) -> std::io::Result<()> {
    writeln!(w, "SNP\tCHR\tBP\tA1\tA2\tBETA\tSE\tP\tN")?;
    for r in records {
        let p = r.p_value.map_or_else(|| "NA".to_string(), |p| p.to_string());
        let n = r.sample_size.map_or_else(|| "NA".to_string(), |n| n.to_string());
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.snp_id, r.chromosome, r.position, r.effect_allele, r.other_allele, r.beta, r.se, p, n
        )?;
    }
    Ok(())
}

/// Per-SNP exposure and outcome statistics aligned to a common effect allele.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonizedDataset {
    pub snp_ids: Vec<String>,
    pub exposure_beta: Vec<f64>,
    pub exposure_se: Vec<f64>,
    pub outcome_beta: Vec<f64>,
    pub outcome_se: Vec<f64>,
    pub orientation_flips: Vec<bool>,
}

impl HarmonizedDataset {
    pub fn new(
        snp_ids: Vec<String>,
        exposure_beta: Vec<f64>,
        exposure_se: Vec<f64>,
        outcome_beta: Vec<f64>,
        outcome_se: Vec<f64>,
    ) -> Result<Self> {
        let p = snp_ids.len();
        let ds = HarmonizedDataset {
            orientation_flips: vec![false; p],
            snp_ids,
            exposure_beta,
            exposure_se,
            outcome_beta,
            outcome_se,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Unnamed dataset (`snp1`, `snp2`, ...), for simulation and tests.
    pub fn from_stats(
        exposure_beta: Vec<f64>,
        exposure_se: Vec<f64>,
        outcome_beta: Vec<f64>,
        outcome_se: Vec<f64>,
    ) -> Result<Self> {
        let ids = (0..exposure_beta.len()).map(|i| format!("snp{}", i + 1)).collect();
        Self::new(ids, exposure_beta, exposure_se, outcome_beta, outcome_se)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.snp_ids.len();
        if p == 0 {
            return Err(Error::Data("dataset has no SNPs".into()));
        }
        for (name, len) in [
            ("exposure_beta", self.exposure_beta.len()),
            ("exposure_se", self.exposure_se.len()),
            ("outcome_beta", self.outcome_beta.len()),
            ("outcome_se", self.outcome_se.len()),
            ("orientation_flips", self.orientation_flips.len()),
        ] {
            if len != p {
                return Err(Error::Data(format!("{name} has length {len}, expected {p}")));
            }
        }
        for k in 0..p {
            if !(self.exposure_se[k] > 0.0 && self.outcome_se[k] > 0.0) {
                return Err(Error::Data(format!(
                    "{}: standard errors must be positive",
                    self.snp_ids[k]
                )));
            }
            if !(self.exposure_beta[k].is_finite() && self.outcome_beta[k].is_finite()) {
                return Err(Error::Data(format!("{}: non-finite effect", self.snp_ids[k])));
            }
        }
        let mut seen = HashSet::with_capacity(p);
        for id in &self.snp_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Data(format!("duplicate SNP id {id}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snp_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snp_ids.is_empty()
    }

    /// Restrict to the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> HarmonizedDataset {
        let pick = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        HarmonizedDataset {
            snp_ids: indices.iter().map(|&i| self.snp_ids[i].clone()).collect(),
            exposure_beta: pick(&self.exposure_beta),
            exposure_se: pick(&self.exposure_se),
            outcome_beta: pick(&self.outcome_beta),
            outcome_se: pick(&self.outcome_se),
            orientation_flips: indices.iter().map(|&i| self.orientation_flips[i]).collect(),
        }
    }

    /// Re-express SNP `k` in terms of the other allele.
    pub fn flip_orientation(&mut self, k: usize) {
        self.exposure_beta[k] = -self.exposure_beta[k];
        self.outcome_beta[k] = -self.outcome_beta[k];
        self.orientation_flips[k] = !self.orientation_flips[k];
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "snp_id\texposure_beta\texposure_se\toutcome_beta\toutcome_se\tflipped")?;
        for k in 0..self.len() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                self.snp_ids[k],
                self.exposure_beta[k],
                self.exposure_se[k],
                self.outcome_beta[k],
                self.outcome_se[k],
                u8::from(self.orientation_flips[k])
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(reader);
        let mut ds = HarmonizedDataset {
            snp_ids: vec![],
            exposure_beta: vec![],
            exposure_se: vec![],
            outcome_beta: vec![],
            outcome_se: vec![],
            orientation_flips: vec![],
        };
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| Error::Parse(format!("harmonized table: {e}")))?;
            let num = |j: usize| -> Result<f64> {
                row.get(j)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("harmonized table line {}: bad column {}", i + 2, j + 1)))
            };
            ds.snp_ids.push(row.get(0).unwrap_or_default().to_string());
            ds.exposure_beta.push(num(1)?);
            ds.exposure_se.push(num(2)?);
            ds.outcome_beta.push(num(3)?);
            ds.outcome_se.push(num(4)?);
            ds.orientation_flips.push(row.get(5).is_some_and(|s| s == "1"));
        }
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonizeAction {
    Kept,
    Flipped,
    DroppedAlleleMismatch,
    DroppedPalindromic,
    DroppedNotShared,
}

impl HarmonizeAction {
    pub fn as_str(self) -> &'static str {
        match self {
            HarmonizeAction::Kept => "kept",
            HarmonizeAction::Flipped => "flipped",
            HarmonizeAction::DroppedAlleleMismatch => "dropped_allele_mismatch",
            HarmonizeAction::DroppedPalindromic => "dropped_palindromic",
            HarmonizeAction::DroppedNotShared => "dropped_not_shared",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HarmonizeOptions {
    /// Keep A/T and C/G SNPs, trusting that both studies report the same strand.
    pub keep_palindromic: bool,
}

#[derive(Debug, Clone)]
pub struct Harmonized {
    pub dataset: HarmonizedDataset,
    pub report: Vec<(String, HarmonizeAction)>,
}

impl Harmonized {
    pub fn count(&self, action: HarmonizeAction) -> usize {
        self.report.iter().filter(|(_, a)| *a == action).count()
    }

    pub fn write_report<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "snp_id\taction")?;
        for (id, action) in &self.report {
            writeln!(w, "{id}\t{}", action.as_str())?;
        }
        Ok(())
    }
}

fn index_unique<'a>(records: &'a [SnpRecord], study: &str) -> Result<HashMap<&'a str, &'a SnpRecord>> {
    let mut map = HashMap::with_capacity(records.len());
    for r in records {
        if map.insert(r.snp_id.as_str(), r).is_some() {
            return Err(Error::Data(format!("duplicate SNP id {} in {study} study", r.snp_id)));
        }
    }
    Ok(map)
}

/// Align outcome statistics to the exposure effect allele, matching on SNP id.
pub fn harmonize(
    exposure: &[SnpRecord],
    outcome: &[SnpRecord],
    options: HarmonizeOptions,
) -> Result<Harmonized> {
    if exposure.is_empty() || outcome.is_empty() {
        return Err(Error::Data("harmonize needs non-empty exposure and outcome studies".into()));
    }
    index_unique(exposure, "exposure")?;
    let outcome_by_id = index_unique(outcome, "outcome")?;

    let mut report = Vec::with_capacity(exposure.len());
    let mut kept: Vec<(&SnpRecord, &SnpRecord, bool)> = Vec::new();
    let mut shared = HashSet::new();
    for e in exposure {
        let Some(o) = outcome_by_id.get(e.snp_id.as_str()) else {
            report.push((e.snp_id.clone(), HarmonizeAction::DroppedNotShared));
            continue;
        };
        shared.insert(e.snp_id.as_str());
        if e.is_palindromic() && !options.keep_palindromic {
            report.push((e.snp_id.clone(), HarmonizeAction::DroppedPalindromic));
            continue;
        }
        let action = if e.effect_allele == o.effect_allele && e.other_allele == o.other_allele {
            HarmonizeAction::Kept
        } else if e.effect_allele == o.other_allele && e.other_allele == o.effect_allele {
            HarmonizeAction::Flipped
        } else {
            HarmonizeAction::DroppedAlleleMismatch
        };
        report.push((e.snp_id.clone(), action));
        match action {
            HarmonizeAction::Kept => kept.push((e, o, false)),
            HarmonizeAction::Flipped => kept.push((e, o, true)),
            _ => {}
        }
    }
    for o in outcome {
        if !shared.contains(o.snp_id.as_str()) {
            report.push((o.snp_id.clone(), HarmonizeAction::DroppedNotShared));
        }
    }
    if shared.is_empty() {
        return Err(Error::Data("exposure and outcome studies share no SNP ids".into()));
    }
    if kept.is_empty() {
        return Err(Error::Data("no SNP survived allele harmonization".into()));
    }

    let dataset = HarmonizedDataset {
        snp_ids: kept.iter().map(|(e, _, _)| e.snp_id.clone()).collect(),
        exposure_beta: kept.iter().map(|(e, _, _)| e.beta).collect(),
        exposure_se: kept.iter().map(|(e, _, _)| e.se).collect(),
        outcome_beta: kept
            .iter()
            .map(|(_, o, flip)| if *flip { -o.beta } else { o.beta })
            .collect(),
        outcome_se: kept.iter().map(|(_, o, _)| o.se).collect(),
        orientation_flips: kept.iter().map(|(_, _, f)| *f).collect(),
    };
    dataset.validate()?;
    Ok(Harmonized { dataset, report })
}

/// Keep SNPs whose screening-study p-value is below `p_sel`. A threshold of
/// one keeps everything.
pub fn select_instruments(
    screening: &[SnpRecord],
    dataset: &HarmonizedDataset,
    p_sel: f64,
) -> Result<HarmonizedDataset> {
    if !(p_sel > 0.0 && p_sel <= 1.0) {
        return Err(Error::Config(format!("p-value threshold {p_sel} outside (0, 1]")));
    }
    if p_sel >= 1.0 {
        return Ok(dataset.clone());
    }
    let p_by_id: HashMap<&str, f64> = screening
        .iter()
        .filter_map(|r| r.p_value.map(|p| (r.snp_id.as_str(), p)))
        .collect();
    let keep: Vec<usize> = (0..dataset.len())
        .filter(|&k| {
            p_by_id
                .get(dataset.snp_ids[k].as_str())
                .is_some_and(|&p| p < p_sel)
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::Data(format!(
            "no SNP has a screening p-value below {p_sel:e}"
        )));
    }
    Ok(dataset.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "SNP\tCHR\tBP\tA1\tA2\tBETA\tSE\tP\n\
rs1\t1\t100\tA\tG\t0.05\t0.01\t1e-8\n\
rs2\t1\t200\tC\tT\t-0.02\t0.0\t0.5\n\
rs3\t2\t300\tg\ta\tx\t0.01\t0.5\n\
rs4\t2\t400\tA\tC\t0.01\t0.02\t0.2\n\
rs5\tX\t500\tA\tC\t0.03\t0.02\t0.1\n";

    #[test]
    fn parses_rows_and_rejects_bad_ones() {
        let t = parse_gwas_reader(TABLE.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(t.records.len(), 3);
        assert_eq!(t.rejected.len(), 2);
        assert_eq!(t.row_count(), 5);
        let r = &t.records[0];
        assert_eq!(r.snp_id, "rs1");
        assert_eq!((r.beta, r.se), (0.05, 0.01));
        assert_eq!((r.chromosome, r.position), (1, 100));
        assert_eq!(r.p_value, Some(1e-8));
        assert_eq!(t.records[2].chromosome, 23);
        assert_eq!(t.rejected[0].snp_id.as_deref(), Some("rs2"));
        assert!(t.rejected[0].reason.contains("positive"));
        assert_eq!(t.rejected[1].line, 4);
    }

    #[test]
    fn three_valid_one_malformed() {
        let table = "SNP\tA1\tA2\tBETA\tSE\n\
a\tA\tG\t0.1\t0.1\n\
b\tA\tG\t0.1\n\
c\tA\tG\t0.2\t0.1\n\
d\tA\tG\t0.3\t0.1\n";
        let t = parse_gwas_reader(table.as_bytes(), &ColumnMap::default()).unwrap();
        assert_eq!(t.records.len(), 3);
        assert_eq!(t.rejected.len(), 1);
        assert_eq!(t.rejected[0].snp_id.as_deref(), Some("b"));
    }

    #[test]
    fn missing_mapped_column_is_fatal() {
        let map = ColumnMap::from_overrides("beta=effect").unwrap();
        let err = parse_gwas_reader(TABLE.as_bytes(), &map).unwrap_err();
        assert!(err.to_string().contains("effect"), "{err}");
        assert!(ColumnMap::from_overrides("nonsense=x").is_err());
    }

    #[test]
    fn custom_headers() {
        let table = "rsid\tea\toa\tb\tstderr\nrs9\tt\tc\t0.4\t0.2\n";
        let map = ColumnMap::from_overrides(
            "snp_id=rsid,effect_allele=ea,other_allele=oa,beta=b,se=stderr",
        )
        .unwrap();
        let t = parse_gwas_reader(table.as_bytes(), &map).unwrap();
        assert_eq!(t.records[0].effect_allele, "T");
        assert_eq!(t.records[0].beta, 0.4);
    }

    #[test]
    fn identical_orientation_is_kept() {
        let h = harmonize(
            &[SnpRecord::new("rs1", "A", "G", 0.1, 0.01)],
            &[SnpRecord::new("rs1", "A", "G", 0.2, 0.02)],
            HarmonizeOptions::default(),
        )
        .unwrap();
        assert_eq!(h.dataset.exposure_beta, vec![0.1]);
        assert_eq!(h.dataset.outcome_beta, vec![0.2]);
        assert_eq!(h.dataset.orientation_flips, vec![false]);
        assert_eq!(h.report[0].1, HarmonizeAction::Kept);
    }

    #[test]
    fn swapped_alleles_flip_the_outcome() {
        let h = harmonize(
            &[SnpRecord::new("rs1", "A", "G", 0.1, 0.01)],
            &[SnpRecord::new("rs1", "G", "A", 0.2, 0.02)],
            HarmonizeOptions::default(),
        )
        .unwrap();
        assert_eq!(h.dataset.outcome_beta, vec![-0.2]);
        assert_eq!(h.dataset.orientation_flips, vec![true]);
        assert_eq!(h.report[0].1, HarmonizeAction::Flipped);
    }

    #[test]
    fn mismatch_and_palindromes_are_dropped() {
        let exposure = [
            SnpRecord::new("rs1", "A", "G", 0.1, 0.01),
            SnpRecord::new("rs2", "A", "T", 0.1, 0.01),
            SnpRecord::new("rs3", "C", "T", 0.1, 0.01),
            SnpRecord::new("rs4", "C", "T", 0.1, 0.01),
        ];
        let outcome = [
            SnpRecord::new("rs1", "A", "C", 0.2, 0.02),
            SnpRecord::new("rs2", "A", "T", 0.2, 0.02),
            SnpRecord::new("rs3", "C", "T", 0.2, 0.02),
            SnpRecord::new("rs5", "C", "T", 0.2, 0.02),
        ];
        let h = harmonize(&exposure, &outcome, HarmonizeOptions::default()).unwrap();
        assert_eq!(h.dataset.snp_ids, vec!["rs3"]);
        assert_eq!(h.count(HarmonizeAction::DroppedAlleleMismatch), 1);
        assert_eq!(h.count(HarmonizeAction::DroppedPalindromic), 1);
        assert_eq!(h.count(HarmonizeAction::DroppedNotShared), 2);

        let keep = harmonize(&exposure, &outcome, HarmonizeOptions { keep_palindromic: true }).unwrap();
        assert_eq!(keep.dataset.snp_ids, vec!["rs2", "rs3"]);

        let mut buf = Vec::new();
        h.write_report(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("rs1\tdropped_allele_mismatch"));
        assert!(text.contains("rs5\tdropped_not_shared"));
    }

    #[test]
    fn empty_intersection_is_fatal() {
        let err = harmonize(
            &[SnpRecord::new("rs1", "A", "G", 0.1, 0.01)],
            &[SnpRecord::new("rs2", "A", "G", 0.1, 0.01)],
            HarmonizeOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn threshold_selection() {
        let ds = HarmonizedDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.1; 3],
            vec![0.01; 3],
            vec![0.2; 3],
            vec![0.02; 3],
        )
        .unwrap();
        let screen = [
            SnpRecord::new("a", "A", "G", 0.1, 0.01).with_p_value(1e-8),
            SnpRecord::new("b", "A", "G", 0.1, 0.01).with_p_value(1e-5),
            SnpRecord::new("c", "A", "G", 0.1, 0.01).with_p_value(0.5),
        ];
        assert_eq!(select_instruments(&screen, &ds, 1.0).unwrap(), ds);
        let sel = select_instruments(&screen, &ds, 1e-6).unwrap();
        assert_eq!(sel.snp_ids, vec!["a"]);
        let err = select_instruments(&screen, &ds, 1e-10).unwrap_err();
        assert!(err.to_string().contains("1e-10"));
    }

    #[test]
    fn harmonized_tsv_round_trip() {
        let mut ds = HarmonizedDataset::from_stats(
            vec![0.1, -0.3],
            vec![0.01, 0.02],
            vec![1.0 / 3.0, 2e-9],
            vec![0.05, 0.07],
        )
        .unwrap();
        ds.flip_orientation(1);
        let mut buf = Vec::new();
        ds.write_tsv(&mut buf).unwrap();
        assert_eq!(HarmonizedDataset::read_tsv(buf.as_slice()).unwrap(), ds);
    }
}
