//! Reference-panel LD: genotype panels, block partitions and shrunk
//! per-block correlation matrices.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::par;
use crate::summary_data::HarmonizedDataset;

pub const DEFAULT_SHRINKAGE: f64 = 0.1;

/// Genotype dosages, stored column-major (one contiguous column per SNP).
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypePanel {
    n_individuals: usize,
    snp_ids: Vec<String>,
    dosages: Vec<f64>,
}

impl GenotypePanel {
    pub fn from_columns(n_individuals: usize, snp_ids: Vec<String>, dosages: Vec<f64>) -> Result<Self> {
        if n_individuals < 2 {
            return Err(Error::Data(format!(
                "reference panel needs at least 2 individuals, got {n_individuals}"
            )));
        }
        if dosages.len() != n_individuals * snp_ids.len() {
            return Err(Error::Data(format!(
                "panel has {} dosages, expected {} x {}",
                dosages.len(),
                n_individuals,
                snp_ids.len()
            )));
        }
        if let Some(bad) = dosages.iter().find(|d| !(0.0..=2.0).contains(*d)) {
            return Err(Error::Data(format!("dosage {bad} outside [0, 2]")));
        }
        Ok(GenotypePanel {
            n_individuals,
            snp_ids,
            dosages,
        })
    }

    /// Build from row-major data (one row per individual).
    pub fn from_rows(n_individuals: usize, snp_ids: Vec<String>, rows: &[f64]) -> Result<Self> {
        let p = snp_ids.len();
        let mut cols = vec![0.0; rows.len()];
        for i in 0..n_individuals.min(rows.len() / p.max(1)) {
            for j in 0..p {
                cols[j * n_individuals + i] = rows[i * p + j];
            }
        }
        if rows.len() != n_individuals * p {
            return Err(Error::Data(format!(
                "panel has {} dosages, expected {} x {}",
                rows.len(),
                n_individuals,
                p
            )));
        }
        Self::from_columns(n_individuals, snp_ids, cols)
    }

    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    pub fn n_snps(&self) -> usize {
        self.snp_ids.len()
    }

    pub fn snp_ids(&self) -> &[String] {
        &self.snp_ids
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.dosages[j * self.n_individuals..(j + 1) * self.n_individuals]
    }

    /// Reorder columns to follow `snp_ids`; every id must be present.
    pub fn align_to(&self, snp_ids: &[String]) -> Result<GenotypePanel> {
        let index: HashMap<&str, usize> = self
            .snp_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let missing: Vec<&str> = snp_ids
            .iter()
            .filter(|s| !index.contains_key(s.as_str()))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "reference panel lacks {} SNP(s): {}",
                missing.len(),
                missing.iter().take(10).copied().collect::<Vec<_>>().join(", ")
            )));
        }
        let mut dosages = Vec::with_capacity(self.n_individuals * snp_ids.len());
        for id in snp_ids {
            dosages.extend_from_slice(self.column(index[id.as_str()]));
        }
        Ok(GenotypePanel {
            n_individuals: self.n_individuals,
            snp_ids: snp_ids.to_vec(),
            dosages,
        })
    }

    /// Reorder individuals; used to check estimator invariances.
    pub fn permute_rows(&self, order: &[usize]) -> GenotypePanel {
        let n = self.n_individuals;
        let mut dosages = Vec::with_capacity(self.dosages.len());
        for j in 0..self.n_snps() {
            let col = self.column(j);
            dosages.extend(order.iter().map(|&i| col[i]));
        }
        GenotypePanel {
            n_individuals: n,
            snp_ids: self.snp_ids.clone(),
            dosages,
        }
    }

    /// Tab-separated text: header of SNP ids, one row per individual.
    pub fn read_tsv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(reader);
        let ids: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("panel header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        let mut n = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("panel line {}: {e}", i + 2)))?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("panel line {}: bad dosage `{field}` for {}", i + 2, ids[j]))
                })?;
                rows.push(v);
            }
            n += 1;
        }
        Self::from_rows(n, ids, &rows)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.snp_ids.join("\t"))?;
        let mut line = String::new();
        for i in 0..self.n_individuals {
            line.clear();
            for j in 0..self.n_snps() {
                if j > 0 {
                    line.push('\t');
                }
                let _ = write!(line, "{}", self.dosages[j * self.n_individuals + i]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    const MAGIC: &'static [u8; 4] = b"MRGP";

    /// Dense binary layout: `MRGP`, u32 version (1), u64 rows, u64 columns,
    /// then little-endian f64 dosages row by row. SNP ids live in a sidecar
    /// file with one id per line.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.n_individuals as u64).to_le_bytes())?;
        w.write_all(&(self.n_snps() as u64).to_le_bytes())?;
        for i in 0..self.n_individuals {
            for j in 0..self.n_snps() {
                w.write_all(&self.dosages[j * self.n_individuals + i].to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read, S: BufRead>(mut data: R, ids: S) -> Result<Self> {
        let io = |e: std::io::Error| Error::Parse(format!("binary panel: {e}"));
        let mut header = [0u8; 24];
        data.read_exact(&mut header).map_err(io)?;
        if &header[..4] != Self::MAGIC {
            return Err(Error::Parse("binary panel: bad magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != 1 {
            return Err(Error::Parse(format!("binary panel: unsupported version {version}")));
        }
        let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let p = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let snp_ids: Vec<String> = ids
            .lines()
            .map(|l| l.map(|s| s.trim().to_string()))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(io)?
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect();
        if snp_ids.len() != p {
            return Err(Error::Parse(format!(
                "binary panel has {p} columns but id list has {} entries",
                snp_ids.len()
            )));
        }
        let mut bytes = vec![0u8; n * p * 8];
        data.read_exact(&mut bytes).map_err(io)?;
        let rows: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_rows(n, snp_ids, &rows)
    }

    /// Load a TSV panel, or a binary one (`.bin` extension) with its `.ids`
    /// sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        if path.extension().is_some_and(|e| e == "bin") {
            let ids_path = path.with_extension("ids");
            Self::read_binary(
                std::io::BufReader::new(open(path)?),
                std::io::BufReader::new(open(&ids_path)?),
            )
        } else {
            Self::read_tsv(std::io::BufReader::new(open(path)?))
        }
    }
}

/// Contiguous, non-overlapping half-open index ranges covering `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Range<usize>>, p: usize) -> Result<Self> {
        let mut expected = 0;
        for (l, b) in blocks.iter().enumerate() {
            if b.start != expected {
                return Err(Error::Data(if b.start < expected {
                    format!("block {l} [{}, {}) overlaps the previous block", b.start, b.end)
                } else {
                    format!("gap before block {l}: SNPs {expected}..{} uncovered", b.start)
                }));
            }
            if b.end <= b.start {
                return Err(Error::Data(format!("block {l} is empty")));
            }
            expected = b.end;
        }
        if expected != p {
            return Err(Error::Data(format!(
                "partition covers {expected} of {p} SNPs (SNPs {expected}..{p} uncovered)"
            )));
        }
        Ok(BlockPartition { blocks })
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n_snps(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    /// Block index of every SNP.
    pub fn block_of_snp(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_snps()];
        for (l, b) in self.blocks.iter().enumerate() {
            out[b.clone()].fill(l);
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, mut w: W, snp_ids: &[String]) -> std::io::Result<()> {
        writeln!(w, "block_index\tstart_snp_id\tend_snp_id")?;
        for (l, b) in self.blocks.iter().enumerate() {
            writeln!(w, "{l}\t{}\t{}", snp_ids[b.start], snp_ids[b.end - 1])?;
        }
        Ok(())
    }
}

pub fn uniform_partition(p: usize, block_size: usize) -> Result<BlockPartition> {
    if p == 0 || block_size == 0 {
        return Err(Error::Config(format!(
            "uniform partition needs p >= 1 and block size >= 1 (got {p}, {block_size})"
        )));
    }
    let blocks = (0..p)
        .step_by(block_size)
        .map(|s| s..(s + block_size).min(p))
        .collect();
    BlockPartition::new(blocks, p)
}

/// Parse a partition table. Each row names the first and last SNP of a
/// block, either by SNP id or by 0-based index (both ends inclusive). The
/// first row may be a header.
pub fn parse_partition<R: Read>(reader: R, snp_ids: &[String]) -> Result<BlockPartition> {
    let index: HashMap<&str, usize> = snp_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let resolve = |tok: &str| -> Option<usize> {
        index
            .get(tok)
            .copied()
            .or_else(|| tok.parse::<usize>().ok().filter(|&i| i < snp_ids.len()))
    };

    let mut ranges: Vec<(usize, Range<usize>)> = Vec::new();
    let mut unknown = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("partition line {}: {e}", i + 1)))?;
        let fields: Vec<&str> = rec.iter().map(str::trim).collect();
        if i == 0 && fields.first().is_some_and(|f| f.parse::<usize>().is_err()) {
            continue;
        }
        let (block, start, end) = match fields.as_slice() {
            [b, s, e, ..] => (*b, *s, *e),
            [s, e] => ("", *s, *e),
            _ => return Err(Error::Parse(format!("partition line {}: expected 3 columns", i + 1))),
        };
        let order = block.parse::<usize>().unwrap_or(ranges.len());
        match (resolve(start), resolve(end)) {
            (Some(s), Some(e)) if e >= s => ranges.push((order, s..e + 1)),
            (Some(s), Some(e)) => {
                return Err(Error::Data(format!(
                    "partition line {}: end {e} precedes start {s}",
                    i + 1
                )))
            }
            (a, b) => {
                if a.is_none() {
                    unknown.push(start.to_string());
                }
                if b.is_none() {
                    unknown.push(end.to_string());
                }
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::Data(format!("partition names unknown SNPs: {}", unknown.join(", "))));
    }
    ranges.sort_by_key(|(order, r)| (*order, r.start));
    BlockPartition::new(ranges.into_iter().map(|(_, r)| r).collect(), snp_ids.len())
}

pub fn load_partition(path: &Path, snp_ids: &[String]) -> Result<BlockPartition> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_partition(file, snp_ids)
}

/// Per-block LD correlation matrices (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCorr {
    pub matrices: Vec<Vec<f64>>,
    pub shrinkage_lambda: f64,
}

impl BlockCorr {
    pub fn identity(partition: &BlockPartition) -> BlockCorr {
        let matrices = partition
            .blocks()
            .iter()
            .map(|b| {
                let n = b.len();
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = 1.0;
                }
                m
            })
            .collect();
        BlockCorr {
            matrices,
            shrinkage_lambda: 0.0,
        }
    }

    pub fn block_size(&self, l: usize) -> usize {
        (self.matrices[l].len() as f64).sqrt().round() as usize
    }

    /// Check shape against the partition, unit diagonal, symmetry and
    /// positive definiteness.
    pub fn validate(&self, partition: &BlockPartition) -> Result<()> {
        if self.matrices.len() != partition.len() {
            return Err(Error::Data(format!(
                "{} LD matrices for {} blocks",
                self.matrices.len(),
                partition.len()
            )));
        }
        for (l, (m, b)) in self.matrices.iter().zip(partition.blocks()).enumerate() {
            let n = b.len();
            if m.len() != n * n {
                return Err(Error::Data(format!("LD block {l}: expected {n}x{n} matrix")));
            }
            for i in 0..n {
                if (m[i * n + i] - 1.0).abs() > 1e-9 {
                    return Err(Error::Data(format!("LD block {l}: diagonal entry {i} is {}", m[i * n + i])));
                }
                for j in 0..i {
                    if (m[i * n + j] - m[j * n + i]).abs() > 1e-12 {
                        return Err(Error::Data(format!("LD block {l}: matrix is not symmetric")));
                    }
                }
            }
            let mut chol = m.clone();
            linalg::cholesky_in_place(&mut chol, n).map_err(|_| {
                Error::Numeric(format!("LD block {l} is not positive definite"))
            })?;
        }
        Ok(())
    }

    /// Full matrices as `block_index row col r`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# shrinkage_lambda={}", self.shrinkage_lambda)?;
        writeln!(w, "block_index\trow\tcol\tr")?;
        for (l, m) in self.matrices.iter().enumerate() {
            let n = (m.len() as f64).sqrt().round() as usize;
            for i in 0..n {
                for j in 0..n {
                    writeln!(w, "{l}\t{i}\t{j}\t{}", m[i * n + j])?;
                }
            }
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R, partition: &BlockPartition) -> Result<BlockCorr> {
        let mut matrices: Vec<Vec<f64>> = partition
            .blocks()
            .iter()
            .map(|b| vec![f64::NAN; b.len() * b.len()])
            .collect();
        let mut lambda = 0.0;
        for (ln, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(format!("LD table: {e}")))?;
            if let Some(rest) = line.strip_prefix("# shrinkage_lambda=") {
                lambda = rest.trim().parse().unwrap_or(0.0);
                continue;
            }
            if line.starts_with('#') || line.starts_with("block_index") || line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("LD table line {}: `{line}`", ln + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            let l: usize = f[0].parse().map_err(|_| bad())?;
            let i: usize = f[1].parse().map_err(|_| bad())?;
            let j: usize = f[2].parse().map_err(|_| bad())?;
            let r: f64 = f[3].parse().map_err(|_| bad())?;
            let n = partition.blocks().get(l).ok_or_else(bad)?.len();
            if i >= n || j >= n {
                return Err(bad());
            }
            matrices[l][i * n + j] = r;
        }
        if matrices.iter().any(|m| m.iter().any(|v| v.is_nan())) {
            return Err(Error::Data("LD table does not fill every block".into()));
        }
        let corr = BlockCorr {
            matrices,
            shrinkage_lambda: lambda,
        };
        corr.validate(partition)?;
        Ok(corr)
    }
}

/// A dataset reordered to follow a reference panel, with the panel and
/// partition restricted to the shared SNPs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedBlocks {
    pub dataset: HarmonizedDataset,
    pub panel: GenotypePanel,
    pub partition: BlockPartition,
    /// Dataset SNPs absent from the panel.
    pub dropped: Vec<String>,
}

/// Keep the dataset SNPs present in the panel, ordered as in the panel,
/// and drop blocks left empty. `partition` indexes the panel's SNPs.
pub fn align_blocks(
    dataset: &HarmonizedDataset,
    panel: &GenotypePanel,
    partition: &BlockPartition,
) -> Result<AlignedBlocks> {
    if partition.n_snps() != panel.n_snps() {
        return Err(Error::Data(format!(
            "partition covers {} SNPs but the panel has {}",
            partition.n_snps(),
            panel.n_snps()
        )));
    }
    let in_dataset: HashMap<&str, usize> = dataset
        .snp_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut order = Vec::new();
    let mut ranges = Vec::new();
    for b in partition.blocks() {
        let start = order.len();
        order.extend(b.clone().filter_map(|j| in_dataset.get(panel.snp_ids()[j].as_str()).copied()));
        if order.len() > start {
            ranges.push(start..order.len());
        }
    }
    if order.is_empty() {
        return Err(Error::Data("no dataset SNP is present in the reference panel".into()));
    }
    let kept: HashSet<usize> = order.iter().copied().collect();
    let dropped = (0..dataset.len())
        .filter(|k| !kept.contains(k))
        .map(|k| dataset.snp_ids[k].clone())
        .collect();
    let aligned = dataset.subset(&order);
    let panel = panel.align_to(&aligned.snp_ids)?;
    let partition = BlockPartition::new(ranges, order.len())?;
    Ok(AlignedBlocks {
        dataset: aligned,
        panel,
        partition,
        dropped,
    })
}

/// Pearson correlation of standardized panel columns within each block,
/// shrunk toward the identity: `(1 - lambda) R + lambda I`.
pub fn estimate_block_corr(
    panel: &GenotypePanel,
    partition: &BlockPartition,
    lambda: f64,
) -> Result<BlockCorr> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Config(format!("shrinkage lambda {lambda} outside [0, 1)")));
    }
    if panel.n_snps() != partition.n_snps() {
        return Err(Error::Data(format!(
            "panel has {} SNPs, partition covers {}",
            panel.n_snps(),
            partition.n_snps()
        )));
    }
    let n = panel.n_individuals();
    let standardized: Vec<Result<Vec<f64>>> = par::map_indexed(panel.n_snps(), |j| {
        let col = panel.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::Data(format!(
                "SNP {} is constant in the reference panel",
                panel.snp_ids()[j]
            )));
        }
        Ok(col.iter().map(|x| (x - mean) / sd).collect())
    });
    let standardized: Vec<Vec<f64>> = standardized.into_iter().collect::<Result<_>>()?;

    let matrices = par::map_indexed(partition.len(), |l| {
        let b = &partition.blocks()[l];
        let m = b.len();
        let mut r = vec![0.0; m * m];
        for i in 0..m {
            r[i * m + i] = 1.0;
            for j in 0..i {
                let c = linalg::dot(&standardized[b.start + i], &standardized[b.start + j])
                    / (n - 1) as f64;
                let c = (1.0 - lambda) * c.clamp(-1.0, 1.0);
                r[i * m + j] = c;
                r[j * m + i] = c;
            }
        }
        r
    });
    Ok(BlockCorr {
        matrices,
        shrinkage_lambda: lambda,
    })
}
