//! File formats: dense CSV and Matrix Market matrices, schedule files
//! (JSON or CSV), and comparison tables.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use btsched_core::pairs::pair_to_index;
use btsched_core::ComparisonData;
use btsched_core::SchedulingDistribution;

/// Read a matrix, dispatching on the extension: `.mtx` is Matrix Market,
/// anything else is header-free dense CSV.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
        read_matrix_market(path)
    } else {
        read_matrix_csv(path)
    }
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Vec<f64> = trimmed
            .split(',')
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("line {} of {}", line_no + 1, path.display()))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "ragged CSV matrix in {}: line {} has {} fields, expected {}",
                    path.display(),
                    line_no + 1,
                    row.len(),
                    first.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("empty matrix file {}", path.display());
    }
    let (nrows, ncols) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Matrix Market reader covering coordinate (real/integer/pattern,
/// general/symmetric) and dense array (real general) files.
pub fn read_matrix_market(path: &Path) -> Result<DMatrix<f64>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();

    let banner = lines
        .next()
        .context("empty Matrix Market file")??
        .to_lowercase();
    let fields: Vec<&str> = banner.split_whitespace().collect();
    if fields.len() < 4 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        bail!("not a Matrix Market file: {}", path.display());
    }
    let layout = fields[2];
    let value_type = fields[3];
    let symmetry = fields.get(4).copied().unwrap_or("general");
    if !matches!(layout, "coordinate" | "array") {
        bail!("unsupported Matrix Market layout {layout}");
    }
    if !matches!(value_type, "real" | "integer" | "pattern") {
        bail!("unsupported Matrix Market value type {value_type}");
    }
    if !matches!(symmetry, "general" | "symmetric") {
        bail!("unsupported Matrix Market symmetry {symmetry}");
    }

    let mut data_lines = lines
        .map_while(|l| l.ok())
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let size_line = data_lines.next().context("missing size line")?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().context("bad size entry"))
        .collect::<Result<_>>()?;

    if layout == "coordinate" {
        let [nrows, ncols, nnz] = dims[..] else {
            bail!("coordinate size line needs rows, cols, nnz");
        };
        let mut out = DMatrix::zeros(nrows, ncols);
        let mut seen = 0usize;
        for line in data_lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 2 {
                bail!("malformed coordinate entry: {line:?}");
            }
            let (r, c): (usize, usize) = (tokens[0].parse()?, tokens[1].parse()?);
            let value = if value_type == "pattern" {
                1.0
            } else {
                tokens
                    .get(2)
                    .context("missing value field")?
                    .parse::<f64>()?
            };
            if r < 1 || r > nrows || c < 1 || c > ncols {
                bail!("entry ({r}, {c}) outside {nrows}x{ncols}");
            }
            out[(r - 1, c - 1)] = value;
            if symmetry == "symmetric" {
                out[(c - 1, r - 1)] = value;
            }
            seen += 1;
        }
        if seen != nnz {
            bail!("expected {nnz} entries, found {seen}");
        }
        Ok(out)
    } else {
        let [nrows, ncols] = dims[..] else {
            bail!("array size line needs rows, cols");
        };
        let values: Vec<f64> = data_lines
            .flat_map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<f64>().context("bad array value"))
                    .collect::<Vec<_>>()
            })
            .collect::<Result<_>>()?;
        if values.len() != nrows * ncols {
            bail!("expected {} values, found {}", nrows * ncols, values.len());
        }
        // array data is column-major
        Ok(DMatrix::from_column_slice(nrows, ncols, &values))
    }
}

pub fn write_matrix_csv(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    for i in 0..matrix.nrows() {
        let row: Vec<String> = (0..matrix.ncols())
            .map(|j| format!("{}", matrix[(i, j)]))
            .collect();
        writeln!(writer, "{}", row.join(","))?;
    }
    Ok(())
}

/// A vector file: one value per line, or a single comma-separated row.
pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    let matrix = read_matrix_csv(path)?;
    if matrix.ncols() == 1 {
        Ok(DVector::from_column_slice(matrix.column(0).as_slice()))
    } else if matrix.nrows() == 1 {
        Ok(matrix.row(0).transpose())
    } else {
        bail!(
            "{} is {}x{}, expected a vector",
            path.display(),
            matrix.nrows(),
            matrix.ncols()
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairProb {
    pub i: usize,
    pub j: usize,
    pub q: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub tol: Option<f64>,
    pub d: Option<usize>,
    pub residual: Option<f64>,
    pub seconds: f64,
}

/// On-disk schedule: pairs in canonical linear-index order plus provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub n: usize,
    pub method: String,
    pub pairs: Vec<PairProb>,
    pub meta: ScheduleMeta,
}

impl ScheduleFile {
    pub fn from_distribution(
        schedule: &SchedulingDistribution,
        method: &str,
        meta: ScheduleMeta,
    ) -> Self {
        Self {
            n: schedule.n_objects(),
            method: method.to_string(),
            pairs: schedule
                .iter()
                .map(|(p, q)| PairProb { i: p.i, j: p.j, q })
                .collect(),
            meta,
        }
    }

    pub fn to_distribution(&self) -> Result<SchedulingDistribution> {
        let m = btsched_core::pairs::n_pairs(self.n);
        if self.pairs.len() != m {
            bail!("schedule lists {} pairs, expected {m}", self.pairs.len());
        }
        let mut probs = vec![f64::NAN; m];
        for entry in &self.pairs {
            let r = pair_to_index(entry.i, entry.j, self.n)?;
            if !probs[r - 1].is_nan() {
                bail!("pair ({}, {}) appears twice", entry.i, entry.j);
            }
            probs[r - 1] = entry.q;
        }
        Ok(SchedulingDistribution::new(
            self.n,
            DVector::from_vec(probs),
        )?)
    }
}

pub fn write_schedule_json(path: &Path, schedule: &ScheduleFile) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), schedule)?;
    Ok(())
}

pub fn write_schedule_csv(path: &Path, schedule: &ScheduleFile) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    writeln!(writer, "i,j,q")?;
    for entry in &schedule.pairs {
        writeln!(writer, "{},{},{}", entry.i, entry.j, entry.q)?;
    }
    Ok(())
}

/// Read a schedule file (`.json` or `.csv` by extension) back into a
/// distribution.
pub fn read_schedule(path: &Path) -> Result<SchedulingDistribution> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let schedule: ScheduleFile = serde_json::from_reader(BufReader::new(file))?;
        schedule.to_distribution()
    } else {
        read_schedule_csv(path)
    }
}

fn read_schedule_csv(path: &Path) -> Result<SchedulingDistribution> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();
    if headers != ["i", "j", "q"] {
        bail!("expected schedule header i,j,q in {}", path.display());
    }
    let mut pairs = Vec::new();
    let mut max_index = 0usize;
    for record in reader.records() {
        let record = record?;
        let i: usize = record[0].trim().parse()?;
        let j: usize = record[1].trim().parse()?;
        let q: f64 = record[2].trim().parse()?;
        max_index = max_index.max(i).max(j);
        pairs.push(PairProb { i, j, q });
    }
    let schedule = ScheduleFile {
        n: max_index,
        method: "unknown".to_string(),
        pairs,
        meta: ScheduleMeta::default(),
    };
    schedule.to_distribution()
}

/// Read a comparison table.
///
/// Two headers are accepted: `i,j,y,n` (per-pair counts, y wins for i) and
/// `i,j,winner` (one raw comparison per row, aggregated on ingestion).
pub fn read_comparisons(path: &Path, n_objects: Option<usize>) -> Result<ComparisonData> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();

    if headers == ["i", "j", "y", "n"] {
        let mut rows = Vec::new();
        let mut max_seen = 0usize;
        for record in reader.records() {
            let record = record?;
            let i: usize = record[0].trim().parse()?;
            let j: usize = record[1].trim().parse()?;
            let y: u64 = record[2].trim().parse()?;
            let n: u64 = record[3].trim().parse()?;
            max_seen = max_seen.max(i).max(j);
            rows.push((i, j, y, n));
        }
        let n_objects = n_objects.unwrap_or(max_seen);
        Ok(ComparisonData::from_counts(n_objects, rows)?)
    } else if headers == ["i", "j", "winner"] {
        let mut rows = Vec::new();
        let mut max_seen = 0usize;
        for record in reader.records() {
            let record = record?;
            let i: usize = record[0].trim().parse()?;
            let j: usize = record[1].trim().parse()?;
            let winner: usize = record[2].trim().parse()?;
            max_seen = max_seen.max(i).max(j);
            rows.push((i, j, winner));
        }
        let n_objects = n_objects.unwrap_or(max_seen);
        Ok(ComparisonData::from_winners(n_objects, rows)?)
    } else {
        bail!(
            "unrecognized comparison header {:?} in {}; expected i,j,y,n or i,j,winner",
            headers,
            path.display()
        )
    }
}
