//! CSV reading and writing for datasets, truth vectors and predictions.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pacbam::risk::Dataset;

/// A covariate matrix read from CSV, with the response when a `y` column is
/// present.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub n: usize,
    pub p: usize,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
}

impl Table {
    pub fn into_dataset(self) -> Result<Dataset> {
        let y = self.y.ok_or_else(|| anyhow!("data has no `y` column"))?;
        Ok(Dataset::new(self.n, self.p, self.x, y)?)
    }
}

/// Reads `x1,…,xp[,y]`. Errors name the offending line (1-based, header is
/// line 1).
pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(file);
    let header = reader
        .headers()
        .with_context(|| format!("{}: line 1: unreadable header", path.display()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let has_y = names.last() == Some(&"y");
    let p = if has_y { names.len() - 1 } else { names.len() };
    if p == 0 {
        bail!("{}: line 1: no covariate columns", path.display());
    }
    for (j, name) in names.iter().take(p).enumerate() {
        if *name != format!("x{}", j + 1) {
            bail!("{}: line 1: expected column `x{}`, found `{name}`", path.display(), j + 1);
        }
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| anyhow!("{}: line {}: {e}", path.display(), i + 2))?;
        let line = record.position().map_or(i as u64 + 2, |pos| pos.line());
        if record.len() != names.len() {
            bail!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                names.len(),
                record.len()
            );
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| anyhow!("{}: line {line}: `{field}` is not a number", path.display()))?;
            if !v.is_finite() {
                bail!("{}: line {line}: non-finite value `{field}`", path.display());
            }
            if c < p {
                x.push(v);
            } else {
                y.push(v);
            }
        }
    }
    let n = x.len() / p;
    if n == 0 {
        bail!("{}: no data rows", path.display());
    }
    Ok(Table { n, p, x, y: has_y.then_some(y) })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_table(path)?.into_dataset().with_context(|| format!("{}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Writes `x1,…,xp,y` with shortest round-trip float formatting.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = create(path)?;
    let header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).chain(["y".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (row, y) in data.rows().zip(data.y()) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{y}")?;
    }
    w.flush()?;
    Ok(())
}

/// One-column CSV.
pub fn write_column(path: &Path, name: &str, values: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{name}")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = reader.headers()?.clone();
    if header.len() != 1 || &header[0] != name {
        bail!("{}: line 1: expected the single column `{name}`", path.display());
    }
    reader
        .records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| anyhow!("{}: line {}: {e}", path.display(), i + 2))?;
            r[0].parse::<f64>().map_err(|_| anyhow!("{}: line {}: `{}` is not a number", path.display(), i + 2, &r[0]))
        })
        .collect()
}
