//! Tabular data: CSV ingestion into a typed design matrix, stratified
//! train/test splits and stratified fold assignment.
//!
//! Cells are stored as `f64`. Numeric cells hold their value, categorical cells
//! hold the index of their label in [`VariableMeta::categories`]. Categories are
//! kept in lexicographic order so that reloading a written file reproduces the
//! same coding.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub kind: VariableKind,
    /// `[lo, hi]` over all rows; numeric variables only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub observed_domain: Option<[f64; 2]>,
    /// Distinct labels; categorical variables only.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub categories: Vec<String>,
}

impl VariableMeta {
    pub fn numeric(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        VariableMeta {
            name: name.into(),
            kind: VariableKind::Numeric,
            observed_domain: Some([lo, hi]),
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        VariableMeta {
            name: name.into(),
            kind: VariableKind::Categorical,
            observed_domain: None,
            categories,
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == VariableKind::Numeric
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            VariableKind::Numeric => {
                let [lo, hi] = self.observed_domain.ok_or_else(|| {
                    Error::InvalidDataset(format!("numeric `{}` lacks a domain", self.name))
                })?;
                if !(lo <= hi) || !self.categories.is_empty() {
                    return Err(Error::InvalidDataset(format!(
                        "numeric `{}` has an invalid domain or categories",
                        self.name
                    )));
                }
            }
            VariableKind::Categorical => {
                let distinct: BTreeSet<&String> = self.categories.iter().collect();
                if self.categories.is_empty()
                    || distinct.len() != self.categories.len()
                    || self.observed_domain.is_some()
                {
                    return Err(Error::InvalidDataset(format!(
                        "categorical `{}` needs distinct, nonempty categories",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Design matrix with a binary target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub target_name: String,
    /// Raw labels coded as 0 and 1, in that order.
    pub class_labels: [String; 2],
    pub variables: Vec<VariableMeta>,
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<u8>,
}

impl Dataset {
    /// Builds a dataset, recomputing numeric domains from `rows` and checking
    /// every invariant.
    pub fn from_parts(
        name: impl Into<String>,
        target_name: impl Into<String>,
        class_labels: [String; 2],
        mut variables: Vec<VariableMeta>,
        rows: Vec<Vec<f64>>,
        target: Vec<u8>,
    ) -> Result<Self> {
        let p = variables.len();
        if rows.len() != target.len() {
            return Err(Error::InvalidDataset(format!(
                "{} rows but {} labels",
                rows.len(),
                target.len()
            )));
        }
        if rows.len() < 2 {
            return Err(Error::InvalidDataset("need at least two rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row_index: i,
                    found: row.len(),
                    expected: p,
                });
            }
        }
        if target.iter().any(|&y| y > 1) {
            return Err(Error::InvalidDataset("labels must be 0 or 1".into()));
        }
        let positives = target.iter().filter(|&&y| y == 1).count();
        if positives == 0 || positives == target.len() {
            return Err(Error::SingleClassData);
        }
        for (j, var) in variables.iter_mut().enumerate() {
            match var.kind {
                VariableKind::Numeric => {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for (i, row) in rows.iter().enumerate() {
                        let v = row[j];
                        if !v.is_finite() {
                            return Err(Error::MissingValue {
                                row: i,
                                column: var.name.clone(),
                            });
                        }
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                    var.observed_domain = Some([lo, hi]);
                }
                VariableKind::Categorical => {
                    let k = var.categories.len() as f64;
                    for (i, row) in rows.iter().enumerate() {
                        let code = row[j];
                        if !(code >= 0.0 && code < k && code.fract() == 0.0) {
                            return Err(Error::InvalidDataset(format!(
                                "row {i}: code {code} out of range for `{}`",
                                var.name
                            )));
                        }
                    }
                }
            }
            var.validate()?;
        }
        Ok(Dataset {
            name: name.into(),
            target_name: target_name.into(),
            class_labels,
            variables,
            rows,
            target,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.target.iter().filter(|&&y| y == 1).count();
        [self.target.len() - pos, pos]
    }

    /// Rows at `indices`, in that order. Numeric domains are recomputed;
    /// category lists are kept whole so codes stay valid.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let target = indices.iter().map(|&i| self.target[i]).collect();
        Dataset::from_parts(
            self.name.clone(),
            self.target_name.clone(),
            self.class_labels.clone(),
            self.variables.clone(),
            rows,
            target,
        )
    }

    /// Writes the dataset as CSV with the target as the last column.
    /// Numbers use the shortest representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        header.push(&self.target_name);
        w.write_record(&header)?;
        for (row, &y) in self.rows.iter().zip(&self.target) {
            let mut record: Vec<String> = row
                .iter()
                .zip(&self.variables)
                .map(|(&v, meta)| match meta.kind {
                    VariableKind::Numeric => format!("{v}"),
                    VariableKind::Categorical => meta.categories[v as usize].clone(),
                })
                .collect();
            record.push(self.class_labels[y as usize].clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Per-column overrides applied during ingestion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: BTreeMap<String, VariableKind>,
    /// Raw target label coded as 1. Defaults to the lexicographically larger one.
    pub positive_label: Option<String>,
}

impl Schema {
    /// Parses a flat `{column: "numeric" | "categorical"}` JSON object.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let columns: BTreeMap<String, VariableKind> = serde_json::from_str(s)?;
        Ok(Schema {
            columns,
            positive_label: None,
        })
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "NA"
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a CSV file with a header row.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file), &name, target_column, schema)
}

pub fn read_csv<R: Read>(
    reader: R,
    name: &str,
    target_column: &str,
    schema: &Schema,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTarget(target_column.to_string()))?;

    let mut raw: Vec<Vec<String>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                row_index: i,
                found: rec.len(),
                expected: header.len(),
            });
        }
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if let Some(j) = cells.iter().position(|c| is_missing(c)) {
            return Err(Error::MissingValue {
                row: i,
                column: header[j].clone(),
            });
        }
        raw.push(cells);
    }

    let labels: BTreeSet<&str> = raw.iter().map(|r| r[target_idx].trim()).collect();
    if labels.len() != 2 {
        return Err(Error::NonBinaryTarget {
            column: target_column.to_string(),
            found: labels.len(),
        });
    }
    let ordered: Vec<&str> = labels.into_iter().collect();
    let class_labels = match &schema.positive_label {
        None => [ordered[0].to_string(), ordered[1].to_string()],
        Some(pos) if pos == ordered[0] => [ordered[1].to_string(), ordered[0].to_string()],
        Some(pos) if pos == ordered[1] => [ordered[0].to_string(), ordered[1].to_string()],
        Some(pos) => {
            return Err(Error::InvalidConfig(format!(
                "positive label `{pos}` does not occur in `{target_column}`"
            )))
        }
    };
    let target: Vec<u8> = raw
        .iter()
        .map(|r| u8::from(r[target_idx].trim() == class_labels[1]))
        .collect();

    let mut variables = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (j, col_name) in header.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let kind = match schema.columns.get(col_name) {
            Some(k) => *k,
            None if raw.iter().all(|r| parse_finite(&r[j]).is_some()) => VariableKind::Numeric,
            None => VariableKind::Categorical,
        };
        match kind {
            VariableKind::Numeric => {
                let mut col = Vec::with_capacity(raw.len());
                for (i, r) in raw.iter().enumerate() {
                    let v = parse_finite(&r[j]).ok_or_else(|| Error::NotNumeric {
                        row: i,
                        column: col_name.clone(),
                        value: r[j].clone(),
                    })?;
                    col.push(v);
                }
                variables.push(VariableMeta::numeric(col_name.clone(), 0.0, 0.0));
                columns.push(col);
            }
            VariableKind::Categorical => {
                let cats: BTreeSet<&str> = raw.iter().map(|r| r[j].trim()).collect();
                let cats: Vec<String> = cats.into_iter().map(str::to_string).collect();
                let col = raw
                    .iter()
                    .map(|r| cats.iter().position(|c| c == r[j].trim()).unwrap() as f64)
                    .collect();
                variables.push(VariableMeta::categorical(col_name.clone(), cats));
                columns.push(col);
            }
        }
    }
    let rows = (0..raw.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Dataset::from_parts(
        name,
        target_column,
        class_labels,
        variables,
        rows,
        target,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

fn class_indices(target: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &y) in target.iter().enumerate() {
        out[y as usize].push(i);
    }
    out
}

/// Stratified train/test split.
pub fn split(dataset: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let f = spec.test_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction {f} outside (0, 1)"
        )));
    }
    let n = dataset.n_rows();
    let n_test = (n as f64 * f).ceil() as usize;
    if n_test < 1 || n_test >= n {
        return Err(Error::DegenerateSplit(format!(
            "{n} rows cannot be split at fraction {f}"
        )));
    }

    // Largest-remainder allocation keeps each class within one row of its quota.
    let by_class = class_indices(&dataset.target);
    let quotas: Vec<f64> = by_class.iter().map(|c| c.len() as f64 * f).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = n_test.saturating_sub(alloc.iter().sum());
    for &c in &order {
        if remaining == 0 {
            break;
        }
        if alloc[c] < by_class[c].len() {
            alloc[c] += 1;
            remaining -= 1;
        }
    }

    let mut test_idx = Vec::with_capacity(n_test);
    let mut train_idx = Vec::with_capacity(n - n_test);
    for (c, members) in by_class.iter().enumerate() {
        if alloc[c] == 0 || alloc[c] == members.len() {
            return Err(Error::DegenerateSplit(format!(
                "class {c} ({} rows) would be missing from one side",
                members.len()
            )));
        }
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng::stream(spec.seed, "split", c as u64));
        test_idx.extend_from_slice(&shuffled[..alloc[c]]);
        train_idx.extend_from_slice(&shuffled[alloc[c]..]);
    }
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((dataset.subset(&train_idx)?, dataset.subset(&test_idx)?))
}

/// Stratified fold ids in `0..n_folds` for each row.
pub fn fold_assignments(dataset: &Dataset, n_folds: usize, seed: u64) -> Result<Vec<usize>> {
    stratified_folds(&dataset.target, n_folds, seed)
}

pub(crate) fn stratified_folds(target: &[u8], n_folds: usize, seed: u64) -> Result<Vec<usize>> {
    if n_folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {n_folds}"
        )));
    }
    let by_class = class_indices(target);
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < n_folds {
            return Err(Error::TooFewPerClass {
                class: c as u8,
                count: members.len(),
                n_folds,
            });
        }
    }
    // Deal each shuffled class round-robin, continuing the rotation across
    // classes so total fold sizes also differ by at most one.
    let mut folds = vec![0usize; target.len()];
    let mut next = 0usize;
    for (c, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng::stream(seed, "folds", c as u64));
        for i in shuffled {
            folds[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    Ok(folds)
}
