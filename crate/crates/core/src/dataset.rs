//! Joining metric CSVs with MR labels and encoding them into a numeric,
//! train-ready matrix.
//!
//! The metric CSV schema is fixed (see [`METRICS_HEADER`]); the four
//! categorical columns (`ext`, `full_parameters`, `dataArg`,
//! `returnDataType`) are label-encoded by first occurrence so the feature
//! count stays at 21.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::{MethodRecord, MetricVector};

/// Metric CSV header, in exact column order.
pub const METRICS_HEADER: [&str; 23] = [
    "method_id",
    "name",
    "ext",
    "start_line",
    "end_line",
    "tloc",
    "sloc_whbl",
    "nloc",
    "nloc_whbl",
    "sloc_statements",
    "token_count",
    "full_parameters",
    "numArg",
    "dataArg",
    "numOper",
    "numOperands",
    "total_Var",
    "numLoops",
    "CCN",
    "numMethCall",
    "has_return",
    "totalReturn",
    "returnDataType",
];

/// The 21 feature names, identical to the metric columns of the CSV
/// (everything after `method_id` and `name`), in CSV order.
pub const FEATURE_NAMES: [&str; 21] = [
    "ext",
    "start_line",
    "end_line",
    "tloc",
    "sloc_whbl",
    "nloc",
    "nloc_whbl",
    "sloc_statements",
    "token_count",
    "full_parameters",
    "numArg",
    "dataArg",
    "numOper",
    "numOperands",
    "total_Var",
    "numLoops",
    "CCN",
    "numMethCall",
    "has_return",
    "totalReturn",
    "returnDataType",
];

/// Feature columns holding strings rather than counts.
pub const CATEGORICAL_FEATURES: [&str; 4] = ["ext", "full_parameters", "dataArg", "returnDataType"];

/// Label CSV header.
pub const LABELS_HEADER: [&str; 7] = ["method_id", "ADD", "EXC", "INC", "MUL", "PER", "INV"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("header mismatch at column {index}: expected `{expected}`, found `{found}`")]
    Schema { index: usize, expected: String, found: String },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a count")]
    Parse { line: u64, column: String, value: String },
    #[error("line {line}, column `{column}`: label `{value}` is not 0 or 1")]
    Value { line: u64, column: String, value: String },
    #[error("labeled methods missing from metrics: {}", .0.join(", "))]
    Join(Vec<String>),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// The six metamorphic relations of the predefined catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MrKind {
    #[serde(rename = "ADD")]
    Add,
    #[serde(rename = "EXC")]
    Exc,
    #[serde(rename = "INC")]
    Inc,
    #[serde(rename = "MUL")]
    Mul,
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "INV")]
    Inv,
}

impl MrKind {
    pub const ALL: [MrKind; 6] =
        [MrKind::Add, MrKind::Exc, MrKind::Inc, MrKind::Mul, MrKind::Per, MrKind::Inv];

    pub fn name(self) -> &'static str {
        match self {
            MrKind::Add => "ADD",
            MrKind::Exc => "EXC",
            MrKind::Inc => "INC",
            MrKind::Mul => "MUL",
            MrKind::Per => "PER",
            MrKind::Inv => "INV",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<MrKind> {
        MrKind::ALL.iter().copied().find(|mr| mr.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for MrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One method with its six MR labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMethod {
    pub method_id: String,
    /// Indexed by [`MrKind::index`]; always all six present.
    pub labels: [u8; 6],
}

impl LabeledMethod {
    pub fn label(&self, mr: MrKind) -> u8 {
        self.labels[mr.index()]
    }
}

/// First-occurrence label encoder for one categorical column. The code of a
/// category is its position in `categories`; unseen categories encode to -1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoder {
    pub categories: Vec<String>,
}

impl Encoder {
    fn fit_encode(&mut self, value: &str) -> i64 {
        match self.categories.iter().position(|c| c == value) {
            Some(i) => i as i64,
            None => {
                self.categories.push(value.to_string());
                (self.categories.len() - 1) as i64
            }
        }
    }

    /// Code for a category, -1 when unseen.
    pub fn encode(&self, value: &str) -> i64 {
        self.categories.iter().position(|c| c == value).map_or(-1, |i| i as i64)
    }

    pub fn decode(&self, code: i64) -> Option<&str> {
        usize::try_from(code).ok().and_then(|i| self.categories.get(i)).map(|s| s.as_str())
    }
}

/// Encoded feature matrix with per-method MR labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// n_methods x n_features, numeric.
    pub rows: Vec<Vec<f64>>,
    /// n_methods x 6, indexed by [`MrKind::index`].
    pub labels: Vec<[u8; 6]>,
    pub method_ids: Vec<String>,
    /// Encoder tables for the categorical features present in this dataset.
    pub encoders: BTreeMap<String, Encoder>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// The 0/1 label column of one MR.
    pub fn labels_for(&self, mr: MrKind) -> Vec<u8> {
        self.labels.iter().map(|l| l[mr.index()]).collect()
    }

    /// Copy of the selected rows plus their labels for one MR.
    pub fn slice(&self, rows: &[usize], mr: MrKind) -> (Vec<Vec<f64>>, Vec<u8>) {
        let x = rows.iter().map(|&r| self.rows[r].clone()).collect();
        let y = rows.iter().map(|&r| self.labels[r][mr.index()]).collect();
        (x, y)
    }

    /// Column-sliced copy holding `names` in the given order. Rows, labels
    /// and method ids are preserved.
    pub fn select_features(&self, names: &[String]) -> Result<Dataset, DatasetError> {
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .feature_names
                .iter()
                .position(|f| f == name)
                .ok_or_else(|| DatasetError::UnknownFeature(name.clone()))?;
            cols.push(idx);
        }
        let rows = self
            .rows
            .iter()
            .map(|row| cols.iter().map(|&c| row[c]).collect())
            .collect();
        let encoders = self
            .encoders
            .iter()
            .filter(|(k, _)| names.iter().any(|n| n == *k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(Dataset {
            feature_names: names.to_vec(),
            rows,
            labels: self.labels.clone(),
            method_ids: self.method_ids.clone(),
            encoders,
        })
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), DatasetError> {
    for (i, want) in expected.iter().enumerate() {
        let got = found.get(i).unwrap_or("");
        if got != *want {
            return Err(DatasetError::Schema {
                index: i,
                expected: (*want).to_string(),
                found: got.to_string(),
            });
        }
    }
    if found.len() > expected.len() {
        return Err(DatasetError::Schema {
            index: expected.len(),
            expected: "<end of header>".to_string(),
            found: found.get(expected.len()).unwrap_or("").to_string(),
        });
    }
    Ok(())
}

fn reader_for(input: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn parse_count(
    record: &csv::StringRecord,
    idx: usize,
    column: &str,
    line: u64,
) -> Result<usize, DatasetError> {
    let raw = record.get(idx).unwrap_or("");
    raw.trim().parse::<usize>().map_err(|_| DatasetError::Parse {
        line,
        column: column.to_string(),
        value: raw.to_string(),
    })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

/// Parse a metric CSV produced by the miner. Leading `#` comment lines are
/// skipped; the header must match [`METRICS_HEADER`] exactly.
pub fn load_metrics(input: impl Read) -> Result<Vec<(String, MetricVector)>, DatasetError> {
    let mut rdr = reader_for(input);
    check_header(rdr.headers()?, &METRICS_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let (id, _name, metrics) = parse_metric_record(&record, 0)?;
        out.push((id, metrics));
    }
    Ok(out)
}

/// Parse the metric fields of one CSV record, starting at `offset` columns
/// before `method_id`. Shared by the plain and the combined loaders.
fn parse_metric_record(
    record: &csv::StringRecord,
    offset: usize,
    ) -> Result<(String, String, MetricVector), DatasetError> {
    let line = record_line(record);
    let get_text = |idx: usize| record.get(offset + idx).unwrap_or("").to_string();
    let count = |idx: usize| parse_count(record, offset + idx, METRICS_HEADER[idx], line);

    let method_id = get_text(0);
    let name = get_text(1);
    let has_return_raw = count(20)?;
    if has_return_raw > 1 {
        return Err(DatasetError::Value {
            line,
            column: "has_return".to_string(),
            value: has_return_raw.to_string(),
        });
    }
    let metrics = MetricVector {
        ext: get_text(2),
        start_line: count(3)?,
        end_line: count(4)?,
        tloc: count(5)?,
        sloc_whbl: count(6)?,
        nloc: count(7)?,
        nloc_whbl: count(8)?,
        sloc_statements: count(9)?,
        token_count: count(10)?,
        full_parameters: get_text(11),
        num_arg: count(12)?,
        data_arg: get_text(13),
        num_oper: count(14)?,
        num_operands: count(15)?,
        total_var: count(16)?,
        num_loops: count(17)?,
        ccn: count(18)?,
        num_meth_call: count(19)?,
        has_return: has_return_raw == 1,
        total_return: count(21)?,
        return_data_type: get_text(22),
    };
    Ok((method_id, name, metrics))
}

fn parse_label_cell(
    record: &csv::StringRecord,
    idx: usize,
    column: &str,
) -> Result<u8, DatasetError> {
    let line = record_line(record);
    let raw = record.get(idx).unwrap_or("").trim();
    match raw {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(DatasetError::Value { line, column: column.to_string(), value: raw.to_string() }),
    }
}

/// Parse a label CSV with header `method_id,ADD,EXC,INC,MUL,PER,INV` and
/// 0/1 cells.
pub fn load_labels(input: impl Read) -> Result<Vec<LabeledMethod>, DatasetError> {
    let mut rdr = reader_for(input);
    check_header(rdr.headers()?, &LABELS_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let mut labels = [0u8; 6];
        for (j, slot) in labels.iter_mut().enumerate() {
            *slot = parse_label_cell(&record, 1 + j, LABELS_HEADER[1 + j])?;
        }
        out.push(LabeledMethod { method_id: record.get(0).unwrap_or("").to_string(), labels });
    }
    Ok(out)
}

/// Parse a combined dataset CSV (metric schema plus the six label columns).
pub fn load_combined(
    input: impl Read,
) -> Result<(Vec<(String, MetricVector)>, Vec<LabeledMethod>), DatasetError> {
    let expected: Vec<&str> =
        METRICS_HEADER.iter().chain(LABELS_HEADER.iter().skip(1)).copied().collect();
    let mut rdr = reader_for(input);
    check_header(rdr.headers()?, &expected)?;
    let mut metrics = Vec::new();
    let mut labeled = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let (id, _name, m) = parse_metric_record(&record, 0)?;
        let mut labels = [0u8; 6];
        for (j, slot) in labels.iter_mut().enumerate() {
            *slot = parse_label_cell(&record, METRICS_HEADER.len() + j, LABELS_HEADER[1 + j])?;
        }
        metrics.push((id.clone(), m));
        labeled.push(LabeledMethod { method_id: id, labels });
    }
    Ok((metrics, labeled))
}

/// Join metrics with labels into an encoded dataset.
///
/// Row order follows `labels`. Metrics without a label row are dropped and
/// reported in the returned warnings; labels without metrics are an error.
/// Categorical features are label-encoded by first occurrence in row order.
pub fn build_dataset(
    metrics: &[(String, MetricVector)],
    labels: &[LabeledMethod],
) -> Result<(Dataset, Vec<String>), DatasetError> {
    let missing: Vec<String> = labels
        .iter()
        .filter(|lm| !metrics.iter().any(|(id, _)| *id == lm.method_id))
        .map(|lm| lm.method_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(DatasetError::Join(missing));
    }

    let mut encoders: BTreeMap<String, Encoder> = CATEGORICAL_FEATURES
        .iter()
        .map(|&name| (name.to_string(), Encoder::default()))
        .collect();

    let mut rows = Vec::with_capacity(labels.len());
    let mut label_rows = Vec::with_capacity(labels.len());
    let mut method_ids = Vec::with_capacity(labels.len());
    for lm in labels {
        let (_, m) = metrics
            .iter()
            .find(|(id, _)| *id == lm.method_id)
            .expect("checked above");
        let mut encode = |name: &str, value: &str| -> f64 {
            encoders.get_mut(name).expect("categorical encoder exists").fit_encode(value) as f64
        };
        let row = vec![
            encode("ext", &m.ext),
            m.start_line as f64,
            m.end_line as f64,
            m.tloc as f64,
            m.sloc_whbl as f64,
            m.nloc as f64,
            m.nloc_whbl as f64,
            m.sloc_statements as f64,
            m.token_count as f64,
            encode("full_parameters", &m.full_parameters),
            m.num_arg as f64,
            encode("dataArg", &m.data_arg),
            m.num_oper as f64,
            m.num_operands as f64,
            m.total_var as f64,
            m.num_loops as f64,
            m.ccn as f64,
            m.num_meth_call as f64,
            f64::from(u8::from(m.has_return)),
            m.total_return as f64,
            encode("returnDataType", &m.return_data_type),
        ];
        rows.push(row);
        label_rows.push(lm.labels);
        method_ids.push(lm.method_id.clone());
    }

    let warnings: Vec<String> = metrics
        .iter()
        .filter(|(id, _)| !labels.iter().any(|lm| lm.method_id == *id))
        .map(|(id, _)| format!("dropped unlabeled method {id}"))
        .collect();

    let ds = Dataset {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
        labels: label_rows,
        method_ids,
        encoders,
    };
    Ok((ds, warnings))
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

fn metric_row(method_id: &str, name: &str, m: &MetricVector) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        quote(method_id),
        quote(name),
        quote(&m.ext),
        m.start_line,
        m.end_line,
        m.tloc,
        m.sloc_whbl,
        m.nloc,
        m.nloc_whbl,
        m.sloc_statements,
        m.token_count,
        quote(&m.full_parameters),
        m.num_arg,
        quote(&m.data_arg),
        m.num_oper,
        m.num_operands,
        m.total_var,
        m.num_loops,
        m.ccn,
        m.num_meth_call,
        u8::from(m.has_return),
        m.total_return,
        quote(&m.return_data_type),
    )
}

/// Render a metric CSV. Text fields are double-quoted with doubled-quote
/// escaping; `comment` lines, when given, are prepended as `# ...` lines.
pub fn write_metrics_csv(records: &[(MethodRecord, MetricVector)], comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(&METRICS_HEADER.join(","));
    out.push('\n');
    for (rec, m) in records {
        out.push_str(&metric_row(&rec.method_id, &rec.name, m));
        out.push('\n');
    }
    out
}

/// Render a combined dataset CSV: the metric schema plus the six label
/// columns. Metric rows without labels are skipped (callers warn).
pub fn write_combined_csv(
    metrics: &[(String, String, MetricVector)],
    labels: &[LabeledMethod],
    comment: Option<&str>,
) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(&METRICS_HEADER.join(","));
    for mr in MrKind::ALL {
        out.push(',');
        out.push_str(mr.name());
    }
    out.push('\n');
    for lm in labels {
        if let Some((id, name, m)) = metrics.iter().find(|(id, _, _)| *id == lm.method_id) {
            out.push_str(&metric_row(id, name, m));
            for v in lm.labels {
                out.push(',');
                out.push_str(if v == 1 { "1" } else { "0" });
            }
            out.push('\n');
        }
    }
    out
}
