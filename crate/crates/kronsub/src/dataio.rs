//! Labeled 2-D signal collections and the `kst` plain-text interchange
//! format.
//!
//! `kst` version 1 is line-oriented and diffable: a header `kst 1 K m1 m2 L`,
//! one line of K class labels, then K blocks of m1 rows with m2 decimal
//! values each. Values are written with 17 significant digits, so a
//! save/load round trip reproduces every `f64` bit-for-bit. Lines whose
//! first non-blank character is `#` are comments and are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{sample_signal, KSEnsemble, RngStream};
use crate::tensorlin::Matrix;

/// A collection of equally shaped matrix signals with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// Signal shape (rows, columns), kept explicit so an empty collection
    /// still has well-defined dimensions.
    shape: (usize, usize),
    signals: Vec<Matrix>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    /// Builds a dataset, checking that signals and labels pair up, that all
    /// signals share `shape`, and that every label is below `classes`.
    pub fn new(
        shape: (usize, usize),
        signals: Vec<Matrix>,
        labels: Vec<usize>,
        classes: usize,
    ) -> Result<Self> {
        if signals.len() != labels.len() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "{} signals but {} labels",
                    signals.len(),
                    labels.len()
                ),
            });
        }
        if shape.0 == 0 || shape.1 == 0 || classes == 0 {
            return Err(Error::ShapeMismatch {
                context: "signal shape and class count must be positive".into(),
            });
        }
        for (j, s) in signals.iter().enumerate() {
            if s.shape() != shape {
                return Err(Error::ShapeMismatch {
                    context: format!(
                        "signal {j} is {}x{}, expected {}x{}",
                        s.nrows(),
                        s.ncols(),
                        shape.0,
                        shape.1
                    ),
                });
            }
        }
        for (j, &lab) in labels.iter().enumerate() {
            if lab >= classes {
                return Err(Error::ShapeMismatch {
                    context: format!(
                        "label {lab} of signal {j} exceeds class count {classes}"
                    ),
                });
            }
        }
        Ok(Self { shape, signals, labels, classes })
    }

    /// Signal shape as (rows, columns).
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn signals(&self) -> &[Matrix] {
        &self.signals
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Number of distinct classes the labels may refer to.
    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of signals.
    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// Indices of the signals carrying label `class`.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &lab)| lab == class)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Draws `per_class` signals from every class of `ens` at noise power
/// `sigma2`, labels attached in class-major order. Deterministic in the
/// provided stream: signal j of class i uses substream `i * per_class + j`.
pub fn synth_dataset(
    ens: &KSEnsemble,
    per_class: usize,
    sigma2: f64,
    stream: RngStream,
) -> LabeledDataset {
    assert!(per_class >= 1, "per_class must be at least 1");
    let l = ens.dims.l;
    let mut signals = Vec::with_capacity(l * per_class);
    let mut labels = Vec::with_capacity(l * per_class);
    for (i, cls) in ens.classes.iter().enumerate() {
        for j in 0..per_class {
            let sub = stream.substream((i * per_class + j) as u64);
            signals.push(sample_signal(cls, sigma2, sub));
            labels.push(i);
        }
    }
    LabeledDataset::new((ens.dims.m1, ens.dims.m2), signals, labels, l)
        .expect("synthesized dataset is well formed by construction")
}

/// Appends one matrix as rows of decimal values with 17 significant digits.
pub(crate) fn push_matrix_block(out: &mut String, m: &Matrix) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.16e}", m[(r, c)]);
        }
        out.push('\n');
    }
}

/// Renders a dataset in `kst` version 1 text form.
pub fn format_tensor_file(data: &LabeledDataset) -> String {
    let (m1, m2) = data.shape();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "kst 1 {} {} {} {}",
        data.len(),
        m1,
        m2,
        data.classes()
    );
    let labels: Vec<String> = data.labels().iter().map(|l| l.to_string()).collect();
    let _ = writeln!(out, "{}", labels.join(" "));
    for s in data.signals() {
        out.push('\n');
        push_matrix_block(&mut out, s);
    }
    out
}

/// Line-by-line reader that skips blanks and `#` comments while tracking
/// 1-based line numbers for error reports.
pub(crate) struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { lines: text.lines(), line_no: 0 }
    }

    /// Next line carrying content, with its line number.
    pub(crate) fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((self.line_no, trimmed));
        }
        None
    }

    pub(crate) fn line_no(&self) -> usize {
        self.line_no
    }
}

fn parse_count(token: &str, line: usize, what: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("{what}: expected a nonnegative integer, got `{token}`"),
    })
}

/// Reads one matrix of the given shape from `reader`. `what` names the
/// block in error messages.
pub(crate) fn read_matrix_block(
    reader: &mut LineReader<'_>,
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<Matrix> {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        let (line_no, line) = reader.next_content().ok_or_else(|| Error::ParseError {
            line: reader.line_no(),
            message: format!("unexpected end of file inside {what}"),
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != cols {
            return Err(Error::ParseError {
                line: line_no,
                message: format!(
                    "{what}: expected {cols} values per row, got {}",
                    fields.len()
                ),
            });
        }
        for (c, tok) in fields.iter().enumerate() {
            m[(r, c)] = tok.parse().map_err(|_| Error::ParseError {
                line: line_no,
                message: format!("{what}: `{tok}` is not a decimal number"),
            })?;
        }
    }
    Ok(m)
}

/// Parses `kst` version 1 text into a dataset.
pub fn parse_tensor_file(text: &str) -> Result<LabeledDataset> {
    let mut reader = LineReader::new(text);
    let (hline, header) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: 1,
        message: "empty file".into(),
    })?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 || tok[0] != "kst" {
        return Err(Error::ParseError {
            line: hline,
            message: "header must be `kst 1 K m1 m2 L`".into(),
        });
    }
    if tok[1] != "1" {
        return Err(Error::ParseError {
            line: hline,
            message: format!("unsupported format version `{}`", tok[1]),
        });
    }
    let k = parse_count(tok[2], hline, "signal count")?;
    let m1 = parse_count(tok[3], hline, "row count")?;
    let m2 = parse_count(tok[4], hline, "column count")?;
    let l = parse_count(tok[5], hline, "class count")?;

    let (lline, label_line) = reader.next_content().ok_or_else(|| Error::ParseError {
        line: reader.line_no(),
        message: "missing label line".into(),
    })?;
    let label_tok: Vec<&str> = label_line.split_whitespace().collect();
    if label_tok.len() != k {
        return Err(Error::ShapeMismatch {
            context: format!(
                "header declares {k} signals but label line has {} entries",
                label_tok.len()
            ),
        });
    }
    let mut labels = Vec::with_capacity(k);
    for t in &label_tok {
        let lab = parse_count(t, lline, "label")?;
        if lab >= l {
            return Err(Error::ParseError {
                line: lline,
                message: format!("label {lab} exceeds declared class count {l}"),
            });
        }
        labels.push(lab);
    }

    let mut signals = Vec::with_capacity(k);
    for j in 0..k {
        signals.push(read_matrix_block(
            &mut reader,
            m1,
            m2,
            &format!("signal block {j}"),
        )?);
    }
    if let Some((line_no, _)) = reader.next_content() {
        return Err(Error::ParseError {
            line: line_no,
            message: format!("trailing content after {k} declared signal blocks"),
        });
    }
    LabeledDataset::new((m1, m2), signals, labels, l)
}

/// Writes a dataset to `path` in `kst` version 1 form.
pub fn save_tensor_file<P: AsRef<Path>>(path: P, data: &LabeledDataset) -> Result<()> {
    fs::write(path, format_tensor_file(data))?;
    Ok(())
}

/// Reads a `kst` version 1 file from `path`.
pub fn load_tensor_file<P: AsRef<Path>>(path: P) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path)?;
    parse_tensor_file(&text)
}
