//! LIBSVM-format dataset parsing.
//!
//! Each record line is `<label> <idx>:<val> ...` with 1-based feature indices
//! in strictly increasing order. Blank lines and lines whose first
//! non-whitespace character is `#` are skipped. Errors carry 1-based line and
//! byte-column positions of the offending token.

use std::path::Path;

use crate::error::{Error, Result};

/// One parsed record. Feature indices are kept 1-based, exactly as they
/// appear in the file; consumers converting to dense coordinates subtract 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmRecord {
    pub label: f64,
    pub features: Vec<(usize, f64)>,
}

/// Largest feature index appearing in any record (0 when no record has
/// features). This is the natural dense dimension of the dataset.
pub fn max_feature_index(records: &[LibsvmRecord]) -> usize {
    records
        .iter()
        .flat_map(|r| r.features.iter().map(|&(i, _)| i))
        .max()
        .unwrap_or(0)
}

/// Parses a LIBSVM file from disk.
pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<Vec<LibsvmRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records = parse_text(&text)?;
    if records.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    Ok(records)
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Tokens of a line with their 1-based starting byte columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut pos = 0;
    std::iter::from_fn(move || {
        let rest = &line[pos..];
        let skip = rest.len() - rest.trim_start().len();
        let start = pos + skip;
        let tail = &line[start..];
        if tail.is_empty() {
            return None;
        }
        let end = tail
            .find(|c: char| c.is_whitespace())
            .unwrap_or(tail.len());
        pos = start + end;
        Some((start + 1, &tail[..end]))
    })
}

pub(crate) fn parse_text(text: &str) -> Result<Vec<LibsvmRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }

        let mut toks = tokens(line);
        let (col, label_tok) = toks.next().expect("non-blank line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(lineno, col, format!("bad label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(err(lineno, col, "label must be finite"));
        }

        let mut features = Vec::new();
        let mut prev_idx = 0usize;
        for (col, tok) in toks {
            let Some((idx_s, val_s)) = tok.split_once(':') else {
                return Err(err(lineno, col, format!("expected `idx:value`, got `{tok}`")));
            };
            let idx: usize = idx_s
                .parse()
                .map_err(|_| err(lineno, col, format!("bad feature index `{idx_s}`")))?;
            if idx == 0 {
                return Err(err(lineno, col, "feature indices are 1-based"));
            }
            if idx <= prev_idx {
                return Err(err(
                    lineno,
                    col,
                    format!("feature index {idx} not strictly increasing (after {prev_idx})"),
                ));
            }
            let val: f64 = val_s.parse().map_err(|_| {
                err(
                    lineno,
                    col + idx_s.len() + 1,
                    format!("bad feature value `{val_s}`"),
                )
            })?;
            if !val.is_finite() {
                return Err(err(lineno, col + idx_s.len() + 1, "feature value must be finite"));
            }
            prev_idx = idx;
            features.push((idx, val));
        }
        records.push(LibsvmRecord { label, features });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records_comments_and_blanks() {
        let text = "\
# a comment
1 1:0.5 3:2.0

-1 2:1.0
  # indented comment
0 4:-3.5
";
        let recs = parse_text(text).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].label, 1.0);
        assert_eq!(recs[0].features, vec![(1, 0.5), (3, 2.0)]);
        assert_eq!(recs[1].features, vec![(2, 1.0)]);
        assert_eq!(recs[2].label, 0.0);
        assert_eq!(max_feature_index(&recs), 4);
    }

    #[test]
    fn label_only_records_are_allowed() {
        let recs = parse_text("1\n-1\n").unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].features.is_empty());
        assert_eq!(max_feature_index(&recs), 0);
    }

    fn expect_err(text: &str) -> (usize, usize, String) {
        match parse_text(text) {
            Err(Error::Parse {
                line,
                column,
                message,
            }) => (line, column, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_and_column() {
        let (line, col, msg) = expect_err("1 1:0.5\nxx 1:2\n");
        assert_eq!((line, col), (2, 1));
        assert!(msg.contains("bad label"));

        let (line, col, _) = expect_err("1 1:0.5 nocolon\n");
        assert_eq!((line, col), (1, 9));

        // value column points past `idx:`
        let (line, col, msg) = expect_err("1 12:zzz\n");
        assert_eq!((line, col), (1, 6));
        assert!(msg.contains("bad feature value"));
    }

    #[test]
    fn index_ordering_is_enforced() {
        let (_, _, msg) = expect_err("1 2:1.0 2:2.0\n");
        assert!(msg.contains("strictly increasing"));
        let (_, _, msg) = expect_err("1 3:1.0 2:2.0\n");
        assert!(msg.contains("strictly increasing"));
        let (_, _, msg) = expect_err("1 0:1.0\n");
        assert!(msg.contains("1-based"));
    }

    #[test]
    fn non_finite_values_are_rejected_at_parse_time() {
        let (_, _, msg) = expect_err("1 1:inf\n");
        assert!(msg.contains("finite"));
        let (_, _, msg) = expect_err("inf 1:1.0\n");
        assert!(msg.contains("finite"));
    }

    #[test]
    fn empty_file_yields_dataset_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.svm");
        std::fs::write(&path, "# nothing here\n\n").unwrap();
        assert!(matches!(
            parse_libsvm(&path),
            Err(Error::EmptyDataset(p)) if p == path
        ));
    }
}
