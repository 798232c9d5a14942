//! Run traces and their CSV form.
//!
//! A trace is the complete record of one optimizer run: a header of
//! `# key=value` lines describing the configuration, then one row per
//! iteration. Floats are written in scientific notation with 17 significant
//! digits so that reading a trace back reproduces every `f64` bit-for-bit;
//! apart from the wall-clock column, a trace is a pure function of its
//! configuration.

use std::fmt::Write as _;
use std::path::Path;

use crate::directions::Method;
use crate::error::{Error, Result};

/// Shortest-guaranteed-round-trip float formatting: 17 significant digits,
/// scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRACE_MAGIC: &str = "# zograd trace v1";
pub const TRACE_COLUMNS: &str = "iter,cum_evals,F,gap,batch_size,grad_norm,wall_ms";

/// Configuration block of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub problem: String,
    pub method: Method,
    pub dim: usize,
    /// Directions per iteration actually used (`d` for cfd).
    pub num_dirs: usize,
    pub nu: f64,
    pub alpha: f64,
    pub theta: f64,
    pub s0: usize,
    pub budget: u64,
    pub sample_cap: usize,
    pub seed: u64,
    pub f_star: f64,
    /// Exact objective at the start point.
    pub f0: f64,
    pub gap0: f64,
    /// Problem-specific metadata (noise model, sigma, dataset, ...).
    pub extra: Vec<(String, String)>,
}

impl TraceHeader {
    /// Everything that identifies a run configuration except the seed.
    /// Traces aggregated together must agree on this.
    pub fn config_key(&self) -> String {
        let mut key = format!(
            "problem={};method={};d={};num_dirs={};nu={};alpha={};theta={};s0={};budget={};cap={}",
            self.problem,
            self.method,
            self.dim,
            self.num_dirs,
            fmt_float(self.nu),
            fmt_float(self.alpha),
            fmt_float(self.theta),
            self.s0,
            self.budget,
            self.sample_cap,
        );
        for (k, v) in &self.extra {
            let _ = write!(key, ";{k}={v}");
        }
        key
    }
}

/// One optimizer iteration, recorded before the step is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: u64,
    pub cum_evals: u64,
    /// Exact (noiseless) objective at the current iterate.
    pub f: f64,
    pub gap: f64,
    /// Realizations per oracle batch after any growth this iteration.
    pub batch_size: u64,
    /// Norm of the estimated gradient used for the step.
    pub grad_norm: f64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Complete,
    Aborted(String),
}

impl RunStatus {
    pub fn is_aborted(&self) -> bool {
        matches!(self, RunStatus::Aborted(_))
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub records: Vec<IterRecord>,
    pub status: RunStatus,
}

impl RunTrace {
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(self.header.gap0, |r| r.gap)
    }

    pub fn total_evals(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cum_evals)
    }

    pub fn to_csv(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(out, "{TRACE_MAGIC}");
        let _ = writeln!(out, "# problem={}", h.problem);
        let _ = writeln!(out, "# method={}", h.method);
        let _ = writeln!(out, "# d={}", h.dim);
        let _ = writeln!(out, "# num_dirs={}", h.num_dirs);
        let _ = writeln!(out, "# nu={}", fmt_float(h.nu));
        let _ = writeln!(out, "# alpha={}", fmt_float(h.alpha));
        let _ = writeln!(out, "# theta={}", fmt_float(h.theta));
        let _ = writeln!(out, "# s0={}", h.s0);
        let _ = writeln!(out, "# budget={}", h.budget);
        let _ = writeln!(out, "# sample_cap={}", h.sample_cap);
        let _ = writeln!(out, "# seed={}", h.seed);
        let _ = writeln!(out, "# fstar={}", fmt_float(h.f_star));
        let _ = writeln!(out, "# f0={}", fmt_float(h.f0));
        let _ = writeln!(out, "# gap0={}", fmt_float(h.gap0));
        for (k, v) in &h.extra {
            let _ = writeln!(out, "# {k}={v}");
        }
        match &self.status {
            RunStatus::Complete => {
                let _ = writeln!(out, "# status=complete");
            }
            RunStatus::Aborted(reason) => {
                let _ = writeln!(out, "# status=aborted: {reason}");
            }
        }
        let _ = writeln!(out, "{TRACE_COLUMNS}");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iter,
                r.cum_evals,
                fmt_float(r.f),
                fmt_float(r.gap),
                r.batch_size,
                fmt_float(r.grad_norm),
                r.wall_ms
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<RunTrace> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_trace(&text)
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse()
        .map_err(|_| parse_err(line, 1, format!("bad float `{s}`")))
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, 1, format!("bad integer `{s}`")))
}

pub fn parse_trace(text: &str) -> Result<RunTrace> {
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty trace"))?;
    if magic.trim_end() != TRACE_MAGIC {
        return Err(parse_err(1, 1, format!("expected `{TRACE_MAGIC}`")));
    }

    let mut kv: Vec<(String, String, usize)> = Vec::new();
    let mut columns_line = None;
    for (i, line) in &mut lines {
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(lineno, 1, "header line without `=`"))?;
            kv.push((k.to_string(), v.to_string(), lineno));
        } else {
            columns_line = Some((lineno, line));
            break;
        }
    }
    let (col_lineno, columns) =
        columns_line.ok_or_else(|| parse_err(1, 1, "trace has no column header"))?;
    if columns.trim_end() != TRACE_COLUMNS {
        return Err(parse_err(
            col_lineno,
            1,
            format!("expected columns `{TRACE_COLUMNS}`"),
        ));
    }

    let mut take = |key: &str| -> Result<(String, usize)> {
        let pos = kv
            .iter()
            .position(|(k, _, _)| k == key)
            .ok_or_else(|| parse_err(1, 1, format!("missing header key `{key}`")))?;
        let (_, v, line) = kv.remove(pos);
        Ok((v, line))
    };

    let (problem, _) = take("problem")?;
    let (method_s, method_line) = take("method")?;
    let method: Method = method_s
        .parse()
        .map_err(|_| parse_err(method_line, 1, format!("unknown method `{method_s}`")))?;
    let (v, l) = take("d")?;
    let dim = parse_int(&v, l)?;
    let (v, l) = take("num_dirs")?;
    let num_dirs = parse_int(&v, l)?;
    let (v, l) = take("nu")?;
    let nu = parse_f64(&v, l)?;
    let (v, l) = take("alpha")?;
    let alpha = parse_f64(&v, l)?;
    let (v, l) = take("theta")?;
    let theta = parse_f64(&v, l)?;
    let (v, l) = take("s0")?;
    let s0 = parse_int(&v, l)?;
    let (v, l) = take("budget")?;
    let budget = parse_int(&v, l)?;
    let (v, l) = take("sample_cap")?;
    let sample_cap = parse_int(&v, l)?;
    let (v, l) = take("seed")?;
    let seed = parse_int(&v, l)?;
    let (v, l) = take("fstar")?;
    let f_star = parse_f64(&v, l)?;
    let (v, l) = take("f0")?;
    let f0 = parse_f64(&v, l)?;
    let (v, l) = take("gap0")?;
    let gap0 = parse_f64(&v, l)?;
    let (status_s, status_line) = take("status")?;
    let status = if status_s == "complete" {
        RunStatus::Complete
    } else if let Some(reason) = status_s.strip_prefix("aborted: ") {
        RunStatus::Aborted(reason.to_string())
    } else {
        return Err(parse_err(
            status_line,
            1,
            format!("bad status `{status_s}`"),
        ));
    };
    let extra = kv.into_iter().map(|(k, v, _)| (k, v)).collect();

    let mut records = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(
                lineno,
                1,
                format!("expected 7 fields, got {}", fields.len()),
            ));
        }
        records.push(IterRecord {
            iter: parse_int(fields[0], lineno)?,
            cum_evals: parse_int(fields[1], lineno)?,
            f: parse_f64(fields[2], lineno)?,
            gap: parse_f64(fields[3], lineno)?,
            batch_size: parse_int(fields[4], lineno)?,
            grad_norm: parse_f64(fields[5], lineno)?,
            wall_ms: parse_int(fields[6], lineno)?,
        });
    }

    Ok(RunTrace {
        header: TraceHeader {
            problem,
            method,
            dim,
            num_dirs,
            nu,
            alpha,
            theta,
            s0,
            budget,
            sample_cap,
            seed,
            f_star,
            f0,
            gap0,
            extra,
        },
        records,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_trace() -> RunTrace {
        RunTrace {
            header: TraceHeader {
                problem: "bdqrtic".into(),
                method: Method::Cgs,
                dim: 50,
                num_dirs: 12,
                nu: 1e-2,
                alpha: 1e-3,
                theta: 0.9,
                s0: 2,
                budget: 100_000,
                sample_cap: 1_000_000,
                seed: 7,
                f_star: 178.4887052104703,
                f0: 10396.0,
                gap0: 10396.0 - 178.4887052104703,
                extra: vec![
                    ("noise".into(), "abs".into()),
                    ("sigma".into(), fmt_float(1e-3)),
                ],
            },
            records: vec![
                IterRecord {
                    iter: 0,
                    cum_evals: 48,
                    f: 10396.0,
                    gap: 10217.51129478953,
                    batch_size: 2,
                    grad_norm: 5.5e3,
                    wall_ms: 0,
                },
                IterRecord {
                    iter: 1,
                    cum_evals: 120,
                    f: 9000.125,
                    gap: 8821.63629478953,
                    batch_size: 3,
                    grad_norm: 4.25e3,
                    wall_ms: 1,
                },
            ],
            status: RunStatus::Complete,
        }
    }

    #[test]
    fn float_format_is_17_digit_scientific() {
        assert_eq!(fmt_float(10396.0), "1.0396000000000000e4");
        assert_eq!(fmt_float(-0.25), "-2.5000000000000000e-1");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn csv_round_trips_exactly() {
        let t = sample_trace();
        let text = t.to_csv();
        assert!(text.starts_with(TRACE_MAGIC));
        assert!(!text.contains('\r'));
        let back = parse_trace(&text).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.records, t.records);
        assert_eq!(back.status, t.status);
        // and serialization is a fixed point
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn aborted_status_round_trips() {
        let mut t = sample_trace();
        t.status = RunStatus::Aborted("non-finite oracle value inf at realization 3".into());
        let back = parse_trace(&t.to_csv()).unwrap();
        assert_eq!(back.status, t.status);
    }

    #[test]
    fn config_key_ignores_seed_but_not_parameters() {
        let a = sample_trace();
        let mut b = sample_trace();
        b.header.seed = 99;
        assert_eq!(a.header.config_key(), b.header.config_key());
        b.header.nu = 2e-2;
        assert_ne!(a.header.config_key(), b.header.config_key());
    }

    #[test]
    fn malformed_traces_are_rejected_with_positions() {
        let t = sample_trace().to_csv();
        let missing_magic = t.replacen(TRACE_MAGIC, "# not a trace", 1);
        assert!(parse_trace(&missing_magic).is_err());

        let bad_row = format!("{t}1,2,notafloat,0.0,1,0.0,3\n");
        match parse_trace(&bad_row) {
            Err(Error::Parse { line, .. }) => assert!(line > 10),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn fmt_float_round_trips(x in proptest::num::f64::ANY) {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }
    }
}
