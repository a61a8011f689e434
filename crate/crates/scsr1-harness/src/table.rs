//! Result rows and their pretty/CSV rendering.
//!
//! The nine value columns mirror the experiment tables: problem size, the
//! two optimality residuals, the shifted-curvature margins, the two
//! multipliers, Newton iterations, and wall time. A trailing `error`
//! column carries per-row failures instead of aborting a batch.

use thiserror::Error;

/// One result row.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub opt1: f64,
    pub opt2: f64,
    pub lam1_plus_sigpar: f64,
    pub gamma_plus_sigperp: f64,
    pub sigma_par: f64,
    pub sigma_perp: f64,
    pub itns: usize,
    pub time_seconds: f64,
    pub error: Option<String>,
    /// Whether the row clears the residual bounds; drives the exit code,
    /// not a column of its own.
    pub pass: bool,
}

impl TableRow {
    pub fn error_row(n: usize, message: String) -> Self {
        TableRow {
            n,
            opt1: f64::NAN,
            opt2: f64::NAN,
            lam1_plus_sigpar: f64::NAN,
            gamma_plus_sigperp: f64::NAN,
            sigma_par: f64::NAN,
            sigma_perp: f64::NAN,
            itns: 0,
            time_seconds: 0.0,
            error: Some(message),
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Pretty,
    Csv,
}

pub const CSV_HEADER: &str =
    "n,opt1,opt2,lam1_plus_sigpar,gamma_plus_sigperp,sigma_par,sigma_perp,itns,time_seconds,error";

fn fmt_full(x: f64) -> String {
    // 17 significant digits: parses back to the identical f64.
    format!("{x:.16e}")
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Render rows in the requested format. CSV is RFC-4180-style with a
/// header row; pretty mirrors the table column order with a status mark.
pub fn emit(rows: &[TableRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let fields = [
                    row.n.to_string(),
                    fmt_full(row.opt1),
                    fmt_full(row.opt2),
                    fmt_full(row.lam1_plus_sigpar),
                    fmt_full(row.gamma_plus_sigperp),
                    fmt_full(row.sigma_par),
                    fmt_full(row.sigma_perp),
                    row.itns.to_string(),
                    fmt_full(row.time_seconds),
                    csv_escape(row.error.as_deref().unwrap_or("")),
                ];
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Pretty => {
            let mut out = String::new();
            out.push_str(&format!(
                "{:>9}  {:>9}  {:>9}  {:>13}  {:>14}  {:>9}  {:>9}  {:>4}  {:>9}  {}\n",
                "n",
                "opt 1",
                "opt 2",
                "sigpar+lam1",
                "sigperp+gamma",
                "sigpar",
                "sigperp",
                "itns",
                "time",
                "status"
            ));
            for row in rows {
                if let Some(err) = &row.error {
                    out.push_str(&format!("{:>9.1e}  error: {err}\n", row.n as f64));
                    continue;
                }
                out.push_str(&format!(
                    "{:>9.1e}  {:>9.2e}  {:>9.2e}  {:>13.2e}  {:>14.2e}  {:>9.2e}  {:>9.2e}  {:>4}  {:>9.2e}  {}\n",
                    row.n as f64,
                    row.opt1,
                    row.opt2,
                    row.lam1_plus_sigpar,
                    row.gamma_plus_sigperp,
                    row.sigma_par,
                    row.sigma_perp,
                    row.itns,
                    row.time_seconds,
                    if row.pass { "ok" } else { "FAIL" }
                ));
            }
            out
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing or malformed header: {0}")]
    Header(String),
    #[error("line {line}: expected {expected} fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: bad number `{value}`")]
    Number { line: usize, value: String },
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut cur));
            }
            c => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

/// Parse CSV text produced by [`emit`]. Pass/fail is not serialized, so
/// parsed rows carry `pass = error.is_none()`.
pub fn parse_csv(text: &str) -> Result<Vec<TableRow>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => return Err(ParseError::Header(header.to_string())),
        None => return Err(ParseError::Header(String::new())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line);
        if fields.len() != 10 {
            return Err(ParseError::FieldCount {
                line: idx + 1,
                expected: 10,
                got: fields.len(),
            });
        }
        let num = |value: &str| -> Result<f64, ParseError> {
            value.parse().map_err(|_| ParseError::Number {
                line: idx + 1,
                value: value.to_string(),
            })
        };
        let int = |value: &str| -> Result<usize, ParseError> {
            value.parse().map_err(|_| ParseError::Number {
                line: idx + 1,
                value: value.to_string(),
            })
        };
        let error = if fields[9].is_empty() {
            None
        } else {
            Some(fields[9].clone())
        };
        rows.push(TableRow {
            n: int(&fields[0])?,
            opt1: num(&fields[1])?,
            opt2: num(&fields[2])?,
            lam1_plus_sigpar: num(&fields[3])?,
            gamma_plus_sigperp: num(&fields[4])?,
            sigma_par: num(&fields[5])?,
            sigma_perp: num(&fields[6])?,
            itns: int(&fields[7])?,
            time_seconds: num(&fields[8])?,
            pass: error.is_none(),
            error,
        });
    }
    Ok(rows)
}
