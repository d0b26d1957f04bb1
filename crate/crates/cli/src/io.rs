//! Matrix files: comma-separated rows, or MatrixMarket dense arrays.

use std::fs;
use std::path::Path;

use condlab::Matrix;

use crate::error::CliError;

const MM_HEADER: &str = "%%MatrixMarket";

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads a vector stored as a single row or a single column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let m = read_matrix(path)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected a single row or column, got {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.into_vec())
}

pub fn parse_matrix(text: &str) -> Result<Matrix, String> {
    if text.trim_start().starts_with(MM_HEADER) {
        parse_matrix_market(text)
    } else {
        parse_csv(text)
    }
}

fn parse_number(field: &str) -> Result<f64, String> {
    let t = field.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("not a finite number: `{t}`")),
    }
}

fn parse_csv(text: &str) -> Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(parse_number)
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "row {} has {} entries, expected {}",
                    rows.len() + 1,
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("empty matrix".into());
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

fn parse_matrix_market(text: &str) -> Result<Matrix, String> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_ascii_lowercase();
    let words: Vec<&str> = header.split_whitespace().collect();
    if words.len() < 5 || words[1] != "matrix" || words[2] != "array" || words[3] != "real" {
        return Err(format!(
            "unsupported MatrixMarket header `{header}` (need `matrix array real general`)"
        ));
    }
    if words[4] != "general" {
        return Err(format!("unsupported MatrixMarket symmetry `{}`", words[4]));
    }
    let mut tokens = lines
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace);
    let mut dim = || -> Result<usize, String> {
        tokens
            .next()
            .ok_or("missing dimensions")?
            .parse::<usize>()
            .map_err(|e| format!("bad dimension: {e}"))
    };
    let (m, n) = (dim()?, dim()?);
    let values = tokens.map(parse_number).collect::<Result<Vec<_>, _>>()?;
    if values.len() != m * n {
        return Err(format!(
            "expected {} values for {m}x{n}, got {}",
            m * n,
            values.len()
        ));
    }
    // Column-major on disk.
    let mut data = vec![0.0; m * n];
    for (k, v) in values.into_iter().enumerate() {
        data[(k % m) * n + k / m] = v;
    }
    Matrix::new(m, n, data).map_err(|e| e.to_string())
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn matrix_to_csv(a: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|&v| format_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
