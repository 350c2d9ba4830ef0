//! Regression datasets, CSV ingestion and the bundled stack-loss fixture.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Raw text of the stack-loss data (21 rows: three predictors then the response).
pub const STACKLOSS_CSV: &str = include_str!("../data/stackloss.csv");

/// A response vector with its design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    #[serde(default)]
    column_names: Vec<String>,
}

impl Dataset {
    /// Requires `n ≥ p + 1` and finite responses.
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension(format!(
                "design has {} rows but response has {} entries",
                x.rows(),
                y.len()
            )));
        }
        if x.rows() < x.cols() + 1 {
            return Err(Error::Dimension(format!(
                "need n >= p + 1 observations, got n = {} and p = {}",
                x.rows(),
                x.cols()
            )));
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow { index });
        }
        Ok(Self { x, y, column_names: Vec::new() })
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Self {
        self.column_names = names;
        self
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Same design with a different response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        let mut d = Dataset::new(self.x.clone(), y)?;
        d.column_names = self.column_names.clone();
        Ok(d)
    }

    /// `y′ = a·y + X·b`, the location-scale transformation under which
    /// the degrees-of-freedom estimators are invariant.
    pub fn transformed(&self, a: f64, b: &[f64]) -> Result<Self> {
        let shift = self.x.mul_vec(b);
        self.with_response(self.y.iter().zip(&shift).map(|(y, s)| a * y + s).collect())
    }

    /// The stack-loss data with a leading intercept column (21 × 4).
    pub fn stackloss() -> Self {
        read_csv(STACKLOSS_CSV.as_bytes(), "stack_loss", true).expect("bundled fixture parses")
    }
}

/// Reads a comma-separated file with a header row. Every column other than
/// `response` becomes a predictor, in file order; `add_intercept` prepends a
/// column of ones.
pub fn read_csv<R: Read>(reader: R, response: &str, add_intercept: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let response_idx = headers.iter().position(|h| h == response).ok_or_else(|| Error::InvalidSpec {
        field: "response".into(),
        reason: format!("column `{response}` not found (columns: {})", headers.iter().collect::<Vec<_>>().join(", ")),
    })?;
    let predictor_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != response_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut rows = Vec::new();
    let mut y = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(predictor_names.len() + 1);
        if add_intercept {
            row.push(1.0);
        }
        for (i, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column `{}`: cannot parse `{field}` as a number", &headers[i]),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse { line, message: format!("column `{}`: non-finite value", &headers[i]) });
            }
            if i == response_idx {
                y.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    let mut names = Vec::new();
    if add_intercept {
        names.push("(intercept)".to_string());
    }
    names.extend(predictor_names);
    if names.is_empty() {
        return Err(Error::InvalidSpec { field: "predictors".into(), reason: "no predictor columns".into() });
    }
    Ok(Dataset::new(Matrix::from_rows(&rows)?, y)?.with_column_names(names))
}
