//! Long-format result tables shared by every subcommand.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::io::Write;
use std::path::Path;

/// A numeric cell; non-finite and missing values are written as `NA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell(pub Option<f64>);

impl Cell {
    pub fn of(v: f64) -> Self {
        Cell(v.is_finite().then_some(v))
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) if v.is_finite() => s.serialize_f64(v),
            _ => s.serialize_str("NA"),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Cell::of(v)),
            Raw::Text(t) if t == "NA" => Ok(Cell(None)),
            Raw::Text(t) => t.parse::<f64>().map(Cell::of).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: String,
    pub metric: String,
    pub value: Cell,
    pub n: usize,
    pub p: usize,
    /// The generating `ν`, `gaussian`, or `real-data` for fitted files.
    pub nu_true: String,
    pub diagnostics: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableArtifact {
    pub rows: Vec<Row>,
}

impl TableArtifact {
    pub fn push(&mut self, method: &str, metric: &str, value: Cell, ctx: &RowContext, diagnostics: &str) {
        self.rows.push(Row {
            method: method.into(),
            metric: metric.into(),
            value,
            n: ctx.n,
            p: ctx.p,
            nu_true: ctx.nu_true.clone(),
            diagnostics: diagnostics.into(),
        });
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => {
                let mut w = w;
                serde_json::to_writer_pretty(&mut w, &self.rows)?;
                writeln!(w)
            }
            Format::Csv => {
                let mut wtr = csv::Writer::from_writer(w);
                for row in &self.rows {
                    wtr.serialize(row)?;
                }
                wtr.flush()
            }
        }
    }

    pub fn write_file(&self, path: &Path) -> std::io::Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(file, Format::from_path(path))
    }
}

/// Columns shared by every row of one table.
pub struct RowContext {
    pub n: usize,
    pub p: usize,
    pub nu_true: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TableArtifact {
        let ctx = RowContext { n: 21, p: 4, nu_true: "real-data".into() };
        let mut t = TableArtifact::default();
        t.push("ols", "sigma", Cell::of(3.24), &ctx, "");
        t.push("adjusted", "nu_wald_se", Cell::of(f64::NAN), &ctx, "flat, \"capped\"");
        t
    }

    #[test]
    fn non_finite_cells_are_na() {
        let mut out = Vec::new();
        sample().write(&mut out, Format::Csv).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "method,metric,value,n,p,nu_true,diagnostics");
        assert!(text.contains("adjusted,nu_wald_se,NA,21,4,real-data"));
        let mut json = Vec::new();
        sample().write(&mut json, Format::Json).unwrap();
        assert!(String::from_utf8(json).unwrap().contains("\"value\": \"NA\""));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let t = sample();
        let mut out = Vec::new();
        t.write(&mut out, Format::Csv).unwrap();
        let back: Vec<Row> = csv::Reader::from_reader(out.as_slice()).deserialize().collect::<Result<_, _>>().unwrap();
        assert_eq!(back, t.rows);
        let mut json = Vec::new();
        t.write(&mut json, Format::Json).unwrap();
        let back: Vec<Row> = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, t.rows);
    }
}
