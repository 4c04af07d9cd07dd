use std::fmt::Write as _;
use std::path::Path;

use newtonsum_core::BigRational;
use serde::Serialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug)]
pub struct Report {
    pub human: String,
    pub json: String,
    pub csv: Option<String>,
    pub exit: u8,
}

impl Report {
    pub fn new<T: Serialize>(value: &T, human: String) -> Result<Report, String> {
        let mut json = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        json.push('\n');
        Ok(Report {
            human,
            json,
            csv: None,
            exit: EXIT_OK,
        })
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn with_exit(mut self, exit: u8) -> Self {
        self.exit = exit;
        self
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), String> {
        let text = match format {
            Format::Human => &self.human,
            Format::Json => &self.json,
            Format::Csv => self.csv.as_ref().ok_or("--csv is not available for this command")?,
        };
        match out {
            Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Rationals for people: integers without a denominator.
pub fn q(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn tuple<T: ToString>(v: &[T]) -> String {
    format!("({})", v.iter().map(T::to_string).collect::<Vec<_>>().join(","))
}

pub fn linear_form(normal: &[i64]) -> String {
    let mut out = String::new();
    for (i, &a) in normal.iter().enumerate().filter(|(_, &a)| a != 0) {
        let sep = if out.is_empty() { "" } else { " + " };
        if a == 1 {
            let _ = write!(out, "{sep}x{}", i + 1);
        } else {
            let _ = write!(out, "{sep}{a}*x{}", i + 1);
        }
    }
    out
}

pub fn float(v: f64) -> String {
    format!("{v:.6e}")
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_else(|| "-".into())
}

pub fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}
