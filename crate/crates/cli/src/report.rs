//! JSON/CSV/table shapes of every command. Field names are frozen; see
//! `docs/output-schema.md`.

use std::collections::BTreeMap;
use std::io::Write;

use pathpair::numfmt::{round_sig, sig};
use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Value as emitted in JSON/CSV: 12 significant digits, no negative zero.
pub fn num(x: f64) -> f64 {
    round_sig(x, 12) + 0.0
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Term {
    pub ket: String,
    pub re: f64,
    pub im: f64,
    pub text: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BellOverlaps {
    pub psi_plus_overlap: f64,
    pub psi_minus_overlap: f64,
    pub phi_plus_overlap: f64,
    pub phi_minus_overlap: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Distribution {
    #[serde(rename = "pEE")]
    pub p_ee: f64,
    #[serde(rename = "pEF")]
    pub p_ef: f64,
    #[serde(rename = "pFE")]
    pub p_fe: f64,
    #[serde(rename = "pFF")]
    pub p_ff: f64,
    pub p_gamma: BTreeMap<String, f64>,
    pub gamma_total: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scheme: String,
    pub tolerance: f64,
    pub state: Vec<Term>,
    #[serde(flatten)]
    pub distribution: Distribution,
    pub survivor_probability: f64,
    /// Absent when every run annihilates.
    pub bell_overlaps: Option<BellOverlaps>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleCell {
    pub count: u64,
    pub estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub probability: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scheme: String,
    pub n: u64,
    pub seed: u64,
    pub cells: BTreeMap<String, SampleCell>,
    /// Cell keys in sampling order.
    pub cell_order: Vec<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub context_a: BTreeMap<String, f64>,
    pub context_b: BTreeMap<String, f64>,
    pub normalization: f64,
    pub verified: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductForm {
    pub verdict: &'static str,
    pub minus_marginal: Option<[f64; 3]>,
    pub plus_marginal: Option<[f64; 3]>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LhvReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub behavior_a: BTreeMap<String, f64>,
    pub behavior_b: BTreeMap<String, f64>,
    pub verdict: &'static str,
    pub weights: Option<BTreeMap<String, f64>>,
    pub certificate: Option<Certificate>,
    pub contradiction_fraction: f64,
    pub contradiction_fraction_reverse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product_form: Option<ProductForm>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub value: f64,
    #[serde(rename = "pEE")]
    pub p_ee: f64,
    #[serde(rename = "pEF")]
    pub p_ef: f64,
    #[serde(rename = "pFE")]
    pub p_fe: f64,
    #[serde(rename = "pFF")]
    pub p_ff: f64,
    pub gamma_total: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scheme: String,
    pub param: String,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticOut {
    pub line: usize,
    pub column: usize,
    pub length: usize,
    pub severity: &'static str,
    pub message: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParseCheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub path: String,
    pub valid: bool,
    pub scheme: Option<String>,
    pub diagnostics: Vec<DiagnosticOut>,
}

pub fn write_json<W: Write, T: Serialize>(out: &mut W, report: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Left-aligned columns separated by two spaces.
pub fn write_table<W: Write>(
    out: &mut W,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                s.push_str(c);
            } else {
                s.push_str(&format!("{c:<w$}  "));
            }
        }
        s
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

pub fn fmt(x: f64) -> String {
    sig(x, 12)
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), fmt)
}
