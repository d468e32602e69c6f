//! Report envelope, canonical ordering and text formats.

use std::cmp::Ordering;
use std::time::{SystemTime, UNIX_EPOCH};

use qentropy::{ResidualReport, SystemRecord, Thresholds, Verdict};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, no_timestamp: bool, result: T) -> Self {
        let timestamp = (!no_timestamp).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Envelope {
            config,
            timestamp,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// `%.15g`: 15 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |v| < 1e15`.
pub fn fmt_g(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn system_hash(system: &SystemRecord) -> String {
    sha256_hex(&serde_json::to_string(system).expect("systems serialize"))
}

/// A residual report with its verdict and input hash.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub verdict: Verdict,
    pub input_hash: String,
    #[serde(flatten)]
    pub report: ResidualReport,
}

impl Row {
    pub fn new(report: ResidualReport, thresholds: &Thresholds) -> Self {
        Row {
            verdict: report.verdict(thresholds),
            input_hash: system_hash(&report.system),
            report,
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.report, &other.report);
        a.identity
            .as_str()
            .cmp(b.identity.as_str())
            .then_with(|| a.functional.kind.as_str().cmp(b.functional.kind.as_str()))
            .then_with(|| a.q.total_cmp(&b.q))
            .then_with(|| self.input_hash.cmp(&other.input_hash))
    }
}

/// Sorts by (identity, kind, q, input hash); stable for equal keys.
pub fn canonical_sort(rows: &mut [Row]) {
    rows.sort_by(Row::key_cmp);
}

pub const RESIDUAL_CSV_HEADER: &str = "identity,kind,q,n,m,lhs,rhs,residual,rel_residual,verdict";

pub fn residual_csv(row: &Row) -> String {
    let r = &row.report;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.identity.as_str(),
        r.functional.kind.as_str(),
        fmt_g(r.q),
        r.system.n(),
        r.system.m(),
        fmt_g(r.lhs),
        fmt_g(r.rhs),
        fmt_g(r.residual),
        fmt_g(r.rel_residual),
        row.verdict
    )
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.extend(rows.iter().map(|r| line(r.iter().map(String::as_str).collect())));
    out.join("\n")
}

pub fn residual_table(rows: &[Row]) -> String {
    let header: Vec<&str> = RESIDUAL_CSV_HEADER.split(',').collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| residual_csv(r).split(',').map(String::from).collect())
        .collect();
    table(&header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        // reference strings from printf("%.15g")
        let cases = [
            (0.5, "0.5"),
            (0.0, "0"),
            (1.0 / 3.0, "0.333333333333333"),
            (std::f64::consts::LN_2, "0.693147180559945"),
            (-0.06, "-0.06"),
            (1e-5, "1e-05"),
            (1.234e-7, "1.234e-07"),
            (123456789012345.0, "123456789012345"),
            (1e15, "1e+15"),
            (2.5e300, "2.5e+300"),
            (100.0, "100"),
            (0.000123, "0.000123"),
        ];
        for (v, s) in cases {
            assert_eq!(fmt_g(v), s, "{v}");
        }
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn table_aligns() {
        let t = table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1");
    }
}
