//! Output formatting: CSV sweep tables, JSON artifacts and plain-text tables.

use std::io::{self, Write};

use serde::Serialize;

use crate::families::FamilyInfo;
use crate::optimizer::SweepRecord;
use crate::scalar::Scalar;
use crate::verifier::AppendixReport;

pub const SIG_DIGITS: usize = 9;

pub const SWEEP_HEADER: &str =
    "param,x_star,k_star,k_star_rounded,p_no_default,certified,a,b,method_agreement";

/// `printf("%.9g")`: 9 significant digits, trailing zeros dropped,
/// scientific notation when the decimal exponent is below -4 or at least 9.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_real<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format_sig(x.as_f64())).unwrap_or_default()
}

fn opt_int(v: Option<u64>) -> String {
    v.map(|k| k.to_string()).unwrap_or_default()
}

/// One row per sweep record; uncertified rows leave numeric cells empty.
pub fn write_sweep_csv<T: Scalar, W: Write>(
    records: &[SweepRecord<T>],
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            format_sig(r.param_value.as_f64()),
            opt_real(r.x_star),
            opt_int(r.k_star),
            opt_int(r.k_star_rounded),
            opt_real(r.p_no_default),
            r.certified,
            opt_real(r.a),
            opt_real(r.b),
            opt_real(r.method_agreement),
        )?;
    }
    Ok(())
}

pub fn sweep_csv_string<T: Scalar>(records: &[SweepRecord<T>]) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Pretty JSON followed by a single newline.
pub fn write_json<V: Serialize + ?Sized, W: Write>(value: &V, mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FamilyRow {
    pub name: String,
    pub formula: String,
    pub param: String,
    pub range: String,
    pub x_min: f64,
    pub counterexample: bool,
}

impl From<&FamilyInfo> for FamilyRow {
    fn from(info: &FamilyInfo) -> Self {
        Self {
            name: info.name.to_string(),
            formula: info.formula.to_string(),
            param: info.param.to_string(),
            range: info.range.to_string(),
            x_min: info.x_min,
            counterexample: info.counterexample,
        }
    }
}

pub fn families_csv(rows: &[FamilyRow]) -> String {
    let mut out = String::from("name,formula,param,range,x_min,counterexample\n");
    for r in rows {
        // formulas and ranges contain commas
        out.push_str(&format!(
            "{},\"{}\",{},\"{}\",{},{}\n",
            r.name,
            r.formula,
            r.param,
            r.range,
            format_sig(r.x_min),
            r.counterexample
        ));
    }
    out
}

pub fn families_table(rows: &[FamilyRow]) -> String {
    let w_name = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(6);
    let w_formula = rows
        .iter()
        .map(|r| r.formula.len())
        .max()
        .unwrap_or(7)
        .max(7);
    let w_range = rows.iter().map(|r| r.range.len()).max().unwrap_or(5).max(5);
    let mut out = format!(
        "{:<w_name$}  {:<w_formula$}  param  {:<w_range$}  {:<12}  note\n",
        "family", "formula", "range", "x_min"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<w_name$}  {:<w_formula$}  {:<5}  {:<w_range$}  {:<12}  {}\n",
            r.name,
            r.formula,
            r.param,
            r.range,
            format_sig(r.x_min),
            if r.counterexample {
                "counterexample"
            } else {
                ""
            }
        ));
    }
    out
}

pub fn appendix_table(report: &AppendixReport) -> String {
    let w = report
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!("p-grid points: {}\n", report.grid_points);
    for c in &report.checks {
        out.push_str(&format!(
            "{}  {:<w$}  {:>14}  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            format_sig(c.value),
            c.detail
        ));
    }
    out.push_str(if report.all_passed {
        "all checks passed\n"
    } else {
        "some checks FAILED\n"
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g9() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (5.1312345678, "5.13123457"),
            (503.454545454, "503.454545"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (1e-300, "1e-300"),
            (9.9999999999, "10"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig(x), want, "{x}");
        }
        assert_eq!(format_sig(f64::NAN), "nan");
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![
            SweepRecord {
                param_value: 0.5_f64,
                x_star: Some(5.131_234_567_8),
                k_star: Some(5),
                k_star_rounded: Some(5),
                p_no_default: Some(0.313_206_2),
                certified: true,
                a: Some(2.0),
                b: Some(7.389_056_1),
                method_agreement: Some(3e-11),
            },
            SweepRecord {
                param_value: 1.0,
                x_star: None,
                k_star: None,
                k_star_rounded: None,
                p_no_default: None,
                certified: false,
                a: None,
                b: None,
                method_agreement: None,
            },
        ];
        let s = sweep_csv_string(&rows);
        let lines: Vec<_> = s.split('\n').collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(
            lines[1],
            "0.5,5.13123457,5,5,0.3132062,true,2,7.3890561,3e-11"
        );
        assert_eq!(lines[2], "1,,,,,false,,,");
        assert_eq!(lines[3], "");
        assert!(!s.contains('\r'));
    }
}
