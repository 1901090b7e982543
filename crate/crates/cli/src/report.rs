use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::sweep::{SweepReport, SweepRow};
use crate::CliError;

/// CSV header, in output order.
pub const COLUMNS: [&str; 22] = [
    "source",
    "N",
    "precon",
    "infill",
    "method",
    "s",
    "r_p",
    "sigma_min",
    "kappa",
    "kappa_s",
    "diag_P",
    "diag_PA",
    "diag_PA_nonzero",
    "rotations",
    "unique_angles",
    "f",
    "l2_err",
    "fom_plain",
    "fom_preamp",
    "multiplication",
    "kappa_s_emulated",
    "error",
];

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn int(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn record(r: &SweepRow) -> [String; 22] {
    [
        r.source.clone(),
        int(r.n),
        r.precon.clone(),
        int(r.infill),
        r.method.clone(),
        float(r.s),
        float(r.r_p),
        float(r.sigma_min),
        float(r.kappa),
        float(r.kappa_s),
        int(r.diag_p),
        int(r.diag_pa),
        int(r.diag_pa_nonzero),
        int(r.rotations),
        int(r.unique_angles),
        format_float(r.f),
        float(r.l2_err),
        float(r.fom_plain),
        float(r.fom_preamp),
        r.multiplication.clone(),
        float(r.kappa_s_emulated),
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn write_csv<W: Write>(report: &SweepReport, w: W) -> Result<(), CliError> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(COLUMNS)?;
    for r in &report.rows {
        out.write_record(record(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &SweepReport, mut w: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Writes the CSV and, if requested, its JSON mirror.
pub fn emit_report(report: &SweepReport, csv_path: &Path, json_path: Option<&Path>) -> Result<(), CliError> {
    write_csv(report, BufWriter::new(File::create(csv_path)?))?;
    if let Some(p) = json_path {
        write_json(report, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

pub fn read_json_report(path: &Path) -> Result<SweepReport, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(3.0), "3.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn error_text_is_quoted() {
        let report = SweepReport {
            rows: vec![SweepRow {
                source: "2d-4x4".into(),
                error: Some("bad, \"quoted\"".into()),
                ..Default::default()
            }],
        };
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with("\"bad, \"\"quoted\"\"\"\n"));
    }
}
