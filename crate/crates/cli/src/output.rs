//! Trajectory and report serialization.
//!
//! CSV uses a fixed header `t,rx,ry,rz,px,py,pz,Sx,Sy,Sz,energy` and
//! 17-significant-digit scientific floats, which round-trip f64 exactly;
//! the energy column is left empty when no scalar potential was supplied.
//! Reports are emitted as human-readable text, as `key=value` records, or
//! as JSON.

use serde::Serialize;
use spindrift_core::analysis::AnalysisReport;
use spindrift_core::dynamics::{Sample, Trajectory};
use spindrift_core::verify::Check;

use crate::CliError;

pub const CSV_HEADER: &str = "t,rx,ry,rz,px,py,pz,Sx,Sy,Sz,energy";

/// 17 significant digits: lossless round-trip of f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 220 + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let cols = [
            s.t, s.r.x, s.r.y, s.r.z, s.p.x, s.p.y, s.p.z, s.s.x, s.s.y, s.s.z,
        ];
        for (i, c) in cols.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*c));
        }
        out.push(',');
        if let Some(e) = s.energy {
            out.push_str(&fmt_f64(e));
        }
        out.push('\n');
    }
    out
}

/// One reparsed CSV row, in file order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub values: [f64; 10],
    pub energy: Option<f64>,
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<CsvRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(CliError::Parse(format!(
                "trajectory csv: bad header {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(CliError::Parse(format!(
                "trajectory csv line {}: expected 11 columns, got {}",
                ln + 2,
                fields.len()
            )));
        }
        let mut values = [0.0; 10];
        for (i, f) in fields[..10].iter().enumerate() {
            values[i] = f.parse::<f64>().map_err(|e| {
                CliError::Parse(format!("trajectory csv line {}: column {}: {e}", ln + 2, i))
            })?;
        }
        let energy = if fields[10].is_empty() {
            None
        } else {
            Some(fields[10].parse::<f64>().map_err(|e| {
                CliError::Parse(format!("trajectory csv line {}: energy: {e}", ln + 2))
            })?)
        };
        rows.push(CsvRow { values, energy });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct JsonRow {
    t: f64,
    rx: f64,
    ry: f64,
    rz: f64,
    px: f64,
    py: f64,
    pz: f64,
    #[serde(rename = "Sx")]
    sx: f64,
    #[serde(rename = "Sy")]
    sy: f64,
    #[serde(rename = "Sz")]
    sz: f64,
    energy: Option<f64>,
}

fn json_row(s: &Sample) -> JsonRow {
    JsonRow {
        t: s.t,
        rx: s.r.x,
        ry: s.r.y,
        rz: s.r.z,
        px: s.p.x,
        py: s.p.y,
        pz: s.p.z,
        sx: s.s.x,
        sy: s.s.y,
        sz: s.s.z,
        energy: s.energy,
    }
}

pub fn trajectory_json(traj: &Trajectory) -> String {
    let rows: Vec<JsonRow> = traj.samples.iter().map(json_row).collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("serializable rows");
    s.push('\n');
    s
}

pub fn reports_text(reports: &[AnalysisReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{}: {}\n  measured  = {}\n  predicted = {}\n  relative error {:.3e} (tolerance {:.1e})\n",
            r.observable,
            if r.pass { "PASS" } else { "FAIL" },
            fmt_f64(r.measured),
            fmt_f64(r.predicted),
            r.relative_error,
            r.tolerance,
        ));
        for (key, value) in &r.notes {
            out.push_str(&format!("  {key} = {}\n", fmt_f64(*value)));
        }
    }
    out
}

pub fn reports_kv(reports: &[AnalysisReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let base = &r.observable;
        out.push_str(&format!("{base}.measured={}\n", fmt_f64(r.measured)));
        out.push_str(&format!("{base}.predicted={}\n", fmt_f64(r.predicted)));
        out.push_str(&format!(
            "{base}.relative_error={}\n",
            fmt_f64(r.relative_error)
        ));
        out.push_str(&format!("{base}.tolerance={}\n", fmt_f64(r.tolerance)));
        out.push_str(&format!("{base}.pass={}\n", r.pass));
        for (key, value) in &r.notes {
            out.push_str(&format!("{base}.{key}={}\n", fmt_f64(*value)));
        }
    }
    out
}

pub fn reports_json(reports: &[AnalysisReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("serializable reports");
    s.push('\n');
    s
}

pub fn checks_text(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{}: {} — value {:.6e} {} {:.1e}\n",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.cmp,
            c.limit,
        ));
    }
    out
}

pub fn checks_kv(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!("{}.value={}\n", c.name, fmt_f64(c.value)));
        out.push_str(&format!("{}.limit={}\n", c.name, fmt_f64(c.limit)));
        out.push_str(&format!("{}.cmp={}\n", c.name, c.cmp));
        out.push_str(&format!("{}.pass={}\n", c.name, c.pass));
    }
    out
}

pub fn checks_json(checks: &[Check]) -> String {
    let mut s = serde_json::to_string_pretty(checks).expect("serializable checks");
    s.push('\n');
    s
}
