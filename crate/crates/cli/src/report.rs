//! CSV and JSON files of a finished run.

use std::fmt::Write as _;
use std::path::Path;
use std::time::SystemTime;

use nikishin_hp::analysis::estimate_rate;
use nikishin_hp::Scalar;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::run::{Gate, Outcome, RowReport, ZeroReport};

fn index_cells(r: &RowReport) -> String {
    let n = r.n();
    let mut out = n.total().to_string();
    for c in n.components() {
        let _ = write!(out, ",{c}");
    }
    out
}

/// Sweep table. The first line is a comment carrying the timestamp; every
/// other byte depends only on the config and precision.
pub fn convergence_csv(outcome: &Outcome, digits: usize, stamp: SystemTime) -> String {
    let m = outcome.base.sys.m();
    let mut out = format!(
        "# nikishin-hp {} generated {}\n",
        env!("CARGO_PKG_VERSION"),
        humantime::format_rfc3339_seconds(stamp)
    );
    out.push_str("total");
    for j in 1..=m {
        let _ = write!(out, ",n_{j}");
    }
    for j in 1..m {
        let _ = write!(out, ",err_{j}");
    }
    out.push_str(",err_0,skipped,nullity_flag,precision_used\n");
    for r in &outcome.rows {
        let row = &r.outcome.row;
        out.push_str(&index_cells(r));
        for e in row.errors.iter().chain([&row.err_0]) {
            let _ = write!(out, ",{}", e.to_sci_string(digits));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            row.skipped,
            row.nullity_flag,
            row.precision_used.bits()
        );
    }
    // footer: fitted rate per error column
    out.push_str("delta_hat");
    out.push_str(&",".repeat(m));
    let columns = (0..m).map(|c| {
        let samples: Vec<(usize, Scalar)> = outcome
            .rows
            .iter()
            .map(|r| {
                let row = &r.outcome.row;
                let e = if c + 1 < m {
                    &row.errors[c]
                } else {
                    &row.err_0
                };
                (row.n.total(), e.clone())
            })
            .collect();
        estimate_rate(&samples).map_or_else(|_| "NA".to_string(), |r| format!("{:.6}", r.delta))
    });
    for col in columns {
        let _ = write!(out, ",{col}");
    }
    out.push_str(",,,\n");
    out
}

/// Per-index, per-component zero counts near each pole, plus the count of
/// zeros away from every pole and the last support (`census`) and of zeros
/// heading to infinity (`escaping`).
pub fn zeros_csv(outcome: &Outcome, digits: usize) -> String {
    let m = outcome.base.sys.m();
    let mut out = String::from("total");
    for j in 1..=m {
        let _ = write!(out, ",n_{j}");
    }
    out.push_str(",component,kind,re,im,multiplicity,count\n");
    for r in &outcome.rows {
        let prefix = index_cells(r);
        for (j, z) in r.zeros.iter().enumerate() {
            let j = j + 1;
            match z {
                ZeroReport::Degenerate => {
                    let _ = writeln!(out, "{prefix},{j},degenerate,,,,");
                }
                ZeroReport::Found(pa) => {
                    for (pole, count) in &pa.counts {
                        let _ = writeln!(
                            out,
                            "{prefix},{j},pole,{},{},{},{count}",
                            pole.location.re.to_sci_string(digits),
                            pole.location.im.to_sci_string(digits),
                            pole.multiplicity
                        );
                    }
                    let _ = writeln!(out, "{prefix},{j},census,,,,{}", pa.stray.len());
                    let _ = writeln!(out, "{prefix},{j},escaping,,,,{}", pa.escaping.len());
                }
            }
        }
    }
    out
}

fn gate_json(outcome: &Outcome, gate: &Gate, ok: bool, digits: usize) -> Value {
    let status = match (gate, ok) {
        (Gate::NotApplicable(_), _) => "not_applicable",
        (_, true) => "pass",
        (_, false) => "fail",
    };
    let mut obj = Map::new();
    obj.insert("status".into(), json!(status));
    match gate {
        Gate::NotApplicable(why) => {
            obj.insert("reason".into(), json!(why));
        }
        Gate::Residual {
            max,
            tolerance,
            samples,
        } => {
            obj.insert("max_residual".into(), json!(max.to_sci_string(digits)));
            obj.insert("tolerance".into(), json!(tolerance.to_sci_string(digits)));
            obj.insert("samples".into(), json!(samples));
        }
        Gate::SignChanges { min_margin, rows } => {
            obj.insert("min_margin".into(), json!(min_margin));
            obj.insert("rows".into(), json!(rows));
        }
        Gate::Attraction { row } => {
            let r = &outcome.rows[*row];
            obj.insert("index".into(), json!(r.n().to_string()));
            let comps: Vec<Value> = r
                .zeros
                .iter()
                .enumerate()
                .map(|(j, z)| match z {
                    ZeroReport::Degenerate => json!({"component": j + 1, "degenerate": true}),
                    ZeroReport::Found(pa) => json!({
                        "component": j + 1,
                        "counts": pa.counts.iter().map(|(p, c)| json!({
                            "pole": [p.location.re.to_sci_string(digits), p.location.im.to_sci_string(digits)],
                            "multiplicity": p.multiplicity,
                            "count": c,
                        })).collect::<Vec<_>>(),
                        "census": pa.stray.len(),
                        "escaping": pa.escaping.len(),
                    }),
                })
                .collect();
            obj.insert("components".into(), Value::Array(comps));
        }
    }
    Value::Object(obj)
}

pub fn identities_json(outcome: &Outcome, digits: usize) -> String {
    let mut checks = Map::new();
    for (check, gate, ok) in &outcome.gates {
        checks.insert(check.name().into(), gate_json(outcome, gate, *ok, digits));
    }
    let doc = json!({
        "precision_bits": outcome.base.precision().bits(),
        "checks": checks,
        "passed": outcome.passed(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    text.push('\n');
    text
}

pub fn write_all(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    let digits = outcome.base.precision().decimal_digits();
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    write(
        "convergence.csv",
        convergence_csv(outcome, digits, SystemTime::now()),
    )?;
    write("zeros.csv", zeros_csv(outcome, digits))?;
    write("identities.json", identities_json(outcome, digits))
}
