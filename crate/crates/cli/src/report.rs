use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ldis_core::laplace_lab::{EventEstimate, LaplaceRunResult, PredictedRate, SlopeFit};
use ldis_core::quantile_analysis::QuantileRateResult;
use ldis_core::subset_analysis::{RandomWalkReport, SubsetPerfReport};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::AnalysisConfig;
use crate::error::CliError;

pub const TOOL: &str = "ldis";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: AnalysisConfig,
    pub results: Results,
    /// Seconds; the only field that differs between identical runs.
    pub wall_clock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Results {
    Subset { reports: Vec<SubsetPerfReport> },
    RandomWalk { reports: Vec<RandomWalkReport> },
    Quantile { results: Vec<QuantileRateResult> },
    Laplace(LaplaceRunResult),
    Simulate(SimulationSeries),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSeries {
    pub series: Vec<EventEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<PredictedRate>,
    pub diagnostics: Vec<String>,
}

/// Floats with 17 significant digits so that equal values print identically.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => write!(out, "{u}").unwrap(),
            (_, Some(i), _) if !n.is_f64() => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) => out.push_str(&number(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let value = serde_json::to_value(v).map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

/// Write through a sibling temp file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

/// Plot-ready CSV for the results, with a header row.
pub fn series_csv(results: &Results) -> String {
    let mut out = String::new();
    match results {
        Results::Simulate(s) => {
            out.push_str("n,p_hat,std_err,neg_log_rate\n");
            for e in &s.series {
                writeln!(out, "{},{},{},{}", e.n, number(e.p_hat), number(e.std_err), opt(e.neg_log_rate)).unwrap();
            }
        }
        Results::Laplace(r) => {
            out.push_str("n,w_n,variational_limit,gap\n");
            for ((n, w), g) in r.n_values.iter().zip(&r.w_n_values).zip(&r.gaps) {
                writeln!(out, "{n},{},{},{}", number(*w), number(r.variational_limit), number(*g)).unwrap();
            }
        }
        Results::Subset { reports } => {
            out.push_str("delta,side,rate,lower,upper,sample_size\n");
            for r in reports {
                for side in [Some(&r.plus), r.minus.as_ref()].into_iter().flatten() {
                    let side_name = serde_json::to_value(side.side).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                    writeln!(
                        out,
                        "{},{side_name},{},{},{},{}",
                        number(r.delta),
                        opt(side.rate.map(|v| v.value)),
                        opt(side.bounds.map(|b| b.0.value)),
                        opt(side.bounds.map(|b| b.1.value)),
                        side.sample_size.map(|n| n.to_string()).unwrap_or_default()
                    )
                    .unwrap();
                }
            }
        }
        Results::RandomWalk { reports } => {
            out.push_str("a,m,theta_a,mass_bound,realized_mass,cost_reduction_bound\n");
            for r in reports {
                let t = &r.tilt;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    number(t.a),
                    t.m,
                    number(t.theta_a),
                    number(t.mass_bound),
                    number(r.realized_mass),
                    opt(t.cost_reduction_bound)
                )
                .unwrap();
            }
        }
        Results::Quantile { results } => {
            out.push_str("alpha,eps,side,lambda_star,rate\n");
            for r in results {
                let side = if r.side == ldis_core::subset_analysis::Side::Plus { "plus" } else { "minus" };
                writeln!(out, "{},{},{side},{},{}", number(r.alpha), number(r.eps), number(r.lambda_star), number(r.rate.value)).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(f64::INFINITY), "inf");
        assert_eq!(number(-0.0), "-0.0000000000000000e0");
        for v in [1.0 / 3.0, 5.7488986305996165e-3, 1e-300, 123456.789] {
            assert_eq!(number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn report_round_trips() {
        let cfg = AnalysisConfig::from_json(
            r#"{"model": {"family": "gaussian-tilt", "mean": 0, "sd": 1, "theta": 2,
                          "importance": {"kind": "interval", "lo": 2, "hi": "inf"}},
                "analysis": {"kind": "subset", "eps": 0.1, "delta": [0.01, 0.02275], "cost_factor": 1.5}}"#,
        )
        .unwrap();
        let results = crate::commands::run(&cfg).unwrap();
        let report = Report { tool: TOOL.into(), version: "0".into(), command: "analyze subset".into(), config: cfg, results, wall_clock: 0.25 };
        let text = to_json(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("ldis-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(dir).unwrap();
    }
}
