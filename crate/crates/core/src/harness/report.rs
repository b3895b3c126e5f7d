use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::spec::ExperimentSpec;
use crate::qmatrix::DensityMatrix;

pub const REPORT_FILE: &str = "report.json";
pub const ROWS_FILE: &str = "rows.csv";

/// One `(seed, m)` cell of an experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub row: usize,
    pub seed: u64,
    pub m: usize,
    /// Fraction of test effects whose prediction misses by more than `γ`;
    /// for lower-bound rows, the exact mass of effects missed by at least `γ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_valid: Option<bool>,
    /// Adaptive rows: mean predicted and exact `Pr[f = 1]` over test draws.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_abs_error: Option<f64>,
    /// Lower-bound rows: the deviation mass exceeded `ε`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<DensityMatrix>,
    /// Seconds; excluded from the canonical body.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub m: usize,
    pub rows: usize,
    pub failed_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_test_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_final_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_mean_abs_error: Option<f64>,
    pub converged_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub generator: String,
    pub keying: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact_version: String,
    pub spec: ExperimentSpec,
    pub rng: RngProvenance,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
}

/// Median of the finite values; `None` when there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub(crate) fn aggregate(m_values: &[usize], rows: &[Row]) -> Vec<Aggregate> {
    m_values
        .iter()
        .map(|&m| {
            let cell: Vec<&Row> = rows.iter().filter(|r| r.m == m).collect();
            let ok: Vec<&&Row> = cell.iter().filter(|r| r.error.is_none()).collect();
            let converged = ok.iter().filter(|r| r.converged == Some(true)).count();
            let lower: Vec<bool> = ok.iter().filter_map(|r| r.failed).collect();
            Aggregate {
                m,
                rows: cell.len(),
                failed_rows: cell.len() - ok.len(),
                median_test_error: median(ok.iter().filter_map(|r| r.test_error)),
                median_final_loss: median(ok.iter().filter_map(|r| r.final_loss)),
                median_mean_abs_error: median(ok.iter().filter_map(|r| r.mean_abs_error)),
                converged_fraction: if ok.is_empty() {
                    0.0
                } else {
                    converged as f64 / ok.len() as f64
                },
                failure_rate: (!lower.is_empty())
                    .then(|| lower.iter().filter(|&&f| f).count() as f64 / lower.len() as f64),
            }
        })
        .collect()
}

impl Report {
    pub fn aggregate_for(&self, m: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.m == m)
    }

    /// Pretty JSON of the report with every `wall_time` removed; identical
    /// specs give identical bodies.
    pub fn canonical_body(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(rows) = value.get_mut("rows").and_then(|r| r.as_array_mut()) {
            for row in rows {
                if let Some(obj) = row.as_object_mut() {
                    obj.remove("wall_time");
                }
            }
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub const CSV_HEADER: &'static str =
        "row,seed,m,test_error,final_loss,converged,max_residual,iterations,estimate,exact,mean_abs_error,failed,error";

    pub fn rows_csv(&self) -> String {
        fn cell<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map(T::to_string).unwrap_or_default()
        }
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let error = r
                .error
                .as_deref()
                .map(|e| format!("\"{}\"", e.replace('"', "\"\"")))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.row,
                r.seed,
                r.m,
                cell(&r.test_error),
                cell(&r.final_loss),
                cell(&r.converged),
                cell(&r.max_residual),
                cell(&r.iterations),
                cell(&r.estimate),
                cell(&r.exact),
                cell(&r.mean_abs_error),
                cell(&r.failed),
                error
            ));
        }
        out
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes `report.json` and `rows.csv` into `dir`, creating it if needed.
pub fn emit_report(report: &Report, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join(REPORT_FILE);
    let csv = dir.join(ROWS_FILE);
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_atomic(&json, text.as_bytes())?;
    write_atomic(&csv, report.rows_csv().as_bytes())?;
    Ok((json, csv))
}
