//! Repeatability report files. The CSV holds the per-feature rows; the JSON
//! holds the same rows plus thresholds and Bland-Altman scatter data.

use std::path::Path;

use radiomics::repeatability::{RepeatabilityReport, Reliability, ReportRow};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::table::{write_file, MANIFEST_PREFIX};

pub const ROW_COLUMNS: [&str; 15] = [
    "feature_id",
    "n",
    "mean_pct",
    "sd_pct",
    "lower_pct",
    "upper_pct",
    "normal",
    "log_transformed",
    "category",
    "icc",
    "spearman_vs_volume",
    "spearman_vs_max_intensity",
    "outliers",
    "excluded",
    "log_fallback",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub manifest_hash: String,
    pub lesion_ids: Vec<String>,
    #[serde(flatten)]
    pub report: RepeatabilityReport,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ReportFile {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(ROW_COLUMNS).expect("in-memory write");
        for r in &self.report.rows {
            w.write_record([
                r.feature_id.clone(),
                r.n.to_string(),
                r.mean_pct.to_string(),
                r.sd_pct.to_string(),
                r.lower_pct.to_string(),
                r.upper_pct.to_string(),
                r.normal.to_string(),
                r.log_transformed.to_string(),
                r.category.as_str().to_string(),
                r.icc.to_string(),
                opt(r.spearman_vs_volume),
                opt(r.spearman_vs_max_intensity),
                r.outliers.to_string(),
                r.excluded.to_string(),
                r.log_fallback.to_string(),
            ])
            .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        format!("{MANIFEST_PREFIX}{}\n{body}", self.manifest_hash)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    pub fn write(&self, stem: &Path) -> CliResult<()> {
        write_file(&stem.with_extension("csv"), &self.to_csv())?;
        write_file(&stem.with_extension("json"), &self.to_json())
    }

    pub fn read_json(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())).at(path))
    }
}

/// Parses the rows of a report CSV.
pub fn parse_rows_csv(text: &str) -> std::result::Result<Vec<ReportRow>, String> {
    let rest = text.split_once('\n').map(|(_, r)| r).ok_or("empty report")?;
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != ROW_COLUMNS {
        return Err(format!("unexpected header {header:?}"));
    }
    let f = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let o = |s: &str| if s.is_empty() { Ok(None) } else { f(s).map(Some) };
    let u = |s: &str| s.parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    let b = |s: &str| s.parse::<bool>().map_err(|e| format!("{s:?}: {e}"));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let c: Vec<&str> = rec.iter().collect();
        rows.push(ReportRow {
            feature_id: c[0].to_string(),
            n: u(c[1])?,
            mean_pct: f(c[2])?,
            sd_pct: f(c[3])?,
            lower_pct: f(c[4])?,
            upper_pct: f(c[5])?,
            normal: b(c[6])?,
            log_transformed: b(c[7])?,
            category: Reliability::parse(c[8]).ok_or_else(|| format!("bad category {:?}", c[8]))?,
            icc: f(c[9])?,
            spearman_vs_volume: o(c[10])?,
            spearman_vs_max_intensity: o(c[11])?,
            outliers: u(c[12])?,
            excluded: u(c[13])?,
            log_fallback: b(c[14])?,
        });
    }
    Ok(rows)
}
