//! Feature tables: one row per lesion, one column per feature id.
//!
//! CSV layout:
//!
//! ```text
//! # manifest: <sha256>
//! lesion_id,<feature ids...>,degenerate
//! ```
//!
//! `degenerate` lists the ids whose value is a degenerate-input convention,
//! separated by `;`. The JSON form carries the same content. Floats are
//! written in their shortest round-trip form, so both files decode to
//! bit-identical tables.

use std::path::Path;

use radiomics::FeatureVector;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_PREFIX: &str = "# manifest: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionRow {
    pub lesion_id: String,
    pub values: Vec<f64>,
    pub degenerate: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub manifest_hash: String,
    pub feature_ids: Vec<String>,
    pub lesions: Vec<LesionRow>,
}

impl FeatureTable {
    pub fn from_vectors(manifest_hash: String, vectors: &[FeatureVector]) -> CliResult<Self> {
        let feature_ids: Vec<String> = match vectors.first() {
            Some(v) => v.ids().map(str::to_string).collect(),
            None => return Err(CliError::input("no lesions to tabulate")),
        };
        let mut lesions = Vec::with_capacity(vectors.len());
        for v in vectors {
            if !v.ids().eq(feature_ids.iter().map(String::as_str)) {
                return Err(CliError::compute(format!(
                    "lesion {} has a different feature set",
                    v.lesion_id
                )));
            }
            if let Some((id, x)) = v.values.iter().find(|(_, x)| !x.is_finite()) {
                return Err(CliError::compute(format!(
                    "lesion {}: feature {id} is {x}",
                    v.lesion_id
                )));
            }
            lesions.push(LesionRow {
                lesion_id: v.lesion_id.clone(),
                values: v.values.iter().map(|(_, x)| *x).collect(),
                degenerate: v.degenerate.clone(),
            });
        }
        Ok(FeatureTable {
            manifest_hash,
            feature_ids,
            lesions,
        })
    }

    pub fn lesion_ids(&self) -> impl Iterator<Item = &str> {
        self.lesions.iter().map(|l| l.lesion_id.as_str())
    }

    pub fn column_index(&self, feature_id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == feature_id)
    }

    pub fn lesion(&self, lesion_id: &str) -> Option<&LesionRow> {
        self.lesions.iter().find(|l| l.lesion_id == lesion_id)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["lesion_id".to_string()];
        header.extend(self.feature_ids.iter().cloned());
        header.push("degenerate".into());
        w.write_record(&header).expect("in-memory write");
        for l in &self.lesions {
            let mut rec = vec![l.lesion_id.clone()];
            rec.extend(l.values.iter().map(|v| v.to_string()));
            rec.push(l.degenerate.join(";"));
            w.write_record(&rec).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        format!("{MANIFEST_PREFIX}{}\n{body}", self.manifest_hash)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises") + "\n"
    }

    pub fn write(&self, stem: &Path) -> CliResult<()> {
        write_file(&stem.with_extension("csv"), &self.to_csv())?;
        write_file(&stem.with_extension("json"), &self.to_json())
    }

    pub fn parse_csv(text: &str) -> std::result::Result<Self, String> {
        let (first, rest) = text.split_once('\n').ok_or("empty table")?;
        let manifest_hash = first
            .strip_prefix(MANIFEST_PREFIX)
            .ok_or("missing manifest line")?
            .trim()
            .to_string();
        let mut r = csv::Reader::from_reader(rest.as_bytes());
        let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "lesion_id" || header[header.len() - 1] != "degenerate" {
            return Err("header must start with lesion_id and end with degenerate".into());
        }
        let feature_ids = header[1..header.len() - 1].to_vec();
        let mut lesions = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let values = rec
                .iter()
                .skip(1)
                .take(feature_ids.len())
                .map(|s| s.parse::<f64>().map_err(|_| format!("row {}: bad number {s:?}", line + 1)))
                .collect::<std::result::Result<Vec<f64>, String>>()?;
            let flags = rec.get(header.len() - 1).unwrap_or("");
            lesions.push(LesionRow {
                lesion_id: rec.get(0).unwrap_or("").to_string(),
                values,
                degenerate: flags.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            });
        }
        Ok(FeatureTable {
            manifest_hash,
            feature_ids,
            lesions,
        })
    }

    /// Reads a `.csv` or `.json` feature table.
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::parse_csv(&text),
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => Err("expected a .csv or .json feature table".to_string()),
        };
        let table = parsed.map_err(|m| CliError::input(format!("{}: {m}", path.display())).at(path))?;
        if let Some(l) = table.lesions.iter().find(|l| l.values.len() != table.feature_ids.len()) {
            return Err(CliError::input(format!("lesion {} has a short row", l.lesion_id)).at(path));
        }
        Ok(table)
    }
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
