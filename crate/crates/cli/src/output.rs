//! Table emission: CSV with `#` metadata lines or JSON, written atomically,
//! plus JSON manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use grushin::config::{OutputFormat, RunConfig};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

/// A named table of JSON scalars.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn cell(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Self::cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &[(String, String)]) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let meta: Map<String, Value> = meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({ "meta": meta, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Writes the table and its manifest into the configured output directory and
/// returns the table path.
pub fn emit(
    cfg: &RunConfig,
    stem: &str,
    table: &Table,
    mut manifest: Map<String, Value>,
) -> std::io::Result<PathBuf> {
    let hash = config_hash(cfg);
    let meta = vec![
        ("command".to_string(), stem.replace('_', " ")),
        ("config_sha256".to_string(), hash.clone()),
        ("d".to_string(), cfg.d.to_string()),
        ("k".to_string(), cfg.k.to_string()),
    ];
    let (ext, body) = match cfg.format {
        OutputFormat::Csv => ("csv", table.to_csv(&meta)),
        OutputFormat::Json => ("json", table.to_json(&meta)),
    };
    let path = cfg.output_dir.join(format!("{stem}.{ext}"));
    write_atomic(&path, &body)?;
    manifest.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    manifest.insert("config_sha256".into(), json!(hash));
    manifest.insert("seeds".into(), json!(cfg.seeds));
    manifest.insert("table".into(), json!(path.file_name().map(|f| f.to_string_lossy())));
    let text = serde_json::to_string_pretty(&Value::Object(manifest)).expect("manifest serializes") + "\n";
    write_atomic(&cfg.output_dir.join(format!("{stem}.manifest.json")), &text)?;
    Ok(path)
}
