use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Tolerances};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Output directory; every file written here carries `schema_version`.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes `{schema_version, kind, config, tolerances, ...body}` as pretty JSON.
    pub fn json<T: Serialize>(
        &mut self,
        name: &str,
        kind: &str,
        config: &RunConfig,
        tol: &Tolerances,
        body: &T,
    ) -> Result<(), CliError> {
        let mut doc = json!({
            "schema_version": SCHEMA_VERSION,
            "kind": kind,
            "config": config,
            "tolerances": tol,
        });
        let Value::Object(extra) = serde_json::to_value(body)? else {
            return Err(CliError::Io(format!("{kind} report is not a JSON object")));
        };
        doc.as_object_mut().expect("object literal").extend(extra);
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        self.written.push(path);
        Ok(())
    }

    /// Writes a CSV table with a leading `schema_version` column.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        let mut head = vec!["schema_version"];
        head.extend_from_slice(header);
        w.write_record(&head)?;
        let version = SCHEMA_VERSION.to_string();
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            w.write_record(std::iter::once(&version).chain(r))?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }
}

/// Shortest round-trip formatting, so CSV and JSON agree digit for digit.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
