//! Artifact emission. Every file is written to a temporary sibling and
//! renamed into place, so a failed run never leaves a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

/// Files produced by one command, written only after every computation has
/// succeeded.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn text(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<(), Failure> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
        body.push('\n');
        self.text(name, body);
        Ok(())
    }

    pub fn write(self, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Other(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, body) in self.files {
            let path = dir.join(&name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::Other(e.to_string()))?;
            tmp.write_all(body.as_bytes()).map_err(|e| Failure::Other(e.to_string()))?;
            tmp.persist(&path).map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}
