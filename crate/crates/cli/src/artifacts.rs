//! The run directory: every file a run writes, and the MANIFEST that lists
//! them.

use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use solitonscope_core::io;

use crate::config::Stage;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "MANIFEST";
pub const CONFIG: &str = "config.toml";
pub const METRICS: &str = "metrics.json";
pub const REPORT: &str = "report.json";

pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        crate::config::check_writable(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn text(&mut self, name: &str, text: &str) -> CliResult<()> {
        io::write_text(&self.root.join(name), text)?;
        self.record(name);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        io::write_json(&self.root.join(name), value)?;
        self.record(name);
        Ok(())
    }

    /// Write the MANIFEST. An incomplete run names the stage that failed.
    pub fn manifest(&self, reached: Option<Stage>, failure: Option<&str>) -> CliResult<()> {
        let mut out = String::from("solitonscope run\n");
        match failure {
            None => out.push_str("status: complete\n"),
            Some(msg) => {
                out.push_str("status: incomplete\n");
                let _ = writeln!(out, "error: {}", msg.replace('\n', " "));
            }
        }
        let _ = writeln!(out, "stage_reached: {}", reached.map(|s| s.name()).unwrap_or("none"));
        out.push_str("files:\n");
        for f in &self.files {
            let _ = writeln!(out, "  {f}");
        }
        io::write_text(&self.root.join(MANIFEST), &out)?;
        Ok(())
    }
}

/// What a MANIFEST says about its run.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestInfo {
    pub complete: bool,
    pub error: Option<String>,
    pub files: Vec<String>,
}

pub fn read_manifest(dir: &Path) -> CliResult<ManifestInfo> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::artifact(path.display().to_string(), e.to_string()))?;
    let mut info = ManifestInfo {
        complete: false,
        error: None,
        files: Vec::new(),
    };
    let mut status_seen = false;
    for line in text.lines() {
        if let Some(s) = line.strip_prefix("status: ") {
            info.complete = s == "complete";
            status_seen = true;
        } else if let Some(e) = line.strip_prefix("error: ") {
            info.error = Some(e.to_string());
        } else if let Some(f) = line.strip_prefix("  ") {
            info.files.push(f.to_string());
        }
    }
    if !status_seen {
        return Err(CliError::artifact(path.display().to_string(), "no status line"));
    }
    Ok(info)
}
