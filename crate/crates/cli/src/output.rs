use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub model_source: Option<String>,
    pub variant: Option<String>,
    pub tolerances: Value,
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp_unix_s: Option<u64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

/// Output destination plus the manifest under construction.
pub struct Sink {
    out: Option<PathBuf>,
    stamp: Option<u64>,
    start: Instant,
    pub manifest: RunManifest,
}

impl Sink {
    pub fn new(command: &str, out: Option<PathBuf>, stamp: bool) -> Self {
        let stamp = stamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
        Self {
            out,
            stamp,
            start: Instant::now(),
            manifest: RunManifest {
                tool: "pfdde",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                args: std::env::args().skip(1).collect(),
                model_source: None,
                variant: None,
                tolerances: json!({}),
                outputs: Vec::new(),
                wall_clock_s: 0.0,
                stamp_unix_s: stamp,
                summary: Value::Null,
            },
        }
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| suffixed(p, ".manifest.json"))
    }

    /// Where the manifest lives, as written into every output.
    pub fn manifest_ref(&self) -> String {
        self.manifest_path()
            .map_or_else(|| "stderr".to_string(), |p| p.display().to_string())
    }

    /// `#` comment lines opening every CSV output.
    pub fn csv_header(&self) -> String {
        let mut h = format!("# pfdde {} {}\n", self.manifest.command, self.manifest.version);
        h.push_str(&format!("# manifest: {}\n", self.manifest_ref()));
        h.push_str(&format!("# args: {}\n", self.manifest.args.join(" ")));
        if let Some(s) = self.stamp {
            h.push_str(&format!("# stamp: unix {s}\n"));
        }
        h
    }

    pub fn write_csv(&mut self, body: &str) -> Result<(), CliError> {
        let text = format!("{}{}", self.csv_header(), body);
        self.write_primary(&text)
    }

    /// Pretty JSON with a `manifest` back-reference.
    pub fn write_json(&mut self, mut value: Value) -> Result<(), CliError> {
        if let Value::Object(map) = &mut value {
            map.insert("manifest".into(), Value::String(self.manifest_ref()));
        }
        let text = serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n";
        self.write_primary(&text)
    }

    pub fn write_text(&mut self, text: &str) -> Result<(), CliError> {
        self.write_primary(text)
    }

    fn write_primary(&mut self, text: &str) -> Result<(), CliError> {
        match self.out.clone() {
            Some(p) => self.write_file(&p, text),
            None => {
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::io("stdout", e))?;
                self.manifest.outputs.push("stdout".into());
                Ok(())
            }
        }
    }

    /// Secondary output at `<out><suffix>`; skipped when writing to stdout.
    pub fn write_aux_csv(&mut self, suffix: &str, body: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(out) = self.out.clone() else {
            return Ok(None);
        };
        let path = suffixed(&out, suffix);
        let text = format!("{}{}", self.csv_header(), body);
        self.write_file(&path, &text)?;
        Ok(Some(path))
    }

    fn write_file(&mut self, path: &Path, text: &str) -> Result<(), CliError> {
        fs::write(path, text).map_err(|e| CliError::io(&path.display().to_string(), e))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.manifest.wall_clock_s = self.start.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        match self.manifest_path() {
            Some(p) => fs::write(&p, text).map_err(|e| CliError::io(&p.display().to_string(), e)),
            None => {
                eprint!("{text}");
                Ok(())
            }
        }
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
