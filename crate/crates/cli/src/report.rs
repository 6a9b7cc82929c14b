//! Output plumbing: every report embeds the tool version and the resolved
//! configuration echo so it can be reproduced with no other state.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON envelope shared by all structured reports.
#[derive(Serialize)]
pub struct Envelope<'a, P: Serialize> {
    pub version: &'a str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub report: P,
}

/// `# `-prefixed header block for text and CSV outputs.
pub fn text_preamble(command: &str, cfg: &RunConfig) -> String {
    let mut s = format!("# qflab {VERSION} {command}\n");
    for line in cfg.echo_lines() {
        s.push_str("# ");
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// Creates the output directory and returns the path of `name` inside it.
pub fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.join(name))
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn write_json<P: Serialize>(
    path: &Path,
    command: &str,
    cfg: &RunConfig,
    report: P,
) -> Result<(), CliError> {
    let envelope = Envelope { version: VERSION, command, config: cfg, report };
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &envelope)
        .map_err(|e| CliError::Computation(format!("JSON serialization: {e}")))?;
    file.write_all(b"\n")?;
    println!("wrote {}", path.display());
    Ok(())
}
