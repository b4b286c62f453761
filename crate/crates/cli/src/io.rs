use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

fn open(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    let mut s = String::new();
    open(path)?
        .read_to_string(&mut s)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(s)
}

/// Reads raw JSON values, one per non-blank line.
pub fn read_values(path: &Path) -> Result<Vec<serde_json::Value>, CliError> {
    read_jsonl(path)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let v =
            serde_json::from_str(&line).map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn writer(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    for r in rows {
        let line = serde_json::to_string(r).map_err(|e| CliError::data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| CliError::data(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::data(e.to_string()))
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_all(text.as_bytes())
        .map_err(|e| CliError::data(e.to_string()))?;
    w.flush().map_err(|e| CliError::data(e.to_string()))
}
