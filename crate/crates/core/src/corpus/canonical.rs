//! Canonical corpus file: one JSON object per line with `id`, `text`,
//! `label` (0/1) and `source`. Newlines inside text are escaped by JSON.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::LabeledMessage;
use crate::error::{Error, Result};

pub fn write_canonical<W: Write>(mut w: W, messages: &[LabeledMessage]) -> std::io::Result<()> {
    for m in messages {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_canonical(path: &Path, messages: &[LabeledMessage]) -> Result<()> {
    for m in messages {
        if m.text.is_empty() {
            return Err(Error::Validation(format!(
                "message {} has empty text",
                m.id
            )));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_canonical(BufWriter::new(file), messages).map_err(|e| Error::io(path, e))
}

/// Parse canonical records; `origin` names the source in error messages.
pub fn read_canonical<R: Read>(r: R, origin: &Path) -> Result<Vec<LabeledMessage>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |detail: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            detail,
        };
        let m: LabeledMessage =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if m.text.is_empty() {
            return Err(parse_err("empty text".into()));
        }
        if !ids.insert(m.id.clone()) {
            return Err(parse_err(format!("duplicate id {:?}", m.id)));
        }
        out.push(m);
    }
    Ok(out)
}

pub fn load_canonical(path: &Path) -> Result<Vec<LabeledMessage>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_canonical(file, path)
}
