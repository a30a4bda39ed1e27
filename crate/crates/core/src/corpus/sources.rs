//! Adapters for the published layouts of each corpus.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use super::{Label, RawMessage};
use crate::error::{Error, Result};

const SPAMASSASSIN_PARTS: [&str; 5] = ["easy_ham", "easy_ham_2", "hard_ham", "spam", "spam_2"];

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Regular files under `root`, sorted by path.
fn files_under(root: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::Ingest {
                path,
                source: e
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("walk error")),
            }
        })?;
        if entry.file_type().is_file() {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

fn relative_id(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn parent_name(path: &Path) -> Option<String> {
    path.parent()?
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
}

/// Parse files in parallel; the first failure in path order wins.
fn parse_all<F>(files: &[PathBuf], parse: F) -> Result<Vec<RawMessage>>
where
    F: Fn(&Path) -> Result<RawMessage> + Sync,
{
    let parsed: Vec<Result<RawMessage>> = files.par_iter().map(|p| parse(p)).collect();
    parsed.into_iter().collect()
}

/// Split a "Subject: ..." first line from the rest of the file.
fn split_subject_first_line(path: &Path, content: &str) -> Result<(String, String)> {
    let (first, rest) = content.split_once('\n').unwrap_or((content, ""));
    let subject = first
        .trim_end_matches('\r')
        .strip_prefix("Subject:")
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            detail: "first line is not a Subject: header".into(),
        })?;
    Ok((subject.trim().to_string(), rest.to_string()))
}

fn join_subject(subject: &str, body: &str) -> String {
    let body = body.trim();
    match (subject.is_empty(), body.is_empty()) {
        (true, _) => body.to_string(),
        (false, true) => subject.to_string(),
        (false, false) => format!("{subject} {body}"),
    }
}

/// Ling-Spam: `*.txt` files with a Subject first line; spam files are named `spmsg*`.
///
/// When `root` holds the four published variants, only `bare/` is read.
pub(super) fn ling(root: &Path) -> Result<Vec<RawMessage>> {
    let base = if root.join("bare").is_dir() {
        root.join("bare")
    } else {
        root.to_path_buf()
    };
    let files: Vec<PathBuf> = files_under(&base)?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    parse_all(&files, |path| {
        let content = read_lossy(path)?;
        let (subject, body) = split_subject_first_line(path, &content)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy())
            .unwrap_or_default();
        let label = if name.starts_with("spmsg") {
            Label::Spam
        } else {
            Label::Ham
        };
        Ok(RawMessage {
            id: relative_id(&base, path),
            text: join_subject(&subject, &body),
            label,
        })
    })
}

/// SMS Spam Collection: one `label<TAB>text` record per line.
pub(super) fn sms(root: &Path) -> Result<Vec<RawMessage>> {
    let file = if root.is_dir() {
        let candidate = root.join("SMSSpamCollection");
        if !candidate.is_file() {
            return Err(Error::Format {
                path: root.to_path_buf(),
                detail: "directory does not contain SMSSpamCollection".into(),
            });
        }
        candidate
    } else {
        root.to_path_buf()
    };
    let content = read_lossy(&file)?;
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (tag, text) = line.split_once('\t').ok_or_else(|| Error::Format {
            path: file.clone(),
            detail: format!("line {}: missing tab separator", i + 1),
        })?;
        let label = match tag.trim() {
            "ham" => Label::Ham,
            "spam" => Label::Spam,
            other => {
                return Err(Error::Format {
                    path: file.clone(),
                    detail: format!("line {}: unknown label {other:?}", i + 1),
                })
            }
        };
        out.push(RawMessage {
            id: format!("sms-{:05}", i + 1),
            text: text.to_string(),
            label,
        });
    }
    Ok(out)
}

/// Header block and body of an RFC-822 message.
///
/// Returns the unfolded Subject (if any) and the body. A leading mbox
/// `From ` line is skipped.
pub(crate) fn split_rfc822(path: &Path, content: &str) -> Result<(Option<String>, String)> {
    let mut lines = content.split('\n').peekable();
    if lines.peek().is_some_and(|l| l.starts_with("From ")) {
        lines.next();
    }
    let mut subject: Option<String> = None;
    let mut in_subject = false;
    let mut first = true;
    let mut body = String::new();
    let mut in_body = false;
    for raw in lines {
        if in_body {
            body.push_str(raw);
            body.push('\n');
            continue;
        }
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            in_body = true;
            continue;
        }
        if line.starts_with([' ', '\t']) {
            if first {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    detail: "message starts with a continuation line".into(),
                });
            }
            if in_subject {
                if let Some(s) = subject.as_mut() {
                    s.push(' ');
                    s.push_str(line.trim());
                }
            }
            continue;
        }
        let (name, value) = line.split_once(':').ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            detail: format!("header line without a colon: {:?}", truncate(line, 60)),
        })?;
        first = false;
        in_subject = name.trim().eq_ignore_ascii_case("subject");
        if in_subject && subject.is_none() {
            subject = Some(value.trim().to_string());
        } else {
            in_subject = in_subject && subject.is_none();
        }
    }
    Ok((subject, body))
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// SpamAssassin public corpus: RFC-822 files in the five published parts.
pub(super) fn spamassassin(root: &Path) -> Result<Vec<RawMessage>> {
    let files: Vec<PathBuf> = files_under(root)?
        .into_iter()
        .filter(|p| {
            parent_name(p).is_some_and(|d| SPAMASSASSIN_PARTS.contains(&d.as_str()))
                && p.file_name().is_some_and(|n| n != "cmds")
        })
        .collect();
    if files.is_empty() {
        return Err(Error::Format {
            path: root.to_path_buf(),
            detail: format!("none of the parts {SPAMASSASSIN_PARTS:?} found"),
        });
    }
    parse_all(&files, |path| {
        let content = read_lossy(path)?;
        let (subject, body) = split_rfc822(path, &content)?;
        let part = parent_name(path).unwrap_or_default();
        let label = if part.starts_with("spam") {
            Label::Spam
        } else {
            Label::Ham
        };
        Ok(RawMessage {
            id: relative_id(root, path),
            text: join_subject(subject.as_deref().unwrap_or(""), &body),
            label,
        })
    })
}

/// Enron-Spam: `enronN/{ham,spam}/*.txt` with a Subject first line, or the
/// single-CSV release with `Subject`, `Message` and `Spam/Ham` columns.
pub(super) fn enron(root: &Path) -> Result<Vec<RawMessage>> {
    if root.is_file() {
        return enron_csv(root);
    }
    let files: Vec<PathBuf> = files_under(root)?
        .into_iter()
        .filter(|p| parent_name(p).is_some_and(|d| d == "ham" || d == "spam"))
        .collect();
    if files.is_empty() {
        return Err(Error::Format {
            path: root.to_path_buf(),
            detail: "no ham/ or spam/ directories found".into(),
        });
    }
    parse_all(&files, |path| {
        let content = read_lossy(path)?;
        let (subject, body) = split_subject_first_line(path, &content)?;
        let label = if parent_name(path).as_deref() == Some("spam") {
            Label::Spam
        } else {
            Label::Ham
        };
        Ok(RawMessage {
            id: relative_id(root, path),
            text: join_subject(&subject, &body),
            label,
        })
    })
}

fn enron_csv(path: &Path) -> Result<Vec<RawMessage>> {
    let bytes = fs::read(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(bytes.as_slice());
    let format_err = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    let headers = reader
        .byte_headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| String::from_utf8_lossy(h).trim() == name)
            .ok_or_else(|| format_err(format!("missing column {name:?}")))
    };
    let (subject_col, message_col, label_col) =
        (col("Subject")?, col("Message")?, col("Spam/Ham")?);
    let mut out = Vec::new();
    for (i, rec) in reader.byte_records().enumerate() {
        let rec = rec.map_err(|e| format_err(format!("record {}: {e}", i + 1)))?;
        let field = |c: usize| String::from_utf8_lossy(rec.get(c).unwrap_or_default()).into_owned();
        let label = match field(label_col).trim() {
            "ham" => Label::Ham,
            "spam" => Label::Spam,
            other => {
                return Err(format_err(format!(
                    "record {}: unknown label {other:?}",
                    i + 1
                )))
            }
        };
        out.push(RawMessage {
            id: format!("enron-{:05}", i + 1),
            text: join_subject(field(subject_col).trim(), &field(message_col)),
            label,
        });
    }
    Ok(out)
}
