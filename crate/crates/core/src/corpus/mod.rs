//! Dataset ingestion: per-source adapters, text normalization, de-duplication
//! and the canonical line-delimited corpus format.

mod canonical;
mod sources;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canonical::{load_canonical, read_canonical, save_canonical, write_canonical};

/// Binary message label. Spam is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Ham = 0,
    Spam = 1,
}

impl Label {
    pub fn is_spam(self) -> bool {
        self == Label::Spam
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Ham),
            1 => Ok(Label::Spam),
            other => Err(Error::InvalidLabel(other)),
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l as u8
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Ham => "ham",
            Label::Spam => "spam",
        })
    }
}

/// One of the four supported public corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Ling,
    Sms,
    SpamAssassin,
    Enron,
}

impl Source {
    pub const ALL: [Source; 4] = [
        Source::Ling,
        Source::Sms,
        Source::SpamAssassin,
        Source::Enron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Source::Ling => "ling",
            Source::Sms => "sms",
            Source::SpamAssassin => "spamassassin",
            Source::Enron => "enron",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ling" | "lingspam" | "ling-spam" => Ok(Source::Ling),
            "sms" => Ok(Source::Sms),
            "spamassassin" | "sa" => Ok(Source::SpamAssassin),
            "enron" => Ok(Source::Enron),
            other => Err(Error::Config(format!("unknown dataset {other:?}"))),
        }
    }
}

/// A normalized, labeled message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledMessage {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub source: Source,
}

/// Per-class counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub total: usize,
    pub spam: usize,
    pub ham: usize,
}

impl ClassCounts {
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut c = ClassCounts::default();
        for l in labels {
            c.add(l);
        }
        c
    }

    fn add(&mut self, label: Label) {
        self.total += 1;
        match label {
            Label::Spam => self.spam += 1,
            Label::Ham => self.ham += 1,
        }
    }
}

/// Corpus statistics after cleaning, plus the raw counts they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub spam: usize,
    pub ham: usize,
    pub spam_rate: f64,
    pub duplicates_removed: usize,
    pub empties_removed: usize,
    /// Counts as parsed, before empties and duplicates were dropped.
    pub raw: ClassCounts,
}

impl CorpusStats {
    pub fn of(
        messages: &[LabeledMessage],
        raw: ClassCounts,
        duplicates: usize,
        empties: usize,
    ) -> Self {
        let c = ClassCounts::from_labels(messages.iter().map(|m| m.label));
        CorpusStats {
            total: c.total,
            spam: c.spam,
            ham: c.ham,
            spam_rate: if c.total == 0 {
                0.0
            } else {
                c.spam as f64 / c.total as f64
            },
            duplicates_removed: duplicates,
            empties_removed: empties,
            raw,
        }
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "raw:     total {} spam {} ham {}",
            self.raw.total, self.raw.spam, self.raw.ham
        )?;
        writeln!(
            f,
            "removed: {} duplicates, {} empty",
            self.duplicates_removed, self.empties_removed
        )?;
        write!(
            f,
            "clean:   total {} spam {} ham {} (spam rate {:.4})",
            self.total, self.spam, self.ham, self.spam_rate
        )
    }
}

/// A message as extracted by a source adapter, before normalization.
#[derive(Debug, Clone)]
pub(crate) struct RawMessage {
    pub id: String,
    pub text: String,
    pub label: Label,
}

/// Collapse every whitespace run to one space and trim both ends.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Parse one dataset from its published on-disk layout and clean it.
///
/// Messages come back sorted by id. Exact-duplicate texts (after
/// normalization) keep their first occurrence in that order; empty texts
/// are dropped.
pub fn ingest(source: Source, root: &Path) -> Result<(Vec<LabeledMessage>, CorpusStats)> {
    if !root.exists() {
        return Err(Error::Ingest {
            path: root.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "path does not exist"),
        });
    }
    let mut raw = match source {
        Source::Ling => sources::ling(root)?,
        Source::Sms => sources::sms(root)?,
        Source::SpamAssassin => sources::spamassassin(root)?,
        Source::Enron => sources::enron(root)?,
    };
    if raw.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    raw.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(clean(source, raw))
}

pub(crate) fn clean(source: Source, raw: Vec<RawMessage>) -> (Vec<LabeledMessage>, CorpusStats) {
    let raw_counts = ClassCounts::from_labels(raw.iter().map(|m| m.label));
    let mut seen = HashSet::with_capacity(raw.len());
    let mut out = Vec::with_capacity(raw.len());
    let (mut dups, mut empties) = (0, 0);
    for m in raw {
        let text = normalize_text(&m.text);
        if text.is_empty() {
            empties += 1;
            continue;
        }
        if !seen.insert(text.clone()) {
            dups += 1;
            continue;
        }
        out.push(LabeledMessage {
            id: m.id,
            text,
            label: m.label,
            source,
        });
    }
    let stats = CorpusStats::of(&out, raw_counts, dups, empties);
    (out, stats)
}

/// Labels of a message list, in order.
pub fn labels_of(messages: &[LabeledMessage]) -> Vec<Label> {
    messages.iter().map(|m| m.label).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(id: &str, text: &str, label: Label) -> RawMessage {
        RawMessage {
            id: id.into(),
            text: text.into(),
            label,
        }
    }

    #[test]
    fn normalization_collapses_whitespace() {
        assert_eq!(normalize_text("  a\tb \n\n c  "), "a b c");
        assert_eq!(normalize_text(" \n\t "), "");
    }

    #[test]
    fn clean_drops_duplicates_and_empties() {
        let (msgs, stats) = clean(
            Source::Sms,
            vec![
                raw("1", "hello  world", Label::Ham),
                raw("2", "hello world", Label::Spam),
                raw("3", "   ", Label::Ham),
                raw("4", "win cash", Label::Spam),
            ],
        );
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].id, "1");
        assert_eq!(stats.duplicates_removed, 1);
        assert_eq!(stats.empties_removed, 1);
        assert_eq!(
            stats.raw,
            ClassCounts {
                total: 4,
                spam: 2,
                ham: 2
            }
        );
        assert_eq!(stats.total, stats.spam + stats.ham);
        assert!((stats.spam_rate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn label_serializes_as_integer() {
        assert_eq!(serde_json::to_string(&Label::Spam).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Label>("0").unwrap(), Label::Ham);
        assert!(serde_json::from_str::<Label>("2").is_err());
    }

    #[test]
    fn source_names_round_trip() {
        for s in Source::ALL {
            assert_eq!(s.name().parse::<Source>().unwrap(), s);
        }
        assert!("imdb".parse::<Source>().is_err());
    }
}
