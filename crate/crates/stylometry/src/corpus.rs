//! Loading, normalization, tokenization, and chunking of raw texts.
//!
//! Latin-script text is reduced to the 26 ASCII letters plus single spaces.
//! Greek text is expected in ASCII transliteration (Beta-Code style); its
//! diacritic marks are stripped and the output alphabet is the 24 ASCII
//! letters that stand for Greek letters, plus space.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 24 ASCII letters used by the Beta-Code transliteration of Greek.
const GREEK_LETTERS: &str = "abgdezhqiklmncoprstufxyw";

/// Beta-Code diacritic markers, always removed from Greek text.
const GREEK_DIACRITICS: &[char] = &[')', '(', '/', '\\', '=', '|', '+'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Latin,
    Greek,
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Script::Latin => write!(f, "latin"),
            Script::Greek => write!(f, "greek"),
        }
    }
}

impl FromStr for Script {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "latin" => Ok(Script::Latin),
            "greek" => Ok(Script::Greek),
            other => Err(format!("unknown script `{other}` (expected latin or greek)")),
        }
    }
}

/// Cleaning switches. All default to on; `strip_spaces` removes spaces from
/// the normalized text entirely so that n-grams never cross word boundaries
/// through a space character.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub strip_digits: bool,
    #[serde(default)]
    pub strip_spaces: bool,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
            strip_digits: true,
            strip_spaces: false,
        }
    }
}

/// A normalized text: id, the raw form as loaded, the cleaned string, and
/// its tokens. Immutable once constructed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw: String,
    pub normalized: String,
    pub tokens: Vec<String>,
    pub script: Script,
}

impl Document {
    /// Normalize `raw` according to `script` and `opts`. Returns the document
    /// together with the number of bytes dropped because they fell outside
    /// the configured alphabet.
    pub fn new(
        id: impl Into<String>,
        raw: impl Into<String>,
        script: Script,
        opts: &NormalizationOptions,
    ) -> (Self, usize) {
        let raw = raw.into();
        let (normalized, dropped) = match script {
            Script::Latin => normalize_latin_counted(&raw, opts),
            Script::Greek => normalize_greek_counted(&raw, opts),
        };
        let tokens = tokenize(&normalized);
        (
            Self {
                id: id.into(),
                raw,
                normalized,
                tokens,
                script,
            },
            dropped,
        )
    }

    /// Wrap text that is already in normalized form (archive reloads,
    /// synthetic corpora, chunks). No cleaning is applied.
    pub fn from_normalized(id: impl Into<String>, text: impl Into<String>, script: Script) -> Self {
        let normalized = text.into();
        let tokens = tokenize(&normalized);
        Self {
            id: id.into(),
            raw: normalized.clone(),
            normalized,
            tokens,
            script,
        }
    }

    /// Character count of the normalized text.
    pub fn char_len(&self) -> usize {
        self.normalized.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }
}

fn tokenize(normalized: &str) -> Vec<String> {
    normalized
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// An ordered set of documents with unique ids, all in the same script.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateDocumentId(doc.id.clone()));
            }
        }
        if let Some(first) = documents.first() {
            let script = first.script;
            for doc in &documents {
                if doc.script != script {
                    return Err(Error::MixedScripts(doc.id.clone()));
                }
            }
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

/// Clean Latin-script text: case-fold, drop digits and punctuation per the
/// options, drop every byte outside the configured alphabet, collapse
/// whitespace to single spaces, trim. Idempotent.
pub fn normalize_latin(raw: &str, opts: &NormalizationOptions) -> String {
    normalize_latin_counted(raw, opts).0
}

/// As [`normalize_latin`], also returning the count of dropped bytes.
pub fn normalize_latin_counted(raw: &str, opts: &NormalizationOptions) -> (String, usize) {
    normalize(raw, opts, &[], |c, opts| {
        if opts.lowercase {
            c.is_ascii_lowercase()
        } else {
            c.is_ascii_alphabetic()
        }
    })
}

/// Clean transliterated Ancient Greek: Beta-Code diacritic markers are always
/// removed; the letter alphabet is the 24 ASCII letters used for Greek.
pub fn normalize_greek(raw: &str, opts: &NormalizationOptions) -> String {
    normalize_greek_counted(raw, opts).0
}

/// As [`normalize_greek`], also returning the count of dropped bytes.
pub fn normalize_greek_counted(raw: &str, opts: &NormalizationOptions) -> (String, usize) {
    normalize(raw, opts, GREEK_DIACRITICS, |c, opts| {
        if opts.lowercase {
            GREEK_LETTERS.contains(c)
        } else {
            GREEK_LETTERS.contains(c.to_ascii_lowercase())
        }
    })
}

fn normalize(
    raw: &str,
    opts: &NormalizationOptions,
    always_strip: &[char],
    is_letter: fn(char, &NormalizationOptions) -> bool,
) -> (String, usize) {
    let mut out = String::with_capacity(raw.len());
    let mut dropped = 0usize;
    let mut pending_space = false;

    for c in raw.chars() {
        if always_strip.contains(&c) {
            dropped += c.len_utf8();
            continue;
        }
        if c.is_whitespace() {
            if !opts.strip_spaces {
                pending_space = true;
            }
            continue;
        }
        let c = if opts.lowercase {
            c.to_ascii_lowercase()
        } else {
            c
        };
        let keep = if is_letter(c, opts) {
            true
        } else if c.is_ascii_digit() {
            !opts.strip_digits
        } else if c.is_ascii_punctuation() {
            !opts.strip_punctuation
        } else {
            false
        };
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            dropped += c.len_utf8();
        }
    }
    (out, dropped)
}

/// Cut a document into fixed-width windows of `window` characters starting at
/// offsets 0, stride, 2*stride, ... A trailing piece shorter than `window` is
/// kept only when `include_partial` is set. Chunk ids are `"{id}#{offset}"`.
///
/// The chunked text is the verbatim substring of the parent's normalized
/// text, so it may begin or end with a space; tokens are still space-split
/// with empties filtered.
pub fn chunk(
    doc: &Document,
    window: usize,
    stride: usize,
    include_partial: bool,
) -> Result<Vec<Document>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    if stride == 0 {
        return Err(Error::ZeroStride);
    }
    let chars: Vec<char> = doc.normalized.chars().collect();
    if window > chars.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: chars.len(),
        });
    }

    let mut out = Vec::new();
    let mut offset = 0usize;
    while offset < chars.len() {
        let end = offset + window;
        if end <= chars.len() {
            let text: String = chars[offset..end].iter().collect();
            out.push(Document::from_normalized(
                format!("{}#{}", doc.id, offset),
                text,
                doc.script,
            ));
        } else {
            if include_partial {
                let text: String = chars[offset..].iter().collect();
                out.push(Document::from_normalized(
                    format!("{}#{}", doc.id, offset),
                    text,
                    doc.script,
                ));
            }
            break;
        }
        offset += stride;
    }
    Ok(out)
}

/// One record of a corpus manifest: where a text lives and how to read it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(default)]
    pub id: Option<String>,
    pub path: PathBuf,
    pub script: Script,
}

impl ManifestEntry {
    /// Effective document id: the explicit one, or the file stem.
    pub fn effective_id(&self) -> String {
        match &self.id {
            Some(id) => id.clone(),
            None => self
                .path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.path.to_string_lossy().into_owned()),
        }
    }
}

/// Parse a JSON manifest: an array of `{id?, path, script}` records.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Read one plain-text file and normalize it. Relative paths are resolved
/// against `base` (normally the manifest's directory).
pub fn load_document(
    entry: &ManifestEntry,
    base: &Path,
    opts: &NormalizationOptions,
) -> Result<(Document, usize)> {
    let path = if entry.path.is_absolute() {
        entry.path.clone()
    } else {
        base.join(&entry.path)
    };
    let raw = std::fs::read_to_string(&path)?;
    Ok(Document::new(entry.effective_id(), raw, entry.script, opts))
}
