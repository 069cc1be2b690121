use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use super::{parse_decomposition, DecompositionSource, QueryDecomposition};
use crate::error::{Error, Result};

/// Persisted model responses, one record per line:
/// `escaped query <TAB> escaped raw tag string`.
///
/// Later records for the same query replace earlier ones.
#[derive(Debug, Default)]
pub struct DecompositionCache {
    path: Option<PathBuf>,
    entries: RwLock<BTreeMap<String, String>>,
    writer: Mutex<()>,
}

impl DecompositionCache {
    pub fn in_memory() -> Self {
        DecompositionCache::default()
    }

    /// Open a cache file, creating it lazily on first insert.
    pub fn open(path: &Path) -> Result<Self> {
        let entries = if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_records(&text, &path.display().to_string())?
        } else {
            BTreeMap::new()
        };
        Ok(DecompositionCache {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(DecompositionCache {
            path: None,
            entries: RwLock::new(parse_records(text, "<memory>")?),
            writer: Mutex::new(()),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, query: &str) -> Option<QueryDecomposition> {
        let entries = self.entries.read().expect("cache poisoned");
        entries
            .get(query)
            .map(|raw| parse_decomposition(query, raw, DecompositionSource::Cache))
    }

    pub fn raw(&self, query: &str) -> Option<String> {
        self.entries.read().expect("cache poisoned").get(query).cloned()
    }

    /// Store a raw model response for `query`, appending to the backing file.
    pub fn insert(&self, query: &str, raw: &str) -> Result<()> {
        let _guard = self.writer.lock().expect("cache writer poisoned");
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            writeln!(file, "{}", record(query, raw)).map_err(|e| Error::io(path, e))?;
        }
        self.entries
            .write()
            .expect("cache poisoned")
            .insert(query.to_string(), raw.to_string());
        Ok(())
    }

    /// Store an already decomposed query in tag form.
    pub fn insert_decomposition(&self, decomposition: &QueryDecomposition) -> Result<()> {
        self.insert(&decomposition.query_text, &to_tags(decomposition))
    }

    /// Render the whole cache in file format, sorted by query.
    pub fn to_text(&self) -> String {
        let entries = self.entries.read().expect("cache poisoned");
        entries
            .iter()
            .map(|(q, raw)| record(q, raw) + "\n")
            .collect()
    }
}

fn record(query: &str, raw: &str) -> String {
    format!("{}\t{}", escape_field(query), escape_field(raw))
}

/// Tag string reproducing `decomposition` when parsed. The whole-query
/// fallback is written as an empty tag list so it re-parses as a fallback.
fn to_tags(decomposition: &QueryDecomposition) -> String {
    let subs = decomposition.sub_queries();
    let is_fallback = subs.len() == 1
        && subs[0].concept.is_none()
        && subs[0].raw == decomposition.query_text.trim();
    let mut out = String::new();
    if !is_fallback {
        for sq in subs {
            out.push_str("<sub_c>");
            out.push_str(&sq.raw);
            out.push_str("</sub_c>\n");
        }
    }
    out.push_str("<FIN></FIN>");
    out
}

fn parse_records(text: &str, file: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (index, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((query, raw)) = line.split_once('\t') else {
            return Err(Error::parse(file, index + 1, "expected `query<TAB>tags`"));
        };
        let query = unescape_field(query).map_err(|m| Error::parse(file, index + 1, m))?;
        let raw = unescape_field(raw).map_err(|m| Error::parse(file, index + 1, m))?;
        entries.insert(query, raw);
    }
    Ok(entries)
}

/// Backslash-escape `\`, tab, newline and carriage return.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("invalid escape sequence \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}
