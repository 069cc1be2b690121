use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{text_hash, EmbeddingVector};
use crate::error::{Error, Result};

/// Vectors keyed by text hash, loaded from a store file:
///
/// ```text
/// dimension=<d>
/// <text-hash> <v1> <v2> ... <vd>
/// ```
#[derive(Debug, Clone, Default)]
pub struct PrecomputedStore {
    dimension: usize,
    vectors: HashMap<String, EmbeddingVector>,
}

impl PrecomputedStore {
    pub fn new(dimension: usize) -> Self {
        PrecomputedStore {
            dimension,
            vectors: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn get(&self, hash: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(hash)
    }

    pub fn insert_text(&mut self, text: &str, vector: EmbeddingVector) -> Result<()> {
        if vector.dimension() != self.dimension {
            return Err(Error::Contract(format!(
                "vector of dimension {} in a store of dimension {}",
                vector.dimension(),
                self.dimension
            )));
        }
        self.vectors.insert(text_hash(text), vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn load_store(path: &Path) -> Result<PrecomputedStore> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_store(&text, &path.display().to_string())
}

pub fn parse_store(text: &str, file: &str) -> Result<PrecomputedStore> {
    let mut lines = text.lines().enumerate();
    let dimension = match lines.next() {
        Some((_, header)) => header
            .trim()
            .strip_prefix("dimension=")
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::parse(file, 1, "expected header `dimension=<d>`"))?,
        None => return Err(Error::parse(file, 1, "empty store file")),
    };
    let mut store = PrecomputedStore::new(dimension);
    for (index, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let hash = fields.next().unwrap_or_default().to_string();
        let values: Vec<f32> = fields
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(file, index + 1, e))?;
        if values.len() != dimension {
            return Err(Error::parse(
                file,
                index + 1,
                format!("expected {dimension} values, found {}", values.len()),
            ));
        }
        store.vectors.insert(hash, EmbeddingVector::new(values));
    }
    Ok(store)
}

/// Write a store file with records sorted by hash.
pub fn write_store(path: &Path, store: &PrecomputedStore) -> Result<()> {
    let mut out = format!("dimension={}\n", store.dimension);
    let mut hashes: Vec<&String> = store.vectors.keys().collect();
    hashes.sort();
    for hash in hashes {
        out.push_str(hash);
        for v in store.vectors[hash].values() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let h = text_hash("loan");
        let store = parse_store(&format!("dimension=3\n{h} 1 0 0.5\n"), "s").unwrap();
        assert_eq!(store.get(&h).unwrap().values(), [1.0, 0.0, 0.5]);
    }

    #[test]
    fn wrong_width_reports_line() {
        let err = parse_store("dimension=2\nabc 1 2 3\n", "s").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.txt");
        let mut store = PrecomputedStore::new(2);
        store.insert_text("a", EmbeddingVector::new(vec![0.25, -1.5])).unwrap();
        write_store(&path, &store).unwrap();
        let back = load_store(&path).unwrap();
        assert_eq!(back.get(&text_hash("a")).unwrap().values(), [0.25, -1.5]);
    }
}
