//! Dense text encodings behind a provider abstraction.
//!
//! Three backends exist: a precomputed vector store, a remote batch-encoding
//! service, and a deterministic hashing encoder that needs nothing external.
//! Every provider memoizes vectors by text hash.

mod hashing;
mod remote;
mod store;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use hashing::{HashingEncoder, DEFAULT_HASHING_DIMENSION};
pub use remote::{RemoteEncoder, RemoteEncoderConfig};
pub use store::{load_store, parse_store, write_store, PrecomputedStore};

/// A fixed-length encoding of one text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Self {
        EmbeddingVector(values)
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    fn norm(&self) -> f64 {
        self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
    }
}

/// Cosine similarity, computed in f64. Errors on dimension mismatch or a
/// zero vector.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::Contract(format!(
            "cosine over vectors of dimension {} and {}",
            a.dimension(),
            b.dimension()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Contract("cosine of a zero vector".into()));
    }
    let dot: f64 = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Hex SHA-256 of the UTF-8 text; the key of precomputed stores and caches.
pub fn text_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    crate::corpus::hex_digest(hasher)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    PrecomputedStore,
    RemoteService,
    DeterministicFallback,
}

#[derive(Debug)]
enum Backend {
    Store(PrecomputedStore),
    Remote(RemoteEncoder),
    Hashing(HashingEncoder),
}

/// Resolves texts to vectors and caches the results.
///
/// Safe to share across threads: reads take a shared lock and insertions an
/// exclusive one.
#[derive(Debug)]
pub struct EmbeddingProvider {
    backend: Backend,
    dimension: usize,
    cache: RwLock<HashMap<String, Arc<EmbeddingVector>>>,
    backend_calls: AtomicUsize,
}

impl EmbeddingProvider {
    pub fn hashing(encoder: HashingEncoder) -> Self {
        let dimension = encoder.dimension();
        Self::with_backend(Backend::Hashing(encoder), dimension)
    }

    pub fn precomputed(store: PrecomputedStore) -> Self {
        let dimension = store.dimension();
        Self::with_backend(Backend::Store(store), dimension)
    }

    pub fn remote(encoder: RemoteEncoder) -> Self {
        let dimension = encoder.dimension();
        Self::with_backend(Backend::Remote(encoder), dimension)
    }

    fn with_backend(backend: Backend, dimension: usize) -> Self {
        EmbeddingProvider {
            backend,
            dimension,
            cache: RwLock::new(HashMap::new()),
            backend_calls: AtomicUsize::new(0),
        }
    }

    pub fn kind(&self) -> ProviderKind {
        match self.backend {
            Backend::Store(_) => ProviderKind::PrecomputedStore,
            Backend::Remote(_) => ProviderKind::RemoteService,
            Backend::Hashing(_) => ProviderKind::DeterministicFallback,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of times the backend was consulted (cache misses).
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::Relaxed)
    }

    pub fn embed(&self, text: &str) -> Result<Arc<EmbeddingVector>> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }

    /// Embed several texts; misses are resolved in one backend round.
    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Arc<EmbeddingVector>>> {
        let keys: Vec<String> = texts
            .iter()
            .map(|t| {
                if t.trim().is_empty() {
                    Err(Error::Contract("cannot embed empty text".into()))
                } else {
                    Ok(text_hash(t))
                }
            })
            .collect::<Result<_>>()?;

        let mut missing: Vec<usize> = Vec::new();
        {
            let cache = self.cache.read().expect("embedding cache poisoned");
            for (i, key) in keys.iter().enumerate() {
                if !cache.contains_key(key) && !missing.iter().any(|&j| keys[j] == *key) {
                    missing.push(i);
                }
            }
        }

        if !missing.is_empty() {
            self.backend_calls.fetch_add(1, Ordering::Relaxed);
            let miss_texts: Vec<&str> = missing.iter().map(|&i| texts[i]).collect();
            let vectors = self.resolve(&miss_texts, &missing.iter().map(|&i| keys[i].as_str()).collect::<Vec<_>>())?;
            let mut cache = self.cache.write().expect("embedding cache poisoned");
            for (&i, vector) in missing.iter().zip(vectors) {
                if vector.dimension() != self.dimension {
                    return Err(Error::Contract(format!(
                        "backend returned dimension {} (expected {})",
                        vector.dimension(),
                        self.dimension
                    )));
                }
                cache.entry(keys[i].clone()).or_insert_with(|| Arc::new(vector));
            }
        }

        let cache = self.cache.read().expect("embedding cache poisoned");
        Ok(keys.iter().map(|k| Arc::clone(&cache[k])).collect())
    }

    fn resolve(&self, texts: &[&str], hashes: &[&str]) -> Result<Vec<EmbeddingVector>> {
        match &self.backend {
            Backend::Hashing(encoder) => Ok(texts.iter().map(|t| encoder.encode(t)).collect()),
            Backend::Store(store) => hashes
                .iter()
                .map(|h| {
                    store.get(h).cloned().ok_or_else(|| Error::MissingEmbedding {
                        hash: h.to_string(),
                    })
                })
                .collect(),
            Backend::Remote(encoder) => encoder.encode_batch(texts),
        }
    }

    /// Cosine between the embeddings of two texts.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let vectors = self.embed_batch(&[a, b])?;
        cosine(&vectors[0], &vectors[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(values: &[f32]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec())
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn cosine_contract_errors() {
        assert!(matches!(cosine(&v(&[1.0]), &v(&[1.0, 0.0])), Err(Error::Contract(_))));
        assert!(matches!(cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])), Err(Error::Contract(_))));
    }

    #[test]
    fn cache_hit_skips_backend() {
        let provider = EmbeddingProvider::hashing(HashingEncoder::default());
        let a = provider.embed("loan").unwrap();
        let calls = provider.backend_calls();
        let b = provider.embed("loan").unwrap();
        assert_eq!(provider.backend_calls(), calls);
        assert_eq!(a, b);
    }

    #[test]
    fn hashing_is_deterministic_across_instances() {
        let p1 = EmbeddingProvider::hashing(HashingEncoder::default());
        let p2 = EmbeddingProvider::hashing(HashingEncoder::default());
        assert_eq!(p1.embed("loan").unwrap(), p2.embed("loan").unwrap());
    }

    #[test]
    fn store_miss_names_hash() {
        let store = parse_store("dimension=2\n", "s").unwrap();
        let provider = EmbeddingProvider::precomputed(store);
        match provider.embed("trip:id") {
            Err(Error::MissingEmbedding { hash }) => assert_eq!(hash, text_hash("trip:id")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_rejected() {
        let provider = EmbeddingProvider::hashing(HashingEncoder::default());
        assert!(provider.embed("   ").is_err());
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_bounded(
            pair in (1usize..16).prop_flat_map(|d| (
                prop::collection::vec(-10.0f32..10.0, d),
                prop::collection::vec(-10.0f32..10.0, d),
            ))
        ) {
            let (a, b) = (v(&pair.0), v(&pair.1));
            prop_assume!(a.norm() > 0.0 && b.norm() > 0.0);
            let ab = cosine(&a, &b).unwrap();
            let ba = cosine(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab.abs() <= 1.0 + 1e-9);
        }
    }
}
