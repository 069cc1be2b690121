use super::EmbeddingVector;

/// Deterministic bag-of-n-grams encoder.
///
/// Each lowercase alphanumeric token contributes a whole-token feature plus
/// its boundary-marked character trigrams. Features are hashed with seeded
/// FNV-1a into `dimension` non-negative buckets and the result is
/// L2-normalized. Texts sharing no features have cosine 0 unless two features
/// collide in a bucket.
///
/// Text split by `|` is read as segments of falling importance: features of
/// segment `s` carry weight `0.5^s`. A rendered column (`header | table |
/// others`) is then dominated by its own header, as with an order-aware
/// encoder, rather than matching every column of its table equally.
#[derive(Debug, Clone)]
pub struct HashingEncoder {
    dimension: usize,
    seed: u64,
}

pub const DEFAULT_HASHING_DIMENSION: usize = 1024;
const DEFAULT_SEED: u64 = 0x6a6f_696e_7261_6e6b;
const SEGMENT_DECAY: f32 = 0.5;

impl Default for HashingEncoder {
    fn default() -> Self {
        HashingEncoder::new(DEFAULT_HASHING_DIMENSION, DEFAULT_SEED)
    }
}

impl HashingEncoder {
    /// Panics on a zero dimension.
    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension > 0, "hashing dimension must be positive");
        HashingEncoder { dimension, seed }
    }

    pub fn with_dimension(dimension: usize) -> Self {
        HashingEncoder::new(dimension, DEFAULT_SEED)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn encode(&self, text: &str) -> EmbeddingVector {
        let mut buckets = vec![0f32; self.dimension];
        let lowered = text.to_lowercase();
        let mut any = false;
        let mut weight = 1.0;
        for segment in lowered.split('|') {
            for token in segment.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
                self.add_token(&mut buckets, token, weight);
                any = true;
            }
            weight *= SEGMENT_DECAY;
        }
        if !any {
            // punctuation-only text: fall back to its raw characters
            self.add_token(&mut buckets, lowered.trim(), 1.0);
        }
        let norm = buckets.iter().map(|v| v * v).sum::<f32>().sqrt();
        if norm > 0.0 {
            buckets.iter_mut().for_each(|v| *v /= norm);
        }
        EmbeddingVector::new(buckets)
    }

    fn add_token(&self, buckets: &mut [f32], token: &str, weight: f32) {
        let mut whole = Vec::with_capacity(token.len() + 2);
        whole.extend_from_slice(b"w:");
        whole.extend_from_slice(token.as_bytes());
        buckets[self.bucket(&whole)] += weight;

        let marked: Vec<char> = std::iter::once('<')
            .chain(token.chars())
            .chain(std::iter::once('>'))
            .collect();
        for gram in marked.windows(3) {
            let gram: String = gram.iter().collect();
            let mut key = Vec::with_capacity(gram.len() + 2);
            key.extend_from_slice(b"g:");
            key.extend_from_slice(gram.as_bytes());
            buckets[self.bucket(&key)] += weight;
        }
    }

    fn bucket(&self, bytes: &[u8]) -> usize {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325 ^ self.seed;
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
        // final avalanche so low bits depend on every byte
        hash ^= hash >> 33;
        hash = hash.wrapping_mul(0xff51_afd7_ed55_8ccd);
        hash ^= hash >> 33;
        (hash % self.dimension as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::cosine;

    #[test]
    fn identical_text_identical_vector() {
        let enc = HashingEncoder::default();
        assert_eq!(enc.encode("dock count"), enc.encode("dock count"));
        assert_eq!(enc.encode("Dock  Count"), enc.encode("dock count"));
    }

    #[test]
    fn never_all_zero() {
        let enc = HashingEncoder::with_dimension(8);
        for text in ["a", "!!", "x_y", "é"] {
            assert!(enc.encode(text).values().iter().any(|&v| v > 0.0), "{text}");
        }
    }

    #[test]
    fn related_texts_score_higher() {
        let enc = HashingEncoder::default();
        let q = enc.encode("station dock count");
        let near = enc.encode("dock_count | station | id, name");
        let far = enc.encode("salary | employee | name");
        assert!(cosine(&q, &near).unwrap() > cosine(&q, &far).unwrap());
    }

    #[test]
    fn leading_segment_dominates() {
        let enc = HashingEncoder::default();
        let q = enc.encode("gender");
        let own = enc.encode("gender | client | id, card_id");
        let sibling = enc.encode("card_id | client | id, gender");
        assert!(cosine(&q, &own).unwrap() > cosine(&q, &sibling).unwrap());
        assert_ne!(own, sibling);
    }
}
