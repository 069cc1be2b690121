use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RemoteEncoderConfig {
    pub base_url: String,
    /// Environment variable holding a bearer token, if the service needs one.
    pub token_env: Option<String>,
    pub dimension: usize,
    pub batch_size: usize,
    pub max_retries: usize,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl RemoteEncoderConfig {
    pub fn new(base_url: impl Into<String>, dimension: usize) -> Self {
        RemoteEncoderConfig {
            base_url: base_url.into(),
            token_env: None,
            dimension,
            batch_size: 32,
            max_retries: 2,
            max_in_flight: 4,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Serialize)]
struct EncodeRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EncodeResponse {
    vectors: Vec<Vec<f32>>,
}

/// Client for a batch encoding endpoint: `POST {texts}` → `{vectors}`.
pub struct RemoteEncoder {
    config: RemoteEncoderConfig,
    agent: ureq::Agent,
    permits: Semaphore,
}

impl std::fmt::Debug for RemoteEncoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteEncoder")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl RemoteEncoder {
    pub fn new(config: RemoteEncoderConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        let permits = Semaphore::new(config.max_in_flight.max(1));
        RemoteEncoder {
            config,
            agent,
            permits,
        }
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn encode_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.config.batch_size.max(1)) {
            let vectors = self.request_with_retries(chunk)?;
            if vectors.len() != chunk.len() {
                return Err(Error::Contract(format!(
                    "encoder returned {} vectors for {} texts",
                    vectors.len(),
                    chunk.len()
                )));
            }
            out.extend(vectors.into_iter().map(EmbeddingVector::new));
        }
        Ok(out)
    }

    fn request_with_retries(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>> {
        let _permit = self.permits.acquire();
        let mut last_error = String::new();
        for attempt in 0..=self.config.max_retries {
            match self.request(texts) {
                Ok(vectors) => return Ok(vectors),
                Err(e) => {
                    log::warn!("embedding request attempt {} failed: {e}", attempt + 1);
                    last_error = e;
                }
            }
        }
        Err(Error::Transport {
            message: last_error,
            retries: self.config.max_retries,
        })
    }

    fn request(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f32>>, String> {
        let mut request = self.agent.post(&self.config.base_url);
        if let Some(var) = &self.config.token_env {
            if let Ok(token) = std::env::var(var) {
                request = request.header("Authorization", &format!("Bearer {token}"));
            }
        }
        let mut response = request
            .send_json(EncodeRequest { texts })
            .map_err(|e| e.to_string())?;
        let body: EncodeResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| e.to_string())?;
        Ok(body.vectors)
    }
}

/// Counting semaphore bounding concurrent requests.
struct Semaphore {
    available: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            available: Mutex::new(permits),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut available = self.available.lock().expect("semaphore poisoned");
        while *available == 0 {
            available = self.released.wait(available).expect("semaphore poisoned");
        }
        *available -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().expect("semaphore poisoned") += 1;
        self.0.released.notify_one();
    }
}
