use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that turns a prompt into a completion.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub key_env: Option<String>,
    pub temperature: f64,
    pub max_retries: usize,
    pub timeout: Duration,
}

impl LlmConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        LlmConfig {
            base_url: base_url.into(),
            model: model.into(),
            key_env: None,
            temperature: 0.0,
            max_retries: 2,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    temperature: f64,
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Posts `{model, temperature, prompt}` and reads the completion text, either
/// as a JSON object with a `text` field or as the raw body.
pub struct HttpLanguageModel {
    config: LlmConfig,
    agent: ureq::Agent,
}

impl HttpLanguageModel {
    pub fn new(config: LlmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        HttpLanguageModel { config, agent }
    }

    fn request(&self, prompt: &str) -> std::result::Result<String, String> {
        let mut request = self.agent.post(&self.config.base_url);
        if let Some(var) = &self.config.key_env {
            if let Ok(key) = std::env::var(var) {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut response = request
            .send_json(CompletionRequest {
                model: &self.config.model,
                temperature: self.config.temperature,
                prompt,
            })
            .map_err(|e| e.to_string())?;
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(match serde_json::from_str::<CompletionResponse>(&body) {
            Ok(parsed) => parsed.text,
            Err(_) => body,
        })
    }
}

impl LanguageModel for HttpLanguageModel {
    fn complete(&self, prompt: &str) -> Result<String> {
        let mut last_error = String::new();
        for attempt in 0..=self.config.max_retries {
            match self.request(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::warn!("completion attempt {} failed: {e}", attempt + 1);
                    last_error = e;
                }
            }
        }
        Err(Error::Transport {
            message: last_error,
            retries: self.config.max_retries,
        })
    }
}
