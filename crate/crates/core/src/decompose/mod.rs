//! Query decomposition into ⟨concept, attribute⟩ sub-queries.
//!
//! A language model is prompted with a fixed few-shot template and its
//! `<sub_c>` tags are parsed. Results are persisted in a line-oriented cache
//! so evaluations can be replayed offline.

mod cache;
mod llm;
mod prompt;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{escape_field, unescape_field, DecompositionCache};
pub use llm::{HttpLanguageModel, LanguageModel, LlmConfig};
pub use prompt::{build_decomposition_prompt, IclExample, DECOMPOSITION_INSTRUCTION, ICL_EXAMPLES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubQuery {
    pub concept: Option<String>,
    pub attribute: String,
    /// Tag content as emitted, e.g. `trip:id` or `year`.
    pub raw: String,
}

impl SubQuery {
    /// Parse one tag body, splitting on the first colon.
    pub fn from_tag(raw: &str) -> Option<SubQuery> {
        let raw = raw.trim();
        if raw.is_empty() {
            return None;
        }
        let (concept, attribute) = match raw.split_once(':') {
            Some((c, a)) => {
                let (c, a) = (c.trim(), a.trim());
                match (c.is_empty(), a.is_empty()) {
                    (false, false) => (Some(c.to_string()), a.to_string()),
                    (true, false) => (None, a.to_string()),
                    (false, true) => (None, c.to_string()),
                    (true, true) => return None,
                }
            }
            None => (None, raw.to_string()),
        };
        Some(SubQuery {
            concept,
            attribute,
            raw: raw.to_string(),
        })
    }

    pub fn attribute_only(attribute: impl Into<String>) -> SubQuery {
        let attribute = attribute.into();
        SubQuery {
            concept: None,
            raw: attribute.clone(),
            attribute,
        }
    }

    /// Text fed to the encoder: `"concept attribute"`, or the attribute alone.
    pub fn text(&self) -> String {
        match &self.concept {
            Some(c) => format!("{c} {}", self.attribute),
            None => self.attribute.clone(),
        }
    }
}

impl fmt::Display for SubQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.concept {
            Some(c) => write!(f, "<{c}, {}>", self.attribute),
            None => write!(f, "<{}>", self.attribute),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionSource {
    Llm,
    Cache,
    Manual,
}

/// A query split into one or more sub-queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryDecomposition {
    pub query_text: String,
    sub_queries: Vec<SubQuery>,
    pub source: DecompositionSource,
}

impl QueryDecomposition {
    /// An empty list falls back to a single sub-query holding the whole query.
    pub fn new(query_text: impl Into<String>, sub_queries: Vec<SubQuery>, source: DecompositionSource) -> Self {
        let query_text = query_text.into();
        let sub_queries = if sub_queries.is_empty() {
            vec![SubQuery::attribute_only(query_text.trim())]
        } else {
            sub_queries
        };
        QueryDecomposition {
            query_text,
            sub_queries,
            source,
        }
    }

    pub fn whole_query(query_text: impl Into<String>, source: DecompositionSource) -> Self {
        QueryDecomposition::new(query_text, Vec::new(), source)
    }

    pub fn sub_queries(&self) -> &[SubQuery] {
        &self.sub_queries
    }

    pub fn len(&self) -> usize {
        self.sub_queries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Extract the `<sub_c>` bodies that precede the first `<FIN></FIN>`.
pub fn parse_sub_queries(response: &str) -> Vec<SubQuery> {
    const OPEN: &str = "<sub_c>";
    const CLOSE: &str = "</sub_c>";
    let body = match response.find("<FIN></FIN>") {
        Some(end) => &response[..end],
        None => response,
    };
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(start) = rest.find(OPEN) {
        let after = &rest[start + OPEN.len()..];
        let Some(end) = after.find(CLOSE) else { break };
        if let Some(sq) = SubQuery::from_tag(&after[..end]) {
            out.push(sq);
        }
        rest = &after[end + CLOSE.len()..];
    }
    out
}

/// Parse a model response. With no usable tag the decomposition falls back
/// to the whole query as its only sub-query.
pub fn parse_decomposition(query: &str, response: &str, source: DecompositionSource) -> QueryDecomposition {
    let sub_queries = parse_sub_queries(response);
    if sub_queries.is_empty() {
        log::warn!("no <sub_c> tags parsed for query {query:?}; using the whole query");
    }
    QueryDecomposition::new(query, sub_queries, source)
}

/// How decompositions are obtained on a cache miss.
pub enum DecompositionClient {
    RemoteLlm(Box<dyn LanguageModel>),
    CacheOnly,
}

impl fmt::Debug for DecompositionClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionClient::RemoteLlm(_) => f.write_str("RemoteLlm"),
            DecompositionClient::CacheOnly => f.write_str("CacheOnly"),
        }
    }
}

impl DecompositionClient {
    pub fn build_prompt(&self, query: &str) -> String {
        build_decomposition_prompt(query)
    }
}

/// Cache first; otherwise prompt the model, parse, store, return.
pub fn decompose_query(
    client: &DecompositionClient,
    cache: &DecompositionCache,
    query: &str,
) -> Result<QueryDecomposition> {
    if let Some(hit) = cache.get(query) {
        return Ok(hit);
    }
    match client {
        DecompositionClient::CacheOnly => Err(Error::MissingDecomposition {
            query: query.to_string(),
        }),
        DecompositionClient::RemoteLlm(model) => {
            let prompt = client.build_prompt(query);
            let response = model.complete(&prompt)?;
            let decomposition = parse_decomposition(query, &response, DecompositionSource::Llm);
            cache.insert(query, &response)?;
            Ok(decomposition)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_example() {
        let d = parse_decomposition(
            "q",
            "<sub_c>trip:id</sub_c>\n<sub_c>station:dock count</sub_c>\n<FIN></FIN>",
            DecompositionSource::Llm,
        );
        let pairs: Vec<_> = d
            .sub_queries()
            .iter()
            .map(|s| (s.concept.as_deref(), s.attribute.as_str()))
            .collect();
        assert_eq!(pairs, [(Some("trip"), "id"), (Some("station"), "dock count")]);
    }

    #[test]
    fn attribute_only_tag() {
        let d = parse_decomposition("q", "<sub_c>year</sub_c>\n<FIN></FIN>", DecompositionSource::Llm);
        assert_eq!(d.sub_queries(), [SubQuery::attribute_only("year")]);
    }

    #[test]
    fn tags_after_fin_are_ignored() {
        let d = parse_decomposition(
            "q",
            "<sub_c>a:b</sub_c><FIN></FIN><sub_c>c:d</sub_c>",
            DecompositionSource::Llm,
        );
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn no_tags_falls_back_to_whole_query() {
        let d = parse_decomposition("How many loans?", "I don't know", DecompositionSource::Llm);
        assert_eq!(d.sub_queries(), [SubQuery::attribute_only("How many loans?")]);
    }

    #[test]
    fn first_colon_split() {
        let s = SubQuery::from_tag("event:time:utc").unwrap();
        assert_eq!(s.concept.as_deref(), Some("event"));
        assert_eq!(s.attribute, "time:utc");
        assert_eq!(s.text(), "event time:utc");
    }
}
