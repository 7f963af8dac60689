//! Per-value lexicons: pattern grammar, compilation, and sentence/abstract
//! classification.
//!
//! A pattern is an ordered token sequence; the final token may end with `*`
//! to match any token with that prefix. Matching is over normalized tokens,
//! contiguous, at whole-token boundaries. A value fires when the number of
//! distinct matched patterns reaches that value's threshold.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::segmenter::{self, SegmenterConfig};
use crate::values::{ResearchValue, ValueLabelVector};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("invalid pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },
    #[error("duplicate pattern {pattern:?} for value {value}")]
    DuplicatePattern { value: ResearchValue, pattern: String },
    #[error("threshold for value {0} must be >= 1")]
    ZeroThreshold(ResearchValue),
    #[error("failed to read lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse lexicon file: {0}")]
    Format(#[from] serde_json::Error),
}

/// Normalize and tokenize text: Unicode compatibility form (NFKC), lowercase,
/// split on anything that is not a letter, digit, intra-word hyphen, or
/// intra-word apostrophe.
pub fn tokenize_normalize(text: &str) -> Vec<String> {
    let normalized: String = text.nfkc().flat_map(char::to_lowercase).collect();
    let chars: Vec<char> = normalized.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || ((c == '-' || c == '\'')
                && i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()));
        if keep {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// A single lexicon pattern: literal tokens plus an optional final prefix
/// wildcard. Stored and displayed in its post-normalization form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    tokens: Vec<String>,
    prefix_wildcard: bool,
}

impl Pattern {
    /// Parse a pattern string such as `"novel"`, `"state-of-the-art"`, or
    /// `"propose a*"`. `*` is only allowed at the very end.
    pub fn parse(raw: &str) -> Result<Pattern, LexiconError> {
        let invalid = |reason: &str| LexiconError::InvalidPattern {
            pattern: raw.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(invalid("pattern is empty"));
        }
        let (body, prefix_wildcard) = match trimmed.strip_suffix('*') {
            Some(b) => (b, true),
            None => (trimmed, false),
        };
        if body.contains('*') {
            return Err(invalid("`*` is only allowed at the end of the final token"));
        }
        let tokens: Vec<String> = body.split_whitespace().map(|t| t.to_string()).collect();
        if tokens.is_empty() {
            return Err(invalid("pattern has no tokens"));
        }
        for token in &tokens {
            let n = token.chars().count();
            let ok = token.chars().enumerate().all(|(i, c)| {
                (c.is_alphanumeric() && !c.is_uppercase())
                    || ((c == '-' || c == '\'') && i > 0 && i + 1 < n)
            });
            if !ok {
                return Err(invalid(&format!(
                    "token {token:?} must be lowercase alphanumeric with internal hyphen/apostrophe only"
                )));
            }
        }
        if prefix_wildcard && tokens.last().is_some_and(|t| t.is_empty()) {
            return Err(invalid("wildcard needs a non-empty prefix"));
        }
        Ok(Pattern {
            tokens,
            prefix_wildcard,
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn has_prefix_wildcard(&self) -> bool {
        self.prefix_wildcard
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Does this pattern match the token window starting at `start`?
    pub fn matches_at(&self, tokens: &[String], start: usize) -> bool {
        if start + self.tokens.len() > tokens.len() {
            return false;
        }
        for (offset, want) in self.tokens.iter().enumerate() {
            let got = &tokens[start + offset];
            let last = offset + 1 == self.tokens.len();
            let ok = if last && self.prefix_wildcard {
                got.starts_with(want.as_str())
            } else {
                got == want
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Does this pattern match anywhere in the token list?
    pub fn matches(&self, tokens: &[String]) -> bool {
        if self.tokens.len() > tokens.len() {
            return false;
        }
        (0..=tokens.len() - self.tokens.len()).any(|i| self.matches_at(tokens, i))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tokens.join(" "))?;
        if self.prefix_wildcard {
            write!(f, "*")?;
        }
        Ok(())
    }
}

/// Patterns and threshold for a single value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValueLexicon {
    pub threshold: u32,
    pub patterns: Vec<String>,
}

/// The full lexicon file: per-value pattern lists plus thresholds.
///
/// Serialized as a map from value id to `{threshold, patterns}`; patterns are
/// stored exactly as matched (post-normalization form).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LexiconSpec {
    entries: BTreeMap<ResearchValue, ValueLexicon>,
}

impl LexiconSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert patterns for a value (threshold defaults to 1). Convenience for
    /// tests and seed lexicons.
    pub fn insert<I, S>(&mut self, value: ResearchValue, patterns: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entry = self.entries.entry(value).or_insert(ValueLexicon {
            threshold: 1,
            patterns: Vec::new(),
        });
        for p in patterns {
            entry.patterns.push(p.into());
        }
    }

    pub fn set_threshold(&mut self, value: ResearchValue, threshold: u32) {
        self.entries
            .entry(value)
            .or_insert(ValueLexicon {
                threshold: 1,
                patterns: Vec::new(),
            })
            .threshold = threshold;
    }

    pub fn get(&self, value: ResearchValue) -> Option<&ValueLexicon> {
        self.entries.get(&value)
    }

    pub fn entries(&self) -> impl Iterator<Item = (ResearchValue, &ValueLexicon)> {
        self.entries.iter().map(|(v, l)| (*v, l))
    }

    pub fn pattern_count(&self) -> usize {
        self.entries.values().map(|l| l.patterns.len()).sum()
    }

    /// Merge `other` into `self`, skipping duplicate patterns per value.
    /// Thresholds already present win.
    pub fn merge(&mut self, other: &LexiconSpec) {
        for (value, lex) in other.entries() {
            let entry = self.entries.entry(value).or_insert(ValueLexicon {
                threshold: lex.threshold,
                patterns: Vec::new(),
            });
            for p in &lex.patterns {
                if !entry.patterns.contains(p) {
                    entry.patterns.push(p.clone());
                }
            }
        }
    }

    pub fn from_json(json: &str) -> Result<LexiconSpec, LexiconError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<LexiconSpec, LexiconError> {
        LexiconSpec::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), LexiconError> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(path, json)?;
        Ok(())
    }
}

/// One matched pattern occurrence, deduplicated per sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternMatch {
    pub value: ResearchValue,
    pub pattern: String,
}

/// Compiled, immutable matcher over all patterns of a [`LexiconSpec`].
///
/// Single-token patterns are bucketed by literal (or kept in a prefix list for
/// wildcards); multi-token patterns are indexed by first token. Results are
/// identical to a naive pattern-by-pattern scan.
#[derive(Debug, Clone)]
pub struct CompiledLexicon {
    patterns: Vec<(ResearchValue, Pattern, String)>,
    thresholds: [u32; ResearchValue::COUNT],
    by_first_literal: HashMap<String, Vec<usize>>,
    first_wildcards: Vec<(String, usize)>,
}

impl CompiledLexicon {
    /// Compile a spec, validating the pattern grammar, per-value duplicates,
    /// and thresholds.
    pub fn compile(spec: &LexiconSpec) -> Result<CompiledLexicon, LexiconError> {
        let mut patterns = Vec::new();
        let mut thresholds = [1u32; ResearchValue::COUNT];
        for (value, lex) in spec.entries() {
            if lex.threshold == 0 {
                return Err(LexiconError::ZeroThreshold(value));
            }
            thresholds[value.index()] = lex.threshold;
            let mut seen = HashSet::new();
            for raw in &lex.patterns {
                let pattern = Pattern::parse(raw)?;
                let canonical = pattern.to_string();
                if !seen.insert(canonical.clone()) {
                    return Err(LexiconError::DuplicatePattern {
                        value,
                        pattern: canonical,
                    });
                }
                patterns.push((value, pattern, canonical));
            }
        }

        let mut by_first_literal: HashMap<String, Vec<usize>> = HashMap::new();
        let mut first_wildcards = Vec::new();
        for (id, (_, pattern, _)) in patterns.iter().enumerate() {
            let first = &pattern.tokens()[0];
            if pattern.len() == 1 && pattern.has_prefix_wildcard() {
                first_wildcards.push((first.clone(), id));
            } else {
                by_first_literal.entry(first.clone()).or_default().push(id);
            }
        }

        Ok(CompiledLexicon {
            patterns,
            thresholds,
            by_first_literal,
            first_wildcards,
        })
    }

    pub fn threshold(&self, value: ResearchValue) -> u32 {
        self.thresholds[value.index()]
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// All distinct pattern matches in the token list.
    pub fn match_tokens(&self, tokens: &[String]) -> Vec<PatternMatch> {
        let mut hits: HashSet<usize> = HashSet::new();
        for (i, token) in tokens.iter().enumerate() {
            if let Some(ids) = self.by_first_literal.get(token) {
                for &id in ids {
                    if !hits.contains(&id) && self.patterns[id].1.matches_at(tokens, i) {
                        hits.insert(id);
                    }
                }
            }
            for (prefix, id) in &self.first_wildcards {
                if !hits.contains(id) && token.starts_with(prefix.as_str()) {
                    hits.insert(*id);
                }
            }
        }
        let mut matches: Vec<PatternMatch> = hits
            .into_iter()
            .map(|id| PatternMatch {
                value: self.patterns[id].0,
                pattern: self.patterns[id].2.clone(),
            })
            .collect();
        matches.sort();
        matches
    }
}

/// Classification of a single sentence: final flags plus the distinct
/// pattern matches behind them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceClassification {
    pub labels: ValueLabelVector,
    pub matches: Vec<PatternMatch>,
}

/// Flag value `v` iff the number of distinct matched patterns for `v` reaches
/// its threshold.
pub fn classify_sentence(compiled: &CompiledLexicon, sentence: &str) -> SentenceClassification {
    let tokens = tokenize_normalize(sentence);
    let matches = compiled.match_tokens(&tokens);
    let mut distinct = [0u32; ResearchValue::COUNT];
    for m in &matches {
        distinct[m.value.index()] += 1;
    }
    let mut labels = ValueLabelVector::new();
    for value in ResearchValue::ALL {
        labels.set(value, distinct[value.index()] >= compiled.threshold(value));
    }
    SentenceClassification { labels, matches }
}

/// Classification of a whole abstract: the elementwise OR of its sentences.
#[derive(Debug, Clone)]
pub struct AbstractClassification {
    pub labels: ValueLabelVector,
    pub sentence_labels: Vec<ValueLabelVector>,
    pub matches: Vec<PatternMatch>,
}

/// Segment the abstract (default segmenter config) and OR the sentence flags.
pub fn classify_abstract(compiled: &CompiledLexicon, abstract_text: &str) -> AbstractClassification {
    classify_abstract_with(compiled, abstract_text, &SegmenterConfig::default())
}

pub fn classify_abstract_with(
    compiled: &CompiledLexicon,
    abstract_text: &str,
    segmenter_config: &SegmenterConfig,
) -> AbstractClassification {
    let mut labels = ValueLabelVector::new();
    let mut sentence_labels = Vec::new();
    let mut matches: Vec<PatternMatch> = Vec::new();
    for span in segmenter::segment_with(abstract_text, segmenter_config) {
        let s = classify_sentence(compiled, &span.text);
        labels.or_with(&s.labels);
        sentence_labels.push(s.labels);
        matches.extend(s.matches);
    }
    matches.sort();
    matches.dedup();
    AbstractClassification {
        labels,
        sentence_labels,
        matches,
    }
}
