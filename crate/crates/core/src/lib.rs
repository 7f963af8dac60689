//! Core library for mining research values from scientific abstracts.
//!
//! The pipeline: ingest a corpus of abstracts ([`corpus`]), split them into
//! sentences ([`segmenter`]), match per-value lexicons against each sentence
//! ([`lexicon`]), score predictions against annotated data ([`evaluation`]),
//! and aggregate corpus-level statistics ([`analytics`]). An optional
//! LLM-prompting backend ([`llm`]) provides a second classification route for
//! comparison, and [`report`] renders tables and SVG charts.

pub mod analytics;
pub mod corpus;
pub mod evaluation;
pub mod fetch;
pub mod lexicon;
pub mod llm;
pub mod report;
pub mod segmenter;
pub mod values;

pub use lexicon::{classify_abstract, classify_sentence, tokenize_normalize, CompiledLexicon, LexiconSpec};
pub use segmenter::{segment, SentenceSpan};
pub use values::{ResearchValue, ValueLabelVector};
