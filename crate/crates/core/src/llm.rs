//! LLM prompting backend.
