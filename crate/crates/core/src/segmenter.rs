//! Rule-based sentence segmentation for abstract text.
//!
//! A boundary is placed after `.`, `?`, or `!` when the punctuation is
//! followed by whitespace and then an uppercase letter or digit, unless the
//! period closes a known abbreviation, sits inside a decimal number, or the
//! cursor is inside unclosed parentheses/brackets. The rules are deliberately
//! small and pinned by golden tests; the abbreviation list is configurable.

use std::fs;
use std::io;
use std::path::Path;

/// One sentence, as byte offsets into the original text plus the exact
/// substring. Spans are ordered, non-overlapping, and separated only by
/// whitespace, so the original text can be reconstructed exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// Segmentation settings. Only the abbreviation list is configurable.
#[derive(Debug, Clone)]
pub struct SegmenterConfig {
    abbreviations: Vec<String>,
}

/// Abbreviations that suppress a sentence boundary after their final period.
/// Entries are matched ASCII case-insensitively against the text ending at
/// the candidate period.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "et al.", "e.g.", "i.e.", "etc.", "vs.", "Fig.", "Eq.", "cf.", "Dr.", "No.", "Prof.", "Mr.",
    "Mrs.", "Ms.", "Sec.", "Tab.", "resp.", "approx.",
];

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig::new(DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()))
    }
}

impl SegmenterConfig {
    /// Build a config from abbreviation entries. A missing trailing period is
    /// added, so `"vs"` and `"vs."` configure the same rule.
    pub fn new<I: IntoIterator<Item = String>>(abbreviations: I) -> Self {
        let abbreviations = abbreviations
            .into_iter()
            .map(|mut a| {
                if !a.ends_with('.') {
                    a.push('.');
                }
                a
            })
            .filter(|a| a.len() > 1)
            .collect();
        SegmenterConfig { abbreviations }
    }

    /// Load an abbreviation list: one entry per line, `#` starts a comment.
    pub fn from_file(path: &Path) -> io::Result<Self> {
        let raw = fs::read_to_string(path)?;
        let entries = raw
            .lines()
            .map(|line| match line.find('#') {
                Some(i) => line[..i].trim(),
                None => line.trim(),
            })
            .filter(|line| !line.is_empty())
            .map(|line| line.to_string())
            .collect::<Vec<_>>();
        Ok(SegmenterConfig::new(entries))
    }

    pub fn abbreviations(&self) -> &[String] {
        &self.abbreviations
    }
}

/// Segment with the default abbreviation list.
pub fn segment(text: &str) -> Vec<SentenceSpan> {
    segment_with(text, &SegmenterConfig::default())
}

/// Segment `text` into sentence spans under the given config.
///
/// Empty or whitespace-only input yields an empty list. Deterministic.
pub fn segment_with(text: &str, config: &SegmenterConfig) -> Vec<SentenceSpan> {
    let boundaries = boundary_offsets(text, config);
    let mut spans = Vec::with_capacity(boundaries.len() + 1);
    let mut cursor = 0usize;
    for &b in boundaries.iter().chain(std::iter::once(&text.len())) {
        if let Some(span) = trimmed_span(text, cursor, b) {
            spans.push(span);
        }
        cursor = b;
    }
    spans
}

/// Byte offsets just past each sentence-final punctuation mark.
fn boundary_offsets(text: &str, config: &SegmenterConfig) -> Vec<usize> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let chars: Vec<(usize, char)> = text.char_indices().collect();

    for (pos, &(i, c)) in chars.iter().enumerate() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            '.' | '?' | '!' => {
                if depth > 0 {
                    continue;
                }
                if !followed_by_space_and_capital(&chars, pos) {
                    continue;
                }
                if c == '.' {
                    if is_decimal_point(&chars, pos) {
                        continue;
                    }
                    if ends_with_abbreviation(text, i, config) {
                        continue;
                    }
                }
                out.push(i + c.len_utf8());
            }
            _ => {}
        }
    }
    out
}

fn followed_by_space_and_capital(chars: &[(usize, char)], pos: usize) -> bool {
    let mut rest = chars[pos + 1..].iter().map(|&(_, c)| c);
    match rest.next() {
        Some(c) if c.is_whitespace() => {}
        _ => return false,
    }
    for c in rest {
        if c.is_whitespace() {
            continue;
        }
        return c.is_uppercase() || c.is_numeric();
    }
    false
}

fn is_decimal_point(chars: &[(usize, char)], pos: usize) -> bool {
    let before = pos.checked_sub(1).map(|p| chars[p].1);
    let after = chars.get(pos + 1).map(|&(_, c)| c);
    matches!((before, after), (Some(b), Some(a)) if b.is_ascii_digit() && a.is_ascii_digit())
}

/// Does the text ending at the period at byte `i` end with a configured
/// abbreviation, starting at a word boundary?
fn ends_with_abbreviation(text: &str, i: usize, config: &SegmenterConfig) -> bool {
    let upto = &text[..i + 1];
    for abbrev in &config.abbreviations {
        let n = abbrev.len();
        if upto.len() < n {
            continue;
        }
        let tail_start = upto.len() - n;
        if !upto.is_char_boundary(tail_start) {
            continue;
        }
        if !upto[tail_start..].eq_ignore_ascii_case(abbrev) {
            continue;
        }
        let preceded_ok = upto[..tail_start]
            .chars()
            .next_back()
            .map_or(true, |p| !p.is_alphanumeric());
        if preceded_ok {
            return true;
        }
    }
    false
}

fn trimmed_span(text: &str, from: usize, to: usize) -> Option<SentenceSpan> {
    let raw = &text[from..to];
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return None;
    }
    let lead = raw.len() - raw.trim_start().len();
    let start = from + lead;
    let end = start + trimmed.len();
    Some(SentenceSpan {
        start,
        end,
        text: trimmed.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(input: &str) -> Vec<String> {
        segment(input).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn canonical_two_sentences() {
        assert_eq!(
            texts("We propose X. It works well."),
            vec!["We propose X.", "It works well."]
        );
    }

    #[test]
    fn abbreviation_suppresses_boundary() {
        assert_eq!(
            texts("Smith et al. (2020) improve accuracy. We extend this."),
            vec!["Smith et al. (2020) improve accuracy.", "We extend this."]
        );
        assert_eq!(texts("See Fig. 3 for details."), vec!["See Fig. 3 for details."]);
        assert_eq!(
            texts("We use BERT, GPT, etc. These models are large."),
            vec!["We use BERT, GPT, etc. These models are large."]
        );
    }

    #[test]
    fn decimal_point_is_not_a_boundary() {
        assert_eq!(
            texts("Accuracy reaches 95.3% in practice."),
            vec!["Accuracy reaches 95.3% in practice."]
        );
        assert_eq!(
            texts("We reach 95.3. Next we scale up."),
            vec!["We reach 95.3.", "Next we scale up."]
        );
    }

    #[test]
    fn no_boundary_inside_brackets() {
        assert_eq!(
            texts("Our method (sketched in Sec. 2. See below) works. It is fast."),
            vec!["Our method (sketched in Sec. 2. See below) works.", "It is fast."]
        );
    }

    #[test]
    fn question_and_exclamation_marks() {
        assert_eq!(
            texts("Why does this work? We explain it! The answer is depth."),
            vec!["Why does this work?", "We explain it!", "The answer is depth."]
        );
    }

    #[test]
    fn lowercase_continuation_is_not_split() {
        assert_eq!(
            texts("The algorithm runs in O(n log n) time. it is fast."),
            vec!["The algorithm runs in O(n log n) time. it is fast."]
        );
    }

    #[test]
    fn empty_and_whitespace_inputs() {
        assert!(segment("").is_empty());
        assert!(segment("   \n\t ").is_empty());
    }

    #[test]
    fn spans_reconstruct_input() {
        let input = "  We propose X. It works well.  Really well. ";
        let spans = segment(input);
        assert_eq!(spans.len(), 3);
        let mut rebuilt = String::new();
        let mut cursor = 0;
        for s in &spans {
            assert_eq!(&input[s.start..s.end], s.text);
            assert!(input[cursor..s.start].chars().all(char::is_whitespace));
            rebuilt.push_str(&input[cursor..s.start]);
            rebuilt.push_str(&s.text);
            cursor = s.end;
        }
        rebuilt.push_str(&input[cursor..]);
        assert_eq!(rebuilt, input);
    }

    #[test]
    fn idempotent_on_own_output() {
        let input = "Smith et al. (2020) improve accuracy. We reach 95.3% (see Fig. 2). Done.";
        for span in segment(input) {
            let again = segment(&span.text);
            assert_eq!(again.len(), 1, "re-segmenting {:?}", span.text);
            assert_eq!(again[0].text, span.text);
        }
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abbrev.txt");
        std::fs::write(&path, "# scholarly\nFig.\nca # circa, period added\n\n").unwrap();
        let config = SegmenterConfig::from_file(&path).unwrap();
        assert_eq!(config.abbreviations(), &["Fig.".to_string(), "ca.".to_string()]);
        let spans = segment_with("Dated ca. 1990 by Smith. Next.", &config);
        assert_eq!(spans.len(), 2);
    }

    #[test]
    fn unicode_text_keeps_byte_offsets_valid() {
        let input = "Chars like é are fine. Σ is next.";
        let spans = segment(input);
        assert_eq!(spans.len(), 2);
        for s in &spans {
            assert_eq!(&input[s.start..s.end], s.text);
        }
    }
}
