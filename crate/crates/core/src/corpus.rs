//! Abstract corpus: records, venue registry, line-delimited persistence, and
//! the annotation-sampling procedure.
//!
//! Corpus files are UTF-8 JSON Lines, one record per line with keys
//! `paper_id`, `venue`, `subfield`, `field_group`, `year`, `abstract`. The
//! venue registry uses the same serialization with keys `venue`, `subfield`,
//! `field_group`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmenter::{self, SegmenterConfig};

/// First calendar year of the study window.
pub const STUDY_START_YEAR: i32 = 2013;
/// Last calendar year of the study window (inclusive).
pub const STUDY_END_YEAR: i32 = 2022;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Unreadable { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Unwritable { path: String, source: std::io::Error },
    #[error("registry line {line}: {message}")]
    Registry { line: usize, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Coarse grouping of subfields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldGroup {
    Ai,
    Systems,
    Theory,
    Interdisciplinary,
    Other,
}

impl FieldGroup {
    pub fn id(self) -> &'static str {
        match self {
            FieldGroup::Ai => "ai",
            FieldGroup::Systems => "systems",
            FieldGroup::Theory => "theory",
            FieldGroup::Interdisciplinary => "interdisciplinary",
            FieldGroup::Other => "other",
        }
    }
}

impl fmt::Display for FieldGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FieldGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ai" => Ok(FieldGroup::Ai),
            "systems" => Ok(FieldGroup::Systems),
            "theory" => Ok(FieldGroup::Theory),
            "interdisciplinary" => Ok(FieldGroup::Interdisciplinary),
            "other" => Ok(FieldGroup::Other),
            other => Err(format!("unknown field group {other:?}")),
        }
    }
}

/// One abstract with its identity and venue metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub venue: String,
    pub subfield: String,
    pub field_group: FieldGroup,
    pub year: i32,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

impl PaperRecord {
    /// Records outside 2013–2022 are retained but excluded from trend
    /// analytics and sampling by default.
    pub fn in_study_window(&self) -> bool {
        (STUDY_START_YEAR..=STUDY_END_YEAR).contains(&self.year)
    }
}

/// A problem found on one line of an input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Result of loading a corpus file: well-formed records plus per-line
/// warnings for everything that was not.
#[derive(Debug, Default)]
pub struct CorpusLoad {
    pub records: Vec<PaperRecord>,
    pub warnings: Vec<LineWarning>,
    pub out_of_window: usize,
}

/// Load a corpus file. Malformed lines are reported with their line number
/// and skipped; an unreadable file is fatal.
pub fn load_corpus(path: &Path) -> Result<CorpusLoad, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut load = CorpusLoad::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut warn = |message: String| {
            load.warnings.push(LineWarning { line: line_no, message });
        };
        match serde_json::from_str::<PaperRecord>(line) {
            Err(e) => warn(format!("malformed record: {e}")),
            Ok(record) => {
                if record.paper_id.is_empty() {
                    warn("empty paper_id".to_string());
                } else if record.abstract_text.is_empty() {
                    warn(format!("record {}: empty abstract", record.paper_id));
                } else if !seen_ids.insert(record.paper_id.clone()) {
                    warn(format!("duplicate paper_id {}", record.paper_id));
                } else {
                    if !record.in_study_window() {
                        load.out_of_window += 1;
                    }
                    load.records.push(record);
                }
            }
        }
    }
    Ok(load)
}

/// Write a corpus as JSON Lines. `load_corpus(save_corpus(x)) == x` for
/// well-formed corpora.
pub fn save_corpus(path: &Path, records: &[PaperRecord]) -> Result<(), CorpusError> {
    let file = fs::File::create(path).map_err(|source| CorpusError::Unwritable {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|source| CorpusError::Unwritable {
            path: path.display().to_string(),
            source,
        })?;
    }
    out.flush().map_err(|source| CorpusError::Unwritable {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RegistryLine {
    venue: String,
    subfield: String,
    field_group: FieldGroup,
}

/// Maps each venue to its subfield, and each subfield to its field group.
#[derive(Debug, Clone, Default)]
pub struct VenueRegistry {
    entries: BTreeMap<String, (String, FieldGroup)>,
}

impl VenueRegistry {
    pub fn insert(
        &mut self,
        venue: &str,
        subfield: &str,
        group: FieldGroup,
    ) -> Result<(), String> {
        if let Some((existing_sub, _)) = self.entries.get(venue) {
            if existing_sub != subfield {
                return Err(format!(
                    "venue {venue:?} already maps to subfield {existing_sub:?}"
                ));
            }
        }
        for (sub, g) in self.entries.values() {
            if sub == subfield && *g != group {
                return Err(format!(
                    "subfield {subfield:?} already maps to field group {g}"
                ));
            }
        }
        self.entries
            .insert(venue.to_string(), (subfield.to_string(), group));
        Ok(())
    }

    pub fn lookup(&self, venue: &str) -> Option<(&str, FieldGroup)> {
        self.entries.get(venue).map(|(s, g)| (s.as_str(), *g))
    }

    /// Venue names in sorted order.
    pub fn venues(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn count(&self) -> usize {
        self.entries.len()
    }

    pub fn subfields(&self) -> BTreeMap<&str, FieldGroup> {
        self.entries
            .values()
            .map(|(s, g)| (s.as_str(), *g))
            .collect()
    }

    /// Load a registry file (JSON Lines with keys `venue`, `subfield`,
    /// `field_group`). Conflicting mappings are fatal with a line number.
    pub fn load(path: &Path) -> Result<VenueRegistry, CorpusError> {
        let raw = fs::read_to_string(path).map_err(|source| CorpusError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        let mut registry = VenueRegistry::default();
        for (i, line) in raw.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let entry: RegistryLine =
                serde_json::from_str(line).map_err(|e| CorpusError::Registry {
                    line: line_no,
                    message: format!("malformed entry: {e}"),
                })?;
            registry
                .insert(&entry.venue, &entry.subfield, entry.field_group)
                .map_err(|message| CorpusError::Registry { line: line_no, message })?;
        }
        Ok(registry)
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let file = fs::File::create(path).map_err(|source| CorpusError::Unwritable {
            path: path.display().to_string(),
            source,
        })?;
        let mut out = BufWriter::new(file);
        for (venue, (subfield, group)) in &self.entries {
            let line = RegistryLine {
                venue: venue.clone(),
                subfield: subfield.clone(),
                field_group: *group,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(|source| CorpusError::Unwritable {
                path: path.display().to_string(),
                source,
            })?;
        }
        out.flush().map_err(|source| CorpusError::Unwritable {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

/// One sentence drawn for annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledSentence {
    pub paper_id: String,
    pub venue: String,
    pub sentence_text: String,
    pub sentence_index: usize,
    pub rng_seed: u64,
}

/// Result of the sampling procedure.
#[derive(Debug, Default)]
pub struct SampleOutcome {
    pub sentences: Vec<SampledSentence>,
    pub warnings: Vec<String>,
}

/// FNV-1a over the run seed and the venue name, so each venue gets an
/// independent, portable random stream.
fn venue_seed(seed: u64, venue: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in seed.to_le_bytes().iter().chain(venue.as_bytes()) {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Draw sentences for annotation.
///
/// Per venue (in sorted registry order): take one uniformly random abstract
/// per study-window year where available, then keep adding abstracts from
/// uniformly random remaining years until `per_venue` is reached or the venue
/// is exhausted; finally draw one uniformly random sentence from each chosen
/// abstract. Venues with fewer than `per_venue` abstracts contribute all they
/// have, with a warning. Randomness is ChaCha8 keyed per venue from `seed`,
/// so the output is a deterministic function of (corpus, registry,
/// per_venue, seed).
pub fn sample_for_annotation(
    records: &[PaperRecord],
    registry: &VenueRegistry,
    per_venue: usize,
    seed: u64,
    segmenter_config: &SegmenterConfig,
) -> SampleOutcome {
    let mut outcome = SampleOutcome::default();

    for venue in registry.venues() {
        let mut by_year: BTreeMap<i32, Vec<&PaperRecord>> = BTreeMap::new();
        for record in records {
            if record.venue == venue && record.in_study_window() {
                by_year.entry(record.year).or_default().push(record);
            }
        }
        for bucket in by_year.values_mut() {
            bucket.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        }
        let available: usize = by_year.values().map(Vec::len).sum();
        if available == 0 {
            outcome.warnings.push(format!("venue {venue:?}: no abstracts, skipped"));
            continue;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(venue_seed(seed, venue));
        let mut chosen: Vec<&PaperRecord> = Vec::new();

        // Pass 1: one abstract per year where available.
        for year in STUDY_START_YEAR..=STUDY_END_YEAR {
            if chosen.len() >= per_venue {
                break;
            }
            if let Some(bucket) = by_year.get_mut(&year) {
                if !bucket.is_empty() {
                    let i = rng.random_range(0..bucket.len());
                    chosen.push(bucket.remove(i));
                }
            }
        }

        // Pass 2: extra abstracts from uniformly random remaining years.
        while chosen.len() < per_venue {
            let years: Vec<i32> = by_year
                .iter()
                .filter(|(_, bucket)| !bucket.is_empty())
                .map(|(&year, _)| year)
                .collect();
            if years.is_empty() {
                break;
            }
            let year = years[rng.random_range(0..years.len())];
            let bucket = by_year.get_mut(&year).unwrap();
            let i = rng.random_range(0..bucket.len());
            chosen.push(bucket.remove(i));
        }

        if chosen.len() < per_venue {
            outcome.warnings.push(format!(
                "venue {venue:?}: only {} abstracts available (< {per_venue})",
                chosen.len()
            ));
        }

        for record in chosen {
            let spans = segmenter::segment_with(&record.abstract_text, segmenter_config);
            if spans.is_empty() {
                outcome.warnings.push(format!(
                    "abstract {}: no sentences after segmentation, skipped",
                    record.paper_id
                ));
                continue;
            }
            let sentence_index = rng.random_range(0..spans.len());
            outcome.sentences.push(SampledSentence {
                paper_id: record.paper_id.clone(),
                venue: venue.to_string(),
                sentence_text: spans[sentence_index].text.clone(),
                sentence_index,
                rng_seed: seed,
            });
        }
    }

    outcome
}

/// Convenience wrapper using the default segmenter configuration.
pub fn sample_for_annotation_default(
    records: &[PaperRecord],
    registry: &VenueRegistry,
    per_venue: usize,
    seed: u64,
) -> SampleOutcome {
    sample_for_annotation(records, registry, per_venue, seed, &SegmenterConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, venue: &str, year: i32, text: &str) -> PaperRecord {
        PaperRecord {
            paper_id: id.to_string(),
            venue: venue.to_string(),
            subfield: "Machine Learning".to_string(),
            field_group: FieldGroup::Ai,
            year,
            abstract_text: text.to_string(),
        }
    }

    fn registry_of(venues: &[&str]) -> VenueRegistry {
        let mut registry = VenueRegistry::default();
        for v in venues {
            registry.insert(v, "Machine Learning", FieldGroup::Ai).unwrap();
        }
        registry
    }

    #[test]
    fn load_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(&path, "").unwrap();
        let load = load_corpus(&path).unwrap();
        assert!(load.records.is_empty());
        assert!(load.warnings.is_empty());
    }

    #[test]
    fn load_save_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let records = vec![
            record("a", "VenueA", 2015, "First. Second."),
            record("b", "VenueA", 2016, "Only one."),
            record("c", "VenueB", 2020, "Text here."),
        ];
        save_corpus(&path, &records).unwrap();
        let load = load_corpus(&path).unwrap();
        assert_eq!(load.records, records);
        assert!(load.warnings.is_empty());

        let path2 = dir.path().join("again.jsonl");
        save_corpus(&path2, &load.records).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn malformed_line_is_warned_not_dropped_silently() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let good = serde_json::to_string(&record("a", "V", 2015, "Text.")).unwrap();
        let missing_abstract = r#"{"paper_id":"b","venue":"V","subfield":"s","field_group":"ai","year":2015}"#;
        let good2 = serde_json::to_string(&record("c", "V", 2016, "More.")).unwrap();
        std::fs::write(&path, format!("{good}\n{missing_abstract}\n{good2}\n")).unwrap();
        let load = load_corpus(&path).unwrap();
        assert_eq!(load.records.len(), 2);
        assert_eq!(load.warnings.len(), 1);
        assert_eq!(load.warnings[0].line, 2);
    }

    #[test]
    fn unreadable_file_is_fatal() {
        assert!(matches!(
            load_corpus(Path::new("/nonexistent/corpus.jsonl")),
            Err(CorpusError::Unreadable { .. })
        ));
    }

    #[test]
    fn duplicates_and_out_of_window_are_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let records = vec![
            record("a", "V", 2015, "Text."),
            record("a", "V", 2016, "Dup id."),
            record("b", "V", 2001, "Old but kept."),
        ];
        let lines: Vec<String> = records.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        std::fs::write(&path, lines.join("\n")).unwrap();
        let load = load_corpus(&path).unwrap();
        assert_eq!(load.records.len(), 2);
        assert_eq!(load.warnings.len(), 1);
        assert_eq!(load.out_of_window, 1);
        assert!(!load.records[1].in_study_window());
    }

    #[test]
    fn registry_rejects_conflicts() {
        let mut registry = VenueRegistry::default();
        registry.insert("V1", "NLP", FieldGroup::Ai).unwrap();
        assert!(registry.insert("V1", "Vision", FieldGroup::Ai).is_err());
        assert!(registry.insert("V2", "NLP", FieldGroup::Systems).is_err());
        registry.insert("V2", "NLP", FieldGroup::Ai).unwrap();
        assert_eq!(registry.count(), 2);
    }

    fn full_corpus(venues: &[&str], per_year: usize) -> Vec<PaperRecord> {
        let mut records = Vec::new();
        for venue in venues {
            for year in STUDY_START_YEAR..=STUDY_END_YEAR {
                for k in 0..per_year {
                    records.push(record(
                        &format!("{venue}-{year}-{k}"),
                        venue,
                        year,
                        "First sentence here. Second sentence there. Third one.",
                    ));
                }
            }
        }
        records
    }

    #[test]
    fn sampling_yields_per_venue_times_venues() {
        let venues = ["V1", "V2", "V3"];
        let records = full_corpus(&venues, 2);
        let registry = registry_of(&venues);
        let outcome = sample_for_annotation_default(&records, &registry, 12, 42);
        assert_eq!(outcome.sentences.len(), 36);
        assert!(outcome.warnings.is_empty());

        // One abstract contributes at most one sentence.
        let mut ids: Vec<&str> = outcome.sentences.iter().map(|s| s.paper_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 36);
    }

    #[test]
    fn sampling_covers_every_year_once_before_extras() {
        let venues = ["V1"];
        let records = full_corpus(&venues, 2); // 20 abstracts, 2 per year
        let registry = registry_of(&venues);
        let outcome = sample_for_annotation_default(&records, &registry, 12, 7);
        assert_eq!(outcome.sentences.len(), 12);
        // Every year must appear at least once among the sampled abstracts.
        let mut years: Vec<i32> = outcome
            .sentences
            .iter()
            .map(|s| s.paper_id.split('-').nth(1).unwrap().parse().unwrap())
            .collect();
        years.sort_unstable();
        years.dedup();
        assert_eq!(years.len(), 10);
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let venues = ["V1", "V2"];
        let records = full_corpus(&venues, 3);
        let registry = registry_of(&venues);
        let a = sample_for_annotation_default(&records, &registry, 12, 1);
        let b = sample_for_annotation_default(&records, &registry, 12, 1);
        assert_eq!(a.sentences, b.sentences);
        let c = sample_for_annotation_default(&records, &registry, 12, 2);
        assert_ne!(a.sentences, c.sentences);
    }

    #[test]
    fn exhausted_venue_contributes_all_it_has() {
        let mut records = full_corpus(&["V1"], 1); // 10 abstracts
        records.truncate(5); // keep years 2013..=2017
        let registry = registry_of(&["V1", "V-empty"]);
        let outcome = sample_for_annotation_default(&records, &registry, 12, 3);
        assert_eq!(outcome.sentences.len(), 5);
        assert_eq!(outcome.warnings.len(), 2); // under-filled venue + empty venue
        assert!(outcome.warnings.iter().any(|w| w.contains("V-empty")));
    }

    #[test]
    fn venue_seed_is_stable() {
        assert_eq!(venue_seed(42, "CVPR"), venue_seed(42, "CVPR"));
        assert_ne!(venue_seed(42, "CVPR"), venue_seed(43, "CVPR"));
        assert_ne!(venue_seed(42, "CVPR"), venue_seed(42, "ICML"));
    }
}
