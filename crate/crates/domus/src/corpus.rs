//! Corpus ingestion, validation, and leave-one-out splitting.
//!
//! The canonical input is a CSV document with header
//! `house_id,room_id,room_type,artifact_type,count` (the `count` column is
//! optional and defaults to 1). A row with count `c` contributes `c` tokens
//! to its room. Rooms are grouped by `(house_id, room_id)`; houses, rooms,
//! and vocabulary entries keep first-appearance order so parsing is fully
//! deterministic.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;
use crate::error::{Error, Result};

/// Number of architectural room types: 1..=22 from the published taxonomy
/// plus type 0 for lower-floor deposits.
pub const NUM_ROOM_TYPES: usize = 23;

/// The artifact-type dictionary. Ids are dense `0..len()` in first-appearance
/// order and never change once assigned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a label list, erroring on duplicates.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for label in labels {
            let label = label.into();
            if vocab.index.contains_key(&label) {
                return Err(Error::Data(format!("duplicate artifact type '{label}'")));
            }
            vocab.intern(&label);
        }
        Ok(vocab)
    }

    /// Id for `label`, assigning the next dense id on first sight.
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
    }
}

/// A room: its ids, architectural type, and the artifact-type tokens found
/// in it. Token order is the expanded file order; the models treat rooms as
/// bags, so order only matters to sequential estimators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub room_id: String,
    pub house_id: String,
    pub room_type: u8,
    pub tokens: Vec<u32>,
}

impl Room {
    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A house with its rooms in input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct House {
    pub house_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub rooms: Vec<Room>,
}

impl House {
    pub fn n_tokens(&self) -> usize {
        self.rooms.iter().map(Room::n_tokens).sum()
    }
}

/// The full data set: houses in input order plus the shared vocabulary.
/// Immutable after construction; share freely across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    houses: Vec<House>,
    vocabulary: Vocabulary,
}

impl Corpus {
    /// Assemble a corpus from parts, validating the structural invariants.
    pub fn from_parts(vocabulary: Vocabulary, houses: Vec<House>) -> Result<Self> {
        let vocab_size = vocabulary.len() as u32;
        let mut seen_houses = HashMap::new();
        for (hi, house) in houses.iter().enumerate() {
            if seen_houses.insert(house.house_id.clone(), hi).is_some() {
                return Err(Error::Data(format!("duplicate house id '{}'", house.house_id)));
            }
            let mut seen_rooms = HashMap::new();
            for room in &house.rooms {
                if room.house_id != house.house_id {
                    return Err(Error::Data(format!(
                        "room '{}' carries house id '{}' but sits in house '{}'",
                        room.room_id, room.house_id, house.house_id
                    )));
                }
                if seen_rooms.insert(room.room_id.clone(), ()).is_some() {
                    return Err(Error::Data(format!(
                        "duplicate room id '{}' in house '{}'",
                        room.room_id, house.house_id
                    )));
                }
                if usize::from(room.room_type) >= NUM_ROOM_TYPES {
                    return Err(Error::Data(format!(
                        "room '{}' in house '{}' has room_type {} outside 0..={}",
                        room.room_id,
                        house.house_id,
                        room.room_type,
                        NUM_ROOM_TYPES - 1
                    )));
                }
                if let Some(&bad) = room.tokens.iter().find(|&&t| t >= vocab_size) {
                    return Err(Error::Data(format!(
                        "room '{}' in house '{}' has token id {} outside the vocabulary (size {})",
                        room.room_id, house.house_id, bad, vocab_size
                    )));
                }
            }
        }
        Ok(Self { houses, vocabulary })
    }

    /// Parse the canonical CSV schema. See the module docs for the format.
    pub fn parse_records(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());

        let headers = reader
            .headers()
            .map_err(|e| csv_error_to_parse(&e))?
            .clone();
        let expected = ["house_id", "room_id", "room_type", "artifact_type"];
        let header_fields: Vec<&str> = headers.iter().map(str::trim).collect();
        let has_count = match header_fields.len() {
            4 => false,
            5 if header_fields[4] == "count" => true,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!(
                        "expected header 'house_id,room_id,room_type,artifact_type[,count]', found '{}'",
                        header_fields.join(",")
                    ),
                })
            }
        };
        if header_fields[..4] != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header 'house_id,room_id,room_type,artifact_type[,count]', found '{}'",
                    header_fields.join(",")
                ),
            });
        }

        let mut vocabulary = Vocabulary::new();
        let mut houses: Vec<House> = Vec::new();
        let mut house_index: HashMap<String, usize> = HashMap::new();
        // (house index, room id) -> room index within house
        let mut room_index: HashMap<(usize, String), usize> = HashMap::new();

        for record in reader.records() {
            let record = record.map_err(|e| csv_error_to_parse(&e))?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let parse_err = |message: String| Error::Parse { line, message };

            let house_id = record[0].trim();
            let room_id = record[1].trim();
            let room_type: u8 = record[2]
                .trim()
                .parse()
                .ok()
                .filter(|t| usize::from(*t) < NUM_ROOM_TYPES)
                .ok_or_else(|| {
                    parse_err(format!(
                        "room_type '{}' is not an integer in 0..={}",
                        record[2].trim(),
                        NUM_ROOM_TYPES - 1
                    ))
                })?;
            let artifact = record[3].trim();
            if house_id.is_empty() || room_id.is_empty() || artifact.is_empty() {
                return Err(parse_err(
                    "house_id, room_id, and artifact_type must be non-empty".into(),
                ));
            }
            let count: u64 = if has_count {
                record[4]
                    .trim()
                    .parse()
                    .ok()
                    .filter(|c| *c >= 1)
                    .ok_or_else(|| {
                        parse_err(format!("count '{}' is not an integer >= 1", record[4].trim()))
                    })?
            } else {
                1
            };

            let type_id = vocabulary.intern(artifact);

            let hi = match house_index.get(house_id) {
                Some(&hi) => hi,
                None => {
                    let hi = houses.len();
                    houses.push(House {
                        house_id: house_id.to_string(),
                        name: None,
                        rooms: Vec::new(),
                    });
                    house_index.insert(house_id.to_string(), hi);
                    hi
                }
            };
            let key = (hi, room_id.to_string());
            let ri = match room_index.get(&key) {
                Some(&ri) => {
                    let room = &houses[hi].rooms[ri];
                    if room.room_type != room_type {
                        return Err(parse_err(format!(
                            "room '{}' in house '{}' already has room_type {}, conflicting with {}",
                            room_id, house_id, room.room_type, room_type
                        )));
                    }
                    ri
                }
                None => {
                    let ri = houses[hi].rooms.len();
                    houses[hi].rooms.push(Room {
                        room_id: room_id.to_string(),
                        house_id: house_id.to_string(),
                        room_type,
                        tokens: Vec::new(),
                    });
                    room_index.insert(key, ri);
                    ri
                }
            };
            let room = &mut houses[hi].rooms[ri];
            room.tokens
                .extend(std::iter::repeat_n(type_id, count as usize));
        }

        Ok(Self { houses, vocabulary })
    }

    /// Read and parse a CSV file.
    pub fn parse_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_records(&text)
    }

    pub fn houses(&self) -> &[House] {
        &self.houses
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn n_houses(&self) -> usize {
        self.houses.len()
    }

    pub fn n_rooms(&self) -> usize {
        self.houses.iter().map(|h| h.rooms.len()).sum()
    }

    pub fn n_tokens(&self) -> usize {
        self.houses.iter().map(House::n_tokens).sum()
    }

    /// View over all houses.
    pub fn view(&self) -> CorpusView<'_> {
        CorpusView {
            vocabulary: &self.vocabulary,
            houses: self.houses.iter().collect(),
        }
    }

    /// Serialize back to the canonical CSV schema. Counts are aggregated per
    /// room in first-appearance order, which preserves vocabulary order on
    /// re-parse.
    pub fn to_csv(&self) -> String {
        self.view().to_csv()
    }

    /// SHA-256 of the canonical CSV serialization.
    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_csv().as_bytes())
    }
}

fn csv_error_to_parse(err: &csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        message: err.to_string(),
    }
}

/// A borrowed subset of a corpus's houses. Views share the parent's
/// vocabulary, so token ids mean the same thing in every split.
#[derive(Debug, Clone)]
pub struct CorpusView<'a> {
    vocabulary: &'a Vocabulary,
    houses: Vec<&'a House>,
}

impl<'a> CorpusView<'a> {
    pub fn vocabulary(&self) -> &'a Vocabulary {
        self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn houses(&self) -> &[&'a House] {
        &self.houses
    }

    pub fn n_houses(&self) -> usize {
        self.houses.len()
    }

    /// Rooms across all houses, in house order then room order. This is the
    /// room indexing every sampler state and snapshot uses.
    pub fn rooms(&self) -> impl Iterator<Item = &'a Room> + '_ {
        self.houses.iter().flat_map(|h| h.rooms.iter())
    }

    pub fn n_rooms(&self) -> usize {
        self.houses.iter().map(|h| h.rooms.len()).sum()
    }

    pub fn n_tokens(&self) -> usize {
        self.houses.iter().map(|h| h.n_tokens()).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("house_id,room_id,room_type,artifact_type,count\n");
        for house in &self.houses {
            for room in &house.rooms {
                // Aggregate counts per type, keeping first-appearance order.
                let mut order: Vec<u32> = Vec::new();
                let mut counts: HashMap<u32, u64> = HashMap::new();
                for &t in &room.tokens {
                    let entry = counts.entry(t).or_insert(0);
                    if *entry == 0 {
                        order.push(t);
                    }
                    *entry += 1;
                }
                for t in order {
                    let label = self.vocabulary.label(t).unwrap_or("");
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        csv_field(&house.house_id),
                        csv_field(&room.room_id),
                        room.room_type,
                        csv_field(label),
                        counts[&t]
                    );
                }
            }
        }
        out
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_csv().as_bytes())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One fold of leave-one-out cross validation over houses.
#[derive(Debug, Clone)]
pub struct LooSplit<'a> {
    pub fold_index: usize,
    pub held_out_house: &'a str,
    pub train: CorpusView<'a>,
    pub test: CorpusView<'a>,
}

/// One split per house, in house order; each train set holds all other
/// houses. Splits are views: vocabulary ids are never re-indexed.
pub fn loo_splits(corpus: &Corpus) -> Result<Vec<LooSplit<'_>>> {
    if corpus.n_houses() < 2 {
        return Err(Error::Data(format!(
            "leave-one-out needs at least 2 houses, corpus has {}",
            corpus.n_houses()
        )));
    }
    let splits = corpus
        .houses
        .iter()
        .enumerate()
        .map(|(fold_index, held)| {
            let train: Vec<&House> = corpus
                .houses
                .iter()
                .filter(|h| h.house_id != held.house_id)
                .collect();
            LooSplit {
                fold_index,
                held_out_house: &held.house_id,
                train: CorpusView {
                    vocabulary: &corpus.vocabulary,
                    houses: train,
                },
                test: CorpusView {
                    vocabulary: &corpus.vocabulary,
                    houses: vec![held],
                },
            }
        })
        .collect();
    Ok(splits)
}

/// Per-house sizes and per-room-type frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub houses: Vec<HouseSummary>,
    /// Number of rooms of each architectural type.
    pub room_type_counts: Vec<usize>,
    pub n_houses: usize,
    pub n_rooms: usize,
    pub n_tokens: usize,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HouseSummary {
    pub house_id: String,
    pub n_rooms: usize,
    pub n_tokens: usize,
}

pub fn summarize(corpus: &Corpus) -> CorpusSummary {
    let mut room_type_counts = vec![0usize; NUM_ROOM_TYPES];
    let mut houses = Vec::with_capacity(corpus.n_houses());
    for house in &corpus.houses {
        for room in &house.rooms {
            room_type_counts[usize::from(room.room_type)] += 1;
        }
        houses.push(HouseSummary {
            house_id: house.house_id.clone(),
            n_rooms: house.rooms.len(),
            n_tokens: house.n_tokens(),
        });
    }
    CorpusSummary {
        houses,
        room_type_counts,
        n_houses: corpus.n_houses(),
        n_rooms: corpus.n_rooms(),
        n_tokens: corpus.n_tokens(),
        vocab_size: corpus.vocabulary.len(),
    }
}

/// Optional sidecar `room_type,label` CSV with display names for room types.
pub fn parse_type_labels(text: &str) -> Result<HashMap<u8, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error_to_parse(&e))?.clone();
    let fields: Vec<&str> = headers.iter().map(str::trim).collect();
    if fields != ["room_type", "label"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header 'room_type,label', found '{}'", fields.join(",")),
        });
    }
    let mut labels = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error_to_parse(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let t: u8 = record[0]
            .trim()
            .parse()
            .ok()
            .filter(|t| usize::from(*t) < NUM_ROOM_TYPES)
            .ok_or_else(|| Error::Parse {
                line,
                message: format!(
                    "room_type '{}' is not an integer in 0..={}",
                    record[0].trim(),
                    NUM_ROOM_TYPES - 1
                ),
            })?;
        if labels.insert(t, record[1].trim().to_string()).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate label for room_type {t}"),
            });
        }
    }
    Ok(labels)
}

// Deserialized vocabularies arrive without their lookup index; rebuild it.
pub(crate) fn finish_vocabulary(vocab: &mut Vocabulary) -> Result<()> {
    vocab.rebuild_index();
    if vocab.index.len() != vocab.labels.len() {
        return Err(Error::Data("vocabulary contains duplicate labels".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
house_id,room_id,room_type,artifact_type,count
h1,r1,3,coin,2
h1,r1,3,amphora,3
h1,r2,4,lamp,1
h2,r1,14,hearth,1
";

    #[test]
    fn counts_expand_to_tokens() {
        // Hand expansion: 2 coins + 3 amphorae in h1/r1.
        let corpus = Corpus::parse_records(SMALL).unwrap();
        assert_eq!(corpus.n_houses(), 2);
        let r1 = &corpus.houses()[0].rooms[0];
        assert_eq!(r1.n_tokens(), 5);
        assert_eq!(r1.tokens, vec![0, 0, 1, 1, 1]);
        assert_eq!(corpus.vocabulary().label(0), Some("coin"));
        assert_eq!(corpus.vocabulary().label(1), Some("amphora"));
        assert_eq!(corpus.n_tokens(), 7);
    }

    #[test]
    fn header_only_is_empty_corpus() {
        let corpus =
            Corpus::parse_records("house_id,room_id,room_type,artifact_type,count\n").unwrap();
        assert_eq!(corpus.n_houses(), 0);
        assert!(corpus.vocabulary().is_empty());
        let summary = summarize(&corpus);
        assert_eq!(summary.n_tokens, 0);
        assert!(summary.room_type_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn count_column_is_optional() {
        let corpus =
            Corpus::parse_records("house_id,room_id,room_type,artifact_type\nh1,r1,3,coin\n")
                .unwrap();
        assert_eq!(corpus.n_tokens(), 1);
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        let text = "house_id,room_id,room_type,artifact_type,count\nh1,r1,3,coin,2\nh1,r1,3,lamp,0\n";
        match Corpus::parse_records(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("count"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn room_type_out_of_range_is_rejected() {
        let text = "house_id,room_id,room_type,artifact_type,count\nh1,r1,23,coin,1\n";
        assert!(matches!(
            Corpus::parse_records(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn conflicting_room_type_is_rejected() {
        let text = "house_id,room_id,room_type,artifact_type,count\n\
                    h1,r1,3,coin,1\nh1,r1,4,lamp,1\n";
        match Corpus::parse_records(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("conflicting"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(matches!(
            Corpus::parse_records("house,room,type,artifact\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(Corpus::parse_records(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn crlf_is_accepted() {
        let text = "house_id,room_id,room_type,artifact_type,count\r\nh1,r1,3,coin,2\r\n";
        let corpus = Corpus::parse_records(text).unwrap();
        assert_eq!(corpus.n_tokens(), 2);
    }

    #[test]
    fn loo_splits_cover_every_house() {
        let corpus = Corpus::parse_records(SMALL).unwrap();
        let splits = loo_splits(&corpus).unwrap();
        assert_eq!(splits.len(), 2);
        for (i, split) in splits.iter().enumerate() {
            assert_eq!(split.fold_index, i);
            assert_eq!(split.test.n_houses(), 1);
            assert_eq!(split.train.n_houses(), 1);
            assert_ne!(split.train.houses()[0].house_id, split.held_out_house);
            // Views share the parent vocabulary: ids never shift.
            assert_eq!(split.train.vocabulary().id("coin"), Some(0));
        }
    }

    #[test]
    fn loo_needs_two_houses() {
        let one = "house_id,room_id,room_type,artifact_type,count\nh1,r1,3,coin,1\n";
        let corpus = Corpus::parse_records(one).unwrap();
        assert!(matches!(loo_splits(&corpus), Err(Error::Data(_))));
    }

    #[test]
    fn summarize_counts_match() {
        let corpus = Corpus::parse_records(SMALL).unwrap();
        let summary = summarize(&corpus);
        assert_eq!(summary.houses[0].n_rooms, 2);
        assert_eq!(summary.houses[0].n_tokens, 6);
        assert_eq!(summary.houses[1].n_tokens, 1);
        assert_eq!(summary.room_type_counts[3], 1);
        assert_eq!(summary.room_type_counts[4], 1);
        assert_eq!(summary.room_type_counts[14], 1);
        // Per-house token totals add up to the corpus total.
        let total: usize = summary.houses.iter().map(|h| h.n_tokens).sum();
        assert_eq!(total, summary.n_tokens);
    }

    #[test]
    fn round_trip_preserves_corpus() {
        let corpus = Corpus::parse_records(SMALL).unwrap();
        let reparsed = Corpus::parse_records(&corpus.to_csv()).unwrap();
        assert_eq!(corpus, reparsed);
        assert_eq!(corpus.content_hash(), reparsed.content_hash());
    }

    #[test]
    fn quoted_labels_round_trip() {
        let text = "house_id,room_id,room_type,artifact_type,count\n\
                    h1,r1,3,\"jar, large\",2\n";
        let corpus = Corpus::parse_records(text).unwrap();
        assert_eq!(corpus.vocabulary().label(0), Some("jar, large"));
        let reparsed = Corpus::parse_records(&corpus.to_csv()).unwrap();
        assert_eq!(corpus, reparsed);
    }

    #[test]
    fn from_parts_validates() {
        let vocab = Vocabulary::from_labels(["coin"]).unwrap();
        let bad_house = House {
            house_id: "h1".into(),
            name: None,
            rooms: vec![Room {
                room_id: "r1".into(),
                house_id: "h2".into(),
                room_type: 3,
                tokens: vec![0],
            }],
        };
        assert!(Corpus::from_parts(vocab.clone(), vec![bad_house]).is_err());

        let bad_token = House {
            house_id: "h1".into(),
            name: None,
            rooms: vec![Room {
                room_id: "r1".into(),
                house_id: "h1".into(),
                room_type: 3,
                tokens: vec![5],
            }],
        };
        assert!(Corpus::from_parts(vocab, vec![bad_token]).is_err());
    }

    #[test]
    fn type_label_sidecar_parses() {
        let labels = parse_type_labels("room_type,label\n3,front hall\n4,small closed room\n").unwrap();
        assert_eq!(labels[&3], "front hall");
        assert!(parse_type_labels("room_type,label\n25,bogus\n").is_err());
        assert!(parse_type_labels("room_type,label\n3,a\n3,b\n").is_err());
    }
}
