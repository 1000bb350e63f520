//! The two single-distribution models: a Dirichlet-smoothed unigram over
//! artifact types (Simple) and its room-type-conditional variant
//! (CondSimple). Both are fit by counting and score rooms with fixed
//! training counts; natural logarithms throughout.

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusView, Room, NUM_ROOM_TYPES};
use crate::error::{Error, Result};

/// Dirichlet-smoothed unigram model. A token of type `a` has probability
/// `(N_a + eta) / (total + |A| * eta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleModel {
    counts: Vec<u64>,
    total: u64,
    eta: f64,
}

impl SimpleModel {
    pub fn from_counts(counts: Vec<u64>, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let total = counts.iter().sum();
        Ok(Self { counts, total, eta })
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Natural-log probability of one token type.
    pub fn token_log_prob(&self, type_id: u32) -> f64 {
        assert!(
            (type_id as usize) < self.counts.len(),
            "token id {} outside vocabulary of size {}",
            type_id,
            self.counts.len()
        );
        let denom = self.total as f64 + self.counts.len() as f64 * self.eta;
        ((self.counts[type_id as usize] as f64 + self.eta) / denom).ln()
    }

    /// Natural-log probability of a room: the product of fixed per-token
    /// probabilities (training counts are not updated within the room).
    pub fn log_prob(&self, room: &Room) -> f64 {
        let denom = (self.total as f64 + self.counts.len() as f64 * self.eta).ln();
        room.tokens
            .iter()
            .map(|&t| {
                assert!(
                    (t as usize) < self.counts.len(),
                    "token id {} outside vocabulary of size {}",
                    t,
                    self.counts.len()
                );
                (self.counts[t as usize] as f64 + self.eta).ln() - denom
            })
            .sum()
    }
}

/// Room-type-conditional unigram: one smoothed distribution per room type.
/// Rows for types never seen in training are pure-smoothing uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondSimpleModel {
    counts_by_type: Vec<Vec<u64>>,
    row_totals: Vec<u64>,
    vocab_size: usize,
    eta: f64,
}

impl CondSimpleModel {
    pub fn from_counts(counts_by_type: Vec<Vec<u64>>, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        if counts_by_type.len() != NUM_ROOM_TYPES {
            return Err(Error::Data(format!(
                "expected {} room-type rows, found {}",
                NUM_ROOM_TYPES,
                counts_by_type.len()
            )));
        }
        let vocab_size = counts_by_type.first().map_or(0, Vec::len);
        if counts_by_type.iter().any(|row| row.len() != vocab_size) {
            return Err(Error::Data("ragged room-type count matrix".into()));
        }
        let row_totals = counts_by_type.iter().map(|r| r.iter().sum()).collect();
        Ok(Self {
            counts_by_type,
            row_totals,
            vocab_size,
            eta,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn counts_by_type(&self) -> &[Vec<u64>] {
        &self.counts_by_type
    }

    /// Natural-log probability of a room under its type's distribution.
    pub fn log_prob(&self, room: &Room) -> f64 {
        let t = usize::from(room.room_type);
        assert!(t < NUM_ROOM_TYPES, "room_type {} outside 0..={}", t, NUM_ROOM_TYPES - 1);
        let row = &self.counts_by_type[t];
        let denom = (self.row_totals[t] as f64 + self.vocab_size as f64 * self.eta).ln();
        room.tokens
            .iter()
            .map(|&a| {
                assert!(
                    (a as usize) < self.vocab_size,
                    "token id {} outside vocabulary of size {}",
                    a,
                    self.vocab_size
                );
                (row[a as usize] as f64 + self.eta).ln() - denom
            })
            .sum()
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Config(format!("eta must be positive and finite, got {eta}")));
    }
    Ok(())
}

/// Count token frequencies over all training rooms.
pub fn fit_simple(train: &CorpusView<'_>, eta: f64) -> Result<SimpleModel> {
    check_eta(eta)?;
    let mut counts = vec![0u64; train.vocab_size()];
    for room in train.rooms() {
        for &t in &room.tokens {
            counts[t as usize] += 1;
        }
    }
    SimpleModel::from_counts(counts, eta)
}

/// Count token frequencies per room type.
pub fn fit_cond(train: &CorpusView<'_>, eta: f64) -> Result<CondSimpleModel> {
    check_eta(eta)?;
    let vocab_size = train.vocab_size();
    let mut counts = vec![vec![0u64; vocab_size]; NUM_ROOM_TYPES];
    for room in train.rooms() {
        let row = &mut counts[usize::from(room.room_type)];
        for &t in &room.tokens {
            row[t as usize] += 1;
        }
    }
    CondSimpleModel::from_counts(counts, eta)
}
