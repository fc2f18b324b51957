//! Evaluation harness: METEOR, comprehensibility, learning-curve rate, MIA
//! ideograph-effectiveness indices, embedding similarity and column
//! statistics. Everything but the cosine is generic over [`Scalar`].

mod io;
mod meteor;
mod mia;
mod stats;
mod sts;

pub use io::{read_column, read_eval_records, read_mia_responses, write_mia_responses};
pub use meteor::{
    align, count_chunks, meteor, meteor_tokens, Alignment, MatchKind, MatchResources, MeteorScore, SynonymTable,
};
pub use mia::{mia, mia_fixture, Association, MiaResponse, MiaScores, MiaTarget};
pub use stats::{column_stats, ColumnStats};
pub use sts::{cosine, sts_score, EmbeddingProvider, VectorReplay};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::provider::ProviderError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("no records for day {0}")]
    NoRecordsForDay(u32),
    #[error("duplicate record for participant `{participant}`, day {day}, message `{message}`")]
    DuplicateRecord {
        participant: String,
        day: u32,
        message: String,
    },
    #[error("baseline comprehensibility is zero; the learning-curve rate is undefined")]
    UndefinedBaseline,
    #[error("threshold must be positive")]
    InvalidThreshold,
    #[error("no responses")]
    EmptyInput,
    #[error("rating {value} for item `{item}` is outside 0..=10")]
    RatingOutOfRange { item: String, value: u8 },
    #[error("embedding of `{0}` has zero length")]
    ZeroVector(String),
    #[error("embeddings differ in dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
}

/// One participant's interpretation of one message on one day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub participant_id: String,
    pub day: u32,
    pub message_id: String,
    pub interpretation: String,
    pub reference: String,
}

/// Mean over participants of each participant's mean METEOR for `day`.
pub fn comprehensibility<S: Scalar>(records: &[EvalRecord], day: u32, res: &MatchResources) -> Result<S, MetricError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((&r.participant_id, r.day, &r.message_id)) {
            return Err(MetricError::DuplicateRecord {
                participant: r.participant_id.clone(),
                day: r.day,
                message: r.message_id.clone(),
            });
        }
    }
    let mut per_participant: BTreeMap<&str, Vec<S>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.day == day) {
        per_participant
            .entry(&r.participant_id)
            .or_default()
            .push(meteor::<S>(&r.interpretation, &r.reference, res).score);
    }
    if per_participant.is_empty() {
        return Err(MetricError::NoRecordsForDay(day));
    }
    let mean = |xs: &[S]| xs.iter().fold(S::zero(), |a, &b| a + b) / S::from_count(xs.len());
    let means: Vec<S> = per_participant.values().map(|v| mean(v)).collect();
    Ok(mean(&means))
}

/// Learning-curve rate: relative gain from day 1 to day 5, weighted by how
/// close day 5 lands to the threshold `t`.
pub fn lcr<S: Scalar>(c1: S, c5: S, t: S) -> Result<S, MetricError> {
    if c1.is_zero() {
        return Err(MetricError::UndefinedBaseline);
    }
    if t <= S::zero() {
        return Err(MetricError::InvalidThreshold);
    }
    let weight = S::one() - (c5 - t).abs() / t;
    Ok((c5 - c1) / c1 * weight)
}

/// Default learning-efficiency threshold.
pub fn default_threshold<S: Scalar>() -> S {
    S::ratio(9, 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn rec(p: &str, day: u32, m: &str, i: &str, r: &str) -> EvalRecord {
        EvalRecord {
            participant_id: p.into(),
            day,
            message_id: m.into(),
            interpretation: i.into(),
            reference: r.into(),
        }
    }

    #[test]
    fn lcr_values() {
        let t = default_threshold::<f64>();
        assert_eq!(lcr(0.5, 0.5, t).unwrap(), 0.0);
        assert!((lcr(0.62, 0.84, t).unwrap() - 0.3312).abs() < 1e-4);
        assert!((lcr(0.63, 0.82, t).unwrap() - 0.2748).abs() < 1e-4);
        assert_eq!(lcr(0.0, 0.5, t), Err(MetricError::UndefinedBaseline));
        assert_eq!(lcr(0.5, 0.5, 0.0), Err(MetricError::InvalidThreshold));
        // exact: (0.84-0.62)/0.62 * (1 - 0.06/0.9)
        let e = lcr(Exact::new(62, 100), Exact::new(84, 100), default_threshold()).unwrap();
        assert_eq!(e, Exact::new(22, 62) * Exact::new(14, 15));
    }

    #[test]
    fn comprehensibility_means() {
        let res = MatchResources::builtin();
        let one = [rec("p1", 1, "m1", "the cat sat", "the cat sat")];
        assert_eq!(comprehensibility::<f64>(&one, 1, &res).unwrap(), 1.0);
        assert_eq!(
            comprehensibility::<f64>(&one, 2, &res),
            Err(MetricError::NoRecordsForDay(2))
        );

        // p1: mean(1, 0) = 0.5 ; p2: 1 -> overall 0.75
        let recs = [
            rec("p1", 1, "m1", "the cat", "the cat"),
            rec("p1", 1, "m2", "dog", "the cat"),
            rec("p2", 1, "m1", "river", "river"),
            rec("p2", 3, "m1", "x", "y"),
        ];
        assert_eq!(comprehensibility::<Exact>(&recs, 1, &res).unwrap(), Exact::new(3, 4));
        let mut rev = recs.to_vec();
        rev.reverse();
        assert_eq!(comprehensibility::<Exact>(&rev, 1, &res).unwrap(), Exact::new(3, 4));

        let dup = [rec("p1", 1, "m1", "a", "a"), rec("p1", 1, "m1", "b", "b")];
        assert!(matches!(
            comprehensibility::<f64>(&dup, 1, &res),
            Err(MetricError::DuplicateRecord { .. })
        ));
    }
}
