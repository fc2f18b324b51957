//! Multiple-index ideograph effectiveness: hit rate, false-alarm rate,
//! missing associations, subjective certainty and suitability.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Association {
    Valid,
    Invalid,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiaResponse {
    pub item_id: String,
    pub association: Association,
    /// 0..=10
    pub certainty: u8,
    /// 0..=10
    pub suitability: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiaScores<S> {
    pub hr: S,
    pub far: S,
    pub ma: S,
    pub sc: S,
    pub ss: S,
}

pub fn mia<S: Scalar>(responses: &[MiaResponse]) -> Result<MiaScores<S>, MetricError> {
    if responses.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    for r in responses {
        for value in [r.certainty, r.suitability] {
            if value > 10 {
                return Err(MetricError::RatingOutOfRange {
                    item: r.item_id.clone(),
                    value,
                });
            }
        }
    }
    let n = responses.len();
    let count = |a| responses.iter().filter(|r| r.association == a).count();
    let total = |f: fn(&MiaResponse) -> u8| responses.iter().map(|r| f(r) as usize).sum::<usize>();
    Ok(MiaScores {
        hr: S::ratio(count(Association::Valid), n),
        far: S::ratio(count(Association::Invalid), n),
        ma: S::ratio(count(Association::Missing), n),
        sc: S::ratio(total(|r| r.certainty), 10 * n),
        ss: S::ratio(total(|r| r.suitability), 10 * n),
    })
}

/// Aggregate proportions a synthetic questionnaire is built to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiaTarget {
    pub hr: f64,
    pub far: f64,
    pub sc: f64,
    pub ss: f64,
}

/// Responses whose counts are the nearest integers to the target rates;
/// missing associations take the remainder. Ratings are spread so their
/// totals match the targets.
pub fn mia_fixture(target: &MiaTarget, n: usize) -> Vec<MiaResponse> {
    let share = |rate: f64| ((rate * n as f64).round().max(0.0) as usize).min(n);
    let valid = share(target.hr);
    let invalid = share(target.far).min(n - valid);
    let spread = |rate: f64| {
        let total = ((rate * 10.0 * n as f64).round().max(0.0) as usize).min(10 * n);
        move |i: usize| (total / n + usize::from(i < total % n)) as u8
    };
    let (cert, suit) = (spread(target.sc), spread(target.ss));
    (0..n)
        .map(|i| MiaResponse {
            item_id: format!("q{:04}", i + 1),
            association: if i < valid {
                Association::Valid
            } else if i < valid + invalid {
                Association::Invalid
            } else {
                Association::Missing
            },
            certainty: cert(i),
            suitability: suit(i),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn resp(a: Association, c: u8, s: u8) -> MiaResponse {
        MiaResponse {
            item_id: "i".into(),
            association: a,
            certainty: c,
            suitability: s,
        }
    }

    #[test]
    fn arithmetic() {
        let s = mia::<f64>(&[resp(Association::Valid, 10, 10)]).unwrap();
        assert_eq!((s.hr, s.far, s.ma, s.sc, s.ss), (1.0, 0.0, 0.0, 1.0, 1.0));
        let s = mia::<Exact>(&[resp(Association::Valid, 10, 4), resp(Association::Invalid, 0, 6)]).unwrap();
        let half = Exact::new(1, 2);
        assert_eq!(
            (s.hr, s.far, s.ma, s.sc, s.ss),
            (half, half, Exact::from_count(0), half, half)
        );
        assert_eq!(mia::<f64>(&[]), Err(MetricError::EmptyInput));
        assert!(matches!(
            mia::<f64>(&[resp(Association::Missing, 11, 0)]),
            Err(MetricError::RatingOutOfRange { value: 11, .. })
        ));
    }

    #[test]
    fn fixture_hits_representable_targets() {
        let t = MiaTarget {
            hr: 0.75,
            far: 0.125,
            sc: 0.6,
            ss: 0.55,
        };
        let s = mia::<Exact>(&mia_fixture(&t, 40)).unwrap();
        assert_eq!(s.hr, Exact::new(3, 4));
        assert_eq!(s.far, Exact::new(1, 8));
        assert_eq!(s.ma, Exact::new(1, 8));
        assert_eq!(s.sc, Exact::new(3, 5));
        assert_eq!(s.ss, Exact::new(11, 20));
    }
}
