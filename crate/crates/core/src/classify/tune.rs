use std::cmp::Ordering;

use serde::Serialize;

use crate::{Error, Result};

/// Confusion counts for one operating point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_predictions(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (predicted, actual) in pairs {
            c.add(predicted, actual);
        }
        c
    }

    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }

    pub fn metrics(&self) -> Metrics {
        let pct = |num: u64, den: u64| {
            if den == 0 {
                (0.0, false)
            } else {
                (100.0 * num as f64 / den as f64, true)
            }
        };
        let (precision, precision_defined) = pct(self.tp, self.tp + self.fp);
        let (recall, recall_defined) = pct(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f1,
            precision_defined,
            recall_defined,
        }
    }

    /// F1 as an exact fraction `2tp / (2tp + fp + fn)`.
    fn f1_fraction(&self) -> (u64, u64) {
        (2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

/// Precision, recall and F1 in percent. When a denominator is zero the
/// value is reported as 0 and its `*_defined` flag is false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunedThreshold {
    pub threshold: f64,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

fn cmp_fraction(a: (u64, u64), b: (u64, u64)) -> Ordering {
    // a.0/a.1 vs b.0/b.1 with positive denominators
    (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128))
}

/// Picks the posterior cutoff maximizing F1 over all distinct posteriors,
/// classifying positive iff `p >= threshold`. Ties go to the larger
/// threshold.
pub fn tune_threshold(scores: &[(f64, bool)]) -> Result<TunedThreshold> {
    if let Some(&(p, _)) = scores.iter().find(|(p, _)| !p.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite posterior {p}")));
    }
    let positives = scores.iter().filter(|s| s.1).count() as u64;
    if positives == 0 {
        return Err(Error::InvalidInput(
            "threshold tuning needs at least one positive example".into(),
        ));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let negatives = sorted.len() as u64 - positives;
    let mut best: Option<(f64, Confusion)> = None;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let c = Confusion {
            tp,
            fp,
            fn_: positives - tp,
            tn: negatives - fp,
        };
        // descending sweep: only a strictly better F1 displaces a larger threshold
        let better = match &best {
            None => true,
            Some((_, b)) => cmp_fraction(c.f1_fraction(), b.f1_fraction()) == Ordering::Greater,
        };
        if better {
            best = Some((t, c));
        }
    }
    let (threshold, confusion) = best.expect("at least one candidate");
    Ok(TunedThreshold {
        threshold,
        confusion,
        metrics: confusion.metrics(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_example() {
        let t = tune_threshold(&[(0.1, false), (0.4, true), (0.9, true)]).unwrap();
        assert_eq!(t.threshold, 0.4);
        assert_eq!(t.metrics.precision, 100.0);
        assert_eq!(t.metrics.recall, 100.0);
        assert_eq!(t.metrics.f1, 100.0);
    }

    #[test]
    fn all_positive() {
        let t = tune_threshold(&[(0.3, true), (0.2, true), (0.7, true)]).unwrap();
        assert_eq!(t.threshold, 0.2);
        assert_eq!(t.metrics.recall, 100.0);
    }

    #[test]
    fn tie_goes_to_larger_threshold() {
        // t=0.8: tp1 fp0 fn1 -> 2/3; t=0.5: tp2 fp2 fn0 -> 4/6
        let s = [(0.8, true), (0.6, false), (0.55, false), (0.5, true)];
        let t = tune_threshold(&s).unwrap();
        assert_eq!(t.threshold, 0.8);
    }

    #[test]
    fn errors() {
        assert!(tune_threshold(&[(0.3, false)]).is_err());
        assert!(tune_threshold(&[]).is_err());
        assert!(tune_threshold(&[(f64::NAN, true)]).is_err());
    }

    #[test]
    fn undefined_metrics_flagged() {
        let m = Confusion::default().metrics();
        assert!(!m.precision_defined && !m.recall_defined);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }
}
