use std::fmt;

use crate::evidence::ProbabilityVector;
use crate::{Error, Result};

/// The `k` most confident labels of a prediction, most confident first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<usize>);

impl Signature {
    /// Validate an explicit label tuple against a class count.
    pub fn new(labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.is_empty() || labels.len() > classes {
            return Err(Error::param(format!(
                "signature length {} outside [1, {classes}]",
                labels.len()
            )));
        }
        for (i, &l) in labels.iter().enumerate() {
            if l >= classes {
                return Err(Error::param(format!("label {l} >= {classes} classes")));
            }
            if labels[..i].contains(&l) {
                return Err(Error::param(format!("label {l} repeated in signature")));
            }
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of ordered `k`-tuples of distinct labels out of `classes`.
    pub fn universe_size(classes: usize, k: usize) -> Option<usize> {
        if k == 0 || k > classes {
            return None;
        }
        (classes - k + 1..=classes).try_fold(1usize, |acc, c| acc.checked_mul(c))
    }

    /// Position of this signature in the ordered-tuple universe.
    ///
    /// Mixed radix: the label at position `j` contributes its index among the
    /// labels not used at positions `< j`, with radix `classes - j`.
    pub fn rank(&self, classes: usize) -> usize {
        let mut rank = 0usize;
        for (j, &label) in self.0.iter().enumerate() {
            let smaller_used = self.0[..j].iter().filter(|&&u| u < label).count();
            rank = rank * (classes - j) + (label - smaller_used);
        }
        rank
    }

    /// Inverse of [`Signature::rank`].
    pub fn unrank(mut rank: usize, classes: usize, k: usize) -> Self {
        let mut digits = vec![0usize; k];
        for j in (0..k).rev() {
            let radix = classes - j;
            digits[j] = rank % radix;
            rank /= radix;
        }
        let mut free: Vec<usize> = (0..classes).collect();
        Self(digits.into_iter().map(|d| free.remove(d)).collect())
    }

    /// Parse the hyphen-joined form used in table files.
    pub fn parse(text: &str, classes: usize) -> Result<Self> {
        let labels = text
            .split('-')
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                what: "signature",
                detail: format!("{text:?}: {e}"),
            })?;
        Self::new(labels, classes)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Indices of the `k` largest entries, descending; equal entries keep
/// ascending class order.
pub fn compute_signature(p: &ProbabilityVector, k: usize) -> Result<Signature> {
    let classes = p.classes();
    if k == 0 || k > classes {
        return Err(Error::param(format!("k = {k} outside [1, {classes}]")));
    }
    let probs = p.as_slice();
    let mut order: Vec<usize> = (0..classes).collect();
    // stable sort keeps ascending index among ties
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    order.truncate(k);
    Ok(Signature(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn worked_example() {
        let p = pv(&[0.0, 0.0, 0.1, 0.3, 0.4, 0.15, 0.05, 0.0, 0.0, 0.0]);
        let s = compute_signature(&p, 3).unwrap();
        assert_eq!(s.labels(), &[4, 3, 5]);
        assert_eq!(s.to_string(), "4-3-5");
    }

    #[test]
    fn ties_resolve_to_lower_index() {
        assert_eq!(compute_signature(&pv(&[1.0, 0.0, 0.0]), 2).unwrap().labels(), &[0, 1]);
        assert_eq!(compute_signature(&pv(&[0.25; 4]), 1).unwrap().labels(), &[0]);
    }

    #[test]
    fn k_out_of_range() {
        let p = pv(&[0.5, 0.5]);
        assert!(compute_signature(&p, 0).is_err());
        assert!(compute_signature(&p, 3).is_err());
    }

    #[test]
    fn universe_sizes() {
        assert_eq!(Signature::universe_size(10, 3), Some(720));
        assert_eq!(Signature::universe_size(3, 1), Some(3));
        assert_eq!(Signature::universe_size(4, 4), Some(24));
        assert_eq!(Signature::universe_size(4, 5), None);
    }

    #[test]
    fn rank_enumerates_universe() {
        for (c, k) in [(4, 2), (5, 3), (3, 3), (6, 1)] {
            let u = Signature::universe_size(c, k).unwrap();
            let mut seen = vec![false; u];
            for r in 0..u {
                let s = Signature::unrank(r, c, k);
                assert!(Signature::new(s.labels().to_vec(), c).is_ok());
                assert_eq!(s.rank(c), r);
                seen[r] = true;
            }
            assert!(seen.iter().all(|&b| b));
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let s = Signature::parse("4-3-5", 10).unwrap();
        assert_eq!(s.labels(), &[4, 3, 5]);
        assert!(Signature::parse("4-4", 10).is_err());
        assert!(Signature::parse("4-x", 10).is_err());
        assert!(Signature::parse("11", 10).is_err());
    }

    proptest! {
        #[test]
        fn signature_is_sorted_prefix(raw in prop::collection::vec(0.0f64..1.0, 2..8), k in 1usize..8) {
            let total: f64 = raw.iter().sum::<f64>() + 1e-3;
            let probs: Vec<f64> = raw.iter().map(|v| (v + 1e-3 / raw.len() as f64) / total).collect();
            let p = ProbabilityVector::new(probs.clone()).unwrap();
            let k = k.min(probs.len());
            let s = compute_signature(&p, k).unwrap();
            prop_assert_eq!(s.len(), k);
            for w in s.labels().windows(2) {
                prop_assert!(probs[w[0]] > probs[w[1]] || (probs[w[0]] == probs[w[1]] && w[0] < w[1]));
            }
            let min_in = s.labels().iter().map(|&l| probs[l]).fold(f64::INFINITY, f64::min);
            for l in (0..probs.len()).filter(|l| !s.labels().contains(l)) {
                prop_assert!(probs[l] <= min_in);
            }
        }
    }
}
