use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Allowed deviation of a probability vector's sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// One classifier output: `C` confidences in `[0, 1]` summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities("empty vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidProbabilities(format!(
                "entry {i} = {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbabilities(format!(
                "entries sum to {sum}"
            )));
        }
        Ok(Self(probs))
    }

    /// Softmax of raw scores, shifted by the max for stability.
    pub fn softmax(logits: &[f64]) -> Result<Self> {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidProbabilities(
                "non-finite logits".into(),
            ));
        }
        let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Self::new(exps.into_iter().map(|e| e / total).collect())
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Most confident class, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `L` probability vectors over the same `C` classes, absorbed in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    rows: Vec<ProbabilityVector>,
}

impl Trial {
    pub fn new(rows: Vec<ProbabilityVector>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::param("a trial needs at least one row"))?;
        let classes = first.classes();
        if let Some(bad) = rows.iter().find(|r| r.classes() != classes) {
            return Err(Error::Dimension {
                expected: classes,
                got: bad.classes(),
            });
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ProbabilityVector] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.rows[0].classes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_vectors() {
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.1, -0.1]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 1e-10]).is_ok());
    }

    #[test]
    fn softmax_normalizes() {
        let p = ProbabilityVector::softmax(&[1000.0, 1000.0, -1000.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        assert!(ProbabilityVector::softmax(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn argmax_prefers_low_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.25; 4]), 0);
    }

    #[test]
    fn trial_shapes() {
        let a = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        let b = ProbabilityVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(Trial::new(vec![]).is_err());
        assert!(matches!(
            Trial::new(vec![a.clone(), b]),
            Err(Error::Dimension { expected: 2, got: 3 })
        ));
        assert_eq!(Trial::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn serde_validates() {
        let p: ProbabilityVector = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(p.argmax(), 1);
        assert!(serde_json::from_str::<ProbabilityVector>("[0.25,0.7]").is_err());
    }
}
