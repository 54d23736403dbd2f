use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evidence::{compute_signature, ProbabilityVector, Signature};
use crate::{Error, Result};

/// Largest signature universe stored densely.
const MAX_UNIVERSE: usize = 1 << 22;

/// Class-conditional signature frequencies with additive smoothing.
///
/// `Pr(sig | H_i) = (count_i(sig) + s) / (n_i + s * U)` where `U` is the
/// number of ordered `k`-tuples of distinct labels. Raw counts are kept so the
/// table can be persisted and re-smoothed; probabilities are derived on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    k: usize,
    classes: usize,
    smoothing: f64,
    universe: usize,
    /// `counts[class][rank]`
    counts: Vec<Vec<u64>>,
    totals: Vec<u64>,
    /// `probs[rank * classes + class]`, so one signature's likelihoods are contiguous.
    probs: Vec<f64>,
}

impl LikelihoodTable {
    fn from_counts(k: usize, smoothing: f64, counts: Vec<Vec<u64>>) -> Result<Self> {
        if !(smoothing >= 0.0 && smoothing.is_finite()) {
            return Err(Error::param(format!("smoothing {smoothing} must be >= 0")));
        }
        let classes = counts.len();
        let universe = checked_universe(classes, k)?;
        let totals: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
        if let Some(class) = totals.iter().position(|&t| t == 0) {
            return Err(Error::EmptyClass { class });
        }
        let mut probs = vec![0.0; universe * classes];
        for (class, row) in counts.iter().enumerate() {
            let denom = totals[class] as f64 + smoothing * universe as f64;
            for (rank, &n) in row.iter().enumerate() {
                probs[rank * classes + class] = (n as f64 + smoothing) / denom;
            }
        }
        Ok(Self {
            k,
            classes,
            smoothing,
            universe,
            counts,
            totals,
            probs,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    /// Number of training predictions behind hypothesis `class`.
    pub fn total(&self, class: usize) -> u64 {
        self.totals[class]
    }

    /// Signatures observed at least once under hypothesis `class`.
    pub fn distinct(&self, class: usize) -> usize {
        self.counts[class].iter().filter(|&&n| n > 0).count()
    }

    pub fn count(&self, class: usize, sig: &Signature) -> u64 {
        self.counts[class][sig.rank(self.classes)]
    }

    /// `Pr(sig | H_class)`.
    pub fn likelihood(&self, class: usize, sig: &Signature) -> f64 {
        self.likelihoods(sig)[class]
    }

    /// `Pr(sig | H_i)` for every hypothesis `i`.
    pub fn likelihoods(&self, sig: &Signature) -> &[f64] {
        self.likelihoods_by_rank(sig.rank(self.classes))
    }

    pub(crate) fn likelihoods_by_rank(&self, rank: usize) -> &[f64] {
        &self.probs[rank * self.classes..(rank + 1) * self.classes]
    }

    /// Same counts, different pseudo-count.
    pub fn with_smoothing(&self, smoothing: f64) -> Result<Self> {
        Self::from_counts(self.k, smoothing, self.counts.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            format: FORMAT.into(),
            version: VERSION,
            k: self.k,
            classes: self.classes,
            smoothing: self.smoothing,
            counts: self
                .counts
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &n)| n > 0)
                        .map(|(rank, &n)| {
                            (Signature::unrank(rank, self.classes, self.k).to_string(), n)
                        })
                        .collect()
                })
                .collect(),
            totals: self.totals.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::Format {
                what: "likelihood table",
                detail: format!("unsupported format {} v{}", file.format, file.version),
            });
        }
        if file.counts.len() != file.classes || file.totals.len() != file.classes {
            return Err(Error::Format {
                what: "likelihood table",
                detail: format!("expected {} per-class entries", file.classes),
            });
        }
        let universe = checked_universe(file.classes, file.k)?;
        let mut counts = vec![vec![0u64; universe]; file.classes];
        for (class, map) in file.counts.iter().enumerate() {
            for (key, &n) in map {
                let sig = Signature::parse(key, file.classes)?;
                if sig.len() != file.k {
                    return Err(Error::Format {
                        what: "likelihood table",
                        detail: format!("signature {key} has length {} != k", sig.len()),
                    });
                }
                counts[class][sig.rank(file.classes)] = n;
            }
            let sum: u64 = counts[class].iter().sum();
            if sum != file.totals[class] {
                return Err(Error::Format {
                    what: "likelihood table",
                    detail: format!(
                        "class {class} total {} != sum of counts {sum}",
                        file.totals[class]
                    ),
                });
            }
        }
        Self::from_counts(file.k, file.smoothing, counts)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn checked_universe(classes: usize, k: usize) -> Result<usize> {
    match Signature::universe_size(classes, k) {
        Some(u) if u <= MAX_UNIVERSE => Ok(u),
        Some(u) => Err(Error::param(format!(
            "signature universe {u} for C={classes}, k={k} is too large"
        ))),
        None => Err(Error::param(format!("k = {k} outside [1, {classes}]"))),
    }
}

const FORMAT: &str = "dddm-likelihood-table";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TableFile {
    format: String,
    version: u32,
    k: usize,
    #[serde(rename = "C")]
    classes: usize,
    smoothing: f64,
    counts: Vec<BTreeMap<String, u64>>,
    totals: Vec<u64>,
}

/// Accumulates signature counts one prediction at a time.
#[derive(Debug, Clone)]
pub struct LikelihoodTableBuilder {
    k: usize,
    classes: usize,
    counts: Vec<Vec<u64>>,
}

impl LikelihoodTableBuilder {
    pub fn new(classes: usize, k: usize) -> Result<Self> {
        let universe = checked_universe(classes, k)?;
        Ok(Self {
            k,
            classes,
            counts: vec![vec![0; universe]; classes],
        })
    }

    pub fn observe(&mut self, sig: &Signature, label: usize) -> Result<()> {
        if label >= self.classes {
            return Err(Error::param(format!("label {label} >= {} classes", self.classes)));
        }
        if sig.len() != self.k {
            return Err(Error::param(format!("signature length {} != k = {}", sig.len(), self.k)));
        }
        self.counts[label][sig.rank(self.classes)] += 1;
        Ok(())
    }

    pub fn observe_prediction(&mut self, p: &ProbabilityVector, label: usize) -> Result<()> {
        if p.classes() != self.classes {
            return Err(Error::Dimension {
                expected: self.classes,
                got: p.classes(),
            });
        }
        let sig = compute_signature(p, self.k)?;
        self.observe(&sig, label)
    }

    /// Fold another builder's counts into this one.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.k != self.k || other.classes != self.classes {
            return Err(Error::param("cannot merge builders with different shapes"));
        }
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn build(&self, smoothing: f64) -> Result<LikelihoodTable> {
        LikelihoodTable::from_counts(self.k, smoothing, self.counts.clone())
    }
}

/// Tabulate signature frequencies from labeled predictions.
pub fn build_likelihood_table(
    predictions: &[(ProbabilityVector, usize)],
    k: usize,
    smoothing: f64,
) -> Result<LikelihoodTable> {
    let classes = predictions
        .first()
        .ok_or_else(|| Error::param("no predictions to tabulate"))?
        .0
        .classes();
    let mut builder = LikelihoodTableBuilder::new(classes, k)?;
    for (p, label) in predictions {
        builder.observe_prediction(p, *label)?;
    }
    builder.build(smoothing)
}
