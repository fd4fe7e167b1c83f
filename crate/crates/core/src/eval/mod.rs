//! Word-similarity and analogy benchmarks.

mod analogy;
mod datasets;
mod suite;

pub use analogy::{eval_analogy, eval_analogy_with, predict_analogies, AnalogyOptions};
pub use datasets::{
    load_analogy, load_similarity, read_analogy, read_similarity, AnalogyDataset, AnalogyQuestion,
    SimilarityDataset,
};
pub use suite::{run_suite, Cell, Missing, SuiteTable};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::vector_ops::cosine;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Spearman ρ in `[-1, 1]`.
    Spearman,
    /// Fraction correct in `[0, 1]`.
    Accuracy,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Spearman => "spearman",
            Metric::Accuracy => "accuracy",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub metric: Metric,
    pub value: f64,
    pub covered: usize,
    pub skipped: usize,
}

impl EvalReport {
    /// The value as printed in result tables: ×100.
    pub fn percent(&self) -> f64 {
        self.value * 100.0
    }
}

/// Fractional ranks (1-based); tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with averaged ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Insufficient(format!(
            "spearman needs at least 2 values, got {}",
            x.len()
        )));
    }
    for values in [x, y] {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Insufficient("non-finite value in spearman input".into()));
        }
        if values.iter().all(|&v| v == values[0]) {
            return Err(Error::Insufficient("spearman input is constant".into()));
        }
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

pub(crate) struct SimilarityScores {
    pub covered: usize,
    pub skipped: usize,
    pub rho: Result<f64>,
}

pub(crate) fn score_similarity(set: &EmbeddingSet, data: &SimilarityDataset) -> SimilarityScores {
    let mut model = Vec::with_capacity(data.len());
    let mut human = Vec::with_capacity(data.len());
    for (w1, w2, score) in &data.pairs {
        let (Some(u), Some(v)) = (set.vector(w1), set.vector(w2)) else {
            continue;
        };
        // A zero vector has no direction; it is skipped like an OOV word.
        if let Ok(c) = cosine(u, v) {
            model.push(c);
            human.push(*score);
        }
    }
    let covered = model.len();
    let rho = if covered < 2 {
        Err(Error::Insufficient(format!(
            "{covered} of {} pairs are in the vocabulary",
            data.len()
        )))
    } else {
        spearman(&model, &human)
    };
    SimilarityScores {
        covered,
        skipped: data.len() - covered,
        rho,
    }
}

/// Spearman ρ between cosine similarities and human scores over the pairs
/// whose words are both in the vocabulary. Other pairs are skipped.
pub fn eval_similarity(set: &EmbeddingSet, data: &SimilarityDataset) -> Result<EvalReport> {
    let scores = score_similarity(set, data);
    Ok(EvalReport {
        dataset: data.name.clone(),
        metric: Metric::Spearman,
        value: scores.rho?,
        covered: scores.covered,
        skipped: scores.skipped,
    })
}
