//! CosAdd analogy solving by exact brute-force search.
//!
//! For `a : b :: c : ?` the query is `b - a + c`, taken from the stored
//! vectors without re-normalization, and the answer is the vocabulary word
//! with the highest cosine to it. Scores are computed as tiles of a
//! query-block × vocabulary-block matrix product; per query only the
//! running best is kept.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::{AnalogyDataset, EvalReport, Metric};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::vector_ops::{norm, ZERO_NORM_TOLERANCE};

const QUERY_BLOCK: usize = 64;
const VOCAB_BLOCK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalogyOptions {
    /// Never answer with one of the three query words.
    pub exclude_query_words: bool,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            exclude_query_words: true,
        }
    }
}

/// Best answer for each `[a, b, c]` row-index triple, or `None` when the
/// query vector is zero or no candidate is left.
///
/// Ties go to the lowest vocabulary index. Rows with zero norm are never
/// returned.
pub fn predict_analogies(
    set: &EmbeddingSet,
    queries: &[[usize; 3]],
    options: AnalogyOptions,
) -> Vec<Option<usize>> {
    let dim = set.dim();
    let n = set.len();
    if n == 0 {
        return vec![None; queries.len()];
    }
    let inv_norms: Vec<f64> = set
        .rows()
        .map(|r| {
            let nr = norm(r);
            if nr > ZERO_NORM_TOLERANCE {
                1.0 / nr
            } else {
                0.0
            }
        })
        .collect();
    let vocab = ArrayView2::from_shape((n, dim), set.matrix()).expect("row-major matrix");

    queries
        .par_chunks(QUERY_BLOCK)
        .flat_map_iter(|block| {
            let mut q = Array2::<f64>::zeros((block.len(), dim));
            let mut live = vec![true; block.len()];
            for (i, &[a, b, c]) in block.iter().enumerate() {
                let (ra, rb, rc) = (set.row(a), set.row(b), set.row(c));
                let mut row = q.row_mut(i);
                for (j, x) in row.iter_mut().enumerate() {
                    *x = rb[j] - ra[j] + rc[j];
                }
                live[i] = norm(row.as_slice().unwrap()) > ZERO_NORM_TOLERANCE;
            }

            let mut best: Vec<Option<(usize, f64)>> = vec![None; block.len()];
            let mut scores = Array2::<f64>::zeros((block.len(), VOCAB_BLOCK.min(n)));
            for start in (0..n).step_by(VOCAB_BLOCK) {
                let end = (start + VOCAB_BLOCK).min(n);
                let tile = vocab.slice(ndarray::s![start..end, ..]);
                let mut out = scores.slice_mut(ndarray::s![.., ..end - start]);
                general_mat_mul(1.0, &q, &tile.t(), 0.0, &mut out);
                for (i, query) in block.iter().enumerate() {
                    if !live[i] {
                        continue;
                    }
                    let row = out.row(i);
                    for (offset, &dotp) in row.iter().enumerate() {
                        let j = start + offset;
                        let inv = inv_norms[j];
                        if inv == 0.0 || (options.exclude_query_words && query.contains(&j)) {
                            continue;
                        }
                        let score = dotp * inv;
                        if best[i].is_none_or(|(_, s)| score > s) {
                            best[i] = Some((j, score));
                        }
                    }
                }
            }
            best.into_iter().map(|b| b.map(|(j, _)| j))
        })
        .collect()
}

/// CosAdd accuracy with the default options (query words excluded).
pub fn eval_analogy(set: &EmbeddingSet, data: &AnalogyDataset) -> Result<EvalReport> {
    eval_analogy_with(set, data, AnalogyOptions::default())
}

pub(crate) struct AnalogyScores {
    pub covered: usize,
    pub skipped: usize,
    pub correct: usize,
}

pub(crate) fn score_analogy(
    set: &EmbeddingSet,
    data: &AnalogyDataset,
    options: AnalogyOptions,
) -> AnalogyScores {
    let mut queries = Vec::new();
    let mut answers = Vec::new();
    for q in &data.questions {
        if let (Some(a), Some(b), Some(c), Some(d)) = (
            set.index_of(&q.a),
            set.index_of(&q.b),
            set.index_of(&q.c),
            set.index_of(&q.d),
        ) {
            queries.push([a, b, c]);
            answers.push(d);
        }
    }
    let predictions = predict_analogies(set, &queries, options);
    let correct = predictions
        .iter()
        .zip(&answers)
        .filter(|(p, d)| **p == Some(**d))
        .count();
    AnalogyScores {
        covered: queries.len(),
        skipped: data.len() - queries.len(),
        correct,
    }
}

/// Fraction of questions with all four words in the vocabulary whose CosAdd
/// answer is exactly `d`. Other questions are skipped.
pub fn eval_analogy_with(
    set: &EmbeddingSet,
    data: &AnalogyDataset,
    options: AnalogyOptions,
) -> Result<EvalReport> {
    let scores = score_analogy(set, data, options);
    if scores.covered == 0 {
        return Err(Error::Insufficient(format!(
            "none of the {} questions is fully in the vocabulary",
            data.len()
        )));
    }
    Ok(EvalReport {
        dataset: data.name.clone(),
        metric: Metric::Accuracy,
        value: scores.correct as f64 / scores.covered as f64,
        covered: scores.covered,
        skipped: scores.skipped,
    })
}
