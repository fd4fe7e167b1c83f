//! Embedding sets and vocabulary alignment.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An ordered vocabulary with one dense `f64` row per token.
///
/// Rows are stored contiguously in row-major order. A set is immutable once
/// built; the transforming methods return new sets.
#[derive(Clone, Debug)]
pub struct EmbeddingSet {
    name: String,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl PartialEq for EmbeddingSet {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.dim == other.dim
            && self.vocab == other.vocab
            && self.data == other.data
    }
}

impl EmbeddingSet {
    /// Builds a set from a vocabulary and a row-major matrix.
    ///
    /// Fails on duplicate tokens, a zero dimension, a matrix whose size does
    /// not match `vocab.len() * dim`, or any non-finite entry.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        vocab: Vec<String>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("dimension must be positive".into()));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::InvalidSet(format!(
                "{} tokens of dimension {} need {} values, got {}",
                vocab.len(),
                dim,
                vocab.len() * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSet(format!(
                "non-finite value in row for {:?}",
                vocab[pos / dim]
            )));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, token) in vocab.iter().enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::InvalidSet(format!("duplicate token {token:?}")));
            }
        }
        Ok(EmbeddingSet {
            name: name.into(),
            vocab,
            index,
            dim,
            data,
        })
    }

    /// Builds a set from `(token, vector)` rows.
    pub fn from_rows<S, I>(name: impl Into<String>, rows: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        let mut vocab = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (token, row) in rows {
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::DimensionMismatch(format!(
                        "row {} has {} values, expected {}",
                        vocab.len(),
                        row.len(),
                        d
                    )))
                }
                _ => {}
            }
            vocab.push(token.into());
            data.extend_from_slice(&row);
        }
        let dim = dim.ok_or(Error::EmptyInput)?;
        Self::new(name, dim, vocab, data)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// The full row-major matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }

    /// Restricts the set to the given row indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> EmbeddingSet {
        let mut vocab = Vec::with_capacity(indices.len());
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            vocab.push(self.vocab[i].clone());
            data.extend_from_slice(self.row(i));
        }
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        EmbeddingSet {
            name: self.name.clone(),
            vocab,
            index,
            dim: self.dim,
            data,
        }
    }

    /// Keeps the tokens for which `keep` returns true.
    pub fn filter<F>(&self, mut keep: F) -> EmbeddingSet
    where
        F: FnMut(&str) -> bool,
    {
        let indices: Vec<usize> = (0..self.len()).filter(|&i| keep(&self.vocab[i])).collect();
        self.select(&indices)
    }

    /// Replaces the matrix, keeping the vocabulary. The new matrix may have a
    /// different dimension.
    pub(crate) fn with_matrix(&self, dim: usize, data: Vec<f64>) -> Result<EmbeddingSet> {
        if dim == 0 || data.len() != self.len() * dim {
            return Err(Error::InvalidSet(format!(
                "matrix of {} values does not fit {} rows of dimension {}",
                data.len(),
                self.len(),
                dim
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSet("non-finite value".into()));
        }
        Ok(EmbeddingSet {
            name: self.name.clone(),
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            dim,
            data,
        })
    }

    /// Applies `f` to every entry.
    pub fn map_values<F>(&self, f: F) -> Result<EmbeddingSet>
    where
        F: Fn(f64) -> f64,
    {
        self.with_matrix(self.dim, self.data.iter().map(|&x| f(x)).collect())
    }
}

/// Accumulates rows for loaders, dropping repeated tokens.
pub(crate) struct SetBuilder {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    dim: usize,
    duplicates: usize,
}

impl SetBuilder {
    pub(crate) fn new(dim: usize, capacity: usize) -> Self {
        SetBuilder {
            vocab: Vec::with_capacity(capacity),
            index: HashMap::with_capacity(capacity),
            data: Vec::with_capacity(capacity.saturating_mul(dim)),
            dim,
            duplicates: 0,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// Adds a row; returns false if the token was already present.
    pub(crate) fn push(&mut self, token: &str, values: impl IntoIterator<Item = f64>) -> bool {
        if self.index.contains_key(token) {
            self.duplicates += 1;
            return false;
        }
        let start = self.data.len();
        self.data.extend(values);
        debug_assert_eq!(self.data.len() - start, self.dim);
        self.index.insert(token.to_owned(), self.vocab.len());
        self.vocab.push(token.to_owned());
        true
    }

    pub(crate) fn finish(self, name: impl Into<String>) -> Result<Loaded> {
        if let Some(pos) = self.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSet(format!(
                "non-finite value in row for {:?}",
                self.vocab[pos / self.dim]
            )));
        }
        Ok(Loaded {
            set: EmbeddingSet {
                name: name.into(),
                vocab: self.vocab,
                index: self.index,
                dim: self.dim,
                data: self.data,
            },
            duplicates: self.duplicates,
        })
    }
}

/// A freshly loaded set plus the number of repeated tokens that were dropped
/// (the first occurrence of each token is kept).
#[derive(Debug)]
pub struct Loaded {
    pub set: EmbeddingSet,
    pub duplicates: usize,
}

/// Two sets restricted to a common vocabulary with rows in the same order.
#[derive(Clone, Debug)]
pub struct AlignedPair {
    left: EmbeddingSet,
    right: EmbeddingSet,
}

impl AlignedPair {
    /// Pairs two sets that already share the same vocabulary in the same order.
    pub fn new(left: EmbeddingSet, right: EmbeddingSet) -> Result<Self> {
        if left.vocab != right.vocab {
            return Err(Error::InvalidSet(format!(
                "{} and {} are not row-aligned",
                left.name, right.name
            )));
        }
        Ok(AlignedPair { left, right })
    }

    pub fn left(&self) -> &EmbeddingSet {
        &self.left
    }

    pub fn right(&self) -> &EmbeddingSet {
        &self.right
    }

    pub fn shared_vocab(&self) -> &[String] {
        &self.left.vocab
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn into_parts(self) -> (EmbeddingSet, EmbeddingSet) {
        (self.left, self.right)
    }
}

/// Restricts `a` and `b` to their shared tokens, ordered as in `a`.
///
/// An empty intersection yields an empty pair rather than an error.
pub fn intersect(a: &EmbeddingSet, b: &EmbeddingSet) -> AlignedPair {
    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    for (i, token) in a.vocab.iter().enumerate() {
        if let Some(j) = b.index_of(token) {
            left_rows.push(i);
            right_rows.push(j);
        }
    }
    AlignedPair {
        left: a.select(&left_rows),
        right: b.select(&right_rows),
    }
}

/// Restricts every set to the tokens present in all of them, ordered as in
/// the first set.
pub fn intersect_all(sets: &[&EmbeddingSet]) -> Vec<EmbeddingSet> {
    let Some(first) = sets.first() else {
        return Vec::new();
    };
    let shared: Vec<&String> = first
        .vocab
        .iter()
        .filter(|t| sets[1..].iter().all(|s| s.contains(t)))
        .collect();
    sets.iter()
        .map(|s| {
            let rows: Vec<usize> = shared.iter().map(|t| s.index[*t]).collect();
            s.select(&rows)
        })
        .collect()
}
