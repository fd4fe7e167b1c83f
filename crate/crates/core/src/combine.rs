//! Meta-embeddings by word-wise averaging and by concatenation.
//!
//! Concatenation is the sum of disjointly zero-padded source vectors: with
//! two sources the first is front-padded by the second's dimension and the
//! second is rear-padded by the first's, so each output row reads
//! `[second, first]`. Pairwise distances then satisfy
//! `E_conc = sqrt(E1^2 + E2^2)` exactly.
//!
//! Averaging keeps the source dimension. Its distances satisfy the cosine
//! law `E_avg = 0.5 * sqrt(E1^2 + E2^2 - 2 E1 E2 cos θ)`, where θ is the
//! angle between `u1 - v1` and `v2 - u2`. When θ concentrates at π/2 the
//! average tracks concatenation up to the factor 0.5.

use rayon::prelude::*;

use crate::embedding::{intersect_all, AlignedPair, EmbeddingSet};
use crate::error::{Error, Result};
use crate::vector_ops::{normalize_vectors, PadSide};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Average,
    Concatenate,
}

impl Method {
    pub fn short_name(self) -> &'static str {
        match self {
            Method::Average => "avg",
            Method::Concatenate => "concat",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "avg" | "average" => Ok(Method::Average),
            "concat" | "concatenate" => Ok(Method::Concatenate),
            other => Err(format!("unknown method {other:?} (expected avg or concat)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

/// How to build one meta-embedding from named sources.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaRecipe {
    pub method: Method,
    /// Source set names, in order. At least two, all distinct.
    pub sources: Vec<String>,
    /// Average only: zero-pad smaller sources up to the largest dimension.
    pub pad_to_common_dim: bool,
    /// Pad side per source; empty means rear for all.
    pub pad_sides: Vec<PadSide>,
    /// Re-normalize output rows to unit length.
    pub normalize_output: bool,
}

impl MetaRecipe {
    pub fn new<S: Into<String>>(method: Method, sources: impl IntoIterator<Item = S>) -> Self {
        MetaRecipe {
            method,
            sources: sources.into_iter().map(Into::into).collect(),
            pad_to_common_dim: false,
            pad_sides: Vec::new(),
            normalize_output: false,
        }
    }

    pub fn with_padding(mut self, sides: Vec<PadSide>) -> Self {
        self.pad_to_common_dim = true;
        self.pad_sides = sides;
        self
    }

    pub fn normalized(mut self) -> Self {
        self.normalize_output = true;
        self
    }

    /// Name for the produced set, e.g. `glove+cbow.avg`.
    pub fn output_name(&self) -> String {
        format!("{}.{}", self.sources.join("+"), self.method)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.len() < 2 {
            return Err(Error::InvalidRecipe("at least two sources are required".into()));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if self.sources[..i].contains(s) {
                return Err(Error::InvalidRecipe(format!("source {s:?} listed twice")));
            }
        }
        if !self.pad_sides.is_empty() && self.pad_sides.len() != self.sources.len() {
            return Err(Error::InvalidRecipe(format!(
                "{} pad sides given for {} sources",
                self.pad_sides.len(),
                self.sources.len()
            )));
        }
        Ok(())
    }

    fn pad_side(&self, i: usize) -> PadSide {
        self.pad_sides.get(i).copied().unwrap_or_default()
    }
}

/// Concatenates a pair. Each output row is `[right row, left row]`.
pub fn concatenate(pair: &AlignedPair) -> Result<EmbeddingSet> {
    if pair.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let name = format!("{}+{}.concat", pair.left().name(), pair.right().name());
    stack(&[pair.left(), pair.right()], name)
}

/// Options for averaging sources of unequal dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AverageOptions {
    pub pad_to_common_dim: bool,
    /// Pad side for the left and right source.
    pub pad_sides: [PadSide; 2],
}

impl AverageOptions {
    pub fn padded(left: PadSide, right: PadSide) -> Self {
        AverageOptions {
            pad_to_common_dim: true,
            pad_sides: [left, right],
        }
    }
}

/// Word-wise mean of a pair: `(left + right) / 2`.
pub fn average(pair: &AlignedPair, options: AverageOptions) -> Result<EmbeddingSet> {
    if pair.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let name = format!("{}+{}.avg", pair.left().name(), pair.right().name());
    mean(
        &[pair.left(), pair.right()],
        options.pad_to_common_dim,
        &options.pad_sides,
        name,
    )
}

/// Combines `K >= 2` sets per `recipe`.
///
/// Sets are looked up by name in `recipe.sources` order. The output
/// vocabulary is the intersection of all sources in first-source order.
/// Averaging divides by K. Concatenation generalizes the two-source layout:
/// the last source comes first and the first source last, so K = 2 matches
/// [`concatenate`].
pub fn combine_k(sets: &[&EmbeddingSet], recipe: &MetaRecipe) -> Result<EmbeddingSet> {
    recipe.validate()?;
    let ordered = recipe
        .sources
        .iter()
        .map(|name| {
            sets.iter()
                .find(|s| s.name() == name)
                .copied()
                .ok_or_else(|| Error::InvalidRecipe(format!("no set named {name:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let aligned = intersect_all(&ordered);
    if aligned[0].is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let refs: Vec<&EmbeddingSet> = aligned.iter().collect();
    let sides: Vec<PadSide> = (0..refs.len()).map(|i| recipe.pad_side(i)).collect();
    let out = match recipe.method {
        Method::Average => mean(&refs, recipe.pad_to_common_dim, &sides, recipe.output_name())?,
        Method::Concatenate => stack(&refs, recipe.output_name())?,
    };
    if recipe.normalize_output {
        normalize_vectors(&out)
    } else {
        Ok(out)
    }
}

/// Row-aligned sets stacked last-to-first.
fn stack(aligned: &[&EmbeddingSet], name: String) -> Result<EmbeddingSet> {
    let dim: usize = aligned.iter().map(|s| s.dim()).sum();
    let mut data = vec![0.0; aligned[0].len() * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| {
        let mut offset = 0;
        for set in aligned.iter().rev() {
            out[offset..offset + set.dim()].copy_from_slice(set.row(i));
            offset += set.dim();
        }
    });
    aligned[0].with_matrix(dim, data).map(|s| s.with_name(name))
}

fn mean(
    aligned: &[&EmbeddingSet],
    pad_to_common_dim: bool,
    sides: &[PadSide],
    name: String,
) -> Result<EmbeddingSet> {
    let dim = aligned.iter().map(|s| s.dim()).max().unwrap_or(0);
    if !pad_to_common_dim {
        if let Some(s) = aligned.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "cannot average {} (dim {}) with dim {} sources without padding",
                s.name(),
                s.dim(),
                dim
            )));
        }
    }
    let k = aligned.len() as f64;
    let mut data = vec![0.0; aligned[0].len() * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| {
        for (j, set) in aligned.iter().enumerate() {
            let offset = match sides.get(j).copied().unwrap_or_default() {
                PadSide::Front => dim - set.dim(),
                PadSide::Rear => 0,
            };
            for (o, x) in out[offset..offset + set.dim()].iter_mut().zip(set.row(i)) {
                *o += x;
            }
        }
        out.iter_mut().for_each(|o| *o /= k);
    });
    aligned[0].with_matrix(dim, data).map(|s| s.with_name(name))
}

/// Distance between two words after concatenation, from per-source
/// distances.
pub fn concatenated_distance(e1: f64, e2: f64) -> f64 {
    (e1 * e1 + e2 * e2).sqrt()
}

/// Distance between two words after averaging two sources, from per-source
/// distances and the angle θ between `u1 - v1` and `v2 - u2`.
pub fn averaged_distance(e1: f64, e2: f64, theta: f64) -> f64 {
    0.5 * (e1 * e1 + e2 * e2 - 2.0 * e1 * e2 * theta.cos()).max(0.0).sqrt()
}
