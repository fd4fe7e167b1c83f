//! Pipeline configuration, a TOML file:
//!
//! ```toml
//! output_dir = "out"
//!
//! [[sources]]
//! id = "glove"
//! path = "glove.840B.300d.txt"
//! format = "text"                      # text | word2vec | native
//! steps = ["norm-dims", "norm-vectors"] # applied in order; "pad:rear:200" pads
//! drop_containing = "_"                # optional token filter
//!
//! [[recipes]]
//! method = "avg"                       # avg | concat
//! sources = ["glove", "cbow"]
//! pad_to_common_dim = false            # optional
//! pad_sides = ["rear", "rear"]         # optional
//! normalize_output = false             # optional
//!
//! [angles]
//! pairs = 200000
//! seed = 1
//! bins = 100                           # optional
//! between = [["glove", "cbow"]]        # optional; default every source pair
//!
//! [eval]
//! similarity = ["data/similarity"]     # files or directories
//! analogy = ["data/questions-words.txt"]
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use metaembed::angles::HISTOGRAM_BINS;
use metaembed::io::Format;
use metaembed::vector_ops::{normalize_dimensions, normalize_vectors, pad_set};
use metaembed::{EmbeddingSet, MetaRecipe, Method, PadSide, PadSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One preprocessing step applied to a loaded set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    NormDims,
    NormVectors,
    Pad(PadSpec),
}

impl Step {
    pub fn apply(self, set: &EmbeddingSet) -> metaembed::Result<EmbeddingSet> {
        match self {
            Step::NormDims => normalize_dimensions(set),
            Step::NormVectors => normalize_vectors(set),
            Step::Pad(spec) => pad_set(set, spec),
        }
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "norm-dims" => Ok(Step::NormDims),
            "norm-vectors" => Ok(Step::NormVectors),
            other => match other.strip_prefix("pad:") {
                Some(spec) => spec.parse().map(Step::Pad),
                None => Err(format!(
                    "unknown step {other:?} (expected norm-dims, norm-vectors or pad:SIDE:COUNT)"
                )),
            },
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::NormDims => f.write_str("norm-dims"),
            Step::NormVectors => f.write_str("norm-vectors"),
            Step::Pad(spec) => write!(f, "pad:{spec}"),
        }
    }
}

/// Serializes through `Display` / `FromStr`.
macro_rules! string_serde {
    ($($ty:ty),*) => {$(
        impl Serialize for Wrap<$ty> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(&self.0)
            }
        }
        impl<'de> Deserialize<'de> for Wrap<$ty> {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map(Wrap).map_err(serde::de::Error::custom)
            }
        }
    )*};
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wrap<T>(pub T);

string_serde!(Step, Method, PadSide);

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Text => "text",
        Format::Word2vecBinary => "word2vec",
        Format::Native => "native",
    }
}

impl Serialize for Wrap<Format> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(format_name(self.0))
    }
}

impl<'de> Deserialize<'de> for Wrap<Format> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(Wrap).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDecl {
    pub id: String,
    pub path: PathBuf,
    pub format: Wrap<Format>,
    #[serde(default)]
    pub steps: Vec<Wrap<Step>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_containing: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeDecl {
    pub method: Wrap<Method>,
    pub sources: Vec<String>,
    #[serde(default)]
    pub pad_to_common_dim: bool,
    #[serde(default)]
    pub pad_sides: Vec<Wrap<PadSide>>,
    #[serde(default)]
    pub normalize_output: bool,
}

impl RecipeDecl {
    pub fn recipe(&self) -> MetaRecipe {
        MetaRecipe {
            method: self.method.0,
            sources: self.sources.clone(),
            pad_to_common_dim: self.pad_to_common_dim,
            pad_sides: self.pad_sides.iter().map(|s| s.0).collect(),
            normalize_output: self.normalize_output,
        }
    }
}

fn default_bins() -> usize {
    HISTOGRAM_BINS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesDecl {
    pub pairs: usize,
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub between: Option<Vec<[String; 2]>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalDecl {
    #[serde(default)]
    pub similarity: Vec<PathBuf>,
    #[serde(default)]
    pub analogy: Vec<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub sources: Vec<SourceDecl>,
    #[serde(default)]
    pub recipes: Vec<RecipeDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<AnglesDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalDecl>,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads, resolves relative paths, and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config =
            Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        for s in &mut self.sources {
            fix(&mut s.path);
        }
        if let Some(eval) = &mut self.eval {
            eval.similarity.iter_mut().for_each(fix);
            eval.analogy.iter_mut().for_each(fix);
        }
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            bail!("config declares no sources");
        }
        let mut ids = HashSet::new();
        for s in &self.sources {
            if s.id.is_empty() || s.id.contains(['/', '\\']) {
                bail!("source id {:?} is not usable as a file name", s.id);
            }
            if !ids.insert(s.id.as_str()) {
                bail!("source {:?} is declared twice", s.id);
            }
            if !s.path.is_file() {
                bail!("source {:?}: {} is not a file", s.id, s.path.display());
            }
        }
        let declared = |id: &str, what: &str| -> Result<()> {
            if !ids.contains(id) {
                bail!("{what} references undeclared source {id:?}");
            }
            Ok(())
        };
        for (i, r) in self.recipes.iter().enumerate() {
            for id in &r.sources {
                declared(id, &format!("recipe {}", i + 1))?;
            }
            r.recipe()
                .validate()
                .with_context(|| format!("recipe {}", i + 1))?;
        }
        if let Some(angles) = &self.angles {
            if angles.pairs == 0 || angles.bins == 0 {
                bail!("angles: pairs and bins must be positive");
            }
            for [a, b] in angles.between.iter().flatten() {
                declared(a, "angles")?;
                declared(b, "angles")?;
            }
        }
        if let Some(eval) = &self.eval {
            if eval.similarity.is_empty() && eval.analogy.is_empty() {
                bail!("eval section lists no datasets");
            }
            for p in eval.similarity.iter().chain(&eval.analogy) {
                if !p.exists() {
                    bail!("eval dataset {} does not exist", p.display());
                }
            }
        }
        Ok(())
    }

    /// Source pairs to run the angle analysis on.
    pub fn angle_pairs(&self) -> Vec<(String, String)> {
        let Some(angles) = &self.angles else {
            return Vec::new();
        };
        match &angles.between {
            Some(between) => between.iter().map(|[a, b]| (a.clone(), b.clone())).collect(),
            None => {
                let ids: Vec<&String> = self.sources.iter().map(|s| &s.id).collect();
                let mut out = Vec::new();
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        out.push((ids[i].clone(), ids[j].clone()));
                    }
                }
                out
            }
        }
    }
}
