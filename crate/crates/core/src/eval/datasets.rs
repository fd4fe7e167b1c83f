//! Benchmark dataset files.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::name_from_path;

/// Word pairs with human similarity judgements (RG, MC, WS, RW, SL, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::MalformedDataset("no word pairs".into()));
        }
        if pairs.iter().any(|(_, _, s)| !s.is_finite()) {
            return Err(Error::MalformedDataset("non-finite human score".into()));
        }
        Ok(SimilarityDataset {
            name: name.into(),
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub category: String,
}

/// `a : b :: c : d` questions, e.g. the Google analogy set.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalogyDataset {
    pub name: String,
    pub questions: Vec<AnalogyQuestion>,
}

impl AnalogyDataset {
    pub fn new(name: impl Into<String>, questions: Vec<AnalogyQuestion>) -> Result<Self> {
        if questions.is_empty() {
            return Err(Error::MalformedDataset("no analogy questions".into()));
        }
        if questions
            .iter()
            .any(|q| [&q.a, &q.b, &q.c, &q.d].iter().any(|t| t.is_empty()))
        {
            return Err(Error::MalformedDataset("empty token in question".into()));
        }
        Ok(AnalogyDataset {
            name: name.into(),
            questions,
        })
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for q in &self.questions {
            if out.last() != Some(&q.category.as_str()) && !out.contains(&q.category.as_str()) {
                out.push(&q.category);
            }
        }
        out
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::from(e).in_file(path))
}

pub fn load_similarity(path: impl AsRef<Path>) -> Result<SimilarityDataset> {
    let path = path.as_ref();
    read_similarity(open(path)?, name_from_path(path)).map_err(|e| e.in_file(path))
}

#[derive(Clone, Copy)]
enum Delimiter {
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Reads `word1, word2, score` rows separated by tabs or commas (detected
/// from the first row; plain whitespace is accepted too). Extra columns are
/// ignored. A first row whose score field is not a number is a header.
pub fn read_similarity<R: BufRead>(reader: R, name: impl Into<String>) -> Result<SimilarityDataset> {
    let mut delimiter = None;
    let mut pairs = Vec::new();
    let mut seen_rows = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(&line));
        let fields = delim.split(&line);
        seen_rows += 1;
        if fields.len() < 3 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::MalformedDataset(format!(
                "line {lineno}: expected word1, word2, score"
            )));
        }
        match fields[2].parse::<f64>() {
            Ok(score) if score.is_finite() => {
                pairs.push((fields[0].to_owned(), fields[1].to_owned(), score));
            }
            _ if seen_rows == 1 => continue,
            _ => {
                return Err(Error::MalformedDataset(format!(
                    "line {lineno}: score {:?} is not a number",
                    fields[2]
                )))
            }
        }
    }
    if seen_rows == 0 {
        return Err(Error::EmptyInput);
    }
    SimilarityDataset::new(name, pairs)
}

pub fn load_analogy(path: impl AsRef<Path>) -> Result<AnalogyDataset> {
    let path = path.as_ref();
    read_analogy(open(path)?, name_from_path(path)).map_err(|e| e.in_file(path))
}

/// Reads the Google analogy layout: four tokens per line, with `: name`
/// lines opening a category.
pub fn read_analogy<R: BufRead>(reader: R, name: impl Into<String>) -> Result<AnalogyDataset> {
    let mut category = String::new();
    let mut questions = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(':') {
            category = rest.trim().to_owned();
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [a, b, c, d] = tokens[..] else {
            return Err(Error::MalformedDataset(format!(
                "line {}: expected 4 tokens, found {}",
                i + 1,
                tokens.len()
            )));
        };
        questions.push(AnalogyQuestion {
            a: a.to_owned(),
            b: b.to_owned(),
            c: c.to_owned(),
            d: d.to_owned(),
            category: category.clone(),
        });
    }
    if questions.is_empty() {
        return Err(Error::EmptyInput);
    }
    AnalogyDataset::new(name, questions)
}
