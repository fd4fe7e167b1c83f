use std::io::Write;

use super::analogy::{score_analogy, AnalogyOptions};
use super::{score_similarity, AnalogyDataset, EvalReport, Metric, SimilarityDataset};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

/// Why a cell has no value, with whatever coverage was established.
#[derive(Clone, Debug, PartialEq)]
pub struct Missing {
    pub reason: String,
    pub covered: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub set: String,
    pub dataset: String,
    pub metric: Metric,
    pub outcome: std::result::Result<EvalReport, Missing>,
}

/// One cell per (set, dataset): similarity datasets first, then analogy
/// datasets, in the given order.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteTable {
    pub sets: Vec<String>,
    pub datasets: Vec<String>,
    pub cells: Vec<Cell>,
}

pub fn run_suite(
    sets: &[&EmbeddingSet],
    sim_data: &[SimilarityDataset],
    ana_data: &[AnalogyDataset],
) -> Result<SuiteTable> {
    if sets.is_empty() {
        return Err(Error::Insufficient("no embedding sets to evaluate".into()));
    }
    if sim_data.is_empty() && ana_data.is_empty() {
        return Err(Error::Insufficient("no datasets to evaluate on".into()));
    }
    let mut cells = Vec::with_capacity(sets.len() * (sim_data.len() + ana_data.len()));
    for set in sets {
        for data in sim_data {
            let scores = score_similarity(set, data);
            let outcome = match scores.rho {
                Ok(value) => Ok(EvalReport {
                    dataset: data.name.clone(),
                    metric: Metric::Spearman,
                    value,
                    covered: scores.covered,
                    skipped: scores.skipped,
                }),
                Err(e) => Err(Missing {
                    reason: e.to_string(),
                    covered: scores.covered,
                    skipped: scores.skipped,
                }),
            };
            cells.push(Cell {
                set: set.name().to_owned(),
                dataset: data.name.clone(),
                metric: Metric::Spearman,
                outcome,
            });
        }
        for data in ana_data {
            let scores = score_analogy(set, data, AnalogyOptions::default());
            let outcome = if scores.covered == 0 {
                Err(Missing {
                    reason: format!("none of the {} questions is fully in the vocabulary", data.len()),
                    covered: 0,
                    skipped: scores.skipped,
                })
            } else {
                Ok(EvalReport {
                    dataset: data.name.clone(),
                    metric: Metric::Accuracy,
                    value: scores.correct as f64 / scores.covered as f64,
                    covered: scores.covered,
                    skipped: scores.skipped,
                })
            };
            cells.push(Cell {
                set: set.name().to_owned(),
                dataset: data.name.clone(),
                metric: Metric::Accuracy,
                outcome,
            });
        }
    }
    Ok(SuiteTable {
        sets: sets.iter().map(|s| s.name().to_owned()).collect(),
        datasets: sim_data
            .iter()
            .map(|d| d.name.clone())
            .chain(ana_data.iter().map(|d| d.name.clone()))
            .collect(),
        cells,
    })
}

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

impl SuiteTable {
    pub fn succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_ok()).count()
    }

    pub fn cell(&self, set: &str, dataset: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.set == set && c.dataset == dataset)
    }

    /// `set,dataset,metric,value,covered,skipped`; values ×100 with one
    /// decimal, `NA` for missing cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"set,dataset,metric,value,covered,skipped\r\n")?;
        for cell in &self.cells {
            let (value, covered, skipped) = match &cell.outcome {
                Ok(r) => (format!("{:.1}", r.percent()), r.covered, r.skipped),
                Err(m) => ("NA".to_owned(), m.covered, m.skipped),
            };
            write!(
                w,
                "{},{},{},{},{},{}\r\n",
                csv_field(&cell.set),
                csv_field(&cell.dataset),
                cell.metric.name(),
                value,
                covered,
                skipped
            )?;
        }
        Ok(())
    }

    /// Sets as rows, datasets as columns, followed by the reasons for any
    /// missing cells.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let label_width = self
            .sets
            .iter()
            .map(|s| s.chars().count())
            .chain(["Embeddings".len()])
            .max()
            .unwrap_or(0);
        let col_width = self
            .datasets
            .iter()
            .map(|d| d.chars().count())
            .chain([5])
            .max()
            .unwrap_or(5);

        write!(w, "{:<label_width$}", "Embeddings")?;
        for d in &self.datasets {
            write!(w, "  {d:>col_width$}")?;
        }
        writeln!(w)?;
        for set in &self.sets {
            write!(w, "{set:<label_width$}")?;
            for d in &self.datasets {
                let value = match self.cell(set, d).map(|c| &c.outcome) {
                    Some(Ok(r)) => format!("{:.1}", r.percent()),
                    _ => "--".to_owned(),
                };
                write!(w, "  {value:>col_width$}")?;
            }
            writeln!(w)?;
        }
        let missing: Vec<&Cell> = self.cells.iter().filter(|c| c.outcome.is_err()).collect();
        if !missing.is_empty() {
            writeln!(w)?;
            for cell in missing {
                if let Err(m) = &cell.outcome {
                    writeln!(w, "missing {} / {}: {}", cell.set, cell.dataset, m.reason)?;
                }
            }
        }
        Ok(())
    }
}
