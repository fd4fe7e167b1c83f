//! `metaembed run`: ingest → combine → angles → eval, plus a manifest.

use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use metaembed::angles::{export_histogram, sample_angles_with_bins, RNG_ALGORITHM};
use metaembed::io::save_native;
use metaembed::{combine_k, intersect, run_suite, EmbeddingSet};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::{load_datasets, prepare_source, print_angle_stats, write_table};
use crate::config::PipelineConfig;

#[derive(Serialize)]
struct InputRecord {
    id: String,
    path: PathBuf,
    sha256: String,
    words: usize,
    dim: usize,
    duplicates_dropped: usize,
    output: String,
}

#[derive(Serialize)]
struct CombinationRecord {
    name: String,
    method: String,
    sources: Vec<String>,
    words: usize,
    dim: usize,
    output: String,
}

#[derive(Serialize)]
struct AngleRecord {
    left: String,
    right: String,
    shared_words: usize,
    pairs: usize,
    seed: u64,
    sample_count: usize,
    skipped: usize,
    mean: f64,
    variance: f64,
    output: String,
}

#[derive(Serialize)]
struct DatasetRecord {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct EvalRecord {
    datasets: Vec<DatasetRecord>,
    cells: usize,
    succeeded: usize,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    config: &'a PipelineConfig,
    inputs: Vec<InputRecord>,
    combinations: Vec<CombinationRecord>,
    angle_analyses: Vec<AngleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<EvalRecord>,
    decisions: Vec<&'static str>,
}

const DECISIONS: &[&str] = &[
    "tokens match by exact byte equality; intersections follow the first source's order",
    "vectors are stored as float64",
    "preprocessing steps run in the listed order",
    "concatenation places later sources first (two sources: [second, first])",
    "averaging divides by the number of sources after zero-padding",
    "angle pairs are drawn uniformly with replacement, u != v; variance uses n - 1",
    "histogram densities are count / (n * bin_width) over [0, pi]",
    "similarity and analogy skip out-of-vocabulary items and report coverage",
    "CosAdd excludes a, b, c; ties go to the lowest vocabulary index",
];

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher)?;
    Ok(format!("{:x}", hasher.finalize()))
}

fn relative(out: &Path, path: &Path) -> String {
    path.strip_prefix(out)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

pub fn run(config_path: &Path) -> Result<ExitCode> {
    let config = PipelineConfig::load(config_path)?;
    let out = &config.output_dir;
    for sub in ["sources", "meta", "angles", "eval"] {
        fs::create_dir_all(out.join(sub))
            .with_context(|| format!("cannot create {}", out.join(sub).display()))?;
    }

    let mut sources: Vec<EmbeddingSet> = Vec::new();
    let mut inputs = Vec::new();
    for decl in &config.sources {
        let steps: Vec<_> = decl.steps.iter().map(|s| s.0).collect();
        let (set, duplicates) =
            prepare_source(&decl.path, decl.format.0, decl.drop_containing.as_deref(), &steps)
                .with_context(|| format!("source {:?}", decl.id))?;
        let set = set.with_name(decl.id.clone());
        let path = out.join("sources").join(format!("{}.meb", decl.id));
        save_native(&set, &path)?;
        println!("source {}: {} words, dim {}", decl.id, set.len(), set.dim());
        inputs.push(InputRecord {
            id: decl.id.clone(),
            path: decl.path.clone(),
            sha256: sha256_file(&decl.path)?,
            words: set.len(),
            dim: set.dim(),
            duplicates_dropped: duplicates,
            output: relative(out, &path),
        });
        sources.push(set);
    }
    let source_refs: Vec<&EmbeddingSet> = sources.iter().collect();

    let mut metas = Vec::new();
    let mut combinations = Vec::new();
    for decl in &config.recipes {
        let recipe = decl.recipe();
        let set = combine_k(&source_refs, &recipe)
            .with_context(|| format!("recipe {}", recipe.output_name()))?;
        let path = out.join("meta").join(format!("{}.meb", set.name()));
        save_native(&set, &path)?;
        println!("meta {}: {} words, dim {}", set.name(), set.len(), set.dim());
        combinations.push(CombinationRecord {
            name: set.name().to_owned(),
            method: recipe.method.to_string(),
            sources: recipe.sources.clone(),
            words: set.len(),
            dim: set.dim(),
            output: relative(out, &path),
        });
        metas.push(set);
    }

    let mut angle_analyses = Vec::new();
    if let Some(angles) = &config.angles {
        for (a, b) in config.angle_pairs() {
            let find = |id: &str| sources.iter().find(|s| s.name() == id).expect("validated");
            let pair = intersect(find(&a), find(&b));
            let stats = sample_angles_with_bins(&pair, angles.pairs, angles.seed, angles.bins)
                .with_context(|| format!("angles {a} & {b}"))?;
            let path = out.join("angles").join(format!("{a}_{b}.csv"));
            export_histogram(&stats, &path)?;
            print_angle_stats(&format!("{a} & {b}"), &stats);
            angle_analyses.push(AngleRecord {
                left: a,
                right: b,
                shared_words: pair.len(),
                pairs: angles.pairs,
                seed: angles.seed,
                sample_count: stats.sample_count,
                skipped: stats.skipped,
                mean: stats.mean,
                variance: stats.variance,
                output: relative(out, &path),
            });
        }
    }

    let mut evaluation = None;
    if let Some(eval) = &config.eval {
        let (sim, ana) = load_datasets(&eval.similarity, &eval.analogy)?;
        let mut sets: Vec<&EmbeddingSet> = sources.iter().collect();
        sets.extend(metas.iter());
        let table = run_suite(&sets, &sim, &ana)?;
        let csv = out.join("eval").join("table.csv");
        let text = out.join("eval").join("table.txt");
        write_table(&table, &csv, Some(&text))?;
        table.write_text(io::stdout().lock())?;
        let mut datasets = Vec::new();
        for p in crate::commands::dataset_files(&eval.similarity)?
            .into_iter()
            .chain(crate::commands::dataset_files(&eval.analogy)?)
        {
            datasets.push(DatasetRecord {
                sha256: sha256_file(&p)?,
                path: p,
            });
        }
        evaluation = Some(EvalRecord {
            datasets,
            cells: table.cells.len(),
            succeeded: table.succeeded(),
            outputs: vec![relative(out, &csv), relative(out, &text)],
        });
    }

    let manifest = Manifest {
        tool: "metaembed",
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_ALGORITHM,
        config: &config,
        inputs,
        combinations,
        angle_analyses,
        evaluation,
        decisions: DECISIONS.to_vec(),
    };
    let path = out.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
    println!("manifest: {}", path.display());
    Ok(ExitCode::SUCCESS)
}
