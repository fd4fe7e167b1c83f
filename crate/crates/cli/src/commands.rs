use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use metaembed::angles::{export_histogram, sample_angles_with_bins, AngleStats, RNG_ALGORITHM};
use metaembed::eval::{load_analogy, load_similarity, AnalogyDataset, SimilarityDataset, SuiteTable};
use metaembed::io::{load, load_native, save_native};
use metaembed::{combine_k, intersect, run_suite, EmbeddingSet, MetaRecipe};

use crate::config::Step;
use crate::{AnglesArgs, CombineArgs, EvalArgs, IngestArgs};

/// Loads a source file, drops filtered tokens, and applies `steps` in order.
pub fn prepare_source(
    path: &Path,
    format: metaembed::io::Format,
    drop_containing: Option<&str>,
    steps: &[Step],
) -> Result<(EmbeddingSet, usize)> {
    let loaded = load(path, format)?;
    let mut set = loaded.set;
    if let Some(pattern) = drop_containing {
        set = set.filter(|t| !t.contains(pattern));
    }
    for step in steps {
        set = step
            .apply(&set)
            .with_context(|| format!("step {step} on {}", path.display()))?;
    }
    Ok((set, loaded.duplicates))
}

pub fn ingest(args: &IngestArgs, steps: &[Step]) -> Result<ExitCode> {
    let (set, duplicates) = prepare_source(
        &args.input,
        args.format,
        args.drop_containing.as_deref(),
        steps,
    )?;
    if duplicates > 0 {
        eprintln!("warning: dropped {duplicates} repeated tokens (first occurrence kept)");
    }
    save_native(&set, &args.out)?;
    let applied: Vec<String> = steps.iter().map(Step::to_string).collect();
    println!(
        "{}: {} words, dim {}{}",
        args.out.display(),
        set.len(),
        set.dim(),
        if applied.is_empty() {
            String::new()
        } else {
            format!(" ({})", applied.join(", "))
        }
    );
    Ok(ExitCode::SUCCESS)
}

/// Loads native files, renaming repeats so every set has a distinct name.
pub fn load_named(paths: &[PathBuf]) -> Result<Vec<EmbeddingSet>> {
    let mut seen = HashSet::new();
    paths
        .iter()
        .map(|p| {
            let set = load_native(p)?;
            let base = set.name().to_owned();
            let mut name = base.clone();
            let mut k = 2;
            while !seen.insert(name.clone()) {
                name = format!("{base}#{k}");
                k += 1;
            }
            Ok(set.with_name(name))
        })
        .collect()
}

pub fn combine(args: &CombineArgs) -> Result<ExitCode> {
    let sets = load_named(&args.inputs)?;
    let recipe = MetaRecipe {
        method: args.method,
        sources: sets.iter().map(|s| s.name().to_owned()).collect(),
        pad_to_common_dim: args.pad_to_common,
        pad_sides: args.pad_sides.clone(),
        normalize_output: args.normalize_output,
    };
    let refs: Vec<&EmbeddingSet> = sets.iter().collect();
    let out = combine_k(&refs, &recipe)?;
    save_native(&out, &args.out)?;
    println!(
        "{}: intersection {} words, output dim {}",
        args.out.display(),
        out.len(),
        out.dim()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn print_angle_stats(label: &str, stats: &AngleStats) {
    let width = label.chars().count().max("Embeddings".len());
    println!("{:<width$}  {:>6}  {:>6}", "Embeddings", "mu", "sigma^2");
    println!("{label:<width$}  {:.4}  {:.4}", stats.mean, stats.variance);
    println!(
        "n={} skipped={} seed={} rng={}",
        stats.sample_count, stats.skipped, stats.seed, RNG_ALGORITHM
    );
}

pub fn angles(args: &AnglesArgs) -> Result<ExitCode> {
    let sets = load_named(&[args.left.clone(), args.right.clone()])?;
    let pair = intersect(&sets[0], &sets[1]);
    let stats = sample_angles_with_bins(&pair, args.pairs, args.seed, args.bins)?;
    export_histogram(&stats, &args.out)?;
    print_angle_stats(&format!("{} & {}", sets[0].name(), sets[1].name()), &stats);
    Ok(ExitCode::SUCCESS)
}

/// Expands directories into their files, sorted by name.
pub fn dataset_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            files.retain(|f| f.is_file());
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_datasets(
    sim: &[PathBuf],
    analogy: &[PathBuf],
) -> Result<(Vec<SimilarityDataset>, Vec<AnalogyDataset>)> {
    let sim = dataset_files(sim)?
        .iter()
        .map(load_similarity)
        .collect::<Result<Vec<_>, _>>()?;
    let ana = dataset_files(analogy)?
        .iter()
        .map(load_analogy)
        .collect::<Result<Vec<_>, _>>()?;
    if sim.is_empty() && ana.is_empty() {
        bail!("no evaluation datasets found");
    }
    Ok((sim, ana))
}

pub fn write_table(table: &SuiteTable, csv: &Path, text: Option<&Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(csv).with_context(|| csv.display().to_string())?);
    table.write_csv(&mut w)?;
    w.flush()?;
    if let Some(text) = text {
        let mut w = BufWriter::new(File::create(text).with_context(|| text.display().to_string())?);
        table.write_text(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let (sim, ana) = load_datasets(&args.sim, &args.analogy)?;
    let sets = load_named(&args.sets)?;
    let refs: Vec<&EmbeddingSet> = sets.iter().collect();
    let table = run_suite(&refs, &sim, &ana)?;
    table.write_text(std::io::stdout().lock())?;
    if let Some(out) = &args.out {
        write_table(&table, out, None)?;
    }
    if table.succeeded() == 0 {
        eprintln!("error: every cell failed");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
