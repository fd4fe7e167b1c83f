//! Distribution of angles between cross-set difference vectors.
//!
//! For a random pair of shared words `(u, v)` the sampled angle is the one
//! between `u_left - v_left` and `v_right - u_right`. When this concentrates
//! at π/2, averaging the two sets preserves relative distances (see
//! [`crate::combine`]).
//!
//! Sampling is split into fixed-size chunks of [`CHUNK_PAIRS`] pairs, each
//! driven by its own PCG32 stream derived from the seed, so results do not
//! depend on the number of worker threads.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rand_pcg::Pcg32;
use rayon::prelude::*;

use crate::embedding::{AlignedPair, EmbeddingSet};
use crate::error::{Error, Result};
use crate::vector_ops::{cosine, difference_into, l2_normalize_in_place};

pub const HISTOGRAM_BINS: usize = 100;
pub const CHUNK_PAIRS: usize = 4096;

/// Identifier of the pair sampler, recorded next to seeds in run metadata.
pub const RNG_ALGORITHM: &str = "pcg32-lcg64xsh32/splitmix64-seeded/4096-pair-streams";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    /// `count / (n * width)`; densities times bin width sum to 1.
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleStats {
    pub sample_count: usize,
    /// Pairs dropped because a difference vector was (near) zero.
    pub skipped: usize,
    pub mean: f64,
    /// Unbiased (n - 1) sample variance; zero for a single sample.
    pub variance: f64,
    pub skewness: f64,
    pub histogram: Vec<HistogramBin>,
    pub seed: u64,
}

impl AngleStats {
    /// Summarizes raw angle samples.
    pub fn from_angles(angles: &[f64], skipped: usize, seed: u64, bins: usize) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Insufficient("no angles were sampled".into()));
        }
        if bins == 0 {
            return Err(Error::Insufficient("histogram needs at least one bin".into()));
        }
        let n = angles.len() as f64;
        // Shifted by the first sample so identical samples give an exact mean.
        let shift = angles[0];
        let mean = shift + angles.iter().map(|a| a - shift).sum::<f64>() / n;
        let (m2, m3) = angles.iter().fold((0.0, 0.0), |(m2, m3), &a| {
            let d = a - mean;
            (m2 + d * d, m3 + d * d * d)
        });
        let variance = if angles.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
        let skewness = if m2 > 0.0 {
            (m3 / n) / (m2 / n).powf(1.5)
        } else {
            0.0
        };

        let width = PI / bins as f64;
        let mut counts = vec![0usize; bins];
        for &a in angles {
            let b = ((a / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let histogram = counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| HistogramBin {
                lower: i as f64 * width,
                upper: (i + 1) as f64 * width,
                density: c as f64 / (n * width),
            })
            .collect();

        Ok(AngleStats {
            sample_count: angles.len(),
            skipped,
            mean,
            variance,
            skewness,
            histogram,
            seed,
        })
    }

    /// Approximate standard error of the variance estimate, assuming
    /// near-normal samples.
    pub fn variance_standard_error(&self) -> f64 {
        if self.sample_count < 2 {
            return 0.0;
        }
        self.variance * (2.0 / (self.sample_count as f64 - 1.0)).sqrt()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Pcg32 {
    Pcg32::new(splitmix64(seed), stream)
}

/// Draws `n_pairs` pairs of distinct indices below `n_tokens`, uniformly and
/// independently.
pub fn sample_pairs(n_tokens: usize, n_pairs: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if n_tokens < 2 {
        return Err(Error::Insufficient(format!(
            "need at least 2 shared tokens, found {n_tokens}"
        )));
    }
    let chunks = n_pairs.div_ceil(CHUNK_PAIRS);
    let pairs = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK_PAIRS.min(n_pairs - c * CHUNK_PAIRS);
            (0..len).map(move |_| {
                let u = rng.random_range(0..n_tokens);
                let mut v = rng.random_range(0..n_tokens - 1);
                if v >= u {
                    v += 1;
                }
                (u, v)
            })
        })
        .collect();
    Ok(pairs)
}

/// Raw angle samples plus the number of skipped degenerate pairs.
pub fn sample_angle_values(pair: &AlignedPair, n_pairs: usize, seed: u64) -> Result<(Vec<f64>, usize)> {
    let (left, right) = (pair.left(), pair.right());
    if left.dim() != right.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} has dimension {} but {} has {}; pad first",
            left.name(),
            left.dim(),
            right.name(),
            right.dim()
        )));
    }
    if n_pairs == 0 {
        return Err(Error::Insufficient("n_pairs must be at least 1".into()));
    }
    let pairs = sample_pairs(pair.len(), n_pairs, seed)?;
    let dim = left.dim();
    let angles: Vec<Option<f64>> = pairs
        .par_chunks(CHUNK_PAIRS)
        .flat_map_iter(|chunk| {
            let mut d1 = vec![0.0; dim];
            let mut d2 = vec![0.0; dim];
            chunk.iter().map(move |&(u, v)| {
                difference_into(left.row(u), left.row(v), &mut d1);
                difference_into(right.row(v), right.row(u), &mut d2);
                cosine(&d1, &d2).ok().map(f64::acos)
            })
        })
        .collect();
    let skipped = angles.iter().filter(|a| a.is_none()).count();
    Ok((angles.into_iter().flatten().collect(), skipped))
}

/// Samples `n_pairs` random word pairs and summarizes their cross-set
/// difference angles with a [`HISTOGRAM_BINS`]-bin histogram over `[0, π]`.
pub fn sample_angles(pair: &AlignedPair, n_pairs: usize, seed: u64) -> Result<AngleStats> {
    sample_angles_with_bins(pair, n_pairs, seed, HISTOGRAM_BINS)
}

pub fn sample_angles_with_bins(
    pair: &AlignedPair,
    n_pairs: usize,
    seed: u64,
    bins: usize,
) -> Result<AngleStats> {
    let (angles, skipped) = sample_angle_values(pair, n_pairs, seed)?;
    if angles.is_empty() {
        return Err(Error::Insufficient(format!(
            "all {skipped} sampled pairs were degenerate"
        )));
    }
    AngleStats::from_angles(&angles, skipped, seed, bins)
}

/// `vocab_size` standard-Gaussian vectors scaled to unit length.
pub fn random_unit_set(
    name: impl Into<String>,
    vocab_size: usize,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingSet> {
    let mut data = vec![0.0; vocab_size * dim];
    data.par_chunks_mut(dim * CHUNK_PAIRS.max(1))
        .enumerate()
        .try_for_each(|(c, block)| {
            let mut rng = stream_rng(seed, c as u64);
            block.chunks_mut(dim).try_for_each(|row| {
                row.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                l2_normalize_in_place(row)
            })
        })?;
    let vocab = (0..vocab_size).map(|i| format!("w{i}")).collect();
    EmbeddingSet::new(name, dim, vocab, data)
}

/// Applies one random signed permutation of the coordinates (an orthogonal
/// map) to every row of `set`.
pub fn random_signed_permutation(set: &EmbeddingSet, seed: u64) -> Result<EmbeddingSet> {
    let mut rng = stream_rng(seed, u64::MAX);
    let dim = set.dim();
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(&mut rng);
    let signs: Vec<f64> = (0..dim)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut data = Vec::with_capacity(set.len() * dim);
    for row in set.rows() {
        data.extend(perm.iter().zip(&signs).map(|(&p, s)| row[p] * s));
    }
    EmbeddingSet::new(set.name(), dim, set.vocab().to_vec(), data)
}

/// Runs [`sample_angles`] on pairs of independent random unit-vector sets,
/// one pair per dimension, ordered by dimension.
pub fn variance_vs_dimension(
    dims: &[usize],
    vocab_size: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<Vec<(usize, AngleStats)>> {
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.into_iter()
        .map(|dim| {
            if dim < 2 {
                return Err(Error::Insufficient(format!("dimension {dim} is below 2")));
            }
            let base = splitmix64(seed ^ (dim as u64).rotate_left(32));
            let left = random_unit_set("left", vocab_size, dim, base)?;
            let right = random_unit_set("right", vocab_size, dim, splitmix64(base))?;
            let pair = AlignedPair::new(left, right)?;
            Ok((dim, sample_angles(&pair, n_pairs, seed)?))
        })
        .collect()
}

/// Writes the histogram as CSV: a `# n=.. mean=.. var=.. seed=..` comment,
/// the `bin_lower,bin_upper,density` header, then one row per bin.
pub fn write_histogram<W: Write>(stats: &AngleStats, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# n={} mean={} var={} seed={}",
        stats.sample_count, stats.mean, stats.variance, stats.seed
    )?;
    writeln!(w, "bin_lower,bin_upper,density")?;
    for bin in &stats.histogram {
        writeln!(w, "{},{},{}", bin.lower, bin.upper, bin.density)?;
    }
    Ok(())
}

pub fn export_histogram(stats: &AngleStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_histogram(stats, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::intersect;

    fn random_pair(vocab: usize, dim: usize, seed: u64) -> AlignedPair {
        let l = random_unit_set("l", vocab, dim, seed).unwrap();
        let r = random_unit_set("r", vocab, dim, seed + 1).unwrap();
        AlignedPair::new(l, r).unwrap()
    }

    #[test]
    fn identical_sets_give_pi() {
        let s = random_unit_set("s", 50, 8, 3).unwrap();
        let pair = intersect(&s, &s);
        let (angles, skipped) = sample_angle_values(&pair, 2000, 9).unwrap();
        assert_eq!(skipped, 0);
        assert!(angles.iter().all(|&a| a == PI));
    }

    #[test]
    fn pairs_are_distinct_and_in_range() {
        let pairs = sample_pairs(3, 10_000, 1).unwrap();
        assert_eq!(pairs.len(), 10_000);
        assert!(pairs.iter().all(|&(u, v)| u != v && u < 3 && v < 3));
        // Every ordered pair of 3 tokens shows up.
        for u in 0..3 {
            for v in 0..3 {
                if u != v {
                    assert!(pairs.contains(&(u, v)));
                }
            }
        }
        assert!(sample_pairs(1, 10, 1).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let pair = random_pair(200, 16, 5);
        let a = sample_angles(&pair, 10_000, 77).unwrap();
        let b = sample_angles(&pair, 10_000, 77).unwrap();
        assert_eq!(a, b);
        let c = sample_angles(&pair, 10_000, 78).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn independent_of_thread_count() {
        let pair = random_pair(300, 12, 11);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_angles(&pair, 20_000, 4).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sample_angles(&pair, 20_000, 4).unwrap());
        assert_eq!(one, many);
    }

    #[test]
    fn histogram_is_a_density() {
        let pair = random_pair(500, 10, 2);
        let stats = sample_angles(&pair, 5000, 1).unwrap();
        assert_eq!(stats.histogram.len(), HISTOGRAM_BINS);
        let width = PI / HISTOGRAM_BINS as f64;
        let total: f64 = stats.histogram.iter().map(|b| b.density * width).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(stats.histogram[0].lower, 0.0);
        assert!((stats.histogram.last().unwrap().upper - PI).abs() < 1e-15);
        assert!((0.0..=PI).contains(&stats.mean));
    }

    #[test]
    fn degenerate_pairs_are_skipped() {
        let l = EmbeddingSet::from_rows("l", [("a", vec![1.0, 0.0]), ("b", vec![1.0, 0.0]), ("c", vec![0.0, 1.0])])
            .unwrap();
        let pair = intersect(&l, &l);
        let stats = sample_angles(&pair, 3000, 8).unwrap();
        assert!(stats.skipped > 0);
        assert_eq!(stats.sample_count + stats.skipped, 3000);

        let dup = EmbeddingSet::from_rows("d", [("a", vec![1.0]), ("b", vec![1.0])]).unwrap();
        assert!(sample_angles(&intersect(&dup, &dup), 10, 0).is_err());
    }

    #[test]
    fn rejects_small_or_mismatched_input() {
        let one = EmbeddingSet::from_rows("o", [("a", vec![1.0, 2.0])]).unwrap();
        assert!(sample_angles(&intersect(&one, &one), 10, 0).is_err());
        let wide = EmbeddingSet::from_rows("w", [("a", vec![1.0, 2.0, 3.0])]).unwrap();
        assert!(matches!(
            sample_angles(&intersect(&one, &wide), 10, 0),
            Err(Error::DimensionMismatch(_))
        ));
        let pair = random_pair(10, 3, 0);
        assert!(sample_angles(&pair, 0, 0).is_err());
    }

    #[test]
    fn two_word_vocabulary_has_no_spread() {
        let stats = variance_vs_dimension(&[20], 2, 5000, 3).unwrap();
        let (_, s) = &stats[0];
        assert_eq!(s.variance, 0.0);
        assert!(s.histogram.iter().filter(|b| b.density > 0.0).count() == 1);
    }

    #[test]
    fn low_dimension_is_centered_but_wide() {
        let stats = variance_vs_dimension(&[300, 2], 2000, 50_000, 12).unwrap();
        assert_eq!(stats[0].0, 2);
        let (low, high) = (&stats[0].1, &stats[1].1);
        assert!((low.mean - PI / 2.0).abs() < 0.05);
        assert!(low.variance > 0.3);
        assert!(high.variance < low.variance);
    }

    #[test]
    fn signed_permutation_preserves_geometry() {
        let s = random_unit_set("s", 20, 9, 4).unwrap();
        let p = random_signed_permutation(&s, 5).unwrap();
        let mut sorted_a: Vec<f64> = s.row(3).iter().map(|x| x.abs()).collect();
        let mut sorted_b: Vec<f64> = p.row(3).iter().map(|x| x.abs()).collect();
        sorted_a.sort_by(f64::total_cmp);
        sorted_b.sort_by(f64::total_cmp);
        assert_eq!(sorted_a, sorted_b);
        let d1 = crate::vector_ops::euclidean(s.row(1), s.row(7)).unwrap();
        let d2 = crate::vector_ops::euclidean(p.row(1), p.row(7)).unwrap();
        assert!((d1 - d2).abs() < 1e-14);
    }

    #[test]
    fn single_sample_statistics() {
        let s = AngleStats::from_angles(&[1.0], 0, 0, 10).unwrap();
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.mean, 1.0);
        assert!(AngleStats::from_angles(&[], 0, 0, 10).is_err());
    }

    #[test]
    fn csv_layout() {
        let pair = random_pair(50, 6, 1);
        let stats = sample_angles(&pair, 1000, 42).unwrap();
        let mut out = Vec::new();
        write_histogram(&stats, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 102);
        assert!(lines[0].starts_with("# n=1000 mean="));
        assert!(lines[0].ends_with(" seed=42"));
        assert_eq!(lines[1], "bin_lower,bin_upper,density");
        assert_eq!(lines[2].split(',').count(), 3);

        let mut again = Vec::new();
        write_histogram(&stats, &mut again).unwrap();
        assert_eq!(text.as_bytes(), &again[..]);
    }
}
