//! Library results checked against independent brute-force computations.

use metaembed::angles::random_unit_set;
use metaembed::eval::{predict_analogies, AnalogyDataset, AnalogyOptions, AnalogyQuestion, SimilarityDataset};
use metaembed::vector_ops::{angle_between, normalize_dimensions};
use metaembed::{eval_analogy, eval_similarity, intersect, spearman, EmbeddingSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

/// Rank by counting: rank(x_i) = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let below = x.iter().filter(|&&xj| xj < xi).count() as f64;
            let equal = x.iter().filter(|&&xj| xj == xi).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (brute_ranks(x), brute_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn spearman_matches_brute_force_with_ties() {
    let mut rng = Pcg64::seed_from_u64(17);
    for _ in 0..300 {
        let n = rng.random_range(2..40);
        let levels = rng.random_range(2..8);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
            continue;
        }
        let fast = spearman(&x, &y).unwrap();
        assert!((fast - brute_spearman(&x, &y)).abs() < 1e-12);
    }
}

#[test]
fn angle_between_matches_direct_formula() {
    let mut rng = Pcg64::seed_from_u64(3);
    for _ in 0..200 {
        let u: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let expected = (dot / (nu * nv)).acos();
        assert!((angle_between(&u, &v).unwrap() - expected).abs() < 1e-10);
    }
}

#[test]
fn dimension_normalization_gives_unit_columns() {
    let mut rng = Pcg64::seed_from_u64(5);
    let set = EmbeddingSet::from_rows(
        "m",
        (0..100).map(|i| (format!("w{i}"), (0..20).map(|_| rng.random_range(-3.0..3.0)).collect())),
    )
    .unwrap();
    let out = normalize_dimensions(&set).unwrap();
    for j in 0..20 {
        let col: f64 = out.rows().map(|r| r[j] * r[j]).sum();
        assert!((col.sqrt() - 1.0).abs() < 1e-12);
        // Each column is a positive rescaling of the input column.
        let ratio = out.row(0)[j] / set.row(0)[j];
        for (o, i) in out.rows().zip(set.rows()) {
            assert!((o[j] - i[j] * ratio).abs() < 1e-12);
        }
    }
}

/// Scores every candidate with a freshly computed cosine.
fn exhaustive_cosadd(set: &EmbeddingSet, q: &AnalogyQuestion) -> Option<String> {
    let (a, b, c) = (set.vector(&q.a)?, set.vector(&q.b)?, set.vector(&q.c)?);
    set.vector(&q.d)?;
    let target: Vec<f64> = (0..set.dim()).map(|k| b[k] - a[k] + c[k]).collect();
    let tn = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best: Option<(f64, &str)> = None;
    for (token, row) in set.vocab().iter().zip(set.rows()) {
        if [&q.a, &q.b, &q.c].contains(&token) {
            continue;
        }
        let rn = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cos = target.iter().zip(row).map(|(x, y)| x * y).sum::<f64>() / (tn * rn);
        if best.is_none_or(|(s, _)| cos > s) {
            best = Some((cos, token));
        }
    }
    best.map(|(_, t)| t.to_owned())
}

fn random_analogy_instance(rng: &mut Pcg64) -> (EmbeddingSet, AnalogyDataset) {
    let n = rng.random_range(4..=20);
    let dim = rng.random_range(2..=8);
    let set = EmbeddingSet::from_rows(
        "syn",
        (0..n).map(|i| (format!("w{i}"), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())),
    )
    .unwrap();
    let questions = (0..10)
        .map(|_| {
            let mut pick = || format!("w{}", rng.random_range(0..n + 2));
            AnalogyQuestion {
                a: pick(),
                b: pick(),
                c: pick(),
                d: pick(),
                category: "syn".into(),
            }
        })
        .collect();
    (set, AnalogyDataset::new("syn", questions).unwrap())
}

#[test]
fn cosadd_matches_exhaustive_scorer() {
    let mut rng = Pcg64::seed_from_u64(99);
    let mut checked = 0;
    while checked < 50 {
        let (set, data) = random_analogy_instance(&mut rng);
        let covered: Vec<&AnalogyQuestion> = data
            .questions
            .iter()
            .filter(|q| [&q.a, &q.b, &q.c, &q.d].iter().all(|t| set.contains(t)))
            .collect();
        if covered.is_empty() {
            continue;
        }
        let correct = covered
            .iter()
            .filter(|q| exhaustive_cosadd(&set, q).as_deref() == Some(q.d.as_str()))
            .count();
        let report = eval_analogy(&set, &data).unwrap();
        assert_eq!(report.covered, covered.len());
        assert_eq!(report.covered + report.skipped, data.len());
        assert_eq!(report.value, correct as f64 / covered.len() as f64);
        checked += 1;
    }
}

#[test]
fn evaluations_ignore_uniform_scaling() {
    let set = random_unit_set("s", 60, 12, 8).unwrap();
    let scaled = set.map_values(|x| x * 7.3).unwrap();
    let mut rng = Pcg64::seed_from_u64(1);
    let pairs = (0..40)
        .map(|_| {
            (
                format!("w{}", rng.random_range(0..60)),
                format!("w{}", rng.random_range(0..60)),
                rng.random_range(0.0..10.0),
            )
        })
        .filter(|(a, b, _)| a != b)
        .collect();
    let data = SimilarityDataset::new("sim", pairs).unwrap();
    let a = eval_similarity(&set, &data).unwrap();
    let b = eval_similarity(&scaled, &data).unwrap();
    assert!((a.value - b.value).abs() < 1e-12);

    let queries: Vec<[usize; 3]> = (0..100)
        .map(|_| [rng.random_range(0..60), rng.random_range(0..60), rng.random_range(0..60)])
        .collect();
    assert_eq!(
        predict_analogies(&set, &queries, AnalogyOptions::default()),
        predict_analogies(&scaled, &queries, AnalogyOptions::default())
    );
}

fn token_set() -> impl Strategy<Value = Vec<String>> {
    prop::collection::hash_set("[a-f]{1,2}", 0..20).prop_map(|s| s.into_iter().collect())
}

fn build(name: &str, tokens: &[String], offset: f64) -> EmbeddingSet {
    EmbeddingSet::new(
        name,
        2,
        tokens.to_vec(),
        (0..tokens.len() * 2).map(|i| i as f64 + offset).collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn intersection_is_symmetric_and_row_aligned(a in token_set(), b in token_set()) {
        let (sa, sb) = (build("a", &a, 0.0), build("b", &b, 0.5));
        let ab = intersect(&sa, &sb);
        let ba = intersect(&sb, &sa);
        let mut x: Vec<&String> = ab.shared_vocab().iter().collect();
        let mut y: Vec<&String> = ba.shared_vocab().iter().collect();
        x.sort();
        y.sort();
        prop_assert_eq!(x, y);
        let expected: Vec<&String> = a.iter().filter(|t| b.contains(t)).collect();
        prop_assert_eq!(ab.shared_vocab().iter().collect::<Vec<_>>(), expected);
        for (i, t) in ab.shared_vocab().iter().enumerate() {
            prop_assert_eq!(ab.left().row(i), sa.vector(t).unwrap());
            prop_assert_eq!(ab.right().row(i), sb.vector(t).unwrap());
        }
    }

    #[test]
    fn spearman_invariant_under_monotone_maps(
        x in prop::collection::vec(-100.0f64..100.0, 2..30),
        seed in any::<u64>(),
    ) {
        let mut rng = Pcg64::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|_| rng.random_range(-5.0..5.0)).collect();
        prop_assume!(x.iter().any(|&v| v != x[0]));
        let base = spearman(&x, &y).unwrap();
        let mapped: Vec<f64> = x.iter().map(|v| (v / 50.0).exp() * 3.0 - 1.0).collect();
        prop_assert!((spearman(&mapped, &y).unwrap() - base).abs() < 1e-12);
        prop_assert!((spearman(&y, &x).unwrap() - base).abs() < 1e-12);
    }
}
