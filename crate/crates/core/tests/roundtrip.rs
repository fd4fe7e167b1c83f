use metaembed::io::{
    load_native, load_text, load_word2vec_binary, save_native, save_text, save_word2vec_binary,
};
use metaembed::EmbeddingSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

fn random_set(words: usize, dim: usize, seed: u64) -> EmbeddingSet {
    let mut rng = Pcg64::seed_from_u64(seed);
    let vocab = (0..words).map(|i| format!("tok{i}")).collect();
    let data = (0..words * dim)
        .map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-6..4)))
        .collect();
    EmbeddingSet::new("r", dim, vocab, data).unwrap()
}

fn bits(set: &EmbeddingSet) -> Vec<u64> {
    set.matrix().iter().map(|x| x.to_bits()).collect()
}

#[test]
fn native_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (words, dim) in [(1000, 300), (10_000, 16), (0, 7)] {
        let set = random_set(words, dim, words as u64);
        let path = dir.path().join("r.meb");
        save_native(&set, &path).unwrap();
        let back = load_native(&path).unwrap();
        assert_eq!(back.vocab(), set.vocab());
        assert_eq!(back.dim(), dim);
        assert_eq!(bits(&back), bits(&set));
    }
}

#[test]
fn text_round_trip_1000_by_300() {
    let dir = tempfile::tempdir().unwrap();
    let set = random_set(1000, 300, 1);
    let path = dir.path().join("r.txt");
    save_text(&set, &path).unwrap();
    let back = load_text(&path).unwrap();
    assert_eq!(back.duplicates, 0);
    assert_eq!(back.set.vocab(), set.vocab());
    // Shortest round-trip formatting is lossless.
    assert_eq!(bits(&back.set), bits(&set));
}

#[test]
fn word2vec_round_trip_500_words() {
    let dir = tempfile::tempdir().unwrap();
    // Values representable in f32 survive the narrowing exactly.
    let set = random_set(500, 50, 2).map_values(|x| x as f32 as f64).unwrap();
    let path = dir.path().join("r.bin");
    save_word2vec_binary(&set, &path).unwrap();
    let back = load_word2vec_binary(&path).unwrap();
    assert_eq!(back.set.len(), 500);
    assert_eq!(back.set.vocab(), set.vocab());
    assert_eq!(bits(&back.set), bits(&set));
}

#[test]
fn missing_file_reports_path() {
    let err = load_text("/nonexistent/embeddings.txt").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/embeddings.txt"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_and_native_round_trip(
        rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 1..20)
    ) {
        let set = EmbeddingSet::from_rows(
            "p",
            rows.into_iter().enumerate().map(|(i, r)| (format!("w{i}"), r)),
        ).unwrap();
        let mut text = Vec::new();
        metaembed::io::write_text(&set, &mut text).unwrap();
        let back = metaembed::io::read_text(&text[..], "p").unwrap().set;
        for (a, b) in back.matrix().iter().zip(set.matrix()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let mut native = Vec::new();
        metaembed::io::write_native(&set, &mut native).unwrap();
        let back = metaembed::io::read_native(&native[..], "p").unwrap();
        prop_assert_eq!(bits(&back), bits(&set));
    }
}
