//! Normalization, zero-padding, and distance/angle geometry on `f64` vectors.

use rayon::prelude::*;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

/// Norms at or below this are treated as zero.
pub const ZERO_NORM_TOLERANCE: f64 = 1e-12;

/// Which end of a vector receives the zero entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PadSide {
    Front,
    #[default]
    Rear,
}

impl std::str::FromStr for PadSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "front" => Ok(PadSide::Front),
            "rear" => Ok(PadSide::Rear),
            other => Err(format!("unknown pad side {other:?} (expected front or rear)")),
        }
    }
}

impl std::fmt::Display for PadSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PadSide::Front => "front",
            PadSide::Rear => "rear",
        })
    }
}

/// Insert `count` zeros on `side`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadSpec {
    pub side: PadSide,
    pub count: usize,
}

impl PadSpec {
    pub fn front(count: usize) -> Self {
        PadSpec {
            side: PadSide::Front,
            count,
        }
    }

    pub fn rear(count: usize) -> Self {
        PadSpec {
            side: PadSide::Rear,
            count,
        }
    }
}

/// Parses `rear:200` / `front:3`.
impl std::str::FromStr for PadSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (side, count) = s
            .split_once(':')
            .ok_or_else(|| format!("pad spec {s:?} must look like rear:200"))?;
        Ok(PadSpec {
            side: side.parse()?,
            count: count
                .parse()
                .map_err(|_| format!("bad pad count {count:?}"))?,
        })
    }
}

impl std::fmt::Display for PadSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.side, self.count)
    }
}

fn check_len(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn squared_norm(v: &[f64]) -> f64 {
    dot(v, v)
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    squared_norm(v).sqrt()
}

pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    l2_normalize_in_place(&mut out)?;
    Ok(out)
}

/// Scales `v` to unit length. Leaves `v` untouched on error.
pub fn l2_normalize_in_place(v: &mut [f64]) -> Result<()> {
    let n = norm(v);
    if n <= ZERO_NORM_TOLERANCE {
        return Err(Error::ZeroVector { norm: n });
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(())
}

/// Scales every row to unit length. Fails on the first zero row, naming its
/// token.
pub fn normalize_vectors(set: &EmbeddingSet) -> Result<EmbeddingSet> {
    let dim = set.dim();
    let mut data = set.matrix().to_vec();
    data.par_chunks_mut(dim)
        .enumerate()
        .try_for_each(|(i, row)| {
            l2_normalize_in_place(row).map_err(|e| match e {
                Error::ZeroVector { norm } => Error::ZeroTokenVector {
                    token: set.vocab()[i].clone(),
                    norm,
                },
                e => e,
            })
        })?;
    set.with_matrix(dim, data)
}

/// Divides each column by its l2 norm over the whole vocabulary.
pub fn normalize_dimensions(set: &EmbeddingSet) -> Result<EmbeddingSet> {
    let dim = set.dim();
    let mut sums = vec![0.0; dim];
    for row in set.rows() {
        for (s, x) in sums.iter_mut().zip(row) {
            *s += x * x;
        }
    }
    let norms: Vec<f64> = sums.into_iter().map(f64::sqrt).collect();
    if let Some((index, &norm)) = norms
        .iter()
        .enumerate()
        .find(|(_, &n)| n <= ZERO_NORM_TOLERANCE)
    {
        return Err(Error::ZeroColumn { index, norm });
    }
    let mut data = set.matrix().to_vec();
    data.par_chunks_mut(dim).for_each(|row| {
        for (x, n) in row.iter_mut().zip(&norms) {
            *x /= n;
        }
    });
    set.with_matrix(dim, data)
}

pub fn pad(v: &[f64], spec: PadSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + spec.count);
    pad_into(v, spec, &mut out);
    out
}

fn pad_into(v: &[f64], spec: PadSpec, out: &mut Vec<f64>) {
    match spec.side {
        PadSide::Front => {
            out.extend(std::iter::repeat_n(0.0, spec.count));
            out.extend_from_slice(v);
        }
        PadSide::Rear => {
            out.extend_from_slice(v);
            out.extend(std::iter::repeat_n(0.0, spec.count));
        }
    }
}

/// Pads every row of a set.
pub fn pad_set(set: &EmbeddingSet, spec: PadSpec) -> Result<EmbeddingSet> {
    if spec.count == 0 {
        return Ok(set.clone());
    }
    let dim = set.dim() + spec.count;
    let mut data = Vec::with_capacity(set.len() * dim);
    for row in set.rows() {
        pad_into(row, spec, &mut data);
    }
    set.with_matrix(dim, data)
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(u, v)?;
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(u, v)?;
    let (uu, vv) = (squared_norm(u), squared_norm(v));
    for n in [uu.sqrt(), vv.sqrt()] {
        if n <= ZERO_NORM_TOLERANCE {
            return Err(Error::ZeroVector { norm: n });
        }
    }
    // sqrt(uu * vv) rather than |u||v|: for v = -u this is exactly uu.
    Ok((dot(u, v) / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

/// Angle in `[0, π]`.
pub fn angle_between(u: &[f64], v: &[f64]) -> Result<f64> {
    cosine(u, v).map(f64::acos)
}

/// Writes `u - v` into `out`.
pub(crate) fn difference_into(u: &[f64], v: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(u).zip(v) {
        *o = a - b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_three_four() {
        let v = l2_normalize(&[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_unit_is_identity() {
        let s = 0.5f64.sqrt();
        let v = l2_normalize(&[s, -s, 0.0]).unwrap();
        assert!((v[0] - s).abs() < 1e-15 && (v[1] + s).abs() < 1e-15);
        assert_eq!(l2_normalize(&[0.0, 1.0, 0.0]).unwrap(), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn normalize_zero_fails() {
        assert!(matches!(l2_normalize(&[0.0, 0.0]), Err(Error::ZeroVector { .. })));
        assert!(l2_normalize(&[1e-13, 0.0]).is_err());
    }

    #[test]
    fn set_normalization_names_token() {
        let set = EmbeddingSet::from_rows("s", [("ok", vec![1.0, 1.0]), ("zero", vec![0.0, 0.0])])
            .unwrap();
        match normalize_vectors(&set) {
            Err(Error::ZeroTokenVector { token, .. }) => assert_eq!(token, "zero"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_normalization_two_words() {
        let set = EmbeddingSet::from_rows("s", [("a", vec![3.0]), ("b", vec![4.0])]).unwrap();
        let out = normalize_dimensions(&set).unwrap();
        assert!((out.row(0)[0] - 0.6).abs() < 1e-15);
        assert!((out.row(1)[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dimension_normalization_zero_column() {
        let set = EmbeddingSet::from_rows("s", [("a", vec![5.0, 0.0])]).unwrap();
        assert!(matches!(
            normalize_dimensions(&set),
            Err(Error::ZeroColumn { index: 1, .. })
        ));
    }

    #[test]
    fn padding_examples() {
        assert_eq!(pad(&[1.0, 2.0], PadSpec::front(2)), [0.0, 0.0, 1.0, 2.0]);
        assert_eq!(pad(&[1.0, 2.0], PadSpec::rear(1)), [1.0, 2.0, 0.0]);
        assert_eq!(pad(&[1.0, 2.0], PadSpec::rear(0)), [1.0, 2.0]);
        let v: Vec<f64> = (0..100).map(|i| i as f64 + 1.0).collect();
        let p = pad(&v, PadSpec::rear(200));
        assert_eq!(p.len(), 300);
        assert_eq!(&p[..100], &v[..]);
        assert!(p[100..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pad_spec_parsing() {
        assert_eq!("rear:200".parse::<PadSpec>().unwrap(), PadSpec::rear(200));
        assert_eq!("front:3".parse::<PadSpec>().unwrap(), PadSpec::front(3));
        assert!("middle:3".parse::<PadSpec>().is_err());
        assert!("rear".parse::<PadSpec>().is_err());
        assert!("rear:-1".parse::<PadSpec>().is_err());
        assert_eq!(PadSpec::rear(200).to_string(), "rear:200");
    }

    #[test]
    fn distances() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(matches!(
            euclidean(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn cosines_and_angles() {
        let x = [0.3, -1.2, 2.5];
        let x2: Vec<f64> = x.iter().map(|v| v * 2.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(cosine(&x, &x).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&x, &x2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(angle_between(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), PI / 2.0);
        assert_eq!(angle_between(&x, &neg).unwrap(), PI);
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn rows_unit_after_both_normalizations() {
        let set = EmbeddingSet::from_rows(
            "s",
            (0..30).map(|i| {
                let row: Vec<f64> = (0..7).map(|j| ((i * 7 + j) as f64 * 0.37).sin() + 0.1).collect();
                (format!("w{i}"), row)
            }),
        )
        .unwrap();
        let out = normalize_vectors(&normalize_dimensions(&set).unwrap()).unwrap();
        for row in out.rows() {
            assert!((norm(row) - 1.0).abs() < 1e-12);
        }
    }

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, len)
    }

    proptest! {
        #[test]
        fn padding_preserves_norms_and_distances(
            (u, v) in (1usize..40).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n))),
            count in 0usize..50,
            front in any::<bool>(),
        ) {
            let spec = PadSpec { side: if front { PadSide::Front } else { PadSide::Rear }, count };
            let (pu, pv) = (pad(&u, spec), pad(&v, spec));
            prop_assert_eq!(pu.len(), u.len() + count);
            prop_assert_eq!(norm(&pu), norm(&u));
            prop_assert_eq!(euclidean(&pu, &pv).unwrap(), euclidean(&u, &v).unwrap());
        }

        #[test]
        fn euclidean_is_symmetric(
            (u, v) in (1usize..40).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n))),
        ) {
            prop_assert_eq!(euclidean(&u, &v).unwrap(), euclidean(&v, &u).unwrap());
        }

        #[test]
        fn angle_in_range(
            (u, v) in (1usize..40).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n))),
        ) {
            prop_assume!(norm(&u) > 1e-6 && norm(&v) > 1e-6);
            let a = angle_between(&u, &v).unwrap();
            prop_assert!((0.0..=PI).contains(&a));
        }
    }
}
