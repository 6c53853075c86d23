//! Random instances shared by the property and acceptance tests.
#![allow(dead_code)]

use gitstab_core::config::{Item, WeightedConfiguration};
use gitstab_core::exact::{q, RationalMatrix, Subspace, Q};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Column span of a random `ambient × k` matrix with entries in `-9..=9`.
pub fn random_span(rng: &mut impl Rng, ambient: usize, k: usize) -> Subspace {
    let entries: Vec<i64> = (0..ambient * k).map(|_| rng.gen_range(-9..=9)).collect();
    Subspace::canonicalize(&RationalMatrix::from_i64(ambient, k, &entries))
}

/// Span of a few vectors with small entries, so coincidences between items
/// (shared lines, containments) happen often enough to matter.
pub fn sparse_span(rng: &mut impl Rng, ambient: usize, k: usize) -> Subspace {
    let entries: Vec<i64> = (0..ambient * k).map(|_| rng.gen_range(-1..=1)).collect();
    Subspace::canonicalize(&RationalMatrix::from_i64(ambient, k, &entries))
}

/// `m` nonzero items in `Q^n ⊗ Q^d` with integer weights in `1..=5`.
pub fn random_config(rng: &mut impl Rng, n: usize, d: usize, m: usize) -> WeightedConfiguration {
    let items = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=n * d);
            let s = loop {
                let s = if rng.gen_bool(0.5) {
                    sparse_span(rng, n * d, k)
                } else {
                    random_span(rng, n * d, k)
                };
                if !s.is_zero() {
                    break s;
                }
            };
            Item {
                subspace: s,
                weight: q(rng.gen_range(1..=5)),
            }
        })
        .collect();
    WeightedConfiguration::new(n, d, items).unwrap()
}

pub fn random_invertible(rng: &mut impl Rng, n: usize) -> RationalMatrix {
    loop {
        let entries: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-3..=3)).collect();
        let g = RationalMatrix::from_i64(n, n, &entries);
        if !g.determinant().unwrap().is_zero() {
            return g;
        }
    }
}

/// `m` pairwise transverse planes in `Q^4`.
pub fn transverse_planes(rng: &mut impl Rng, m: usize) -> Vec<Subspace> {
    loop {
        let planes: Vec<Subspace> = (0..m).map(|_| random_span(rng, 4, 2)).collect();
        let ok = planes.iter().all(|p| p.dim() == 2)
            && (0..m).all(|i| (i + 1..m).all(|j| planes[i].meet(&planes[j]).unwrap().is_zero()));
        if ok {
            return planes;
        }
    }
}

/// Integer weights with `ω_i < Σ_{j≠i} ω_j`, i.e. strictly inside the
/// hypersimplex for planes in `Q^4`.
pub fn interior_plane_weights(rng: &mut impl Rng, m: usize) -> Vec<Q> {
    loop {
        let w: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=10)).collect();
        let total: i64 = w.iter().sum();
        if w.iter().all(|&x| 2 * x < total) {
            return w.into_iter().map(q).collect();
        }
    }
}

pub fn planes_config(planes: &[Subspace], w: &[Q]) -> WeightedConfiguration {
    let items = planes
        .iter()
        .zip(w)
        .map(|(p, x)| Item {
            subspace: p.clone(),
            weight: x.clone(),
        })
        .collect();
    WeightedConfiguration::new(4, 1, items).unwrap()
}

/// A random sorted zero-sum integer vector of length `n`.
pub fn sorted_zero_sum(rng: &mut impl Rng, n: usize) -> Vec<i64> {
    let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..=6)).collect();
    let mean_times_n: i64 = v.iter().sum();
    // subtract the mean after scaling by n to stay integral
    for x in v.iter_mut() {
        *x = *x * n as i64 - mean_times_n;
    }
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}
