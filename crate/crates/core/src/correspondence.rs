//! Packing configurations into a single matrix, the Gale transform, and
//! orbit-equivalence testing under `GL(V)`.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Item, WeightedConfiguration};
use crate::error::{Error, Result};
use crate::exact::{kernel, q, RationalMatrix, Subspace, Q};

/// An `n × (k_1 + … + k_m)` matrix split into column blocks of widths `k_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedPoint {
    matrix: RationalMatrix,
    blocks: Vec<usize>,
}

impl PackedPoint {
    pub fn new(matrix: RationalMatrix, blocks: Vec<usize>) -> Result<Self> {
        let total: usize = blocks.iter().sum();
        if total != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.cols(),
                found: total,
            });
        }
        Ok(PackedPoint { matrix, blocks })
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> RationalMatrix {
        let start: usize = self.blocks[..i].iter().sum();
        let cols: Vec<Vec<Q>> = (start..start + self.blocks[i])
            .map(|c| self.matrix.column(c))
            .collect();
        RationalMatrix::from_columns(&cols, self.matrix.rows()).expect("block columns")
    }

    /// Indices of blocks without full column rank.
    pub fn degenerate_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&i| self.block(i).rank() < self.blocks[i])
            .collect()
    }

    /// Row space of the packed matrix, the point of the big Grassmannian.
    pub fn row_space(&self) -> Subspace {
        Subspace::span_unchecked(self.matrix.cols(), self.matrix.row_vectors())
    }
}

/// Packs the canonical bases of the items side by side.
pub fn gm_forward(c: &WeightedConfiguration) -> Result<PackedPoint> {
    if c.d() != 1 {
        return Err(Error::InvalidArgument("packing needs d = 1".into()));
    }
    if let Some(i) = c.items().iter().position(|it| it.subspace.is_zero()) {
        return Err(Error::InvalidArgument(format!("item {i} is zero")));
    }
    let blocks = c.dims();
    let total: usize = blocks.iter().sum();
    if c.n() >= total {
        return Err(Error::InvalidArgument(format!(
            "need n < Σk, got n = {} and Σk = {total}",
            c.n()
        )));
    }
    let cols: Vec<Vec<Q>> = c
        .items()
        .iter()
        .flat_map(|it| it.subspace.basis().iter().cloned())
        .collect();
    let matrix = RationalMatrix::from_columns(&cols, c.n())?;
    if matrix.rank() < c.n() {
        return Err(Error::InvalidArgument(
            "packed matrix does not have full rank".into(),
        ));
    }
    PackedPoint::new(matrix, blocks)
}

/// Column spans of the blocks, carrying the given weights.
pub fn gm_backward(p: &PackedPoint, weights: &[Q]) -> Result<WeightedConfiguration> {
    if weights.len() != p.blocks.len() {
        return Err(Error::InvalidArgument(
            "one weight per block required".into(),
        ));
    }
    if let Some(&i) = p.degenerate_blocks().first() {
        return Err(Error::BlockDegenerate(i));
    }
    let n = p.matrix.rows();
    let items = (0..p.blocks.len())
        .map(|i| Item {
            subspace: Subspace::canonicalize(&p.block(i)),
            weight: weights[i].clone(),
        })
        .collect();
    WeightedConfiguration::new(n, 1, items)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaleResult {
    pub config: WeightedConfiguration,
    /// Blocks of the kernel basis that lost rank.
    pub degenerate_blocks: Vec<usize>,
}

/// Block row spans of a kernel basis of the packed matrix, in dimension `Σk − n`.
pub fn gale_transform(c: &WeightedConfiguration) -> Result<GaleResult> {
    let p = gm_forward(c)?;
    let ker = kernel(p.matrix());
    let dual = ker.dim();
    // kernel basis as columns: Σk × dual; block i is its rows in block i
    let basis = ker.basis_matrix();
    let mut start = 0;
    let mut items = Vec::with_capacity(p.blocks.len());
    let mut degenerate = Vec::new();
    for (i, &k) in p.blocks.iter().enumerate() {
        let rows: Vec<Vec<Q>> = (start..start + k).map(|r| basis.row(r).to_vec()).collect();
        let s = Subspace::span(dual, &rows)?;
        if s.dim() < k {
            degenerate.push(i);
        }
        items.push(Item {
            subspace: s,
            weight: c.items()[i].weight.clone(),
        });
        start += k;
    }
    Ok(GaleResult {
        config: WeightedConfiguration::new(dual, 1, items)?,
        degenerate_blocks: degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitAnswer {
    /// An invertible `g` with `g · a = b` item by item.
    Yes(RationalMatrix),
    No,
    Inconclusive,
}

fn pattern(c: &WeightedConfiguration) -> Vec<(usize, usize)> {
    let items = c.items();
    let mut out = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let m = items[i]
                .subspace
                .meet(&items[j].subspace)
                .expect("same ambient");
            out.push((i, m.dim()));
            out.push((j, m.dim()));
        }
    }
    out
}

/// Searches for `g ∈ GL(V)` with `(g ⊗ I) K_i = K'_i` for every `i`. Weights
/// are not compared.
pub fn orbit_equivalent(
    a: &WeightedConfiguration,
    b: &WeightedConfiguration,
    trials: usize,
    seed: u64,
) -> Result<OrbitAnswer> {
    if a.n() != b.n() || a.d() != b.d() || a.len() != b.len() || a.dims() != b.dims() {
        return Err(Error::InvalidArgument(
            "configurations have different shapes".into(),
        ));
    }
    if pattern(a) != pattern(b) {
        return Ok(OrbitAnswer::No);
    }
    let (n, d) = (a.n(), a.d());
    let ks = a.dims();
    let g_unknowns = n * n;
    let total = g_unknowns + ks.iter().map(|k| k * k).sum::<usize>();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut offset = g_unknowns;
    for (ia, ib) in a.items().iter().zip(b.items()) {
        let (ba, bb) = (ia.subspace.basis(), ib.subspace.basis());
        let k = ba.len();
        for r in 0..n {
            for l in 0..d {
                let p = r * d + l;
                for j in 0..k {
                    let mut row = vec![Q::zero(); total];
                    for c in 0..n {
                        row[r * n + c] = ba[j][c * d + l].clone();
                    }
                    for t in 0..k {
                        row[offset + t * k + j] = -bb[t][p].clone();
                    }
                    rows.push(row);
                }
            }
        }
        offset += k * k;
    }
    let sol = kernel(&RationalMatrix::from_rows(rows, total)?);
    let g_parts: Vec<Vec<Q>> = sol
        .basis()
        .iter()
        .map(|v| v[..g_unknowns].to_vec())
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    if g_parts.is_empty() {
        return Ok(OrbitAnswer::No);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials.max(1) {
        let coeffs: Vec<Q> = (0..g_parts.len())
            .map(|i| {
                if t == 0 {
                    q(1 + i as i64)
                } else {
                    q(rng.gen_range(-50..=50))
                }
            })
            .collect();
        let mut entries = vec![Q::zero(); g_unknowns];
        for (c, v) in coeffs.iter().zip(&g_parts) {
            for (e, x) in entries.iter_mut().zip(v) {
                *e += c * x;
            }
        }
        let g = RationalMatrix::new(n, n, entries)?;
        if !g.determinant()?.is_zero() {
            return Ok(OrbitAnswer::Yes(g));
        }
    }
    Ok(OrbitAnswer::Inconclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_lines() -> WeightedConfiguration {
        WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1), (&[&[1, 1]], 1)])
            .unwrap()
    }

    #[test]
    fn packing_round_trip() {
        let c = three_lines();
        let p = gm_forward(&c).unwrap();
        assert_eq!(
            p.matrix(),
            &RationalMatrix::from_i64(2, 3, &[1, 0, 1, 0, 1, 1])
        );
        assert_eq!(p.blocks(), &[1, 1, 1]);
        assert_eq!(gm_backward(&p, &c.weights()).unwrap(), c);
        let mut scaled = p.matrix().clone();
        scaled.set(0, 2, q(5));
        scaled.set(1, 2, q(5));
        let p2 = PackedPoint::new(scaled, vec![1, 1, 1]).unwrap();
        assert_eq!(gm_backward(&p2, &c.weights()).unwrap(), c);
        let degenerate = PackedPoint::new(
            RationalMatrix::from_i64(2, 3, &[1, 0, 0, 0, 1, 0]),
            vec![1, 1, 1],
        )
        .unwrap();
        assert_eq!(
            gm_backward(&degenerate, &c.weights()).unwrap_err(),
            Error::BlockDegenerate(2)
        );
    }

    #[test]
    fn packing_preconditions() {
        let two =
            WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]).unwrap();
        assert!(gm_forward(&two).is_err());
    }

    #[test]
    fn gale_of_three_lines() {
        let g = gale_transform(&three_lines()).unwrap();
        assert_eq!(g.config.n(), 1);
        assert!(g.config.items().iter().all(|it| it.subspace.is_full()));
        assert!(g.degenerate_blocks.is_empty());
    }

    #[test]
    fn orbit_examples() {
        let c = three_lines();
        let g = RationalMatrix::from_i64(2, 2, &[2, 1, 1, 1]);
        let gc = c.transform(&g).unwrap();
        match orbit_equivalent(&c, &gc, 10, 1).unwrap() {
            OrbitAnswer::Yes(h) => assert_eq!(c.transform(&h).unwrap(), gc),
            other => panic!("expected Yes, got {other:?}"),
        }
        assert!(matches!(
            orbit_equivalent(&c, &c, 10, 1).unwrap(),
            OrbitAnswer::Yes(_)
        ));
        let two =
            WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]).unwrap();
        let same =
            WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[1, 0]], 1)]).unwrap();
        assert_eq!(
            orbit_equivalent(&two, &same, 10, 1).unwrap(),
            OrbitAnswer::No
        );
    }
}
