//! Weighted configurations of subspaces of `V ⊗ W` and their slopes.
//!
//! Coordinates of `V ⊗ W` are ordered `v_1⊗w_1, v_1⊗w_2, …, v_n⊗w_d`, so the
//! entry for `v_i ⊗ w_l` sits at index `i * d + l`.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{q, QuotientChart, RationalMatrix, Subspace, Q};

/// Slope values are exact rationals.
pub type Slope = Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Item {
    pub subspace: Subspace,
    pub weight: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedConfiguration {
    n: usize,
    d: usize,
    items: Vec<Item>,
}

impl WeightedConfiguration {
    pub fn new(n: usize, d: usize, items: Vec<Item>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "dimensions must be positive, got n={n}, d={d}"
            )));
        }
        for (i, it) in items.iter().enumerate() {
            if it.subspace.ambient() != n * d {
                return Err(Error::InvalidArgument(format!(
                    "item {i} lives in dimension {}, expected {}",
                    it.subspace.ambient(),
                    n * d
                )));
            }
            if !it.weight.is_positive() {
                return Err(Error::InvalidArgument(format!(
                    "item {i} has nonpositive weight"
                )));
            }
        }
        Ok(WeightedConfiguration { n, d, items })
    }

    /// Convenience constructor from spanning vectors and weights.
    pub fn from_spans(n: usize, d: usize, items: Vec<(Vec<Vec<Q>>, Q)>) -> Result<Self> {
        let items = items
            .into_iter()
            .map(|(vs, weight)| {
                Ok(Item {
                    subspace: Subspace::span(n * d, &vs)?,
                    weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, d, items)
    }

    /// Integer shorthand used heavily by tests and the built-in corpus.
    pub fn from_i64(n: usize, d: usize, items: &[(&[&[i64]], i64)]) -> Result<Self> {
        let items = items
            .iter()
            .map(|(vs, w)| {
                let vs = vs
                    .iter()
                    .map(|v| v.iter().map(|&x| q(x)).collect())
                    .collect();
                (vs, q(*w))
            })
            .collect();
        Self::from_spans(n, d, items)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn weights(&self) -> Vec<Q> {
        self.items.iter().map(|it| it.weight.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.items.iter().map(|it| it.subspace.dim()).collect()
    }

    /// `Σ ω_i dim K_i`.
    pub fn weighted_dim(&self) -> Q {
        self.items
            .iter()
            .map(|it| &it.weight * q(it.subspace.dim() as i64))
            .sum()
    }

    pub fn slope_total(&self) -> Slope {
        self.weighted_dim() / q(self.n as i64)
    }

    /// `h ⊗ W` inside `V ⊗ W`, spanned by `h_j ⊗ w_l` in j-major order.
    pub fn tensor_w(&self, h: &Subspace) -> Result<Subspace> {
        self.check_v(h)?;
        Ok(tensor_with_identity(h, self.d))
    }

    fn check_v(&self, h: &Subspace) -> Result<()> {
        if h.ambient() != self.n {
            return Err(Error::AmbientMismatch {
                left: self.n,
                right: h.ambient(),
            });
        }
        Ok(())
    }

    /// `Σ ω_i dim(K_i ∩ (h ⊗ W))`.
    pub fn weighted_meet_dim(&self, h: &Subspace) -> Result<Q> {
        let hw = self.tensor_w(h)?;
        let mut total = Q::zero();
        for it in &self.items {
            let k = it.subspace.meet(&hw)?.dim();
            total += &it.weight * q(k as i64);
        }
        Ok(total)
    }

    pub fn slope_at(&self, h: &Subspace) -> Result<Slope> {
        self.check_v(h)?;
        if h.is_zero() {
            return Err(Error::InvalidArgument("slope at the zero subspace".into()));
        }
        Ok(self.weighted_meet_dim(h)? / q(h.dim() as i64))
    }

    /// Items cut down to `h ⊗ W`, written in the canonical basis of `h`.
    pub fn induced_sub(&self, h: &Subspace) -> Result<WeightedConfiguration> {
        self.check_v(h)?;
        if h.is_zero() {
            return Err(Error::InvalidArgument(
                "induced subconfiguration on zero".into(),
            ));
        }
        let hw = tensor_with_identity(h, self.d);
        let d = self.d;
        let items = self
            .items
            .iter()
            .map(|it| {
                let m = it.subspace.meet(&hw)?;
                let rows = m
                    .basis()
                    .iter()
                    .map(|x| {
                        let mut out = Vec::with_capacity(h.dim() * d);
                        for &p in h.pivots() {
                            out.extend_from_slice(&x[p * d..(p + 1) * d]);
                        }
                        out
                    })
                    .collect();
                Ok(Item {
                    subspace: Subspace::span_unchecked(h.dim() * d, rows),
                    weight: it.weight.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedConfiguration {
            n: h.dim(),
            d,
            items,
        })
    }

    /// Items pushed to `(V/h) ⊗ W` in the chart complementary to the pivots of `h`.
    pub fn induced_quotient(&self, h: &Subspace) -> Result<WeightedConfiguration> {
        self.check_v(h)?;
        if h.is_full() {
            return Err(Error::InvalidArgument(
                "induced quotient by the whole space".into(),
            ));
        }
        let chart = QuotientChart::new(h);
        let p = chart.project_matrix();
        self.apply_v_map(&p)
    }

    /// Applies `m ⊗ I_W` to every item, for any `m` with `n` columns.
    /// The result lives on `V' = Q^{m.rows()}`.
    pub fn apply_v_map(&self, m: &RationalMatrix) -> Result<WeightedConfiguration> {
        if m.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: m.cols(),
            });
        }
        let items = self
            .items
            .iter()
            .map(|it| {
                let rows = it
                    .subspace
                    .basis()
                    .iter()
                    .map(|x| apply_v(m, x, self.d))
                    .collect();
                Item {
                    subspace: Subspace::span_unchecked(m.rows() * self.d, rows),
                    weight: it.weight.clone(),
                }
            })
            .collect();
        Ok(WeightedConfiguration {
            n: m.rows(),
            d: self.d,
            items,
        })
    }

    /// `g · c` for invertible `g ∈ GL(V)`.
    pub fn transform(&self, g: &RationalMatrix) -> Result<WeightedConfiguration> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: g.rows(),
            });
        }
        if g.determinant()?.is_zero() {
            return Err(Error::SingularFrame);
        }
        self.apply_v_map(g)
    }

    /// Duplicates item `index` with weights `s` and `t`, `s + t = ω_index`.
    /// The copy is inserted right after the original.
    pub fn split(&self, index: usize, s: &Q, t: &Q) -> Result<WeightedConfiguration> {
        let it = self.item(index)?;
        if !s.is_positive() || !t.is_positive() {
            return Err(Error::InvalidArgument(
                "split parts must be positive".into(),
            ));
        }
        if s + t != it.weight {
            return Err(Error::InvalidArgument(
                "split parts must sum to the weight".into(),
            ));
        }
        let mut items = self.items.clone();
        items[index].weight = s.clone();
        items.insert(
            index + 1,
            Item {
                subspace: it.subspace.clone(),
                weight: t.clone(),
            },
        );
        Ok(WeightedConfiguration {
            items,
            ..self.clone()
        })
    }

    /// Fuses two equal items into one at position `min(i, j)`.
    pub fn merge(&self, i: usize, j: usize) -> Result<WeightedConfiguration> {
        let (a, b) = (self.item(i)?, self.item(j)?);
        if i == j {
            return Err(Error::InvalidArgument(
                "cannot merge an item with itself".into(),
            ));
        }
        if a.subspace != b.subspace {
            return Err(Error::InvalidArgument(format!("items {i} and {j} differ")));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut items = self.items.clone();
        items[lo].weight = &a.weight + &b.weight;
        items.remove(hi);
        Ok(WeightedConfiguration {
            items,
            ..self.clone()
        })
    }

    /// Merges every group of equal items, keeping first-occurrence order.
    pub fn merge_duplicates(&self) -> WeightedConfiguration {
        let mut items: Vec<Item> = Vec::new();
        for it in &self.items {
            match items.iter_mut().find(|x| x.subspace == it.subspace) {
                Some(x) => x.weight += &it.weight,
                None => items.push(it.clone()),
            }
        }
        WeightedConfiguration {
            items,
            ..self.clone()
        }
    }

    /// Reorders items: output item `k` is input item `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<WeightedConfiguration> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() {
            return Err(Error::InvalidArgument(
                "permutation has wrong length".into(),
            ));
        }
        for &p in perm {
            if p >= self.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let items = perm.iter().map(|&p| self.items[p].clone()).collect();
        Ok(WeightedConfiguration {
            items,
            ..self.clone()
        })
    }

    pub fn scale(&self, factor: &Q) -> Result<WeightedConfiguration> {
        if !factor.is_positive() {
            return Err(Error::InvalidArgument(
                "scale factor must be positive".into(),
            ));
        }
        let items = self
            .items
            .iter()
            .map(|it| Item {
                subspace: it.subspace.clone(),
                weight: &it.weight * factor,
            })
            .collect();
        Ok(WeightedConfiguration {
            items,
            ..self.clone()
        })
    }

    pub fn with_weights(&self, weights: &[Q]) -> Result<WeightedConfiguration> {
        if weights.len() != self.len() {
            return Err(Error::InvalidArgument(
                "weight count differs from item count".into(),
            ));
        }
        let items = self
            .items
            .iter()
            .zip(weights)
            .map(|(it, w)| Item {
                subspace: it.subspace.clone(),
                weight: w.clone(),
            })
            .collect();
        Self::new(self.n, self.d, items)
    }

    fn item(&self, i: usize) -> Result<&Item> {
        self.items
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("no item at position {i}")))
    }

    /// Minimal `h ⊆ V` with `K_i ⊆ h ⊗ W`.
    pub fn support(&self, i: usize) -> Result<Subspace> {
        Ok(v_support(&self.item(i)?.subspace, self.n, self.d))
    }
}

/// `h ⊗ Q^d` as a subspace of `Q^{n d}`.
pub fn tensor_with_identity(h: &Subspace, d: usize) -> Subspace {
    let n = h.ambient();
    if d == 1 {
        return h.clone();
    }
    let mut rows = Vec::with_capacity(h.dim() * d);
    for v in h.basis() {
        for l in 0..d {
            let mut x = vec![Q::zero(); n * d];
            for (i, a) in v.iter().enumerate() {
                x[i * d + l] = a.clone();
            }
            rows.push(x);
        }
    }
    Subspace::span_unchecked(n * d, rows)
}

/// V-support of `k ⊆ Q^n ⊗ Q^d`: reshape each basis vector to an `n × d`
/// matrix and span the column images.
pub fn v_support(k: &Subspace, n: usize, d: usize) -> Subspace {
    if d == 1 {
        return k.clone();
    }
    let mut cols = Vec::with_capacity(k.dim() * d);
    for x in k.basis() {
        for l in 0..d {
            cols.push((0..n).map(|i| x[i * d + l].clone()).collect());
        }
    }
    Subspace::span_unchecked(n, cols)
}

/// `(m ⊗ I_d) x`.
pub(crate) fn apply_v(m: &RationalMatrix, x: &[Q], d: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); m.rows() * d];
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let a = m.get(r, c);
            if a.is_zero() {
                continue;
            }
            for l in 0..d {
                let b = &x[c * d + l];
                if !b.is_zero() {
                    out[r * d + l] += if a.is_one() { b.clone() } else { a * b };
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_frac;

    fn line(v: &[i64]) -> Subspace {
        Subspace::from_i64(v.len(), &[v]).unwrap()
    }

    #[test]
    fn slope_examples() {
        let full = WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0], &[0, 1]], 1)]).unwrap();
        assert_eq!(full.slope_total(), q(1));
        let two =
            WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]).unwrap();
        assert_eq!(two.slope_total(), q(1));
        let planes = WeightedConfiguration::from_i64(
            4,
            1,
            &[
                (&[&[1, 0, 0, 0], &[0, 1, 0, 0]], 1),
                (&[&[0, 0, 1, 0], &[0, 0, 0, 1]], 1),
                (&[&[1, 0, 1, 0], &[0, 1, 0, 1]], 1),
            ],
        )
        .unwrap();
        assert_eq!(planes.slope_total(), q_frac(3, 2));
    }

    #[test]
    fn slope_at_examples() {
        let c = WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 1]], 1)]).unwrap();
        assert_eq!(c.slope_at(&line(&[1, 1])).unwrap(), q(1));
        assert_eq!(c.slope_at(&line(&[1, 0])).unwrap(), q(0));
        assert_eq!(c.slope_at(&Subspace::full(2)).unwrap(), c.slope_total());
        assert!(c.slope_at(&Subspace::zero(2)).is_err());
    }

    #[test]
    fn induced_examples() {
        let c = WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]).unwrap();
        let sub = c.induced_sub(&line(&[1, 0])).unwrap();
        assert_eq!(sub.n(), 1);
        assert_eq!(sub.dims(), vec![1, 0]);
        assert_eq!(c.induced_sub(&Subspace::full(2)).unwrap(), c);

        let k =
            WeightedConfiguration::from_i64(4, 1, &[(&[&[1, 0, 0, 0], &[0, 0, 0, 1]], 1)]).unwrap();
        let h = Subspace::from_i64(4, &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]).unwrap();
        assert_eq!(k.induced_sub(&h).unwrap().dims(), vec![1]);

        let equal =
            WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 1]], 1), (&[&[1, 1]], 1)]).unwrap();
        let quo = equal.induced_quotient(&line(&[1, 1])).unwrap();
        assert_eq!(quo.n(), 1);
        assert_eq!(quo.dims(), vec![0, 0]);
        let diag = WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 1]], 1)]).unwrap();
        assert_eq!(
            diag.induced_quotient(&line(&[1, 0])).unwrap().dims(),
            vec![1]
        );
        assert_eq!(diag.induced_quotient(&Subspace::zero(2)).unwrap(), diag);
        assert!(diag.induced_quotient(&Subspace::full(2)).is_err());
    }

    #[test]
    fn split_merge_round_trip() {
        let c = WeightedConfiguration::from_i64(2, 1, &[(&[&[1, 0]], 2), (&[&[0, 1]], 1)]).unwrap();
        let s = c.split(0, &q(1), &q(1)).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.slope_total(), c.slope_total());
        assert_eq!(s.merge(0, 1).unwrap(), c);
        assert!(c.split(0, &q(1), &q(2)).is_err());
        assert!(c.merge(0, 1).is_err());
    }

    #[test]
    fn support_reshapes() {
        // e1 ⊗ w1 in C^2 ⊗ C^2
        let c = WeightedConfiguration::from_i64(2, 2, &[(&[&[1, 0, 0, 0]], 1)]).unwrap();
        assert_eq!(c.support(0).unwrap(), line(&[1, 0]));
        let hw = c.tensor_w(&line(&[1, 0])).unwrap();
        assert_eq!(hw.dim(), 2);
        assert_eq!(c.slope_at(&line(&[1, 0])).unwrap(), q(1));
    }

    #[test]
    fn transform_acts_on_v() {
        let c = WeightedConfiguration::from_i64(2, 2, &[(&[&[1, 0, 0, 0]], 1)]).unwrap();
        let g = RationalMatrix::from_i64(2, 2, &[1, 1, 1, 2]);
        let gc = c.transform(&g).unwrap();
        assert_eq!(
            gc.items()[0].subspace,
            Subspace::from_i64(4, &[&[1, 0, 1, 0]]).unwrap()
        );
        assert!(c.transform(&RationalMatrix::zeros(2, 2)).is_err());
    }
}
