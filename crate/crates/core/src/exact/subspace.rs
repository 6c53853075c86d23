use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};

use super::matrix::rref_rows;
use super::{format_q, q, sparse_cmp, RationalMatrix, Q};
use crate::error::{Error, Result};

/// A linear subspace of `Q^ambient`, stored in canonical form.
///
/// The basis vectors are the rows of the reduced row echelon form of any
/// spanning set, i.e. the columns of the reduced column echelon form of the
/// basis matrix. Two values compare equal exactly when they span the same set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// Span of the given vectors, each of length `ambient`.
    pub fn span(ambient: usize, vectors: &[Vec<Q>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: v.len(),
                });
            }
        }
        Ok(Self::span_unchecked(ambient, vectors.to_vec()))
    }

    pub(crate) fn span_unchecked(ambient: usize, mut rows: Vec<Vec<Q>>) -> Self {
        let pivots = rref_rows(&mut rows, ambient);
        Subspace {
            ambient,
            basis: rows,
            pivots,
        }
    }

    /// Column span of `m`; the ambient dimension is `m.rows()`.
    pub fn canonicalize(m: &RationalMatrix) -> Self {
        Self::span_unchecked(m.rows(), m.column_vectors())
    }

    pub fn from_i64(ambient: usize, vectors: &[&[i64]]) -> Result<Self> {
        let vs: Vec<Vec<Q>> = vectors
            .iter()
            .map(|v| v.iter().map(|&x| q(x)).collect())
            .collect();
        Self::span(ambient, &vs)
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::coordinate(ambient, 0..ambient)
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let rows = indices
            .into_iter()
            .map(|i| unit(ambient, i))
            .collect::<Vec<_>>();
        Self::span_unchecked(ambient, rows)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    /// Canonical basis vectors.
    pub fn basis(&self) -> &[Vec<Q>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `ambient × dim` matrix whose columns are the canonical basis.
    pub fn basis_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_columns(&self.basis, self.ambient)
            .expect("basis vectors have ambient length")
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        v.len() == self.ambient && self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.ambient == self.ambient && other.basis.iter().all(|v| self.contains(v))
    }

    /// `v` minus its component along this subspace in the pivot chart; zero
    /// exactly when `v` lies in the subspace.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if out[p].is_zero() {
                continue;
            }
            let f = out[p].clone();
            for (x, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        out
    }

    /// Coordinates of a member vector against the canonical basis.
    pub fn coordinates(&self, v: &[Q]) -> Vec<Q> {
        self.pivots.iter().map(|&p| v[p].clone()).collect()
    }

    /// Linear combination of the canonical basis.
    pub fn embed(&self, coords: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.ambient];
        for (c, row) in coords.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (x, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x += c * r;
                }
            }
        }
        out
    }

    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.contains_subspace(other) {
            return Ok(self.clone());
        }
        if other.contains_subspace(self) {
            return Ok(other.clone());
        }
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Ok(Self::span_unchecked(self.ambient, rows))
    }

    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.contains_subspace(other) {
            return Ok(other.clone());
        }
        if other.contains_subspace(self) {
            return Ok(self.clone());
        }
        let ann = self.annihilator().join(&other.annihilator())?;
        Ok(ann.annihilator())
    }

    /// Vectors `a` with `a · b = 0` for every member `b` (bilinear pairing).
    pub fn annihilator(&self) -> Subspace {
        kernel_of_rref(&self.basis, &self.pivots, self.ambient)
    }

    /// Image under a linear map with `m.cols() == ambient`.
    pub fn image(&self, m: &RationalMatrix) -> Result<Subspace> {
        if m.cols() != self.ambient {
            return Err(Error::DimensionMismatch {
                expected: self.ambient,
                found: m.cols(),
            });
        }
        let rows = self
            .basis
            .iter()
            .map(|v| m.mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::span_unchecked(m.rows(), rows))
    }

    /// Serialized canonical basis, one list of rational strings per vector.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(format_q).collect())
            .collect()
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| self.pivots.cmp(&other.pivots))
            .then_with(|| {
                for (a, b) in self
                    .basis
                    .iter()
                    .flatten()
                    .zip(other.basis.iter().flatten())
                {
                    let o = sparse_cmp(a, b);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> = self
            .basis
            .iter()
            .map(|v| {
                let cells: Vec<String> = v.iter().map(format_q).collect();
                format!("({})", cells.join(","))
            })
            .collect();
        write!(f, "span[{}] in Q^{}", vs.join(", "), self.ambient)
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn kernel_of_rref(rows: &[Vec<Q>], pivots: &[usize], ncols: usize) -> Subspace {
    let mut is_pivot = vec![false; ncols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    let mut vectors = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for (row, &p) in rows.iter().zip(pivots) {
            if !row[free].is_zero() {
                v[p] = -row[free].clone();
            }
        }
        vectors.push(v);
    }
    Subspace::span_unchecked(ncols, vectors)
}

/// Null space of `m`, a subspace of `Q^{m.cols()}`.
pub fn kernel(m: &RationalMatrix) -> Subspace {
    let mut rows = m.row_vectors();
    let pivots = rref_rows(&mut rows, m.cols());
    kernel_of_rref(&rows, &pivots, m.cols())
}

/// Coordinates on `ambient / h` given by the coordinates that are not pivots of `h`.
#[derive(Clone, Debug)]
pub struct QuotientChart {
    h: Subspace,
    free: Vec<usize>,
}

impl QuotientChart {
    pub fn new(h: &Subspace) -> Self {
        let mut is_pivot = vec![false; h.ambient];
        for &p in &h.pivots {
            is_pivot[p] = true;
        }
        QuotientChart {
            h: h.clone(),
            free: (0..h.ambient).filter(|&c| !is_pivot[c]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn ambient(&self) -> usize {
        self.h.ambient
    }

    pub fn kernel(&self) -> &Subspace {
        &self.h
    }

    pub fn project(&self, v: &[Q]) -> Vec<Q> {
        let r = self.h.reduce(v);
        self.free.iter().map(|&c| r[c].clone()).collect()
    }

    /// Section of `project`: places the coordinates back on the free positions.
    pub fn lift(&self, u: &[Q]) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.h.ambient];
        for (&c, x) in self.free.iter().zip(u) {
            v[c] = x.clone();
        }
        v
    }

    pub fn image(&self, k: &Subspace) -> Subspace {
        let rows = k.basis.iter().map(|v| self.project(v)).collect();
        Subspace::span_unchecked(self.dim(), rows)
    }

    /// Full preimage of a subspace of the quotient.
    pub fn preimage(&self, s: &Subspace) -> Subspace {
        let mut rows: Vec<Vec<Q>> = s.basis.iter().map(|u| self.lift(u)).collect();
        rows.extend(self.h.basis.iter().cloned());
        Subspace::span_unchecked(self.h.ambient, rows)
    }

    /// Matrix of `project`, of shape `dim × ambient`.
    pub fn project_matrix(&self) -> RationalMatrix {
        let cols: Vec<Vec<Q>> = (0..self.h.ambient)
            .map(|i| self.project(&unit(self.h.ambient, i)))
            .collect();
        RationalMatrix::from_columns(&cols, self.dim()).expect("projected columns")
    }

    /// Matrix of `lift`, of shape `ambient × dim`.
    pub fn lift_matrix(&self) -> RationalMatrix {
        let cols: Vec<Vec<Q>> = (0..self.dim())
            .map(|i| self.lift(&unit(self.dim(), i)))
            .collect();
        RationalMatrix::from_columns(&cols, self.h.ambient).expect("lifted columns")
    }
}

/// Image of `k` in `ambient / h`, in the chart complementary to the pivots of `h`.
pub fn quotient_image(k: &Subspace, h: &Subspace) -> Result<Subspace> {
    k.check_ambient(h)?;
    Ok(QuotientChart::new(h).image(k))
}
