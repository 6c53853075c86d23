//! Turning numeric subspaces into exact ones.

use num_bigint::BigInt;

use super::{orthonormalize, BalanceResult, CMatrix, C64};
use crate::config::WeightedConfiguration;
use crate::exact::{q_to_f64, Subspace, Q};

/// Principal-angle distance below which a numeric subspace snaps to a candidate.
pub const SNAP_TOL: f64 = 1e-6;
const MAX_DENOMINATOR: i64 = 10_000;

/// Sine of the largest principal angle between the column spans of two
/// orthonormal frames of equal width.
fn angle_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let proj = v * v.adjoint();
    let resid = u - proj * u;
    resid.singular_values().iter().cloned().fold(0.0, f64::max)
}

fn exact_frame(s: &Subspace) -> Option<CMatrix> {
    let b = s.basis_matrix();
    let m = CMatrix::from_fn(b.rows(), b.cols(), |r, c| {
        C64::new(q_to_f64(b.get(r, c)), 0.0)
    });
    orthonormalize(&m)
}

/// Best rational approximation with a bounded denominator, by continued fractions.
fn approximate(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if (x - h1 as f64 / k1 as f64).abs() < 1e-9 || frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 || (x - h1 as f64 / k1 as f64).abs() > 1e-6 {
        return None;
    }
    Some(Q::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Exact subspace near the span of `u`: a candidate within [`SNAP_TOL`], or the
/// rationalized reduced echelon form of `u`.
pub fn rationalize_subspace(u: &CMatrix, candidates: &[Subspace]) -> Option<Subspace> {
    let u = orthonormalize(u)?;
    let (n, r) = (u.nrows(), u.ncols());
    for c in candidates
        .iter()
        .filter(|c| c.dim() == r && c.ambient() == n)
    {
        if let Some(f) = exact_frame(c) {
            if angle_distance(&u, &f) < SNAP_TOL {
                return Some(c.clone());
            }
        }
    }
    // numeric reduced echelon form of the rows of u^T
    let mut rows: Vec<Vec<C64>> = (0..r)
        .map(|j| (0..n).map(|i| u[(i, j)]).collect())
        .collect();
    let mut lead = 0;
    for col in 0..n {
        if lead == r {
            break;
        }
        let (p, best) = (lead..r)
            .map(|i| (i, rows[i][col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if best < 1e-8 {
            continue;
        }
        rows.swap(lead, p);
        let piv = rows[lead][col];
        for x in rows[lead].iter_mut() {
            *x /= piv;
        }
        for i in 0..r {
            if i != lead {
                let f = rows[i][col];
                for c2 in 0..n {
                    let delta = f * rows[lead][c2];
                    rows[i][c2] -= delta;
                }
            }
        }
        lead += 1;
    }
    if lead < r {
        return None;
    }
    let exact: Option<Vec<Vec<Q>>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|z| {
                    if z.im.abs() < 1e-6 {
                        approximate(z.re)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let s = Subspace::span(n, &exact?).ok()?;
    (s.dim() == r).then_some(s)
}

/// Exact subspaces recovered from the destabilizer hints of a divergent solve.
/// Callers re-verify them against the exact slopes.
pub fn exact_hints(
    c: &WeightedConfiguration,
    res: &BalanceResult,
    candidates: &[Subspace],
) -> Vec<Subspace> {
    let mut out: Vec<Subspace> = Vec::new();
    for h in &res.destabilizer_hint {
        if let Some(s) = rationalize_subspace(h, candidates) {
            if s.ambient() == c.n() && !s.is_zero() && !s.is_full() && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_frac;

    #[test]
    fn continued_fractions() {
        assert_eq!(approximate(0.75).unwrap(), q_frac(3, 4));
        assert_eq!(approximate(-1.0 / 3.0).unwrap(), q_frac(-1, 3));
    }

    #[test]
    fn snaps_and_rationalizes() {
        let line = Subspace::from_i64(2, &[&[1, 2]]).unwrap();
        let s = 5f64.sqrt();
        let u = CMatrix::from_column_slice(
            2,
            1,
            &[C64::new(1.0 / s, 0.0), C64::new(2.0 / s + 1e-9, 0.0)],
        );
        assert_eq!(
            rationalize_subspace(&u, std::slice::from_ref(&line)),
            Some(line.clone())
        );
        assert_eq!(rationalize_subspace(&u, &[]), Some(line));
    }
}
