//! Moment map, Kempf–Ness descent and balance metrics.
//!
//! The descent runs over `g ∈ GL(V)` with metric `H = g* g`; the moment map
//! at `H` is the moment map of the transformed configuration `g · c`.

mod bundle;
mod rationalize;

pub use bundle::{
    bundle_balance_solve, bundle_moment_map, BundleBalance, BundlePoint, SampledBundleConfig,
};
pub use rationalize::{exact_hints, rationalize_subspace};

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::WeightedConfiguration;
use crate::error::{Error, Result};
use crate::exact::q_to_f64;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Condition number of the metric that counts as divergence.
    pub divergence: f64,
    /// Eigenvalue gap threshold relative to `‖Φ‖` for destabilizer extraction.
    pub gap_rel: f64,
    pub seed: u64,
    /// Start from a seeded random transform instead of the identity.
    pub random_start: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 10_000,
            divergence: 1e12,
            gap_rel: 1e-4,
            seed: 0,
            random_start: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BalanceStatus {
    Balanced,
    Diverged,
    MaxIter,
}

impl BalanceStatus {
    pub fn name(self) -> &'static str {
        match self {
            BalanceStatus::Balanced => "Balanced",
            BalanceStatus::Diverged => "Diverged",
            BalanceStatus::MaxIter => "MaxIter",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BalanceResult {
    pub status: BalanceStatus,
    /// `g* g` scaled to determinant 1.
    pub metric: CMatrix,
    pub transform: CMatrix,
    /// Moment map of the terminal transformed configuration.
    pub moment: CMatrix,
    pub residual: f64,
    pub iterations: usize,
    /// Kempf–Ness values along the accepted iterates.
    pub trace: Vec<f64>,
    /// Orthonormal bases (in the original coordinates) of candidate
    /// destabilizing subspaces, filled on divergence.
    pub destabilizer_hint: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
struct NumItem {
    /// Orthonormal basis, `n d × k`.
    basis: CMatrix,
    weight: f64,
}

/// Floating-point view of a configuration: orthonormal item frames and weights.
#[derive(Clone, Debug)]
pub struct NumericConfig {
    n: usize,
    d: usize,
    items: Vec<NumItem>,
    slope: f64,
}

impl NumericConfig {
    pub fn from_config(c: &WeightedConfiguration) -> Result<Self> {
        let nd = c.n() * c.d();
        let items = c
            .items()
            .iter()
            .enumerate()
            .filter(|(_, it)| !it.subspace.is_zero())
            .map(|(i, it)| {
                let b = it.subspace.basis_matrix();
                let m = CMatrix::from_fn(nd, b.cols(), |r, k| C64::new(q_to_f64(b.get(r, k)), 0.0));
                Ok(NumItem {
                    basis: orthonormalize(&m).ok_or(Error::DegenerateGram(i))?,
                    weight: q_to_f64(&it.weight),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(c.n(), c.d(), items))
    }

    /// `d = 1` configuration from orthonormal frames with weights.
    pub fn from_frames(n: usize, frames: Vec<(CMatrix, f64)>) -> Result<Self> {
        let items = frames
            .into_iter()
            .enumerate()
            .filter(|(_, (f, _))| f.ncols() > 0)
            .map(|(i, (f, w))| {
                if f.nrows() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: f.nrows(),
                    });
                }
                Ok(NumItem {
                    basis: orthonormalize(&f).ok_or(Error::DegenerateGram(i))?,
                    weight: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(n, 1, items))
    }

    fn assemble(n: usize, d: usize, items: Vec<NumItem>) -> Self {
        let slope = items
            .iter()
            .map(|it| it.weight * it.basis.ncols() as f64)
            .sum::<f64>()
            / n as f64;
        NumericConfig { n, d, items, slope }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Moment map of `g · c` and the Kempf–Ness value at `H = g* g`.
    pub fn evaluate(&self, g: &CMatrix) -> Result<(CMatrix, f64)> {
        let n = self.n;
        let mut phi = CMatrix::identity(n, n) * C64::new(-self.slope, 0.0);
        let mut kn = 0.0;
        for (i, it) in self.items.iter().enumerate() {
            let moved = apply_v(g, &it.basis, self.d);
            let k = moved.ncols();
            let qr = moved.qr();
            let r = qr.r();
            let mut logdet = 0.0;
            for j in 0..k {
                let a = r[(j, j)].norm();
                if !(a > 1e-300) {
                    return Err(Error::DegenerateGram(i));
                }
                logdet += 2.0 * a.ln();
            }
            kn += it.weight * logdet;
            let qm = qr.q();
            let w = C64::new(it.weight, 0.0);
            for l in 0..self.d {
                let rows = CMatrix::from_fn(n, k, |a, b| qm[(a * self.d + l, b)]);
                phi += (&rows * rows.adjoint()) * w;
            }
        }
        let det = g.clone().determinant().norm();
        if !(det > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        kn -= self.slope * 2.0 * det.ln();
        Ok((hermitian_part(&phi), kn))
    }
}

/// `(g ⊗ I_d) B` for an `n d × k` matrix `B`.
fn apply_v(g: &CMatrix, b: &CMatrix, d: usize) -> CMatrix {
    if d == 1 {
        return g * b;
    }
    let n = g.nrows();
    let mut out = CMatrix::zeros(n * d, b.ncols());
    for col in 0..b.ncols() {
        for l in 0..d {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..g.ncols() {
                    acc += g[(i, j)] * b[(j * d + l, col)];
                }
                out[(i * d + l, col)] = acc;
            }
        }
    }
    out
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Orthonormal basis of the column span, `None` when numerically dependent.
pub(crate) fn orthonormalize(m: &CMatrix) -> Option<CMatrix> {
    let k = m.ncols();
    if k == 0 {
        return Some(m.clone());
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let qr = m.clone().qr();
    let r = qr.r();
    if (0..k).any(|j| r[(j, j)].norm() <= 1e-12 * scale.max(1e-300)) {
        return None;
    }
    Some(qr.q())
}

/// Hermitian matrix function via the eigendecomposition.
fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = hermitian_part(m).symmetric_eigen();
    let vals = CMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(f(x), 0.0)));
    &eig.eigenvectors * vals * eig.eigenvectors.adjoint()
}

fn check_positive_definite(h: &CMatrix) -> Result<CMatrix> {
    let herm = hermitian_part(h);
    if (h - &herm).norm() > 1e-12 * (1.0 + h.norm()) {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = herm.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(herm_fn(&herm, f64::sqrt))
}

/// Moment map of the configuration with respect to a Hermitian metric.
pub fn moment_map(c: &WeightedConfiguration, metric: &CMatrix) -> Result<CMatrix> {
    let g = check_positive_definite(metric)?;
    Ok(NumericConfig::from_config(c)?.evaluate(&g)?.0)
}

/// `Σ ω_i log det(B_i* (H ⊗ I) B_i) − ℘ log det H` for orthonormal reference frames `B_i`.
pub fn kempf_ness_value(c: &WeightedConfiguration, metric: &CMatrix) -> Result<f64> {
    let g = check_positive_definite(metric)?;
    Ok(NumericConfig::from_config(c)?.evaluate(&g)?.1)
}

fn condition(g: &CMatrix) -> f64 {
    let sv = g.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn random_transform(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    });
    CMatrix::identity(n, n) + r
}

fn normalized_metric(g: &CMatrix) -> CMatrix {
    let h = hermitian_part(&(g.adjoint() * g));
    let n = h.nrows() as f64;
    let det = h.clone().determinant().re;
    h * C64::new(det.powf(-1.0 / n), 0.0)
}

/// Descent on the Kempf–Ness functional for a numeric configuration.
pub fn solve_numeric(nc: &NumericConfig, opts: &SolveOptions) -> Result<BalanceResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = nc.n();
    let mut g = if opts.random_start {
        random_transform(n, opts.seed)
    } else {
        CMatrix::identity(n, n)
    };
    let (mut phi, mut f) = nc.evaluate(&g)?;
    let mut trace = vec![f];
    let mut eta = 0.5;
    let mut status = BalanceStatus::MaxIter;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let r = phi.norm();
        if r < opts.tol {
            status = BalanceStatus::Balanced;
            break;
        }
        let cond = condition(&g);
        if cond * cond > opts.divergence {
            status = BalanceStatus::Diverged;
            break;
        }
        let mut accepted = false;
        while eta > 1e-14 {
            let step = herm_fn(&(&phi * C64::new(-eta, 0.0)), f64::exp);
            let g_new = step * &g;
            if let Ok((phi_new, f_new)) = nc.evaluate(&g_new) {
                let predicted = eta * 2.0 * r * r;
                let armijo = f_new <= f - 1e-4 * predicted;
                // once the predicted decrease drowns in rounding, accept steps that shrink Φ
                let noise = 1e-12 * (1.0 + f.abs());
                let flat = predicted < noise && f_new <= f + noise && phi_new.norm() < r;
                if armijo || flat {
                    g = g_new;
                    phi = phi_new;
                    f = f_new.min(f);
                    trace.push(f);
                    eta = (eta * 2.0).min(1e3);
                    accepted = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
    }
    let residual = phi.norm();
    if status == BalanceStatus::MaxIter && residual < opts.tol {
        status = BalanceStatus::Balanced;
    }
    let mut destabilizer_hint = Vec::new();
    if status == BalanceStatus::Diverged {
        if let (Ok(flags), Some(g_inv)) = (
            extract_destabilizer(&phi, opts.gap_rel * residual),
            g.clone().try_inverse(),
        ) {
            for e in flags {
                if let Some(b) = orthonormalize(&(&g_inv * e)) {
                    destabilizer_hint.push(b);
                }
            }
        }
    }
    Ok(BalanceResult {
        status,
        metric: normalized_metric(&g),
        transform: g,
        moment: phi,
        residual,
        iterations,
        trace,
        destabilizer_hint,
    })
}

/// Balance metric search for an exact configuration.
pub fn balance_solve(c: &WeightedConfiguration, opts: &SolveOptions) -> Result<BalanceResult> {
    solve_numeric(&NumericConfig::from_config(c)?, opts)
}

/// Eigenvalue clusters of `phi` separated by gaps above `gap_tol`; returns the
/// span of the top `j` clusters for every proper `j`, largest eigenvalues first.
pub fn extract_destabilizer(phi: &CMatrix, gap_tol: f64) -> Result<Vec<CMatrix>> {
    let eig = hermitian_part(phi).symmetric_eigen();
    let n = phi.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = Vec::new();
    for j in 1..n {
        let gap = eig.eigenvalues[order[j - 1]] - eig.eigenvalues[order[j]];
        if gap > gap_tol {
            out.push(CMatrix::from_fn(n, j, |r, c| {
                eig.eigenvectors[(r, order[c])]
            }));
        }
    }
    if out.is_empty() {
        return Err(Error::NoGap);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, items: &[(&[&[i64]], i64)]) -> WeightedConfiguration {
        WeightedConfiguration::from_i64(n, 1, items).unwrap()
    }

    fn eye(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    #[test]
    fn orthogonal_lines_are_balanced() {
        let c = cfg(2, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]);
        assert!(moment_map(&c, &eye(2)).unwrap().norm() < 1e-14);
        let r = balance_solve(&c, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, BalanceStatus::Balanced);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn equiangular_lines() {
        let s = 3f64.sqrt() / 2.0;
        let frames = vec![
            (
                CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
                1.0,
            ),
            (
                CMatrix::from_column_slice(2, 1, &[C64::new(0.5, 0.0), C64::new(s, 0.0)]),
                1.0,
            ),
            (
                CMatrix::from_column_slice(2, 1, &[C64::new(-0.5, 0.0), C64::new(s, 0.0)]),
                1.0,
            ),
        ];
        let nc = NumericConfig::from_frames(2, frames).unwrap();
        assert!(nc.evaluate(&eye(2)).unwrap().0.norm() < 1e-12);
    }

    #[test]
    fn equal_lines_diverge_towards_the_line() {
        let c = cfg(2, &[(&[&[1, 1]], 1), (&[&[1, 1]], 1)]);
        let phi = moment_map(&c, &eye(2)).unwrap();
        assert!((phi.norm() - 2f64.sqrt()).abs() < 1e-12);
        let r = balance_solve(&c, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, BalanceStatus::Diverged);
        let hint = &r.destabilizer_hint[0];
        assert!((hint[(0, 0)].norm() - hint[(1, 0)].norm()).abs() < 1e-6);
    }

    #[test]
    fn generic_lines_balance() {
        let c = cfg(2, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1), (&[&[1, 3]], 1)]);
        let r = balance_solve(&c, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, BalanceStatus::Balanced);
        assert!(r.residual < 1e-8);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let m = moment_map(&c, &r.metric).unwrap();
        assert!(m.norm() < 1e-8);
    }

    #[test]
    fn extraction_examples() {
        let phi = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        let flags = extract_destabilizer(&phi, 1e-4).unwrap();
        assert_eq!(flags.len(), 1);
        assert!((flags[0][(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert_eq!(
            extract_destabilizer(&CMatrix::zeros(2, 2), 1e-4).unwrap_err(),
            Error::NoGap
        );
    }

    #[test]
    fn metric_must_be_positive() {
        let c = cfg(2, &[(&[&[1, 0]], 1)]);
        let bad = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        assert!(moment_map(&c, &bad).is_err());
    }
}
