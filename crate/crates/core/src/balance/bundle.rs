//! Balanced configurations of maps into Grassmannians, sampled at finitely
//! many points with volumes.

use super::{
    normalized_metric, solve_numeric, BalanceResult, BalanceStatus, CMatrix, NumericConfig,
    SolveOptions, C64,
};
use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct BundlePoint {
    pub volume: f64,
    /// One orthonormal `N × r_i` frame per item.
    pub frames: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct SampledBundleConfig {
    n: usize,
    points: Vec<BundlePoint>,
    weights: Vec<f64>,
    ranks: Vec<usize>,
}

impl SampledBundleConfig {
    pub fn new(
        n: usize,
        points: Vec<BundlePoint>,
        weights: Vec<f64>,
        ranks: Vec<usize>,
    ) -> Result<Self> {
        if weights.len() != ranks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights but {} ranks",
                weights.len(),
                ranks.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("no sample points".into()));
        }
        for (t, p) in points.iter().enumerate() {
            if !(p.volume > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "point {t} has nonpositive volume"
                )));
            }
            if p.frames.len() != ranks.len() {
                return Err(Error::InvalidArgument(format!(
                    "point {t} has {} frames, expected {}",
                    p.frames.len(),
                    ranks.len()
                )));
            }
            for (i, f) in p.frames.iter().enumerate() {
                if f.nrows() != n || f.ncols() != ranks[i] {
                    return Err(Error::InvalidArgument(format!(
                        "point {t}, item {i}: frame is {}×{}, expected {n}×{}",
                        f.nrows(),
                        f.ncols(),
                        ranks[i]
                    )));
                }
                let gram = f.adjoint() * f;
                if (gram - CMatrix::identity(ranks[i], ranks[i])).norm() > ORTHONORMAL_TOL {
                    return Err(Error::FrameNotOrthonormal { point: t, item: i });
                }
            }
        }
        Ok(SampledBundleConfig {
            n,
            points,
            weights,
            ranks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[BundlePoint] {
        &self.points
    }

    pub fn volume(&self) -> f64 {
        self.points.iter().map(|p| p.volume).sum()
    }

    /// `Σ ω_i r_i / N`.
    pub fn slope(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.ranks)
            .map(|(w, r)| w * *r as f64)
            .sum::<f64>()
            / self.n as f64
    }

    /// Every (point, item) pair as one item of weight `v_t ω_i`.
    fn flatten(&self) -> Result<NumericConfig> {
        let frames = self
            .points
            .iter()
            .flat_map(|p| {
                p.frames
                    .iter()
                    .zip(&self.weights)
                    .map(move |(f, w)| (f.clone(), p.volume * w))
            })
            .collect();
        NumericConfig::from_frames(self.n, frames)
    }
}

/// `Σ_i ω_i Σ_t v_t A_i A_i* − ℘ Vol I`.
pub fn bundle_moment_map(b: &SampledBundleConfig) -> Result<CMatrix> {
    let n = b.n;
    let mut phi = CMatrix::identity(n, n) * C64::new(-b.slope() * b.volume(), 0.0);
    for p in &b.points {
        for (f, w) in p.frames.iter().zip(&b.weights) {
            phi += (f * f.adjoint()) * C64::new(p.volume * w, 0.0);
        }
    }
    Ok(phi)
}

#[derive(Clone, Debug)]
pub struct BundleBalance {
    pub result: BalanceResult,
    /// Distance between the normalized metrics of two independent solves,
    /// present when the first solve balanced.
    pub restart_gap: Option<f64>,
    pub restart_status: Option<BalanceStatus>,
}

impl BundleBalance {
    /// Both solves balanced and reached the same normalized metric.
    pub fn unique(&self, tol: f64) -> Option<bool> {
        match (self.restart_status, self.restart_gap) {
            (Some(BalanceStatus::Balanced), Some(gap)) => Some(gap < tol),
            (Some(_), _) => Some(false),
            _ => None,
        }
    }
}

/// Balances a sampled bundle configuration and, on success, re-solves from a
/// seeded random start to compare the normalized metrics.
pub fn bundle_balance_solve(b: &SampledBundleConfig, opts: &SolveOptions) -> Result<BundleBalance> {
    let nc = b.flatten()?;
    let result = solve_numeric(&nc, opts)?;
    let (mut restart_gap, mut restart_status) = (None, None);
    if result.status == BalanceStatus::Balanced {
        let again = solve_numeric(
            &nc,
            &SolveOptions {
                random_start: true,
                ..opts.clone()
            },
        )?;
        restart_status = Some(again.status);
        let (h1, h2) = (
            normalized_metric(&result.transform),
            normalized_metric(&again.transform),
        );
        restart_gap = Some((h1 - h2).norm());
    }
    Ok(BundleBalance {
        result,
        restart_gap,
        restart_status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> CMatrix {
        CMatrix::from_iterator(v.len(), 1, v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn two_point(second: &[f64]) -> SampledBundleConfig {
        SampledBundleConfig::new(
            2,
            vec![
                BundlePoint {
                    volume: 0.5,
                    frames: vec![col(&[1.0, 0.0])],
                },
                BundlePoint {
                    volume: 0.5,
                    frames: vec![col(second)],
                },
            ],
            vec![1.0],
            vec![1],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_two_points_balance() {
        let b = two_point(&[0.0, 1.0]);
        assert!(bundle_moment_map(&b).unwrap().norm() < 1e-14);
        let r = bundle_balance_solve(&b, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.status, BalanceStatus::Balanced);
        assert_eq!(r.result.iterations, 0);
    }

    #[test]
    fn constant_map_diverges() {
        let b = two_point(&[1.0, 0.0]);
        let phi = bundle_moment_map(&b).unwrap();
        assert!((phi[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((phi[(1, 1)].re + 0.5).abs() < 1e-14);
        let r = bundle_balance_solve(&b, &SolveOptions::default()).unwrap();
        assert_eq!(r.result.status, BalanceStatus::Diverged);
    }

    #[test]
    fn frames_must_be_orthonormal() {
        let bad = SampledBundleConfig::new(
            2,
            vec![BundlePoint {
                volume: 1.0,
                frames: vec![col(&[1.0, 1.0])],
            }],
            vec![1.0],
            vec![1],
        );
        assert!(matches!(bad, Err(Error::FrameNotOrthonormal { .. })));
    }
}
