//! Effective weights: the diagonal hypersimplex, the proven necessary
//! condition, random probes, and the strictly semistable plane family in `C^4`.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Item, WeightedConfiguration};
use crate::error::{Error, Result};
use crate::exact::{q, RationalMatrix, Subspace, Q};
use crate::hilbert_mumford::{decide_exact, Certificate, DecideOptions, Status, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    pub n: usize,
    pub k: Vec<usize>,
}

impl ConeSpec {
    pub fn new(n: usize, k: Vec<usize>) -> Result<Self> {
        if n == 0 || k.contains(&0) {
            return Err(Error::InvalidArgument(
                "n and every k_i must be positive".into(),
            ));
        }
        Ok(ConeSpec { n, k })
    }

    /// `x_i = n ω_i / Σ k_j ω_j`.
    pub fn normalize(&self, w: &[Q]) -> Result<Vec<Q>> {
        if w.len() != self.k.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} items",
                w.len(),
                self.k.len()
            )));
        }
        if w.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let total: Q = w.iter().zip(&self.k).map(|(x, &k)| x * q(k as i64)).sum();
        Ok(w.iter().map(|x| q(self.n as i64) * x / &total).collect())
    }

    /// Necessary conditions for a generically free action.
    pub fn freeness_conditions(&self) -> (bool, bool) {
        let n = self.n;
        let sum: usize = self.k.iter().sum();
        let quad: i64 = self
            .k
            .iter()
            .map(|&k| k as i64 * (n as i64 - k as i64))
            .sum();
        (n < sum, (n * n) as i64 <= quad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

impl Membership {
    pub fn name(self) -> &'static str {
        match self {
            Membership::Interior => "Interior",
            Membership::Boundary => "Boundary",
            Membership::Outside => "Outside",
        }
    }
}

fn classify(x: &[Q]) -> Membership {
    let one = q(1);
    match x.iter().max() {
        Some(m) if *m > one => Membership::Outside,
        Some(m) if *m == one => Membership::Boundary,
        _ => Membership::Interior,
    }
}

pub fn hypersimplex_membership(spec: &ConeSpec, w: &[Q]) -> Result<(Membership, Vec<Q>)> {
    let x = spec.normalize(w)?;
    Ok((classify(&x), x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NecessaryReport {
    pub x: Vec<Q>,
    /// `Σ k_j ω_j / n − ω_i` per item; negative means the bound fails.
    pub margins: Vec<Q>,
    pub membership: Membership,
    pub status: Status,
}

/// Checks the proven half of the effective-cone description on `c`: a
/// semistable configuration has `ω_i ≤ Σ k_j ω_j / n` for every nonzero item.
pub fn necessary_direction_check(
    c: &WeightedConfiguration,
    opts: &DecideOptions,
) -> Result<NecessaryReport> {
    if c.d() != 1 {
        return Err(Error::InvalidArgument(
            "the hypersimplex test needs d = 1".into(),
        ));
    }
    let total = c.weighted_dim();
    if total.is_zero() {
        return Err(Error::InvalidArgument("all items are zero".into()));
    }
    let bound = &total / q(c.n() as i64);
    let x: Vec<Q> = c
        .weights()
        .iter()
        .map(|w| q(c.n() as i64) * w / &total)
        .collect();
    let margins: Vec<Q> = c.weights().iter().map(|w| &bound - w).collect();
    let status = decide_exact(c, opts)?.status;
    let violated = c
        .items()
        .iter()
        .zip(&margins)
        .any(|(it, m)| !it.subspace.is_zero() && m.is_negative());
    if status.is_semistable() && violated {
        return Err(Error::SoundnessViolation(format!(
            "semistable verdict with a weight above Σkω/n (x = {:?})",
            x.iter().map(crate::exact::format_q).collect::<Vec<_>>()
        )));
    }
    Ok(NecessaryReport {
        membership: classify(&x),
        x,
        margins,
        status,
    })
}

/// Random full-rank `n × k` integer matrix with entries in `-9..=9`.
pub fn random_subspace(rng: &mut impl Rng, n: usize, k: usize) -> Subspace {
    loop {
        let entries: Vec<i64> = (0..n * k).map(|_| rng.gen_range(-9..=9)).collect();
        let m = RationalMatrix::from_i64(n, k, &entries);
        let s = Subspace::canonicalize(&m);
        if s.dim() == k {
            return s;
        }
    }
}

/// Random configuration with item dimensions `spec.k` and weights `w`.
pub fn random_configuration(
    rng: &mut impl Rng,
    spec: &ConeSpec,
    w: &[Q],
) -> Result<WeightedConfiguration> {
    let items = spec
        .k
        .iter()
        .zip(w)
        .map(|(&k, weight)| Item {
            subspace: random_subspace(rng, spec.n, k),
            weight: weight.clone(),
        })
        .collect();
    WeightedConfiguration::new(spec.n, 1, items)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub n: usize,
    pub k: Vec<usize>,
    pub weights: Vec<Q>,
    pub x: Vec<Q>,
    pub membership: Membership,
    pub trials: usize,
    pub seed: u64,
    pub depth: usize,
    pub stable: usize,
    pub strictly_semistable: usize,
    pub unstable: usize,
    pub fraction_semistable: f64,
    pub fraction_stable: f64,
    /// Semistable samples whose weights leave the hypersimplex; always zero
    /// unless the checker is unsound.
    pub soundness_violations: usize,
    pub n_less_than_total: bool,
    pub dimension_condition: bool,
}

/// Samples random configurations of the given shape and counts verdicts.
/// Sample `t` uses stream `t` of the seeded generator, so results do not
/// depend on the thread count.
pub fn conjecture_probe(
    spec: &ConeSpec,
    w: &[Q],
    trials: usize,
    seed: u64,
    opts: &DecideOptions,
) -> Result<ProbeReport> {
    let (n_less_than_total, dimension_condition) = spec.freeness_conditions();
    if !n_less_than_total {
        return Err(Error::InvalidArgument("probing needs n < Σk".into()));
    }
    let (membership, x) = hypersimplex_membership(spec, w)?;
    let statuses = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let c = random_configuration(&mut rng, spec, w)?;
            Ok(decide_exact(&c, opts)?.status)
        })
        .collect::<Result<Vec<Status>>>()?;
    let count = |s: Status| statuses.iter().filter(|&&x| x == s).count();
    let (stable, strictly, unstable) = (
        count(Status::Stable),
        count(Status::StrictlySemistable),
        count(Status::Unstable),
    );
    let semistable = stable + strictly;
    let frac = |k: usize| {
        if trials == 0 {
            0.0
        } else {
            k as f64 / trials as f64
        }
    };
    Ok(ProbeReport {
        n: spec.n,
        k: spec.k.clone(),
        weights: w.to_vec(),
        soundness_violations: if membership == Membership::Outside {
            semistable
        } else {
            0
        },
        x,
        membership,
        trials,
        seed,
        depth: opts.depth,
        stable,
        strictly_semistable: strictly,
        unstable,
        fraction_semistable: frac(semistable),
        fraction_stable: frac(stable),
        n_less_than_total,
        dimension_condition,
    })
}

/// `m` pairwise transverse planes in `C^4`, each meeting the coordinate plane
/// `F = span(e1, e2)` in a line. Returns the configuration and `F`.
pub fn plane_witness(m: usize, w: &[Q]) -> Result<(WeightedConfiguration, Subspace)> {
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two planes".into()));
    }
    let spec = ConeSpec::new(4, vec![2; m])?;
    let (membership, _) = hypersimplex_membership(&spec, w)?;
    if membership == Membership::Outside {
        return Err(Error::InvalidArgument(
            "weights lie outside the hypersimplex".into(),
        ));
    }
    let items = (0..m as i64)
        .zip(w)
        .map(|(i, weight)| {
            // distinct slopes in both coordinate pairs keep the planes pairwise transverse
            let s = Subspace::from_i64(4, &[&[1, i, 0, 0], &[0, 0, 1, 2 * i + 1]])?;
            Ok(Item {
                subspace: s,
                weight: weight.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let f = Subspace::coordinate(4, 0..2);
    Ok((WeightedConfiguration::new(4, 1, items)?, f))
}

/// Runs the checker on the witness with `F` supplied and confirms the
/// equality certificate is exactly `F`.
pub fn plane_witness_check(m: usize, w: &[Q], opts: &DecideOptions) -> Result<(Verdict, bool)> {
    let (c, f) = plane_witness(m, w)?;
    let v = decide_exact(&c, &opts.clone().with_extra(vec![f.clone()]))?;
    let ok = v.status == Status::StrictlySemistable
        && matches!(&v.certificate, Certificate::Equality { subspace, .. } if *subspace == f);
    Ok((v, ok))
}
