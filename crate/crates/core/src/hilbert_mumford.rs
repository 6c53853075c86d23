//! Hilbert–Mumford weights and the stability verdict.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{v_support, WeightedConfiguration};
use crate::error::{Error, Result};
use crate::exact::{q, q_frac, RationalMatrix, Subspace, Q};

pub const DEFAULT_DEPTH: usize = 3;

/// `n Σ ω_i dim(K_i ∩ (h⊗W)) − dim h Σ ω_i dim K_i`; positive exactly when `h`
/// destabilizes.
pub fn mu_lambda_s(c: &WeightedConfiguration, h: &Subspace) -> Result<Q> {
    if h.ambient() != c.n() {
        return Err(Error::AmbientMismatch {
            left: c.n(),
            right: h.ambient(),
        });
    }
    if h.is_zero() || h.is_full() {
        return Err(Error::InvalidArgument(
            "weight is only defined for nonzero proper subspaces".into(),
        ));
    }
    mu_unchecked(c, h)
}

fn mu_unchecked(c: &WeightedConfiguration, h: &Subspace) -> Result<Q> {
    Ok(q(c.n() as i64) * c.weighted_meet_dim(h)? - q(h.dim() as i64) * c.weighted_dim())
}

/// One-parameter subgroup acting by `t^{q_j}` on the `j`-th frame vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnePS {
    frame: RationalMatrix,
    frame_inv: RationalMatrix,
    q: Vec<i64>,
}

impl OnePS {
    pub fn new(frame: RationalMatrix, q: Vec<i64>) -> Result<Self> {
        let n = frame.rows();
        if frame.cols() != n || q.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: q.len(),
            });
        }
        if q.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "weights must be non-increasing".into(),
            ));
        }
        if q.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidArgument("weights must sum to zero".into()));
        }
        let frame_inv = frame.inverse()?.ok_or(Error::SingularFrame)?;
        Ok(OnePS {
            frame,
            frame_inv,
            q,
        })
    }

    pub fn frame(&self) -> &RationalMatrix {
        &self.frame
    }

    pub fn weights(&self) -> &[i64] {
        &self.q
    }

    /// Span of the first `s` frame vectors.
    pub fn frame_prefix(&self, s: usize) -> Subspace {
        let cols: Vec<Vec<Q>> = (0..s).map(|j| self.frame.column(j)).collect();
        Subspace::span_unchecked(self.frame.rows(), cols)
    }
}

/// Weight of the configuration under a one-parameter subgroup, from the jump
/// indices of every item against the flag of frame coordinates.
pub fn mu_general(c: &WeightedConfiguration, lambda: &OnePS) -> Result<Q> {
    let (n, d) = (c.n(), c.d());
    if lambda.q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.q.len(),
        });
    }
    let nd = n * d;
    let moved = c.apply_v_map(&lambda.frame_inv)?;
    let mut total = Q::zero();
    for it in moved.items() {
        // reversing coordinates turns the flag into a tail flag, read off the pivots
        let reversed: Vec<Vec<Q>> = it
            .subspace
            .basis()
            .iter()
            .map(|v| v.iter().rev().cloned().collect())
            .collect();
        let s = Subspace::span_unchecked(nd, reversed);
        let sum: i64 = s.pivots().iter().map(|&p| lambda.q[(nd - 1 - p) / d]).sum();
        total += &it.weight * q(sum);
    }
    Ok(total)
}

/// Writes a sorted zero-sum `q` as `Σ_s coeff_s · q_s`, where `q_s` has its
/// first `s` entries equal to `n − s` and the rest equal to `−s`.
pub fn q_decomposition(weights: &[i64]) -> Vec<(Q, Vec<i64>)> {
    let n = weights.len() as i64;
    (1..weights.len())
        .map(|s| {
            let coeff = q_frac(weights[s - 1] - weights[s], n);
            let qs = (0..weights.len())
                .map(|j| if j < s { n - s as i64 } else { -(s as i64) })
                .collect();
            (coeff, qs)
        })
        .collect()
}

/// The right-hand side of the decomposition identity, `Σ_s coeff_s · μ(frame prefix s)`.
pub fn mu_via_flags(c: &WeightedConfiguration, lambda: &OnePS) -> Result<Q> {
    let mut total = Q::zero();
    for (s, (coeff, _)) in q_decomposition(&lambda.q).into_iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        total += coeff * mu_lambda_s(c, &lambda.frame_prefix(s + 1))?;
    }
    Ok(total)
}

/// Finite search space for destabilizing subspaces: the V-supports of the
/// items closed `depth` times under meet, join and `h ↦ supp(K_i ∩ h⊗W)`.
/// Excludes `0` and `V`; sorted by the canonical subspace ordering.
pub fn candidate_subspaces(c: &WeightedConfiguration, depth: usize) -> Vec<Subspace> {
    let (n, d) = (c.n(), c.d());
    let proper = |s: &Subspace| !s.is_zero() && !s.is_full();
    let mut all: BTreeSet<Subspace> = BTreeSet::new();
    let mut frontier: Vec<Subspace> = Vec::new();
    for it in c.items() {
        let s = v_support(&it.subspace, n, d);
        if proper(&s) && all.insert(s.clone()) {
            frontier.push(s);
        }
    }
    for _ in 0..depth {
        if frontier.is_empty() {
            break;
        }
        let known: Vec<Subspace> = all.iter().cloned().collect();
        let mut fresh: BTreeSet<Subspace> = BTreeSet::new();
        let consider = |s: Subspace, fresh: &mut BTreeSet<Subspace>| {
            if proper(&s) && !all.contains(&s) {
                fresh.insert(s);
            }
        };
        for a in &frontier {
            for b in &known {
                if a == b {
                    continue;
                }
                let j = a.join(b).expect("same ambient");
                if j.dim() == a.dim() || j.dim() == b.dim() {
                    // nested: meet and join are the two inputs
                    continue;
                }
                let disjoint = j.dim() == a.dim() + b.dim();
                consider(j, &mut fresh);
                if !disjoint {
                    consider(a.meet(b).expect("same ambient"), &mut fresh);
                }
            }
            if d > 1 {
                let aw = crate::config::tensor_with_identity(a, d);
                for it in c.items() {
                    let m = it.subspace.meet(&aw).expect("same ambient");
                    consider(v_support(&m, n, d), &mut fresh);
                }
            }
        }
        frontier = fresh.iter().cloned().collect();
        all.extend(fresh);
    }
    if d == 1 {
        all.extend(transversals(c).into_iter().filter(|s| proper(s)));
    }
    if all.is_empty() {
        // no item singles out a direction; probe a coordinate flag instead
        for s in 1..n {
            all.insert(Subspace::coordinate(n, 0..s));
        }
    }
    all.into_iter().collect()
}

/// For items `A, B, C` of one dimension with pairwise zero intersections and
/// `C ⊆ A ⊕ B`, `C` is the graph of an isomorphism `T: A → B`. Each canonical
/// basis vector `x + Tx` of `C` yields the plane-like subspace `span(x, Tx)`,
/// which meets all three items. These lie outside the meet/join lattice.
fn transversals(c: &WeightedConfiguration) -> BTreeSet<Subspace> {
    let items: Vec<&Subspace> = {
        let mut seen = BTreeSet::new();
        c.items()
            .iter()
            .map(|it| &it.subspace)
            .filter(|s| !s.is_zero() && !s.is_full() && seen.insert((*s).clone()))
            .collect()
    };
    let n = c.n();
    let mut out = BTreeSet::new();
    for (ia, a) in items.iter().enumerate() {
        for (ib, b) in items.iter().enumerate().skip(ia + 1) {
            let r = a.dim();
            if b.dim() != r || 2 * r > n {
                continue;
            }
            let ab = a.join(b).expect("same ambient");
            if ab.dim() != 2 * r {
                continue;
            }
            let mut cols: Vec<Vec<Q>> = a.basis().to_vec();
            cols.extend(b.basis().iter().cloned());
            let m = RationalMatrix::from_columns(&cols, n).expect("basis vectors");
            for (ic, cc) in items.iter().enumerate() {
                if ic == ia || ic == ib || cc.dim() != r || !ab.contains_subspace(cc) {
                    continue;
                }
                if !cc.meet(a).expect("same ambient").is_zero()
                    || !cc.meet(b).expect("same ambient").is_zero()
                {
                    continue;
                }
                for v in cc.basis() {
                    let Ok(Some(z)) = m.solve(v) else { continue };
                    let x = a.embed(&z[..r]);
                    let y = b.embed(&z[r..]);
                    out.insert(Subspace::span_unchecked(n, vec![x, y]));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Unstable,
    StrictlySemistable,
    Stable,
    Polystable,
}

impl Status {
    pub fn is_semistable(self) -> bool {
        self != Status::Unstable
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Unstable => "Unstable",
            Status::StrictlySemistable => "StrictlySemistable",
            Status::Stable => "Stable",
            Status::Polystable => "Polystable",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [
            Status::Unstable,
            Status::StrictlySemistable,
            Status::Stable,
            Status::Polystable,
        ]
        .into_iter()
        .find(|x| x.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Confidence {
    ExactComplete,
    ExactWithinDepth,
    NumericallyCorroborated,
}

impl Confidence {
    pub fn name(self) -> &'static str {
        match self {
            Confidence::ExactComplete => "ExactComplete",
            Confidence::ExactWithinDepth => "ExactWithinDepth",
            Confidence::NumericallyCorroborated => "NumericallyCorroborated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Destabilizing { subspace: Subspace, slope: Q },
    Equality { subspace: Subspace, slope: Q },
    DirectSum { summands: Vec<Subspace> },
    Exhausted { candidates: usize, digest: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub confidence: Confidence,
    pub certificate: Certificate,
    pub slope_total: Q,
    /// Summands of a direct-sum splitting into stable pieces of equal slope,
    /// when one was found for a strictly semistable configuration.
    pub decomposition: Option<Vec<Subspace>>,
    pub notes: Vec<String>,
}

impl Verdict {
    /// Re-checks the certificate against the exact slopes.
    pub fn verify(&self, c: &WeightedConfiguration) -> Result<bool> {
        let total = c.slope_total();
        Ok(match &self.certificate {
            Certificate::Destabilizing { subspace, .. } => {
                self.status == Status::Unstable && c.slope_at(subspace)? > total
            }
            Certificate::Equality { subspace, .. } => {
                self.status == Status::StrictlySemistable && c.slope_at(subspace)? == total
            }
            Certificate::DirectSum { summands } => {
                let mut dim = 0;
                let mut joined = Subspace::zero(c.n());
                for s in summands {
                    dim += s.dim();
                    joined = joined.join(s)?;
                    if c.slope_at(s)? != total {
                        return Ok(false);
                    }
                }
                dim == c.n() && joined.is_full()
            }
            Certificate::Exhausted { .. } => self.status == Status::Stable,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub depth: usize,
    /// Extra subspaces to test alongside the candidates.
    pub extra: Vec<Subspace>,
    /// Corroborate with the numerical balance flow.
    pub numeric: bool,
    pub balance: crate::balance::SolveOptions,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            depth: DEFAULT_DEPTH,
            extra: Vec::new(),
            numeric: false,
            balance: crate::balance::SolveOptions::default(),
        }
    }
}

impl DecideOptions {
    pub fn with_depth(depth: usize) -> Self {
        DecideOptions {
            depth,
            ..Default::default()
        }
    }

    pub fn with_extra(mut self, extra: Vec<Subspace>) -> Self {
        self.extra = extra;
        self
    }
}

/// Candidates together with the user-supplied extras, deduplicated and sorted.
pub fn search_space(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Vec<Subspace>> {
    let mut set: BTreeSet<Subspace> = candidate_subspaces(c, opts.depth).into_iter().collect();
    for h in &opts.extra {
        if h.ambient() != c.n() {
            return Err(Error::AmbientMismatch {
                left: c.n(),
                right: h.ambient(),
            });
        }
        if !h.is_zero() && !h.is_full() {
            set.insert(h.clone());
        }
    }
    Ok(set.into_iter().collect())
}

/// Exact weights of every subspace in `hs`, computed in parallel.
pub fn scan(c: &WeightedConfiguration, hs: &[Subspace]) -> Vec<Q> {
    hs.par_iter()
        .map(|h| mu_unchecked(c, h).expect("subspaces share the ambient space"))
        .collect()
}

fn digest(hs: &[Subspace]) -> String {
    let mut hasher = Sha256::new();
    for h in hs {
        for v in h.to_strings() {
            hasher.update(v.join(",").as_bytes());
            hasher.update(b";");
        }
        hasher.update(b"|");
    }
    hex::encode(hasher.finalize())
}

/// Exact verdict from the candidate search alone.
pub fn decide_exact(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Verdict> {
    let hs = search_space(c, opts)?;
    let mus = scan(c, &hs);
    let total = c.slope_total();
    let complete = c.n() == 1 || (c.n() == 2 && c.d() == 1);
    let within = if complete {
        Confidence::ExactComplete
    } else {
        Confidence::ExactWithinDepth
    };
    let verdict = |status, confidence, certificate| Verdict {
        status,
        confidence,
        certificate,
        slope_total: total.clone(),
        decomposition: None,
        notes: Vec::new(),
    };
    if let Some(i) = mus.iter().position(|m| m.is_positive()) {
        let h = hs[i].clone();
        let slope = c.slope_at(&h)?;
        return Ok(verdict(
            Status::Unstable,
            Confidence::ExactComplete,
            Certificate::Destabilizing { subspace: h, slope },
        ));
    }
    if let Some(i) = mus.iter().position(Zero::is_zero) {
        return Ok(verdict(
            Status::StrictlySemistable,
            within,
            Certificate::Equality {
                subspace: hs[i].clone(),
                slope: total.clone(),
            },
        ));
    }
    Ok(verdict(
        Status::Stable,
        within,
        Certificate::Exhausted {
            candidates: hs.len(),
            digest: digest(&hs),
        },
    ))
}

/// Stability verdict with an exact certificate. Strictly semistable results
/// also carry a direct-sum decomposition when one is found.
pub fn decide(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Verdict> {
    let mut v = decide_exact(c, opts)?;
    if v.status == Status::StrictlySemistable {
        let split = crate::filtration::polystable_split(c, opts)?;
        if let Certificate::DirectSum { summands } = split.certificate {
            v.decomposition = Some(summands);
        }
    }
    if opts.numeric && v.status != Status::Unstable {
        corroborate(c, opts, &mut v)?;
    }
    Ok(v)
}

fn corroborate(c: &WeightedConfiguration, opts: &DecideOptions, v: &mut Verdict) -> Result<()> {
    use crate::balance::{balance_solve, exact_hints, BalanceStatus};
    let res = balance_solve(c, &opts.balance)?;
    match res.status {
        BalanceStatus::Balanced => {
            v.confidence = Confidence::NumericallyCorroborated;
            v.notes.push(format!(
                "balance metric found, residual {:.3e} after {} iterations",
                res.residual, res.iterations
            ));
        }
        BalanceStatus::Diverged => {
            let candidates = search_space(c, opts)?;
            for h in exact_hints(c, &res, &candidates) {
                let mu = mu_lambda_s(c, &h)?;
                if mu.is_positive() {
                    let slope = c.slope_at(&h)?;
                    v.status = Status::Unstable;
                    v.confidence = Confidence::ExactComplete;
                    v.certificate = Certificate::Destabilizing { subspace: h, slope };
                    v.decomposition = None;
                    v.notes
                        .push("destabilizer recovered from the divergent balance flow".into());
                    return Ok(());
                }
            }
            v.notes.push(format!(
                "balance flow diverged after {} iterations without an exact destabilizer",
                res.iterations
            ));
        }
        BalanceStatus::MaxIter => {
            v.notes.push(format!(
                "balance flow stopped at the iteration cap, residual {:.3e}",
                res.residual
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominantReport {
    pub index: usize,
    /// Weights strictly above this make the remainder term smaller than 1.
    pub threshold: Q,
    pub dominates: bool,
    pub status: Status,
    pub boosted_weight: Q,
    pub boosted_status: Status,
    pub singleton_status: Status,
    /// Boosted configuration semistable implies singleton semistable.
    pub implication_semistable: bool,
    /// Singleton stable implies boosted configuration stable.
    pub implication_stable: bool,
}

/// Threshold above which item `i` alone controls the verdict, with both
/// implications checked on `c` at a weight just above it.
pub fn dominant_weight_check(
    c: &WeightedConfiguration,
    i: usize,
    opts: &DecideOptions,
) -> Result<DominantReport> {
    if c.len() < 2 {
        return Err(Error::InvalidArgument("need at least two items".into()));
    }
    if i >= c.len() {
        return Err(Error::InvalidArgument(format!("no item at position {i}")));
    }
    let n = c.n() as i64;
    let cap = (c.n() as i64 - 1) * c.d() as i64;
    let mut lower = Q::zero();
    let mut upper = Q::zero();
    for (j, it) in c.items().iter().enumerate() {
        if j == i {
            continue;
        }
        let k = it.subspace.dim() as i64;
        lower += &it.weight * q((n - 1) * k);
        upper += &it.weight * q(n * k.min(cap));
    }
    let threshold = if lower > upper { lower } else { upper };
    let boosted_weight = &threshold + q(1);
    let mut weights = c.weights();
    weights[i] = boosted_weight.clone();
    let boosted = c.with_weights(&weights)?;
    let singleton = WeightedConfiguration::new(c.n(), c.d(), vec![c.items()[i].clone()])?;

    let shared: Vec<Subspace> = search_space(c, opts)?;
    let opts_shared = DecideOptions {
        extra: shared,
        numeric: false,
        ..opts.clone()
    };
    let status = decide_exact(c, &opts_shared)?.status;
    let boosted_status = decide_exact(&boosted, &opts_shared)?.status;
    let singleton_status = decide_exact(&singleton, &opts_shared)?.status;
    Ok(DominantReport {
        index: i,
        dominates: c.items()[i].weight > threshold,
        threshold,
        status,
        boosted_weight,
        boosted_status,
        singleton_status,
        implication_semistable: !boosted_status.is_semistable() || singleton_status.is_semistable(),
        implication_stable: singleton_status != Status::Stable || boosted_status == Status::Stable,
    })
}
