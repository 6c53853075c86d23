//! Harder–Narasimhan and Jordan–Hölder filtrations, direct-sum splittings,
//! and weighted filtrations with their tensor products.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::{Item, WeightedConfiguration};
use crate::error::{Error, Result};
use crate::exact::{q, QuotientChart, RationalMatrix, Subspace, Q};
use crate::hilbert_mumford::{
    decide_exact, scan, search_space, Certificate, Confidence, DecideOptions, Status, Verdict,
};

const MAX_PASSES: usize = 32;

/// One graded piece `V^l / V^{l-1}` of a flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graded {
    pub config: WeightedConfiguration,
    pub slope: Q,
    pub status: Status,
}

/// A flag `0 = V^0 ⊂ V^1 ⊂ … ⊂ V^h = V` with its graded pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagReport {
    pub steps: Vec<Subspace>,
    pub gradeds: Vec<Graded>,
    pub confidence: Confidence,
}

impl FlagReport {
    pub fn slopes(&self) -> Vec<Q> {
        self.gradeds.iter().map(|g| g.slope.clone()).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.steps.len() == 2
    }
}

fn local_opts(opts: &DecideOptions) -> DecideOptions {
    DecideOptions {
        extra: Vec::new(),
        numeric: false,
        ..opts.clone()
    }
}

/// Graded configurations of a flag given as `0 ⊂ V^1 ⊂ … ⊂ V`.
pub fn graded_pieces(
    c: &WeightedConfiguration,
    steps: &[Subspace],
) -> Result<Vec<WeightedConfiguration>> {
    steps
        .windows(2)
        .map(|w| {
            let chart = QuotientChart::new(&w[0]);
            let quotient = c.induced_quotient(&w[0])?;
            quotient.induced_sub(&chart.image(&w[1]))
        })
        .collect()
}

fn report(
    c: &WeightedConfiguration,
    steps: Vec<Subspace>,
    opts: &DecideOptions,
) -> Result<(FlagReport, Vec<Verdict>)> {
    let opts = local_opts(opts);
    let mut gradeds = Vec::new();
    let mut verdicts = Vec::new();
    let mut confidence = Confidence::ExactComplete;
    for g in graded_pieces(c, &steps)? {
        let v = decide_exact(&g, &opts)?;
        if v.confidence != Confidence::ExactComplete {
            confidence = Confidence::ExactWithinDepth;
        }
        gradeds.push(Graded {
            slope: g.slope_total(),
            status: v.status,
            config: g,
        });
        verdicts.push(v);
    }
    Ok((
        FlagReport {
            steps,
            gradeds,
            confidence,
        },
        verdicts,
    ))
}

/// Subspace spanned by basis vectors given in coordinates of `frame`.
fn embed(frame: &Subspace, s: &Subspace) -> Subspace {
    let rows = s.basis().iter().map(|v| frame.embed(v)).collect();
    Subspace::span_unchecked(frame.ambient(), rows)
}

/// Harder–Narasimhan filtration: greedy maximal-slope steps, checked
/// afterwards by deciding every graded piece.
pub fn hn_filtration(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<FlagReport> {
    let n = c.n();
    let mut pool: BTreeSet<Subspace> = search_space(c, opts)?.into_iter().collect();
    let mut last = None;
    for _ in 0..MAX_PASSES {
        let steps = greedy_flag(c, &pool, opts)?;
        let (rep, verdicts) = report(c, steps, opts)?;
        let mut grew = false;
        for (l, v) in verdicts.iter().enumerate() {
            if let Certificate::Destabilizing { subspace, .. } = &v.certificate {
                // pull the graded destabilizer back to V
                let (lo, hi) = (&rep.steps[l], &rep.steps[l + 1]);
                let chart = QuotientChart::new(lo);
                let in_quotient = embed(&chart.image(hi), subspace);
                grew |= pool.insert(chart.preimage(&in_quotient));
            }
        }
        for (l, w) in rep.gradeds.windows(2).enumerate() {
            if w[0].slope <= w[1].slope {
                grew |= pool.insert(rep.steps[l + 2].clone());
            }
        }
        let ok = verdicts.iter().all(|v| v.status != Status::Unstable)
            && rep.gradeds.windows(2).all(|w| w[0].slope > w[1].slope);
        if ok || !grew {
            return Ok(rep);
        }
        last = Some(rep);
    }
    last.ok_or_else(|| Error::InvalidArgument(format!("no filtration found for n={n}")))
}

fn greedy_flag(
    c: &WeightedConfiguration,
    pool: &BTreeSet<Subspace>,
    opts: &DecideOptions,
) -> Result<Vec<Subspace>> {
    let n = c.n();
    let local = local_opts(opts);
    let mut steps = vec![Subspace::zero(n)];
    let mut cur = Subspace::zero(n);
    while !cur.is_full() {
        let chart = QuotientChart::new(&cur);
        let qc = c.induced_quotient(&cur)?;
        let mut cands: BTreeSet<Subspace> = search_space(&qc, &local)?.into_iter().collect();
        for p in pool {
            if cur.contains_subspace(p) {
                continue;
            }
            let img = chart.image(p);
            if !img.is_zero() {
                cands.insert(img);
            }
        }
        cands.insert(Subspace::full(qc.n()));
        let chosen = max_slope_subspace(&qc, cands)?;
        cur = chart.preimage(&chosen);
        steps.push(cur.clone());
    }
    Ok(steps)
}

/// The largest subspace of maximal slope among `cands`, closing the maximizers
/// under join.
fn max_slope_subspace(
    c: &WeightedConfiguration,
    mut cands: BTreeSet<Subspace>,
) -> Result<Subspace> {
    loop {
        let list: Vec<Subspace> = cands.iter().cloned().collect();
        let slopes = list
            .iter()
            .map(|h| c.slope_at(h))
            .collect::<Result<Vec<_>>>()?;
        let best = slopes
            .iter()
            .max()
            .expect("V is always a candidate")
            .clone();
        let maximizers: Vec<&Subspace> = list
            .iter()
            .zip(&slopes)
            .filter(|(_, s)| **s == best)
            .map(|(h, _)| h)
            .collect();
        let mut join = maximizers[0].clone();
        for h in &maximizers[1..] {
            join = join.join(h)?;
        }
        let js = c.slope_at(&join)?;
        if js == best {
            return Ok(join);
        }
        if js < best {
            let top = maximizers.iter().map(|h| h.dim()).max().unwrap_or(0);
            let pick = maximizers
                .iter()
                .find(|h| h.dim() == top)
                .expect("nonempty");
            return Ok((*pick).clone());
        }
        cands.insert(join);
    }
}

/// A Jordan–Hölder filtration of a semistable configuration.
pub fn jh_filtration(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<FlagReport> {
    let v = decide_exact(c, opts)?;
    if v.status == Status::Unstable {
        return Err(Error::InvalidArgument(
            "Jordan-Hölder filtrations need a semistable configuration".into(),
        ));
    }
    let mut inner = jh_steps(c, opts)?;
    inner.push(Subspace::full(c.n()));
    let (rep, _) = report(c, inner, opts)?;
    Ok(rep)
}

/// Steps `0 ⊂ V^1 ⊂ … ⊂ V^{h-1}` (without `V` itself).
fn jh_steps(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Vec<Subspace>> {
    let n = c.n();
    let Some(mut h) = largest_equality(c, opts)? else {
        return Ok(vec![Subspace::zero(n)]);
    };
    // enlarge until the quotient is stable
    loop {
        let chart = QuotientChart::new(&h);
        let qc = c.induced_quotient(&h)?;
        let v = decide_exact(&qc, &local_opts(opts))?;
        match v.certificate {
            Certificate::Equality { subspace, .. } => {
                let bigger = largest_equality(&qc, &local_opts(opts))?.unwrap_or(subspace);
                h = chart.preimage(&bigger);
            }
            Certificate::Destabilizing { .. } => {
                return Err(Error::InvalidArgument(
                    "configuration is unstable (found through a quotient)".into(),
                ))
            }
            _ => break,
        }
    }
    let sub = c.induced_sub(&h)?;
    let mut steps: Vec<Subspace> = jh_steps(&sub, &local_opts(opts))?
        .iter()
        .map(|s| embed(&h, s))
        .collect();
    steps.push(h);
    Ok(steps)
}

fn equality_candidates(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Vec<Subspace>> {
    let hs = search_space(c, opts)?;
    let mus = scan(c, &hs);
    if mus.iter().any(Signed::is_positive) {
        return Err(Error::InvalidArgument("configuration is unstable".into()));
    }
    let mut eq: Vec<Subspace> = hs
        .into_iter()
        .zip(mus)
        .filter(|(_, m)| m.is_zero())
        .map(|(h, _)| h)
        .collect();
    // largest dimension first, ties by the canonical order
    eq.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
    Ok(eq)
}

fn largest_equality(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Option<Subspace>> {
    Ok(equality_candidates(c, opts)?.into_iter().next())
}

/// A complement `Q` of `h` such that every item splits as
/// `(K_i ∩ h⊗W) ⊕ (K_i ∩ Q⊗W)`, if one exists.
pub fn splitting_complement(c: &WeightedConfiguration, h: &Subspace) -> Result<Option<Subspace>> {
    let (n, d) = (c.n(), c.d());
    let hd = h.dim();
    let qd = n - hd;
    if hd == 0 || qd == 0 {
        return Err(Error::InvalidArgument(
            "need a nonzero proper subspace".into(),
        ));
    }
    let chart = QuotientChart::new(h);
    let lift = chart.lift_matrix();
    let proj = chart.project_matrix();
    let b = h.basis_matrix();
    // unknown X is hd × qd; Q = columns of (lift + B X)
    let unknowns = hd * qd;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for it in c.items() {
        let ann = it.subspace.annihilator();
        if ann.is_zero() {
            continue;
        }
        for x in it.subspace.basis() {
            let u = crate::config::apply_v(&proj, x, d);
            let base = crate::config::apply_v(&lift, &u, d);
            for a in ann.basis() {
                let mut row = vec![Q::zero(); unknowns + 1];
                for j in 0..hd {
                    for k in 0..qd {
                        let mut coef = Q::zero();
                        for r in 0..n {
                            let brj = b.get(r, j);
                            if brj.is_zero() {
                                continue;
                            }
                            for l in 0..d {
                                let arl = &a[r * d + l];
                                let ukl = &u[k * d + l];
                                if !arl.is_zero() && !ukl.is_zero() {
                                    coef += brj * arl * ukl;
                                }
                            }
                        }
                        row[j * qd + k] = coef;
                    }
                }
                let constant: Q = a.iter().zip(&base).map(|(p, s)| p * s).sum();
                row[unknowns] = -constant;
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let m = RationalMatrix::from_rows(rows, unknowns + 1)?;
    let (r, pivots) = m.rref();
    if pivots.last() == Some(&unknowns) {
        return Ok(None);
    }
    let mut xs = vec![Q::zero(); unknowns];
    for (i, &p) in pivots.iter().enumerate() {
        xs[p] = r.get(i, unknowns).clone();
    }
    let x = RationalMatrix::new(hd, qd, xs)?;
    let q_basis = lift.add(&b.mul(&x)?)?;
    Ok(Some(Subspace::canonicalize(&q_basis)))
}

/// Polystability test: a decomposition of `V` into stable summands of the
/// common slope, or the Jordan–Hölder report when none is found.
pub fn polystable_split(c: &WeightedConfiguration, opts: &DecideOptions) -> Result<Verdict> {
    let v = decide_exact(c, opts)?;
    match v.status {
        Status::Unstable => Ok(v),
        Status::Stable | Status::Polystable => Ok(Verdict {
            status: Status::Polystable,
            certificate: Certificate::DirectSum {
                summands: vec![Subspace::full(c.n())],
            },
            ..v
        }),
        Status::StrictlySemistable => match split_rec(c, opts, 0)? {
            Some(mut summands) => {
                summands.sort();
                Ok(Verdict {
                    status: Status::Polystable,
                    certificate: Certificate::DirectSum { summands },
                    ..v
                })
            }
            None => {
                let mut v = v;
                if let Ok(jh) = jh_filtration(c, opts) {
                    v.notes.push(format!(
                        "no splitting found; Jordan-Hölder flag has {} steps with graded dimensions {:?}",
                        jh.steps.len() - 1,
                        jh.gradeds.iter().map(|g| g.config.n()).collect::<Vec<_>>()
                    ));
                }
                Ok(v)
            }
        },
    }
}

fn split_rec(
    c: &WeightedConfiguration,
    opts: &DecideOptions,
    level: usize,
) -> Result<Option<Vec<Subspace>>> {
    let n = c.n();
    let o = if level == 0 {
        opts.clone()
    } else {
        local_opts(opts)
    };
    let v = decide_exact(c, &o)?;
    match v.status {
        Status::Stable | Status::Polystable => return Ok(Some(vec![Subspace::full(n)])),
        Status::Unstable => return Ok(None),
        Status::StrictlySemistable => {}
    }
    for h in equality_candidates(c, &o)? {
        let Some(comp) = splitting_complement(c, &h)? else {
            continue;
        };
        let left = split_rec(&c.induced_sub(&h)?, opts, level + 1)?;
        let right = split_rec(&c.induced_sub(&comp)?, opts, level + 1)?;
        if let (Some(l), Some(r)) = (left, right) {
            let mut out: Vec<Subspace> = l.iter().map(|s| embed(&h, s)).collect();
            out.extend(r.iter().map(|s| embed(&comp, s)));
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// A weakly decreasing chain `V ⊇ V^1 ⊇ … ⊇ V^h` with a weight per step
/// (`V^0 = V` is implicit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub steps: Vec<Subspace>,
    pub weights: Vec<Q>,
}

/// A family of weighted filtrations of one space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MFiltration {
    n: usize,
    filtrations: Vec<Filtration>,
}

impl MFiltration {
    pub fn new(n: usize, filtrations: Vec<Filtration>) -> Result<Self> {
        for (s, f) in filtrations.iter().enumerate() {
            if f.steps.len() != f.weights.len() {
                return Err(Error::InvalidArgument(format!(
                    "filtration {s}: {} steps but {} weights",
                    f.steps.len(),
                    f.weights.len()
                )));
            }
            let mut prev = Subspace::full(n);
            for (l, st) in f.steps.iter().enumerate() {
                if st.ambient() != n {
                    return Err(Error::AmbientMismatch {
                        left: n,
                        right: st.ambient(),
                    });
                }
                if !prev.contains_subspace(st) {
                    return Err(Error::InvalidArgument(format!(
                        "filtration {s}: step {} is not contained in the previous step",
                        l + 1
                    )));
                }
                prev = st.clone();
            }
            if f.weights.iter().any(|w| !w.is_positive()) {
                return Err(Error::InvalidArgument(format!(
                    "filtration {s}: nonpositive weight"
                )));
            }
        }
        Ok(MFiltration { n, filtrations })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn filtrations(&self) -> &[Filtration] {
        &self.filtrations
    }

    pub fn len(&self) -> usize {
        self.filtrations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filtrations.is_empty()
    }
}

/// Flattens every nonzero proper step into one configuration (`d = 1`).
pub fn mfiltration_to_config(f: &MFiltration) -> Result<WeightedConfiguration> {
    let items = f
        .filtrations
        .iter()
        .flat_map(|fl| fl.steps.iter().zip(&fl.weights))
        .filter(|(s, _)| !s.is_zero() && !s.is_full())
        .map(|(s, w)| Item {
            subspace: s.clone(),
            weight: w.clone(),
        })
        .collect();
    WeightedConfiguration::new(f.n, 1, items)
}

/// Integer-indexed steps `V^1, V^2, …`: step `l` of weight `w` is repeated
/// `w · scale` times.
fn expand(f: &Filtration, scale: &Q) -> Result<Vec<Subspace>> {
    let mut out = Vec::new();
    for (s, w) in f.steps.iter().zip(&f.weights) {
        let reps = w * scale;
        if !reps.is_integer() {
            return Err(Error::InvalidArgument(
                "weights do not share the scale".into(),
            ));
        }
        let reps = reps
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::InvalidArgument("weight too large to expand".into()))?;
        out.extend(std::iter::repeat_n(s.clone(), reps));
    }
    Ok(out)
}

fn kron_subspace(a: &Subspace, b: &Subspace) -> Subspace {
    let m = a.basis_matrix().kronecker(&b.basis_matrix());
    Subspace::canonicalize(&m)
}

/// Tensor product of two families of filtrations, step `l` being
/// `Σ_{p+q=l} A^p ⊗ B^q`; weights come from expanding every step into unit
/// copies and merging equal neighbours again.
pub fn tensor_filtrations(a: &MFiltration, b: &MFiltration) -> Result<MFiltration> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "families have {} and {} filtrations",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.n, b.n);
    let mut out = Vec::with_capacity(a.len());
    for (fa, fb) in a.filtrations.iter().zip(&b.filtrations) {
        let denom = fa
            .weights
            .iter()
            .chain(&fb.weights)
            .fold(num_bigint::BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scale = Q::from_integer(denom);
        let ea = expand(fa, &scale)?;
        let eb = expand(fb, &scale)?;
        let step_a = |p: usize| {
            if p == 0 {
                Subspace::full(na)
            } else {
                ea.get(p - 1).cloned().unwrap_or_else(|| Subspace::zero(na))
            }
        };
        let step_b = |p: usize| {
            if p == 0 {
                Subspace::full(nb)
            } else {
                eb.get(p - 1).cloned().unwrap_or_else(|| Subspace::zero(nb))
            }
        };
        let top = ea.len() + eb.len();
        let mut steps: Vec<Subspace> = Vec::new();
        let mut weights: Vec<Q> = Vec::new();
        let unit = q(1) / &scale;
        for l in 1..=top {
            let mut acc = Subspace::zero(na * nb);
            for p in 0..=l {
                let (sa, sb) = (step_a(p), step_b(l - p));
                if sa.is_zero() || sb.is_zero() {
                    continue;
                }
                acc = acc.join(&kron_subspace(&sa, &sb))?;
            }
            if acc.is_zero() {
                break;
            }
            match steps.last() {
                Some(prev) if *prev == acc => {
                    *weights.last_mut().expect("paired with steps") += &unit;
                }
                _ => {
                    steps.push(acc);
                    weights.push(unit.clone());
                }
            }
        }
        out.push(Filtration { steps, weights });
    }
    MFiltration::new(na * nb, out)
}
