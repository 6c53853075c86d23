//! Built-in hand-checked cases with their expected verdicts and filtration slopes.

use rayon::prelude::*;

use crate::config::WeightedConfiguration;
use crate::error::Result;
use crate::exact::{format_q, q, q_frac, Subspace, Q};
use crate::filtration::{hn_filtration, jh_filtration};
use crate::hilbert_mumford::{decide, Certificate, DecideOptions, Status};

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: &'static str,
    pub config: WeightedConfiguration,
    pub status: Status,
    /// Expected destabilizing subspace for unstable cases.
    pub destabilizer: Option<Subspace>,
    /// Whether a direct-sum splitting into stable pieces exists.
    pub polystable: bool,
    pub hn_slopes: Vec<Q>,
    /// `None` for unstable cases.
    pub jh_slopes: Option<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub status: Status,
    pub hn_slopes: Vec<Q>,
    pub jh_slopes: Option<Vec<Q>>,
    pub mismatches: Vec<String>,
}

fn cfg(n: usize, d: usize, items: &[(&[&[i64]], i64)]) -> WeightedConfiguration {
    WeightedConfiguration::from_i64(n, d, items).expect("corpus configuration")
}

fn span(n: usize, rows: &[&[i64]]) -> Option<Subspace> {
    Some(Subspace::from_i64(n, rows).expect("corpus subspace"))
}

fn qs(v: &[(i64, i64)]) -> Vec<Q> {
    v.iter().map(|&(a, b)| q_frac(a, b)).collect()
}

fn ints(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

#[allow(clippy::too_many_arguments)]
fn case(
    name: &'static str,
    config: WeightedConfiguration,
    status: Status,
    destabilizer: Option<Subspace>,
    polystable: bool,
    hn_slopes: Vec<Q>,
    jh_slopes: Option<Vec<Q>>,
) -> CorpusCase {
    CorpusCase {
        name,
        config,
        status,
        destabilizer,
        polystable,
        hn_slopes,
        jh_slopes,
    }
}

pub fn corpus() -> Vec<CorpusCase> {
    use Status::*;
    let (witness, _) = crate::cone::plane_witness(3, &[q(1), q(1), q(1)]).expect("witness");
    vec![
        case(
            "single_line",
            cfg(2, 1, &[(&[&[1, 0]], 1)]),
            Unstable,
            span(2, &[&[1, 0]]),
            false,
            ints(&[1, 0]),
            None,
        ),
        case(
            "two_equal_lines",
            cfg(2, 1, &[(&[&[1, 1]], 1), (&[&[1, 1]], 1)]),
            Unstable,
            span(2, &[&[1, 1]]),
            false,
            ints(&[2, 0]),
            None,
        ),
        case(
            "two_transverse_lines",
            cfg(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1)]),
            StrictlySemistable,
            None,
            true,
            ints(&[1]),
            Some(ints(&[1, 1])),
        ),
        case(
            "three_lines",
            cfg(2, 1, &[(&[&[1, 0]], 1), (&[&[0, 1]], 1), (&[&[1, 1]], 1)]),
            Stable,
            None,
            true,
            qs(&[(3, 2)]),
            Some(qs(&[(3, 2)])),
        ),
        case(
            "weighted_lines",
            cfg(2, 1, &[(&[&[1, 0]], 2), (&[&[0, 1]], 1)]),
            Unstable,
            span(2, &[&[1, 0]]),
            false,
            ints(&[2, 1]),
            None,
        ),
        case(
            "dominant_pair",
            cfg(2, 1, &[(&[&[1, 0]], 100), (&[&[0, 1]], 1)]),
            Unstable,
            span(2, &[&[1, 0]]),
            false,
            ints(&[100, 1]),
            None,
        ),
        case(
            "dominant_triple",
            cfg(2, 1, &[(&[&[1, 0]], 5), (&[&[0, 1]], 1), (&[&[1, 1]], 1)]),
            Unstable,
            span(2, &[&[1, 0]]),
            false,
            ints(&[5, 2]),
            None,
        ),
        case(
            "boundary_triple",
            cfg(2, 1, &[(&[&[1, 0]], 2), (&[&[0, 1]], 1), (&[&[1, 1]], 1)]),
            StrictlySemistable,
            None,
            false,
            ints(&[2]),
            Some(ints(&[2, 2])),
        ),
        case(
            "full_space_item",
            cfg(2, 1, &[(&[&[1, 0], &[0, 1]], 1)]),
            StrictlySemistable,
            None,
            true,
            ints(&[1]),
            Some(ints(&[1, 1])),
        ),
        case(
            "repeated_line_among_four",
            cfg(
                2,
                1,
                &[
                    (&[&[1, 0]], 1),
                    (&[&[1, 0]], 1),
                    (&[&[0, 1]], 1),
                    (&[&[1, 1]], 1),
                ],
            ),
            StrictlySemistable,
            None,
            false,
            ints(&[2]),
            Some(ints(&[2, 2])),
        ),
        case(
            "coordinate_lines_c3",
            cfg(
                3,
                1,
                &[(&[&[1, 0, 0]], 1), (&[&[0, 1, 0]], 1), (&[&[0, 0, 1]], 1)],
            ),
            StrictlySemistable,
            None,
            true,
            ints(&[1]),
            Some(ints(&[1, 1, 1])),
        ),
        case(
            "plane_and_heavy_line",
            cfg(3, 1, &[(&[&[1, 0, 0], &[0, 1, 0]], 1), (&[&[0, 0, 1]], 2)]),
            Unstable,
            span(3, &[&[0, 0, 1]]),
            false,
            ints(&[2, 1]),
            None,
        ),
        case(
            "line_inside_plane",
            cfg(3, 1, &[(&[&[1, 0, 0], &[0, 1, 0]], 1), (&[&[1, 0, 0]], 1)]),
            Unstable,
            span(3, &[&[1, 0, 0]]),
            false,
            ints(&[2, 1, 0]),
            None,
        ),
        case(
            "transverse_planes_c4",
            cfg(
                4,
                1,
                &[
                    (&[&[1, 0, 0, 0], &[0, 1, 0, 0]], 1),
                    (&[&[0, 0, 1, 0], &[0, 0, 0, 1]], 1),
                    (&[&[1, 0, 1, 0], &[0, 1, 0, 1]], 1),
                ],
            ),
            StrictlySemistable,
            None,
            true,
            qs(&[(3, 2)]),
            Some(qs(&[(3, 2), (3, 2)])),
        ),
        case(
            "plane_witness_c4",
            witness,
            StrictlySemistable,
            None,
            true,
            qs(&[(3, 2)]),
            Some(qs(&[(3, 2), (3, 2)])),
        ),
        case(
            "pure_tensor_d2",
            cfg(2, 2, &[(&[&[1, 0, 0, 0]], 1)]),
            Unstable,
            span(2, &[&[1, 0]]),
            false,
            ints(&[1, 0]),
            None,
        ),
        case(
            "coordinate_blocks_d2",
            cfg(
                2,
                2,
                &[
                    (&[&[1, 0, 0, 0], &[0, 1, 0, 0]], 1),
                    (&[&[0, 0, 1, 0], &[0, 0, 0, 1]], 1),
                ],
            ),
            StrictlySemistable,
            None,
            true,
            ints(&[2]),
            Some(ints(&[2, 2])),
        ),
        case(
            "entangled_vector_d2",
            cfg(2, 2, &[(&[&[1, 0, 0, 1]], 1)]),
            Stable,
            None,
            true,
            qs(&[(1, 2)]),
            Some(qs(&[(1, 2)])),
        ),
    ]
}

fn show(v: &[Q]) -> String {
    format!(
        "[{}]",
        v.iter().map(format_q).collect::<Vec<_>>().join(", ")
    )
}

pub fn run_case(case: &CorpusCase, opts: &DecideOptions) -> Result<CaseOutcome> {
    let c = &case.config;
    let mut mismatches = Vec::new();
    let v = decide(c, opts)?;
    if v.status != case.status {
        mismatches.push(format!(
            "status {} != {}",
            v.status.name(),
            case.status.name()
        ));
    }
    if !v.verify(c)? {
        mismatches.push("certificate does not re-verify".into());
    }
    if let Some(h) = &case.destabilizer {
        match &v.certificate {
            Certificate::Destabilizing { subspace, .. } if subspace == h => {}
            other => mismatches.push(format!("destabilizer {other:?}")),
        }
    }
    let split = v.decomposition.is_some() || v.status == Status::Stable;
    if split != case.polystable {
        mismatches.push(format!("polystable {split} != {}", case.polystable));
    }
    let hn = hn_filtration(c, opts)?.slopes();
    if hn != case.hn_slopes {
        mismatches.push(format!(
            "hn slopes {} != {}",
            show(&hn),
            show(&case.hn_slopes)
        ));
    }
    let jh = if v.status.is_semistable() {
        Some(jh_filtration(c, opts)?.slopes())
    } else {
        None
    };
    if jh != case.jh_slopes {
        mismatches.push(format!("jh slopes {jh:?} != {:?}", case.jh_slopes));
    }
    Ok(CaseOutcome {
        name: case.name,
        passed: mismatches.is_empty(),
        status: v.status,
        hn_slopes: hn,
        jh_slopes: jh,
        mismatches,
    })
}

/// Runs every case in parallel; outcomes come back in corpus order.
pub fn run_corpus(opts: &DecideOptions) -> Result<Vec<CaseOutcome>> {
    corpus().par_iter().map(|c| run_case(c, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_passes() {
        let out = run_corpus(&DecideOptions::default()).unwrap();
        assert!(out.len() >= 12);
        let failed: Vec<_> = out
            .iter()
            .filter(|o| !o.passed)
            .map(|o| (o.name, &o.mismatches))
            .collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
