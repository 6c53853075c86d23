mod common;

use common::*;
use gitstab_core::balance::{moment_map, CMatrix, C64};
use gitstab_core::config::{tensor_with_identity, WeightedConfiguration};
use gitstab_core::correspondence::{gm_backward, gm_forward};
use gitstab_core::exact::{kernel, q, q_frac, RationalMatrix, Subspace};
use gitstab_core::filtration::{tensor_filtrations, Filtration, MFiltration};
use gitstab_core::hilbert_mumford::{
    decide_exact, mu_general, mu_lambda_s, mu_via_flags, Certificate, DecideOptions, OnePS, Status,
};
use gitstab_core::io::{config_from_value, config_value};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn proper_span(rng: &mut ChaCha8Rng, n: usize) -> Subspace {
    loop {
        let k = rng.gen_range(1..n);
        let h = random_span(rng, n, k);
        if !h.is_zero() && !h.is_full() {
            return h;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modular_dimension_law(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let (ka, kb) = (r.gen_range(0..=n), r.gen_range(0..=n));
        let a = sparse_span(&mut r, n, ka);
        let b = random_span(&mut r, n, kb);
        let (j, m) = (a.join(&b).unwrap(), a.meet(&b).unwrap());
        prop_assert_eq!(j.dim() + m.dim(), a.dim() + b.dim());
        prop_assert!(j.contains_subspace(&a) && j.contains_subspace(&b));
        prop_assert!(a.contains_subspace(&m) && b.contains_subspace(&m));
    }

    #[test]
    fn lattice_axioms(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let (ka, kb) = (r.gen_range(0..=n), r.gen_range(0..=n));
        let a = sparse_span(&mut r, n, ka);
        let b = sparse_span(&mut r, n, kb);
        prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
        prop_assert_eq!(a.meet(&b).unwrap(), b.meet(&a).unwrap());
        let ann = a.annihilator();
        prop_assert_eq!(ann.dim(), n - a.dim());
        prop_assert_eq!(ann.annihilator(), a);
    }

    #[test]
    fn rank_nullity(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..6) {
        let mut r = rng(seed);
        let entries: Vec<i64> = (0..rows * cols).map(|_| r.gen_range(-2..=2)).collect();
        let m = RationalMatrix::from_i64(rows, cols, &entries);
        let k = kernel(&m);
        prop_assert_eq!(m.rank() + k.dim(), cols);
        for v in k.basis() {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn sign_equivalence(seed in any::<u64>(), n in 2usize..5, d in 1usize..3, m in 1usize..4) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, d, m);
        let h = proper_span(&mut r, n);
        let mu = mu_lambda_s(&c, &h).unwrap();
        let gap = c.slope_at(&h).unwrap() - c.slope_total();
        prop_assert_eq!(mu, q((n * h.dim()) as i64) * gap);
    }

    #[test]
    fn weight_decomposition_and_additivity(seed in any::<u64>(), n in 2usize..5, d in 1usize..3) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, d, 3);
        let frame = random_invertible(&mut r, n);
        let (a, b) = (sorted_zero_sum(&mut r, n), sorted_zero_sum(&mut r, n));
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let la = OnePS::new(frame.clone(), a).unwrap();
        let lb = OnePS::new(frame.clone(), b).unwrap();
        let ls = OnePS::new(frame, sum).unwrap();
        let ma = mu_general(&c, &la).unwrap();
        prop_assert_eq!(&ma, &mu_via_flags(&c, &la).unwrap());
        prop_assert_eq!(mu_general(&c, &ls).unwrap(), ma + mu_general(&c, &lb).unwrap());
    }

    #[test]
    fn split_merge_preserve_slopes(seed in any::<u64>(), n in 2usize..5, m in 1usize..4) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 1, m);
        let i = r.gen_range(0..m);
        let w = c.items()[i].weight.clone();
        let s = &w * q_frac(r.gen_range(1..=4), 5);
        let t = &w - &s;
        let split = c.split(i, &s, &t).unwrap();
        prop_assert_eq!(split.slope_total(), c.slope_total());
        let h = proper_span(&mut r, n);
        prop_assert_eq!(split.slope_at(&h).unwrap(), c.slope_at(&h).unwrap());
        prop_assert_eq!(split.merge(i, i + 1).unwrap(), c.clone());
        let opts = DecideOptions::default();
        prop_assert_eq!(decide_exact(&split, &opts).unwrap().status, decide_exact(&c, &opts).unwrap().status);
    }

    #[test]
    fn permutation_and_scaling(seed in any::<u64>(), n in 2usize..5, m in 1usize..5) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 1, m);
        let mut perm: Vec<usize> = (0..m).collect();
        for k in (1..m).rev() {
            perm.swap(k, r.gen_range(0..=k));
        }
        let opts = DecideOptions::default();
        let base = decide_exact(&c, &opts).unwrap().status;
        prop_assert_eq!(decide_exact(&c.permute(&perm).unwrap(), &opts).unwrap().status, base);
        let f = q_frac(r.gen_range(1..=9), r.gen_range(1..=9));
        prop_assert_eq!(decide_exact(&c.scale(&f).unwrap(), &opts).unwrap().status, base);
    }

    #[test]
    fn change_of_basis(seed in any::<u64>(), n in 2usize..5, d in 1usize..3, m in 1usize..4) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, d, m);
        let g = random_invertible(&mut r, n);
        let gc = c.transform(&g).unwrap();
        let opts = DecideOptions::default();
        let v = decide_exact(&c, &opts).unwrap();
        let gv = decide_exact(&gc, &opts).unwrap();
        prop_assert_eq!(v.status, gv.status);
        prop_assert!(v.verify(&c).unwrap());
        if let Certificate::Destabilizing { subspace, slope } = &v.certificate {
            let moved = subspace.image(&g).unwrap();
            prop_assert_eq!(&gc.slope_at(&moved).unwrap(), slope);
        }
    }

    #[test]
    fn full_items_are_never_stable(seed in any::<u64>(), n in 2usize..5, d in 1usize..3) {
        let mut r = rng(seed);
        let m = r.gen_range(1..4);
        let items: Vec<_> = (0..m).map(|_| (Subspace::full(n * d).basis().to_vec(), q(r.gen_range(1..=5)))).collect();
        let c = WeightedConfiguration::from_spans(n, d, items).unwrap();
        let v = decide_exact(&c, &DecideOptions::default()).unwrap();
        prop_assert_eq!(v.status, Status::StrictlySemistable);
    }

    #[test]
    fn tensor_with_identity_dimension(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let mut r = rng(seed);
        let k = r.gen_range(0..=n);
        let h = random_span(&mut r, n, k);
        prop_assert_eq!(tensor_with_identity(&h, d).dim(), h.dim() * d);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..5, d in 1usize..3, m in 1usize..4) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, d, m);
        prop_assert_eq!(config_from_value(&config_value(&c)).unwrap(), c);
    }

    #[test]
    fn packing_round_trip(seed in any::<u64>(), n in 1usize..4, m in 2usize..5) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 1, m);
        if let Ok(p) = gm_forward(&c) {
            prop_assert_eq!(gm_backward(&p, &c.weights()).unwrap(), c);
        }
    }

    #[test]
    fn moment_map_is_traceless(seed in any::<u64>(), n in 2usize..5, d in 1usize..3) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, d, 3);
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let metric = &a * a.adjoint() + CMatrix::identity(n, n);
        let phi = moment_map(&c, &metric).unwrap();
        prop_assert!(phi.trace().norm() < 1e-10);
        prop_assert!((&phi - phi.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn tensor_step_dimensions(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4) {
        let mut r = rng(seed);
        let chain = |r: &mut ChaCha8Rng, n: usize| {
            let k = r.gen_range(0..=n);
            let top = sparse_span(r, n, k);
            let k = r.gen_range(0..=top.dim());
            let inner: Vec<_> = top.basis()[..k].to_vec();
            let low = Subspace::span(n, &inner).unwrap();
            let w = vec![q(r.gen_range(1..=3)), q_frac(r.gen_range(1..=3), 2)];
            MFiltration::new(n, vec![Filtration { steps: vec![top, low], weights: w }]).unwrap()
        };
        let (a, b) = (chain(&mut r, na), chain(&mut r, nb));
        let t = tensor_filtrations(&a, &b).unwrap();
        prop_assert_eq!(t.n(), na * nb);
        for f in t.filtrations() {
            for pair in f.steps.windows(2) {
                prop_assert!(pair[0].contains_subspace(&pair[1]));
            }
        }
    }
}
