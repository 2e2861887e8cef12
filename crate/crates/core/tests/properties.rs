mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use semimod::families::{construct_d0, construct_dn, construct_en};
use semimod::hom::{brute_force_homs, find_left_inverse, DEFAULT_BUDGET};
use semimod::linear::{hom_of_matrix, matrix_of_hom, Matrix};
use semimod::module::{chain, diamond_m3, pentagon_n5};
use semimod::{compose, enumerate_homs, free_module, Congruence, FinModule, Flavor, Hom, HomConstraints, SearchOptions};

fn quotient_of_free(flavor: Flavor, rank: usize, pairs: &[(usize, usize)]) -> Arc<FinModule> {
    let free = free_module(flavor, rank).unwrap().module;
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a % free.len(), b % free.len())).collect();
    let c = Congruence::generated(&free, &pairs).unwrap();
    Arc::new(free.quotient(&c).unwrap().0)
}

fn pool(flavor: Flavor) -> Vec<Arc<FinModule>> {
    match flavor {
        Flavor::B => vec![
            Arc::new(chain(3)),
            Arc::new(diamond_m3()),
            Arc::new(pentagon_n5()),
            construct_dn(2).unwrap().module,
            construct_d0().module,
            free_module(Flavor::B, 3).unwrap().module,
        ],
        Flavor::Finf => vec![
            free_module(Flavor::Finf, 2).unwrap().module,
            construct_en(2).unwrap().module,
            free_module(Flavor::Finf, 1).unwrap().module,
        ],
    }
}

fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::B), Just(Flavor::Finf)]
}

fn small_module() -> impl Strategy<Value = Arc<FinModule>> {
    (flavor(), prop::collection::vec((0usize..27, 0usize..27), 0..3), 1usize..=3).prop_map(|(fl, pairs, rank)| {
        let rank = if fl == Flavor::Finf { rank.min(2) } else { rank };
        quotient_of_free(fl, rank, &pairs)
    })
}

fn submask(m: &FinModule, mask: u64) -> Vec<usize> {
    m.elements().filter(|&x| mask >> (x % 64) & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_submodule_is_a_closure(fl in flavor(), pick in 0usize..6, s in any::<u64>(), t in any::<u64>()) {
        let mods = pool(fl);
        let m = &mods[pick % mods.len()];
        let small = submask(m, s & t);
        let big = submask(m, s);
        let cl_small = m.generated_submodule(&small);
        let cl_big = m.generated_submodule(&big);
        let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
        prop_assert!(set(&small).is_subset(&set(&cl_small)));
        prop_assert_eq!(m.generated_submodule(&cl_small), cl_small.clone());
        prop_assert!(set(&cl_small).is_subset(&set(&cl_big)));
        let sub = m.submodule(&cl_big).unwrap().0;
        prop_assert!(sub.validate().is_valid());
    }

    #[test]
    fn enumeration_matches_brute_force(src in small_module(), tgt_pairs in prop::collection::vec((0usize..27, 0usize..27), 0..3),
                                       pin in prop::option::of((0usize..64, 0usize..64)), injective in any::<bool>()) {
        let tgt = quotient_of_free(src.flavor(), if src.flavor() == Flavor::B { 2 } else { 1 }, &tgt_pairs);
        prop_assume!((tgt.len() as f64).powi(src.len() as i32) <= DEFAULT_BUDGET as f64);
        let mut c = HomConstraints::new();
        if let Some((a, b)) = pin {
            c = c.pin(a % src.len(), b % tgt.len());
        }
        if injective {
            c = c.injective();
        }
        let fast = enumerate_homs(&src, &tgt, &c, SearchOptions::default()).unwrap();
        let slow = brute_force_homs(&src, &tgt, &c, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(fast.iter().map(Hom::map).collect::<Vec<_>>(), slow.iter().map(Hom::map).collect::<Vec<_>>());
        for f in &fast {
            prop_assert!(f.is_hom());
        }
    }

    #[test]
    fn quotient_projection_is_onto_hom(fl in flavor(), pairs in prop::collection::vec((0usize..27, 0usize..27), 0..4)) {
        let free = free_module(fl, 3).unwrap().module;
        let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a % free.len(), b % free.len())).collect();
        let c = Congruence::generated(&free, &pairs).unwrap();
        c.check_compatible(&free).unwrap();
        for &(a, b) in &pairs {
            prop_assert_eq!(c.class_of(a), c.class_of(b));
        }
        let (q, proj) = free.quotient(&c).unwrap();
        prop_assert!(q.validate().is_valid());
        let p = Hom::new(free.clone(), Arc::new(q), proj).unwrap();
        prop_assert!(p.is_hom());
        prop_assert!(p.is_surjective());
    }

    #[test]
    fn composition_is_associative(fl in flavor(), i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        let mods = pool(fl);
        let (a, b) = (&mods[0], &mods[1]);
        let opts = SearchOptions::default();
        let ab = enumerate_homs(a, b, &HomConstraints::new(), opts).unwrap();
        let ba = enumerate_homs(b, a, &HomConstraints::new(), opts).unwrap();
        let (f, g, h) = (&ab[i % ab.len()], &ba[j % ba.len()], &ab[k % ab.len()]);
        let left = compose(&compose(h, g).unwrap(), f).unwrap();
        let right = compose(h, &compose(g, f).unwrap()).unwrap();
        prop_assert_eq!(left.map(), right.map());
        let left_unit = compose(&Hom::identity(b.clone()), f).unwrap();
        let right_unit = compose(f, &Hom::identity(a.clone())).unwrap();
        prop_assert_eq!(left_unit.map(), f.map());
        prop_assert_eq!(right_unit.map(), f.map());
    }

    #[test]
    fn matrix_roundtrip(fl in flavor(), rows in 1usize..=6, cols in 1usize..=6, seed in prop::collection::vec(0u8..3, 36)) {
        let (rows, cols) = if fl == Flavor::Finf { (rows.min(4), cols.min(4)) } else { (rows, cols) };
        let entry = |x: u8| -> i8 { match fl { Flavor::B => (x % 2) as i8, Flavor::Finf => x as i8 - 1 } };
        let a = Matrix::from_fn(fl, rows, cols, |i, j| entry(seed[i * 6 + j])).unwrap();
        let f = hom_of_matrix(&a).unwrap();
        prop_assert!(f.is_hom());
        prop_assert_eq!(&matrix_of_hom(&f).unwrap(), &a);
        let again = hom_of_matrix(&matrix_of_hom(&f).unwrap()).unwrap();
        prop_assert_eq!(again.map(), f.map());
        if fl == Flavor::B {
            let product = common::boolean_product(&a.to_rows(), &Matrix::identity(fl, cols).to_rows());
            prop_assert_eq!(product, a.to_rows());
        }
    }

    #[test]
    fn product_is_composition(fl in flavor(), dims in (1usize..=3, 1usize..=3, 1usize..=3), seed in prop::collection::vec(0u8..3, 18)) {
        let (n, m, p) = dims;
        let entry = |x: u8| -> i8 { match fl { Flavor::B => (x % 2) as i8, Flavor::Finf => x as i8 - 1 } };
        let a = Matrix::from_fn(fl, m, n, |i, j| entry(seed[i * 3 + j])).unwrap();
        let b = Matrix::from_fn(fl, p, m, |i, j| entry(seed[9 + i * 3 + j])).unwrap();
        let composite = compose(&hom_of_matrix(&b).unwrap(), &hom_of_matrix(&a).unwrap()).unwrap();
        prop_assert_eq!(matrix_of_hom(&composite).unwrap(), b.mul(&a).unwrap());
        if fl == Flavor::B {
            prop_assert_eq!(b.mul(&a).unwrap().to_rows(), common::boolean_product(&b.to_rows(), &a.to_rows()));
        }
    }

    #[test]
    fn injections_and_split_injections_compose(i in any::<usize>(), j in any::<usize>()) {
        let opts = SearchOptions::default();
        let c3 = Arc::new(chain(3));
        let d2 = construct_dn(2).unwrap().module;
        let d3 = construct_dn(3).unwrap().module;
        let inj = HomConstraints::new().injective();
        let fs = enumerate_homs(&c3, &d2, &inj, opts).unwrap();
        let gs = enumerate_homs(&d2, &d3, &inj, opts).unwrap();
        prop_assume!(!fs.is_empty() && !gs.is_empty());
        let (f, g) = (&fs[i % fs.len()], &gs[j % gs.len()]);
        let gf = compose(g, f).unwrap();
        prop_assert!(gf.is_injective());
        if let (Some(wf), Some(wg)) = (find_left_inverse(f, opts).unwrap(), find_left_inverse(g, opts).unwrap()) {
            let w = compose(&wf, &wg).unwrap();
            prop_assert!(compose(&w, &gf).unwrap().is_identity());
            prop_assert!(gf.clone().with_left_inverse(w).is_ok());
        }
    }
}
