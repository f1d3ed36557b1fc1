//! Invariant checks shared by the property suite and the acceptance run.

#![allow(dead_code)]

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cf_forge::catalog::{fgsw, fgsw_split, heisenberg_rank_one};
use cf_forge::cf::{act, cylinder_measure, reduce, rn_cocycle, same_point, telescope, CFParams, CFPoint, ReductionSpec, Telescoping};
use cf_forge::measures::FinMeasure;
use cf_forge::odometers::{
    cross_sections, normal_cover, odometer_act, rank_one_cover, rank_one_odometer_params, CosetChain, NormalCover,
    OdometerSpec, RankOneCover,
};
use cf_forge::rational::{frac, one};
use cf_forge::verdict::default_threshold;
use cf_forge::{GroupElement, Q};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick<T: Clone>(r: &mut ChaCha8Rng, v: &[T]) -> T {
    v.choose(r).expect("nonempty").clone()
}

fn random_p(r: &mut ChaCha8Rng) -> Q {
    let q = r.gen_range(2..12);
    frac(r.gen_range(1..q), q)
}

/// `fgsw` or a random split variant.
fn random_z_params(r: &mut ChaCha8Rng) -> CFParams {
    if r.gen_bool(0.3) {
        fgsw()
    } else {
        fgsw_split(random_p(r)).unwrap()
    }
}

pub fn random_tail(r: &mut ChaCha8Rng, t: &CFParams, from: usize, to: usize) -> Vec<GroupElement> {
    (from + 1..=to).map(|k| pick(r, &t.kappa(k).unwrap().support_vec())).collect()
}

fn random_f(r: &mut ChaCha8Rng, t: &CFParams, n: usize) -> GroupElement {
    pick(r, &t.shape(n).unwrap().elements(1 << 16).unwrap())
}

/// A point with base `b ≤ n` whose coordinates beyond `n` are `common`.
fn point_over(r: &mut ChaCha8Rng, t: &CFParams, n: usize, common: &[GroupElement]) -> CFPoint {
    let b = r.gen_range(0..=n);
    let mut tail = random_tail(r, t, b, n);
    tail.extend(common.iter().cloned());
    CFPoint::new(t, b, random_f(r, t, b), tail).unwrap()
}

/// Random positive weights on the cross-sections of a random `ℤ` product chain.
fn random_odometer_params(r: &mut ChaCha8Rng) -> CFParams {
    let a: Vec<i64> = (0..4).map(|_| r.gen_range(2..5)).collect();
    let spec = OdometerSpec::z_product(&a).unwrap();
    let d = cross_sections(&spec, a.len()).unwrap().d;
    let kappas: Vec<FinMeasure> = d
        .iter()
        .map(|dn| {
            let w: Vec<i64> = dn.iter().map(|_| r.gen_range(1..6)).collect();
            let total: i64 = w.iter().sum();
            FinMeasure::new(dn.iter().cloned().zip(w.iter().map(|&x| frac(x, total)))).unwrap()
        })
        .collect();
    rank_one_odometer_params(&spec, &kappas).unwrap()
}

fn heis() -> &'static CFParams {
    static T: OnceLock<CFParams> = OnceLock::new();
    T.get_or_init(heisenberg_rank_one)
}

fn dyadic_cover() -> &'static (OdometerSpec, RankOneCover) {
    static C: OnceLock<(OdometerSpec, RankOneCover)> = OnceLock::new();
    C.get_or_init(|| {
        let spec = OdometerSpec::z_product(&[2; 6]).unwrap();
        let rc = rank_one_cover(&spec, 3).unwrap();
        (spec, rc)
    })
}

fn heis_cover() -> &'static (OdometerSpec, RankOneCover) {
    static C: OnceLock<(OdometerSpec, RankOneCover)> = OnceLock::new();
    C.get_or_init(|| {
        let spec = OdometerSpec::heis_diagonal(4).unwrap();
        let rc = rank_one_cover(&spec, 2).unwrap();
        (spec, rc)
    })
}

fn nonnormal_cover() -> &'static (OdometerSpec, NormalCover) {
    static C: OnceLock<(OdometerSpec, NormalCover)> = OnceLock::new();
    C.get_or_init(|| {
        let spec = OdometerSpec::heis_nonnormal(4).unwrap();
        let nc = normal_cover(&spec, 3).unwrap();
        (spec, nc)
    })
}

fn random_heis(r: &mut ChaCha8Rng, bound: i64) -> GroupElement {
    GroupElement::Heis([r.gen_range(-bound..=bound), r.gen_range(-bound..=bound), r.gen_range(-bound..=bound)])
}

pub fn rn_chain_rule(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = random_z_params(r);
    let n = r.gen_range(0..=3);
    let k = r.gen_range(0..=2);
    let common = random_tail(r, &t, n, n + k);
    let (x, y, z) = (point_over(r, &t, n, &common), point_over(r, &t, n, &common), point_over(r, &t, n, &common));
    let xz = rn_cocycle(&t, &x, &z).unwrap();
    prop_assert_eq!(xz, rn_cocycle(&t, &x, &y).unwrap() * rn_cocycle(&t, &y, &z).unwrap());
    prop_assert_eq!(rn_cocycle(&t, &x, &x).unwrap(), one());
    Ok(())
}

pub fn identity_cylinder_ratio(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = match r.gen_range(0..3) {
        0 => random_z_params(r),
        1 => random_odometer_params(r),
        _ => heis().clone(),
    };
    let n = r.gen_range(0..3);
    let id = t.group().identity();
    let ratio = cylinder_measure(&t, &id, n).unwrap() / cylinder_measure(&t, &id, n + 1).unwrap();
    prop_assert_eq!(ratio, one() / t.kappa(n + 1).unwrap().weight(&id));
    Ok(())
}

pub fn telescoping_preserves_cylinders(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = random_z_params(r);
    let mut l = vec![0usize];
    for _ in 0..3 {
        l.push(l.last().unwrap() + r.gen_range(1..=2));
    }
    let tl = telescope(&t, &Telescoping::Explicit(l.clone())).unwrap();
    let n = r.gen_range(0..=3);
    let f = random_f(r, &t, l[n]);
    prop_assert_eq!(cylinder_measure(&tl.params, &f, n).unwrap(), cylinder_measure(&t, &f, l[n]).unwrap());
    if n < 3 {
        prop_assert_eq!(tl.params.kappa(n + 1).unwrap().total(), one());
    }
    // the image point carries the same cylinder measure at every level it reaches
    let x = CFPoint::new(&t, 0, GroupElement::Int(0), random_tail(r, &t, 0, l[3])).unwrap();
    let y = tl.iota(&x).unwrap();
    prop_assert_eq!(y.horizon(), 3);
    for k in 0..=3 {
        let yk = y.rebase(&tl.params, k).unwrap();
        let xk = x.rebase(&t, l[k]).unwrap();
        prop_assert_eq!(&yk.f, &xk.f);
        prop_assert_eq!(cylinder_measure(&tl.params, &yk.f, k).unwrap(), cylinder_measure(&t, &xk.f, l[k]).unwrap());
    }
    Ok(())
}

pub fn telescoping_composition(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = random_z_params(r);
    let mut l = vec![0usize];
    for _ in 0..4 {
        l.push(l.last().unwrap() + r.gen_range(1..=2));
    }
    let m = if r.gen_bool(0.5) { Telescoping::Explicit(vec![0, r.gen_range(1..=2), 3, 4]) } else { Telescoping::Linear(2) };
    let lt = Telescoping::Explicit(l.clone());
    let tl = telescope(&t, &lt).unwrap();
    let tlm = telescope(&tl.params, &m).unwrap();
    let composed = telescope(&t, &lt.compose(&m)).unwrap();
    let x = CFPoint::new(&t, 0, GroupElement::Int(0), random_tail(r, &t, 0, l[4])).unwrap();
    let a = tlm.iota(&tl.iota(&x).unwrap()).unwrap();
    let b = composed.iota(&x).unwrap();
    prop_assert_eq!(&a, &b);
    for k in 0..=a.horizon() {
        let f = a.rebase(&tlm.params, k).unwrap().f;
        prop_assert_eq!(cylinder_measure(&tlm.params, &f, k).unwrap(), cylinder_measure(&composed.params, &f, k).unwrap());
    }
    Ok(())
}

pub fn reduction_scaling(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = random_z_params(r);
    let depth = r.gen_range(1..=3);
    let mut sets = Vec::new();
    let mut expected = one();
    for n in 1..=depth {
        let kappa = t.kappa(n).unwrap();
        let mut a: Vec<GroupElement> = kappa.support().filter(|c| **c != GroupElement::Int(0) && r.gen_bool(0.5)).cloned().collect();
        a.push(GroupElement::Int(0));
        expected *= kappa.mass(|c| a.contains(c));
        sets.push(a);
    }
    let red = reduce(&t, &ReductionSpec::Prefix(sets), depth, &default_threshold(), &frac(10, 1)).unwrap();
    prop_assert_eq!(red.scaling(depth).unwrap(), expected.clone());
    let f = random_f(r, &t, depth);
    prop_assert!(red.scaling_holds(depth, &f).unwrap());
    prop_assert_eq!(t.nu(depth, &f).unwrap(), expected * red.params.nu(depth, &f).unwrap());
    for n in 1..=depth {
        prop_assert_eq!(red.params.kappa(n).unwrap().total(), one());
    }
    Ok(())
}

pub fn act_group_law_on_integers(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = random_z_params(r);
    let x = CFPoint::new(&t, 0, GroupElement::Int(0), random_tail(r, &t, 0, 4)).unwrap();
    let (g, h) = (r.gen_range(-30i64..=30), r.gen_range(-30i64..=30));
    let step = act(&t, &GroupElement::Int(h), &x).unwrap();
    let direct = act(&t, &GroupElement::Int(g + h), &x).unwrap();
    if let (Some(hx), Some(ghx)) = (&step, &direct) {
        if let Some(two) = act(&t, &GroupElement::Int(g), hx).unwrap() {
            prop_assert!(same_point(&t, &two, ghx).unwrap());
        }
        let back = act(&t, &GroupElement::Int(-h), hx).unwrap().expect("inverse is realized");
        prop_assert!(same_point(&t, &back, &x).unwrap());
    }
    Ok(())
}

pub fn act_group_law_on_heisenberg(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let t = heis();
    let ctx = t.group();
    let x = CFPoint::new(t, 0, ctx.identity(), random_tail(r, t, 0, 3)).unwrap();
    let gens = ctx.symmetric_generators();
    let (g, h) = (pick(r, &gens), pick(r, &gens));
    if let (Some(hx), Some(ghx)) = (act(t, &h, &x).unwrap(), act(t, &ctx.mul(&g, &h), &x).unwrap()) {
        if let Some(two) = act(t, &g, &hx).unwrap() {
            prop_assert!(same_point(t, &two, &ghx).unwrap());
        }
    }
    Ok(())
}

pub fn convolution_mass_is_multiplicative(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let ctx = heis().group();
    let random_measure = |r: &mut ChaCha8Rng| {
        let k = r.gen_range(1..6);
        FinMeasure::new((0..k).map(|_| (random_heis(r, 3), frac(r.gen_range(1..20), r.gen_range(1..9))))).unwrap()
    };
    let (a, b) = (random_measure(r), random_measure(r));
    let ab = a.convolve(ctx, &b).unwrap();
    prop_assert_eq!(ab.total(), a.total() * b.total());
    prop_assert!(ab.len() <= a.len() * b.len());
    Ok(())
}

pub fn odometer_action_is_a_group_action(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let spec = if r.gen_bool(0.5) { &dyadic_cover().0 } else { &nonnormal_cover().0 };
    let ctx = spec.group();
    let random_element = |r: &mut ChaCha8Rng| match ctx.identity() {
        GroupElement::Int(_) => GroupElement::Int(r.gen_range(-100..=100)),
        _ => random_heis(r, 9),
    };
    let levels = 4;
    let y = odometer_act(spec, &random_element(r), &CosetChain::identity(spec, levels)).unwrap();
    let (g, h) = (random_element(r), random_element(r));
    let two = odometer_act(spec, &g, &odometer_act(spec, &h, &y).unwrap()).unwrap();
    let one_step = odometer_act(spec, &ctx.mul(&g, &h), &y).unwrap();
    prop_assert!(two.same(&one_step, spec).unwrap());
    let id = odometer_act(spec, &ctx.identity(), &y).unwrap();
    prop_assert!(id.same(&y, spec).unwrap());
    Ok(())
}

pub fn cover_lift_projects_back(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let (spec, nc) = nonnormal_cover();
    let levels = r.gen_range(1..=3);
    let y = odometer_act(spec, &random_heis(r, 12), &CosetChain::identity(spec, levels)).unwrap();
    let z = nc.lift(&y);
    prop_assert!(z.check(&nc.cover).is_ok());
    prop_assert!(nc.project(spec, &z).unwrap().same(&y, spec).unwrap());
    Ok(())
}

pub fn tau_is_equivariant(seed: u64) -> Result<(), TestCaseError> {
    let r = &mut rng(seed);
    let (spec, rc) = if r.gen_bool(0.5) { dyadic_cover() } else { heis_cover() };
    let t = &rc.params;
    let ctx = spec.group();
    let levels = rc.stages();
    let x = CFPoint::new(t, 0, ctx.identity(), random_tail(r, t, 0, levels)).unwrap();
    let g = pick(r, &ctx.symmetric_generators());
    if let Some(gx) = act(t, &g, &x).unwrap() {
        let lhs = rc.tau_point(spec, &gx, levels);
        let rhs = odometer_act(spec, &g, &rc.tau_point(spec, &x, levels)).unwrap();
        prop_assert!(lhs.same(&rhs, spec).unwrap());
    }
    Ok(())
}

/// Every check with its name, in a fixed order.
pub const ALL: [(&str, fn(u64) -> Result<(), TestCaseError>); 11] = [
    ("rn_chain_rule", rn_chain_rule),
    ("identity_cylinder_ratio", identity_cylinder_ratio),
    ("telescoping_preserves_cylinders", telescoping_preserves_cylinders),
    ("telescoping_composition", telescoping_composition),
    ("reduction_scaling", reduction_scaling),
    ("act_group_law_on_integers", act_group_law_on_integers),
    ("act_group_law_on_heisenberg", act_group_law_on_heisenberg),
    ("convolution_mass_is_multiplicative", convolution_mass_is_multiplicative),
    ("odometer_action_is_a_group_action", odometer_action_is_a_group_action),
    ("cover_lift_projects_back", cover_lift_projects_back),
    ("tau_is_equivariant", tau_is_equivariant),
];
