use std::collections::{BTreeMap, HashSet};

use serde_json::{json, Value};

use super::{CosetChain, OdometerSpec};
use crate::cf::{telescope, CFParams, CFPoint, Telescoping, ENUM_CAP};
use crate::error::{Error, Result};
use crate::groups::{CosetKey, GroupElement};
use crate::rational::{self, Q};
use crate::verdict::{Verdict, VerdictTag};

/// Terms `κ_n({c ∈ C_n : c ∉ g_nΓ_ng_n⁻¹})` for `n = 1..=depth`, for the
/// parameters themselves or their telescoping by `l`.
pub fn odometer_compatibility(
    t: &CFParams,
    spec: &OdometerSpec,
    y: &CosetChain,
    depth: usize,
    threshold: &Q,
    telescoping: Option<&Telescoping>,
) -> Result<Verdict> {
    y.check(spec)?;
    if y.len() < depth {
        return Err(Error::Usage(format!("chain point has {} levels, need {depth}", y.len())));
    }
    let params = match telescoping {
        Some(l) => telescope(t, l)?.params,
        None => t.clone(),
    };
    let ctx = spec.group();
    let mut terms = Vec::with_capacity(depth);
    for n in 1..=depth {
        let gamma = spec.level(n)?;
        let g = &y.reps[n - 1];
        let gi = ctx.inv(g);
        let kappa = params.kappa(n)?;
        terms.push(kappa.mass(|c| !gamma.member(&ctx.mul(&gi, &ctx.mul(c, g)))));
    }
    Ok(Verdict::for_series(1, terms, threshold))
}

/// Result of the `(T, y)`-factor map on a truncated point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorMapOutcome {
    Chain(CosetChain),
    Unstabilized { level: usize },
}

#[derive(Clone, Debug)]
pub struct OdometerMapValue {
    pub outcome: FactorMapOutcome,
    /// Stage from which each level's coset stays fixed.
    pub stabilized_at: Vec<Option<usize>>,
}

impl OdometerMapValue {
    pub fn to_json(&self, spec: &OdometerSpec) -> Value {
        let ctx = spec.group();
        match &self.outcome {
            FactorMapOutcome::Chain(c) => json!({"chain": c.to_json(ctx), "stabilized_at": self.stabilized_at}),
            FactorMapOutcome::Unstabilized { level } => {
                json!({"unstabilized": level, "stabilized_at": self.stabilized_at})
            }
        }
    }
}

/// `π(x)_k = lim_m f_nc_{n+1}⋯c_m g_kΓ_k` for `k = 1..=levels`. A level counts
/// as stabilized when its coset is constant over the last `window` known stages.
pub fn odometer_factor_map(
    t: &CFParams,
    spec: &OdometerSpec,
    y: &CosetChain,
    x: &CFPoint,
    levels: usize,
    window: usize,
) -> Result<OdometerMapValue> {
    y.check(spec)?;
    if y.len() < levels {
        return Err(Error::Usage(format!("chain point has {} levels, need {levels}", y.len())));
    }
    if t.group().name() != spec.group().name() {
        return Err(Error::GroupMismatch { expected: spec.group().name(), found: t.group().name() });
    }
    let ctx = spec.group();
    let mut prefixes = vec![x.f.clone()];
    for c in &x.tail {
        let next = ctx.mul(prefixes.last().expect("nonempty"), c);
        prefixes.push(next);
    }
    let mut reps = Vec::with_capacity(levels);
    let mut stabilized_at = Vec::with_capacity(levels);
    let mut failed = None;
    for k in 1..=levels {
        let gamma = spec.level(k)?;
        let g = &y.reps[k - 1];
        let keys: Vec<CosetKey> = prefixes.iter().map(|w| gamma.key(&ctx.mul(w, g))).collect();
        let last = keys.last().expect("nonempty");
        let run_start = keys.iter().rposition(|q| q != last).map_or(0, |p| p + 1);
        if keys.len() - 1 - run_start >= window {
            stabilized_at.push(Some(x.base + run_start));
            reps.push(ctx.mul(prefixes.last().expect("nonempty"), g));
        } else {
            stabilized_at.push(None);
            failed.get_or_insert(k);
        }
    }
    let outcome = match failed {
        Some(level) => FactorMapOutcome::Unstabilized { level },
        None => {
            let chain = CosetChain { reps };
            chain.check(spec)?;
            FactorMapOutcome::Chain(chain)
        }
    };
    Ok(OdometerMapValue { outcome, stabilized_at })
}

/// One `(l, m)` probe of the symmetric-difference test.
#[derive(Clone, Debug)]
pub struct IsoProbe {
    pub l: usize,
    pub m: usize,
    /// Minimum over all `D_l` of `ν_m(C_{n+1}⋯C_m △ {f : fg_lΓ_l ∈ D_l})`.
    pub optimal: Q,
    /// The same quantity for the `D_l` that is optimal at `m_max`.
    pub with_final: Q,
}

#[derive(Clone, Debug)]
pub enum IsoOutcome {
    /// Some `l` keeps the difference below `ε` from stage `from` through `m_max`.
    Passes { l: usize, from: usize },
    /// No `l` does; `envelope` is the least optimal difference over the
    /// tail probes `m ≥ l`.
    Obstructed { envelope: Q },
    /// Nothing was probed.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct IsoCheck {
    pub n: usize,
    pub epsilon: Q,
    pub outcome: IsoOutcome,
    pub probes: Vec<IsoProbe>,
}

impl IsoCheck {
    /// Least optimal difference over the probes with `m ≥ l`. For `m < l` the
    /// level-`l` cosets can split `F_m` arbitrarily finely, so those probes say
    /// nothing about large `m`.
    pub fn envelope(&self) -> Option<Q> {
        tail_envelope(&self.probes)
    }

    /// Least optimal difference over every probe, including `m < l`.
    pub fn all_probe_min(&self) -> Option<Q> {
        self.probes.iter().map(|p| p.optimal.clone()).min()
    }

    pub fn to_json(&self) -> Value {
        let outcome = match &self.outcome {
            IsoOutcome::Passes { l, from } => json!({"passes": {"l": l, "from": from}}),
            IsoOutcome::Obstructed { envelope } => json!({"obstructed": {"envelope": rational::to_string(envelope)}}),
            IsoOutcome::Inconclusive => json!("inconclusive"),
        };
        json!({
            "n": self.n,
            "epsilon": rational::to_string(&self.epsilon),
            "outcome": outcome,
            "all_probe_min": self.all_probe_min().as_ref().map(rational::to_string),
            "probes": self.probes.iter().map(|p| json!({
                "l": p.l,
                "m": p.m,
                "optimal": rational::to_string(&p.optimal),
                "with_final": rational::to_string(&p.with_final),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Per-coset masses `(A_j, B_j)`: `ν_m` on `C_{n+1}⋯C_m` and on the rest of `F_m`,
/// split by the coset of `fg_l` in `G/Γ_l`.
pub(crate) fn coset_masses(
    t: &CFParams,
    spec: &OdometerSpec,
    y: &CosetChain,
    n: usize,
    l: usize,
    m: usize,
    block: &HashSet<GroupElement>,
    f_m: &[(GroupElement, Q)],
) -> Result<BTreeMap<CosetKey, (Q, Q)>> {
    let ctx = t.group();
    let gamma = spec.level(l)?;
    let g = if l == 0 { ctx.identity() } else { y.reps[l - 1].clone() };
    let _ = (n, m);
    let mut out: BTreeMap<CosetKey, (Q, Q)> = BTreeMap::new();
    for (f, w) in f_m {
        let e = out.entry(gamma.key(&ctx.mul(f, &g))).or_default();
        if block.contains(f) {
            e.0 += w;
        } else {
            e.1 += w;
        }
    }
    Ok(out)
}

fn block_products(t: &CFParams, n: usize, m: usize) -> Result<HashSet<GroupElement>> {
    let ctx = t.group();
    let mut p = vec![ctx.identity()];
    for k in n + 1..=m {
        let c = t.kappa(k)?.support_vec();
        if p.len() * c.len() > ENUM_CAP {
            return Err(Error::Resource(format!("C_{}⋯C_{m} exceeds {ENUM_CAP} elements", n + 1)));
        }
        p = p.iter().flat_map(|a| c.iter().map(move |b| ctx.mul(a, b))).collect();
    }
    Ok(p.into_iter().collect())
}

fn weighted_shape(t: &CFParams, m: usize) -> Result<Vec<(GroupElement, Q)>> {
    let elems = t.shape(m)?.elements(ENUM_CAP)?;
    match t.uniform_weight(m)? {
        Some(w) => Ok(elems.into_iter().map(|f| (f, w.clone())).collect()),
        None => elems.into_iter().map(|f| Ok((f.clone(), t.nu(m, &f)?))).collect(),
    }
}

/// Probes `l = 1..=l_max` and `m = n+1..=m_max` with the per-coset optimal
/// `D_l` (a coset is kept when `A_j ≥ B_j`).
pub fn isomorphism_check(
    t: &CFParams,
    spec: &OdometerSpec,
    y: &CosetChain,
    n: usize,
    epsilon: &Q,
    l_max: usize,
    m_max: usize,
) -> Result<IsoCheck> {
    y.check(spec)?;
    if y.len() < l_max {
        return Err(Error::Usage(format!("chain point has {} levels, need {l_max}", y.len())));
    }
    let ms: Vec<usize> = (n + 1..=m_max).collect();
    if l_max == 0 || ms.is_empty() {
        return Ok(IsoCheck { n, epsilon: epsilon.clone(), outcome: IsoOutcome::Inconclusive, probes: Vec::new() });
    }
    // masses[l-1][i] for m = ms[i]
    let mut masses: Vec<Vec<BTreeMap<CosetKey, (Q, Q)>>> = vec![Vec::new(); l_max];
    for &m in &ms {
        let block = block_products(t, n, m)?;
        let f_m = weighted_shape(t, m)?;
        for l in 1..=l_max {
            masses[l - 1].push(coset_masses(t, spec, y, n, l, m, &block, &f_m)?);
        }
    }
    let mut probes = Vec::new();
    let mut pass = None;
    for l in 1..=l_max {
        let last = masses[l - 1].last().expect("nonempty");
        let keep: HashSet<&CosetKey> = last.iter().filter(|(_, (a, b))| a >= b).map(|(k, _)| k).collect();
        let mut diffs = Vec::with_capacity(ms.len());
        for (i, &m) in ms.iter().enumerate() {
            let table = &masses[l - 1][i];
            let optimal = table.values().map(|(a, b)| a.min(b).clone()).sum::<Q>();
            let with_final = table
                .iter()
                .map(|(k, (a, b))| if keep.contains(k) { b.clone() } else { a.clone() })
                .sum::<Q>();
            diffs.push(with_final.clone());
            probes.push(IsoProbe { l, m, optimal, with_final });
        }
        if pass.is_none() {
            let tail_ok = diffs.iter().rposition(|d| d >= epsilon).map_or(0, |p| p + 1);
            if tail_ok < ms.len() {
                pass = Some(IsoOutcome::Passes { l, from: ms[tail_ok] });
            }
        }
    }
    let outcome = match (pass, tail_envelope(&probes)) {
        (Some(p), _) => p,
        (None, Some(envelope)) => IsoOutcome::Obstructed { envelope },
        (None, None) => IsoOutcome::Inconclusive,
    };
    Ok(IsoCheck { n, epsilon: epsilon.clone(), outcome, probes })
}

fn tail_envelope(probes: &[IsoProbe]) -> Option<Q> {
    probes.iter().filter(|p| p.m >= p.l).map(|p| p.optimal.clone()).min()
}

impl IsoOutcome {
    pub fn tag(&self) -> VerdictTag {
        match self {
            IsoOutcome::Passes { .. } => VerdictTag::ConvergentIndicated,
            IsoOutcome::Obstructed { .. } => VerdictTag::DivergentIndicated,
            IsoOutcome::Inconclusive => VerdictTag::Inconclusive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::tests::small_params;
    use crate::cf::act;
    use crate::odometers::{cross_sections, odometer_act, rank_one_odometer_params};
    use crate::verdict::default_threshold;
    use GroupElement::*;

    #[test]
    fn compatibility_terms_and_telescoping() {
        let t = small_params();
        let spec = OdometerSpec::z_product(&[2, 2]).unwrap();
        let y = CosetChain::identity(&spec, 2);
        let v = odometer_compatibility(&t, &spec, &y, 2, &default_threshold(), None).unwrap();
        // κ_1 outside 2ℤ: {1, 5}; κ_2 outside 4ℤ: 6 and 22
        assert_eq!(v.terms, vec![rational::frac(1, 2), rational::frac(3, 8)]);
        assert!(CosetChain::from_json(&spec, &json!([1, 2])).is_err());
        let l = Telescoping::Explicit(vec![0, 2]);
        let v = odometer_compatibility(&t, &spec, &y, 1, &default_threshold(), Some(&l)).unwrap();
        assert_eq!(v.terms.len(), 1);
    }

    #[test]
    fn factor_map_of_dyadic_params() {
        let spec = OdometerSpec::z_product(&[2; 6]).unwrap();
        let s = cross_sections(&spec, 6).unwrap();
        let t = rank_one_odometer_params(&spec, &s.uniform_kappas()).unwrap();
        let y = CosetChain::identity(&spec, 6);
        let x = CFPoint::new(&t, 0, Int(0), vec![Int(1), Int(0), Int(4), Int(0), Int(0), Int(0)]).unwrap();
        let v = odometer_factor_map(&t, &spec, &y, &x, 3, 2).unwrap();
        let FactorMapOutcome::Chain(c) = &v.outcome else { panic!("{v:?}") };
        assert!(c.same(&CosetChain::of_element(&Int(5), 3), &spec).unwrap());
        let gx = act(&t, &Int(3), &x).unwrap().unwrap();
        let w = odometer_factor_map(&t, &spec, &y, &gx, 3, 2).unwrap();
        let FactorMapOutcome::Chain(d) = &w.outcome else { panic!() };
        assert!(d.same(&odometer_act(&spec, &Int(3), c).unwrap(), &spec).unwrap());
        let short = CFPoint::new(&t, 0, Int(0), vec![Int(1)]).unwrap();
        assert_eq!(
            odometer_factor_map(&t, &spec, &y, &short, 3, 2).unwrap().outcome,
            FactorMapOutcome::Unstabilized { level: 1 }
        );
    }

    #[test]
    fn own_chain_has_zero_difference() {
        let spec = OdometerSpec::z_product(&[2; 6]).unwrap();
        let s = cross_sections(&spec, 6).unwrap();
        let t = rank_one_odometer_params(&spec, &s.uniform_kappas()).unwrap();
        let y = CosetChain::identity(&spec, 6);
        let r = isomorphism_check(&t, &spec, &y, 2, &rational::frac(1, 4), 5, 6).unwrap();
        for p in r.probes.iter().filter(|p| p.l >= 2) {
            assert_eq!(p.optimal, Q::default(), "l={} m={}", p.l, p.m);
        }
        assert!(matches!(r.outcome, IsoOutcome::Passes { .. }));
        let none = isomorphism_check(&t, &spec, &y, 2, &rational::frac(1, 4), 0, 6).unwrap();
        assert!(matches!(none.outcome, IsoOutcome::Inconclusive));
    }

    #[test]
    fn optimal_rule_matches_exhaustive_subsets() {
        // oracle: minimize over every subset D of G/Γ_l directly on the elements
        let t = small_params();
        let spec = OdometerSpec::z_product(&[2, 2, 2]).unwrap();
        let y = CosetChain::of_element(&Int(1), 3);
        let r = isomorphism_check(&t, &spec, &y, 1, &rational::frac(1, 4), 3, 2).unwrap();
        for p in &r.probes {
            let modulus = 1i64 << p.l;
            let block: Vec<i64> = t.kappa(2).unwrap().support().map(|c| c.as_int().unwrap()).collect();
            let mut best: Option<Q> = None;
            for mask in 0u32..(1 << modulus) {
                let mut d = Q::default();
                for f in 0..28i64 {
                    let w = t.nu(2, &Int(f)).unwrap();
                    let in_d = mask >> (f + 1).rem_euclid(modulus) & 1 == 1;
                    if block.contains(&f) != in_d {
                        d += w;
                    }
                }
                best = Some(best.map_or(d.clone(), |b| b.min(d)));
            }
            assert_eq!(best.unwrap(), p.optimal, "l={}", p.l);
        }
    }
}
