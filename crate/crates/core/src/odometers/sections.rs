use std::collections::{HashMap, HashSet, VecDeque};

use serde_json::{json, Value};

use super::OdometerSpec;
use crate::cf::{CFParams, NuRule, Shape};
use crate::error::{Error, Result};
use crate::groups::{product_set, CofiniteSubgroup, CosetKey, GroupElement, DEFAULT_COSET_CAP};
use crate::measures::FinMeasure;

/// `D_1, …, D_N` with the exhaustive checks on `ω_n`.
#[derive(Clone, Debug)]
pub struct CrossSections {
    pub d: Vec<Vec<GroupElement>>,
    /// `ω_n : G/Γ_n → D_1⋯D_n` is a bijection, per `n`.
    pub omega_bijective: Vec<bool>,
    /// `d_1⋯d_{n+1}Γ_n = d_1⋯d_nΓ_n` on every level-`(n+1)` tuple, per `n < N`.
    pub square_commutes: Vec<bool>,
}

impl CrossSections {
    pub fn certified(&self) -> bool {
        self.omega_bijective.iter().all(|&b| b) && self.square_commutes.iter().all(|&b| b)
    }

    /// Uniform measures on the `D_n`.
    pub fn uniform_kappas(&self) -> Vec<FinMeasure> {
        self.d.iter().map(|d| FinMeasure::uniform(d.iter().cloned())).collect()
    }

    pub fn to_json(&self, spec: &OdometerSpec) -> Value {
        let ctx = spec.group();
        json!({
            "D": self.d.iter().map(|d| d.iter().map(|g| ctx.element_to_json(g)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "omega_bijective": self.omega_bijective,
            "square_commutes": self.square_commutes,
            "certified": self.certified(),
        })
    }
}

/// Representatives of the `sub`-cosets inside `sup`, one per coset, in BFS
/// order over the generators of `sup`; the identity comes first.
pub(crate) fn relative_transversal(
    spec: &OdometerSpec,
    sup: &CofiniteSubgroup,
    sub: &CofiniteSubgroup,
) -> Result<Vec<GroupElement>> {
    let ctx = spec.group();
    let want = (sub.index() / sup.index()) as usize;
    let Some(gens) = sup.generators() else {
        let reps = coset_reps(sub)?;
        return Ok(reps.into_iter().filter(|r| sup.member(r)).collect());
    };
    let mut steps: Vec<GroupElement> = Vec::new();
    for g in gens.iter().cloned().chain(gens.iter().map(|g| ctx.inv(g))) {
        if !ctx.is_identity(&g) && !steps.contains(&g) {
            steps.push(g);
        }
    }
    let id = ctx.identity();
    let mut keys: HashSet<CosetKey> = HashSet::from([sub.key(&id)]);
    let mut out = vec![id.clone()];
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while out.len() < want {
        let Some(x) = queue.pop_front() else { break };
        for s in &steps {
            let y = ctx.mul(s, &x);
            if seen.insert(y.clone()) {
                if seen.len() > DEFAULT_COSET_CAP {
                    return Err(Error::Resource(format!("cross-section search exceeded {DEFAULT_COSET_CAP} elements")));
                }
                if keys.insert(sub.key(&y)) {
                    out.push(y.clone());
                }
                queue.push_back(y);
            }
        }
    }
    if out.len() != want {
        return Err(Error::Validation(format!("found {} of {want} cosets", out.len())));
    }
    Ok(out)
}

fn coset_reps(gamma: &CofiniteSubgroup) -> Result<Vec<GroupElement>> {
    Ok(crate::groups::coset_table(gamma, DEFAULT_COSET_CAP)?.transversal().to_vec())
}

/// Products `d_1⋯d_n` over all tuples, in lexicographic tuple order.
pub(crate) fn tuple_products(spec: &OdometerSpec, d: &[Vec<GroupElement>], cap: usize) -> Result<Vec<GroupElement>> {
    let ctx = spec.group();
    let size = d.iter().try_fold(1usize, |acc, x| acc.checked_mul(x.len())).unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::Resource(format!("{size} tuples exceed the cap {cap}")));
    }
    let mut out = vec![ctx.identity()];
    for dk in d {
        out = out.iter().flat_map(|p| dk.iter().map(move |c| ctx.mul(p, c))).collect();
    }
    Ok(out)
}

/// BFS-least cross-sections `D_n ⊂ Γ_{n−1}` for `n ≤ N`, with `ω_n`
/// bijectivity and the commuting square checked on every tuple.
pub fn cross_sections(spec: &OdometerSpec, n_max: usize) -> Result<CrossSections> {
    let mut d = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        d.push(relative_transversal(spec, spec.level(n - 1)?, spec.level(n)?)?);
    }
    let ctx = spec.group();
    let mut omega_bijective = Vec::with_capacity(n_max);
    let mut square_commutes = Vec::with_capacity(n_max.saturating_sub(1));
    for n in 1..=n_max {
        let gamma = spec.level(n)?;
        let prods = tuple_products(spec, &d[..n], DEFAULT_COSET_CAP)?;
        let keys: HashSet<CosetKey> = prods.iter().map(|p| gamma.key(p)).collect();
        omega_bijective.push(keys.len() == prods.len() && prods.len() as u64 == gamma.index());
        if n < n_max {
            let next = tuple_products(spec, &d[..=n], DEFAULT_COSET_CAP)?;
            let per = d[n].len();
            let ok = next
                .iter()
                .enumerate()
                .all(|(i, q)| gamma.member(&ctx.mul(&ctx.inv(&prods[i / per]), q)));
            square_commutes.push(ok);
        }
    }
    Ok(CrossSections { d, omega_bijective, square_commutes })
}

/// Parameters with `C_n = D_n`, `F_n = D_1⋯D_n` and `ν_n = κ_1*⋯*κ_n`.
pub fn rank_one_odometer_params(spec: &OdometerSpec, kappas: &[FinMeasure]) -> Result<CFParams> {
    let ctx = spec.group();
    let sections = cross_sections(spec, kappas.len())?;
    let mut shapes = vec![Shape::singleton(ctx)];
    let mut nus = vec![NuRule::Point];
    let mut f = vec![ctx.identity()];
    let mut nu = FinMeasure::dirac(ctx.identity());
    for (i, (k, d)) in kappas.iter().zip(&sections.d).enumerate() {
        let n = i + 1;
        k.check_ambient(ctx)?;
        let supp: HashSet<&GroupElement> = k.support().collect();
        if supp != d.iter().collect::<HashSet<_>>() {
            return Err(Error::NotInSet(format!("supp kappa_{n} differs from D_{n}")));
        }
        let (next, distinct) = product_set(ctx, &f, d);
        if !distinct {
            return Err(Error::Validation(format!("translates F_{}c, c in D_{n}, overlap", n - 1)));
        }
        f = next;
        nu = nu.convolve(ctx, k)?;
        shapes.push(Shape::explicit(f.iter().cloned()));
        nus.push(NuRule::Table(nu.clone()));
    }
    CFParams::explicit(ctx.clone(), kappas.to_vec(), shapes, nus)
}

/// Which `D_1⋯D_n` tuple each coset of `G/Γ_n` comes from.
#[allow(dead_code)]
pub(crate) fn omega_table(spec: &OdometerSpec, d: &[Vec<GroupElement>]) -> Result<HashMap<CosetKey, usize>> {
    let gamma = spec.level(d.len())?;
    let prods = tuple_products(spec, d, DEFAULT_COSET_CAP)?;
    Ok(prods.iter().enumerate().map(|(i, p)| (gamma.key(p), i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::validate_params;
    use crate::rational::{frac, Q};
    use crate::verdict::default_threshold;
    use GroupElement::*;

    #[test]
    fn dyadic_sections() {
        let spec = OdometerSpec::z_product(&[2, 2, 2, 2]).unwrap();
        let s = cross_sections(&spec, 4).unwrap();
        assert!(s.certified());
        for (i, d) in s.d.iter().enumerate() {
            assert_eq!(d, &vec![Int(0), Int(1 << i)]);
        }
        let t = rank_one_odometer_params(&spec, &s.uniform_kappas()).unwrap();
        let mut f = t.shape(4).unwrap().elements(100).unwrap();
        f.sort();
        assert_eq!(f, (0..16).map(Int).collect::<Vec<_>>());
        assert!(validate_params(&t, 4, &default_threshold()).unwrap().passed());
    }

    #[test]
    fn biased_kappa_and_mismatch() {
        let spec = OdometerSpec::z_product(&[2, 3]).unwrap();
        let k1 = FinMeasure::new([(Int(0), frac(1, 3)), (Int(1), frac(2, 3))]).unwrap();
        let k2 = FinMeasure::uniform([Int(0), Int(2), Int(-2)]);
        let t = rank_one_odometer_params(&spec, &[k1.clone(), k2]).unwrap();
        assert_eq!(t.nu(2, &Int(-1)).unwrap(), frac(2, 9));
        assert_eq!(t.nu_total(2).unwrap(), Q::from_integer(1.into()));
        assert!(validate_params(&t, 2, &default_threshold()).unwrap().passed());
        let bad = FinMeasure::uniform([Int(0), Int(4), Int(2)]);
        assert!(rank_one_odometer_params(&spec, &[k1, bad]).is_err());
    }

    #[test]
    fn heisenberg_sections() {
        let spec = OdometerSpec::heis_diagonal(3).unwrap();
        let s = cross_sections(&spec, 3).unwrap();
        assert!(s.certified());
        assert!(s.d.iter().all(|d| d.len() == 8));
        assert_eq!(s.d[0][0], Heis([0, 0, 0]));
        let nn = OdometerSpec::heis_nonnormal(3).unwrap();
        let s = cross_sections(&nn, 3).unwrap();
        assert!(s.certified());
        assert_eq!(s.d.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 8, 8]);
    }

    #[test]
    fn omega_matches_bruteforce_on_ball() {
        // independent oracle: every element of a ball lands in exactly the
        // tuple whose product shares its coset
        let spec = OdometerSpec::heis_nonnormal(2).unwrap();
        let s = cross_sections(&spec, 2).unwrap();
        let table = omega_table(&spec, &s.d).unwrap();
        let prods = tuple_products(&spec, &s.d, 1 << 10).unwrap();
        let ctx = spec.group();
        let g2 = spec.level(2).unwrap();
        for g in ctx.ball(3) {
            let i = table[&g2.key(&g)];
            assert!(g2.member(&ctx.mul(&ctx.inv(&prods[i]), &g)));
            let hits = prods.iter().filter(|p| g2.member(&ctx.mul(&ctx.inv(p), &g))).count();
            assert_eq!(hits, 1);
        }
    }
}
