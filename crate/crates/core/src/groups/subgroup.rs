use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde_json::{json, Value};

use super::lattice::Echelon;
use super::{coset_table, tree, GroupCtx, GroupElement, GroupKind};
use crate::error::{Error, Result};

/// Canonical label of a left coset `gΓ`: two elements share a key exactly
/// when they lie in the same coset.
pub type CosetKey = Vec<i64>;

#[derive(Clone, Debug)]
pub enum Family {
    Whole,
    ZModulus(i64),
    Lattice { cols: Vec<Vec<i64>>, echelon: Echelon },
    /// `{(i·a, j·b, k·c)}`; a subgroup when `c | a·b`.
    HeisCongruence { a: i64, b: i64, c: i64 },
    ConjugatedBy { g: GroupElement, base: CofiniteSubgroup },
    /// Intersection of the distinct conjugates `sΓs⁻¹`, `s` over `conjugators`.
    NormalCoreOf { base: CofiniteSubgroup, conjugators: Vec<GroupElement> },
    FiniteSubset(Vec<u32>),
    /// Stabilizer of the all-zero word of length `level`.
    TreeStabilizer(u32),
}

#[derive(Debug)]
struct Inner {
    ctx: GroupCtx,
    family: Family,
    index: u64,
    identity_key: CosetKey,
}

/// A finite-index subgroup given by a family with closed-form membership.
#[derive(Clone, Debug)]
pub struct CofiniteSubgroup(Arc<Inner>);

impl CofiniteSubgroup {
    fn build(ctx: &GroupCtx, family: Family, index: u64) -> Self {
        let mut inner = Inner { ctx: ctx.clone(), family, index, identity_key: Vec::new() };
        inner.identity_key = key_of(&inner, &ctx.identity());
        CofiniteSubgroup(Arc::new(inner))
    }

    pub fn whole(ctx: &GroupCtx) -> Self {
        Self::build(ctx, Family::Whole, 1)
    }

    pub fn z_modulus(ctx: &GroupCtx, m: i64) -> Result<Self> {
        if *ctx.kind() != GroupKind::IntLine || m <= 0 {
            return Err(Error::Usage(format!("z_modulus needs the integers and m > 0, got m = {m}")));
        }
        Ok(Self::build(ctx, Family::ZModulus(m), m as u64))
    }

    /// The sublattice of `Z^d` spanned by the given columns.
    pub fn lattice(ctx: &GroupCtx, cols: Vec<Vec<i64>>) -> Result<Self> {
        let d = match ctx.kind() {
            GroupKind::IntLattice(d) => *d,
            GroupKind::IntLine => 1,
            _ => return Err(Error::Usage("lattice subgroups live in Z^d".into())),
        };
        if d == 1 && *ctx.kind() == GroupKind::IntLine {
            let e = Echelon::new(1, &cols)?;
            return Self::z_modulus(ctx, e.rows[0][0]);
        }
        let echelon = Echelon::new(d, &cols)?;
        let index = echelon.index();
        Ok(Self::build(ctx, Family::Lattice { cols, echelon }, index))
    }

    pub fn heis_congruence(ctx: &GroupCtx, a: i64, b: i64, c: i64) -> Result<Self> {
        if *ctx.kind() != GroupKind::Heisenberg {
            return Err(Error::Usage("heis_congruence needs the Heisenberg group".into()));
        }
        if a <= 0 || b <= 0 || c <= 0 {
            return Err(Error::Usage("heis_congruence moduli must be positive".into()));
        }
        if (a * b) % c != 0 {
            return Err(Error::Usage(format!("{{(ia, jb, kc)}} is a subgroup only when c | ab; got a={a} b={b} c={c}")));
        }
        Ok(Self::build(ctx, Family::HeisCongruence { a, b, c }, (a * b * c) as u64))
    }

    /// An explicit subgroup of a table group.
    pub fn finite_subset(ctx: &GroupCtx, elements: &[GroupElement]) -> Result<Self> {
        let order = match ctx.kind() {
            GroupKind::FiniteTable(t) => t.order() as u64,
            _ => return Err(Error::Usage("finite_subset needs a table group".into())),
        };
        let mut set: Vec<u32> = Vec::new();
        for g in elements {
            ctx.check(g)?;
            if let GroupElement::Fin(i) = g {
                if !set.contains(i) {
                    set.push(*i);
                }
            }
        }
        set.sort_unstable();
        let members: HashSet<GroupElement> = set.iter().map(|&i| GroupElement::Fin(i)).collect();
        let closed = members.contains(&ctx.identity())
            && members.iter().all(|x| members.iter().all(|y| members.contains(&ctx.mul(x, &ctx.inv(y)))));
        if !closed {
            return Err(Error::Usage("element list is not a subgroup".into()));
        }
        let index = order / set.len() as u64;
        Ok(Self::build(ctx, Family::FiniteSubset(set), index))
    }

    pub fn tree_stabilizer(ctx: &GroupCtx, level: u32) -> Result<Self> {
        match ctx.kind() {
            GroupKind::TreeDepth(n) if level <= *n => {
                Ok(Self::build(ctx, Family::TreeStabilizer(level), 1u64 << level))
            }
            _ => Err(Error::Usage("tree_stabilizer needs a tree group of depth >= level".into())),
        }
    }

    pub fn ctx(&self) -> &GroupCtx {
        &self.0.ctx
    }

    pub fn family(&self) -> &Family {
        &self.0.family
    }

    pub fn index(&self) -> u64 {
        self.0.index
    }

    pub fn key(&self, g: &GroupElement) -> CosetKey {
        key_of(&self.0, g)
    }

    pub fn member(&self, g: &GroupElement) -> bool {
        self.key(g) == self.0.identity_key
    }

    /// Membership with an ambient-group check.
    pub fn try_member(&self, g: &GroupElement) -> Result<bool> {
        self.ctx().check(g)?;
        Ok(self.member(g))
    }

    /// `Some(true)` when normality is known from the family.
    pub fn is_normal(&self) -> Option<bool> {
        match self.family() {
            Family::Whole | Family::ZModulus(_) | Family::Lattice { .. } | Family::NormalCoreOf { .. } => Some(true),
            Family::HeisCongruence { a, b, c } => Some(a % c == 0 && b % c == 0),
            Family::ConjugatedBy { base, .. } => base.is_normal(),
            Family::TreeStabilizer(level) => Some(*level <= 1),
            Family::FiniteSubset(set) => {
                let ctx = self.ctx();
                let t = ctx.finite_order().unwrap_or(0) as u32;
                Some((0..t).all(|x| {
                    set.iter().all(|&h| self.member(&ctx.conj(&GroupElement::Fin(x), &GroupElement::Fin(h))))
                }))
            }
        }
    }

    /// A generating set when the family provides one.
    pub fn generators(&self) -> Option<Vec<GroupElement>> {
        let ctx = self.ctx();
        use GroupElement as E;
        match self.family() {
            Family::Whole => Some(ctx.generators().to_vec()),
            Family::ZModulus(m) => Some(vec![E::Int(*m)]),
            Family::Lattice { echelon, .. } => Some(echelon.rows.iter().cloned().map(E::Vector).collect()),
            Family::HeisCongruence { a, b, c } => Some(vec![E::Heis([*a, 0, 0]), E::Heis([0, *b, 0]), E::Heis([0, 0, *c])]),
            Family::ConjugatedBy { g, base } => {
                base.generators().map(|gs| gs.iter().map(|h| ctx.conj(g, h)).collect())
            }
            Family::NormalCoreOf { .. } => None,
            Family::FiniteSubset(set) => Some(set.iter().map(|&i| E::Fin(i)).collect()),
            Family::TreeStabilizer(level) => {
                let GroupKind::TreeDepth(n) = ctx.kind() else { unreachable!() };
                Some(
                    (0..*n)
                        .flat_map(|k| (0..(1u64 << k)).map(move |p| (k, p)))
                        .filter(|&(k, p)| !(k < *level && p == 0))
                        .map(|(k, p)| E::Tree(tree::swap(k, p)))
                        .collect(),
                )
            }
        }
    }

    /// Whether every generator of `other` lies in `self`; `None` when
    /// `other` has no known generators.
    pub fn contains_subgroup(&self, other: &CofiniteSubgroup) -> Option<bool> {
        other.generators().map(|gs| gs.iter().all(|g| self.member(g)))
    }

    pub fn to_json(&self) -> Value {
        let ctx = self.ctx();
        match self.family() {
            Family::Whole => json!({"family": "whole"}),
            Family::ZModulus(m) => json!({"family": "z_modulus", "m": m}),
            Family::Lattice { cols, .. } => json!({"family": "lattice", "cols": cols}),
            Family::HeisCongruence { a, b, c } => json!({"family": "heis_congruence", "a": a, "b": b, "c": c}),
            Family::ConjugatedBy { g, base } => {
                json!({"family": "conjugated", "g": ctx.element_to_json(g), "base": base.to_json()})
            }
            Family::NormalCoreOf { base, .. } => json!({"family": "normal_core", "base": base.to_json()}),
            Family::FiniteSubset(set) => json!({"family": "finite_subset", "elements": set}),
            Family::TreeStabilizer(level) => json!({"family": "tree_stabilizer", "level": level}),
        }
    }

    /// Parses a JSON family description, or the short forms `mod:m`,
    /// `heis:a,b,c`, `stab:level` and `whole`.
    pub fn from_json(ctx: &GroupCtx, v: &Value) -> Result<Self> {
        if let Some(s) = v.as_str() {
            return Self::from_short(ctx, s);
        }
        let v = v.get("subgroup").unwrap_or(v);
        let fam = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Usage("subgroup spec needs a \"family\"".into()))?;
        let int = |k: &str| {
            v.get(k)
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Usage(format!("family {fam} needs integer {k:?}")))
        };
        match fam {
            "whole" => Ok(Self::whole(ctx)),
            "z_modulus" => Self::z_modulus(ctx, int("m")?),
            "lattice" => {
                let cols: Vec<Vec<i64>> = serde_json::from_value(v.get("cols").cloned().unwrap_or(Value::Null))
                    .map_err(|e| Error::Usage(e.to_string()))?;
                Self::lattice(ctx, cols)
            }
            "heis_congruence" => Self::heis_congruence(ctx, int("a")?, int("b")?, int("c")?),
            "conjugated" => {
                let g = ctx.element_from_json(v.get("g").unwrap_or(&Value::Null))?;
                let base = Self::from_json(ctx, v.get("base").unwrap_or(&Value::Null))?;
                Ok(conjugate(&g, &base))
            }
            "normal_core" => {
                let base = Self::from_json(ctx, v.get("base").unwrap_or(&Value::Null))?;
                normal_core(&base, super::DEFAULT_COSET_CAP)
            }
            "finite_subset" => {
                let elems = v
                    .get("elements")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Usage("finite_subset needs \"elements\"".into()))?
                    .iter()
                    .map(|e| ctx.element_from_json(e))
                    .collect::<Result<Vec<_>>>()?;
                Self::finite_subset(ctx, &elems)
            }
            "tree_stabilizer" => Self::tree_stabilizer(ctx, int("level")? as u32),
            other => Err(Error::Usage(format!("unknown subgroup family {other:?}"))),
        }
    }

    fn from_short(ctx: &GroupCtx, s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("cannot parse subgroup {s:?}"));
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<i64>> {
            rest.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        match head {
            "whole" => Ok(Self::whole(ctx)),
            "mod" => match nums()?.as_slice() {
                [m] => Self::z_modulus(ctx, *m),
                _ => Err(bad()),
            },
            "heis" => match nums()?.as_slice() {
                [a, b, c] => Self::heis_congruence(ctx, *a, *b, *c),
                _ => Err(bad()),
            },
            "stab" => match nums()?.as_slice() {
                [l] => Self::tree_stabilizer(ctx, *l as u32),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

fn key_of(inner: &Inner, g: &GroupElement) -> CosetKey {
    let ctx = &inner.ctx;
    match (&inner.family, g) {
        (Family::Whole, _) => Vec::new(),
        (Family::ZModulus(m), GroupElement::Int(x)) => vec![x.rem_euclid(*m)],
        (Family::Lattice { echelon, .. }, GroupElement::Vector(v)) => echelon.reduce(v),
        (Family::HeisCongruence { a, b, c }, GroupElement::Heis([x, y, z])) => {
            // r⁻¹g ∈ Γ for r = (x0, y0, z0) forces z0 ≡ z − x0(y − y0) mod c.
            let x0 = x.rem_euclid(*a);
            let y0 = y.rem_euclid(*b);
            let t = (*z as i128 - x0 as i128 * (*y as i128 - y0 as i128)).rem_euclid(*c as i128);
            vec![x0, y0, t as i64]
        }
        (Family::ConjugatedBy { g: h, base }, _) => base.key(&ctx.mul(g, h)),
        (Family::NormalCoreOf { base, conjugators }, _) => {
            conjugators.iter().flat_map(|s| base.key(&ctx.mul(g, s))).collect()
        }
        (Family::FiniteSubset(set), GroupElement::Fin(_)) => {
            let least = set
                .iter()
                .map(|&h| match ctx.mul(g, &GroupElement::Fin(h)) {
                    GroupElement::Fin(i) => i,
                    _ => unreachable!(),
                })
                .min()
                .expect("subgroup contains the identity");
            vec![least as i64]
        }
        (Family::TreeStabilizer(level), GroupElement::Tree(t)) => vec![tree::apply(*t, *level, 0) as i64],
        _ => panic!("{g} is not an element of {}", ctx.name()),
    }
}

/// `gΓg⁻¹`, with membership `h ↦ g⁻¹hg ∈ Γ`.
pub fn conjugate(g: &GroupElement, gamma: &CofiniteSubgroup) -> CofiniteSubgroup {
    let ctx = gamma.ctx();
    if gamma.is_normal() == Some(true) || ctx.is_identity(g) {
        return gamma.clone();
    }
    let (g, base) = match gamma.family() {
        Family::ConjugatedBy { g: h, base } => (ctx.mul(g, h), base.clone()),
        _ => (g.clone(), gamma.clone()),
    };
    let index = base.index();
    CofiniteSubgroup::build(ctx, Family::ConjugatedBy { g, base }, index)
}

/// The normal core `∩ gΓg⁻¹`.
///
/// Conjugates are taken over a transversal of `G/Γ` and deduplicated using
/// the generators of `Γ` when available. The index is the size of the orbit
/// of the identity under the action on tuples of cosets.
pub fn normal_core(gamma: &CofiniteSubgroup, cap: usize) -> Result<CofiniteSubgroup> {
    if gamma.is_normal() == Some(true) {
        return Ok(gamma.clone());
    }
    let ctx = gamma.ctx();
    let table = coset_table(gamma, cap)?;
    let gens = gamma.generators();
    let mut conjugators: Vec<GroupElement> = Vec::new();
    for r in table.transversal() {
        let duplicate = match &gens {
            Some(gs) => conjugators.iter().any(|s| {
                let u = ctx.mul(&ctx.inv(s), r);
                gs.iter().all(|h| gamma.member(&ctx.conj(&u, h)))
            }),
            None => false,
        };
        if !duplicate {
            conjugators.push(r.clone());
        }
    }
    let probe = CofiniteSubgroup::build(ctx, Family::NormalCoreOf { base: gamma.clone(), conjugators: conjugators.clone() }, 0);
    let mut seen: HashMap<CosetKey, ()> = HashMap::new();
    let mut queue = VecDeque::from([ctx.identity()]);
    seen.insert(probe.key(&ctx.identity()), ());
    let steps = ctx.symmetric_generators();
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y = ctx.mul(s, &x);
            let k = probe.key(&y);
            if seen.insert(k, ()).is_none() {
                if seen.len() > cap {
                    return Err(Error::Resource(format!("normal core index exceeds cap {cap}")));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(CofiniteSubgroup::build(
        ctx,
        Family::NormalCoreOf { base: gamma.clone(), conjugators },
        seen.len() as u64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use GroupElement::*;

    #[test]
    fn membership_examples() {
        let h = GroupCtx::heisenberg();
        let g = CofiniteSubgroup::heis_congruence(&h, 2, 4, 4).unwrap();
        assert!(g.member(&Heis([2, 4, 4])));
        assert!(!g.member(&Heis([1, 4, 4])));
        let z = GroupCtx::int_line();
        assert!(!CofiniteSubgroup::z_modulus(&z, 2).unwrap().member(&Int(1)));
        let base = CofiniteSubgroup::heis_congruence(&h, 1, 2, 2).unwrap();
        let core = normal_core(&base, 1 << 16).unwrap();
        assert!(!core.member(&Heis([1, 0, 0])));
        assert!(core.member(&Heis([2, 2, 2])));
        assert_eq!(core.index(), 2 * base.index());
        assert!(g.try_member(&Int(3)).is_err());
    }

    #[test]
    fn conjugation_formula() {
        let h = GroupCtx::heisenberg();
        let base = CofiniteSubgroup::heis_congruence(&h, 1, 2, 2).unwrap();
        let c = conjugate(&Heis([0, 1, 0]), &base);
        assert!(c.member(&Heis([1, 2, 1])));
        assert!(!base.member(&Heis([1, 2, 1])));
        // brute force against g⁻¹hg ∈ Γ on a ball
        let g = Heis([0, 1, 0]);
        for x in h.ball(3) {
            let back = h.mul(&h.mul(&h.inv(&g), &x), &g);
            assert_eq!(c.member(&x), base.member(&back));
        }
    }

    #[test]
    fn keys_separate_cosets_exactly() {
        let h = GroupCtx::heisenberg();
        let g = CofiniteSubgroup::heis_congruence(&h, 2, 4, 4).unwrap();
        let ball = h.ball(3);
        for x in &ball {
            for y in ball.iter().step_by(3) {
                let same = g.member(&h.mul(&h.inv(y), x));
                assert_eq!(same, g.key(x) == g.key(y), "{x} {y}");
            }
        }
    }

    #[test]
    fn short_forms() {
        let z = GroupCtx::int_line();
        assert_eq!(CofiniteSubgroup::from_json(&z, &json!("mod:4")).unwrap().index(), 4);
        let h = GroupCtx::heisenberg();
        let s = CofiniteSubgroup::from_json(&h, &json!({"subgroup": {"family": "heis_congruence", "a": 2, "b": 4, "c": 4}})).unwrap();
        assert_eq!(s.index(), 32);
        assert!(CofiniteSubgroup::from_json(&h, &json!("heis:2,3,4")).is_err());
    }
}
