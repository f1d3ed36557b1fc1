//! Odometers of decreasing chains of cofinite subgroups: chain points and
//! the action, cross-sections, normal covers, the rank-one cover, and
//! compatibility of (C,F)-parameters with chain points.

mod compat;
mod cover;
mod sections;

use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{coset_table, CofiniteSubgroup, CosetSpace, GroupCtx, GroupElement, DEFAULT_COSET_CAP};

pub use compat::{
    isomorphism_check, odometer_compatibility, odometer_factor_map, FactorMapOutcome, IsoCheck, IsoOutcome, IsoProbe,
    OdometerMapValue,
};
pub use cover::{normal_cover, rank_one_cover, NormalCover, RankOneCover, TauCheck};
pub use sections::{cross_sections, rank_one_odometer_params, CrossSections};

/// A chain `Γ_1 ⊋ Γ_2 ⊋ ⋯ ⊋ Γ_N` of cofinite subgroups; `Γ_0 = G`.
#[derive(Debug)]
pub struct OdometerSpec {
    group: GroupCtx,
    levels: Vec<CofiniteSubgroup>,
    spaces: Vec<OnceLock<CosetSpace>>,
    name: String,
    whole: CofiniteSubgroup,
}

impl OdometerSpec {
    pub fn new(group: &GroupCtx, levels: Vec<CofiniteSubgroup>, name: impl Into<String>) -> Result<Self> {
        if let Some(l) = levels.iter().find(|l| l.ctx().name() != group.name()) {
            return Err(Error::GroupMismatch { expected: group.name(), found: l.ctx().name() });
        }
        Ok(OdometerSpec {
            group: group.clone(),
            spaces: (0..=levels.len()).map(|_| OnceLock::new()).collect(),
            levels,
            name: name.into(),
            whole: CofiniteSubgroup::whole(group),
        })
    }

    /// `Γ_n = a_1⋯a_n ℤ`.
    pub fn z_product(a: &[i64]) -> Result<Self> {
        let z = GroupCtx::int_line();
        let mut m = 1i64;
        let mut levels = Vec::with_capacity(a.len());
        for &x in a {
            if x < 2 {
                return Err(Error::Usage(format!("z_product needs a_n > 1, got {x}")));
            }
            m = m.checked_mul(x).ok_or_else(|| Error::Resource("chain modulus overflows".into()))?;
            levels.push(CofiniteSubgroup::z_modulus(&z, m)?);
        }
        Self::new(&z, levels, "z_product")
    }

    /// `Γ_n = {(i2^n, j2^n, k2^n)}` in the Heisenberg group.
    pub fn heis_diagonal(depth: usize) -> Result<Self> {
        let h = GroupCtx::heisenberg();
        let levels = (1..=depth)
            .map(|n| {
                let p = 1i64 << n;
                CofiniteSubgroup::heis_congruence(&h, p, p, p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&h, levels, "heisenberg_2adic")
    }

    /// `Γ_n = {(i2^{n−1}, j2^n, k2^n)}`, not normal.
    pub fn heis_nonnormal(depth: usize) -> Result<Self> {
        let h = GroupCtx::heisenberg();
        let levels = (1..=depth)
            .map(|n| {
                let p = 1i64 << n;
                CofiniteSubgroup::heis_congruence(&h, p / 2, p, p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&h, levels, "heisenberg_nonnormal")
    }

    /// Point stabilizers of the all-zero word at levels `1..=depth`.
    pub fn tree_stabilizers(depth: u32) -> Result<Self> {
        let t = GroupCtx::tree(depth)?;
        let levels = (1..=depth).map(|l| CofiniteSubgroup::tree_stabilizer(&t, l)).collect::<Result<Vec<_>>>()?;
        Self::new(&t, levels, "tree_stabilizers")
    }

    /// `{"chain": "z_product", "a": [...]}`, `{"chain": "heis_diagonal", "depth": N}`,
    /// `{"chain": "heis_nonnormal", "depth": N}`, `{"chain": "tree", "depth": N}` or
    /// `{"group": ..., "levels": [subgroup, ...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let depth = || {
            v.get("depth")
                .and_then(Value::as_u64)
                .map(|d| d as usize)
                .ok_or_else(|| Error::Usage("chain needs a \"depth\"".into()))
        };
        match v.get("chain").and_then(Value::as_str) {
            Some("z_product") => {
                let a: Vec<i64> = serde_json::from_value(v.get("a").cloned().unwrap_or(Value::Null))
                    .map_err(|e| Error::Usage(format!("z_product needs integer list \"a\": {e}")))?;
                Self::z_product(&a)
            }
            Some("heis_diagonal") => Self::heis_diagonal(depth()?),
            Some("heis_nonnormal") => Self::heis_nonnormal(depth()?),
            Some("tree") => Self::tree_stabilizers(depth()? as u32),
            Some(other) => Err(Error::Usage(format!("unknown chain rule {other:?}"))),
            None => {
                let ctx = GroupCtx::from_json(v)?;
                let levels = v
                    .get("levels")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Usage("chain needs \"chain\" or \"levels\"".into()))?
                    .iter()
                    .map(|s| CofiniteSubgroup::from_json(&ctx, s))
                    .collect::<Result<Vec<_>>>()?;
                Self::new(&ctx, levels, "explicit")
            }
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "group": self.group.to_json(),
            "levels": self.levels.iter().map(CofiniteSubgroup::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn group(&self) -> &GroupCtx {
        &self.group
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depth_cap(&self) -> usize {
        self.levels.len()
    }

    /// `Γ_n`, with `Γ_0 = G`.
    pub fn level(&self, n: usize) -> Result<&CofiniteSubgroup> {
        match n {
            0 => Ok(&self.whole),
            _ => self.levels.get(n - 1).ok_or(Error::DepthExceeded { stage: n, cap: self.levels.len() }),
        }
    }

    /// The coset space `G/Γ_n`, built on first use.
    pub fn space(&self, n: usize) -> Result<&CosetSpace> {
        let gamma = self.level(n)?;
        if let Some(s) = self.spaces[n].get() {
            return Ok(s);
        }
        let s = coset_table(gamma, DEFAULT_COSET_CAP)?;
        Ok(self.spaces[n].get_or_init(|| s))
    }

    /// Whether `g` lies in every conjugate of `Γ_n`.
    fn in_core(&self, n: usize, g: &GroupElement) -> Result<bool> {
        let gamma = self.level(n)?;
        if gamma.is_normal() == Some(true) {
            return Ok(gamma.member(g));
        }
        let s = self.space(n)?;
        Ok((0..s.len()).all(|i| s.act(g, i) == i))
    }
}

#[derive(Clone, Debug)]
pub struct LevelCheck {
    pub n: usize,
    pub index: u64,
    pub nested: bool,
    pub strict: bool,
    /// An element of `Γ_{n−1} ∖ Γ_n`.
    pub witness: Option<GroupElement>,
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub levels: Vec<LevelCheck>,
    /// No nonidentity element of the radius-2 ball lies in every core up to `depth`.
    pub faithful_window: bool,
    pub unseparated: Vec<GroupElement>,
}

impl ChainReport {
    pub fn valid(&self) -> bool {
        self.levels.iter().all(|l| l.nested && l.strict)
    }

    pub fn to_json(&self, ctx: &GroupCtx) -> Value {
        json!({
            "valid": self.valid(),
            "faithful_window": self.faithful_window,
            "unseparated": self.unseparated.iter().map(|g| ctx.element_to_json(g)).collect::<Vec<_>>(),
            "levels": self.levels.iter().map(|l| json!({
                "n": l.n,
                "index": l.index,
                "nested": l.nested,
                "strict": l.strict,
                "witness": l.witness.as_ref().map(|g| ctx.element_to_json(g)),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `Γ_n ⊂ Γ_{n−1}` via generators of `Γ_n`, or via the Schreier generators
/// `r_{s·i}⁻¹ s r_i` of `Γ_n` when the family has none.
fn nested_in(sub: &CofiniteSubgroup, sup: &CofiniteSubgroup) -> Result<bool> {
    if let Some(gs) = sub.generators() {
        return Ok(gs.iter().all(|g| sup.member(g)));
    }
    let ctx = sub.ctx();
    let space = coset_table(sub, DEFAULT_COSET_CAP)?;
    for s in ctx.generators() {
        for i in 0..space.len() {
            let j = space.act(s, i);
            let schreier = ctx.mul(&ctx.inv(space.rep(j)), &ctx.mul(s, space.rep(i)));
            if !sup.member(&schreier) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn proper_witness(sub: &CofiniteSubgroup, sup: &CofiniteSubgroup) -> Result<Option<GroupElement>> {
    if let Some(gs) = sup.generators() {
        return Ok(gs.into_iter().find(|g| !sub.member(g)));
    }
    let space = coset_table(sub, DEFAULT_COSET_CAP)?;
    Ok(space.transversal().iter().find(|r| sup.member(r) && !sub.member(r)).cloned())
}

/// Checks nesting and strict decrease for `n ≤ depth`, and the faithfulness
/// window on the radius-2 ball.
pub fn validate_chain(spec: &OdometerSpec, depth: usize) -> Result<ChainReport> {
    let mut levels = Vec::with_capacity(depth);
    for n in 1..=depth {
        let (sub, sup) = (spec.level(n)?, spec.level(n - 1)?);
        let nested = nested_in(sub, sup)?;
        let witness = if nested { proper_witness(sub, sup)? } else { None };
        levels.push(LevelCheck { n, index: sub.index(), nested, strict: nested && witness.is_some(), witness });
    }
    let ctx = spec.group();
    let mut unseparated = Vec::new();
    for g in ctx.ball(2) {
        if ctx.is_identity(&g) {
            continue;
        }
        let mut separated = false;
        for n in 1..=depth {
            if !spec.in_core(n, &g)? {
                separated = true;
                break;
            }
        }
        if !separated {
            unseparated.push(g);
        }
    }
    Ok(ChainReport { levels, faithful_window: unseparated.is_empty(), unseparated })
}

/// A point `(g_1Γ_1, …, g_NΓ_N)` of the odometer, held by representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetChain {
    pub reps: Vec<GroupElement>,
}

impl CosetChain {
    /// `(Γ_1, …, Γ_N)`.
    pub fn identity(spec: &OdometerSpec, n: usize) -> CosetChain {
        CosetChain { reps: vec![spec.group().identity(); n] }
    }

    /// `(gΓ_1, …, gΓ_N)`.
    pub fn of_element(g: &GroupElement, n: usize) -> CosetChain {
        CosetChain { reps: vec![g.clone(); n] }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// `g_n⁻¹ g_{n+1} ∈ Γ_n` for all `n < N`.
    pub fn check(&self, spec: &OdometerSpec) -> Result<()> {
        let ctx = spec.group();
        for g in &self.reps {
            ctx.check(g)?;
        }
        for n in 1..self.reps.len() {
            let d = ctx.mul(&ctx.inv(&self.reps[n - 1]), &self.reps[n]);
            if !spec.level(n)?.member(&d) {
                return Err(Error::Validation(format!("chain is inconsistent between levels {n} and {}", n + 1)));
            }
        }
        if self.reps.len() > spec.depth_cap() {
            return Err(Error::DepthExceeded { stage: self.reps.len(), cap: spec.depth_cap() });
        }
        Ok(())
    }

    /// Levelwise equality of cosets.
    pub fn same(&self, other: &CosetChain, spec: &OdometerSpec) -> Result<bool> {
        if self.len() != other.len() {
            return Ok(false);
        }
        let ctx = spec.group();
        for (n, (a, b)) in self.reps.iter().zip(&other.reps).enumerate() {
            if !spec.level(n + 1)?.member(&ctx.mul(&ctx.inv(a), b)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Transversal indices in the BFS coset tables.
    pub fn indices(&self, spec: &OdometerSpec) -> Result<Vec<usize>> {
        self.reps.iter().enumerate().map(|(n, g)| Ok(spec.space(n + 1)?.locate(g))).collect()
    }

    /// Representatives replaced by the BFS transversal entries.
    pub fn canonical(&self, spec: &OdometerSpec) -> Result<CosetChain> {
        let reps = self
            .reps
            .iter()
            .enumerate()
            .map(|(n, g)| {
                let s = spec.space(n + 1)?;
                Ok(s.rep(s.locate(g)).clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CosetChain { reps })
    }

    pub fn to_json(&self, ctx: &GroupCtx) -> Value {
        Value::Array(self.reps.iter().map(|g| ctx.element_to_json(g)).collect())
    }

    pub fn from_json(spec: &OdometerSpec, v: &Value) -> Result<CosetChain> {
        let ctx = spec.group();
        let reps = v
            .as_array()
            .ok_or_else(|| Error::Usage("a chain point is a list of representatives".into()))?
            .iter()
            .map(|g| ctx.element_from_json(g))
            .collect::<Result<Vec<_>>>()?;
        let y = CosetChain { reps };
        y.check(spec)?;
        Ok(y)
    }
}

/// `O_g(g_nΓ_n) = (g g_nΓ_n)`.
pub fn odometer_act(spec: &OdometerSpec, g: &GroupElement, y: &CosetChain) -> Result<CosetChain> {
    let ctx = spec.group();
    ctx.check(g)?;
    y.check(spec)?;
    Ok(CosetChain { reps: y.reps.iter().map(|r| ctx.mul(g, r)).collect() })
}
