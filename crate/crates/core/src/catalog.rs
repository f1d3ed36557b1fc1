//! Named parameter sets, odometer chains and finite scenarios.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde_json::{json, Value};

use crate::cf::{CFParams, NuRule, Shape, Stage, StageRule};
use crate::error::{Error, Result};
use crate::groups::{tree, z3_semidirect_z2, CofiniteSubgroup, GroupCtx, GroupElement};
use crate::measures::FinMeasure;
use crate::odometers::{rank_one_odometer_params, OdometerSpec};
use crate::rational::{self, Q};

pub const NAMES: [&str; 8] = [
    "fgsw",
    "fgsw-split",
    "heisenberg-rank-one",
    "heisenberg-2adic-chain",
    "heisenberg-nonnormal",
    "s3-two-factors",
    "z-product-odometer",
    "tree-nonfree",
];

pub const FGSW_CAP: usize = 28;
pub const HEIS_CAP: usize = 14;

pub enum CatalogEntry {
    Params(CFParams),
    Chain(OdometerSpec),
    Odometer { spec: OdometerSpec, params: CFParams },
    S3(S3Scenario),
    Tree(TreeScenario),
}

impl CatalogEntry {
    pub fn kind(&self) -> &'static str {
        match self {
            CatalogEntry::Params(_) => "params",
            CatalogEntry::Chain(_) => "chain",
            CatalogEntry::Odometer { .. } => "odometer",
            CatalogEntry::S3(_) | CatalogEntry::Tree(_) => "scenario",
        }
    }

    pub fn params(&self) -> Option<&CFParams> {
        match self {
            CatalogEntry::Params(t) | CatalogEntry::Odometer { params: t, .. } => Some(t),
            _ => None,
        }
    }

    pub fn chain(&self) -> Option<&OdometerSpec> {
        match self {
            CatalogEntry::Chain(s) | CatalogEntry::Odometer { spec: s, .. } => Some(s),
            CatalogEntry::Tree(t) => Some(&t.spec),
            _ => None,
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            CatalogEntry::Params(t) => json!({"kind": "params", "rule": t.describe(), "depth_cap": t.depth_cap()}),
            CatalogEntry::Chain(s) => json!({"kind": "chain", "chain": s.to_json()}),
            CatalogEntry::Odometer { spec, params } => {
                json!({"kind": "odometer", "chain": spec.to_json(), "depth_cap": params.depth_cap()})
            }
            CatalogEntry::S3(s) => s.to_json(),
            CatalogEntry::Tree(t) => t.to_json(),
        }
    }
}

/// Looks up an entry; `options` carries entry-specific settings such as
/// `{"p": "1/3"}` or `{"a": [2, 3], "depth": 4}`.
pub fn catalog(name: &str, options: &Value) -> Result<CatalogEntry> {
    let depth = |default: usize| options.get("depth").and_then(Value::as_u64).map_or(default, |d| d as usize);
    match name {
        "fgsw" => Ok(CatalogEntry::Params(fgsw())),
        "fgsw-split" => {
            let p = match options.get("p") {
                Some(Value::String(s)) => rational::parse(s)?,
                Some(v) => v.as_i64().map(rational::int).ok_or_else(|| Error::Usage("p must be a rational string".into()))?,
                None => rational::frac(1, 2),
            };
            Ok(CatalogEntry::Params(fgsw_split(p)?))
        }
        "heisenberg-rank-one" => Ok(CatalogEntry::Params(heisenberg_rank_one())),
        "heisenberg-2adic-chain" => Ok(CatalogEntry::Chain(OdometerSpec::heis_diagonal(depth(8))?)),
        "heisenberg-nonnormal" => Ok(CatalogEntry::Chain(OdometerSpec::heis_nonnormal(depth(6))?)),
        "z-product-odometer" => {
            let a: Vec<i64> = match options.get("a") {
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Usage(format!("\"a\": {e}")))?,
                None => vec![2; depth(8)],
            };
            let spec = OdometerSpec::z_product(&a)?;
            let sections = crate::odometers::cross_sections(&spec, a.len())?;
            let kappas = match options.get("kappa").and_then(Value::as_array) {
                Some(list) => list.iter().map(|m| FinMeasure::from_json(spec.group(), m)).collect::<Result<Vec<_>>>()?,
                None => sections.uniform_kappas(),
            };
            let params = rank_one_odometer_params(&spec, &kappas)?;
            Ok(CatalogEntry::Odometer { spec, params })
        }
        "s3-two-factors" => Ok(CatalogEntry::S3(s3_two_factors())),
        "tree-nonfree" => Ok(CatalogEntry::Tree(tree_nonfree(depth(4) as u32)?)),
        other => Err(Error::Usage(format!("unknown example {other:?}; known: {}", NAMES.join(", ")))),
    }
}

/// `{"example": name, ...}`, `{"rule": name, "params": {...}}` or
/// `{"group": ..., "explicit": {...}}`.
pub fn params_from_json(v: &Value) -> Result<CFParams> {
    if let Some(name) = v.get("example").or_else(|| v.get("rule")).and_then(Value::as_str) {
        let opts = v.get("params").cloned().unwrap_or_else(|| v.clone());
        return catalog(name, &opts)?
            .params()
            .cloned()
            .ok_or_else(|| Error::Usage(format!("{name} does not define (C,F)-parameters")));
    }
    if v.get("explicit").is_some() {
        let ctx = match v.get("group") {
            Some(g) => GroupCtx::from_json(g)?,
            None => GroupCtx::int_line(),
        };
        return CFParams::from_explicit_json(&ctx, v);
    }
    Err(Error::Usage("params need \"example\", \"rule\" or \"explicit\"".into()))
}

/// `h_n = 2^n(2^{n+1} − 1)`.
pub fn fgsw_h(n: usize) -> i64 {
    (1i64 << n) * ((1i64 << (n + 1)) - 1)
}

fn fgsw_c(n: usize) -> [i64; 4] {
    let h = fgsw_h(n - 1);
    let p = 1i64 << n;
    [0, h, 2 * h + p, 3 * h + p]
}

/// `κ_n¹` uniform on `{0, h_{n−1}}` and `κ_n²` with weights `(p, 1 − p)` on `{0, 4^n}`.
pub fn fgsw_split_factors(n: usize, p: &Q) -> Result<(FinMeasure, FinMeasure)> {
    if n == 0 || n > FGSW_CAP {
        return Err(Error::DepthExceeded { stage: n, cap: FGSW_CAP });
    }
    let k1 = FinMeasure::uniform([GroupElement::Int(0), GroupElement::Int(fgsw_h(n - 1))]);
    let four = 1i64 << (2 * n);
    let k2 = FinMeasure::new([(GroupElement::Int(0), p.clone()), (GroupElement::Int(four), rational::one() - p)])?;
    Ok((k1, k2))
}

#[derive(Debug)]
struct FgswRule {
    p: Option<Q>,
}

impl StageRule for FgswRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        if n > FGSW_CAP {
            return Err(Error::DepthExceeded { stage: n, cap: FGSW_CAP });
        }
        let shape = Shape::Interval(fgsw_h(n));
        if n == 0 {
            return Ok(Stage { n, kappa: None, shape, nu: NuRule::Point });
        }
        let quarter = rational::inv_pow(4, n as u32);
        let (kappa, nu) = match &self.p {
            None => (FinMeasure::uniform(fgsw_c(n).map(GroupElement::Int)), NuRule::Uniform(quarter)),
            Some(p) => {
                let (k1, k2) = fgsw_split_factors(n, p)?;
                let nu = if *p == rational::frac(1, 2) {
                    NuRule::Uniform(quarter)
                } else {
                    NuRule::Recursive { spacer_weight: quarter }
                };
                (k1.convolve(&GroupCtx::int_line(), &k2)?, nu)
            }
        };
        Ok(Stage { n, kappa: Some(kappa), shape, nu })
    }

    fn depth_cap(&self) -> usize {
        FGSW_CAP
    }

    fn describe(&self) -> Value {
        match &self.p {
            None => json!({"rule": "fgsw"}),
            Some(p) => json!({"rule": "fgsw-split", "p": rational::to_string(p)}),
        }
    }
}

/// `F_n = {0, …, h_n − 1}`, `C_n = {0, h_{n−1}, 2h_{n−1} + 2^n, 3h_{n−1} + 2^n}`,
/// uniform `κ_n` and `ν_n ≡ 4^{−n}`.
pub fn fgsw() -> CFParams {
    CFParams::from_rule(GroupCtx::int_line(), FgswRule { p: None })
}

/// The same shapes with `κ_n = κ_n¹ * κ_n²`; requires `0 < p < 1`.
pub fn fgsw_split(p: Q) -> Result<CFParams> {
    if p <= Q::default() || p >= rational::one() {
        return Err(Error::Usage(format!("p must lie strictly between 0 and 1, got {p}")));
    }
    Ok(CFParams::from_rule(GroupCtx::int_line(), FgswRule { p: Some(p) }))
}

/// `h_n = 4^{2n+1} − 3·4^n`.
pub fn heis_h(n: usize) -> i64 {
    (1i64 << (4 * n + 2)) - 3 * (1i64 << (2 * n))
}

/// `C_{n+1} = {(a, b, 0) : a, b ∈ {0, 2^n}}·{(0, 0, jh_n) : j < 8}·{1, (0, 0, 8h_n + 2·4^{n+1})}`.
pub fn heis_c(n: usize) -> Vec<GroupElement> {
    let ctx = GroupCtx::heisenberg();
    let p = 1i64 << n;
    let h = heis_h(n);
    let e = 8 * h + 2 * (1i64 << (2 * n + 2));
    let mut out = Vec::with_capacity(64);
    for a in [0, p] {
        for b in [0, p] {
            for j in 0..8 {
                for z in [0, e] {
                    let c1 = GroupElement::Heis([a, b, 0]);
                    let c2 = GroupElement::Heis([0, 0, j * h + z]);
                    out.push(ctx.mul(&c1, &c2));
                }
            }
        }
    }
    out
}

#[derive(Debug)]
struct HeisRule;

impl StageRule for HeisRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        if n > HEIS_CAP {
            return Err(Error::DepthExceeded { stage: n, cap: HEIS_CAP });
        }
        let p = 1i64 << n;
        let shape = Shape::HeisBox { a: p, b: p, c: heis_h(n) };
        if n == 0 {
            return Ok(Stage { n, kappa: None, shape, nu: NuRule::Point });
        }
        Ok(Stage {
            n,
            kappa: Some(FinMeasure::uniform(heis_c(n - 1))),
            shape,
            nu: NuRule::Uniform(rational::inv_pow(64, n as u32)),
        })
    }

    fn depth_cap(&self) -> usize {
        HEIS_CAP
    }

    fn describe(&self) -> Value {
        json!({"rule": "heisenberg-rank-one"})
    }
}

/// `F_n = Π(2^n, 2^n, h_n)`, uniform `κ_n` on 64 points and `ν_n ≡ 64^{−n}`.
pub fn heisenberg_rank_one() -> CFParams {
    CFParams::from_rule(GroupCtx::heisenberg(), HeisRule)
}

/// `Σ_q = {(i2^q, j2^q, k4^q)}`.
pub fn sigma_subgroup(q: u32) -> Result<CofiniteSubgroup> {
    CofiniteSubgroup::heis_congruence(&GroupCtx::heisenberg(), 1 << q, 1 << q, 1 << (2 * q))
}

/// The diagonal action of `ℤ_3 ⋊ ℤ_2` on pairs of distinct residues.
#[derive(Clone, Debug)]
pub struct S3Scenario {
    pub group: GroupCtx,
    pub points: Vec<(u8, u8)>,
    pub transitive: bool,
    pub free: bool,
    pub partition_first: Vec<Vec<(u8, u8)>>,
    pub partition_second: Vec<Vec<(u8, u8)>>,
    pub subgroup: CofiniteSubgroup,
}

impl S3Scenario {
    pub fn partitions_differ(&self) -> bool {
        let a: BTreeSet<&Vec<(u8, u8)>> = self.partition_first.iter().collect();
        let b: BTreeSet<&Vec<(u8, u8)>> = self.partition_second.iter().collect();
        a != b
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": "scenario",
            "name": "s3-two-factors",
            "points": self.points,
            "size": self.points.len(),
            "transitive": self.transitive,
            "free": self.free,
            "partition_first": self.partition_first,
            "partition_second": self.partition_second,
            "partitions_differ": self.partitions_differ(),
            "subgroup_index": self.subgroup.index(),
            "subgroup_normal": self.subgroup.is_normal(),
        })
    }
}

/// `(a, s)·x = a + (−1)^s x` on `ℤ_3`, with `(a, s)` encoded as `a + 3s`.
pub fn s3_act(g: u32, x: u8) -> u8 {
    let (a, s) = (g % 3, g / 3);
    let x = x as u32;
    ((a + if s == 1 { 3 - x } else { x }) % 3) as u8
}

pub fn s3_two_factors() -> S3Scenario {
    let group = GroupCtx::finite(z3_semidirect_z2());
    let points: Vec<(u8, u8)> = (0..3u8).flat_map(|i| (0..3u8).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let act = |g: u32, (i, j): (u8, u8)| (s3_act(g, i), s3_act(g, j));
    let orbit: HashSet<(u8, u8)> = (0..6).map(|g| act(g, points[0])).collect();
    let transitive = orbit.len() == points.len();
    let free = points.iter().all(|&y| (1..6).all(|g| act(g, y) != y));
    let partition = |proj: fn(&(u8, u8)) -> u8| {
        let mut m: BTreeMap<u8, Vec<(u8, u8)>> = BTreeMap::new();
        for y in &points {
            m.entry(proj(y)).or_default().push(*y);
        }
        m.into_values().collect::<Vec<_>>()
    };
    let partition_first = partition(|y| y.0);
    let partition_second = partition(|y| y.1);
    let subgroup = CofiniteSubgroup::finite_subset(&group, &[GroupElement::Fin(0), GroupElement::Fin(3)])
        .expect("{0} × ℤ_2 is a subgroup");
    S3Scenario { group, points, transitive, free, partition_first, partition_second, subgroup }
}

/// Point stabilizers in the finitary tree group at depth `N`, with the
/// nonidentity element `R` that swaps the second letter below a leading 1.
#[derive(Debug)]
pub struct TreeScenario {
    pub spec: OdometerSpec,
    pub r: GroupElement,
    /// `R` fixes the all-zero word at every level.
    pub r_in_all_stabilizers: bool,
    pub r_is_identity: bool,
}

impl TreeScenario {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "scenario",
            "name": "tree-nonfree",
            "depth": self.spec.depth_cap(),
            "r": self.spec.group().element_to_json(&self.r),
            "r_in_all_stabilizers": self.r_in_all_stabilizers,
            "r_is_identity": self.r_is_identity,
        })
    }
}

pub fn tree_nonfree(depth: u32) -> Result<TreeScenario> {
    if depth < 2 {
        return Err(Error::Usage("the non-freeness witness needs depth ≥ 2".into()));
    }
    let spec = OdometerSpec::tree_stabilizers(depth)?;
    let r = GroupElement::Tree(tree::swap(1, 1));
    let r_in_all_stabilizers = (1..=depth as usize).all(|n| spec.level(n).is_ok_and(|g| g.member(&r)));
    let r_is_identity = spec.group().is_identity(&r);
    Ok(TreeScenario { spec, r, r_in_all_stabilizers, r_is_identity })
}
