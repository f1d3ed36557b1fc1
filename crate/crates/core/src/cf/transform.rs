//! Telescopings and reductions of parameter sequences, with their point maps.

use std::fmt;
use std::sync::Arc;

use num_traits::One;
use serde_json::{json, Value};

use super::{CFParams, CFPoint, NuRule, Stage, StageRule, ENUM_CAP};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::measures::FinMeasure;
use crate::rational::{self, Q};
use crate::verdict::Verdict;

/// A strictly increasing sequence `l` with `l_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Telescoping {
    /// A finite prefix `l_0, …, l_k`; undefined beyond it.
    Explicit(Vec<usize>),
    /// `l_n = step·n`.
    Linear(usize),
    /// `(l∘m)_n = l_{m_n}`.
    Composed(Box<Telescoping>, Box<Telescoping>),
}

impl Telescoping {
    pub fn identity() -> Self {
        Telescoping::Linear(1)
    }

    pub fn get(&self, n: usize) -> Option<usize> {
        match self {
            Telescoping::Explicit(v) => v.get(n).copied(),
            Telescoping::Linear(s) => Some(s * n),
            Telescoping::Composed(l, m) => l.get(m.get(n)?),
        }
    }

    pub fn compose(&self, m: &Telescoping) -> Telescoping {
        Telescoping::Composed(Box::new(self.clone()), Box::new(m.clone()))
    }

    fn check(&self) -> Result<()> {
        if self.get(0) != Some(0) {
            return Err(Error::Usage("a telescoping must start with l_0 = 0".into()));
        }
        match self {
            Telescoping::Explicit(v) if v.windows(2).any(|w| w[1] <= w[0]) => {
                Err(Error::Usage("a telescoping must be strictly increasing".into()))
            }
            Telescoping::Linear(0) => Err(Error::Usage("a telescoping must be strictly increasing".into())),
            Telescoping::Composed(l, m) => l.check().and(m.check()),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Telescoping::Explicit(v) => json!(v),
            Telescoping::Linear(s) => json!({"linear": s}),
            Telescoping::Composed(l, m) => json!({"compose": [l.to_json(), m.to_json()]}),
        }
    }

    /// `[0, 2, 4]`, `{"linear": 2}` or `{"compose": [l, m]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(a) = v.as_array() {
            let l = a
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Usage(format!("bad telescoping {v}")))?;
            return Ok(Telescoping::Explicit(l));
        }
        if let Some(s) = v.get("linear").and_then(Value::as_u64) {
            return Ok(Telescoping::Linear(s as usize));
        }
        if let Some([l, m]) = v.get("compose").and_then(Value::as_array).map(Vec::as_slice) {
            return Ok(Telescoping::from_json(l)?.compose(&Telescoping::from_json(m)?));
        }
        Err(Error::Usage(format!("bad telescoping {v}")))
    }
}

#[derive(Debug)]
struct TelescopeRule {
    base: CFParams,
    l: Telescoping,
    cap: usize,
}

impl StageRule for TelescopeRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        let ln = self.l.get(n).filter(|&x| x <= self.base.depth_cap()).ok_or(Error::DepthExceeded { stage: n, cap: self.cap })?;
        let kappa = if n == 0 {
            None
        } else {
            let lp = self.l.get(n - 1).expect("telescoping defined below n");
            let mut size = 1u128;
            let mut acc = FinMeasure::dirac(self.base.group().identity());
            for k in lp + 1..=ln {
                let kk = self.base.kappa(k)?;
                size *= kk.len() as u128;
                if size > ENUM_CAP as u128 {
                    return Err(Error::Resource(format!("telescoped C_{n} would have {size} atoms")));
                }
                acc = acc.convolve(self.base.group(), &kk)?;
            }
            Some(acc)
        };
        Ok(Stage {
            n,
            kappa,
            shape: self.base.shape(ln)?,
            nu: NuRule::Delegate { base: self.base.clone(), stage: ln, scale: rational::one() },
        })
    }

    fn depth_cap(&self) -> usize {
        self.cap
    }

    fn describe(&self) -> Value {
        json!({"telescoping": {"of": self.base.describe(), "l": self.l.to_json()}})
    }
}

/// The `l`-telescoping together with its canonical point map.
#[derive(Clone, Debug)]
pub struct Telescoped {
    pub params: CFParams,
    pub base: CFParams,
    pub l: Telescoping,
}

/// `C̃_{n+1} = C_{l_n+1}⋯C_{l_{n+1}}`, `κ̃_{n+1} = κ_{l_n+1}*⋯*κ_{l_{n+1}}`,
/// `F̃_n = F_{l_n}`, `ν̃_n = ν_{l_n}`.
pub fn telescope(t: &CFParams, l: &Telescoping) -> Result<Telescoped> {
    l.check()?;
    let mut cap = 0;
    while let Some(x) = l.get(cap + 1) {
        if x > t.depth_cap() {
            break;
        }
        if x <= l.get(cap).unwrap_or(0) {
            return Err(Error::Usage("a telescoping must be strictly increasing".into()));
        }
        cap += 1;
    }
    if cap == 0 {
        return Err(Error::DepthExceeded { stage: l.get(1).unwrap_or(0), cap: t.depth_cap() });
    }
    let rule = TelescopeRule { base: t.clone(), l: l.clone(), cap };
    Ok(Telescoped { params: CFParams::from_rule(t.group().clone(), rule), base: t.clone(), l: l.clone() })
}

impl Telescoped {
    /// `ι_l`: re-bases to the least `l_k ≥ base` and multiplies tail blocks.
    /// A trailing incomplete block is dropped.
    pub fn iota(&self, x: &CFPoint) -> Result<CFPoint> {
        let ctx = self.base.group();
        let mut k = 0;
        while self.l.get(k).ok_or(Error::DepthExceeded { stage: k, cap: self.params.depth_cap() })? < x.base {
            k += 1;
        }
        let lk = self.l.get(k).expect("checked above");
        if lk > x.horizon() {
            return Err(Error::Usage(format!("point horizon {} is below l_{k} = {lk}", x.horizon())));
        }
        let y = x.rebase(&self.base, lk)?;
        let mut tail = Vec::new();
        let mut j = k;
        while let Some(next) = self.l.get(j + 1).filter(|&e| e <= x.horizon()) {
            let from = self.l.get(j).expect("defined") - lk;
            let block = y.tail[from..next - lk].iter().fold(ctx.identity(), |acc, c| ctx.mul(&acc, c));
            tail.push(block);
            j += 1;
        }
        Ok(CFPoint { base: k, f: y.f, tail })
    }
}

/// Choice of `A_n ⊂ C_n`.
#[derive(Clone)]
pub enum ReductionSpec {
    /// `A_1, …, A_k`; `A_n = C_n` afterwards.
    Prefix(Vec<Vec<GroupElement>>),
    /// `A_n` as a function of `n` and `κ_n`, applied at every stage.
    EveryStage(Arc<dyn Fn(usize, &FinMeasure) -> Vec<GroupElement> + Send + Sync>),
}

impl fmt::Debug for ReductionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionSpec::Prefix(v) => write!(f, "Prefix({v:?})"),
            ReductionSpec::EveryStage(_) => write!(f, "EveryStage(..)"),
        }
    }
}

impl ReductionSpec {
    fn subset(&self, n: usize, kappa: &FinMeasure) -> Vec<GroupElement> {
        match self {
            ReductionSpec::Prefix(v) => v.get(n - 1).cloned().unwrap_or_else(|| kappa.support_vec()),
            ReductionSpec::EveryStage(f) => f(n, kappa),
        }
    }
}

#[derive(Debug)]
struct ReduceRule {
    base: CFParams,
    spec: ReductionSpec,
}

impl ReduceRule {
    fn kept_mass(&self, n: usize) -> Result<Q> {
        let kappa = self.base.kappa(n)?;
        let a = self.spec.subset(n, &kappa);
        Ok(kappa.mass(|c| a.contains(c)))
    }

    fn scaling(&self, n: usize) -> Result<Q> {
        (1..=n).try_fold(rational::one(), |acc, j| Ok(acc * self.kept_mass(j)?))
    }
}

impl StageRule for ReduceRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        let shape = self.base.shape(n)?;
        if n == 0 {
            let nu = self.base.stage(0)?.nu.clone();
            return Ok(Stage { n, kappa: None, shape, nu });
        }
        let kappa = self.base.kappa(n)?;
        let a = self.spec.subset(n, &kappa);
        let reduced = kappa.restrict(|c| a.contains(c)).normalize()?;
        let scale = rational::one() / self.scaling(n)?;
        Ok(Stage { n, kappa: Some(reduced), shape, nu: NuRule::Delegate { base: self.base.clone(), stage: n, scale } })
    }

    fn depth_cap(&self) -> usize {
        self.base.depth_cap()
    }

    fn describe(&self) -> Value {
        json!({"reduction": {"of": self.base.describe(), "spec": format!("{:?}", self.spec)}})
    }
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub params: CFParams,
    pub base: CFParams,
    /// Evidence for `Σ(1 − κ_n(A_n)) < ∞` over the probed stages.
    pub deficits: Verdict,
    rule: Arc<ReduceRule>,
}

/// The `A`-reduction: `κ'_n = κ_n|A_n / κ_n(A_n)` and
/// `ν'_n = ν_n / Π_{j≤n} κ_j(A_j)` on the same `F_n`.
///
/// Rejects when the deficits `1 − κ_n(A_n)` over `probe` stages do not
/// indicate summability or their sum reaches `bound`.
pub fn reduce(t: &CFParams, spec: &ReductionSpec, probe: usize, threshold: &Q, bound: &Q) -> Result<Reduced> {
    let probe = match spec {
        ReductionSpec::Prefix(v) => {
            if v.len() > t.depth_cap() {
                return Err(Error::DepthExceeded { stage: v.len(), cap: t.depth_cap() });
            }
            probe.max(v.len()).min(t.depth_cap())
        }
        ReductionSpec::EveryStage(_) => probe.min(t.depth_cap()),
    };
    let ctx = t.group();
    let mut deficits = Vec::with_capacity(probe);
    for n in 1..=probe {
        let kappa = t.kappa(n)?;
        let a = spec.subset(n, &kappa);
        if let Some(bad) = a.iter().find(|c| !kappa.contains(c)) {
            return Err(Error::NotInSet(format!("{bad} of A_{n} in C_{n}")));
        }
        if !a.contains(&ctx.identity()) {
            return Err(Error::Usage(format!("A_{n} must contain the identity")));
        }
        deficits.push(rational::one() - kappa.mass(|c| a.contains(c)));
    }
    let verdict = Verdict::for_series(1, deficits, threshold);
    let summable = match spec {
        ReductionSpec::Prefix(_) => true,
        ReductionSpec::EveryStage(_) => verdict.is_positive(),
    };
    let total = verdict.partial_sums.last().cloned().unwrap_or_else(rational::zero);
    if !summable || &total >= bound {
        return Err(Error::Validation(format!(
            "reduction deficits are not summable at probe depth {probe} (verdict {}, partial sum {})",
            verdict.tag.as_str(),
            rational::to_string(&total)
        )));
    }
    let rule = Arc::new(ReduceRule { base: t.clone(), spec: spec.clone() });
    let params = CFParams::from_rule(ctx.clone(), SharedRule(rule.clone()));
    Ok(Reduced { params, base: t.clone(), deficits: verdict, rule })
}

#[derive(Debug)]
struct SharedRule(Arc<ReduceRule>);

impl StageRule for SharedRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        self.0.stage(n)
    }
    fn depth_cap(&self) -> usize {
        self.0.depth_cap()
    }
    fn describe(&self) -> Value {
        self.0.describe()
    }
}

impl Reduced {
    /// `Π_{m≤depth} κ_m(A_m)`.
    pub fn scaling(&self, depth: usize) -> Result<Q> {
        self.rule.scaling(depth)
    }

    /// `ι_A`: a point of the reduced space read in the original space.
    pub fn iota(&self, x: &CFPoint) -> Result<CFPoint> {
        CFPoint::new(&self.params, x.base, x.f.clone(), x.tail.clone())?;
        CFPoint::new(&self.base, x.base, x.f.clone(), x.tail.clone())
    }

    /// Checks `μ([f]_D) = Π_{m≤D} κ_m(A_m) · μ'([f]_D)` for the given `f ∈ F_D`.
    pub fn scaling_holds(&self, depth: usize, f: &GroupElement) -> Result<bool> {
        let lhs = self.base.nu(depth, f)?;
        let rhs = self.scaling(depth)? * self.params.nu(depth, f)?;
        Ok(lhs == rhs && (depth == 0 || self.scaling(depth)? <= Q::one()))
    }
}
