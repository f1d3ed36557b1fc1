//! (C,F)-parameters, their validation and transforms, the partial action and
//! the Radon–Nikodym cocycle.

mod domain;
mod point;
mod shape;
mod transform;
mod validate;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{GroupCtx, GroupElement};
use crate::measures::FinMeasure;
use crate::rational::{self, Q};

pub use domain::{
    check_measure_domain, check_minimal_domain, folner_defect, haar_totals, HaarTotals, MeasureDomain,
    MinimalDomain,
};
pub use point::{act, cylinder_measure, descend, rn_cocycle, rn_derivative, same_point, CFPoint};
pub use shape::{ElementSet, Shape};
pub use transform::{reduce, telescope, Reduced, ReductionSpec, Telescoped, Telescoping};
pub use validate::{validate_params, StageCheck, ValidationReport};

/// Default cap on the number of elements any single operation enumerates.
pub const ENUM_CAP: usize = 1 << 22;

/// How `ν_n` is determined on `F_n`.
#[derive(Clone, Debug)]
pub enum NuRule {
    /// `ν_0 = δ_{1_G}`.
    Point,
    /// The same weight at every element of `F_n`.
    Uniform(Q),
    Table(FinMeasure),
    /// `ν_n(fc) = ν_{n−1}(f)κ_n(c)` on `F_{n−1}C_n`; each remaining element
    /// (a spacer) gets `spacer_weight`.
    Recursive { spacer_weight: Q },
    /// `scale · ν_stage` of another parameter set, on the same shape.
    Delegate { base: CFParams, stage: usize, scale: Q },
}

/// One realized stage: `κ_n` (absent at `n = 0`), `F_n` and `ν_n`.
#[derive(Clone, Debug)]
pub struct Stage {
    pub n: usize,
    pub kappa: Option<FinMeasure>,
    pub shape: Shape,
    pub nu: NuRule,
}

impl Stage {
    pub fn kappa(&self) -> &FinMeasure {
        self.kappa.as_ref().expect("stage 0 carries no kappa")
    }
}

/// A source of stages. Implementations are pure functions of `n`.
pub trait StageRule: Send + Sync + fmt::Debug {
    fn stage(&self, n: usize) -> Result<Stage>;
    fn depth_cap(&self) -> usize;
    fn describe(&self) -> Value;
}

struct Inner {
    group: GroupCtx,
    rule: Box<dyn StageRule>,
    cache: Vec<OnceLock<Arc<Stage>>>,
}

/// A (C,F)-parameter sequence. Stages are generated on demand and memoized.
#[derive(Clone)]
pub struct CFParams(Arc<Inner>);

impl fmt::Debug for CFParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CFParams({:?})", self.0.rule)
    }
}

impl CFParams {
    pub fn from_rule(group: GroupCtx, rule: impl StageRule + 'static) -> Self {
        let cap = rule.depth_cap();
        CFParams(Arc::new(Inner { group, rule: Box::new(rule), cache: (0..=cap).map(|_| OnceLock::new()).collect() }))
    }

    /// Explicit prefix: `shapes[n] = F_n`, `nus[n] = ν_n`, `kappas[n-1] = κ_n`.
    pub fn explicit(group: GroupCtx, kappas: Vec<FinMeasure>, shapes: Vec<Shape>, nus: Vec<NuRule>) -> Result<Self> {
        if shapes.len() != nus.len() || shapes.is_empty() {
            return Err(Error::Usage("explicit params need matching F and nu lists, starting at stage 0".into()));
        }
        Ok(Self::from_rule(group, ExplicitRule { kappas, shapes, nus }))
    }

    pub fn group(&self) -> &GroupCtx {
        &self.0.group
    }

    pub fn depth_cap(&self) -> usize {
        self.0.cache.len() - 1
    }

    pub fn describe(&self) -> Value {
        self.0.rule.describe()
    }

    pub fn stage(&self, n: usize) -> Result<Arc<Stage>> {
        let slot = self.0.cache.get(n).ok_or(Error::DepthExceeded { stage: n, cap: self.depth_cap() })?;
        if let Some(s) = slot.get() {
            return Ok(s.clone());
        }
        let s = Arc::new(self.0.rule.stage(n)?);
        Ok(slot.get_or_init(|| s).clone())
    }

    pub fn kappa(&self, n: usize) -> Result<FinMeasure> {
        if n == 0 {
            return Err(Error::Usage("kappa is indexed from 1".into()));
        }
        Ok(self.stage(n)?.kappa().clone())
    }

    pub fn shape(&self, n: usize) -> Result<Shape> {
        Ok(self.stage(n)?.shape.clone())
    }

    /// `ν_n(f)`, zero off `F_n`.
    pub fn nu(&self, n: usize, f: &GroupElement) -> Result<Q> {
        let st = self.stage(n)?;
        if !st.shape.contains(f) {
            return Ok(Q::zero());
        }
        match &st.nu {
            NuRule::Point => Ok(if self.group().is_identity(f) { rational::one() } else { Q::zero() }),
            NuRule::Uniform(w) => Ok(w.clone()),
            NuRule::Table(m) => Ok(m.weight(f)),
            NuRule::Recursive { spacer_weight } => {
                let ctx = self.group();
                let prev = self.stage(n - 1)?;
                for (c, w) in st.kappa().atoms() {
                    let fp = ctx.mul(f, &ctx.inv(c));
                    if prev.shape.contains(&fp) {
                        return Ok(self.nu(n - 1, &fp)? * w);
                    }
                }
                Ok(spacer_weight.clone())
            }
            NuRule::Delegate { base, stage, scale } => Ok(base.nu(*stage, f)? * scale),
        }
    }

    /// `ν_n(F_n)`.
    pub fn nu_total(&self, n: usize) -> Result<Q> {
        let st = self.stage(n)?;
        match &st.nu {
            NuRule::Point => Ok(rational::one()),
            NuRule::Uniform(w) => Ok(w * Q::from_integer(st.shape.len().into())),
            NuRule::Table(m) => Ok(m.total()),
            NuRule::Recursive { spacer_weight } => {
                let covered = self.shape(n - 1)?.len() * st.kappa().len() as u128;
                let spacers = st.shape.len() - covered;
                Ok(self.nu_total(n - 1)? + spacer_weight * Q::from_integer(spacers.into()))
            }
            NuRule::Delegate { base, stage, scale } => Ok(base.nu_total(*stage)? * scale),
        }
    }

    /// The common weight of `ν_n` when it is constant on `F_n`.
    pub fn uniform_weight(&self, n: usize) -> Result<Option<Q>> {
        let st = self.stage(n)?;
        Ok(match &st.nu {
            NuRule::Point => Some(rational::one()),
            NuRule::Uniform(w) => Some(w.clone()),
            NuRule::Delegate { base, stage, scale } => base.uniform_weight(*stage)?.map(|w| w * scale),
            NuRule::Table(_) | NuRule::Recursive { .. } => None,
        })
    }

    /// Realized stages as JSON, for explicit export.
    pub fn to_explicit_json(&self, depth: usize, cap: usize) -> Result<Value> {
        let ctx = self.group();
        let mut shapes = Vec::new();
        let mut nus = Vec::new();
        let mut kappas = Vec::new();
        for n in 0..=depth {
            let st = self.stage(n)?;
            let elems = st.shape.elements(cap)?;
            let nu: Vec<Value> = elems
                .iter()
                .map(|f| Ok(json!([ctx.element_to_json(f), rational::to_string(&self.nu(n, f)?)])))
                .collect::<Result<_>>()?;
            shapes.push(Value::Array(elems.iter().map(|f| ctx.element_to_json(f)).collect()));
            nus.push(Value::Array(nu));
            if n > 0 {
                kappas.push(st.kappa().to_json(ctx));
            }
        }
        Ok(json!({"explicit": {"F": shapes, "nu": nus, "kappa": kappas}}))
    }

    /// Parses `{"explicit": {"F": […], "kappa": […], "nu": […]}}`.
    pub fn from_explicit_json(ctx: &GroupCtx, v: &Value) -> Result<Self> {
        let e = v.get("explicit").unwrap_or(v);
        let list = |k: &str| {
            e.get(k)
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| Error::Usage(format!("explicit params need a {k:?} list")))
        };
        let kappas = list("kappa")?
            .iter()
            .map(|m| FinMeasure::from_json(ctx, m))
            .collect::<Result<Vec<_>>>()?;
        let shapes = list("F")?
            .iter()
            .map(|s| {
                let elems = s
                    .as_array()
                    .ok_or_else(|| Error::Usage("each F_n must be a list".into()))?
                    .iter()
                    .map(|g| ctx.element_from_json(g))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Shape::explicit(elems))
            })
            .collect::<Result<Vec<_>>>()?;
        let nus = list("nu")?
            .iter()
            .enumerate()
            .map(|(n, m)| {
                if n == 0 {
                    Ok(NuRule::Point)
                } else {
                    FinMeasure::from_json(ctx, m).map(NuRule::Table)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(c) = e.get("C").and_then(Value::as_array) {
            for (i, cs) in c.iter().enumerate() {
                let listed: Vec<GroupElement> = cs
                    .as_array()
                    .ok_or_else(|| Error::Usage("each C_n must be a list".into()))?
                    .iter()
                    .map(|g| ctx.element_from_json(g))
                    .collect::<Result<_>>()?;
                let mut listed = listed;
                listed.sort();
                if kappas.get(i).map(|k| k.support_vec()) != Some(listed) {
                    return Err(Error::Validation(format!("supp kappa_{} differs from C_{}", i + 1, i + 1)));
                }
            }
        }
        Self::explicit(ctx.clone(), kappas, shapes, nus)
    }
}

#[derive(Debug)]
struct ExplicitRule {
    kappas: Vec<FinMeasure>,
    shapes: Vec<Shape>,
    nus: Vec<NuRule>,
}

impl StageRule for ExplicitRule {
    fn stage(&self, n: usize) -> Result<Stage> {
        if n > self.depth_cap() {
            return Err(Error::DepthExceeded { stage: n, cap: self.depth_cap() });
        }
        Ok(Stage {
            n,
            kappa: if n == 0 { None } else { Some(self.kappas[n - 1].clone()) },
            shape: self.shapes[n].clone(),
            nu: self.nus[n].clone(),
        })
    }

    fn depth_cap(&self) -> usize {
        (self.shapes.len() - 1).min(self.kappas.len())
    }

    fn describe(&self) -> Value {
        json!({"explicit": {"stages": self.depth_cap()}})
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::frac;
    use GroupElement::*;

    fn ints(v: &[i64]) -> Vec<GroupElement> {
        v.iter().map(|&x| Int(x)).collect()
    }

    /// Two stages over the integers with a nonuniform second kappa.
    pub(crate) fn small_params() -> CFParams {
        let z = GroupCtx::int_line();
        let k1 = FinMeasure::uniform(ints(&[0, 1, 4, 5]));
        let k2 = FinMeasure::new([
            (Int(0), frac(1, 2)),
            (Int(6), frac(1, 4)),
            (Int(16), frac(1, 8)),
            (Int(22), frac(1, 8)),
        ])
        .unwrap();
        let shapes = vec![Shape::singleton(&z), Shape::Interval(6), Shape::Interval(28)];
        let nus = vec![
            NuRule::Point,
            NuRule::Recursive { spacer_weight: frac(1, 4) },
            NuRule::Recursive { spacer_weight: frac(1, 16) },
        ];
        CFParams::explicit(z, vec![k1, k2], shapes, nus).unwrap()
    }

    #[test]
    fn recursive_nu_follows_the_product_rule() {
        let t = small_params();
        assert_eq!(t.nu(1, &Int(5)).unwrap(), frac(1, 4));
        assert_eq!(t.nu(1, &Int(2)).unwrap(), frac(1, 4));
        assert_eq!(t.nu(2, &Int(5 + 6)).unwrap(), frac(1, 16));
        assert_eq!(t.nu(2, &Int(5 + 16)).unwrap(), frac(1, 32));
        assert_eq!(t.nu(2, &Int(12)).unwrap(), frac(1, 16));
        assert_eq!(t.nu(2, &Int(28)).unwrap(), frac(0, 1));
        let total: Q = (0..28).map(|i| t.nu(2, &Int(i)).unwrap()).fold(Q::zero(), |a, b| a + b);
        assert_eq!(t.nu_total(2).unwrap(), total);
        assert!(t.stage(3).is_err());
    }

    #[test]
    fn explicit_json_round_trip() {
        let t = small_params();
        let v = t.to_explicit_json(2, 100).unwrap();
        let back = CFParams::from_explicit_json(t.group(), &v).unwrap();
        for n in 0..=2 {
            for f in 0..28 {
                assert_eq!(back.nu(n, &Int(f)).unwrap(), t.nu(n, &Int(f)).unwrap());
            }
        }
        assert_eq!(back.kappa(2).unwrap(), t.kappa(2).unwrap());
    }
}
