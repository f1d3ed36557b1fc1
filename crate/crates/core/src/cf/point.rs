use std::fmt;

use serde_json::{json, Value};

use super::CFParams;
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::rational::Q;

/// A point `(f_n; c_{n+1}, …, c_{n+D})` of `X_n`, truncated after `D` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CFPoint {
    pub base: usize,
    pub f: GroupElement,
    pub tail: Vec<GroupElement>,
}

impl fmt::Display for CFPoint {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "({}", self.f)?;
        for (i, c) in self.tail.iter().enumerate() {
            write!(out, "{}{c}", if i == 0 { "; " } else { ", " })?;
        }
        write!(out, ")@{}", self.base)
    }
}

impl CFPoint {
    /// Checks `f ∈ F_base` and `c_k ∈ C_k` for every tail entry.
    pub fn new(t: &CFParams, base: usize, f: GroupElement, tail: Vec<GroupElement>) -> Result<CFPoint> {
        t.group().check(&f)?;
        if !t.shape(base)?.contains(&f) {
            return Err(Error::NotInSet(format!("{f} in F_{base}")));
        }
        for (i, c) in tail.iter().enumerate() {
            let k = base + 1 + i;
            if !t.stage(k)?.kappa().contains(c) {
                return Err(Error::NotInSet(format!("{c} in C_{k}")));
            }
        }
        Ok(CFPoint { base, f, tail })
    }

    /// The last stage whose coordinate is known.
    pub fn horizon(&self) -> usize {
        self.base + self.tail.len()
    }

    /// Moves the base up to `level` via `X_n ⊂ X_level`.
    pub fn rebase(&self, t: &CFParams, level: usize) -> Result<CFPoint> {
        if level < self.base || level > self.horizon() {
            return Err(Error::Usage(format!(
                "cannot rebase a point of X_{} with horizon {} to level {level}",
                self.base,
                self.horizon()
            )));
        }
        let ctx = t.group();
        let k = level - self.base;
        let f = self.tail[..k].iter().fold(self.f.clone(), |acc, c| ctx.mul(&acc, c));
        Ok(CFPoint { base: level, f, tail: self.tail[k..].to_vec() })
    }

    pub fn to_json(&self, t: &CFParams) -> Value {
        let ctx = t.group();
        json!({
            "base": self.base,
            "f": ctx.element_to_json(&self.f),
            "tail": self.tail.iter().map(|c| ctx.element_to_json(c)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(t: &CFParams, v: &Value) -> Result<CFPoint> {
        let ctx = t.group();
        let base = v.get("base").and_then(Value::as_u64).unwrap_or(0) as usize;
        let f = match v.get("f") {
            Some(f) => ctx.element_from_json(f)?,
            None => ctx.identity(),
        };
        let tail = v
            .get("tail")
            .and_then(Value::as_array)
            .map(|a| a.iter().map(|c| ctx.element_from_json(c)).collect::<Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default();
        CFPoint::new(t, base, f, tail)
    }
}

/// `μ([f]_n) = ν_n(f)`.
pub fn cylinder_measure(t: &CFParams, f: &GroupElement, n: usize) -> Result<Q> {
    if !t.shape(n)?.contains(f) {
        return Err(Error::NotInSet(format!("{f} in F_{n}")));
    }
    t.nu(n, f)
}

/// `T_g x`: the least `m` with `g f_n c_{n+1}⋯c_m ∈ F_m` re-bases the point.
/// `None` when the known tail is too short to absorb `g`.
pub fn act(t: &CFParams, g: &GroupElement, x: &CFPoint) -> Result<Option<CFPoint>> {
    let ctx = t.group();
    ctx.check(g)?;
    let mut y = ctx.mul(g, &x.f);
    for m in x.base..=x.horizon() {
        if m > x.base {
            y = ctx.mul(&y, &x.tail[m - x.base - 1]);
        }
        if t.shape(m)?.contains(&y) {
            return Ok(Some(CFPoint { base: m, f: y, tail: x.tail[m - x.base..].to_vec() }));
        }
    }
    Ok(None)
}

/// Writes the point over `X_level`, `level ≤ base`, by peeling `f = f'c` with
/// `f' ∈ F_{m−1}`, `c ∈ C_m`. `None` when `f` sits in a spacer above `level`.
pub fn descend(t: &CFParams, x: &CFPoint, level: usize) -> Result<Option<CFPoint>> {
    let ctx = t.group();
    let mut f = x.f.clone();
    let mut tail = x.tail.clone();
    for m in (level + 1..=x.base).rev() {
        let prev = t.shape(m - 1)?;
        let st = t.stage(m)?;
        let split = st.kappa().support().find_map(|c| {
            let fp = ctx.mul(&f, &ctx.inv(c));
            prev.contains(&fp).then(|| (fp, c.clone()))
        });
        match split {
            Some((fp, c)) => {
                f = fp;
                tail.insert(0, c);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(CFPoint { base: level.min(x.base), f, tail }))
}

/// Whether two truncated points agree as far as both are known.
pub fn same_point(t: &CFParams, x: &CFPoint, y: &CFPoint) -> Result<bool> {
    let level = x.base.max(y.base);
    let top = x.horizon().min(y.horizon());
    if level > top {
        return Ok(false);
    }
    let (a, b) = (x.rebase(t, level)?, y.rebase(t, level)?);
    let k = top - level;
    Ok(a.f == b.f && a.tail[..k] == b.tail[..k])
}

/// `ρ(x, y) = ν_n(f_n)/ν_n(f'_n) · Π_{m>n} κ_m(c_m)/κ_m(c'_m)` at the common
/// level `n = max(base)`. Both points must share their horizon, which makes
/// them tail-equivalent in the truncated space.
pub fn rn_cocycle(t: &CFParams, x: &CFPoint, y: &CFPoint) -> Result<Q> {
    if x.horizon() != y.horizon() {
        return Err(Error::NotTailEquivalent(format!(
            "horizons {} and {} differ",
            x.horizon(),
            y.horizon()
        )));
    }
    let n = x.base.max(y.base);
    let (a, b) = (x.rebase(t, n)?, y.rebase(t, n)?);
    let mut r = t.nu(n, &a.f)? / t.nu(n, &b.f)?;
    for (i, (c, cp)) in a.tail.iter().zip(&b.tail).enumerate() {
        if c != cp {
            let k = t.stage(n + 1 + i)?;
            r = r * k.kappa().weight(c) / k.kappa().weight(cp);
        }
    }
    Ok(r)
}

/// `dμ∘T_g/dμ (x) = ρ(T_g x, x)`, or `None` when `T_g x` is not realized.
pub fn rn_derivative(t: &CFParams, g: &GroupElement, x: &CFPoint) -> Result<Option<Q>> {
    match act(t, g, x)? {
        Some(y) => rn_cocycle(t, &y, x).map(Some),
        None => Ok(None),
    }
}
