//! Column geometry for (C,F)-parameters over ℤ with interval shapes, the
//! induced map on `X_0` and a first-return simulation.

use serde_json::{json, Value};

use crate::cf::{act, descend, CFParams, CFPoint, ENUM_CAP};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::rational::{self, Q};

/// Levels `I(i, n)` for `i < h_n` as half-open intervals with exact endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnLayout {
    pub n: usize,
    pub levels: Vec<(Q, Q)>,
    /// `(c, first index)` of each copy of column `n − 1`; empty at `n = 0`.
    pub copies: Vec<(i64, i64)>,
    /// Indices not covered by a copy.
    pub spacers: Vec<i64>,
}

impl ColumnLayout {
    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn total(&self) -> Q {
        self.levels.iter().map(|(a, b)| b - a).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "height": self.height(),
            "total": rational::to_string(&self.total()),
            "levels": self.levels.iter().map(|(a, b)| json!([rational::to_string(a), rational::to_string(b)])).collect::<Vec<_>>(),
            "copies": self.copies.iter().map(|(c, s)| json!({"c": c, "start": s})).collect::<Vec<_>>(),
            "spacers": self.spacers,
        })
    }
}

fn height(t: &CFParams, n: usize) -> Result<i64> {
    t.shape(n)?
        .interval_len()
        .ok_or_else(|| Error::Usage(format!("F_{n} is not an interval {{0, …, h − 1}}")))
}

fn support_ints(t: &CFParams, n: usize) -> Result<Vec<(i64, Q)>> {
    let mut out = t
        .kappa(n)?
        .atoms()
        .map(|(c, w)| c.as_int().map(|c| (c, w.clone())).ok_or_else(|| Error::Usage("parameters are not over ℤ".into())))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|(c, _)| *c);
    Ok(out)
}

/// Layouts for stages `0..=N`. Each level of stage `n` is cut left to right in
/// increasing `c`; spacer levels fill `[ν_n(F_n), ν_{n+1}(F_{n+1}))` bottom up.
pub fn columns(t: &CFParams, n_max: usize) -> Result<Vec<ColumnLayout>> {
    if height(t, 0)? != 1 {
        return Err(Error::Usage("F_0 must be {0}".into()));
    }
    let mut out = vec![ColumnLayout { n: 0, levels: vec![(Q::default(), rational::one())], copies: vec![], spacers: vec![] }];
    for n in 1..=n_max {
        let h = height(t, n)?;
        if h as usize > ENUM_CAP {
            return Err(Error::Resource(format!("column {n} has {h} levels")));
        }
        let prev = out.last().expect("stage 0 present");
        let cs = support_ints(t, n)?;
        let mut levels: Vec<Option<(Q, Q)>> = vec![None; h as usize];
        for (i, (a, b)) in prev.levels.iter().enumerate() {
            let len = b - a;
            let mut left = a.clone();
            for (c, w) in &cs {
                let idx = i as i64 + c;
                if !(0..h).contains(&idx) || levels[idx as usize].is_some() {
                    return Err(Error::Validation(format!("copy at {c} leaves F_{n} or overlaps another")));
                }
                let right = &left + &len * w;
                levels[idx as usize] = Some((left.clone(), right.clone()));
                left = right;
            }
        }
        let mut top = prev.total();
        let mut spacers = Vec::new();
        for (i, slot) in levels.iter_mut().enumerate() {
            if slot.is_none() {
                let w = t.nu(n, &GroupElement::Int(i as i64))?;
                let right = &top + &w;
                *slot = Some((top.clone(), right.clone()));
                top = right;
                spacers.push(i as i64);
            }
        }
        let copies = cs.iter().map(|(c, _)| (*c, *c)).collect::<Vec<_>>();
        out.push(ColumnLayout { n, levels: levels.into_iter().map(|l| l.expect("filled")).collect(), copies, spacers });
    }
    Ok(out)
}

/// `s_{n+1}(c) = c⁺ − c − h_n`, with `h_{n+1}` in place of `c⁺` for the top copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacerMap {
    pub n: usize,
    pub h: i64,
    pub h_next: i64,
    pub s: Vec<(i64, i64)>,
}

impl SpacerMap {
    /// `h_{n+1} = Σ (h_n + s(c))`.
    pub fn consistent(&self) -> bool {
        self.s.iter().map(|(_, s)| self.h + s).sum::<i64>() == self.h_next
    }

    pub fn get(&self, c: i64) -> Option<i64> {
        self.s.iter().find(|(d, _)| *d == c).map(|(_, s)| *s)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "h": self.h,
            "h_next": self.h_next,
            "s": self.s.iter().map(|(c, s)| json!({"c": c, "s": s})).collect::<Vec<_>>(),
            "consistent": self.consistent(),
        })
    }
}

/// Spacers inserted between the copies of column `n` in column `n + 1`.
pub fn spacers(t: &CFParams, n: usize) -> Result<SpacerMap> {
    let h = height(t, n)?;
    let h_next = height(t, n + 1)?;
    let cs: Vec<i64> = support_ints(t, n + 1)?.into_iter().map(|(c, _)| c).collect();
    let s = cs
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, cs.get(i + 1).copied().unwrap_or(h_next) - c - h))
        .collect();
    Ok(SpacerMap { n, h, h_next, s })
}

/// The induced map on `X_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Induced {
    /// `Rx` and the ceiling `ϑ(x)`.
    Step { rx: CFPoint, theta: i64 },
    /// Every known coordinate is maximal.
    Undefined,
}

/// `Rx = (0, …, 0, c_n⁺, c_{n+1}, …)` at the first `n` with `c_n ≠ max C_n`,
/// and `ϑ(x) = s_n(c_n)`.
pub fn induced_base(t: &CFParams, x: &CFPoint) -> Result<Induced> {
    if x.base != 0 {
        return Err(Error::Usage("induced map is defined on X_0".into()));
    }
    for (i, c) in x.tail.iter().enumerate() {
        let n = i + 1;
        let c = c.as_int().ok_or_else(|| Error::Usage("parameters are not over ℤ".into()))?;
        let cs: Vec<i64> = support_ints(t, n)?.into_iter().map(|(c, _)| c).collect();
        let pos = cs.iter().position(|&d| d == c).ok_or_else(|| Error::NotInSet(format!("{c} in C_{n}")))?;
        if pos + 1 < cs.len() {
            if height(t, n)? - 1 != height(t, n - 1)? - 1 + cs[cs.len() - 1] {
                return Err(Error::Validation(format!("F_{n} has spacers on top")));
            }
            let mut tail: Vec<GroupElement> = (1..n).map(|k| Ok(GroupElement::Int(support_ints(t, k)?[0].0))).collect::<Result<_>>()?;
            tail.push(GroupElement::Int(cs[pos + 1]));
            tail.extend(x.tail[n..].iter().cloned());
            let theta = spacers(t, n - 1)?.get(c).expect("c is in C_n");
            return Ok(Induced::Step { rx: CFPoint { base: 0, f: x.f.clone(), tail }, theta });
        }
    }
    Ok(Induced::Undefined)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FirstReturn {
    Returned { point: CFPoint, time: u64 },
    /// The step cap or the known coordinates ran out.
    Exhausted { steps: u64 },
}

/// Iterates `T_1` from `x ∈ X_0` until the orbit is back in `X_0`.
pub fn first_return_oracle(t: &CFParams, x: &CFPoint, step_cap: u64) -> Result<FirstReturn> {
    let one = GroupElement::Int(1);
    let mut y = x.clone();
    for step in 1..=step_cap {
        match act(t, &one, &y)? {
            None => return Ok(FirstReturn::Exhausted { steps: step - 1 }),
            Some(z) => {
                if let Some(back) = descend(t, &z, 0)? {
                    return Ok(FirstReturn::Returned { point: back, time: step });
                }
                y = z;
            }
        }
    }
    Ok(FirstReturn::Exhausted { steps: step_cap })
}
