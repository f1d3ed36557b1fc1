//! Tower shapes `F_n`: explicit sets, integer intervals and Heisenberg boxes.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{GroupCtx, GroupElement};

/// An explicit finite set with fast membership and a canonical order.
#[derive(Debug)]
pub struct ElementSet {
    sorted: Vec<GroupElement>,
    members: HashSet<GroupElement>,
}

impl ElementSet {
    pub fn new(elements: impl IntoIterator<Item = GroupElement>) -> Self {
        let members: HashSet<GroupElement> = elements.into_iter().collect();
        let mut sorted: Vec<GroupElement> = members.iter().cloned().collect();
        sorted.sort();
        ElementSet { sorted, members }
    }
}

#[derive(Clone, Debug)]
pub enum Shape {
    Explicit(Arc<ElementSet>),
    /// `{0, …, len−1}` in the integers.
    Interval(i64),
    /// `Π(a,b,c) = {(x,y,z) : 0 ≤ x < a, 0 ≤ y < b, 0 ≤ z < c}`.
    HeisBox { a: i64, b: i64, c: i64 },
}

impl Shape {
    pub fn explicit(elements: impl IntoIterator<Item = GroupElement>) -> Shape {
        Shape::Explicit(Arc::new(ElementSet::new(elements)))
    }

    pub fn singleton(ctx: &GroupCtx) -> Shape {
        Shape::explicit([ctx.identity()])
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (Shape::Explicit(s), _) => s.members.contains(g),
            (Shape::Interval(h), GroupElement::Int(x)) => (0..*h).contains(x),
            (Shape::HeisBox { a, b, c }, GroupElement::Heis([x, y, z])) => {
                (0..*a).contains(x) && (0..*b).contains(y) && (0..*c).contains(z)
            }
            _ => false,
        }
    }

    pub fn len(&self) -> u128 {
        match self {
            Shape::Explicit(s) => s.sorted.len() as u128,
            Shape::Interval(h) => *h as u128,
            Shape::HeisBox { a, b, c } => *a as u128 * *b as u128 * *c as u128,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enumerates the shape in canonical order, refusing beyond `cap` elements.
    pub fn elements(&self, cap: usize) -> Result<Vec<GroupElement>> {
        if self.len() > cap as u128 {
            return Err(Error::Resource(format!("shape of size {} exceeds enumeration cap {cap}", self.len())));
        }
        Ok(match self {
            Shape::Explicit(s) => s.sorted.clone(),
            Shape::Interval(h) => (0..*h).map(GroupElement::Int).collect(),
            Shape::HeisBox { a, b, c } => {
                let mut v = Vec::with_capacity(self.len() as usize);
                for x in 0..*a {
                    for y in 0..*b {
                        for z in 0..*c {
                            v.push(GroupElement::Heis([x, y, z]));
                        }
                    }
                }
                v
            }
        })
    }

    /// `h` when the shape is the interval `{0,…,h−1}`.
    pub fn interval_len(&self) -> Option<i64> {
        match self {
            Shape::Interval(h) => Some(*h),
            Shape::Explicit(s) => {
                let h = s.sorted.len() as i64;
                let ok = s.sorted.iter().enumerate().all(|(i, g)| *g == GroupElement::Int(i as i64));
                ok.then_some(h)
            }
            Shape::HeisBox { .. } => None,
        }
    }

    /// Decides `self·c ⊂ other` without enumeration when both shapes are
    /// intervals or both are boxes.
    pub fn right_translate_within(&self, c: &GroupElement, other: &Shape) -> Option<bool> {
        match (self, c, other) {
            (Shape::Interval(h), GroupElement::Int(c), Shape::Interval(h2)) => Some(*c >= 0 && c + h - 1 < *h2),
            (Shape::HeisBox { a, b, c: cz }, GroupElement::Heis([gx, gy, gz]), Shape::HeisBox { a: a2, b: b2, c: c2 }) => {
                let x_ok = *gx >= 0 && a - 1 + gx < *a2;
                let y_ok = *gy >= 0 && b - 1 + gy < *b2;
                let shear = (a - 1) * gy;
                let zmin = gz + shear.min(0);
                let zmax = cz - 1 + gz + shear.max(0);
                Some(x_ok && y_ok && zmin >= 0 && zmax < *c2)
            }
            _ => None,
        }
    }

    /// Decides `self·c1 ∩ self·c2 = ∅` without enumeration for intervals and boxes.
    pub fn translates_disjoint(&self, ctx: &GroupCtx, c1: &GroupElement, c2: &GroupElement) -> Option<bool> {
        match self {
            Shape::Interval(h) => Some((c1.as_int()? - c2.as_int()?).abs() >= *h),
            Shape::HeisBox { a, b, c } => {
                // f·c1 = f'·c2 iff f'⁻¹f = c2·c1⁻¹ = (dx, dy, dz), and
                // f'⁻¹f = (x−x', y−y', z−z' − x'(y−y')) over the box.
                let [dx, dy, dz] = ctx.mul(c2, &ctx.inv(c1)).as_heis()?;
                if dx.abs() >= *a || dy.abs() >= *b {
                    return Some(true);
                }
                let lo = 0.max(-dx);
                let hi = (a - 1).min(a - 1 - dx);
                let meets = (lo..=hi).any(|xp| (dz + xp * dy).abs() < *c);
                Some(!meets)
            }
            Shape::Explicit(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Shape::Explicit(s) => format!("explicit set of {} elements", s.sorted.len()),
            Shape::Interval(h) => format!("interval {{0..{}}}", h - 1),
            Shape::HeisBox { a, b, c } => format!("box Pi({a},{b},{c})"),
        }
    }
}
