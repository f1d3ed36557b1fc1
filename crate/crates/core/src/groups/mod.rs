//! Concrete countable groups, their cofinite subgroups and coset spaces.

mod coset;
pub mod lattice;
mod subgroup;
pub mod tree;

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub use coset::{coset_table, CosetSpace, DEFAULT_COSET_CAP};
pub use subgroup::{conjugate, normal_core, CofiniteSubgroup, CosetKey, Family};

/// A group element in canonical form. Equality and hashing are structural.
///
/// Integer coordinates are `i64` with checked arithmetic; an overflow panics
/// with a message naming the group operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Int(i64),
    Vector(Vec<i64>),
    /// `(x, y, z)` in the discrete Heisenberg group.
    Heis([i64; 3]),
    /// Index into an explicit multiplication table.
    Fin(u32),
    /// Swap-bit table of a finitary tree map.
    Tree(u64),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(n) => write!(f, "{n}"),
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            GroupElement::Heis([x, y, z]) => write!(f, "({x},{y},{z})"),
            GroupElement::Fin(i) => write!(f, "#{i}"),
            GroupElement::Tree(b) => write!(f, "tree:{b:#x}"),
        }
    }
}

impl GroupElement {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroupElement::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_heis(&self) -> Option<[i64; 3]> {
        match self {
            GroupElement::Heis(h) => Some(*h),
            _ => None,
        }
    }
}

fn ck(v: Option<i64>) -> i64 {
    v.expect("integer overflow in group arithmetic")
}

/// An explicit finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    order: u32,
    table: Vec<u32>,
    inverse: Vec<u32>,
    identity: u32,
}

impl FiniteTable {
    /// Builds the table, checking closure, identity, inverses and associativity.
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n || r.iter().any(|&x| x as usize >= n)) {
            return Err(Error::Usage("multiplication table must be square over 0..n".into()));
        }
        let at = |a: usize, b: usize| rows[a][b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::Usage("table has no identity".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let i = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| Error::Usage(format!("element {g} has no inverse")))?;
            inverse.push(i as u32);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::Usage("table is not associative".into()));
                    }
                }
            }
        }
        Ok(Self {
            order: n as u32,
            table: rows.into_iter().flatten().collect(),
            inverse,
            identity: identity as u32,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[(a * self.order + b) as usize]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.order as usize).map(|r| r.to_vec()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    IntLine,
    IntLattice(usize),
    Heisenberg,
    FiniteTable(FiniteTable),
    TreeDepth(u32),
}

#[derive(Debug, PartialEq, Eq)]
struct CtxInner {
    kind: GroupKind,
    generators: Vec<GroupElement>,
}

/// A group together with a fixed, ordered generating list.
///
/// Cloning is cheap; the data is shared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupCtx(Arc<CtxInner>);

impl GroupCtx {
    pub fn int_line() -> Self {
        Self::with_generators(GroupKind::IntLine, vec![GroupElement::Int(1)])
    }

    pub fn int_lattice(d: usize) -> Self {
        let gens = (0..d)
            .map(|i| GroupElement::Vector((0..d).map(|j| i64::from(i == j)).collect()))
            .collect();
        Self::with_generators(GroupKind::IntLattice(d), gens)
    }

    /// Generated by `(1,0,0)`, `(0,1,0)` and the central `(0,0,1)`.
    pub fn heisenberg() -> Self {
        let gens = vec![
            GroupElement::Heis([1, 0, 0]),
            GroupElement::Heis([0, 1, 0]),
            GroupElement::Heis([0, 0, 1]),
        ];
        Self::with_generators(GroupKind::Heisenberg, gens)
    }

    /// Uses every non-identity element as a generator.
    pub fn finite(table: FiniteTable) -> Self {
        let gens = (0..table.order)
            .filter(|&g| g != table.identity)
            .map(GroupElement::Fin)
            .collect();
        Self::with_generators(GroupKind::FiniteTable(table), gens)
    }

    /// Generated by the single-node swaps.
    pub fn tree(depth: u32) -> Result<Self> {
        if depth == 0 || depth > tree::MAX_DEPTH {
            return Err(Error::Usage(format!("tree depth must lie in 1..={}", tree::MAX_DEPTH)));
        }
        let gens = tree::all_swaps(depth).into_iter().map(GroupElement::Tree).collect();
        Ok(Self::with_generators(GroupKind::TreeDepth(depth), gens))
    }

    pub fn with_generators(kind: GroupKind, generators: Vec<GroupElement>) -> Self {
        GroupCtx(Arc::new(CtxInner { kind, generators }))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.0.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.0.generators
    }

    pub fn is_abelian(&self) -> bool {
        match self.kind() {
            GroupKind::IntLine | GroupKind::IntLattice(_) => true,
            GroupKind::Heisenberg | GroupKind::TreeDepth(_) => false,
            GroupKind::FiniteTable(t) => (0..t.order)
                .all(|a| (0..t.order).all(|b| t.mul(a, b) == t.mul(b, a))),
        }
    }

    /// Order of the group when it is finite.
    pub fn finite_order(&self) -> Option<u64> {
        match self.kind() {
            GroupKind::FiniteTable(t) => Some(t.order as u64),
            GroupKind::TreeDepth(n) => Some(1u64 << ((1u32 << n) - 1)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self.kind() {
            GroupKind::IntLine => "Z".into(),
            GroupKind::IntLattice(d) => format!("Z^{d}"),
            GroupKind::Heisenberg => "H3(Z)".into(),
            GroupKind::FiniteTable(t) => format!("finite group of order {}", t.order),
            GroupKind::TreeDepth(n) => format!("tree maps of depth {n}"),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind() {
            GroupKind::IntLine => GroupElement::Int(0),
            GroupKind::IntLattice(d) => GroupElement::Vector(vec![0; *d]),
            GroupKind::Heisenberg => GroupElement::Heis([0, 0, 0]),
            GroupKind::FiniteTable(t) => GroupElement::Fin(t.identity),
            GroupKind::TreeDepth(_) => GroupElement::Tree(0),
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        *g == self.identity()
    }

    /// Checks that `g` is an element of this group.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (self.kind(), g) {
            (GroupKind::IntLine, GroupElement::Int(_)) => true,
            (GroupKind::IntLattice(d), GroupElement::Vector(v)) => v.len() == *d,
            (GroupKind::Heisenberg, GroupElement::Heis(_)) => true,
            (GroupKind::FiniteTable(t), GroupElement::Fin(i)) => *i < t.order,
            (GroupKind::TreeDepth(n), GroupElement::Tree(b)) => {
                let bits = (1u32 << n) - 1;
                bits >= 64 || *b >> bits == 0
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::GroupMismatch { expected: self.name(), found: g.to_string() })
        }
    }

    /// The product `a·b`. Both arguments must belong to the group.
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (self.kind(), a, b) {
            (GroupKind::IntLine, E::Int(x), E::Int(y)) => E::Int(ck(x.checked_add(*y))),
            (GroupKind::IntLattice(_), E::Vector(x), E::Vector(y)) => {
                E::Vector(x.iter().zip(y).map(|(p, q)| ck(p.checked_add(*q))).collect())
            }
            (GroupKind::Heisenberg, E::Heis([x, y, z]), E::Heis([x1, y1, z1])) => {
                let cross = ck(x.checked_mul(*y1));
                E::Heis([
                    ck(x.checked_add(*x1)),
                    ck(y.checked_add(*y1)),
                    ck(ck(z.checked_add(*z1)).checked_add(cross)),
                ])
            }
            (GroupKind::FiniteTable(t), E::Fin(x), E::Fin(y)) => E::Fin(t.mul(*x, *y)),
            (GroupKind::TreeDepth(n), E::Tree(x), E::Tree(y)) => E::Tree(tree::mul(*n, *x, *y)),
            _ => panic!("mul: {a} and {b} are not both elements of {}", self.name()),
        }
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (self.kind(), a) {
            (GroupKind::IntLine, E::Int(x)) => E::Int(ck(x.checked_neg())),
            (GroupKind::IntLattice(_), E::Vector(x)) => {
                E::Vector(x.iter().map(|p| ck(p.checked_neg())).collect())
            }
            (GroupKind::Heisenberg, E::Heis([x, y, z])) => {
                E::Heis([-x, -y, ck(ck(x.checked_mul(*y)).checked_sub(*z))])
            }
            (GroupKind::FiniteTable(t), E::Fin(x)) => E::Fin(t.inverse[*x as usize]),
            (GroupKind::TreeDepth(n), E::Tree(x)) => E::Tree(tree::inv(*n, *x)),
            _ => panic!("inv: {a} is not an element of {}", self.name()),
        }
    }

    /// `g·h·g⁻¹`.
    pub fn conj(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.mul(&self.mul(g, h), &self.inv(g))
    }

    pub fn pow(&self, g: &GroupElement, e: i64) -> GroupElement {
        let base = if e < 0 { self.inv(g) } else { g.clone() };
        let mut acc = self.identity();
        for _ in 0..e.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    /// Product of a word of `(element, ±1)` letters, checking membership.
    pub fn evaluate(&self, word: &[(GroupElement, i8)]) -> Result<GroupElement> {
        let mut acc = self.identity();
        for (g, e) in word {
            self.check(g)?;
            let letter = match e {
                1 => g.clone(),
                -1 => self.inv(g),
                _ => return Err(Error::Usage(format!("exponent must be ±1, got {e}"))),
            };
            acc = self.mul(&acc, &letter);
        }
        Ok(acc)
    }

    /// Generators followed by their inverses, duplicates removed.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = Vec::new();
        for g in self.generators().iter().cloned().chain(self.generators().iter().map(|g| self.inv(g))) {
            if !out.contains(&g) && !self.is_identity(&g) {
                out.push(g);
            }
        }
        out
    }

    /// Breadth-first enumeration of the ball of the given radius, identity
    /// first, following the fixed generator order.
    pub fn ball(&self, radius: usize) -> Vec<GroupElement> {
        bfs_ball(self, &self.symmetric_generators(), radius, usize::MAX)
    }

    /// Elements as JSON: integers, arrays of integers, or tree bit tables.
    pub fn element_to_json(&self, g: &GroupElement) -> Value {
        match g {
            GroupElement::Int(n) => json!(n),
            GroupElement::Vector(v) => json!(v),
            GroupElement::Heis(h) => json!(h),
            GroupElement::Fin(i) => json!(i),
            GroupElement::Tree(b) => json!(b),
        }
    }

    pub fn element_from_json(&self, v: &Value) -> Result<GroupElement> {
        let bad = || Error::Usage(format!("{v} is not an element of {}", self.name()));
        let ints = |v: &Value| -> Result<Vec<i64>> {
            v.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_i64().ok_or_else(bad))
                .collect()
        };
        let g = match self.kind() {
            GroupKind::IntLine => GroupElement::Int(v.as_i64().ok_or_else(bad)?),
            GroupKind::IntLattice(_) => GroupElement::Vector(ints(v)?),
            GroupKind::Heisenberg => {
                let c = ints(v)?;
                GroupElement::Heis(c.try_into().map_err(|_| bad())?)
            }
            GroupKind::FiniteTable(_) => {
                GroupElement::Fin(v.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or_else(bad)?)
            }
            GroupKind::TreeDepth(_) => GroupElement::Tree(v.as_u64().ok_or_else(bad)?),
        };
        self.check(&g)?;
        Ok(g)
    }

    /// Group description as JSON, e.g. `{"group":"heisenberg"}`.
    pub fn to_json(&self) -> Value {
        match self.kind() {
            GroupKind::IntLine => json!({"group": "z"}),
            GroupKind::IntLattice(d) => json!({"group": "zd", "dim": d}),
            GroupKind::Heisenberg => json!({"group": "heisenberg"}),
            GroupKind::FiniteTable(t) => json!({"group": "finite", "table": t.rows()}),
            GroupKind::TreeDepth(n) => json!({"group": "tree", "depth": n}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v
            .get("group")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Usage("group spec needs a \"group\" name".into()))?;
        match name {
            "z" | "int" => Ok(Self::int_line()),
            "zd" | "lattice" => {
                let d = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Usage("zd needs \"dim\"".into()))?;
                Ok(Self::int_lattice(d as usize))
            }
            "heisenberg" | "h3" => Ok(Self::heisenberg()),
            "finite" => {
                let rows: Vec<Vec<u32>> = serde_json::from_value(
                    v.get("table").cloned().ok_or_else(|| Error::Usage("finite needs \"table\"".into()))?,
                )
                .map_err(|e| Error::Usage(e.to_string()))?;
                Ok(Self::finite(FiniteTable::new(rows)?))
            }
            "tree" => {
                let n = v.get("depth").and_then(Value::as_u64).ok_or_else(|| Error::Usage("tree needs \"depth\"".into()))?;
                Self::tree(n as u32)
            }
            other => Err(Error::Usage(format!("unknown group {other:?}"))),
        }
    }
}

/// Ball of `radius` in the word metric for `gens`, in BFS order. Stops early
/// once `limit` elements are collected.
pub fn bfs_ball(ctx: &GroupCtx, gens: &[GroupElement], radius: usize, limit: usize) -> Vec<GroupElement> {
    let id = ctx.identity();
    let mut seen: HashSet<GroupElement> = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([(id, 0usize)]);
    while let Some((g, r)) = queue.pop_front() {
        if r == radius {
            continue;
        }
        for s in gens {
            let h = ctx.mul(s, &g);
            if seen.insert(h.clone()) {
                out.push(h.clone());
                if out.len() >= limit {
                    return out;
                }
                queue.push_back((h, r + 1));
            }
        }
    }
    out
}

/// `{ab : a ∈ A, b ∈ B}` in first-seen order, and whether all products are
/// distinct (`|AB| = |A||B|`).
pub fn product_set(ctx: &GroupCtx, a: &[GroupElement], b: &[GroupElement]) -> (Vec<GroupElement>, bool) {
    let mut seen = HashSet::with_capacity(a.len() * b.len());
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let p = ctx.mul(x, y);
            if seen.insert(p.clone()) {
                out.push(p);
            }
        }
    }
    let distinct = out.len() == a.len() * b.len();
    (out, distinct)
}

/// The semidirect product `Z_3 ⋊ Z_2` (the symmetric group on three letters).
/// Element `a + 3s` stands for `(a, s)` with `(a,s)(b,t) = (a + (-1)^s b, s + t)`.
pub fn z3_semidirect_z2() -> FiniteTable {
    let rows = (0..6u32)
        .map(|x| {
            (0..6u32)
                .map(|y| {
                    let (a, s) = (x % 3, x / 3);
                    let (b, t) = (y % 3, y / 3);
                    let b = if s == 1 { (3 - b) % 3 } else { b };
                    (a + b) % 3 + 3 * ((s + t) % 2)
                })
                .collect()
        })
        .collect();
    FiniteTable::new(rows).expect("valid table")
}
