//! Finitely supported measures on group elements with exact weights.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{GroupCtx, GroupElement};
use crate::rational::{self, Q};

/// Atoms are kept in canonical element order; zero weights are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FinMeasure {
    atoms: BTreeMap<GroupElement, Q>,
}

impl FinMeasure {
    /// Sums repeated atoms. Negative weights are rejected.
    pub fn new(atoms: impl IntoIterator<Item = (GroupElement, Q)>) -> Result<Self> {
        let mut map: BTreeMap<GroupElement, Q> = BTreeMap::new();
        for (g, w) in atoms {
            if w.is_negative() {
                return Err(Error::Usage(format!("negative weight {w} at {g}")));
            }
            *map.entry(g).or_insert_with(Q::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        Ok(Self { atoms: map })
    }

    pub fn dirac(g: GroupElement) -> Self {
        Self { atoms: BTreeMap::from([(g, rational::one())]) }
    }

    /// Probability measure with equal weights on the distinct elements.
    pub fn uniform(elements: impl IntoIterator<Item = GroupElement>) -> Self {
        let keys: Vec<GroupElement> = elements.into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let w = rational::frac(1, keys.len() as i64);
        Self { atoms: keys.into_iter().map(|g| (g, w.clone())).collect() }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&GroupElement, &Q)> {
        self.atoms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.atoms.keys()
    }

    pub fn support_vec(&self) -> Vec<GroupElement> {
        self.atoms.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.atoms.contains_key(g)
    }

    pub fn weight(&self, g: &GroupElement) -> Q {
        self.atoms.get(g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn weight_ref(&self, g: &GroupElement) -> Option<&Q> {
        self.atoms.get(g)
    }

    pub fn total(&self) -> Q {
        self.atoms.values().fold(Q::zero(), |a, w| a + w)
    }

    pub fn max_weight(&self) -> Q {
        self.atoms.values().max().cloned().unwrap_or_else(Q::zero)
    }

    pub fn check_ambient(&self, ctx: &GroupCtx) -> Result<()> {
        self.atoms.keys().try_for_each(|g| ctx.check(g))
    }

    /// `(μ*ν)(g) = Σ_{ab=g} μ(a)ν(b)`.
    pub fn convolve(&self, ctx: &GroupCtx, other: &FinMeasure) -> Result<FinMeasure> {
        self.check_ambient(ctx)?;
        other.check_ambient(ctx)?;
        let mut out: BTreeMap<GroupElement, Q> = BTreeMap::new();
        for (a, wa) in &self.atoms {
            for (b, wb) in &other.atoms {
                *out.entry(ctx.mul(a, b)).or_insert_with(Q::zero) += wa * wb;
            }
        }
        Ok(FinMeasure { atoms: out })
    }

    pub fn mass(&self, pred: impl Fn(&GroupElement) -> bool) -> Q {
        self.atoms.iter().filter(|(g, _)| pred(g)).fold(Q::zero(), |a, (_, w)| a + w)
    }

    pub fn restrict(&self, pred: impl Fn(&GroupElement) -> bool) -> FinMeasure {
        FinMeasure { atoms: self.atoms.iter().filter(|(g, _)| pred(g)).map(|(g, w)| (g.clone(), w.clone())).collect() }
    }

    pub fn normalize(&self) -> Result<FinMeasure> {
        let t = self.total();
        if t.is_zero() {
            return Err(Error::Usage("cannot normalize the zero measure".into()));
        }
        Ok(self.scale_unchecked(&(rational::one() / t)))
    }

    pub fn scale(&self, r: &Q) -> Result<FinMeasure> {
        if !r.is_positive() {
            return Err(Error::Usage(format!("scale factor must be positive, got {r}")));
        }
        Ok(self.scale_unchecked(r))
    }

    fn scale_unchecked(&self, r: &Q) -> FinMeasure {
        FinMeasure { atoms: self.atoms.iter().map(|(g, w)| (g.clone(), w * r)).collect() }
    }

    /// Pushforward along `f`; atoms landing together are summed.
    pub fn map_atoms(&self, f: impl Fn(&GroupElement) -> GroupElement) -> FinMeasure {
        let mut out: BTreeMap<GroupElement, Q> = BTreeMap::new();
        for (g, w) in &self.atoms {
            *out.entry(f(g)).or_insert_with(Q::zero) += w;
        }
        FinMeasure { atoms: out }
    }

    /// `[[element, "p/q"], …]`.
    pub fn to_json(&self, ctx: &GroupCtx) -> Value {
        Value::Array(
            self.atoms
                .iter()
                .map(|(g, w)| json!([ctx.element_to_json(g), rational::to_string(w)]))
                .collect(),
        )
    }

    pub fn from_json(ctx: &GroupCtx, v: &Value) -> Result<FinMeasure> {
        let bad = || Error::Usage(format!("measure must be [[element, \"p/q\"], ...], got {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let atoms = arr
            .iter()
            .map(|pair| {
                let pair = pair.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
                let g = ctx.element_from_json(&pair[0])?;
                let w = match &pair[1] {
                    Value::String(s) => rational::parse(s)?,
                    Value::Number(n) => rational::int(n.as_i64().ok_or_else(bad)?),
                    _ => return Err(bad()),
                };
                Ok((g, w))
            })
            .collect::<Result<Vec<_>>>()?;
        FinMeasure::new(atoms)
    }
}

/// `κ_a * κ_{a+1} * … * κ_b` in that order.
pub fn convolve_all(ctx: &GroupCtx, measures: &[FinMeasure]) -> Result<FinMeasure> {
    let mut acc = FinMeasure::dirac(ctx.identity());
    for m in measures {
        acc = acc.convolve(ctx, m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use GroupElement::*;

    fn ints(v: &[i64]) -> Vec<GroupElement> {
        v.iter().map(|&x| Int(x)).collect()
    }

    #[test]
    fn convolution_examples() {
        let z = GroupCtx::int_line();
        let a = FinMeasure::uniform(ints(&[0, 1]));
        let b = FinMeasure::uniform(ints(&[0, 2]));
        assert_eq!(a.convolve(&z, &b).unwrap(), FinMeasure::uniform(ints(&[0, 1, 2, 3])));
        let k = FinMeasure::uniform(ints(&[0, 1, 4, 5]));
        assert_eq!(FinMeasure::dirac(Int(0)).convolve(&z, &k).unwrap(), k);
        let k2 = FinMeasure::uniform(ints(&[0, 6, 16, 22]));
        let c = k.convolve(&z, &k2).unwrap();
        assert_eq!(c.len(), 16);
        assert!(c.atoms().all(|(_, w)| *w == frac(1, 16)));
        assert!(k.convolve(&GroupCtx::heisenberg(), &k2).is_err());
    }

    #[test]
    fn masses_and_normalization() {
        let k = FinMeasure::uniform(ints(&[0, 1, 4, 5]));
        assert_eq!(k.mass(|_| true), k.total());
        assert_eq!(k.mass(|_| false), frac(0, 1));
        assert_eq!(k.mass(|g| g.as_int().unwrap() % 2 == 0), frac(1, 2));
        let m = FinMeasure::new([(Int(0), frac(1, 1)), (Int(1), frac(3, 1))]).unwrap();
        assert_eq!(m.normalize().unwrap().weight(&Int(1)), frac(3, 4));
        assert_eq!(k.normalize().unwrap(), k);
        let r = k.restrict(|g| [0, 1].contains(&g.as_int().unwrap())).normalize().unwrap();
        assert_eq!(r, FinMeasure::uniform(ints(&[0, 1])));
        assert!(FinMeasure::default().normalize().is_err());
        assert!(k.scale(&frac(-1, 2)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let z = GroupCtx::int_line();
        let k = FinMeasure::new([(Int(0), frac(1, 2)), (Int(6), frac(1, 4)), (Int(16), frac(1, 4))]).unwrap();
        let v = k.to_json(&z);
        assert_eq!(v.to_string(), r#"[[0,"1/2"],[6,"1/4"],[16,"1/4"]]"#);
        assert_eq!(FinMeasure::from_json(&z, &v).unwrap(), k);
    }
}
