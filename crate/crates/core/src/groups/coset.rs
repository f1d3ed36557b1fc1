use std::collections::hash_map::Entry;
use std::collections::HashMap;

use super::{CofiniteSubgroup, CosetKey, GroupCtx, GroupElement};
use crate::error::{Error, Result};

pub const DEFAULT_COSET_CAP: usize = 1 << 20;

/// The finite G-set `G/Γ` with a transversal and generator permutations.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    subgroup: CofiniteSubgroup,
    transversal: Vec<GroupElement>,
    lookup: HashMap<CosetKey, usize>,
    /// `action[s][i] = j` when the `s`-th generator maps coset `i` to `j`.
    action: Vec<Vec<usize>>,
}

/// Breadth-first enumeration of `G/Γ` from the identity coset, expanding
/// generators then inverses in the fixed order; the first visitor of a coset
/// becomes its representative.
pub fn coset_table(gamma: &CofiniteSubgroup, cap: usize) -> Result<CosetSpace> {
    let ctx = gamma.ctx();
    let steps = ctx.symmetric_generators();
    let mut transversal = vec![ctx.identity()];
    let mut lookup = HashMap::from([(gamma.key(&ctx.identity()), 0usize)]);
    let mut head = 0;
    while head < transversal.len() {
        let r = transversal[head].clone();
        head += 1;
        for s in &steps {
            let x = ctx.mul(s, &r);
            let k = gamma.key(&x);
            if let Entry::Vacant(slot) = lookup.entry(k) {
                if transversal.len() >= cap {
                    return Err(Error::Resource(format!("coset enumeration exceeds cap {cap}")));
                }
                slot.insert(transversal.len());
                transversal.push(x);
            }
        }
    }
    if transversal.len() as u64 != gamma.index() {
        return Err(Error::Validation(format!(
            "coset enumeration found {} cosets but the family declares index {}",
            transversal.len(),
            gamma.index()
        )));
    }
    let mut space = CosetSpace { subgroup: gamma.clone(), transversal, lookup, action: Vec::new() };
    space.action = ctx
        .generators()
        .iter()
        .map(|s| (0..space.len()).map(|i| space.act(s, i)).collect())
        .collect();
    Ok(space)
}

impl CosetSpace {
    pub fn subgroup(&self) -> &CofiniteSubgroup {
        &self.subgroup
    }

    pub fn ctx(&self) -> &GroupCtx {
        self.subgroup.ctx()
    }

    pub fn len(&self) -> usize {
        self.transversal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transversal.is_empty()
    }

    pub fn transversal(&self) -> &[GroupElement] {
        &self.transversal
    }

    pub fn rep(&self, i: usize) -> &GroupElement {
        &self.transversal[i]
    }

    /// Index of the coset `gΓ`.
    pub fn locate(&self, g: &GroupElement) -> usize {
        self.lookup[&self.subgroup.key(g)]
    }

    /// Index of `g·r_i Γ`.
    pub fn act(&self, g: &GroupElement, i: usize) -> usize {
        self.locate(&self.ctx().mul(g, &self.transversal[i]))
    }

    /// Permutation of coset indices induced by the `s`-th generator.
    pub fn generator_action(&self, s: usize) -> &[usize] {
        &self.action[s]
    }
}
