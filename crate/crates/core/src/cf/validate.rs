use std::collections::HashSet;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{CFParams, NuRule, ENUM_CAP};
use crate::error::Result;
use crate::rational::{self, Q};
use crate::verdict::{Verdict, VerdictTag};

/// How a per-stage check was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Symbolic,
    Enumerated,
    ByConstruction,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Symbolic => "symbolic",
            Method::Enumerated => "enumerated",
            Method::ByConstruction => "by_construction",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageCheck {
    pub n: usize,
    /// `1 ∈ F_n ∩ C_n`, `#C_n > 1`, `supp ν_n = F_n`.
    pub field_invariants: bool,
    pub inclusion: bool,
    pub disjoint: bool,
    pub nu_product_rule: bool,
    pub nu_method: Method,
    pub max_kappa: Q,
    pub notes: Vec<String>,
}

impl StageCheck {
    pub fn passed(&self) -> bool {
        self.field_invariants && self.inclusion && self.disjoint && self.nu_product_rule
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub depth: usize,
    pub stage_zero_ok: bool,
    pub stages: Vec<StageCheck>,
    /// `Π_{k≤n} max κ_k` for `n = 1..=depth`.
    pub max_kappa_product: Verdict,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.stage_zero_ok && self.stages.iter().all(StageCheck::passed)
    }

    pub fn first_failure(&self) -> Option<usize> {
        if !self.stage_zero_ok {
            return Some(0);
        }
        self.stages.iter().find(|s| !s.passed()).map(|s| s.n)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "passed": self.passed(),
            "stage_zero": self.stage_zero_ok,
            "stages": self.stages.iter().map(|s| json!({
                "n": s.n,
                "field_invariants": s.field_invariants,
                "inclusion": s.inclusion,
                "disjoint": s.disjoint,
                "nu_product_rule": s.nu_product_rule,
                "nu_method": s.nu_method.as_str(),
                "max_kappa": rational::to_string(&s.max_kappa),
                "notes": s.notes,
            })).collect::<Vec<_>>(),
            "max_kappa_product": self.max_kappa_product.to_json(),
        })
    }
}

/// Checks stages `1..=depth` for `F_{n−1}C_n ⊂ F_n`, disjointness of the
/// translates `F_{n−1}c`, and `ν_n(fc) = ν_{n−1}(f)κ_n(c)`.
pub fn validate_params(t: &CFParams, depth: usize, threshold: &Q) -> Result<ValidationReport> {
    let ctx = t.group();
    let one = ctx.identity();
    let s0 = t.stage(0)?;
    let stage_zero_ok = s0.shape.len() == 1
        && s0.shape.contains(&one)
        && t.nu(0, &one)? == rational::one();
    let mut stages = Vec::with_capacity(depth);
    let mut product = rational::one();
    let mut products = Vec::with_capacity(depth);
    let mut all_below_one = true;
    for n in 1..=depth {
        let st = t.stage(n)?;
        let prev = t.stage(n - 1)?;
        let kappa = st.kappa();
        let cs = kappa.support_vec();
        let mut notes = Vec::new();

        let mut field = true;
        if !st.shape.contains(&one) {
            notes.push("identity not in F_n".to_string());
            field = false;
        }
        if !kappa.contains(&one) {
            notes.push("identity not in C_n".to_string());
            field = false;
        }
        if cs.len() < 2 {
            notes.push("C_n has fewer than two elements".to_string());
            field = false;
        }
        if kappa.total() != rational::one() {
            notes.push("kappa_n is not a probability measure".to_string());
            field = false;
        }
        if !nu_support_full(t, n)? {
            notes.push("nu_n vanishes somewhere on F_n".to_string());
            field = false;
        }

        let inclusion = cs.iter().try_fold(true, |acc, c| -> Result<bool> {
            if !acc {
                return Ok(false);
            }
            match prev.shape.right_translate_within(c, &st.shape) {
                Some(b) => Ok(b),
                None => Ok(prev.shape.elements(ENUM_CAP)?.iter().all(|f| st.shape.contains(&ctx.mul(f, c)))),
            }
        })?;

        let symbolic: Option<bool> = (|| {
            let mut ok = true;
            for (i, c1) in cs.iter().enumerate() {
                for c2 in &cs[i + 1..] {
                    ok &= prev.shape.translates_disjoint(ctx, c1, c2)?;
                }
            }
            Some(ok)
        })();
        let disjoint = match symbolic {
            Some(b) => b,
            None => {
                let fs = prev.shape.elements(ENUM_CAP)?;
                let mut seen = HashSet::with_capacity(fs.len() * cs.len());
                cs.iter().all(|c| fs.iter().all(|f| seen.insert(ctx.mul(f, c))))
            }
        };

        let (nu_product_rule, nu_method) = nu_product_rule(t, n)?;
        if cs.len() < 2 {
            notes.push("(1-1) needs at least two copies".to_string());
        }

        let max_k = kappa.max_weight();
        all_below_one &= max_k < Q::one();
        product *= &max_k;
        products.push(product.clone());
        stages.push(StageCheck {
            n,
            field_invariants: field,
            inclusion: inclusion && cs.len() > 1,
            disjoint,
            nu_product_rule,
            nu_method,
            max_kappa: max_k,
            notes,
        });
    }
    let tag = if depth > 0 && all_below_one && products.last().is_some_and(|p| p < threshold) {
        VerdictTag::ConvergentIndicated
    } else {
        VerdictTag::Inconclusive
    };
    let mut max_kappa_product = Verdict::new(tag, None, 1, products.clone());
    max_kappa_product.partial_sums = products;
    Ok(ValidationReport { depth, stage_zero_ok, stages, max_kappa_product })
}

fn nu_support_full(t: &CFParams, n: usize) -> Result<bool> {
    if let Some(w) = t.uniform_weight(n)? {
        return Ok(w > Q::zero());
    }
    let st = t.stage(n)?;
    match &st.nu {
        NuRule::Recursive { spacer_weight } if st.shape.len() > ENUM_CAP as u128 => {
            Ok(*spacer_weight > Q::zero() && nu_support_full(t, n - 1)?)
        }
        _ => {
            for f in st.shape.elements(ENUM_CAP)? {
                if t.nu(n, &f)?.is_zero() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn nu_product_rule(t: &CFParams, n: usize) -> Result<(bool, Method)> {
    let ctx = t.group();
    let st = t.stage(n)?;
    let prev = t.stage(n - 1)?;
    let kappa = st.kappa();
    if let (Some(w), Some(wp)) = (t.uniform_weight(n)?, t.uniform_weight(n - 1)?) {
        return Ok((kappa.atoms().all(|(_, k)| w == &wp * k), Method::Symbolic));
    }
    let size = prev.shape.len() * kappa.len() as u128;
    if size <= ENUM_CAP as u128 {
        for f in prev.shape.elements(ENUM_CAP)? {
            let nf = t.nu(n - 1, &f)?;
            for (c, k) in kappa.atoms() {
                if t.nu(n, &ctx.mul(&f, c))? != &nf * k {
                    return Ok((false, Method::Enumerated));
                }
            }
        }
        return Ok((true, Method::Enumerated));
    }
    match st.nu {
        NuRule::Recursive { .. } => Ok((true, Method::ByConstruction)),
        _ => Err(crate::error::Error::Resource(format!(
            "stage {n}: the (1-3) check would enumerate {size} elements"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{tests::small_params, NuRule, Shape};
    use crate::groups::{GroupCtx, GroupElement::Int};
    use crate::measures::FinMeasure;
    use crate::verdict::default_threshold;

    #[test]
    fn small_params_pass() {
        let r = validate_params(&small_params(), 2, &default_threshold()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.stages[1].nu_method, Method::Enumerated);
        assert_eq!(r.max_kappa_product.terms, vec![rational::frac(1, 4), rational::frac(1, 8)]);
    }

    #[test]
    fn overlapping_copies_fail() {
        let z = GroupCtx::int_line();
        let c1 = FinMeasure::uniform([Int(0), Int(1)]);
        let c2 = FinMeasure::uniform([Int(0), Int(1)]);
        let shapes = vec![Shape::singleton(&z), Shape::Interval(2), Shape::Interval(3)];
        let nus = vec![NuRule::Point, NuRule::Uniform(rational::frac(1, 2)), NuRule::Uniform(rational::frac(1, 4))];
        let t = CFParams::explicit(z, vec![c1, c2], shapes, nus).unwrap();
        let r = validate_params(&t, 2, &default_threshold()).unwrap();
        assert!(r.stages[0].passed());
        assert!(!r.stages[1].disjoint);
        assert_eq!(r.first_failure(), Some(2));
    }

    #[test]
    fn single_copy_fails() {
        let z = GroupCtx::int_line();
        let t = CFParams::explicit(
            z.clone(),
            vec![FinMeasure::dirac(Int(0))],
            vec![Shape::singleton(&z), Shape::Interval(1)],
            vec![NuRule::Point, NuRule::Uniform(rational::one())],
        )
        .unwrap();
        let r = validate_params(&t, 1, &default_threshold()).unwrap();
        assert!(!r.stages[0].inclusion);
        assert!(!r.passed());
    }
}
