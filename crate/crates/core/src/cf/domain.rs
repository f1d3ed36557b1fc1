//! Domain conditions of the partial action, Følner defects and Haar totals.

use std::collections::{HashMap, HashSet};

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::{CFParams, Shape, ENUM_CAP};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::rational::{self, Q};
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalDomain {
    /// Least `m` with `gF_nC_{n+1}⋯C_m ⊂ F_m`.
    pub holds_at: Option<usize>,
    /// Last stage fully examined.
    pub checked_up_to: usize,
    /// Number of elements of the product set still outside `F_m`, per `m`.
    pub outside_counts: Vec<usize>,
    /// The search stopped at the enumeration cap before `depth`.
    pub truncated: bool,
}

impl MinimalDomain {
    pub fn to_json(&self) -> Value {
        json!({
            "holds_at": self.holds_at,
            "checked_up_to": self.checked_up_to,
            "outside_counts": self.outside_counts,
            "truncated": self.truncated,
        })
    }
}

/// Searches for the least `m ∈ [n, depth]` with `gF_nC_{n+1}⋯C_m ⊂ F_m`.
///
/// Once `s ∈ F_k`, every `sc_{k+1}⋯c_m` lies in `F_m`, so only the part of
/// the product set outside the current shape is carried forward.
pub fn check_minimal_domain(t: &CFParams, g: &GroupElement, n: usize, depth: usize, cap: usize) -> Result<MinimalDomain> {
    let ctx = t.group();
    ctx.check(g)?;
    if depth > t.depth_cap() {
        return Err(Error::DepthExceeded { stage: depth, cap: t.depth_cap() });
    }
    let fs = t.shape(n)?;
    let mut outside: HashSet<GroupElement> = if ctx.is_identity(g) {
        HashSet::new()
    } else {
        fs.elements(cap)?.iter().map(|f| ctx.mul(g, f)).filter(|x| !fs.contains(x)).collect()
    };
    let mut counts = vec![outside.len()];
    if outside.is_empty() {
        return Ok(MinimalDomain { holds_at: Some(n), checked_up_to: n, outside_counts: counts, truncated: false });
    }
    for m in n + 1..=depth {
        let st = t.stage(m)?;
        let cs = st.kappa().support_vec();
        if outside.len().saturating_mul(cs.len()) > cap {
            return Ok(MinimalDomain { holds_at: None, checked_up_to: m - 1, outside_counts: counts, truncated: true });
        }
        outside = outside
            .iter()
            .flat_map(|s| cs.iter().map(move |c| (s, c)))
            .map(|(s, c)| ctx.mul(s, c))
            .filter(|x| !st.shape.contains(x))
            .collect();
        counts.push(outside.len());
        if outside.is_empty() {
            return Ok(MinimalDomain { holds_at: Some(m), checked_up_to: m, outside_counts: counts, truncated: false });
        }
    }
    Ok(MinimalDomain { holds_at: None, checked_up_to: depth, outside_counts: counts, truncated: false })
}

#[derive(Clone, Debug)]
pub struct MeasureDomain {
    /// `κ_1*⋯*κ_m(g⁻¹F_m)` for `m = 0..=checked_up_to`.
    pub values: Vec<Q>,
    /// `(n, m, ν_m(F_nC_{n+1}⋯C_m ∩ g⁻¹F_m))` for the levels `n` small enough to enumerate.
    pub nu_form: Vec<(usize, usize, Q)>,
    /// The deficits `1 − values[m]` for `m ≥ 1`, judged as a series.
    pub verdict: Verdict,
    /// Stages where the `n = 0` measure form differs from `values`.
    pub disagreements: Vec<usize>,
    pub truncated: bool,
}

impl MeasureDomain {
    pub fn checked_up_to(&self) -> usize {
        self.values.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "values": self.values.iter().map(rational::to_string).collect::<Vec<_>>(),
            "nu_form": self.nu_form.iter().map(|(n, m, v)| json!({"n": n, "m": m, "value": rational::to_string(v)})).collect::<Vec<_>>(),
            "deficits": self.verdict.to_json(),
            "disagreements": self.disagreements,
            "truncated": self.truncated,
        })
    }
}

/// Mass of the walk `g·f·c_{n+1}⋯c_m` still outside `F_m`, for `m = n..=depth`.
/// The walk starts from `start` (element, weight) pairs placed at level `n`.
fn outside_masses(
    t: &CFParams,
    n: usize,
    start: impl IntoIterator<Item = (GroupElement, Q)>,
    depth: usize,
    cap: usize,
) -> Result<(Vec<Q>, bool)> {
    let ctx = t.group();
    let f0 = t.shape(n)?;
    let mut out: HashMap<GroupElement, Q> = HashMap::new();
    for (x, w) in start {
        if !f0.contains(&x) {
            *out.entry(x).or_insert_with(Q::zero) += w;
        }
    }
    let total = |m: &HashMap<GroupElement, Q>| m.values().fold(Q::zero(), |a, w| a + w);
    let mut masses = vec![total(&out)];
    for m in n + 1..=depth {
        if out.is_empty() {
            masses.push(Q::zero());
            continue;
        }
        let st = t.stage(m)?;
        let kappa = st.kappa();
        if out.len().saturating_mul(kappa.len()) > cap {
            return Ok((masses, true));
        }
        let mut next: HashMap<GroupElement, Q> = HashMap::with_capacity(out.len() * kappa.len());
        for (x, w) in &out {
            for (c, k) in kappa.atoms() {
                let y = ctx.mul(x, c);
                if !st.shape.contains(&y) {
                    *next.entry(y).or_insert_with(Q::zero) += w * k;
                }
            }
        }
        out = next;
        masses.push(total(&out));
    }
    Ok((masses, false))
}

/// Computes `κ_1*⋯*κ_m(g⁻¹F_m)` for `m ≤ depth`, together with the measure
/// form `ν_m(F_nC_{n+1}⋯C_m ∩ g⁻¹F_m)` for every `n < depth` whose `F_n`
/// has at most `level_cap` elements.
pub fn check_measure_domain(
    t: &CFParams,
    g: &GroupElement,
    depth: usize,
    threshold: &Q,
    level_cap: usize,
    cap: usize,
) -> Result<MeasureDomain> {
    let ctx = t.group();
    ctx.check(g)?;
    if depth > t.depth_cap() {
        return Err(Error::DepthExceeded { stage: depth, cap: t.depth_cap() });
    }
    let (masses, truncated) = outside_masses(t, 0, [(g.clone(), rational::one())], depth, cap)?;
    let values: Vec<Q> = masses.iter().map(|m| rational::one() - m).collect();
    let mut nu_form = Vec::new();
    let mut disagreements = Vec::new();
    let reach = values.len() - 1;
    for n in 0..reach {
        let fs = t.shape(n)?;
        if fs.len() > level_cap as u128 {
            break;
        }
        let start = fs
            .elements(level_cap)?
            .into_iter()
            .map(|f| Ok((ctx.mul(g, &f), t.nu(n, &f)?)))
            .collect::<Result<Vec<_>>>()?;
        let total = t.nu_total(n)?;
        let (outs, _) = outside_masses(t, n, start, reach, cap)?;
        for (i, o) in outs.iter().enumerate().skip(1) {
            let m = n + i;
            let v = &total - o;
            if n == 0 && v != values[m] {
                disagreements.push(m);
            }
            nu_form.push((n, m, v));
        }
    }
    let deficits: Vec<Q> = masses[1..].to_vec();
    let verdict = Verdict::for_series(1, deficits, threshold);
    Ok(MeasureDomain { values, nu_form, verdict, disagreements, truncated })
}

/// `Σ_x |ν_n(x) − ν_n(g⁻¹x)| / ν_n(F_n)`, with `ν_n` extended by zero off `F_n`.
pub fn folner_defect(t: &CFParams, g: &GroupElement, n: usize) -> Result<Q> {
    let ctx = t.group();
    ctx.check(g)?;
    if ctx.is_identity(g) {
        return Ok(Q::zero());
    }
    let shape = t.shape(n)?;
    if t.uniform_weight(n)?.is_some() {
        let size = Q::from_integer(shape.len().into());
        let common: Option<u128> = match (&shape, g) {
            (Shape::Interval(h), GroupElement::Int(x)) => Some((h - x.abs()).max(0) as u128),
            (Shape::HeisBox { a, b, c }, GroupElement::Heis([gx, gy, gz])) => {
                let xs = (a - gx.abs()).max(0) as u128;
                let mut zs: u128 = 0;
                for fy in 0..*b {
                    if (0..*b).contains(&(gy + fy)) {
                        zs += (c - (gz + gx * fy).abs()).max(0) as u128;
                    }
                }
                Some(xs * zs)
            }
            _ => None,
        };
        if let Some(common) = common {
            return Ok(rational::int(2) * (&size - Q::from_integer(common.into())) / size);
        }
    }
    let ginv = ctx.inv(g);
    let mut sum = Q::zero();
    for f in shape.elements(ENUM_CAP)? {
        let w = t.nu(n, &f)?;
        sum += (&w - t.nu(n, &ctx.mul(&ginv, &f))?).abs();
        if !shape.contains(&ctx.mul(g, &f)) {
            sum += w;
        }
    }
    Ok(sum / t.nu_total(n)?)
}

#[derive(Clone, Debug)]
pub struct HaarTotals {
    /// `#F_{n+1} / (#F_n · #C_{n+1})` for `n = 0..N`.
    pub factors: Vec<Q>,
    pub products: Vec<Q>,
    /// `ν_n(F_n)` for `n = 0..=N`.
    pub nu_totals: Vec<Q>,
    pub uniform_kappa: bool,
}

impl HaarTotals {
    pub fn to_json(&self) -> Value {
        let s = |v: &[Q]| v.iter().map(rational::to_string).collect::<Vec<_>>();
        json!({
            "factors": s(&self.factors),
            "products": s(&self.products),
            "nu_totals": s(&self.nu_totals),
            "uniform_kappa": self.uniform_kappa,
        })
    }
}

pub fn haar_totals(t: &CFParams, big_n: usize) -> Result<HaarTotals> {
    let mut factors = Vec::with_capacity(big_n);
    let mut products = Vec::with_capacity(big_n);
    let mut nu_totals = vec![t.nu_total(0)?];
    let mut uniform_kappa = true;
    let mut acc = rational::one();
    for n in 0..big_n {
        let next = t.stage(n + 1)?;
        let kappa = next.kappa();
        uniform_kappa &= kappa.atoms().all(|(_, w)| *w == kappa.max_weight());
        let denom = t.shape(n)?.len() * kappa.len() as u128;
        let f = Q::new(next.shape.len().into(), denom.into());
        acc *= &f;
        factors.push(f);
        products.push(acc.clone());
        nu_totals.push(t.nu_total(n + 1)?);
    }
    Ok(HaarTotals { factors, products, nu_totals, uniform_kappa })
}
