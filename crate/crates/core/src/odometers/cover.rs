use std::collections::{HashMap, HashSet, VecDeque};

use serde_json::{json, Value};

use super::sections::{relative_transversal, tuple_products};
use super::{CosetChain, OdometerSpec};
use crate::cf::{CFParams, CFPoint, NuRule, Shape};
use crate::error::{Error, Result};
use crate::groups::{coset_table, normal_core, CofiniteSubgroup, CosetKey, GroupElement, DEFAULT_COSET_CAP};
use crate::measures::FinMeasure;
use crate::rational::{self, Q};

/// The chain of normal cores and the comparison maps at a finite level.
#[derive(Debug)]
pub struct NormalCover {
    pub cover: OdometerSpec,
    pub level: usize,
    /// `(index of Γ_n, index of Γ̃_n)` for `n = 1..=N`.
    pub indices: Vec<(u64, u64)>,
    /// Representatives of `Γ_n/Γ̃_n`.
    pub h_entries: Vec<Vec<GroupElement>>,
    /// Size of the image of `Γ_{n+1}/Γ̃_{n+1}` in `Γ_n/Γ̃_n`, for `n < N`.
    pub h_image_sizes: Vec<usize>,
    /// `Γ_{n+1} ⊆ Γ̃_n` on the generators of `Γ_{n+1}`, for `n ≤ N`.
    pub next_inside_core: Vec<bool>,
    /// The level-`N` cover chain is determined by the level-`(N+1)` chain of
    /// `Γ`, checked on every coset of `G/Γ̃_{N+1}`.
    pub omega_injective: bool,
}

impl NormalCover {
    /// `index(Γ̃_n)/index(Γ_n)`.
    pub fn index_ratio(&self, n: usize) -> Q {
        let (a, b) = self.indices[n - 1];
        Q::new((b as i64).into(), (a as i64).into())
    }

    /// A cover chain over `y`: all entries taken from the deepest representative.
    pub fn lift(&self, y: &CosetChain) -> CosetChain {
        match y.reps.last() {
            Some(g) => CosetChain::of_element(g, y.len()),
            None => y.clone(),
        }
    }

    /// `ω`: coarsens each `gΓ̃_n` to `gΓ_n`.
    pub fn project(&self, spec: &OdometerSpec, z: &CosetChain) -> Result<CosetChain> {
        z.check(&self.cover)?;
        let y = z.clone();
        y.check(spec)?;
        Ok(y)
    }

    /// The level-`N` cover measure: `χ(gΓ_N)` spread uniformly over the
    /// `Γ̃_N`-cosets inside `gΓ_N`. Keys are `Γ̃_N`-coset keys.
    pub fn lift_measure(&self, spec: &OdometerSpec, chi: &HashMap<CosetKey, Q>) -> Result<HashMap<CosetKey, Q>> {
        let n = self.level;
        let gamma = spec.level(n)?;
        let core = self.cover.level(n)?;
        let table = coset_table(core, DEFAULT_COSET_CAP)?;
        let h = Q::from_integer((self.h_entries[n - 1].len() as i64).into());
        let mut out = HashMap::with_capacity(table.len());
        for r in table.transversal() {
            let w = chi.get(&gamma.key(r)).cloned().unwrap_or_else(Q::default);
            out.insert(core.key(r), w / &h);
        }
        Ok(out)
    }

    pub fn to_json(&self, spec: &OdometerSpec) -> Value {
        let ctx = spec.group();
        json!({
            "level": self.level,
            "indices": self.indices.iter().map(|(a, b)| json!({"gamma": a, "core": b})).collect::<Vec<_>>(),
            "h_sizes": self.h_entries.iter().map(Vec::len).collect::<Vec<_>>(),
            "h_entries": self.h_entries.iter().map(|h| h.iter().map(|g| ctx.element_to_json(g)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "h_image_sizes": self.h_image_sizes,
            "next_inside_core": self.next_inside_core,
            "omega_injective": self.omega_injective,
        })
    }
}

/// Normal cores `Γ̃_n` for `n ≤ N + 1` and the comparison data at level `N`.
pub fn normal_cover(spec: &OdometerSpec, n_max: usize) -> Result<NormalCover> {
    if n_max == 0 {
        return Err(Error::Usage("normal cover needs N ≥ 1".into()));
    }
    let ctx = spec.group();
    let top = (n_max + 1).min(spec.depth_cap());
    let cores = (1..=top).map(|n| normal_core(spec.level(n)?, DEFAULT_COSET_CAP)).collect::<Result<Vec<_>>>()?;
    let cover = OdometerSpec::new(ctx, cores.clone(), format!("{}_core", spec.name()))?;
    let mut indices = Vec::new();
    let mut h_entries = Vec::new();
    let mut next_inside_core = Vec::new();
    for n in 1..=n_max {
        let gamma = spec.level(n)?;
        let core = &cores[n - 1];
        indices.push((gamma.index(), core.index()));
        h_entries.push(relative_transversal(spec, gamma, core)?);
        if n < top {
            next_inside_core.push(contained(spec.level(n + 1)?, core)?);
        }
    }
    let mut h_image_sizes = Vec::new();
    for n in 1..n_max {
        let core = &cores[n - 1];
        let image: HashSet<CosetKey> = h_entries[n].iter().map(|h| core.key(h)).collect();
        h_image_sizes.push(image.len());
    }
    let omega_injective = if top > n_max {
        let fine = &cores[n_max];
        let (gamma_next, core) = (spec.level(n_max + 1)?, &cores[n_max - 1]);
        let table = coset_table(fine, DEFAULT_COSET_CAP)?;
        let mut seen: HashMap<CosetKey, CosetKey> = HashMap::new();
        table.transversal().iter().all(|r| {
            let k = core.key(r);
            seen.entry(gamma_next.key(r)).or_insert_with(|| k.clone()) == &k
        })
    } else {
        false
    };
    Ok(NormalCover { cover, level: n_max, indices, h_entries, h_image_sizes, next_inside_core, omega_injective })
}

/// `sub ⊆ sup`, on generators of `sub` or on a transversal of `G/sub` otherwise.
fn contained(sub: &CofiniteSubgroup, sup: &CofiniteSubgroup) -> Result<bool> {
    if let Some(b) = sup.contains_subgroup(sub) {
        return Ok(b);
    }
    let ctx = sub.ctx();
    let space = coset_table(sub, DEFAULT_COSET_CAP)?;
    for s in ctx.generators() {
        for i in 0..space.len() {
            let j = space.act(s, i);
            if !sup.member(&ctx.mul(&ctx.inv(space.rep(j)), &ctx.mul(s, space.rep(i)))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `τ_n`: tuples of stages `1..=n+1` to `G/Γ_{n+1}`.
#[derive(Clone, Debug)]
pub struct TauCheck {
    pub n: usize,
    pub tuples: usize,
    pub image_size: usize,
    pub target_index: u64,
    pub bijective: bool,
    /// Pushforward of the uniform measure on tuples equals `1/index` on every coset.
    pub uniform_pushforward: bool,
}

/// Parameters over a chain with `C_k` a transversal of `Γ_{k−1}/Γ_k` inside
/// `Γ_{k−1}`, and the map `τ` to the odometer.
#[derive(Clone, Debug)]
pub struct RankOneCover {
    pub params: CFParams,
    pub c: Vec<Vec<GroupElement>>,
    /// `B` in `F_k = B·F_{k−1}C_k`.
    pub spread: Vec<GroupElement>,
    pub tau: Vec<TauCheck>,
}

impl RankOneCover {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// `τ(x)` up to level `levels`: `f_nΓ_k` for `k ≤ n`, `f_nc_{n+1}⋯c_kΓ_k` beyond.
    /// The chain stops at the point's horizon.
    pub fn tau_point(&self, spec: &OdometerSpec, x: &CFPoint, levels: usize) -> CosetChain {
        let ctx = spec.group();
        let mut reps = Vec::with_capacity(levels);
        let mut g = x.f.clone();
        for k in 1..=levels.min(x.horizon()) {
            if k > x.base {
                g = ctx.mul(&g, &x.tail[k - x.base - 1]);
            }
            reps.push(g.clone());
        }
        CosetChain { reps }
    }

    pub fn passed(&self) -> bool {
        self.tau.iter().all(|t| t.bijective && t.uniform_pushforward)
    }

    pub fn to_json(&self, spec: &OdometerSpec) -> Value {
        let ctx = spec.group();
        json!({
            "stages": self.stages(),
            "C": self.c.iter().map(|c| c.iter().map(|g| ctx.element_to_json(g)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "spread": self.spread.iter().map(|g| ctx.element_to_json(g)).collect::<Vec<_>>(),
            "F_sizes": (0..=self.stages()).map(|n| self.params.shape(n).map(|s| s.len() as u64).unwrap_or(0)).collect::<Vec<_>>(),
            "tau": self.tau.iter().map(|t| json!({
                "n": t.n,
                "tuples": t.tuples,
                "image_size": t.image_size,
                "target_index": t.target_index,
                "bijective": t.bijective,
                "uniform_pushforward": t.uniform_pushforward,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Candidate limit when spreading a coset representative for disjointness.
pub const SPREAD_CAP: usize = 1 << 14;

/// Builds stages `1..=N+1` (none for `N = 0`) and checks `τ_n` for `n ≤ N`.
pub fn rank_one_cover(spec: &OdometerSpec, n_max: usize) -> Result<RankOneCover> {
    let ctx = spec.group();
    let stages = if n_max == 0 { 0 } else { n_max + 1 };
    let mut spread = vec![ctx.identity()];
    for g in ctx.generators() {
        if !spread.contains(g) {
            spread.push(g.clone());
        }
    }
    let mut f: Vec<GroupElement> = vec![ctx.identity()];
    let mut shapes = vec![Shape::singleton(ctx)];
    let mut nus = vec![NuRule::Point];
    let mut kappas = Vec::new();
    let mut cs: Vec<Vec<GroupElement>> = Vec::new();
    let mut weight = rational::one();
    for k in 1..=stages {
        let (sup, sub) = (spec.level(k - 1)?, spec.level(k)?);
        let reps = relative_transversal(spec, sup, sub)?;
        let deep = deep_elements(spec, sub)?;
        let mut used: HashSet<GroupElement> = f.iter().cloned().collect();
        let mut c = vec![ctx.identity()];
        for r in &reps[1..] {
            let pick = deep.iter().map(|w| ctx.mul(r, w)).find(|cand| f.iter().all(|x| !used.contains(&ctx.mul(x, cand))));
            let Some(cand) = pick else {
                return Err(Error::Validation(format!(
                    "stage {k}: no translate of {r} within {SPREAD_CAP} candidates keeps the copies of F_{} disjoint",
                    k - 1
                )));
            };
            used.extend(f.iter().map(|x| ctx.mul(x, &cand)));
            c.push(cand);
        }
        let mut seen = HashSet::with_capacity(used.len() * spread.len());
        let mut next = Vec::with_capacity(used.len() * spread.len());
        for b in &spread {
            for x in &f {
                for cc in &c {
                    let y = ctx.mul(b, &ctx.mul(x, cc));
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
        }
        f = next;
        weight /= Q::from_integer((c.len() as i64).into());
        kappas.push(FinMeasure::uniform(c.iter().cloned()));
        shapes.push(Shape::explicit(f.iter().cloned()));
        nus.push(NuRule::Uniform(weight.clone()));
        cs.push(c);
    }
    let params = CFParams::explicit(ctx.clone(), kappas, shapes, nus)?;
    let mut tau = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let gamma = spec.level(n + 1)?;
        let prods = tuple_products(spec, &cs[..=n], DEFAULT_COSET_CAP)?;
        let mut mass: HashMap<CosetKey, Q> = HashMap::new();
        let w = Q::new(1.into(), (prods.len() as i64).into());
        for p in &prods {
            *mass.entry(gamma.key(p)).or_default() += &w;
        }
        let target = Q::new(1.into(), (gamma.index() as i64).into());
        let image_size = mass.len();
        tau.push(TauCheck {
            n,
            tuples: prods.len(),
            image_size,
            target_index: gamma.index(),
            bijective: image_size == prods.len() && image_size as u64 == gamma.index(),
            uniform_pushforward: image_size as u64 == gamma.index() && mass.values().all(|m| *m == target),
        });
    }
    Ok(RankOneCover { params, c: cs, spread, tau })
}

/// Elements of `Γ` in BFS order over its generators, up to `SPREAD_CAP`.
fn deep_elements(spec: &OdometerSpec, gamma: &CofiniteSubgroup) -> Result<Vec<GroupElement>> {
    let ctx = spec.group();
    let gens = match gamma.generators() {
        Some(g) => g,
        None => {
            let space = coset_table(gamma, DEFAULT_COSET_CAP)?;
            let mut out = Vec::new();
            for s in ctx.generators() {
                for i in 0..space.len() {
                    let j = space.act(s, i);
                    out.push(ctx.mul(&ctx.inv(space.rep(j)), &ctx.mul(s, space.rep(i))));
                }
            }
            out
        }
    };
    let mut steps: Vec<GroupElement> = Vec::new();
    for g in gens.iter().cloned().chain(gens.iter().map(|g| ctx.inv(g))) {
        if !ctx.is_identity(&g) && !steps.contains(&g) {
            steps.push(g);
        }
    }
    let id = ctx.identity();
    let mut seen = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y = ctx.mul(&x, s);
            if seen.insert(y.clone()) {
                out.push(y.clone());
                if out.len() >= SPREAD_CAP {
                    return Ok(out);
                }
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}
