//! Finite factors: compatibility sums, the factor map into `G/Γ`, window
//! scans for compatible telescopings, and total-ergodicity scans.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::cf::{CFParams, CFPoint};
use crate::error::{Error, Result};
use crate::groups::{conjugate, coset_table, CofiniteSubgroup, CosetSpace, GroupElement, DEFAULT_COSET_CAP};
use crate::rational::{self, Q};
use crate::verdict::{Verdict, VerdictTag};

/// Terms `κ_n({c ∈ C_n : c ∉ gΓg⁻¹})` for `n = 1..=depth`, judged as a series.
pub fn coset_compatibility(
    t: &CFParams,
    g: &GroupElement,
    gamma: &CofiniteSubgroup,
    depth: usize,
    threshold: &Q,
) -> Result<Verdict> {
    t.group().check(g)?;
    let conj = conjugate(g, gamma);
    let terms = (1..=depth)
        .map(|n| Ok(t.kappa(n)?.mass(|c| !conj.member(c))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::for_series(1, terms, threshold))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorMapValue {
    /// Coset indices of `f_n c_{n+1}⋯c_m gΓ` for `m = base..=horizon`.
    pub trajectory: Vec<usize>,
    /// The limit coset, when the trajectory is constant over the window.
    pub coset: Option<usize>,
    pub stabilized_at: Option<usize>,
}

impl FactorMapValue {
    pub fn to_json(&self) -> Value {
        json!({"trajectory": self.trajectory, "coset": self.coset, "stabilized_at": self.stabilized_at})
    }
}

/// Evaluates `π(x) = lim_m f_n c_{n+1}⋯c_m gΓ` on the known coordinates.
///
/// The value counts as stabilized when it is constant from some stage `s`
/// through the horizon and that run covers at least `window` stages after `s`.
pub fn finite_factor_map(
    t: &CFParams,
    g: &GroupElement,
    space: &CosetSpace,
    x: &CFPoint,
    window: usize,
) -> Result<FactorMapValue> {
    let ctx = t.group();
    ctx.check(g)?;
    let mut w = x.f.clone();
    let mut trajectory = vec![space.locate(&ctx.mul(&w, g))];
    for c in &x.tail {
        w = ctx.mul(&w, c);
        trajectory.push(space.locate(&ctx.mul(&w, g)));
    }
    let last = *trajectory.last().expect("nonempty");
    let run_start = trajectory.iter().rposition(|&i| i != last).map_or(0, |p| p + 1);
    let stable = trajectory.len() - 1 - run_start >= window;
    Ok(FactorMapValue {
        coset: stable.then_some(last),
        stabilized_at: stable.then_some(x.base + run_start),
        trajectory,
    })
}

/// `κ_a*⋯*κ_b({c : c ∉ rΓr⁻¹})` where `r` is the representative of coset `i`.
///
/// Computed as `1 − P(c·rΓ = rΓ)` by pushing the point mass at coset `i`
/// through `κ_b`, then `κ_{b−1}`, …, then `κ_a`.
pub fn window_outside_mass(t: &CFParams, space: &CosetSpace, i: usize, a: usize, b: usize) -> Result<Q> {
    let mut p = vec![Q::zero(); space.len()];
    p[i] = rational::one();
    for k in (a..=b).rev() {
        let kappa = t.kappa(k)?;
        let moves: Vec<(Vec<usize>, &Q)> = kappa
            .atoms()
            .map(|(c, w)| ((0..space.len()).map(|j| space.act(c, j)).collect(), w))
            .collect();
        let mut next = vec![Q::zero(); space.len()];
        for (j, pj) in p.iter().enumerate() {
            if pj.is_zero() {
                continue;
            }
            for (perm, w) in &moves {
                next[perm[j]] += pj * *w;
            }
        }
        p = next;
    }
    Ok(rational::one() - &p[i])
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub max_depth: usize,
    /// A positive report needs at least this many windows after the first block.
    pub min_windows: usize,
    pub threshold: Q,
    pub coset_cap: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { max_depth: 10, min_windows: 3, threshold: crate::verdict::default_threshold(), coset_cap: DEFAULT_COSET_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowEvidence {
    pub start: usize,
    pub end: usize,
    pub min_mass: Q,
    pub argmin: usize,
}

#[derive(Clone, Debug)]
pub struct FactorReport {
    pub target: CofiniteSubgroup,
    pub coset: Option<usize>,
    pub coset_rep: Option<GroupElement>,
    pub telescoping: Option<Vec<usize>>,
    /// Outside masses of the chosen windows (positive case) or the window
    /// minima over all cosets (refutation case).
    pub verdict: Verdict,
    pub windows: Vec<WindowEvidence>,
    pub map_witnesses: Vec<(CFPoint, FactorMapValue)>,
}

impl FactorReport {
    pub fn is_positive(&self) -> bool {
        self.coset.is_some()
    }

    pub fn to_json(&self, t: &CFParams) -> Value {
        let ctx = t.group();
        json!({
            "target": self.target.to_json(),
            "positive": self.is_positive(),
            "coset": self.coset,
            "coset_rep": self.coset_rep.as_ref().map(|g| ctx.element_to_json(g)),
            "telescoping": self.telescoping,
            "verdict": self.verdict.to_json(),
            "windows": self.windows.iter().map(|w| json!({
                "start": w.start,
                "end": w.end,
                "min_mass": rational::to_string(&w.min_mass),
                "argmin": w.argmin,
            })).collect::<Vec<_>>(),
            "map_witnesses": self.map_witnesses.iter().map(|(x, v)| json!({
                "point": x.to_json(t),
                "value": v.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Windows `[q_n + 1, q_{n+1}]` of the default schedule `q_{n+1} = q_n + n + 1`.
pub fn schedule_windows(max_depth: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let (mut q, mut n) = (0, 0);
    while q + n < max_depth {
        out.push((q + 1, q + n + 1));
        q += n + 1;
        n += 1;
    }
    out
}

fn greedy_windows(t: &CFParams, space: &CosetSpace, i: usize, q1: usize, max_depth: usize) -> Result<(Vec<usize>, Vec<Q>)> {
    let mut q = vec![0, q1];
    let mut masses = Vec::new();
    let mut n = 1;
    loop {
        let qn = q[n];
        let start = qn + 1;
        if start > max_depth {
            break;
        }
        let bound = rational::inv_pow(2, n as u32);
        let mut found = None;
        for end in start..=(qn + n + 1).min(max_depth) {
            let m = window_outside_mass(t, space, i, start, end)?;
            if m < bound {
                found = Some((end, m));
                break;
            }
        }
        match found {
            Some((end, m)) => {
                q.push(end);
                masses.push(m);
                n += 1;
            }
            None => break,
        }
    }
    Ok((q, masses))
}

fn sample_points(t: &CFParams, depth: usize, count: usize) -> Result<Vec<CFPoint>> {
    let one = t.group().identity();
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        let tail = (1..=depth)
            .map(|k| {
                let cs = t.kappa(k)?.support_vec();
                Ok(cs[(s * (k + 1) + s / 2) % cs.len()].clone())
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(CFPoint { base: 0, f: one.clone(), tail });
    }
    Ok(out)
}

/// Searches for a coset `gΓ` and a telescoping `l` whose windows have
/// outside mass below `2^{−n}`; otherwise reports the per-window minima over
/// all cosets along the default schedule as refutation evidence.
pub fn finite_factor_scan(t: &CFParams, gamma: &CofiniteSubgroup, opts: &ScanOptions) -> Result<FactorReport> {
    if opts.max_depth > t.depth_cap() {
        return Err(Error::DepthExceeded { stage: opts.max_depth, cap: t.depth_cap() });
    }
    let space = coset_table(gamma, opts.coset_cap)?;
    for q1 in 1..=opts.max_depth.saturating_sub(opts.min_windows) {
        for i in 0..space.len() {
            let (q, masses) = greedy_windows(t, &space, i, q1, opts.max_depth)?;
            if masses.len() >= opts.min_windows {
                let g = space.rep(i).clone();
                let mut verdict = Verdict::for_series(2, masses, &opts.threshold);
                if verdict.tag != VerdictTag::TermwiseZero {
                    verdict.tag = VerdictTag::ConvergentIndicated;
                }
                let windows = q
                    .windows(2)
                    .skip(1)
                    .zip(&verdict.terms)
                    .map(|(w, m)| WindowEvidence { start: w[0] + 1, end: w[1], min_mass: m.clone(), argmin: i })
                    .collect();
                let witnesses = sample_points(t, opts.max_depth, 4)?
                    .into_iter()
                    .map(|x| {
                        let v = finite_factor_map(t, &g, &space, &x, 1)?;
                        Ok((x, v))
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(FactorReport {
                    target: gamma.clone(),
                    coset: Some(i),
                    coset_rep: Some(g),
                    telescoping: Some(q),
                    verdict,
                    windows,
                    map_witnesses: witnesses,
                });
            }
        }
    }
    let mut windows = Vec::new();
    for (a, b) in schedule_windows(opts.max_depth) {
        let mut best: Option<(Q, usize)> = None;
        for i in 0..space.len() {
            let m = window_outside_mass(t, &space, i, a, b)?;
            if best.as_ref().is_none_or(|(bm, _)| m < *bm) {
                best = Some((m, i));
            }
        }
        let (min_mass, argmin) = best.expect("nonempty coset space");
        windows.push(WindowEvidence { start: a, end: b, min_mass, argmin });
    }
    let minima: Vec<Q> = windows.iter().map(|w| w.min_mass.clone()).collect();
    let mut verdict = Verdict::for_series(1, minima, &opts.threshold);
    if verdict.tag != VerdictTag::DivergentIndicated {
        verdict.tag = VerdictTag::Inconclusive;
        verdict.beyond = None;
    }
    Ok(FactorReport {
        target: gamma.clone(),
        coset: None,
        coset_rep: None,
        telescoping: None,
        verdict,
        windows,
        map_witnesses: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct TotalErgodicity {
    pub reports: Vec<FactorReport>,
    /// No supplied subgroup admits a compatible telescoping within the probe.
    pub totally_ergodic_relative: bool,
}

impl TotalErgodicity {
    pub fn to_json(&self, t: &CFParams) -> Value {
        json!({
            "totally_ergodic_relative": self.totally_ergodic_relative,
            "reports": self.reports.iter().map(|r| r.to_json(t)).collect::<Vec<_>>(),
        })
    }
}

pub fn total_ergodicity_scan(t: &CFParams, subgroups: &[CofiniteSubgroup], opts: &ScanOptions) -> Result<TotalErgodicity> {
    if let Some(s) = subgroups.iter().find(|s| s.index() == 1) {
        return Err(Error::Usage(format!("subgroup {} is not proper", s.to_json())));
    }
    let reports = subgroups.iter().map(|s| finite_factor_scan(t, s, opts)).collect::<Result<Vec<_>>>()?;
    let totally_ergodic_relative = reports.iter().all(|r| !r.is_positive());
    Ok(TotalErgodicity { reports, totally_ergodic_relative })
}
