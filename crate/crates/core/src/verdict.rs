//! Bounded-depth judgments of limit and summability conditions.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::rational::{self, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictTag {
    /// Every probed term beyond `Verdict::beyond` is exactly zero.
    TermwiseZero,
    ConvergentIndicated,
    DivergentIndicated,
    Inconclusive,
}

impl VerdictTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictTag::TermwiseZero => "termwise_zero",
            VerdictTag::ConvergentIndicated => "convergent_indicated",
            VerdictTag::DivergentIndicated => "divergent_indicated",
            VerdictTag::Inconclusive => "inconclusive",
        }
    }
}

/// A verdict together with the exact evidence it rests on.
///
/// `terms[i]` belongs to stage `first_stage + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub tag: VerdictTag,
    pub beyond: Option<usize>,
    pub first_stage: usize,
    pub terms: Vec<Q>,
    pub partial_sums: Vec<Q>,
}

pub fn default_threshold() -> Q {
    rational::inv_pow(10, 6)
}

pub const DEFAULT_PROBE_DEPTH: usize = 12;

fn prefix_sums(terms: &[Q]) -> Vec<Q> {
    let mut acc = Q::zero();
    terms
        .iter()
        .map(|t| {
            acc += t;
            acc.clone()
        })
        .collect()
}

impl Verdict {
    pub fn new(tag: VerdictTag, beyond: Option<usize>, first_stage: usize, terms: Vec<Q>) -> Self {
        let partial_sums = prefix_sums(&terms);
        Verdict { tag, beyond, first_stage, terms, partial_sums }
    }

    /// Judges `Σ terms` at the probed depth.
    ///
    /// Trailing exact zeros give `TermwiseZero` beyond the last nonzero
    /// stage. Terms bounded below by `threshold` over the second half of the
    /// window give `DivergentIndicated`. A non-increasing tail ending below
    /// `threshold` gives `ConvergentIndicated`.
    pub fn for_series(first_stage: usize, terms: Vec<Q>, threshold: &Q) -> Self {
        if terms.is_empty() {
            return Self::new(VerdictTag::Inconclusive, None, first_stage, terms);
        }
        if terms.last().is_some_and(|t| t.is_zero()) {
            let beyond = terms
                .iter()
                .rposition(|t| !t.is_zero())
                .map_or(first_stage.saturating_sub(1), |i| first_stage + i);
            return Self::new(VerdictTag::TermwiseZero, Some(beyond), first_stage, terms);
        }
        let tail = &terms[terms.len() / 2..];
        let tag = if tail.iter().all(|t| t >= threshold) {
            VerdictTag::DivergentIndicated
        } else if tail.windows(2).all(|w| w[1] <= w[0]) && terms.last().is_some_and(|t| t < threshold) {
            VerdictTag::ConvergentIndicated
        } else {
            VerdictTag::Inconclusive
        };
        Self::new(tag, None, first_stage, terms)
    }

    pub fn is_positive(&self) -> bool {
        matches!(self.tag, VerdictTag::TermwiseZero | VerdictTag::ConvergentIndicated)
    }

    pub fn depth(&self) -> usize {
        self.first_stage + self.terms.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.tag.as_str(),
            "beyond": self.beyond,
            "first_stage": self.first_stage,
            "terms": self.terms.iter().map(rational::to_string).collect::<Vec<_>>(),
            "partial_sums": self.partial_sums.iter().map(rational::to_string).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, inv_pow};

    #[test]
    fn classification() {
        let t = default_threshold();
        let v = Verdict::for_series(1, vec![frac(1, 2), frac(1, 2), frac(0, 1), frac(0, 1)], &t);
        assert_eq!(v.tag, VerdictTag::TermwiseZero);
        assert_eq!(v.beyond, Some(2));
        assert_eq!(v.partial_sums.last().unwrap(), &frac(1, 1));
        let v = Verdict::for_series(1, vec![frac(1, 4); 6], &t);
        assert_eq!(v.tag, VerdictTag::DivergentIndicated);
        let v = Verdict::for_series(1, (1..=24).map(|k| inv_pow(2, k)).collect(), &t);
        assert_eq!(v.tag, VerdictTag::ConvergentIndicated);
        let v = Verdict::for_series(1, vec![frac(1, 2), inv_pow(10, 7), frac(1, 3)], &t);
        assert_eq!(v.tag, VerdictTag::Inconclusive);
    }
}
