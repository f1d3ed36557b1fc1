//! Exact rationals and their string form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// `base^(-e)` as an exact rational.
pub fn inv_pow(base: i64, e: u32) -> Q {
    Q::new(BigInt::one(), BigInt::from(base).pow(e))
}

pub fn pow(base: i64, e: u32) -> Q {
    Q::from_integer(BigInt::from(base).pow(e))
}

/// Renders `p/q`, always with an explicit denominator.
pub fn to_string(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse(s: &str) -> Result<Q> {
    let bad = || Error::Usage(format!("not a rational: {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, d)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(p, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Lossy conversion, only for display and SVG coordinates.
pub fn to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn is_positive(q: &Q) -> bool {
    q.is_positive()
}

/// Sums rationals by first counting equal weights, which is much cheaper
/// than repeated big-rational additions when few distinct weights occur.
#[derive(Debug, Default, Clone)]
pub struct MassAccumulator {
    counts: std::collections::HashMap<Q, u64>,
}

impl MassAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, w: &Q) {
        if let Some(c) = self.counts.get_mut(w) {
            *c += 1;
        } else {
            self.counts.insert(w.clone(), 1);
        }
    }

    pub fn add_n(&mut self, w: &Q, n: u64) {
        *self.counts.entry(w.clone()).or_insert(0) += n;
    }

    pub fn total(&self) -> Q {
        self.counts
            .iter()
            .fold(Q::zero(), |acc, (w, c)| acc + w * Q::from_integer(BigInt::from(*c)))
    }
}
