//! Echelon bases for full-rank sublattices of `Z^d`.

use crate::error::{Error, Result};

/// Upper-triangular basis: row `i` vanishes before coordinate `i` and has a
/// positive pivot there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vec<i64>>,
}

impl Echelon {
    pub fn new(d: usize, generators: &[Vec<i64>]) -> Result<Self> {
        if generators.iter().any(|g| g.len() != d) {
            return Err(Error::Usage(format!("lattice generators must have length {d}")));
        }
        let mut pool: Vec<Vec<i128>> =
            generators.iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect();
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            // Euclid on coordinate i across the pool.
            loop {
                let mut nz: Vec<usize> = (0..pool.len()).filter(|&k| pool[k][i] != 0).collect();
                if nz.len() <= 1 {
                    break;
                }
                nz.sort_by_key(|&k| pool[k][i].abs());
                let p = nz[0];
                let pivot = pool[p].clone();
                for &k in &nz[1..] {
                    let q = pool[k][i].div_euclid(pivot[i]);
                    for j in 0..d {
                        pool[k][j] -= q * pivot[j];
                    }
                }
            }
            let p = pool
                .iter()
                .position(|v| v[i] != 0)
                .ok_or_else(|| Error::Usage("lattice does not have full rank (infinite index)".into()))?;
            let mut row = pool.swap_remove(p);
            if row[i] < 0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            let row: Vec<i64> = row
                .into_iter()
                .map(|x| i64::try_from(x).map_err(|_| Error::Resource("lattice entries overflow".into())))
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        Ok(Echelon { rows })
    }

    pub fn index(&self) -> u64 {
        self.rows.iter().enumerate().map(|(i, r)| r[i] as u64).product()
    }

    /// Canonical representative of `v` modulo the lattice, with `0 <= v_i < pivot_i`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let q = v[i].div_euclid(row[i] as i128);
            for j in i..v.len() {
                v[j] -= q * row[j] as i128;
            }
        }
        v.into_iter().map(|x| x as i64).collect()
    }
}
