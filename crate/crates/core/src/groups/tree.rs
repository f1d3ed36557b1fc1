//! Finitary maps of the rooted binary tree of depth `N`.
//!
//! An element is a table of per-node swap bits packed into a `u64`. The node
//! for a prefix `p` of length `k` (first letter most significant) sits at bit
//! `2^k - 1 + p`. Points of `{0,1}^N` are `u64`s with the first letter as the
//! most significant of the `N` bits.

pub const MAX_DEPTH: u32 = 6;

pub fn node(k: u32, prefix: u64) -> u32 {
    ((1u64 << k) - 1 + prefix) as u32
}

fn bit(g: u64, k: u32, prefix: u64) -> u64 {
    (g >> node(k, prefix)) & 1
}

/// The element swapping the letter below the node `prefix` of length `k`.
pub fn swap(k: u32, prefix: u64) -> u64 {
    1u64 << node(k, prefix)
}

/// Image of a word of length `len <= depth` under `g`.
pub fn apply(g: u64, len: u32, word: u64) -> u64 {
    let mut out = 0u64;
    for k in 0..len {
        let prefix = word >> (len - k);
        let letter = (word >> (len - k - 1)) & 1;
        out = (out << 1) | (letter ^ bit(g, k, prefix));
    }
    out
}

/// `g * h`, acting as `g` after `h`.
pub fn mul(depth: u32, g: u64, h: u64) -> u64 {
    let mut out = 0u64;
    for k in 0..depth {
        for p in 0..(1u64 << k) {
            let b = bit(h, k, p) ^ bit(g, k, apply(h, k, p));
            out |= b << node(k, p);
        }
    }
    out
}

pub fn inv(depth: u32, g: u64) -> u64 {
    let mut out = 0u64;
    for k in 0..depth {
        for p in 0..(1u64 << k) {
            let q = apply(g, k, p);
            out |= bit(g, k, p) << node(k, q);
        }
    }
    out
}

pub fn all_swaps(depth: u32) -> Vec<u64> {
    (0..depth)
        .flat_map(|k| (0..(1u64 << k)).map(move |p| swap(k, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_acts_as_function_composition() {
        let d = 3;
        let elems: Vec<u64> = (0..(1u64 << 7)).collect();
        for &g in elems.iter().step_by(5) {
            for &h in elems.iter().step_by(7) {
                let gh = mul(d, g, h);
                for z in 0..8 {
                    assert_eq!(apply(gh, d, z), apply(g, d, apply(h, d, z)));
                }
                assert_eq!(mul(d, g, inv(d, g)), 0);
            }
        }
    }

    #[test]
    fn root_swap_flips_first_letter() {
        assert_eq!(apply(swap(0, 0), 2, 0b01), 0b11);
        // swap below the node "1" leaves words starting with 0 alone
        let r = swap(1, 1);
        assert_eq!(apply(r, 2, 0b00), 0b00);
        assert_eq!(apply(r, 2, 0b10), 0b11);
    }
}
