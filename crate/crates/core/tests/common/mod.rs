//! Brute-force oracles shared by the integration tests. They share no code
//! with the library's clock-based algorithms.
#![allow(dead_code)]

use spacetime_core::architecture::Architecture;
use std::collections::BTreeSet;

/// Down-closed gate sets of a linear architecture, found by deciding each slot
/// in layer order. Returns the clock vector of every ideal.
pub fn ideal_configs(arch: &Architecture) -> BTreeSet<Vec<usize>> {
    let n = arch.n;
    let mut slots = Vec::new();
    for (d, layer) in arch.layers.iter().enumerate() {
        for &(p, q) in layer {
            slots.push((d + 1, p, q));
        }
    }
    // predecessor slot index on each endpoint
    let mut last: Vec<Option<usize>> = vec![None; n + 1];
    let mut preds = Vec::new();
    for (k, &(_, p, q)) in slots.iter().enumerate() {
        preds.push([last[p], last[q]]);
        last[p] = Some(k);
        last[q] = Some(k);
    }
    let mut out = BTreeSet::new();
    let mut applied = vec![false; slots.len()];
    fn rec(
        k: usize,
        slots: &[(usize, usize, usize)],
        preds: &[[Option<usize>; 2]],
        applied: &mut Vec<bool>,
        n: usize,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if k == slots.len() {
            let mut tau = vec![0; n];
            for (s, &(_, p, q)) in slots.iter().enumerate() {
                if applied[s] {
                    tau[p - 1] += 1;
                    tau[q - 1] += 1;
                }
            }
            out.insert(tau);
            return;
        }
        applied[k] = false;
        rec(k + 1, slots, preds, applied, n, out);
        if preds[k].iter().all(|p| p.map_or(true, |i| applied[i])) {
            applied[k] = true;
            rec(k + 1, slots, preds, applied, n, out);
            applied[k] = false;
        }
    }
    rec(0, &slots, &preds, &mut applied, n, &mut out);
    out
}

/// Circular configurations of `arch` (circular, depth D), obtained from the
/// ideals of the unrolled linear architecture with `extra` more layers: every
/// configuration whose minimum clock is below D, reduced mod D.
pub fn circular_configs(arch: &Architecture, extra: usize) -> BTreeSet<Vec<usize>> {
    let d = arch.depth();
    let mut layers = arch.layers.clone();
    for k in 0..extra {
        layers.push(arch.layers[k % d].clone());
    }
    let unrolled = Architecture::new(arch.n, layers, false).unwrap();
    ideal_configs(&unrolled)
        .into_iter()
        .filter(|t| *t.iter().min().unwrap() < d)
        .map(|t| t.into_iter().map(|x| x % d).collect())
        .collect()
}

/// Natural log of a big integer without overflowing f64.
pub fn ln_big(x: &num_bigint::BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 60 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).ln();
    }
    let shift = bits - 60;
    let top: num_bigint::BigUint = x >> shift;
    (top.iter_u64_digits().next().unwrap() as f64).ln() + shift as f64 * std::f64::consts::LN_2
}
