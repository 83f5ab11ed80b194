//! Valid partial configurations: validity, gate-toggle moves, brute-force
//! enumeration, exact counts, ranking and uniform sampling.
//!
//! A configuration stores one clock per qubit. In a linear architecture of
//! depth `D` the clock is in `0..=D` and the gate of layer `d` on qubit `p`
//! is applied iff `d <= τ_p`. Circular clocks live in `Z_D` and are valid iff
//! some integer lift is valid for the periodically unrolled architecture.

use crate::architecture::{product_layer_bit, Architecture, Family, Slot};
use crate::error::{Error, Result};
use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

pub type CountInt = BigUint;
pub type Configuration = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Apply,
    Unapply,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub slot: Slot,
    pub direction: Direction,
}

fn check_len(arch: &Architecture, tau: &[usize]) -> Result<()> {
    if tau.len() != arch.n {
        return Err(Error::LengthMismatch {
            expected: arch.n,
            got: tau.len(),
        });
    }
    Ok(())
}

pub fn is_valid(arch: &Architecture, tau: &[usize]) -> Result<bool> {
    check_len(arch, tau)?;
    let depth = arch.depth();
    if arch.circular {
        if tau.iter().any(|&t| t >= depth) {
            return Ok(false);
        }
        return Ok(lift(arch, tau).is_some());
    }
    if tau.iter().any(|&t| t > depth) {
        return Ok(false);
    }
    Ok(arch.slots().iter().all(|s| {
        (s.layer <= tau[s.p - 1]) == (s.layer <= tau[s.q - 1])
    }))
}

/// Integer lift of a circular configuration, or `None` if no consistent lift
/// exists. Each connected component of the interaction graph is anchored at
/// its lowest qubit.
pub fn lift(arch: &Architecture, tau: &[usize]) -> Option<Vec<i64>> {
    let n = arch.n;
    let d = arch.depth() as i64;
    let adj = arch.interaction_graph();
    let shared: Vec<Vec<Vec<i64>>> = (1..=n)
        .map(|p| {
            adj[p - 1]
                .iter()
                .map(|&q| arch.shared_layers(p, q).into_iter().map(|s| s as i64).collect())
                .collect()
        })
        .collect();

    // L_q for the unique lift of τ_q sharing L_p's inter-gate interval.
    let partner_lift = |lp: i64, tq: usize, layers: &[i64]| -> Option<i64> {
        // gate at unrolled time s is applied iff clock >= s
        let mut prev = i64::MIN;
        let mut next = i64::MAX;
        for &s in layers {
            let base = s + d * (lp - s).div_euclid(d);
            prev = prev.max(base);
            next = next.min(base + d);
        }
        let lq = prev + (tq as i64 - prev).rem_euclid(d);
        (lq < next).then_some(lq)
    };

    let mut l = vec![None; n];
    for start in 0..n {
        if l[start].is_some() {
            continue;
        }
        l[start] = Some(tau[start] as i64);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let lp = l[p].unwrap();
            for (k, &q) in adj[p].iter().enumerate() {
                let lq = partner_lift(lp, tau[q - 1], &shared[p][k])?;
                match l[q - 1] {
                    None => {
                        l[q - 1] = Some(lq);
                        queue.push_back(q - 1);
                    }
                    Some(x) if x != lq => return None,
                    _ => {}
                }
            }
        }
    }
    Some(l.into_iter().map(Option::unwrap).collect())
}

pub fn available_moves(arch: &Architecture, tau: &[usize]) -> Result<Vec<Move>> {
    if !is_valid(arch, tau)? {
        return Err(Error::InvalidConfiguration(format!("{tau:?}")));
    }
    Ok(moves_unchecked(arch, &arch.partners(), tau))
}

fn moves_unchecked(arch: &Architecture, partners: &[Vec<usize>], tau: &[usize]) -> Vec<Move> {
    let depth = arch.depth();
    let mut out = Vec::new();
    for p in 1..=arch.n {
        let t = tau[p - 1];
        // next gate on p
        let next = if arch.circular {
            Some(t % depth + 1)
        } else if t < depth {
            Some(t + 1)
        } else {
            None
        };
        if let Some(layer) = next {
            let q = partners[layer - 1][p - 1];
            if p < q && tau[q - 1] == t {
                out.push(Move {
                    slot: Slot { layer, p, q },
                    direction: Direction::Apply,
                });
            }
        }
        let prev = if arch.circular {
            Some(if t == 0 { depth } else { t })
        } else if t > 0 {
            Some(t)
        } else {
            None
        };
        if let Some(layer) = prev {
            let q = partners[layer - 1][p - 1];
            if p < q && tau[q - 1] == t {
                out.push(Move {
                    slot: Slot { layer, p, q },
                    direction: Direction::Unapply,
                });
            }
        }
    }
    out.sort_by_key(|m| (m.slot, m.direction == Direction::Unapply));
    out
}

/// Result of toggling `mv`; the move must come from [`available_moves`].
pub fn apply_move(arch: &Architecture, tau: &[usize], mv: &Move) -> Configuration {
    let depth = arch.depth();
    let mut out = tau.to_vec();
    for i in [mv.slot.p, mv.slot.q] {
        out[i - 1] = match (mv.direction, arch.circular) {
            (Direction::Apply, false) => out[i - 1] + 1,
            (Direction::Unapply, false) => out[i - 1] - 1,
            (Direction::Apply, true) => (out[i - 1] + 1) % depth,
            (Direction::Unapply, true) => (out[i - 1] + depth - 1) % depth,
        };
    }
    out
}

/// Toggles the gate in `slot`: unapplies it if applied, applies it otherwise.
pub fn toggle(arch: &Architecture, tau: &[usize], slot: Slot) -> Option<Configuration> {
    moves_unchecked(arch, &arch.partners(), tau)
        .into_iter()
        .find(|m| m.slot == slot)
        .map(|m| apply_move(arch, tau, &m))
}

/// Every valid configuration, sorted, found by BFS from the all-zero clock.
pub fn enumerate_valid(arch: &Architecture, cap: usize) -> Result<Vec<Configuration>> {
    let partners = arch.partners();
    let zero = vec![0usize; arch.n];
    let mut seen: HashSet<Configuration> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(tau) = queue.pop_front() {
        for mv in moves_unchecked(arch, &partners, &tau) {
            let next = apply_move(arch, &tau, &mv);
            if !seen.contains(&next) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// `a_0 ..= a_l` with `a_0 = 1`, `a_1 = 2`.
pub fn bitonic_table(l: usize) -> Vec<CountInt> {
    let mut a: Vec<CountInt> = vec![BigUint::one(), BigUint::from(2u32)];
    for j in 2..=l {
        let x = &a[j - 1] * &a[j - 1] * 2u32;
        let y = &a[j - 2] * &a[j - 2];
        a.push(x - &y * &y);
    }
    a.truncate(l + 1);
    a
}

pub fn count_bitonic(l: usize) -> CountInt {
    bitonic_table(l).pop().unwrap()
}

pub fn count_first_layer_incomplete(l: usize) -> Result<CountInt> {
    if l < 1 {
        return Err(Error::InvalidRank(l));
    }
    let a = bitonic_table(l);
    Ok(&a[l] - &a[l - 1] * &a[l - 1])
}

pub fn count_product(l: usize, m: usize) -> Result<CountInt> {
    if l < 1 || m < 1 {
        return Err(Error::InvalidRank(l.min(m)));
    }
    let a = bitonic_table(l);
    let w = BigUint::from((m - 1) * l);
    Ok((&w + 1u32) * &a[l] - w * &a[l - 1] * &a[l - 1])
}

/// `(a_l - a_{l-1}^2) m l`. At `m = 1` the value is outside the theorem's
/// scope; see [`count_circular_tagged`].
pub fn count_circular(l: usize, m: usize) -> Result<CountInt> {
    Ok(count_first_layer_incomplete(l)? * BigUint::from(m * l))
}

/// Circular count plus whether a counting theorem backs it (`m >= 2`).
pub fn count_circular_tagged(l: usize, m: usize) -> Result<(CountInt, bool)> {
    Ok((count_circular(l, m)?, m >= 2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Linear,
    Circular,
}

pub fn count_qubit_at_zero(l: usize, m: usize, mode: Mode) -> Result<CountInt> {
    if l < 1 || m < 1 {
        return Err(Error::InvalidRank(l.min(m)));
    }
    let a = bitonic_table(l);
    Ok(match mode {
        Mode::Linear => a[1..l].iter().product(),
        Mode::Circular => &a[l] - &a[l - 1] * &a[l - 1],
    })
}

/// Exact count of valid configurations, by formula for the bitonic families
/// and by enumeration otherwise.
pub fn count(arch: &Architecture, cap: usize) -> Result<CountInt> {
    match arch.family {
        Family::Bitonic { l } => Ok(count_bitonic(l)),
        Family::Product { l, m } => count_product(l, m),
        Family::Circular { l, m } if m >= 2 => count_circular(l, m),
        _ => {
            let all = cached_enumeration(arch, cap)?;
            if all.len() > cap {
                return Err(Error::CapExceeded { cap });
            }
            Ok(BigUint::from(all.len()))
        }
    }
}

/// Width: spread of the clock values (of the lift, for circular architectures).
pub fn width(arch: &Architecture, tau: &[usize]) -> Result<usize> {
    if !is_valid(arch, tau)? {
        return Err(Error::InvalidConfiguration(format!("{tau:?}")));
    }
    if arch.circular {
        let l = lift(arch, tau).expect("valid");
        return Ok((l.iter().max().unwrap() - l.iter().min().unwrap()) as usize);
    }
    Ok(tau.iter().max().unwrap() - tau.iter().min().unwrap())
}

// ---- ranking on the canonical block ----

fn rank_block(j: usize, t: &[usize], a: &[CountInt]) -> CountInt {
    match j {
        0 => BigUint::zero(),
        1 => {
            if t[0] == 1 {
                BigUint::zero()
            } else {
                BigUint::one()
            }
        }
        _ => {
            let half = t.len() / 2;
            if t.iter().all(|&x| x >= 1) {
                let top: Vec<_> = t[..half].iter().map(|x| x - 1).collect();
                let bot: Vec<_> = t[half..].iter().map(|x| x - 1).collect();
                return rank_block(j - 1, &top, a) * &a[j - 1] + rank_block(j - 1, &bot, a);
            }
            let odd: Vec<_> = t.iter().step_by(2).copied().collect();
            let even: Vec<_> = t.iter().skip(1).step_by(2).copied().collect();
            let ro = rank_block(j - 1, &odd, a);
            let re = rank_block(j - 1, &even, a);
            let v = &a[j - 2] * &a[j - 2];
            let h = &a[j - 1] - &v;
            let base = &a[j - 1] * &a[j - 1];
            if ro >= v && re >= v {
                base + (ro - &v) * &h + (re - &v)
            } else if ro < v {
                base + &h * &h + ro * &h + (re - &v)
            } else {
                base + &h * &h + &v * &h + (ro - &v) * &v + re
            }
        }
    }
}

fn unrank_block(j: usize, idx: &CountInt, a: &[CountInt]) -> Vec<usize> {
    match j {
        0 => vec![0],
        1 => {
            if idx.is_zero() {
                vec![1, 1]
            } else {
                vec![0, 0]
            }
        }
        _ => {
            let sq = &a[j - 1] * &a[j - 1];
            if *idx < sq {
                let top = unrank_block(j - 1, &(idx / &a[j - 1]), a);
                let bot = unrank_block(j - 1, &(idx % &a[j - 1]), a);
                return top.iter().chain(&bot).map(|x| x + 1).collect();
            }
            let v = &a[j - 2] * &a[j - 2];
            let h = &a[j - 1] - &v;
            let mut r = idx - sq;
            let hh = &h * &h;
            let vh = &v * &h;
            let (ro, re) = if r < hh {
                (&v + &r / &h, &v + &r % &h)
            } else {
                r -= &hh;
                if r < vh {
                    (&r / &h, &v + &r % &h)
                } else {
                    r -= &vh;
                    (&v + &r / &v, &r % &v)
                }
            };
            let odd = unrank_block(j - 1, &ro, a);
            let even = unrank_block(j - 1, &re, a);
            odd.iter().zip(&even).flat_map(|(&x, &y)| [x, y]).collect()
        }
    }
}

/// Canonical-block index of qubit `i` (0-based) for the window whose first
/// layer is `r + 1` in a product of rank-`l` blocks.
fn window_local_index(l: usize, r: usize, i: usize) -> usize {
    (1..=l)
        .map(|k| ((i >> product_layer_bit(l, r + k)) & 1) << (l - k))
        .sum()
}

fn local_times(l: usize, r: usize, tau: &[usize], depth: usize) -> Vec<usize> {
    let mut t = vec![0; tau.len()];
    for (i, &x) in tau.iter().enumerate() {
        t[window_local_index(l, r, i)] = (x + depth - r) % depth.max(1);
    }
    t
}

fn from_local(l: usize, r: usize, t: &[usize], depth: Option<usize>) -> Configuration {
    (0..t.len())
        .map(|i| {
            let x = r + t[window_local_index(l, r, i)];
            depth.map_or(x, |d| x % d)
        })
        .collect()
}

type EnumKey = (usize, Vec<Vec<(usize, usize)>>, bool);

/// Sorted enumeration for architectures without a closed-form rank, cached
/// so repeated rank/unrank calls do not re-enumerate.
fn cached_enumeration(arch: &Architecture, cap: usize) -> Result<Arc<Vec<Configuration>>> {
    static CACHE: OnceLock<Mutex<HashMap<EnumKey, Arc<Vec<Configuration>>>>> = OnceLock::new();
    let key = (arch.n, arch.layers.clone(), arch.circular);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let all = Arc::new(enumerate_valid(arch, cap)?);
    cache.lock().expect("cache lock").insert(key, all.clone());
    Ok(all)
}

fn enumeration_rank(arch: &Architecture, tau: &[usize]) -> Result<CountInt> {
    let all = cached_enumeration(arch, crate::DEFAULT_CAP)?;
    all.binary_search_by(|x| x.as_slice().cmp(tau))
        .map(BigUint::from)
        .map_err(|_| Error::InvalidConfiguration(format!("{tau:?}")))
}

pub fn rank(arch: &Architecture, tau: &[usize]) -> Result<CountInt> {
    if !is_valid(arch, tau)? {
        return Err(Error::InvalidConfiguration(format!("{tau:?}")));
    }
    match arch.family {
        Family::Bitonic { l } => Ok(rank_block(l, tau, &bitonic_table(l))),
        Family::Product { l, m } => {
            let a = bitonic_table(l);
            let v = &a[l - 1] * &a[l - 1];
            let h = &a[l] - &v;
            let last = (m - 1) * l;
            let r = (*tau.iter().min().unwrap()).min(last);
            // depth large enough that the modulus never wraps
            let t = local_times(l, r, tau, usize::MAX / 2);
            let lr = rank_block(l, &t, &a);
            Ok(if r < last {
                h * BigUint::from(r) + (lr - v)
            } else {
                h * BigUint::from(last) + lr
            })
        }
        Family::Circular { l, m } if m >= 2 => {
            let depth = l * m;
            let a = bitonic_table(l);
            let v = &a[l - 1] * &a[l - 1];
            let h = &a[l] - &v;
            let r = *tau
                .iter()
                .find(|&&s| tau.iter().all(|&x| (x + depth - s) % depth < l))
                .ok_or_else(|| Error::InvalidConfiguration(format!("{tau:?}")))?;
            let lr = rank_block(l, &local_times(l, r, tau, depth), &a);
            Ok(h * BigUint::from(r) + (lr - v))
        }
        _ => enumeration_rank(arch, tau),
    }
}

pub fn unrank(arch: &Architecture, idx: &CountInt) -> Result<Configuration> {
    let total = count(arch, crate::DEFAULT_CAP)?;
    if *idx >= total {
        return Err(Error::IndexOutOfRange(format!("{idx} >= {total}")));
    }
    match arch.family {
        Family::Bitonic { l } => Ok(unrank_block(l, idx, &bitonic_table(l))),
        Family::Product { l, m } => {
            let a = bitonic_table(l);
            let v = &a[l - 1] * &a[l - 1];
            let h = &a[l] - &v;
            let last = (m - 1) * l;
            let bound = &h * BigUint::from(last);
            let (r, lr) = if *idx < bound {
                ((idx / &h).to_usize().unwrap(), &v + idx % &h)
            } else {
                (last, idx - bound)
            };
            Ok(from_local(l, r, &unrank_block(l, &lr, &a), None))
        }
        Family::Circular { l, m } if m >= 2 => {
            let a = bitonic_table(l);
            let v = &a[l - 1] * &a[l - 1];
            let h = &a[l] - &v;
            let r = (idx / &h).to_usize().unwrap();
            let lr = &v + idx % &h;
            Ok(from_local(l, r, &unrank_block(l, &lr, &a), Some(l * m)))
        }
        _ => {
            let all = cached_enumeration(arch, crate::DEFAULT_CAP)?;
            Ok(all[idx.to_usize().unwrap()].clone())
        }
    }
}

/// Uniform configuration: unrank of a uniform index below the exact count.
pub fn sample_uniform<R: Rng>(arch: &Architecture, rng: &mut R) -> Result<Configuration> {
    let total = count(arch, crate::DEFAULT_CAP)?;
    let idx = rng.gen_biguint_below(&total);
    unrank(arch, &idx)
}
