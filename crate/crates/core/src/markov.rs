//! Reversible Markov chains on configurations and tilings: exact spectral
//! gaps, conductance, the window decomposition and its aggregate and
//! restricted chains, and seeded MCMC diagnostics.

use crate::architecture::{build_bitonic_block, build_circular, Architecture};
use crate::configurations::{available_moves, bitonic_table, enumerate_valid, Configuration};
use crate::error::{Error, Result};
use crate::lanczos::{extreme_eigenpair, Which};
use crate::tilings::{config_to_tiling, flip_edge, flippable_edges, DyadicTiling};
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};

const TOL: f64 = 1e-12;
/// Chains up to this many states are diagonalized densely.
pub const DENSE_LIMIT: usize = 2500;

/// Sparse row-stochastic matrix with its stationary distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReversibleChain {
    /// Row `x` lists `(y, P_xy)` sorted by `y`, diagonal included.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub pi: Vec<f64>,
}

impl ReversibleChain {
    /// Validates stochasticity, detailed balance and irreducibility.
    pub fn new(mut rows: Vec<Vec<(usize, f64)>>, pi: Vec<f64>) -> Result<Self> {
        if rows.len() != pi.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                got: pi.len(),
            });
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
            r.retain(|e| e.1 != 0.0);
        }
        let c = Self { rows, pi };
        for (x, r) in c.rows.iter().enumerate() {
            let s: f64 = r.iter().map(|e| e.1).sum();
            if (s - 1.0).abs() > TOL || r.iter().any(|e| e.1 < -TOL) {
                return Err(Error::InvalidParameter(format!("row {x} sums to {s}")));
            }
            for &(y, p) in r {
                let back = c.entry(y, x);
                if (c.pi[x] * p - c.pi[y] * back).abs() > TOL {
                    return Err(Error::NonReversible(format!("pair ({x}, {y})")));
                }
            }
        }
        if !c.is_irreducible() {
            return Err(Error::Disconnected);
        }
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.rows[x]
            .binary_search_by_key(&y, |e| e.0)
            .map(|i| self.rows[x][i].1)
            .unwrap_or(0.0)
    }

    fn is_irreducible(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.rows[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (x, r) in self.rows.iter().enumerate() {
            for &(y, p) in r {
                m[(x, y)] = p;
            }
        }
        m
    }

    /// `D^{1/2} P D^{-1/2}`, symmetric by detailed balance.
    fn symmetrized_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let s: Vec<f64> = self.pi.iter().map(|p| p.sqrt()).collect();
        let mut m = DMatrix::zeros(n, n);
        for (x, r) in self.rows.iter().enumerate() {
            for &(y, p) in r {
                m[(x, y)] = s[x] * p / s[y];
            }
        }
        // clear rounding asymmetry
        (&m + m.transpose()) * 0.5
    }

    fn symmetrized_matvec(&self, v: &[f64], out: &mut [f64]) {
        for (x, r) in self.rows.iter().enumerate() {
            let sx = self.pi[x].sqrt();
            out[x] = r.iter().map(|&(y, p)| sx * p / self.pi[y].sqrt() * v[y]).sum();
        }
    }
}

/// Configurations as vertices, single gate toggles as edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigGraph {
    pub states: Vec<Configuration>,
    pub adj: Vec<Vec<usize>>,
}

impl ConfigGraph {
    pub fn index_of(&self, tau: &[usize]) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_slice().cmp(tau)).ok()
    }

    pub fn is_connected(&self) -> bool {
        let rows: Vec<Vec<(usize, f64)>> = self
            .adj
            .iter()
            .map(|a| a.iter().map(|&y| (y, 1.0)).collect())
            .collect();
        ReversibleChain {
            rows,
            pi: vec![0.0; self.adj.len()],
        }
        .is_irreducible()
    }
}

pub fn config_graph(arch: &Architecture, cap: usize) -> Result<ConfigGraph> {
    let states = enumerate_valid(arch, cap)?;
    let index: HashMap<&[usize], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let mut adj = Vec::with_capacity(states.len());
    for s in &states {
        let mut nb: Vec<usize> = available_moves(arch, s)?
            .iter()
            .map(|m| index[crate::configurations::apply_move(arch, s, m).as_slice()])
            .collect();
        nb.sort_unstable();
        nb.dedup();
        adj.push(nb);
    }
    Ok(ConfigGraph { states, adj })
}

/// Largest eigenvalue of the combinatorial Laplacian.
pub fn laplacian_norm(g: &ConfigGraph) -> Result<f64> {
    let n = g.adj.len();
    if n <= DENSE_LIMIT {
        let l = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                g.adj[i].len() as f64
            } else if g.adj[i].binary_search(&j).is_ok() {
                -1.0
            } else {
                0.0
            }
        });
        let e = SymmetricEigen::new(l);
        return Ok(e.eigenvalues.iter().copied().fold(0.0, f64::max));
    }
    let op = |v: &[f64], out: &mut [f64]| {
        for (i, a) in g.adj.iter().enumerate() {
            out[i] = a.len() as f64 * v[i] - a.iter().map(|&j| v[j]).sum::<f64>();
        }
    };
    Ok(extreme_eigenpair(n, op, &[], Which::Largest, 1e-10, 600)?.value)
}

/// `P = I - L / ||L||` with uniform stationary distribution.
pub fn chain_from_laplacian(g: &ConfigGraph) -> Result<ReversibleChain> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.adj.len();
    if n == 1 {
        return ReversibleChain::new(vec![vec![(0, 1.0)]], vec![1.0]);
    }
    let norm = laplacian_norm(g)?;
    let rows = g
        .adj
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let mut r: Vec<(usize, f64)> = a.iter().map(|&y| (y, 1.0 / norm)).collect();
            r.push((x, 1.0 - a.len() as f64 / norm));
            r
        })
        .collect();
    ReversibleChain::new(rows, vec![1.0 / n as f64; n])
}

/// Lazy toggle chain: every available move fires with probability `rate`.
/// The default rate `1/(nD)` picks a uniform (qubit, layer, direction).
pub fn toggle_chain(g: &ConfigGraph, rate: f64) -> Result<ReversibleChain> {
    let n = g.adj.len();
    let rows = g
        .adj
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let mut r: Vec<(usize, f64)> = a.iter().map(|&y| (y, rate)).collect();
            r.push((x, 1.0 - a.len() as f64 * rate));
            r
        })
        .collect();
    ReversibleChain::new(rows, vec![1.0 / n as f64; n])
}

pub fn default_toggle_rate(arch: &Architecture) -> f64 {
    1.0 / (arch.n * arch.depth()) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipVariant {
    /// Hold in place when the chosen edge is not flippable.
    Lazy,
    /// Redraw until a flippable edge is chosen.
    Resample,
}

/// Exact edge-flip chain over all rank-`l` tilings, states ordered like the
/// configurations they come from.
pub fn edge_flip_chain(
    l: u32,
    variant: FlipVariant,
    cap: usize,
) -> Result<(Vec<DyadicTiling>, ReversibleChain)> {
    let arch = build_bitonic_block(l as usize)?;
    let configs = enumerate_valid(&arch, cap)?;
    let tilings: Vec<DyadicTiling> = configs
        .iter()
        .map(|t| config_to_tiling(l, t))
        .collect::<Result<_>>()?;
    let index: HashMap<&DyadicTiling, usize> =
        tilings.iter().enumerate().map(|(i, t)| (t, i)).collect();
    // each flippable segment is a full side of both tiles it separates
    let pick = 2.0 / (4u64 << l) as f64;
    let mut rows = Vec::with_capacity(tilings.len());
    let mut deg = Vec::with_capacity(tilings.len());
    for (x, d) in tilings.iter().enumerate() {
        let segs = flippable_edges(d);
        let p = match variant {
            FlipVariant::Lazy => pick,
            FlipVariant::Resample => 1.0 / segs.len() as f64,
        };
        let mut r: Vec<(usize, f64)> = segs
            .iter()
            .map(|s| Ok((index[&flip_edge(d, s)?], p)))
            .collect::<Result<_>>()?;
        r.push((x, 1.0 - segs.len() as f64 * p));
        rows.push(r);
        deg.push(segs.len() as f64);
    }
    let pi = match variant {
        FlipVariant::Lazy => vec![1.0 / tilings.len() as f64; tilings.len()],
        FlipVariant::Resample => {
            let total: f64 = deg.iter().sum();
            deg.iter().map(|d| d / total).collect()
        }
    };
    Ok((tilings, ReversibleChain::new(rows, pi)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub states: usize,
    pub gap: f64,
    pub lambda2: f64,
    pub method: String,
    pub residual: f64,
}

pub fn spectral_gap(chain: &ReversibleChain) -> Result<GapReport> {
    if chain.len() <= DENSE_LIMIT {
        spectral_gap_dense(chain)
    } else {
        spectral_gap_iterative(chain)
    }
}

pub fn spectral_gap_dense(chain: &ReversibleChain) -> Result<GapReport> {
    let n = chain.len();
    if n == 1 {
        return Ok(GapReport {
            states: 1,
            gap: 1.0,
            lambda2: 0.0,
            method: "dense".into(),
            residual: 0.0,
        });
    }
    let s = chain.symmetrized_dense();
    let e = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    let i2 = order[1];
    let lambda2 = e.eigenvalues[i2];
    let v = e.eigenvectors.column(i2);
    let residual = (&s * v - v * lambda2).norm();
    Ok(GapReport {
        states: n,
        gap: 1.0 - lambda2,
        lambda2,
        method: "dense".into(),
        residual,
    })
}

/// Largest eigenvalue of the symmetrized chain off the stationary direction.
pub fn spectral_gap_iterative(chain: &ReversibleChain) -> Result<GapReport> {
    let n = chain.len();
    let top: Vec<f64> = chain.pi.iter().map(|p| p.sqrt()).collect();
    let pair = extreme_eigenpair(
        n,
        |v, out| chain.symmetrized_matvec(v, out),
        &[top],
        Which::Largest,
        1e-10,
        1500,
    )?;
    Ok(GapReport {
        states: n,
        gap: 1.0 - pair.value,
        lambda2: pair.value,
        method: "lanczos".into(),
        residual: pair.residual,
    })
}

/// Ergodic flow out of `s` divided by `pi(s)`, evaluated on the side of the
/// cut with smaller stationary mass (the flow is symmetric).
pub fn conductance(chain: &ReversibleChain, s: &[usize]) -> Result<f64> {
    let n = chain.len();
    let mut inside = vec![false; n];
    for &x in s {
        if x >= n {
            return Err(Error::IndexOutOfRange(format!("state {x}")));
        }
        inside[x] = true;
    }
    let k = inside.iter().filter(|b| **b).count();
    if k == 0 || k == n {
        return Err(Error::InvalidParameter("cut must be a proper nonempty subset".into()));
    }
    let mass: f64 = (0..n).filter(|&x| inside[x]).map(|x| chain.pi[x]).sum();
    let flow: f64 = (0..n)
        .filter(|&x| inside[x])
        .flat_map(|x| chain.rows[x].iter().map(move |e| (x, e)))
        .filter(|(_, e)| !inside[e.0])
        .map(|(x, e)| chain.pi[x] * e.1)
        .sum();
    Ok(flow / mass.min(1.0 - mass))
}

/// `(Phi, Phi^2 / 2)` with Phi minimized over `cuts`, or over every cut
/// when `cuts` is `None` and the chain has at most 20 states.
pub fn cheeger_bound(chain: &ReversibleChain, cuts: Option<&[Vec<usize>]>) -> Result<(f64, f64)> {
    let phi = match cuts {
        Some(cs) => cs
            .iter()
            .map(|c| conductance(chain, c))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min),
        None => {
            let n = chain.len();
            if n > 20 {
                return Err(Error::InvalidParameter(
                    "exhaustive cuts need at most 20 states".into(),
                ));
            }
            let mut best = f64::INFINITY;
            for mask in 1u32..(1 << n) - 1 {
                let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                best = best.min(conductance(chain, &s)?);
            }
            best
        }
    };
    Ok((phi, phi * phi / 2.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub blocks: Vec<Vec<usize>>,
    pub theta: usize,
}

impl Decomposition {
    pub fn new(n_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut mult = vec![0usize; n_states];
        for b in &blocks {
            for &x in b {
                *mult.get_mut(x).ok_or_else(|| Error::IndexOutOfRange(format!("state {x}")))? += 1;
            }
        }
        if mult.contains(&0) {
            return Err(Error::InvalidParameter("blocks do not cover the state space".into()));
        }
        let theta = mult.into_iter().max().unwrap_or(0);
        Ok(Self { blocks, theta })
    }
}

/// Windows `Omega_r = {tau : (t_i - r) mod D <= l for all i}` of the circular
/// architecture with `m` blocks, one per start `r` in `0..D`.
pub fn block_decomposition(l: usize, m: usize, cap: usize) -> Result<(ConfigGraph, Decomposition)> {
    let arch = build_circular(l, m)?;
    let g = config_graph(&arch, cap)?;
    let depth = arch.depth();
    let blocks = (0..depth)
        .map(|r| {
            (0..g.states.len())
                .filter(|&x| g.states[x].iter().all(|&t| (t + depth - r) % depth <= l))
                .collect()
        })
        .collect();
    let d = Decomposition::new(g.states.len(), blocks)?;
    Ok((g, d))
}

/// `a_{l-j}^{2^j} / a_l`.
pub fn overlap_ratio(l: usize, j: usize) -> Result<BigRational> {
    if j == 0 || j >= l {
        return Err(Error::InvalidParameter(format!("need 1 <= j < l, got j={j}, l={l}")));
    }
    let a = bitonic_table(l);
    let num: BigUint = num_traits::pow(a[l - j].clone(), 1usize << j);
    Ok(BigRational::new(num.into(), a[l].clone().into()))
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Pbar(i, j) = pi(Omega_i ∩ Omega_j) / (Theta pi(Omega_i))` off the
/// diagonal, residual mass on it.
pub fn aggregate_chain(chain: &ReversibleChain, d: &Decomposition) -> Result<ReversibleChain> {
    let n = chain.len();
    let k = d.blocks.len();
    let mut member = vec![vec![false; n]; k];
    for (i, b) in d.blocks.iter().enumerate() {
        for &x in b {
            member[i][x] = true;
        }
    }
    let mass: Vec<f64> = d
        .blocks
        .iter()
        .map(|b| b.iter().map(|&x| chain.pi[x]).sum())
        .collect();
    let theta = d.theta as f64;
    let mut rows = Vec::with_capacity(k);
    for i in 0..k {
        let mut r = Vec::new();
        let mut off = 0.0;
        for j in (0..k).filter(|&j| j != i) {
            let inter: f64 = d.blocks[i]
                .iter()
                .filter(|&&x| member[j][x])
                .map(|&x| chain.pi[x])
                .sum();
            if inter > 0.0 {
                let p = inter / (theta * mass[i]);
                off += p;
                r.push((j, p));
            }
        }
        r.push((i, 1.0 - off));
        rows.push(r);
    }
    let total: f64 = mass.iter().sum();
    ReversibleChain::new(rows, mass.iter().map(|m| m / total).collect())
}

/// `P` restricted to `block`; moves leaving the block become holds.
pub fn restricted_chain(chain: &ReversibleChain, block: &[usize]) -> Result<ReversibleChain> {
    let local: HashMap<usize, usize> = block.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mass: f64 = block.iter().map(|&x| chain.pi[x]).sum();
    let rows = block
        .iter()
        .map(|&x| {
            let mut r = Vec::new();
            let mut hold = 0.0;
            for &(y, p) in &chain.rows[x] {
                match local.get(&y) {
                    Some(&j) if y != x => r.push((j, p)),
                    _ => hold += p,
                }
            }
            r.push((local[&x], hold));
            r
        })
        .collect();
    ReversibleChain::new(rows, block.iter().map(|&x| chain.pi[x] / mass).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionBound {
    pub gap: f64,
    pub aggregate_gap: f64,
    pub min_restricted_gap: f64,
    pub bound: f64,
    pub theta: usize,
    pub holds: bool,
}

/// `gap(P) >= 1/2 gap(Pbar) min_i gap(P_i)`, every side solved exactly.
pub fn decomposition_bound(chain: &ReversibleChain, d: &Decomposition) -> Result<DecompositionBound> {
    let gap = spectral_gap(chain)?.gap;
    let aggregate_gap = spectral_gap(&aggregate_chain(chain, d)?)?.gap;
    let mut min_restricted_gap = f64::INFINITY;
    for b in &d.blocks {
        let g = spectral_gap(&restricted_chain(chain, b)?)?.gap;
        min_restricted_gap = min_restricted_gap.min(g);
    }
    let bound = 0.5 * aggregate_gap * min_restricted_gap;
    Ok(DecompositionBound {
        gap,
        aggregate_gap,
        min_restricted_gap,
        bound,
        theta: d.theta,
        holds: gap >= bound - 1e-10,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ChainSpec {
    EdgeFlip { l: u32, variant: FlipVariant },
    /// Lazy toggle chain with the default `1/(nD)` rate.
    Toggle { arch: Architecture },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McmcReport {
    pub steps: u64,
    pub seed: u64,
    /// Number of applied gates (vertical segments) along the trajectory,
    /// sampled every `thin` steps.
    pub trace: Vec<u32>,
    pub thin: u64,
    pub mean_observable: f64,
    pub autocorrelation: Vec<f64>,
    pub tau_int: f64,
    /// `2 / (1 + tau_int)`, exact for a single geometric mode.
    pub gap_estimate: f64,
    pub distinct_states: usize,
    /// Total variation distance from uniform over the exact state set.
    pub tv_uniform: Option<f64>,
}

/// Tiling as a set of grid boxes, for O(1) neighbor lookups.
struct TilingWalk {
    l: u32,
    boxes: HashSet<(u64, u64, u64, u64)>,
    order: Vec<(u64, u64, u64, u64)>,
}

impl TilingWalk {
    fn new(d: &DyadicTiling) -> Self {
        let order: Vec<_> = d.rects.iter().map(|r| r.grid(d.l)).collect();
        Self {
            l: d.l,
            boxes: order.iter().copied().collect(),
            order,
        }
    }

    /// Partner tile across `side` of `b`, when the pair's union is dyadic.
    fn partner(&self, b: (u64, u64, u64, u64), side: u8) -> Option<(u64, u64, u64, u64)> {
        let (x0, y0, x1, y1) = b;
        let (w, h) = (x1 - x0, y1 - y0);
        let (o, lower) = match side {
            0 => ((x0, y1, x1, y1 + h), (x0, y0, x1, y1)),
            1 if y0 >= h => ((x0, y0 - h, x1, y0), (x0, y0 - h, x1, y0)),
            2 => ((x1, y0, x1 + w, y1), (x0, y0, x1, y1)),
            3 if x0 >= w => ((x0 - w, y0, x0, y1), (x0 - w, y0, x0, y1)),
            _ => return None,
        };
        if !self.boxes.contains(&o) {
            return None;
        }
        let ok = if side < 2 { lower.1 % (2 * h) == 0 } else { lower.0 % (2 * w) == 0 };
        ok.then_some(o)
    }

    fn flip(&mut self, b: (u64, u64, u64, u64), o: (u64, u64, u64, u64)) {
        let (x0, y0, x1, y1) = (b.0.min(o.0), b.1.min(o.1), b.2.max(o.2), b.3.max(o.3));
        let halves = if b.0 == o.0 {
            let xm = (x0 + x1) / 2;
            [(x0, y0, xm, y1), (xm, y0, x1, y1)]
        } else {
            let ym = (y0 + y1) / 2;
            [(x0, y0, x1, ym), (x0, ym, x1, y1)]
        };
        self.boxes.remove(&b);
        self.boxes.remove(&o);
        for slot in self.order.iter_mut() {
            if *slot == b {
                *slot = halves[0];
            } else if *slot == o {
                *slot = halves[1];
            }
        }
        self.boxes.extend(halves);
    }

    /// Sum of horizontal refinements over tiles, halved: the number of
    /// vertical segments.
    fn observable(&self) -> u32 {
        let n = 1u64 << self.l;
        let s: u32 = self.order.iter().map(|b| (n / (b.2 - b.0)).trailing_zeros()).sum();
        s / 2
    }

    fn key(&self) -> Vec<(u64, u64, u64, u64)> {
        let mut k = self.order.clone();
        k.sort_unstable();
        k
    }
}

fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            if var == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            let c: f64 = (0..n - k).map(|i| (x[i] - mean) * (x[i + k] - mean)).sum();
            c / ((n - k) as f64 * var)
        })
        .collect()
}

/// Integrated autocorrelation time with the usual self-consistent window
/// `k <= 5 tau`.
fn tau_int(rho: &[f64]) -> f64 {
    let mut tau = 1.0;
    for (k, r) in rho.iter().enumerate().skip(1) {
        if (k as f64) > 5.0 * tau {
            break;
        }
        tau += 2.0 * r;
    }
    tau.max(1.0)
}

/// Seeded trajectory from the chain's empty state (all-horizontal tiling or
/// all-zero clocks).
pub fn mcmc_run(spec: &ChainSpec, steps: u64, seed: u64, thin: u64, cap: usize) -> Result<McmcReport> {
    let thin = thin.max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut obs: Vec<f64> = Vec::with_capacity(steps as usize + 1);
    let mut trace = Vec::new();
    let mut visits: HashMap<Vec<u64>, u64> = HashMap::new();
    let exact_states: Option<usize>;

    match spec {
        ChainSpec::EdgeFlip { l, variant } => {
            let l = *l;
            let a = &bitonic_table(l as usize)[l as usize];
            exact_states = a.to_usize().filter(|&k| k <= cap);
            let mut walk = TilingWalk::new(&DyadicTiling::strips(l));
            let tiles = 1usize << l;
            for step in 0..=steps {
                let v = walk.observable();
                obs.push(v as f64);
                if step % thin == 0 {
                    trace.push(v);
                }
                if exact_states.is_some() {
                    let key = walk.key().into_iter().flat_map(|b| [b.0, b.1, b.2, b.3]).collect();
                    *visits.entry(key).or_default() += 1;
                }
                if step == steps {
                    break;
                }
                match variant {
                    FlipVariant::Lazy => {
                        let b = walk.order[rng.gen_range(0..tiles)];
                        if let Some(o) = walk.partner(b, rng.gen_range(0..4)) {
                            walk.flip(b, o);
                        }
                    }
                    FlipVariant::Resample => {
                        let picks: Vec<_> = walk
                            .order
                            .iter()
                            .flat_map(|&b| (0..4).map(move |s| (b, s)))
                            .filter_map(|(b, s)| walk.partner(b, s).map(|o| (b, o)))
                            .collect();
                        let (b, o) = picks[rng.gen_range(0..picks.len())];
                        walk.flip(b, o);
                    }
                }
            }
        }
        ChainSpec::Toggle { arch } => {
            let count = crate::configurations::count(arch, cap).ok();
            exact_states = count.and_then(|c| c.to_usize()).filter(|&k| k <= cap);
            let nominal = arch.n * arch.depth();
            let mut tau = vec![0usize; arch.n];
            for step in 0..=steps {
                let v = tau.iter().sum::<usize>() as u32 / 2;
                obs.push(v as f64);
                if step % thin == 0 {
                    trace.push(v);
                }
                if exact_states.is_some() {
                    *visits.entry(tau.iter().map(|&t| t as u64).collect()).or_default() += 1;
                }
                if step == steps {
                    break;
                }
                let moves = available_moves(arch, &tau)?;
                let k = rng.gen_range(0..nominal);
                if let Some(mv) = moves.get(k) {
                    tau = crate::configurations::apply_move(arch, &tau, mv);
                }
            }
        }
    }

    let max_lag = 2000.min(obs.len() / 10).max(1);
    let rho = autocorrelation(&obs, max_lag);
    let t = tau_int(&rho);
    let total = obs.len() as f64;
    let tv_uniform = exact_states.map(|k| {
        let u = 1.0 / k as f64;
        // sorted so the sum does not depend on hash order
        let mut counts: Vec<u64> = visits.values().copied().collect();
        counts.sort_unstable();
        let seen: f64 = counts.iter().map(|&c| (c as f64 / total - u).abs()).sum();
        0.5 * (seen + (k - visits.len()) as f64 * u)
    });
    Ok(McmcReport {
        steps,
        seed,
        thin,
        mean_observable: obs.iter().sum::<f64>() / total,
        trace,
        autocorrelation: rho,
        tau_int: t,
        gap_estimate: 2.0 / (1.0 + t),
        distinct_states: visits.len(),
        tv_uniform,
    })
}

/// Gap of the `P = I - L/||L||` chain on the configuration graph.
pub fn config_chain_gap(arch: &Architecture, cap: usize) -> Result<GapReport> {
    let g = config_graph(arch, cap)?;
    spectral_gap(&chain_from_laplacian(&g)?)
}

/// Window-boundary cuts: unions of consecutive windows with at most half
/// the stationary mass.
pub fn window_cuts(chain: &ReversibleChain, d: &Decomposition) -> Vec<Vec<usize>> {
    let k = d.blocks.len();
    let mut out = Vec::new();
    for start in 0..k {
        let mut set: Vec<usize> = Vec::new();
        for len in 1..k {
            set.extend(&d.blocks[(start + len - 1) % k]);
            set.sort_unstable();
            set.dedup();
            let mass: f64 = set.iter().map(|&x| chain.pi[x]).sum();
            if mass > 0.5 + 1e-12 {
                break;
            }
            out.push(set.clone());
        }
    }
    out
}
