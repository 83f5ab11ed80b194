//! Spacetime circuit Hamiltonian (clock, init, propagation and causality
//! terms) and the weighted global-clock construction, sized for exact
//! diagonalization.
//!
//! Global qubit order is `S_1..S_n, F_1..F_n, C_{1,1..X}, .., C_{n,1..X}`,
//! with qubit 1 the most significant bit of a basis index (as in `sim`).
//! Times are `0..D` with `D = 2X + 2`; the gate of layer `d` moves a clock
//! from `d - 1` to `d mod D`.

use crate::architecture::{Circuit, EmbeddingCoords, Register};
use crate::configurations::{enumerate_valid, lift, Configuration};
use crate::error::{Error, Result};
use crate::sim::{self, C64, Mat4, ONE, ZERO};
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// `(qubit, required bit)`.
pub type Lit = (usize, u8);
pub type Pattern = Vec<Lit>;

/// Largest register handled by the dense/sparse builders.
pub const MAX_QUBITS: usize = 26;
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub n: usize,
    pub x: usize,
}

impl RegisterLayout {
    pub fn new(n: usize, depth: usize) -> Result<Self> {
        if depth < 2 || depth % 2 == 1 {
            return Err(Error::OddDepth(depth));
        }
        let layout = Self { n, x: (depth - 2) / 2 };
        if layout.num_qubits() > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "{} qubits exceeds the limit of {MAX_QUBITS}",
                layout.num_qubits()
            )));
        }
        Ok(layout)
    }

    pub fn depth(&self) -> usize {
        2 * self.x + 2
    }

    pub fn num_qubits(&self) -> usize {
        self.n * (self.x + 2)
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    pub fn data(&self, i: usize) -> usize {
        i
    }

    pub fn flag(&self, i: usize) -> usize {
        self.n + i
    }

    pub fn clock(&self, i: usize, j: usize) -> usize {
        2 * self.n + (i - 1) * self.x + j
    }

    /// Physical register behind global qubit `q`.
    pub fn register(&self, q: usize) -> Register {
        if q <= self.n {
            Register::Data(q)
        } else if q <= 2 * self.n {
            Register::Flag(q - self.n)
        } else {
            let c = q - 2 * self.n - 1;
            Register::Clock(c / self.x + 1, c % self.x + 1)
        }
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits() - q)
    }

    pub fn bit(&self, index: usize, q: usize) -> u8 {
        (index & self.mask(q) != 0) as u8
    }

    /// Basis index of `|data⟩_S ⊗ |τ⟩_{F,C}`.
    pub fn basis_index(&self, tau: &[usize], data: usize) -> Result<usize> {
        if tau.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: tau.len(),
            });
        }
        let mut idx = data << (self.num_qubits() - self.n);
        for (i, &t) in tau.iter().enumerate() {
            let (f, c) = encode_time(t, self.x)?;
            if f == 1 {
                idx |= self.mask(self.flag(i + 1));
            }
            for (j, &b) in c.iter().enumerate() {
                if b == 1 {
                    idx |= self.mask(self.clock(i + 1, j + 1));
                }
            }
        }
        Ok(idx)
    }

    pub fn data_of(&self, index: usize) -> usize {
        index >> (self.num_qubits() - self.n)
    }

    /// Time held by register `i`, or `None` off the domain-wall encodings.
    pub fn time_of(&self, index: usize, i: usize) -> Option<usize> {
        let f = self.bit(index, self.flag(i));
        let c: Vec<u8> = (1..=self.x).map(|j| self.bit(index, self.clock(i, j))).collect();
        decode_time(f, &c)
    }

    /// Literal forcing clock qubit `j` of register `i` to `v`, with the
    /// boundary conventions `C_0 = 1` and `C_{X+1} = 0`. `Ok(None)` means the
    /// literal always holds, `Err(())` that it never does.
    fn clock_lit(&self, i: usize, j: usize, v: u8) -> std::result::Result<Option<Lit>, ()> {
        let fixed = if j == 0 {
            Some(1)
        } else if j == self.x + 1 {
            Some(0)
        } else {
            None
        };
        match fixed {
            Some(b) if b == v => Ok(None),
            Some(_) => Err(()),
            None => Ok(Some((self.clock(i, j), v))),
        }
    }

    fn pattern(&self, i: usize, flag: u8, clocks: &[(usize, u8)]) -> Option<Pattern> {
        let mut p = vec![(self.flag(i), flag)];
        for &(j, v) in clocks {
            if let Some(l) = self.clock_lit(i, j, v).ok()? {
                p.push(l);
            }
        }
        Some(p)
    }

    /// Local pattern `u_t[i]`: the flag plus the (at most two) clock qubits
    /// around the domain wall.
    pub fn time_pattern(&self, i: usize, t: usize) -> Pattern {
        let x = self.x;
        let ones = if t <= x { t } else { 2 * x + 1 - t };
        self.pattern(i, (t > x) as u8, &[(ones, 1), (ones + 1, 0)])
            .expect("domain-wall patterns are satisfiable")
    }
}

/// Flag bit and clock string of time `t` in a register of `X` clock qubits.
pub fn encode_time(t: usize, x: usize) -> Result<(u8, Vec<u8>)> {
    if t > 2 * x + 1 {
        return Err(Error::IndexOutOfRange(format!("time {t} with X = {x}")));
    }
    let ones = if t <= x { t } else { 2 * x + 1 - t };
    Ok(((t > x) as u8, (0..x).map(|j| (j < ones) as u8).collect()))
}

pub fn decode_time(flag: u8, clock: &[u8]) -> Option<usize> {
    let x = clock.len();
    let ones = clock.iter().take_while(|&&b| b == 1).count();
    if clock[ones..].iter().any(|&b| b != 0) {
        return None;
    }
    Some(if flag == 0 { ones } else { 2 * x + 1 - ones })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermFamily {
    Clock,
    Init,
    Prop,
    Causal,
}

/// OR over disjoint patterns, optionally negated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub patterns: Vec<Pattern>,
    pub negated: bool,
}

impl Factor {
    fn holds(&self, layout: &RegisterLayout, b: usize) -> bool {
        let any = self
            .patterns
            .iter()
            .any(|p| p.iter().all(|&(q, v)| layout.bit(b, q) == v));
        any != self.negated
    }

    fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.patterns.iter().flatten().map(|&(q, _)| q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    /// Product of diagonal 0/1 factors.
    Diagonal { factors: Vec<Factor> },
    /// `½[(A_tt ⊗ A_tt + A_{t+1} ⊗ A_{t+1}) ⊗ 1 − A_{t+1,t} ⊗ A_{t+1,t} ⊗ U − h.c.]`.
    /// Each register is a flip qubit leaving `from` plus controls.
    Transition {
        controls: Vec<Lit>,
        flips: [Lit; 2],
        data: (usize, usize),
        gate: Mat4,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTerm {
    pub family: TermFamily,
    pub label: String,
    pub kind: TermKind,
}

impl LocalTerm {
    pub fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = match &self.kind {
            TermKind::Diagonal { factors } => factors.iter().flat_map(Factor::qubits).collect(),
            TermKind::Transition {
                controls,
                flips,
                data,
                ..
            } => controls
                .iter()
                .chain(flips)
                .map(|&(q, _)| q)
                .chain([data.0, data.1])
                .collect(),
        };
        q.sort_unstable();
        q.dedup();
        q
    }

    /// Nonzero entries of column `b`: `term |b⟩ = Σ val |row⟩`.
    pub fn column(&self, layout: &RegisterLayout, b: usize) -> Vec<(usize, C64)> {
        match &self.kind {
            TermKind::Diagonal { factors } => {
                if factors.iter().all(|f| f.holds(layout, b)) {
                    vec![(b, ONE)]
                } else {
                    vec![]
                }
            }
            TermKind::Transition {
                controls,
                flips,
                data,
                gate,
            } => {
                if controls.iter().any(|&(q, v)| layout.bit(b, q) != v) {
                    return vec![];
                }
                let at = flips.map(|(q, from)| layout.bit(b, q) == from);
                let forward = match at {
                    [true, true] => true,
                    [false, false] => false,
                    _ => return vec![],
                };
                let (mp, mq) = (layout.mask(data.0), layout.mask(data.1));
                let input = 2 * layout.bit(b, data.0) as usize + layout.bit(b, data.1) as usize;
                let mut target = b;
                for (q, _) in flips {
                    target ^= layout.mask(*q);
                }
                target &= !(mp | mq);
                let mut out = vec![(b, sim::c(0.5, 0.0))];
                for r in 0..4 {
                    let amp = if forward {
                        gate[r][input]
                    } else {
                        gate[input][r].conj()
                    };
                    if amp.norm() > 0.0 {
                        let mut row = target;
                        if r & 2 != 0 {
                            row |= mp;
                        }
                        if r & 1 != 0 {
                            row |= mq;
                        }
                        out.push((row, -0.5 * amp));
                    }
                }
                out
            }
        }
    }

    /// `out += term · psi`.
    pub fn apply_add(&self, layout: &RegisterLayout, psi: &[C64], out: &mut [C64]) {
        for (b, &a) in psi.iter().enumerate() {
            if a != ZERO {
                for (r, v) in self.column(layout, b) {
                    out[r] += v * a;
                }
            }
        }
    }

    pub fn expectation(&self, layout: &RegisterLayout, psi: &[C64]) -> f64 {
        let mut acc = ZERO;
        for (b, &a) in psi.iter().enumerate() {
            if a != ZERO {
                for (r, v) in self.column(layout, b) {
                    acc += psi[r].conj() * v * a;
                }
            }
        }
        acc.re
    }

    /// Max entry of `|T² − T|` and `|T − T†|`, evaluated on the term's own
    /// support with every other qubit fixed to 0.
    pub fn projector_error(&self) -> f64 {
        let support = self.qubits();
        let k = support.len();
        let pos: HashMap<usize, usize> =
            support.iter().enumerate().map(|(i, &q)| (q, k + i + 1)).collect();
        let local = relabel(self, &pos);
        // 2k qubits; the support sits on the low k bits, the rest stay 0
        let layout = RegisterLayout { n: k, x: 0 };
        let dim = 1usize << k;
        let cols: Vec<Vec<(usize, C64)>> = (0..dim).map(|b| local.column(&layout, b)).collect();
        let mut err = 0.0f64;
        for (b, col) in cols.iter().enumerate() {
            let mut sq: BTreeMap<usize, C64> = BTreeMap::new();
            for &(r, v) in col {
                for &(r2, v2) in &cols[r] {
                    *sq.entry(r2).or_insert(ZERO) += v2 * v;
                }
            }
            for &(r, v) in col {
                *sq.entry(r).or_insert(ZERO) -= v;
                let back = cols[r].iter().find(|e| e.0 == b).map_or(ZERO, |e| e.1);
                err = err.max((back - v.conj()).norm());
            }
            err = sq.values().fold(err, |e, v| e.max(v.norm()));
        }
        err
    }
}

fn relabel(term: &LocalTerm, pos: &HashMap<usize, usize>) -> LocalTerm {
    let m = |l: &Lit| (pos[&l.0], l.1);
    let kind = match &term.kind {
        TermKind::Diagonal { factors } => TermKind::Diagonal {
            factors: factors
                .iter()
                .map(|f| Factor {
                    patterns: f.patterns.iter().map(|p| p.iter().map(m).collect()).collect(),
                    negated: f.negated,
                })
                .collect(),
        },
        TermKind::Transition {
            controls,
            flips,
            data,
            gate,
        } => TermKind::Transition {
            controls: controls.iter().map(m).collect(),
            flips: [m(&flips[0]), m(&flips[1])],
            data: (pos[&data.0], pos[&data.1]),
            gate: *gate,
        },
    };
    LocalTerm {
        family: term.family,
        label: term.label.clone(),
        kind,
    }
}

fn diagonal(family: TermFamily, label: String, factors: Vec<Factor>) -> LocalTerm {
    LocalTerm {
        family,
        label,
        kind: TermKind::Diagonal { factors },
    }
}

fn single(patterns: Vec<Pattern>) -> Factor {
    Factor {
        patterns,
        negated: false,
    }
}

/// `Π^{01}` on adjacent clock qubits `j, j + 1` of each register.
pub fn build_h_clock(layout: &RegisterLayout) -> Vec<LocalTerm> {
    let mut terms = Vec::new();
    for i in 1..=layout.n {
        for j in 1..layout.x {
            terms.push(diagonal(
                TermFamily::Clock,
                format!("clock[{i},{j}]"),
                vec![single(vec![vec![
                    (layout.clock(i, j), 0),
                    (layout.clock(i, j + 1), 1),
                ]])],
            ));
        }
    }
    terms
}

/// Which clock states the input check fires on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitReading {
    /// Flag 0 and first clock qubit 0: time 0 only.
    #[default]
    TimeZero,
    /// First clock qubit 0 regardless of the flag: time 0 or `2X + 1`.
    TimeZeroOrWrap,
}

/// Penalizes `|1⟩` on ancilla data qubits `k+1..n` at time zero.
pub fn build_h_init(layout: &RegisterLayout, k: usize, reading: InitReading) -> Result<Vec<LocalTerm>> {
    if k > layout.n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {}", layout.n)));
    }
    let mut terms = Vec::new();
    for i in k + 1..=layout.n {
        let mut p = vec![(layout.data(i), 1)];
        if reading == InitReading::TimeZero {
            p.push((layout.flag(i), 0));
        }
        if let Some(l) = layout.clock_lit(i, 1, 0).expect("C_1 = 0 is satisfiable") {
            p.push(l);
        }
        terms.push(diagonal(TermFamily::Init, format!("init[{i}]"), vec![single(vec![p])]));
    }
    Ok(terms)
}

/// `(controls, flip)` for the local move `t -> t + 1 mod D` of register `i`.
fn transition_of(layout: &RegisterLayout, i: usize, t: usize) -> (Vec<Lit>, Lit) {
    let a = layout.time_pattern(i, t);
    let b = layout.time_pattern(i, (t + 1) % layout.depth());
    let mut merged: BTreeMap<usize, (Option<u8>, Option<u8>)> = BTreeMap::new();
    for &(q, v) in &a {
        merged.entry(q).or_default().0 = Some(v);
    }
    for &(q, v) in &b {
        merged.entry(q).or_default().1 = Some(v);
    }
    let mut controls = Vec::new();
    let mut flip = None;
    for (q, (va, vb)) in merged {
        match (va, vb) {
            (Some(x), Some(y)) if x != y => {
                assert!(flip.is_none(), "adjacent times differ in one qubit");
                flip = Some((q, x));
            }
            (Some(x), _) | (None, Some(x)) => controls.push((q, x)),
            (None, None) => unreachable!(),
        }
    }
    (controls, flip.expect("adjacent times differ"))
}

fn check_circular(circuit: &Circuit, layout: &RegisterLayout) -> Result<()> {
    if !circuit.arch.circular {
        return Err(Error::UnsupportedArchitecture(
            "the spacetime construction needs a circular architecture".into(),
        ));
    }
    if circuit.depth() != layout.depth() || circuit.n() != layout.n {
        return Err(Error::DimensionMismatch("circuit does not match the layout".into()));
    }
    Ok(())
}

/// One term per gate: layer `d` drives the transition `d - 1 -> d`.
pub fn build_h_prop(circuit: &Circuit, layout: &RegisterLayout) -> Result<Vec<LocalTerm>> {
    check_circular(circuit, layout)?;
    let mut terms = Vec::new();
    for (d, (layer, gates)) in circuit.arch.layers.iter().zip(&circuit.gates).enumerate() {
        for (&(p, q), g) in layer.iter().zip(gates) {
            let (mut controls, fp) = transition_of(layout, p, d);
            let (cq, fq) = transition_of(layout, q, d);
            controls.extend(cq);
            terms.push(LocalTerm {
                family: TermFamily::Prop,
                label: format!("prop[{},{p},{q}]", d + 1),
                kind: TermKind::Transition {
                    controls,
                    flips: [fp, fq],
                    data: (layout.data(p), layout.data(q)),
                    gate: g.matrix(),
                },
            });
        }
    }
    Ok(terms)
}

/// Projector onto "register `q` holds a time in `[t, t2)`" (cyclic), written
/// with the four local cases. A wrapping interval whose endpoints sit in the
/// same half is the complement of `[t2, t)`.
pub fn interval_factor(layout: &RegisterLayout, q: usize, t: usize, t2: usize) -> Factor {
    let x = layout.x;
    let first = |s: usize| s <= x;
    let m = |s: usize| 2 * x + 2 - s;
    let pats = |list: Vec<(u8, Vec<(usize, u8)>)>| -> Vec<Pattern> {
        list.into_iter()
            .filter_map(|(f, c)| layout.pattern(q, f, &c))
            .collect()
    };
    if t < t2 {
        let patterns = match (first(t), first(t2)) {
            (true, true) => pats(vec![(0, vec![(t, 1), (t2, 0)])]),
            (false, false) => pats(vec![(1, vec![(m(t2), 1), (m(t), 0)])]),
            _ => pats(vec![(0, vec![(t, 1)]), (1, vec![(m(t2), 1)])]),
        };
        single(patterns)
    } else if !first(t) && first(t2) {
        single(pats(vec![(0, vec![(t2, 0)]), (1, vec![(m(t), 0)])]))
    } else {
        let mut f = interval_factor(layout, q, t2, t);
        f.negated = !f.negated;
        f
    }
}

/// For each ordered interacting pair `(p, q)` and each interval between
/// consecutive shared layers: `A_tt[p] ⊗ (1 − B[q])` for every `t` in it.
pub fn build_h_causal(circuit: &Circuit, layout: &RegisterLayout) -> Result<Vec<LocalTerm>> {
    check_circular(circuit, layout)?;
    let dd = layout.depth();
    let adj = circuit.arch.interaction_graph();
    let mut terms = Vec::new();
    for p in 1..=layout.n {
        for &q in &adj[p - 1] {
            let shared = circuit.arch.shared_layers(p, q);
            let f = shared.len();
            if f < 2 {
                continue;
            }
            for j in 0..f {
                let a = shared[j] % dd;
                let b = shared[(j + 1) % f] % dd;
                let mut outside = interval_factor(layout, q, a, b);
                outside.negated = !outside.negated;
                let mut t = a;
                while t != b {
                    terms.push(diagonal(
                        TermFamily::Causal,
                        format!("causal[{p},{q},{t}]"),
                        vec![single(vec![layout.time_pattern(p, t)]), outside.clone()],
                    ));
                    t = (t + 1) % dd;
                }
            }
        }
    }
    Ok(terms)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeHamiltonian {
    pub layout: RegisterLayout,
    pub k: usize,
    pub terms: Vec<LocalTerm>,
}

pub fn build_code_hamiltonian(circuit: &Circuit, k: usize) -> Result<CodeHamiltonian> {
    build_code_hamiltonian_with(circuit, k, InitReading::default())
}

pub fn build_code_hamiltonian_with(
    circuit: &Circuit,
    k: usize,
    reading: InitReading,
) -> Result<CodeHamiltonian> {
    let layout = RegisterLayout::new(circuit.n(), circuit.depth())?;
    let mut terms = build_h_clock(&layout);
    terms.extend(build_h_init(&layout, k, reading)?);
    terms.extend(build_h_prop(circuit, &layout)?);
    terms.extend(build_h_causal(circuit, &layout)?);
    Ok(CodeHamiltonian { layout, k, terms })
}

impl CodeHamiltonian {
    pub fn family(&self, f: TermFamily) -> impl Iterator<Item = &LocalTerm> {
        self.terms.iter().filter(move |t| t.family == f)
    }

    pub fn operator(&self) -> SparseOperator {
        SparseOperator::from_terms(&self.layout, self.terms.iter())
    }

    pub fn family_operator(&self, f: TermFamily) -> SparseOperator {
        SparseOperator::from_terms(&self.layout, self.family(f))
    }

    /// Basis states on which every diagonal term vanishes.
    pub fn unpenalized_states(&self) -> Vec<usize> {
        let diag: Vec<&LocalTerm> = self
            .terms
            .iter()
            .filter(|t| matches!(t.kind, TermKind::Diagonal { .. }))
            .collect();
        (0..self.layout.dim())
            .filter(|&b| diag.iter().all(|t| t.column(&self.layout, b).is_empty()))
            .collect()
    }

    /// Exact kernel. A vector is annihilated by the PSD sum iff it lives on
    /// unpenalized states and is annihilated by the propagation part there, so
    /// the eigensolve runs on that compressed block only.
    pub fn ground_space(&self) -> Result<GroundSpace> {
        let allowed = self.unpenalized_states();
        let h = self.family_operator(TermFamily::Prop).compress(&allowed);
        let spec = h.spectrum(true)?;
        let dim = self.layout.dim();
        let kernel = spec
            .kernel
            .iter()
            .map(|v| {
                let mut full = vec![ZERO; dim];
                for (&b, &a) in allowed.iter().zip(v) {
                    full[b] = a;
                }
                full
            })
            .collect();
        Ok(GroundSpace {
            kernel,
            unpenalized: allowed.len(),
            compressed_gap: spec.gap,
        })
    }

    /// Max per-term support and per-qubit term counts.
    pub fn locality_audit(&self) -> LocalityAudit {
        let mut per_qubit = vec![0usize; self.layout.num_qubits()];
        let mut max_support = 0;
        for t in &self.terms {
            let q = t.qubits();
            max_support = max_support.max(q.len());
            for x in q {
                per_qubit[x - 1] += 1;
            }
        }
        LocalityAudit {
            terms: self.terms.len(),
            max_support,
            max_per_qubit: per_qubit.iter().copied().max().unwrap_or(0),
            per_qubit,
        }
    }

    /// Largest squared distance between two registers of one term under `emb`.
    pub fn max_term_distance2(&self, emb: &EmbeddingCoords) -> u32 {
        let mut worst = 0;
        for t in &self.terms {
            let regs: Vec<Register> = t.qubits().into_iter().map(|q| self.layout.register(q)).collect();
            for (i, &a) in regs.iter().enumerate() {
                for &b in &regs[i + 1..] {
                    worst = worst.max(emb.dist2(a, b));
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityAudit {
    pub terms: usize,
    pub max_support: usize,
    pub max_per_qubit: usize,
    pub per_qubit: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct GroundSpace {
    pub kernel: Vec<Vec<C64>>,
    pub unpenalized: usize,
    pub compressed_gap: Option<f64>,
}

/// Row-major sparse complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub ground_energy: f64,
    pub kernel_dim: usize,
    pub gap: Option<f64>,
    pub largest_block: usize,
    #[serde(skip)]
    pub kernel: Vec<Vec<C64>>,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

impl SparseOperator {
    pub fn from_terms<'a>(layout: &RegisterLayout, terms: impl Iterator<Item = &'a LocalTerm>) -> Self {
        let dim = layout.dim();
        let terms: Vec<&LocalTerm> = terms.collect();
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for b in 0..dim {
            for t in &terms {
                for (r, v) in t.column(layout, b) {
                    *rows[r].entry(b).or_insert(ZERO) += v;
                }
            }
        }
        Self::from_maps(rows)
    }

    fn from_maps(rows: Vec<BTreeMap<usize, C64>>) -> Self {
        Self {
            dim: rows.len(),
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().filter(|(_, v)| v.norm() > 1e-15).collect())
                .collect(),
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)].norm() > 1e-15)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { dim: m.nrows(), rows }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * v[j]).sum())
            .collect()
    }

    pub fn expectation(&self, v: &[C64]) -> f64 {
        sim::inner(v, &self.apply(v)).re
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                m[(i, j)] = a;
            }
        }
        m
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut m: BTreeMap<usize, C64> = a.iter().copied().collect();
                for &(j, v) in b {
                    *m.entry(j).or_insert(ZERO) += v;
                }
                m
            })
            .collect();
        Self::from_maps(rows)
    }

    /// Max `|A[i,j] − conj(A[j,i])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err = 0.0f64;
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in r {
                let back = self.rows[j]
                    .iter()
                    .find(|e| e.0 == i)
                    .map_or(ZERO, |e| e.1);
                err = err.max((a - back.conj()).norm());
            }
        }
        err
    }

    /// Max entry of `AB − BA`, computed on the sparse structure.
    pub fn commutator_norm(&self, other: &SparseOperator) -> f64 {
        let prod = |x: &SparseOperator, y: &SparseOperator, i: usize| {
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for &(k, a) in &x.rows[i] {
                for &(j, b) in &y.rows[k] {
                    *acc.entry(j).or_insert(ZERO) += a * b;
                }
            }
            acc
        };
        let mut err = 0.0f64;
        for i in 0..self.dim {
            let mut ab = prod(self, other, i);
            for (j, v) in prod(other, self, i) {
                *ab.entry(j).or_insert(ZERO) -= v;
            }
            err = ab.values().fold(err, |e, v| e.max(v.norm()));
        }
        err
    }

    /// Principal submatrix on `keep` (sorted).
    pub fn compress(&self, keep: &[usize]) -> SparseOperator {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let rows = keep
            .iter()
            .map(|&b| {
                self.rows[b]
                    .iter()
                    .filter_map(|&(j, a)| pos.get(&j).map(|&jj| (jj, a)))
                    .collect()
            })
            .collect();
        Self {
            dim: keep.len(),
            rows,
        }
    }

    /// Connected components of the off-diagonal sparsity graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.dim];
        let mut out = Vec::new();
        for s in 0..self.dim {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut members = vec![s];
            let mut stack = vec![s];
            while let Some(i) = stack.pop() {
                for &(j, _) in &self.rows[i] {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(j);
                        stack.push(j);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Full spectrum by dense Hermitian eigensolves on each connected block.
    pub fn spectrum(&self, want_kernel: bool) -> Result<Spectrum> {
        if self.hermiticity_error() > 1e-12 {
            return Err(Error::InvalidParameter("operator is not Hermitian".into()));
        }
        let mut eigenvalues = Vec::with_capacity(self.dim);
        let mut kernel = Vec::new();
        let mut largest = 0;
        for block in self.components() {
            largest = largest.max(block.len());
            let sub = self.compress(&block).to_dense();
            let (vals, vecs) = if want_kernel {
                let e = SymmetricEigen::new(sub);
                (e.eigenvalues, Some(e.eigenvectors))
            } else {
                (sub.symmetric_eigenvalues(), None)
            };
            for (c, &v) in vals.iter().enumerate() {
                eigenvalues.push(v);
                if let (Some(vecs), true) = (&vecs, v.abs() < KERNEL_TOL) {
                    let mut full = vec![ZERO; self.dim];
                    for (r, &b) in block.iter().enumerate() {
                        full[b] = vecs[(r, c)];
                    }
                    kernel.push(full);
                }
            }
        }
        eigenvalues.sort_by(f64::total_cmp);
        let kernel_dim = eigenvalues.iter().filter(|v| v.abs() < KERNEL_TOL).count();
        let gap = eigenvalues.iter().copied().find(|&v| v >= KERNEL_TOL);
        Ok(Spectrum {
            ground_energy: eigenvalues.first().copied().unwrap_or(0.0),
            kernel_dim,
            gap,
            largest_block: largest,
            kernel,
            eigenvalues,
        })
    }

    /// Lowest eigenvalue orthogonal to `deflate` (orthonormal complex
    /// vectors), via real Lanczos on the `2N`-dimensional real embedding.
    pub fn lowest_eigenvalue(&self, deflate: &[Vec<C64>]) -> Result<f64> {
        let n = self.dim;
        let embed = |v: &[C64]| -> [Vec<f64>; 2] {
            let a: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
            // i·v
            let b: Vec<f64> = v.iter().map(|z| -z.im).chain(v.iter().map(|z| z.re)).collect();
            [a, b]
        };
        let defl: Vec<Vec<f64>> = deflate.iter().flat_map(|v| embed(v)).collect();
        let op = |x: &[f64], out: &mut [f64]| {
            for (i, r) in self.rows.iter().enumerate() {
                let (mut re, mut im) = (0.0, 0.0);
                for &(j, a) in r {
                    re += a.re * x[j] - a.im * x[n + j];
                    im += a.re * x[n + j] + a.im * x[j];
                }
                out[i] = re;
                out[n + i] = im;
            }
        };
        let e = crate::lanczos::extreme_eigenpair(
            2 * n,
            op,
            &defl,
            crate::lanczos::Which::Smallest,
            1e-10,
            3000,
        )?;
        Ok(e.value)
    }
}

/// Gate occurrences in τ's past light cone, ordered by unrolled layer:
/// `(unrolled layer, layer, index within layer)`.
pub fn cone_gates(circuit: &Circuit, tau: &[usize]) -> Result<Vec<(usize, usize, usize)>> {
    let dd = circuit.depth() as i64;
    let mut lifted = lift(&circuit.arch, tau)
        .ok_or_else(|| Error::InvalidConfiguration(format!("{tau:?} has no valid lift")))?;
    let shift = lifted.iter().copied().min().unwrap_or(0).div_euclid(dd) * dd;
    lifted.iter_mut().for_each(|l| *l -= shift);
    let top = lifted.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    for lam in 1..=top {
        let d = ((lam - 1) % dd) as usize + 1;
        for (k, &(p, q)) in circuit.arch.layers[d - 1].iter().enumerate() {
            let (a, b) = (lifted[p - 1] >= lam, lifted[q - 1] >= lam);
            if a != b {
                return Err(Error::InvalidConfiguration(format!(
                    "{tau:?} splits the gate on ({p},{q})"
                )));
            }
            if a {
                out.push((lam as usize, d, k));
            }
        }
    }
    Ok(out)
}

/// Applies the listed gate occurrences in the given order.
pub fn apply_gate_sequence(circuit: &Circuit, seq: &[(usize, usize, usize)], psi: &mut [C64]) {
    for &(_, d, k) in seq {
        let (p, q) = circuit.arch.layers[d - 1][k];
        let g = &circuit.gates[d - 1][k];
        if !g.is_identity() {
            sim::apply_2q(psi, circuit.n(), p, q, &g.matrix());
        }
    }
}

/// `U(τ←0)` applied to a data state.
pub fn partial_unitary(circuit: &Circuit, tau: &[usize], psi: &mut [C64]) -> Result<()> {
    let seq = cone_gates(circuit, tau)?;
    apply_gate_sequence(circuit, &seq, psi);
    Ok(())
}

/// Dense matrix of `U(τ←0)` on the data register.
pub fn partial_unitary_matrix(circuit: &Circuit, tau: &[usize]) -> Result<DMatrix<C64>> {
    let seq = cone_gates(circuit, tau)?;
    let dim = 1 << circuit.n();
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for x in 0..dim {
        let mut v = sim::basis_state(dim, x);
        apply_gate_sequence(circuit, &seq, &mut v);
        for (r, a) in v.into_iter().enumerate() {
            m[(r, x)] = a;
        }
    }
    Ok(m)
}

/// `|𝓣|^{-1/2} Σ_τ |τ⟩ ⊗ U(τ←0)|input⟩`.
pub fn history_state(circuit: &Circuit, input: &[C64], cap: usize) -> Result<Vec<C64>> {
    let layout = RegisterLayout::new(circuit.n(), circuit.depth())?;
    if input.len() != 1 << layout.n {
        return Err(Error::LengthMismatch {
            expected: 1 << layout.n,
            got: input.len(),
        });
    }
    let configs = enumerate_valid(&circuit.arch, cap)?;
    let norm = (configs.len() as f64).sqrt().recip();
    let mut psi = vec![ZERO; layout.dim()];
    for tau in &configs {
        let mut v = input.to_vec();
        partial_unitary(circuit, tau, &mut v)?;
        for (x, a) in v.into_iter().enumerate() {
            psi[layout.basis_index(tau, x)?] += a * norm;
        }
    }
    Ok(psi)
}

/// Input state `|x⟩ ⊗ |0^{n−k}⟩` for a logical basis index `x < 2^k`.
pub fn logical_input(n: usize, k: usize, x: usize) -> Vec<C64> {
    sim::basis_state(1 << n, x << (n - k))
}

/// Reduced density matrix of clock register `C_i`.
pub fn clock_marginal(layout: &RegisterLayout, psi: &[C64], i: usize) -> DMatrix<C64> {
    let x = layout.x;
    let qubits: Vec<usize> = (1..=x).map(|j| layout.clock(i, j)).collect();
    let mask: usize = qubits.iter().map(|&q| layout.mask(q)).sum();
    let local = |b: usize| {
        qubits
            .iter()
            .fold(0usize, |acc, &q| 2 * acc + layout.bit(b, q) as usize)
    };
    let mut rest: HashMap<usize, Vec<(usize, C64)>> = HashMap::new();
    for (b, &a) in psi.iter().enumerate() {
        if a != ZERO {
            rest.entry(b & !mask).or_default().push((local(b), a));
        }
    }
    let mut rho = DMatrix::from_element(1 << x, 1 << x, ZERO);
    for entries in rest.values() {
        for &(r, a) in entries {
            for &(c, b) in entries {
                rho[(r, c)] += a * b.conj();
            }
        }
    }
    rho
}

/// Trace distance between `rho` and the uniform mixture of the `X + 1`
/// domain-wall strings.
pub fn clock_marginal_distance(rho: &DMatrix<C64>, x: usize) -> f64 {
    let mut sigma = DMatrix::from_element(1 << x, 1 << x, ZERO);
    for ones in 0..=x {
        let idx = ((1usize << ones) - 1) << (x - ones);
        sigma[(idx, idx)] = sim::c(1.0 / (x + 1) as f64, 0.0);
    }
    let diff = rho - sigma;
    diff.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>() / 2.0
}

/// `W†H_prop W` on valid configurations ⊗ data, factored as `M ⊗ 1`.
#[derive(Clone, Debug)]
pub struct RotatedFrame {
    pub states: Vec<Configuration>,
    pub matrix: DMatrix<f64>,
    /// Largest deviation of any block from a real multiple of the identity.
    pub factor_error: f64,
    /// Largest `|U_τ†U_τ − 1|` entry.
    pub unitarity_error: f64,
}

pub fn rotated_laplacian(circuit: &Circuit, cap: usize) -> Result<RotatedFrame> {
    let layout = RegisterLayout::new(circuit.n(), circuit.depth())?;
    let states = enumerate_valid(&circuit.arch, cap)?;
    let dn = 1usize << layout.n;
    let shift = layout.num_qubits() - layout.n;
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut us = Vec::with_capacity(states.len());
    let mut unitarity_error = 0.0f64;
    for (s, tau) in states.iter().enumerate() {
        index.insert(layout.basis_index(tau, 0)?, s);
        let u = partial_unitary_matrix(circuit, tau)?;
        let id = DMatrix::<C64>::identity(dn, dn);
        unitarity_error = unitarity_error.max(max_abs(&(u.adjoint() * &u - id)));
        us.push(u);
    }
    let h = SparseOperator::from_terms(&layout, build_h_prop(circuit, &layout)?.iter());
    let m = states.len();
    let mut matrix = DMatrix::zeros(m, m);
    let mut factor_error = 0.0f64;
    for (s, tau) in states.iter().enumerate() {
        let clock = layout.basis_index(tau, 0)?;
        // blocks[s2] = H restricted to (τ_{s2}, τ_s) data blocks
        let mut blocks: BTreeMap<usize, DMatrix<C64>> = BTreeMap::new();
        for d in 0..dn {
            for &(r, a) in &h.rows[clock | (d << shift)] {
                // row index r; we need column-wise, use Hermiticity: H[c,r] = conj(H[r,c])
                let rc = r & ((1 << shift) - 1);
                if let Some(&s2) = index.get(&rc) {
                    let blk = blocks.entry(s2).or_insert_with(|| DMatrix::from_element(dn, dn, ZERO));
                    blk[(r >> shift, d)] += a.conj();
                }
            }
        }
        for (s2, blk) in blocks {
            // blk[d2, d] = ⟨τ_{s2}, d2|H|τ_s, d⟩
            let rot = us[s2].adjoint() * blk * &us[s];
            let c = rot.trace() / dn as f64;
            let dev = max_abs(&(rot - DMatrix::<C64>::identity(dn, dn) * c));
            factor_error = factor_error.max(dev).max(c.im.abs());
            matrix[(s2, s)] = c.re;
        }
    }
    Ok(RotatedFrame {
        states,
        matrix,
        factor_error,
        unitarity_error,
    })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `min(1, Δ)·sin²(θ/2)` with `cos²θ` given.
pub fn geometric_lemma_bound(delta_prop: f64, cos2_theta: f64) -> Result<f64> {
    for (name, v) in [("gap", delta_prop), ("cos^2 theta", cos2_theta)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(delta_prop.min(1.0) * (1.0 - cos2_theta.sqrt()) / 2.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometricReport {
    /// Smallest nonzero eigenvalue of clock + prop + causal.
    pub delta_a: f64,
    pub cos2_theta: f64,
    pub bound: f64,
    pub true_gap: f64,
}

/// Splits `H = A + B` with `B = H_init` and compares the lemma's bound with the
/// exact gap. Dense, so only for small layouts.
pub fn geometric_lemma_check(h: &CodeHamiltonian) -> Result<GeometricReport> {
    let a_op = SparseOperator::from_terms(
        &h.layout,
        h.terms.iter().filter(|t| t.family != TermFamily::Init),
    );
    let sa = a_op.spectrum(true)?;
    let delta_a = sa
        .gap
        .ok_or_else(|| Error::InvalidParameter("A has no nonzero eigenvalue".into()))?;
    let init: Vec<&LocalTerm> = h.family(TermFamily::Init).collect();
    let in_kb = |b: usize| init.iter().all(|t| t.column(&h.layout, b).is_empty());
    let kd = sa.kernel.len();
    let m = DMatrix::from_fn(kd, kd, |i, j| {
        sa.kernel[i]
            .iter()
            .zip(&sa.kernel[j])
            .enumerate()
            .filter(|(b, _)| in_kb(*b))
            .map(|(_, (x, y))| x.conj() * y)
            .sum::<C64>()
    });
    let cos2 = m
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .filter(|&v| v < 1.0 - 1e-9)
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0);
    let bound = geometric_lemma_bound(delta_a.min(1.0), cos2)?;
    let true_gap = h
        .operator()
        .spectrum(false)?
        .gap
        .ok_or_else(|| Error::InvalidParameter("H has no nonzero eigenvalue".into()))?;
    Ok(GeometricReport {
        delta_a,
        cos2_theta: cos2,
        bound,
        true_gap,
    })
}

/// Weighted global-clock construction on clock basis `|0⟩..|T+n⟩` ⊗ data.
#[derive(Clone, Debug)]
pub struct WeightedFk {
    pub n: usize,
    pub k: usize,
    pub t_gates: usize,
    pub eps: f64,
    pub pi: Vec<f64>,
    /// Metropolis chain on clock states.
    pub chain: DMatrix<f64>,
    pub h_in: DMatrix<C64>,
    pub h_prop: DMatrix<C64>,
    gates: Vec<(usize, usize, Mat4)>,
}

/// `gates` are applied one per step after `n` idle steps.
pub fn build_weighted_fk(
    n: usize,
    gates: Vec<(usize, usize, Mat4)>,
    eps: f64,
    k: usize,
) -> Result<WeightedFk> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} not in (0, 1)")));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if let Some(g) = gates.iter().find(|g| g.0 == g.1 || g.0 < 1 || g.1 < 1 || g.0 > n || g.1 > n) {
        return Err(Error::InvalidParameter(format!("bad gate wires {:?}", (g.0, g.1))));
    }
    let t = gates.len();
    let states = t + n + 1;
    let last = t + n;
    let pi: Vec<f64> = (0..states)
        .map(|s| if s < last { eps / last as f64 } else { 1.0 - eps })
        .collect();
    let mut chain = DMatrix::zeros(states, states);
    for s in 0..states {
        for nb in [s.wrapping_sub(1), s + 1] {
            if nb < states {
                chain[(s, nb)] = 0.25 * (pi[nb] / pi[s]).min(1.0);
            }
        }
        chain[(s, s)] = 1.0 - chain.row(s).sum();
    }
    let dn = 1usize << n;
    let dim = states * dn;
    let mut h_in = DMatrix::from_element(dim, dim, ZERO);
    for r in k + 1..=n {
        let clock = r - k - 1;
        for x in 0..dn {
            if x & (1 << (n - r)) != 0 {
                h_in[(clock * dn + x, clock * dn + x)] += ONE;
            }
        }
    }
    let mut h_prop = DMatrix::from_element(dim, dim, ZERO);
    for s in 1..states {
        let u = if s > n {
            let (p, q, m) = gates[s - n - 1];
            full_gate(n, p, q, &m)
        } else {
            DMatrix::identity(dn, dn)
        };
        let c = (pi[s] / pi[s - 1]).sqrt() * chain[(s, s - 1)];
        for x in 0..dn {
            h_prop[((s - 1) * dn + x, (s - 1) * dn + x)] += sim::c(chain[(s - 1, s)], 0.0);
            h_prop[(s * dn + x, s * dn + x)] += sim::c(chain[(s, s - 1)], 0.0);
            for y in 0..dn {
                let a = u[(y, x)] * c;
                h_prop[(s * dn + y, (s - 1) * dn + x)] -= a;
                h_prop[((s - 1) * dn + x, s * dn + y)] -= a.conj();
            }
        }
    }
    Ok(WeightedFk {
        n,
        k,
        t_gates: t,
        eps,
        pi,
        chain,
        h_in,
        h_prop,
        gates,
    })
}

fn full_gate(n: usize, p: usize, q: usize, m: &Mat4) -> DMatrix<C64> {
    let dn = 1 << n;
    let mut u = DMatrix::from_element(dn, dn, ZERO);
    for x in 0..dn {
        let mut v = sim::basis_state(dn, x);
        sim::apply_2q(&mut v, n, p, q, m);
        for (r, a) in v.into_iter().enumerate() {
            u[(r, x)] = a;
        }
    }
    u
}

impl WeightedFk {
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        &self.h_in + &self.h_prop
    }

    pub fn clock_states(&self) -> usize {
        self.t_gates + self.n + 1
    }

    /// `Σ_t √π_t |t⟩ ⊗ U_{≤t}|input⟩`.
    pub fn history_state(&self, input: &[C64]) -> Vec<C64> {
        let dn = 1 << self.n;
        let mut out = Vec::with_capacity(self.clock_states() * dn);
        let mut v = input.to_vec();
        for s in 0..self.clock_states() {
            if s > self.n {
                let (p, q, m) = &self.gates[s - self.n - 1];
                sim::apply_2q(&mut v, self.n, *p, *q, m);
            }
            out.extend(v.iter().map(|a| a * self.pi[s].sqrt()));
        }
        out
    }

    /// Conductance `Q(S, S^c) / min(π(S), π(S^c))` of a clock cut.
    pub fn conductance(&self, s: &[usize]) -> f64 {
        let inside: Vec<bool> = (0..self.clock_states()).map(|t| s.contains(&t)).collect();
        let mut flow = 0.0;
        let mut mass = 0.0;
        for a in 0..self.clock_states() {
            if inside[a] {
                mass += self.pi[a];
                for b in 0..self.clock_states() {
                    if !inside[b] {
                        flow += self.pi[a] * self.chain[(a, b)];
                    }
                }
            }
        }
        flow / mass.min(1.0 - mass)
    }

    /// Minimum over prefix cuts `{0..s}`; on a path every other cut has at
    /// least as large a conductance.
    pub fn min_conductance(&self) -> (f64, usize) {
        (0..self.clock_states() - 1)
            .map(|s| (self.conductance(&(0..=s).collect::<Vec<_>>()), s))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least two clock states")
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        SparseOperator::from_dense(&self.hamiltonian()).spectrum(true)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FkSweepRow {
    pub t: usize,
    pub gap: f64,
    pub overlap: f64,
    pub product: f64,
    /// `product · T²`
    pub scaled: f64,
}

/// Fixed gate cycle on two qubits used by the sweep.
pub fn fk_demo_gates(t: usize) -> Vec<(usize, usize, Mat4)> {
    use crate::architecture::Gate;
    let cycle = [Gate::HI, Gate::Cnot, Gate::SI, Gate::IH];
    (0..t).map(|i| (1, 2, cycle[i % cycle.len()].matrix())).collect()
}

/// Gap × min endpoint weight across circuit lengths, on two qubits with one
/// logical qubit.
pub fn fk_gap_overlap_sweep(ts: &[usize], eps: f64) -> Result<Vec<FkSweepRow>> {
    ts.iter()
        .map(|&t| {
            let fk = build_weighted_fk(2, fk_demo_gates(t), eps, 1)?;
            let gap = fk
                .spectrum()?
                .gap
                .ok_or_else(|| Error::InvalidParameter("no nonzero eigenvalue".into()))?;
            let overlap = fk.pi[0].min(fk.pi[t + 2]);
            let product = gap * overlap;
            Ok(FkSweepRow {
                t,
                gap,
                overlap,
                product,
                scaled: product * (t * t) as f64,
            })
        })
        .collect()
}

/// Exact fraction of configurations of the circular `l`-block product with
/// `m` blocks whose clocks all lie in the identity-padded last `pad_layers`
/// layers, by window counting: `(a_l + (L − l)·h) / (D·h)` with
/// `h = a_l − a_{l−1}²`.
pub fn fidelity_counting(l: usize, m: usize, pad_layers: usize) -> Result<BigRational> {
    let dd = l * m;
    if pad_layers < l || pad_layers + l > dd {
        return Err(Error::InvalidParameter(format!(
            "pad of {pad_layers} layers must lie in [{l}, {}]",
            dd.saturating_sub(l)
        )));
    }
    let table = crate::configurations::bitonic_table(l);
    let a = BigInt::from(table[l].clone());
    let prev = BigInt::from(table[l - 1].clone());
    let h = &a - &prev * &prev;
    let num = a + &h * BigInt::from(pad_layers - l);
    Ok(BigRational::new(num, h * BigInt::from(dd)))
}

/// Pad length for a fraction of the depth, rounded down.
pub fn pad_layers_for_fraction(l: usize, m: usize, fraction: f64) -> usize {
    ((l * m) as f64 * fraction.clamp(0.0, 1.0)).floor() as usize
}

/// Enumeration oracle for `fidelity_counting`.
pub fn fidelity_by_enumeration(l: usize, m: usize, pad_layers: usize, cap: usize) -> Result<BigRational> {
    let arch = crate::architecture::build_circular(l, m)?;
    let dd = arch.depth();
    let all = enumerate_valid(&arch, cap)?;
    let inside = all
        .iter()
        .filter(|tau| tau.iter().all(|&t| (t + pad_layers) % dd <= pad_layers))
        .count();
    Ok(BigRational::new(BigInt::from(inside), BigInt::from(all.len())))
}
