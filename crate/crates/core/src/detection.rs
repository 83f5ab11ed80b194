//! Pauli strings, the clock/flag stabilizer group, energy-based detection
//! of single Pauli errors, random two-qubit Clifford circuits and the
//! niceness predicate.

use crate::architecture::{Architecture, Circuit, Gate};
use crate::configurations::{enumerate_valid, Configuration};
use crate::error::{Error, Result};
use crate::hamiltonian::{CodeHamiltonian, RegisterLayout};
use crate::sim::{self, C64, Mat2, Mat4, ONE, ZERO};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

pub const I_: u8 = 0;
pub const X_: u8 = 1;
pub const Y_: u8 = 2;
pub const Z_: u8 = 3;

/// `i^phase · ⊗ letters`, letters in `{I, X, Y, Z}` as `0..4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub phase: u8,
    pub letters: Vec<u8>,
}

/// Single-letter product `a·b = i^k c`.
fn letter_mul(a: u8, b: u8) -> (u8, u8) {
    match (a, b) {
        (0, x) | (x, 0) => (0, x),
        (x, y) if x == y => (0, 0),
        (1, 2) | (2, 3) | (3, 1) => (1, 6 - a - b),
        _ => (3, 6 - a - b),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: 0,
            letters: vec![I_; n],
        }
    }

    /// Single letter on qubit `q` (1-based).
    pub fn single(n: usize, q: usize, letter: u8) -> Self {
        let mut p = Self::identity(n);
        p.letters[q - 1] = letter;
        p
    }

    pub fn from_letters(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(I_),
                'X' => Ok(X_),
                'Y' => Ok(Y_),
                'Z' => Ok(Z_),
                _ => Err(Error::InvalidParameter(format!("bad Pauli letter {c:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self { phase: 0, letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != I_).count()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "Pauli lengths differ");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, c) = letter_mul(a, b);
                phase += k;
                c
            })
            .collect();
        Self {
            phase: phase % 4,
            letters,
        }
    }

    pub fn commutes(&self, other: &Self) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != I_ && b != I_ && a != b)
            .count();
        anti % 2 == 0
    }

    /// Qubits carrying `Z` (letters must be `I`/`Z`), as a bitmask over
    /// 1-based qubit labels.
    pub fn z_support(&self) -> Option<u128> {
        let mut m = 0u128;
        for (i, &l) in self.letters.iter().enumerate() {
            match l {
                I_ => {}
                Z_ => m |= 1 << i,
                _ => return None,
            }
        }
        Some(m)
    }

    /// `P|ψ⟩` with qubit 1 the most significant bit.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.len();
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ys = 0u32;
        for (i, &l) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - i);
            if l == X_ || l == Y_ {
                flip |= bit;
            }
            if l == Z_ || l == Y_ {
                zmask |= bit;
            }
            if l == Y_ {
                ys += 1;
            }
        }
        // Y = i X Z
        let global = sim::I.powu((self.phase as u32 + ys) % 4);
        let mut out = vec![ZERO; psi.len()];
        for (b, &a) in psi.iter().enumerate() {
            let sign = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ flip] = global * a * sign;
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ph = ["+", "+i", "-", "-i"][self.phase as usize];
        let s: String = self.letters.iter().map(|&l| ['I', 'X', 'Y', 'Z'][l as usize]).collect();
        write!(f, "{ph}{s}")
    }
}

fn check_circular(circuit: &Circuit) -> Result<RegisterLayout> {
    if !circuit.arch.circular {
        return Err(Error::UnsupportedArchitecture("stabilizers need a circular circuit".into()));
    }
    RegisterLayout::new(circuit.n(), circuit.depth())
}

fn partner(arch: &Architecture, d: usize, p: usize) -> usize {
    arch.layers[d - 1]
        .iter()
        .find_map(|&(a, b)| {
            if a == p {
                Some(b)
            } else if b == p {
                Some(a)
            } else {
                None
            }
        })
        .expect("layers are perfect matchings")
}

/// Orbit of `p` under the pairings of layers `j` and `D − j`, the two
/// layers whose transitions flip clock qubit `j`.
pub fn rect(circuit: &Circuit, p: usize, j: usize) -> Result<Vec<usize>> {
    let layout = check_circular(circuit)?;
    if j < 1 || j > layout.x {
        return Err(Error::IndexOutOfRange(format!("clock index {j} outside 1..={}", layout.x)));
    }
    if p < 1 || p > layout.n {
        return Err(Error::IndexOutOfRange(format!("qubit {p}")));
    }
    let dd = layout.depth();
    let mut set = BTreeSet::from([p]);
    let mut stack = vec![p];
    while let Some(r) = stack.pop() {
        for d in [j, dd - j] {
            let s = partner(&circuit.arch, d, r);
            if set.insert(s) {
                stack.push(s);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// `S_flag` and one `S_clock` per distinct rectangle.
pub fn stabilizer_generators(circuit: &Circuit) -> Result<Vec<PauliString>> {
    let layout = check_circular(circuit)?;
    let nq = layout.num_qubits();
    let mut gens = Vec::new();
    let mut flag = PauliString::identity(nq);
    for p in 1..=layout.n {
        flag.letters[layout.flag(p) - 1] = Z_;
    }
    gens.push(flag);
    let mut seen = BTreeSet::new();
    for j in 1..=layout.x {
        for p in 1..=layout.n {
            let r = rect(circuit, p, j)?;
            if seen.insert((j, r.clone())) {
                let mut s = PauliString::identity(nq);
                for q in r {
                    s.letters[layout.clock(q, j) - 1] = Z_;
                }
                gens.push(s);
            }
        }
    }
    Ok(gens)
}

/// Product closure of the generators, as `Z`-support masks.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    pub num_qubits: usize,
    pub generators: Vec<PauliString>,
    pub masks: BTreeSet<u128>,
}

impl StabilizerGroup {
    pub fn contains(&self, p: &PauliString) -> bool {
        p.phase == 0 && p.z_support().is_some_and(|m| self.masks.contains(&m))
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn elements(&self) -> Vec<PauliString> {
        self.masks
            .iter()
            .map(|&m| PauliString {
                phase: 0,
                letters: (0..self.num_qubits)
                    .map(|i| if m >> i & 1 == 1 { Z_ } else { I_ })
                    .collect(),
            })
            .collect()
    }
}

pub fn stabilizer_set(circuit: &Circuit) -> Result<StabilizerGroup> {
    let generators = stabilizer_generators(circuit)?;
    let num_qubits = check_circular(circuit)?.num_qubits();
    if num_qubits > 128 {
        return Err(Error::InvalidParameter("more than 128 qubits".into()));
    }
    let mut masks = BTreeSet::from([0u128]);
    for g in &generators {
        let m = g.z_support().expect("generators are Z-type");
        let cur: Vec<u128> = masks.iter().copied().collect();
        masks.extend(cur.into_iter().map(|x| x ^ m));
    }
    Ok(StabilizerGroup {
        num_qubits,
        generators,
        masks,
    })
}

/// `±1` eigenvalue of a `Z`-type string on the basis state of `τ`.
pub fn z_sign(layout: &RegisterLayout, p: &PauliString, tau: &[usize]) -> Result<i8> {
    let b = layout.basis_index(tau, 0)?;
    let ones = p
        .letters
        .iter()
        .enumerate()
        .filter(|(i, &l)| l == Z_ && layout.bit(b, i + 1) == 1)
        .count();
    Ok(if ones % 2 == 0 { 1 } else { -1 })
}

/// Signs of every generator across all valid configurations; each row
/// should be constant.
pub fn stabilizer_signs(circuit: &Circuit, cap: usize) -> Result<Vec<BTreeSet<i8>>> {
    let layout = check_circular(circuit)?;
    let gens = stabilizer_generators(circuit)?;
    let configs: Vec<Configuration> = enumerate_valid(&circuit.arch, cap)?;
    gens.iter()
        .map(|g| configs.iter().map(|t| z_sign(&layout, g, t)).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliEnergy {
    /// `⟨ψ|P†HP|ψ⟩`
    pub total: f64,
    pub best_term: String,
    pub best: f64,
}

pub fn pauli_energy(h: &CodeHamiltonian, p: &PauliString, psi: &[C64]) -> Result<PauliEnergy> {
    if p.len() != h.layout.num_qubits() || psi.len() != h.layout.dim() {
        return Err(Error::DimensionMismatch("Pauli, state and Hamiltonian disagree".into()));
    }
    let phi = p.apply(psi);
    let mut total = 0.0;
    let mut best = (String::new(), f64::NEG_INFINITY);
    for t in &h.terms {
        let e = t.expectation(&h.layout, &phi);
        total += e;
        if e > best.1 {
            best = (t.label.clone(), e);
        }
    }
    Ok(PauliEnergy {
        total,
        best_term: best.0,
        best: best.1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectionCase {
    Stabilizer,
    /// clock X/Y present
    Case1,
    /// every flag flipped
    Case2_1,
    /// some flags flipped
    Case2_2,
    /// data not identity
    Case3_1,
    /// clock Z only (with possibly flag Z)
    Case3_2_1,
    /// flag Z only
    Case3_2_2,
}

impl DetectionCase {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Stabilizer => "stabilizer",
            Self::Case1 => "1",
            Self::Case2_1 => "2.1",
            Self::Case2_2 => "2.2",
            Self::Case3_1 => "3.1",
            Self::Case3_2_1 => "3.2.1",
            Self::Case3_2_2 => "3.2.2",
        }
    }
}

pub fn classify(layout: &RegisterLayout, group: &StabilizerGroup, p: &PauliString) -> DetectionCase {
    if group.contains(p) {
        return DetectionCase::Stabilizer;
    }
    let l = |q: usize| p.letters[q - 1];
    let flips = |q: usize| matches!(l(q), X_ | Y_);
    let n = layout.n;
    let clocks: Vec<usize> = (1..=n)
        .flat_map(|i| (1..=layout.x).map(move |j| (i, j)))
        .map(|(i, j)| layout.clock(i, j))
        .collect();
    if clocks.iter().any(|&q| flips(q)) {
        return DetectionCase::Case1;
    }
    let flagged = (1..=n).filter(|&i| flips(layout.flag(i))).count();
    if flagged == n {
        return DetectionCase::Case2_1;
    }
    if flagged > 0 {
        return DetectionCase::Case2_2;
    }
    if (1..=n).any(|i| l(layout.data(i)) != I_) {
        return DetectionCase::Case3_1;
    }
    if clocks.iter().any(|&q| l(q) == Z_) {
        DetectionCase::Case3_2_1
    } else {
        DetectionCase::Case3_2_2
    }
}

/// Case-specific lower bound from the case analysis: `2/D` for clock flips,
/// `1/D²` otherwise.
pub fn case_bound(case: DetectionCase, depth: usize) -> f64 {
    let d = depth as f64;
    match case {
        DetectionCase::Stabilizer => 0.0,
        DetectionCase::Case1 => 2.0 / d,
        _ => 1.0 / (d * d),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub pauli: String,
    pub case: String,
    pub best_term: String,
    pub expectation: f64,
    /// Detection threshold `1/D²` (zero for stabilizers).
    pub threshold: f64,
    pub detected: bool,
    pub case_bound: f64,
    pub meets_case_bound: bool,
}

/// Best single-term energy of each `P|ψ⟩`. A non-stabilizer is detected when
/// that energy reaches `1/D²`; a stabilizer passes when every term stays at
/// zero.
pub fn detection_sweep(
    h: &CodeHamiltonian,
    group: &StabilizerGroup,
    psi: &[C64],
    paulis: &[PauliString],
) -> Result<Vec<SweepRow>> {
    let d = h.layout.depth() as f64;
    paulis
        .iter()
        .map(|p| {
            let case = classify(&h.layout, group, p);
            let e = pauli_energy(h, p, psi)?;
            let stab = case == DetectionCase::Stabilizer;
            let threshold = if stab { 0.0 } else { 1.0 / (d * d) };
            let bound = case_bound(case, h.layout.depth());
            let (detected, meets) = if stab {
                (e.best < 1e-10, e.best < 1e-10)
            } else {
                (e.best >= threshold - 1e-9, e.best >= bound - 1e-9)
            };
            Ok(SweepRow {
                pauli: p.to_string(),
                case: case.label().into(),
                best_term: e.best_term,
                expectation: e.best,
                threshold,
                detected,
                case_bound: bound,
                meets_case_bound: meets,
            })
        })
        .collect()
}

/// Uniform random Pauli strings outside the stabilizer group.
pub fn random_non_stabilizers(group: &StabilizerGroup, count: usize, seed: u64) -> Vec<PauliString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = PauliString {
            phase: 0,
            letters: (0..group.num_qubits).map(|_| rng.gen_range(0..4)).collect(),
        };
        if !group.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// The 11520 two-qubit Cliffords modulo phase, each with a shortest word over
/// `{HI, IH, SI, IS, CNOT}` (first letter applied first).
pub struct CliffordGroup {
    pub elements: Vec<Mat4>,
    pub words: Vec<Vec<Gate>>,
    index: HashMap<Vec<i64>, usize>,
}

fn phase_key(m: &Mat4) -> Vec<i64> {
    let pivot = m.iter().flatten().find(|z| z.norm() > 1e-6).copied().unwrap_or(ONE);
    let rot = pivot.conj() / pivot.norm();
    m.iter()
        .flatten()
        .flat_map(|z| {
            let w = z * rot;
            [(w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64]
        })
        .collect()
}

impl CliffordGroup {
    fn generate() -> Self {
        let gens = [Gate::HI, Gate::IH, Gate::SI, Gate::IS, Gate::Cnot];
        let mut elements = vec![sim::identity4()];
        let mut words: Vec<Vec<Gate>> = vec![vec![]];
        let mut index = HashMap::from([(phase_key(&elements[0]), 0)]);
        let mut head = 0;
        while head < elements.len() {
            for g in &gens {
                let m = sim::mul4(&g.matrix(), &elements[head]);
                let key = phase_key(&m);
                if !index.contains_key(&key) {
                    index.insert(key, elements.len());
                    let mut w = words[head].clone();
                    w.push(g.clone());
                    elements.push(m);
                    words.push(w);
                }
            }
            head += 1;
        }
        Self {
            elements,
            words,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, m: &Mat4) -> Option<usize> {
        self.index.get(&phase_key(m)).copied()
    }

    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn clifford_group() -> &'static CliffordGroup {
    static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
    GROUP.get_or_init(CliffordGroup::generate)
}

pub fn random_clifford<R: Rng>(rng: &mut R) -> Gate {
    let g = clifford_group();
    Gate::Generic(Box::new(g.elements[rng.gen_range(0..g.len())]))
}

/// Uniform Cliffords on every slot of `arch`.
pub fn random_clifford_gates<R: Rng>(arch: &Architecture, rng: &mut R) -> Vec<Vec<Gate>> {
    arch.layers
        .iter()
        .map(|l| l.iter().map(|_| random_clifford(rng)).collect())
        .collect()
}

/// Random perfect matching per layer with a uniform Clifford on each pair.
pub fn random_clifford_circuit(n: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::OddQubits(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let mut wires: Vec<usize> = (1..=n).collect();
        wires.shuffle(&mut rng);
        let mut layer: Vec<(usize, usize)> = wires
            .chunks(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        layer.sort_unstable();
        layers.push(layer);
    }
    let arch = Architecture::new(n, layers, false)?;
    let gates = random_clifford_gates(&arch, &mut rng);
    Circuit::new(arch, gates)
}

/// Rewrites each Clifford gate as its `{HI, IH, SI, IS, CNOT}` word padded
/// with identities, so every layer becomes `max_word_len` layers on the same
/// pairing.
pub fn decompose_clifford(c: &Circuit) -> Result<Circuit> {
    let group = clifford_group();
    let width = group.max_word_len().max(1);
    let mut layers = Vec::with_capacity(c.depth() * width);
    let mut gates = Vec::with_capacity(c.depth() * width);
    for (layer, row) in c.arch.layers.iter().zip(&c.gates) {
        let words: Vec<&Vec<Gate>> = row
            .iter()
            .map(|g| {
                group
                    .index_of(&g.matrix())
                    .map(|i| &group.words[i])
                    .ok_or_else(|| Error::InvalidParameter(format!("{} is not Clifford", g.label())))
            })
            .collect::<Result<_>>()?;
        for s in 0..width {
            layers.push(layer.clone());
            gates.push(words.iter().map(|w| w.get(s).cloned().unwrap_or(Gate::II)).collect());
        }
    }
    let arch = Architecture::new(c.n(), layers, c.arch.circular)?;
    Circuit::new(arch, gates)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Niceness {
    pub nice: bool,
    /// Per qubit: first layer applying `H` and first applying `S` to it.
    pub witness: Vec<(Option<usize>, Option<usize>)>,
}

/// Every qubit sees some layer with `H` on it and some layer with `S` on it.
pub fn is_nice(c: &Circuit) -> Niceness {
    let mut witness = vec![(None, None); c.n()];
    for (d, (layer, row)) in c.arch.layers.iter().zip(&c.gates).enumerate() {
        for (&(p, q), g) in layer.iter().zip(row) {
            let (h, s) = match g {
                Gate::HI => (Some(p), None),
                Gate::IH => (Some(q), None),
                Gate::SI => (None, Some(p)),
                Gate::IS => (None, Some(q)),
                _ => (None, None),
            };
            if let Some(w) = h {
                witness[w - 1].0.get_or_insert(d + 1);
            }
            if let Some(w) = s {
                witness[w - 1].1.get_or_insert(d + 1);
            }
        }
    }
    Niceness {
        nice: witness.iter().all(|w| w.0.is_some() && w.1.is_some()),
        witness,
    }
}

fn eig2(m: &Mat2) -> [C64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dag2(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Eigenvalues of `HXHX`, `HZHZ` and `S†Y†SY`.
pub fn eigenvalue_facts() -> Vec<(&'static str, [C64; 2])> {
    let x: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
    let y: Mat2 = [[ZERO, -sim::I], [sim::I, ZERO]];
    let z: Mat2 = [[ONE, ZERO], [ZERO, -ONE]];
    let h = sim::mat_h();
    let s = sim::mat_s();
    let prod = |ms: &[&Mat2]| ms.iter().skip(1).fold(*ms[0], |acc, m| mul2(&acc, m));
    vec![
        ("H X H X", eig2(&prod(&[&h, &x, &h, &x]))),
        ("H Z H Z", eig2(&prod(&[&h, &z, &h, &z]))),
        ("S^dag Y^dag S Y", eig2(&prod(&[&dag2(&s), &dag2(&y), &s, &y]))),
    ]
}

/// `X ⊗ X` as a gate.
pub fn xx_gate() -> Gate {
    let x: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
    Gate::Generic(Box::new(sim::kron2(&x, &x)))
}

/// Prepends the identity-equivalent block pair `J` (two rank-`l` bitonic
/// blocks of identities whose last layers are `X ⊗ X`) and then closes the
/// circuit circularly.
pub fn with_j_block(base: &Circuit) -> Result<Circuit> {
    let l = crate::architecture::log2_exact(base.n())?;
    let block = crate::architecture::build_bitonic_block(l)?;
    let mut layers = Vec::new();
    let mut gates = Vec::new();
    for _ in 0..2 {
        for (d, layer) in block.layers.iter().enumerate() {
            layers.push(layer.clone());
            let g = if d + 1 == l { xx_gate() } else { Gate::II };
            gates.push(vec![g; layer.len()]);
        }
    }
    layers.extend(base.arch.layers.iter().cloned());
    gates.extend(base.gates.iter().cloned());
    let arch = Architecture::new(base.n(), layers, false)?;
    Ok(Circuit::new(arch, gates)?.circularize())
}

/// Circular `𝓑_l^{↔m}` instance closed to the identity. For `l = 1` every
/// layer shares one pairing, so the first half is random and the second half
/// undoes it in reverse. For `l ≥ 2` the first layer of block one is random,
/// the first layer of block two inverts it, and every other gate is the
/// identity.
pub fn clifford_instance(l: usize, m: usize, seed: u64) -> Result<Circuit> {
    let arch = crate::architecture::build_circular(l, m)?;
    let dd = arch.depth();
    if m < 2 || dd % 2 == 1 {
        return Err(Error::InvalidParameter(format!("need m >= 2 and even depth, got l = {l}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = arch.layers[0].len();
    let mut gates = vec![vec![Gate::II; width]; dd];
    if l == 1 {
        for d in 0..dd / 2 {
            gates[d] = (0..width).map(|_| random_clifford(&mut rng)).collect();
            gates[dd - 1 - d] = gates[d].iter().map(Gate::dagger).collect();
        }
    } else {
        gates[0] = (0..width).map(|_| random_clifford(&mut rng)).collect();
        gates[l] = gates[0].iter().map(Gate::dagger).collect();
    }
    Circuit::new(arch, gates)
}
