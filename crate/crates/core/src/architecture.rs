//! Circuit architectures: bitonic blocks, their products and circular
//! wrappings, shift permutations, SWAP routing and uniformization, and the
//! hypercube spatial embedding.
//!
//! Qubit labels are 1-based everywhere in the public interface. Inside a
//! bitonic block on `2^l` wires, layer `k` pairs qubits whose 0-based labels
//! differ in bit `l - k`; this "bit view" is what every recursion below uses.

use crate::error::{Error, Result};
use crate::sim::{self, Mat4, C64};
use serde::{Deserialize, Serialize};

/// Which structured family an architecture came from. Counting and ranking
/// need it; anything relabeled or hand-built is `Other`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Bitonic { l: usize },
    Product { l: usize, m: usize },
    Circular { l: usize, m: usize },
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub n: usize,
    /// Each layer is a perfect matching; pairs are stored as `(p, q)` with `p < q`.
    pub layers: Vec<Vec<(usize, usize)>>,
    pub circular: bool,
    pub family: Family,
}

/// A gate slot: 1-based layer index and the pair it acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub layer: usize,
    pub p: usize,
    pub q: usize,
}

pub(crate) fn log2_exact(n: usize) -> Result<usize> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Bit flipped by layer `d` (1-based) of a product of rank-`l` blocks.
pub(crate) fn product_layer_bit(l: usize, d: usize) -> usize {
    l - ((d - 1) % l + 1)
}

fn layer_from_bit(n: usize, bit: usize) -> Vec<(usize, usize)> {
    (0..n)
        .filter(|i| i & (1 << bit) == 0)
        .map(|i| (i + 1, (i | (1 << bit)) + 1))
        .collect()
}

impl Architecture {
    /// Builds an architecture from explicit layers, checking that every layer
    /// is a perfect matching of `1..=n`.
    pub fn new(n: usize, layers: Vec<Vec<(usize, usize)>>, circular: bool) -> Result<Self> {
        log2_exact(n)?;
        let mut norm = Vec::with_capacity(layers.len());
        for (d, layer) in layers.into_iter().enumerate() {
            let mut seen = vec![false; n];
            let mut out = Vec::with_capacity(layer.len());
            for (a, b) in layer {
                let (p, q) = if a < b { (a, b) } else { (b, a) };
                if p == 0 || q > n || p == q || seen[p - 1] || seen[q - 1] {
                    return Err(Error::InvalidParameter(format!(
                        "layer {} is not a perfect matching",
                        d + 1
                    )));
                }
                seen[p - 1] = true;
                seen[q - 1] = true;
                out.push((p, q));
            }
            if out.len() * 2 != n {
                return Err(Error::InvalidParameter(format!(
                    "layer {} is not a perfect matching",
                    d + 1
                )));
            }
            out.sort_unstable();
            norm.push(out);
        }
        Ok(Self {
            n,
            layers: norm,
            circular,
            family: Family::Other,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Partner table: `partners()[d][i]` is the 1-based partner of qubit `i + 1`
    /// in layer `d + 1`.
    pub fn partners(&self) -> Vec<Vec<usize>> {
        self.layers
            .iter()
            .map(|layer| {
                let mut t = vec![0; self.n];
                for &(p, q) in layer {
                    t[p - 1] = q;
                    t[q - 1] = p;
                }
                t
            })
            .collect()
    }

    pub fn slots(&self) -> Vec<Slot> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(d, layer)| {
                layer.iter().map(move |&(p, q)| Slot { layer: d + 1, p, q })
            })
            .collect()
    }

    /// Relabels qubit `i` as `perm(i)`.
    pub fn relabel(&self, perm: &Permutation) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                let mut l: Vec<_> = layer
                    .iter()
                    .map(|&(p, q)| {
                        let (a, b) = (perm.apply(p), perm.apply(q));
                        (a.min(b), a.max(b))
                    })
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        Self {
            n: self.n,
            layers,
            circular: self.circular,
            family: Family::Other,
        }
    }

    /// Left cyclic shift of the layer list by `j`.
    pub fn shift_layers(&self, j: usize) -> Self {
        let mut layers = self.layers.clone();
        if !layers.is_empty() {
            let k = j % layers.len();
            layers.rotate_left(k);
        }
        Self {
            n: self.n,
            layers,
            circular: self.circular,
            family: Family::Other,
        }
    }

    /// Architecture induced by a subset of layers, kept in their original order.
    pub fn sub_architecture(&self, layer_indices: &[usize]) -> Self {
        Self {
            n: self.n,
            layers: layer_indices.iter().map(|&d| self.layers[d - 1].clone()).collect(),
            circular: false,
            family: Family::Other,
        }
    }

    /// Bit flipped by every pair of layer `d`, if the layer has that form.
    pub fn layer_bit(&self, d: usize) -> Option<usize> {
        let layer = &self.layers[d - 1];
        let x = (layer[0].0 - 1) ^ (layer[0].1 - 1);
        if !x.is_power_of_two() {
            return None;
        }
        layer
            .iter()
            .all(|&(p, q)| (p - 1) ^ (q - 1) == x)
            .then(|| x.trailing_zeros() as usize)
    }

    /// Interaction graph as sorted adjacency lists (1-based).
    pub fn interaction_graph(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for layer in &self.layers {
            for &(p, q) in layer {
                adj[p - 1].push(q);
                adj[q - 1].push(p);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Layers (1-based, increasing) at which `p` and `q` share a gate.
    pub fn shared_layers(&self, p: usize, q: usize) -> Vec<usize> {
        let (a, b) = (p.min(q), p.max(q));
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, layer)| layer.contains(&(a, b)))
            .map(|(d, _)| d + 1)
            .collect()
    }
}

pub fn build_bitonic_block(l: usize) -> Result<Architecture> {
    if l < 1 {
        return Err(Error::InvalidRank(l));
    }
    let n = 1 << l;
    let layers = (1..=l).map(|k| layer_from_bit(n, l - k)).collect();
    Ok(Architecture {
        n,
        layers,
        circular: false,
        family: Family::Bitonic { l },
    })
}

pub fn build_product(l: usize, m: usize) -> Result<Architecture> {
    if l < 1 {
        return Err(Error::InvalidRank(l));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let n = 1 << l;
    let layers = (1..=l * m)
        .map(|d| layer_from_bit(n, product_layer_bit(l, d)))
        .collect();
    Ok(Architecture {
        n,
        layers,
        circular: false,
        family: if m == 1 {
            Family::Bitonic { l }
        } else {
            Family::Product { l, m }
        },
    })
}

pub fn build_circular(l: usize, m: usize) -> Result<Architecture> {
    let mut a = build_product(l, m)?;
    a.circular = true;
    a.family = Family::Circular { l, m };
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    /// `map[i - 1] = π(i)`, 1-based values.
    pub map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (1..=n).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidParameter("not a bijection".into()));
            }
            seen[v - 1] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Self { map: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            map: other.map.iter().map(|&v| self.map[v - 1]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| v == i + 1)
    }
}

/// π_l^j. π_l is a left rotation of the `l` label bits, so its order is `l`.
pub fn shift_permutation(l: usize, j: usize) -> Result<Permutation> {
    if l < 1 {
        return Err(Error::InvalidRank(l));
    }
    let n = 1usize << l;
    let half = n / 2;
    let pi = Permutation {
        map: (1..=n)
            .map(|i| if i <= half { 2 * i - 1 } else { 2 * i - n })
            .collect(),
    };
    let mut out = Permutation::identity(n);
    for _ in 0..(j % l) {
        out = pi.compose(&out);
    }
    Ok(out)
}

/// Gate labels. Matrices act on `|b_p b_q⟩` with `p` the lower label of the slot.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    II,
    HI,
    IH,
    SI,
    IS,
    Cnot,
    Swap,
    Generic(Box<Mat4>),
}

impl Gate {
    pub fn matrix(&self) -> Mat4 {
        use sim::{kron2, mat_h, mat_i, mat_s};
        match self {
            Gate::II => sim::identity4(),
            Gate::HI => kron2(&mat_h(), &mat_i()),
            Gate::IH => kron2(&mat_i(), &mat_h()),
            Gate::SI => kron2(&mat_s(), &mat_i()),
            Gate::IS => kron2(&mat_i(), &mat_s()),
            Gate::Cnot => sim::cnot(),
            Gate::Swap => sim::swap(),
            Gate::Generic(m) => **m,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Gate::II => "II",
            Gate::HI => "HI",
            Gate::IH => "IH",
            Gate::SI => "SI",
            Gate::IS => "IS",
            Gate::Cnot => "CNOT",
            Gate::Swap => "SWAP",
            Gate::Generic(_) => "generic",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "II" => Gate::II,
            "HI" => Gate::HI,
            "IH" => Gate::IH,
            "SI" => Gate::SI,
            "IS" => Gate::IS,
            "CNOT" => Gate::Cnot,
            "SWAP" => Gate::Swap,
            _ => return None,
        })
    }

    /// Builds a generic gate after checking unitarity to 1e-12.
    pub fn generic(m: Mat4) -> Result<Self> {
        if !sim::is_unitary(&m, 1e-12) {
            return Err(Error::InvalidParameter("gate matrix is not unitary".into()));
        }
        Ok(Gate::Generic(Box::new(m)))
    }

    /// Same operator with the two qubits exchanged.
    pub fn reversed(&self) -> Self {
        match self {
            Gate::II => Gate::II,
            Gate::HI => Gate::IH,
            Gate::IH => Gate::HI,
            Gate::SI => Gate::IS,
            Gate::IS => Gate::SI,
            Gate::Swap => Gate::Swap,
            g => {
                let s = sim::swap();
                Gate::Generic(Box::new(sim::mul4(&s, &sim::mul4(&g.matrix(), &s))))
            }
        }
    }

    pub fn dagger(&self) -> Self {
        match self {
            Gate::II | Gate::HI | Gate::IH | Gate::Cnot | Gate::Swap => self.clone(),
            g => Gate::Generic(Box::new(sim::dagger4(&g.matrix()))),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Gate::II => true,
            Gate::Generic(m) => sim::dist4(m, &sim::identity4()) < 1e-12,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub arch: Architecture,
    /// `gates[d][k]` sits on `arch.layers[d][k]`.
    pub gates: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(arch: Architecture, gates: Vec<Vec<Gate>>) -> Result<Self> {
        if gates.len() != arch.depth()
            || gates.iter().zip(&arch.layers).any(|(g, l)| g.len() != l.len())
        {
            return Err(Error::DimensionMismatch(
                "gate list does not match the slot list".into(),
            ));
        }
        Ok(Self { arch, gates })
    }

    pub fn identity(arch: Architecture) -> Self {
        let gates = arch.layers.iter().map(|l| vec![Gate::II; l.len()]).collect();
        Self { arch, gates }
    }

    pub fn n(&self) -> usize {
        self.arch.n
    }

    pub fn depth(&self) -> usize {
        self.arch.depth()
    }

    /// Gate in layer `d` (1-based) acting on `p`, with its partner.
    pub fn gate_on(&self, d: usize, p: usize) -> (usize, &Gate) {
        let layer = &self.arch.layers[d - 1];
        let k = layer
            .iter()
            .position(|&(a, b)| a == p || b == p)
            .expect("layers are perfect matchings");
        let (a, b) = layer[k];
        (if a == p { b } else { a }, &self.gates[d - 1][k])
    }

    /// Applies every layer in order to a state vector on `n` qubits.
    pub fn apply(&self, psi: &mut [C64]) {
        for d in 0..self.depth() {
            self.apply_layer(d + 1, psi);
        }
    }

    pub fn apply_layer(&self, d: usize, psi: &mut [C64]) {
        for (&(p, q), g) in self.arch.layers[d - 1].iter().zip(&self.gates[d - 1]) {
            if !matches!(g, Gate::II) {
                sim::apply_2q(psi, self.n(), p, q, &g.matrix());
            }
        }
    }

    /// Net wire action of a SWAP/identity circuit: `trace[w - 1]` is where the
    /// content of wire `w` ends up.
    pub fn wire_trace(&self) -> Result<Permutation> {
        let n = self.n();
        // at[pos] = original wire currently at pos
        let mut at: Vec<usize> = (1..=n).collect();
        for (layer, gates) in self.arch.layers.iter().zip(&self.gates) {
            for (&(p, q), g) in layer.iter().zip(gates) {
                match g {
                    Gate::II => {}
                    Gate::Swap => at.swap(p - 1, q - 1),
                    _ => {
                        return Err(Error::InvalidParameter(
                            "wire trace needs SWAP/identity gates only".into(),
                        ))
                    }
                }
            }
        }
        let mut trace = vec![0; n];
        for (pos, &w) in at.iter().enumerate() {
            trace[w - 1] = pos + 1;
        }
        Ok(Permutation { map: trace })
    }

    /// Appends the layer-reversed inverse, giving a circuit equal to the identity.
    pub fn circularize(&self) -> Circuit {
        let mut layers = self.arch.layers.clone();
        let mut gates = self.gates.clone();
        for d in (0..self.depth()).rev() {
            layers.push(self.arch.layers[d].clone());
            gates.push(self.gates[d].iter().map(Gate::dagger).collect());
        }
        Circuit {
            arch: Architecture {
                n: self.n(),
                layers,
                circular: true,
                family: Family::Other,
            },
            gates,
        }
    }
}

/// Routes `sigma` (content of wire `w` moves to wire `sigma(w)`) with a bitonic
/// sorting network laid out on `l` consecutive rank-`l` blocks.
pub fn route_permutation(sigma: &Permutation) -> Result<Circuit> {
    let n = sigma.len();
    let l = log2_exact(n)?;
    let arch = build_product(l, l)?;
    if sigma.is_identity() {
        // the alternating sort would still reverse its descending sub-blocks
        return Ok(Circuit::identity(arch));
    }
    let mut swap = vec![vec![false; n]; l * l];
    let mut key: Vec<usize> = sigma.map.clone();
    for s in 1..=l {
        let size = 1usize << s;
        for bit in (0..s).rev() {
            // stage s lives in block s; the comparator distance 2^bit is layer l - bit
            let d = (s - 1) * l + (l - bit);
            for i in 0..n {
                let j = i ^ (1 << bit);
                if i < j {
                    let ascending = i & size == 0;
                    if (key[i] > key[j]) == ascending {
                        key.swap(i, j);
                        swap[d - 1][i] = true;
                    }
                }
            }
        }
    }
    let gates = arch
        .layers
        .iter()
        .enumerate()
        .map(|(d, layer)| {
            layer
                .iter()
                .map(|&(p, _)| if swap[d][p - 1] { Gate::Swap } else { Gate::II })
                .collect()
        })
        .collect();
    Ok(Circuit { arch, gates })
}

/// Uniformized circuit before the wires are returned home: logical qubit `i`
/// ends on wire `placement(i)`.
#[derive(Clone, Debug)]
pub struct Uniformized {
    pub circuit: Circuit,
    pub placement: Permutation,
}

/// Rewrites an arbitrary layered circuit onto consecutive bitonic blocks.
///
/// Before each original layer the wires are routed so that every pair of the
/// layer sits on a pair `(2i-1, 2i)`, which is the last layer of a block. With
/// `merge` the gates are folded into that last routing layer, so each original
/// layer costs `l^2` layers (`l^2 + 1` without merging).
pub fn uniformize_body(c: &Circuit, merge: bool) -> Result<Uniformized> {
    let n = c.n();
    let l = log2_exact(n)?;
    let target: Vec<(usize, usize)> = (1..=n / 2).map(|k| (2 * k - 1, 2 * k)).collect();
    let mut pos = Permutation::identity(n); // logical i sits on wire pos(i)
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut gates: Vec<Vec<Gate>> = Vec::new();

    for (layer, lg) in c.arch.layers.iter().zip(&c.gates) {
        let fits = layer.iter().all(|&(a, b)| {
            let (x, y) = (pos.apply(a), pos.apply(b));
            x.min(y) % 2 == 1 && x.max(y) == x.min(y) + 1
        });
        let next = if fits {
            pos.clone()
        } else {
            let mut map = vec![0; n];
            for (k, &(a, b)) in layer.iter().enumerate() {
                map[a - 1] = 2 * k + 1;
                map[b - 1] = 2 * k + 2;
            }
            Permutation::from_map(map)?
        };
        let r = route_permutation(&next.compose(&pos.inverse()))?;
        layers.extend(r.arch.layers);
        gates.extend(r.gates);
        pos = next;

        let mut phys = vec![Gate::II; n / 2];
        for (&(a, b), g) in layer.iter().zip(lg) {
            let (x, y) = (pos.apply(a), pos.apply(b));
            let k = x.min(y) / 2;
            phys[k] = if x < y { g.clone() } else { g.reversed() };
        }
        if merge {
            let last = gates.last_mut().expect("routing emits layers");
            for (slot, g) in last.iter_mut().zip(&phys) {
                *slot = match (&*slot, g) {
                    (Gate::II, g) => g.clone(),
                    (r, Gate::II) => r.clone(),
                    (r, g) => Gate::Generic(Box::new(sim::mul4(&g.matrix(), &r.matrix()))),
                };
            }
        } else {
            layers.push(target.clone());
            gates.push(phys);
        }
    }
    let depth = layers.len();
    let family = if merge && depth > 0 {
        Family::Product { l, m: depth / l }
    } else {
        Family::Other
    };
    Ok(Uniformized {
        circuit: Circuit {
            arch: Architecture {
                n,
                layers,
                circular: false,
                family,
            },
            gates,
        },
        placement: pos,
    })
}

/// [`uniformize_body`] followed by one more routing stage that returns every
/// logical qubit to its own wire, so the result equals `c` as a unitary.
pub fn uniformize(c: &Circuit, merge: bool) -> Result<Circuit> {
    let Uniformized {
        mut circuit,
        placement,
    } = uniformize_body(c, merge)?;
    let back = route_permutation(&placement.inverse())?;
    circuit.arch.layers.extend(back.arch.layers);
    circuit.gates.extend(back.gates);
    let l = log2_exact(c.n())?;
    let depth = circuit.depth();
    circuit.arch.family = if merge && depth % l == 0 {
        Family::Product { l, m: depth / l }
    } else {
        Family::Other
    };
    Ok(circuit)
}

/// Physical register of the spacetime layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Register {
    Data(usize),
    Flag(usize),
    Clock(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingCoords {
    pub l: usize,
    pub x: usize,
    pub n: usize,
}

impl EmbeddingCoords {
    pub fn dim(&self) -> usize {
        self.l + 1 + self.x
    }

    pub fn coords(&self, r: Register) -> Vec<u8> {
        let corner = |i: usize| -> Vec<u8> {
            (0..self.l)
                .map(|b| (((i - 1) >> (self.l - 1 - b)) & 1) as u8)
                .collect()
        };
        let mut v = Vec::with_capacity(self.dim());
        match r {
            Register::Data(i) => {
                v.extend(corner(i));
                v.push(0);
                v.extend(std::iter::repeat(0).take(self.x));
            }
            Register::Flag(i) => {
                v.extend(corner(i));
                v.push(1);
                v.extend(std::iter::repeat(0).take(self.x));
            }
            Register::Clock(i, j) => {
                v.extend(corner(i));
                v.push(0);
                v.extend((1..=self.x).map(|k| u8::from(k == j)));
            }
        }
        v
    }

    pub fn registers(&self) -> Vec<Register> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            out.push(Register::Data(i));
        }
        for i in 1..=self.n {
            out.push(Register::Flag(i));
        }
        for i in 1..=self.n {
            for j in 1..=self.x {
                out.push(Register::Clock(i, j));
            }
        }
        out
    }

    /// Squared Euclidean distance, exact.
    pub fn dist2(&self, a: Register, b: Register) -> u32 {
        self.coords(a)
            .iter()
            .zip(self.coords(b))
            .map(|(&u, v)| u32::from(u != v))
            .sum()
    }
}

/// Places qubit `i` at the hypercube corner given by the bits of `i - 1`.
/// Works whenever every layer pairs labels differing in a single bit.
pub fn hypercube_embedding(arch: &Architecture, x: usize) -> Result<EmbeddingCoords> {
    let l = log2_exact(arch.n)?;
    for (d, layer) in arch.layers.iter().enumerate() {
        if layer.iter().any(|&(p, q)| !((p - 1) ^ (q - 1)).is_power_of_two()) {
            return Err(Error::UnsupportedArchitecture(format!(
                "layer {} pairs qubits that are not hypercube neighbours",
                d + 1
            )));
        }
    }
    Ok(EmbeddingCoords { l, x, n: arch.n })
}
