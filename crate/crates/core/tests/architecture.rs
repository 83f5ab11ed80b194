use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spacetime_core::architecture::*;
use spacetime_core::sim;
use std::collections::BTreeSet;

fn layer_sets(a: &Architecture) -> Vec<BTreeSet<(usize, usize)>> {
    a.layers.iter().map(|l| l.iter().copied().collect()).collect()
}

#[test]
fn block_examples() {
    let b1 = build_bitonic_block(1).unwrap();
    assert_eq!(b1.layers, vec![vec![(1, 2)]]);
    let b2 = build_bitonic_block(2).unwrap();
    assert_eq!(b2.layers, vec![vec![(1, 3), (2, 4)], vec![(1, 2), (3, 4)]]);
    let b3 = build_bitonic_block(3).unwrap();
    assert_eq!(b3.layers[0], vec![(1, 5), (2, 6), (3, 7), (4, 8)]);
    assert!(build_bitonic_block(0).is_err());
}

/// Direct recursive definition: layer 1 pairs i with i + n/2, the remaining
/// layers are two copies of the smaller block on the halves.
fn recursive_block(l: usize) -> Vec<Vec<(usize, usize)>> {
    if l == 1 {
        return vec![vec![(1, 2)]];
    }
    let n = 1 << l;
    let mut layers = vec![(1..=n / 2).map(|i| (i, i + n / 2)).collect::<Vec<_>>()];
    for layer in recursive_block(l - 1) {
        let mut both = layer.clone();
        both.extend(layer.iter().map(|&(p, q)| (p + n / 2, q + n / 2)));
        both.sort_unstable();
        layers.push(both);
    }
    layers
}

#[test]
fn block_matches_recursive_definition() {
    for l in 1..=6 {
        assert_eq!(build_bitonic_block(l).unwrap().layers, recursive_block(l));
    }
}

#[test]
fn product_and_circular_examples() {
    let b2 = build_bitonic_block(2).unwrap();
    assert_eq!(build_product(2, 1).unwrap().layers, b2.layers);
    let p = build_product(2, 2).unwrap();
    assert_eq!(p.depth(), 4);
    assert_eq!(p.layers[..2], b2.layers[..]);
    assert_eq!(p.layers[2..], b2.layers[..]);
    assert_eq!(build_product(3, 3).unwrap().depth(), 9);
    let c = build_circular(1, 3).unwrap();
    assert!(c.circular);
    assert_eq!(c.layers, vec![vec![(1, 2)]; 3]);
    let c = build_circular(2, 2).unwrap();
    assert!(c.circular && c.depth() == 4);
}

#[test]
fn shift_permutation_examples() {
    let p3 = shift_permutation(3, 1).unwrap();
    assert_eq!(p3.map, vec![1, 3, 5, 7, 2, 4, 6, 8]);
    assert!(p3.compose(&p3.inverse()).is_identity());
    for l in 1..=5 {
        let b = build_bitonic_block(l).unwrap();
        for j in 0..l {
            let pj = shift_permutation(l, j).unwrap();
            assert_eq!(layer_sets(&b.shift_layers(j).relabel(&pj)), layer_sets(&b), "l={l} j={j}");
            // the inverse undoes the shift in the other direction
            let back = b.relabel(&pj.inverse()).shift_layers(l - j);
            assert_eq!(layer_sets(&back), layer_sets(&b));
        }
        assert!(shift_permutation(l, l).unwrap().is_identity());
    }
}

fn canonical_tensor_layers(l: usize, j: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let small = build_bitonic_block(j).unwrap();
    let copies = 1 << (l - j);
    let w = 1 << j;
    small
        .layers
        .iter()
        .map(|layer| {
            (0..copies)
                .flat_map(|c| layer.iter().map(move |&(p, q)| (p + c * w, q + c * w)))
                .collect()
        })
        .collect()
}

/// Searches all relabelings for small n, otherwise builds the bit map.
fn isomorphic_to_tensor(sub: &Architecture, l: usize, j: usize) -> bool {
    let target = canonical_tensor_layers(l, j);
    let bits: Vec<usize> = (1..=sub.depth()).map(|d| sub.layer_bit(d).unwrap()).collect();
    let others: Vec<usize> = (0..l).filter(|b| !bits.contains(b)).collect();
    let map: Vec<usize> = (0..sub.n)
        .map(|i| {
            let mut x = 0;
            for (k, &b) in bits.iter().enumerate() {
                x |= ((i >> b) & 1) << (j - 1 - k);
            }
            for (k, &b) in others.iter().enumerate() {
                x |= ((i >> b) & 1) << (j + k);
            }
            x + 1
        })
        .collect();
    let perm = Permutation::from_map(map).unwrap();
    layer_sets(&sub.relabel(&perm)) == target
}

#[test]
fn sub_bitonic_isomorphism_exhaustive() {
    for l in 1..=4 {
        let b = build_bitonic_block(l).unwrap();
        for mask in 1u32..(1 << l) {
            let chosen: Vec<usize> = (1..=l).filter(|d| mask & (1 << (d - 1)) != 0).collect();
            let sub = b.sub_architecture(&chosen);
            assert!(isomorphic_to_tensor(&sub, l, chosen.len()), "l={l} {chosen:?}");
        }
    }
    // brute-force cross-check at l = 3 over all 8! relabelings for one subset
    let b = build_bitonic_block(3).unwrap();
    let sub = b.sub_architecture(&[1, 3]);
    let target = canonical_tensor_layers(3, 2);
    let mut labels: Vec<usize> = (1..=8).collect();
    let mut found = false;
    permute(&mut labels, 0, &mut |perm| {
        if !found {
            let p = Permutation::from_map(perm.to_vec()).unwrap();
            found = layer_sets(&sub.relabel(&p)) == target;
        }
    });
    assert!(found);
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

#[test]
fn interaction_graph_is_hypercube() {
    for l in 1..=5 {
        let b = build_bitonic_block(l).unwrap();
        let adj = b.interaction_graph();
        for (i, nb) in adj.iter().enumerate() {
            assert_eq!(nb.len(), l);
            for &j in nb {
                assert_eq!(((i) ^ (j - 1)).count_ones(), 1);
            }
        }
    }
}

#[test]
fn dag_degrees() {
    // every slot has at most two predecessors and two successors
    let p = build_product(3, 3).unwrap();
    let parts = p.partners();
    for d in 1..=p.depth() {
        for i in 0..p.n {
            assert_ne!(parts[d - 1][i], 0);
        }
    }
}

#[test]
fn route_examples() {
    let id = route_permutation(&Permutation::identity(8)).unwrap();
    assert!(id.gates.iter().flatten().all(|g| *g == Gate::II));
    assert_eq!(id.depth(), 9);
    let rev = Permutation::from_map(vec![4, 3, 2, 1]).unwrap();
    let c = route_permutation(&rev).unwrap();
    assert_eq!(c.wire_trace().unwrap(), rev);
    assert_eq!(c.arch.layers, build_product(2, 2).unwrap().layers);
    assert!(route_permutation(&Permutation::identity(6)).is_err());
}

#[test]
fn route_random_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2usize, 4, 8, 16] {
        for _ in 0..250 {
            let mut map: Vec<usize> = (1..=n).collect();
            map.shuffle(&mut rng);
            let sigma = Permutation::from_map(map).unwrap();
            let c = route_permutation(&sigma).unwrap();
            assert_eq!(c.wire_trace().unwrap(), sigma);
            let l = n.trailing_zeros() as usize;
            assert_eq!(c.arch.layers, build_product(l, l).unwrap().layers);
        }
    }
}

fn random_matching<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut v: Vec<usize> = (1..=n).collect();
    v.shuffle(rng);
    v.chunks(2).map(|c| (c[0], c[1])).collect()
}

fn random_gate<R: Rng>(rng: &mut R) -> Gate {
    match rng.gen_range(0..8) {
        0 => Gate::II,
        1 => Gate::HI,
        2 => Gate::IH,
        3 => Gate::SI,
        4 => Gate::IS,
        5 => Gate::Cnot,
        6 => Gate::Swap,
        _ => Gate::Cnot.reversed(),
    }
}

fn random_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> Circuit {
    let layers: Vec<_> = (0..depth).map(|_| random_matching(n, rng)).collect();
    let arch = Architecture::new(n, layers, false).unwrap();
    let gates = arch
        .layers
        .iter()
        .map(|l| l.iter().map(|_| random_gate(rng)).collect())
        .collect();
    Circuit::new(arch, gates).unwrap()
}

fn same_action(a: &Circuit, b: &Circuit, states: usize, rng: &mut ChaCha8Rng) {
    let dim = 1 << a.n();
    for _ in 0..states {
        let psi = sim::random_state(dim, rng);
        let (mut x, mut y) = (psi.clone(), psi);
        a.apply(&mut x);
        b.apply(&mut y);
        assert!(sim::fidelity(&x, &y) > 1.0 - 1e-10);
        let diff: f64 = x.iter().zip(&y).map(|(u, v)| (u - v).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-10);
    }
}

#[test]
fn uniformize_preserves_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2usize, 4, 8] {
        for depth in 1..=3 {
            let c = random_circuit(n, depth, &mut rng);
            for merge in [true, false] {
                let u = uniformize(&c, merge).unwrap();
                same_action(&c, &u, 20, &mut rng);
                let l = n.trailing_zeros() as usize;
                if merge {
                    assert_eq!(u.arch.layers, build_product(l, u.depth() / l).unwrap().layers);
                }
                // body alone meets the per-layer budget and equals c up to placement
                let body = uniformize_body(&c, merge).unwrap();
                assert!(body.circuit.depth() <= depth * (l * l + 1));
                let mut rest = body.circuit.clone();
                let back = route_permutation(&body.placement.inverse()).unwrap();
                rest.arch.layers.extend(back.arch.layers);
                rest.gates.extend(back.gates);
                same_action(&c, &rest, 5, &mut rng);
            }
        }
    }
    // exhaustive basis check at n = 4
    let c = random_circuit(4, 3, &mut rng);
    let u = uniformize(&c, true).unwrap();
    for k in 0..16 {
        let mut x = sim::basis_state(16, k);
        let mut y = x.clone();
        c.apply(&mut x);
        u.apply(&mut y);
        assert!(sim::fidelity(&x, &y) > 1.0 - 1e-12);
    }
}

#[test]
fn uniformize_depth_bound_n8() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = random_circuit(8, 3, &mut rng);
    assert!(uniformize_body(&c, true).unwrap().circuit.depth() <= 30);
    assert!(uniformize(&c, true).unwrap().depth() <= 30 + 9);
}

#[test]
fn uniformize_aligned_circuit_routes_trivially() {
    let arch = Architecture::new(4, vec![vec![(1, 2), (3, 4)]; 3], false).unwrap();
    let gates = vec![vec![Gate::Cnot, Gate::HI]; 3];
    let c = Circuit::new(arch, gates).unwrap();
    let u = uniformize(&c, false).unwrap();
    // all routing layers are identity, only the gate layers act
    let acting: usize = u
        .gates
        .iter()
        .filter(|l| l.iter().any(|g| *g != Gate::II))
        .count();
    assert_eq!(acting, 3);
}

#[test]
fn embedding_distances() {
    for (l, m) in [(1usize, 2usize), (2, 2), (3, 2)] {
        let arch = build_circular(l, m).unwrap();
        let x = (arch.depth() - 2) / 2;
        let e = hypercube_embedding(&arch, x).unwrap();
        let regs = e.registers();
        let mut pts = BTreeSet::new();
        for &r in &regs {
            let c = e.coords(r);
            assert_eq!(c.len(), l + 1 + x);
            assert!(c.iter().all(|&v| v <= 1));
            pts.insert(c);
        }
        assert_eq!(pts.len(), regs.len());
        for (i, &a) in regs.iter().enumerate() {
            for &b in &regs[i + 1..] {
                assert!(e.dist2(a, b) >= 1);
            }
        }
    }
    let e = hypercube_embedding(&build_circular(1, 4).unwrap(), 1).unwrap();
    assert_eq!(e.registers().len(), 6);
    let bad = Architecture::new(4, vec![vec![(1, 4), (2, 3)]], false).unwrap();
    assert!(hypercube_embedding(&bad, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn routing_traces_permutation(perm in Just((1..=16usize).collect::<Vec<_>>()).prop_shuffle()) {
        let sigma = Permutation::from_map(perm).unwrap();
        let c = route_permutation(&sigma).unwrap();
        prop_assert_eq!(c.wire_trace().unwrap(), sigma);
    }
}
