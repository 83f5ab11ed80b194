use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacetime_core::architecture::{build_product, Architecture, Circuit, Gate};
use spacetime_core::configurations::enumerate_valid;
use spacetime_core::detection::*;
use spacetime_core::hamiltonian::{build_code_hamiltonian, history_state, logical_input, RegisterLayout};
use spacetime_core::sim::{self, C64};
use spacetime_core::Error;

const CAP: usize = 1 << 20;

fn pauli_matrix_apply(p: &PauliString, psi: &[C64]) -> Vec<C64> {
    // independent route: apply letters one qubit at a time as 2x2 matrices
    let n = p.len();
    let one = sim::ONE;
    let zero = sim::ZERO;
    let mats = [
        [[one, zero], [zero, one]],
        [[zero, one], [one, zero]],
        [[zero, -sim::I], [sim::I, zero]],
        [[one, zero], [zero, -one]],
    ];
    let mut v = psi.to_vec();
    for (i, &l) in p.letters.iter().enumerate() {
        let m = mats[l as usize];
        let bit = 1 << (n - 1 - i);
        let mut out = vec![zero; v.len()];
        for (b, &a) in v.iter().enumerate() {
            let x = (b & bit != 0) as usize;
            for y in 0..2 {
                let target = if y == 1 { b | bit } else { b & !bit };
                out[target] += m[y][x] * a;
            }
        }
        v = out;
    }
    let ph = sim::I.powu(p.phase as u32);
    v.iter().map(|a| a * ph).collect()
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .flat_map(|code| {
            let letters: Vec<u8> = (0..n).map(|i| (code / 4usize.pow(i as u32) % 4) as u8).collect();
            (0..4).map(move |phase| PauliString {
                phase,
                letters: letters.clone(),
            })
        })
        .collect()
}

fn close(a: &[C64], b: &[C64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
}

#[test]
fn pauli_algebra_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = sim::random_state(4, &mut rng);
    let ps = all_paulis(2);
    for p in &ps {
        assert!(close(&p.apply(&psi), &pauli_matrix_apply(p, &psi)));
        for q in &ps {
            let pq = p.mul(q);
            assert!(close(&pq.apply(&psi), &p.apply(&q.apply(&psi))), "{p} {q}");
            let anti = !p.commutes(q);
            let qp = q.mul(p);
            assert_eq!(qp.letters, pq.letters);
            assert_eq!((pq.phase + if anti { 2 } else { 0 }) % 4, qp.phase);
        }
        let sq = p.mul(p);
        assert!(sq.letters.iter().all(|&l| l == I_));
    }
    let single = all_paulis(1);
    for a in &single {
        for b in &single {
            for c in &single {
                assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
            }
        }
    }
    let x = PauliString::from_letters("X").unwrap();
    let z = PauliString::from_letters("Z").unwrap();
    let xz = x.mul(&z);
    let zx = z.mul(&x);
    assert_eq!(xz.letters, zx.letters);
    assert_eq!((xz.phase + 2) % 4, zx.phase);
    assert!(PauliString::from_letters("XQ").is_err());
}

#[test]
fn eigenvalue_facts_are_plus_minus_i() {
    for (name, ev) in eigenvalue_facts() {
        let mut im: Vec<f64> = ev.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert!(ev.iter().all(|z| z.re.abs() < 1e-12), "{name}");
        assert!((im[0] + 1.0).abs() < 1e-12 && (im[1] - 1.0).abs() < 1e-12, "{name}");
    }
}

/// Circularized rank-2 block: layers L1 L2 L2 L1.
fn circularized_block(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arch = build_product(2, 1).unwrap();
    let gates = random_clifford_gates(&arch, &mut rng);
    Circuit::new(arch, gates).unwrap().circularize()
}

#[test]
fn rect_structure() {
    for c in [
        clifford_instance(2, 2, 0).unwrap(),
        clifford_instance(2, 3, 0).unwrap(),
        circularized_block(0),
    ] {
        let x = (c.depth() - 2) / 2;
        let dd = c.depth();
        let mut sizes = Vec::new();
        for j in 1..=x {
            for p in 1..=c.n() {
                let r = rect(&c, p, j).unwrap();
                assert!(r.contains(&p));
                for &q in &r {
                    assert_eq!(rect(&c, q, j).unwrap(), r);
                }
                sizes.push(r.len());
                if r.len() == 4 {
                    let partner = |d: usize, w: usize| c.gate_on(d, w).0;
                    let q1 = partner(j, p);
                    let q2 = partner(dd - j, p);
                    let p2 = partner(dd - j, q1);
                    assert_eq!(partner(j, q2), p2);
                    let mut set = vec![p, q1, q2, p2];
                    set.sort_unstable();
                    assert_eq!(set, r);
                }
            }
        }
        println!("D={} layers {:?}: rect sizes {:?}", dd, c.arch.layers, sizes);
    }
    // the circularized block gives the four-element rectangles
    let c = circularized_block(0);
    assert!((1..=4).all(|p| rect(&c, p, 1).unwrap().len() == 4));
    // in the literal periodic product both layers share one pairing
    let c = clifford_instance(2, 2, 0).unwrap();
    assert!((1..=4).all(|p| rect(&c, p, 1).unwrap().len() == 2));
    assert!(matches!(rect(&c, 1, 2), Err(Error::IndexOutOfRange(_))));
}

#[test]
fn stabilizers_have_zero_energy_and_constant_signs() {
    for (c, k) in [
        (clifford_instance(1, 4, 3).unwrap(), 1usize),
        (clifford_instance(2, 2, 3).unwrap(), 1),
        (circularized_block(3), 2),
        (clifford_instance(1, 8, 3).unwrap(), 1),
    ] {
        let h = build_code_hamiltonian(&c, k).unwrap();
        let group = stabilizer_set(&c).unwrap();
        assert!(group.len().is_power_of_two());
        let flag = &group.generators[0];
        assert!(flag.mul(flag).letters.iter().all(|&l| l == I_));
        for s in stabilizer_signs(&c, CAP).unwrap() {
            assert_eq!(s.len(), 1);
        }
        for x in 0..1 << k {
            let psi = history_state(&c, &logical_input(c.n(), k, x), CAP).unwrap();
            let rows = detection_sweep(&h, &group, &psi, &group.elements()).unwrap();
            for r in rows {
                assert!(r.detected && r.expectation < 1e-10, "{r:?}");
            }
            let id = PauliString::identity(h.layout.num_qubits());
            assert!(pauli_energy(&h, &id, &psi).unwrap().total.abs() < 1e-10);
        }
    }
}

#[test]
fn classifier_examples() {
    let c = clifford_instance(2, 2, 0).unwrap();
    let layout = RegisterLayout::new(4, 4).unwrap();
    let group = stabilizer_set(&c).unwrap();
    let n = layout.num_qubits();
    let one = |q: usize, l: u8| PauliString::single(n, q, l);
    assert_eq!(classify(&layout, &group, &one(layout.clock(1, 1), X_)), DetectionCase::Case1);
    assert_eq!(classify(&layout, &group, &one(layout.flag(2), Y_)), DetectionCase::Case2_2);
    let mut all = PauliString::identity(n);
    for i in 1..=4 {
        all.letters[layout.flag(i) - 1] = X_;
    }
    assert_eq!(classify(&layout, &group, &all), DetectionCase::Case2_1);
    assert_eq!(classify(&layout, &group, &one(1, Z_)), DetectionCase::Case3_1);
    assert_eq!(classify(&layout, &group, &one(layout.clock(3, 1), Z_)), DetectionCase::Case3_2_1);
    assert_eq!(classify(&layout, &group, &one(layout.flag(3), Z_)), DetectionCase::Case3_2_2);
    assert_eq!(classify(&layout, &group, &group.generators[0]), DetectionCase::Stabilizer);
}

#[test]
fn single_errors_on_a_longer_clock() {
    // X = 3: clock flips meet 2/D, single flag Z meets 1/D²
    for seed in 0..3 {
        let c = clifford_instance(1, 8, seed).unwrap();
        let h = build_code_hamiltonian(&c, 1).unwrap();
        let group = stabilizer_set(&c).unwrap();
        let layout = h.layout;
        let n = layout.num_qubits();
        let psi = history_state(&c, &logical_input(2, 1, 1), CAP).unwrap();
        let mut ps = Vec::new();
        for i in 1..=2 {
            for j in 1..=layout.x {
                ps.push(PauliString::single(n, layout.clock(i, j), X_));
                ps.push(PauliString::single(n, layout.clock(i, j), Y_));
            }
            ps.push(PauliString::single(n, layout.flag(i), Z_));
        }
        for r in detection_sweep(&h, &group, &psi, &ps).unwrap() {
            assert!(r.detected && r.meets_case_bound, "{r:?}");
        }
    }
}

#[test]
fn random_non_stabilizers_on_four_qubits() {
    let c = clifford_instance(2, 2, 21).unwrap();
    let h = build_code_hamiltonian(&c, 1).unwrap();
    let group = stabilizer_set(&c).unwrap();
    let psi = history_state(&c, &logical_input(4, 1, 1), CAP).unwrap();
    let ps = random_non_stabilizers(&group, 500, 2024);
    let rows = detection_sweep(&h, &group, &psi, &ps).unwrap();
    assert!(rows.iter().all(|r| r.detected));
    let case1: Vec<&SweepRow> = rows.iter().filter(|r| r.case == "1").collect();
    let min1 = case1.iter().map(|r| r.expectation).fold(f64::INFINITY, f64::min);
    println!(
        "{} case-1 rows, min {min1:.4}, {} reach 2/D",
        case1.len(),
        case1.iter().filter(|r| r.meets_case_bound).count()
    );
    assert!(rows.iter().all(|r| r.threshold == 1.0 / 16.0));
}

#[test]
fn all_flag_flip_detected_with_j_block() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arch = build_product(1, 2).unwrap();
        let gates = random_clifford_gates(&arch, &mut rng);
        let c = with_j_block(&Circuit::new(arch, gates).unwrap()).unwrap();
        let h = build_code_hamiltonian(&c, 1).unwrap();
        assert_eq!(h.ground_space().unwrap().kernel.len(), 2);
        let group = stabilizer_set(&c).unwrap();
        let mut p = PauliString::identity(h.layout.num_qubits());
        for i in 1..=2 {
            p.letters[h.layout.flag(i) - 1] = X_;
        }
        assert_eq!(classify(&h.layout, &group, &p), DetectionCase::Case2_1);
        for x in 0..2 {
            let psi = history_state(&c, &logical_input(2, 1, x), CAP).unwrap();
            let r = &detection_sweep(&h, &group, &psi, &[p.clone()]).unwrap()[0];
            assert!(r.detected, "{r:?}");
        }
    }
}

#[test]
fn clifford_group_enumeration() {
    let g = clifford_group();
    assert_eq!(g.len(), 11520);
    for (m, w) in g.elements.iter().zip(&g.words).step_by(37) {
        let mut acc = sim::identity4();
        for gate in w {
            acc = sim::mul4(&gate.matrix(), &acc);
        }
        assert!(sim::dist4(&acc, m) < 1e-9);
        assert!(sim::is_unitary(m, 1e-10));
    }
    for named in [Gate::Swap, Gate::Cnot, Gate::HI, Gate::II] {
        assert!(g.index_of(&named.matrix()).is_some());
    }
    let t = [[sim::ONE, sim::ZERO], [sim::ZERO, sim::c(0.5f64.sqrt(), 0.5f64.sqrt())]];
    assert!(g.index_of(&sim::kron2(&t, &sim::mat_i())).is_none());
}

#[test]
fn random_circuits_and_decomposition() {
    let a = random_clifford_circuit(4, 5, 9).unwrap();
    let b = random_clifford_circuit(4, 5, 9).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, random_clifford_circuit(4, 5, 10).unwrap());
    assert_eq!(random_clifford_circuit(5, 3, 0), Err(Error::OddQubits(5)));
    let width = clifford_group().max_word_len();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (n, d, seed) in [(2, 3, 0u64), (4, 4, 1), (8, 3, 2)] {
        let c = random_clifford_circuit(n, d, seed).unwrap();
        let dc = decompose_clifford(&c).unwrap();
        assert_eq!(dc.depth(), d * width);
        for row in &dc.gates {
            for g in row {
                assert!(matches!(g, Gate::II | Gate::HI | Gate::IH | Gate::SI | Gate::IS | Gate::Cnot));
            }
        }
        for _ in 0..20 {
            let psi = sim::random_state(1 << n, &mut rng);
            let (mut x, mut y) = (psi.clone(), psi);
            c.apply(&mut x);
            dc.apply(&mut y);
            // equal up to a global phase
            let f = sim::fidelity(&x, &y);
            assert!((f - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn niceness() {
    let arch = Architecture::new(2, vec![vec![(1, 2)]; 4], false).unwrap();
    let hand = Circuit::new(
        arch.clone(),
        vec![vec![Gate::HI], vec![Gate::IH], vec![Gate::SI], vec![Gate::IS]],
    )
    .unwrap();
    let r = is_nice(&hand);
    assert!(r.nice);
    assert_eq!(r.witness, vec![(Some(1), Some(3)), (Some(2), Some(4))]);
    let id = is_nice(&Circuit::identity(arch));
    assert!(!id.nice);
    assert!(id.witness.iter().all(|w| *w == (None, None)));
    let n = 16;
    let depth = 4usize.pow(3);
    let nice = (0..200u64)
        .filter(|&s| is_nice(&decompose_clifford(&random_clifford_circuit(n, depth, s).unwrap()).unwrap()).nice)
        .count();
    println!("niceness rate at n=16, depth {depth}: {nice}/200");
    assert!(nice >= 190);
}

#[test]
fn valid_configurations_feed_the_sign_check() {
    let c = clifford_instance(2, 3, 1).unwrap();
    assert_eq!(enumerate_valid(&c.arch, CAP).unwrap().len(), 18);
    assert!(stabilizer_signs(&c, CAP).unwrap().iter().all(|s| s.len() == 1));
}
