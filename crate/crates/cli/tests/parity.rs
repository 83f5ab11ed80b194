//! Golden parity: every command's output equals the direct library call.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use spacetime_core::architecture::{build_bitonic_block, build_circular, build_product, Permutation};
use spacetime_core::configurations::{count, enumerate_valid, rank, sample_uniform, unrank, CountInt};
use spacetime_core::detection::clifford_instance;
use spacetime_core::hamiltonian::{build_code_hamiltonian, fk_gap_overlap_sweep};
use spacetime_core::markov::{
    block_decomposition, chain_from_laplacian, config_graph, decomposition_bound, edge_flip_chain, mcmc_run,
    spectral_gap, ChainSpec, FlipVariant,
};
use spacetime_core::tilings::config_to_tiling;
use std::path::PathBuf;
use std::process::{Command, Output};

const CAP: usize = spacetime_core::DEFAULT_CAP;

fn spacetime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacetime"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = spacetime(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("spacetime-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn count_golden() {
    assert_eq!(json_of(&["count", "--family", "bitonic", "--rank", "4"]), json!({"a": "11047"}));
    for (l, m) in [(1, 3), (2, 2), (3, 2)] {
        let p = json_of(&["count", "--family", "product", "--rank", &l.to_string(), "--m", &m.to_string()]);
        assert_eq!(p["a"], count(&build_product(l, m).unwrap(), CAP).unwrap().to_string());
        let c = json_of(&["count", "--circular", "--rank", &l.to_string(), "--m", &m.to_string()]);
        assert_eq!(c["a"], count(&build_circular(l, m).unwrap(), CAP).unwrap().to_string());
    }
}

#[test]
fn enumerate_rank_unrank() {
    let arch = build_product(2, 2).unwrap();
    let all = enumerate_valid(&arch, CAP).unwrap();
    let v = json_of(&["enumerate", "--family", "product", "--rank", "2", "--m", "2"]);
    assert_eq!(v["count"], all.len());
    assert_eq!(v["configs"], json!(all));
    for tau in all.iter().step_by(7) {
        let cfg: Vec<String> = tau.iter().map(|t| t.to_string()).collect();
        let r = json_of(&["rank", "--family", "product", "--rank", "2", "--m", "2", "--config", &cfg.join(",")]);
        let expect = rank(&arch, tau).unwrap();
        assert_eq!(r["rank"], expect.to_string());
        let u = json_of(&[
            "unrank", "--family", "product", "--rank", "2", "--m", "2", "--index", &expect.to_string(),
        ]);
        assert_eq!(u["config"], json!(unrank(&arch, &expect).unwrap()));
        assert_eq!(u["config"], json!(tau));
    }
    let big = json_of(&["unrank", "--family", "bitonic", "--rank", "5", "--index", "123456789"]);
    let idx: CountInt = "123456789".parse().unwrap();
    assert_eq!(big["config"], json!(unrank(&build_bitonic_block(5).unwrap(), &idx).unwrap()));
}

#[test]
fn sample_is_deterministic_and_matches_library() {
    let args = ["sample", "--circular", "--rank", "3", "--m", "4", "--seed", "7", "--samples", "5"];
    let a = spacetime(&args);
    let b = spacetime(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let arch = build_circular(3, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lib: Vec<_> = (0..5).map(|_| sample_uniform(&arch, &mut rng).unwrap()).collect();
    assert_eq!(v["samples"], json!(lib));
}

#[test]
fn gap_edge_flip_parity() {
    let v = json_of(&["gap", "--chain", "edge-flip", "--rank", "2", "--variant", "lazy"]);
    let (_, chain) = edge_flip_chain(2, FlipVariant::Lazy, CAP).unwrap();
    let lib = spectral_gap(&chain).unwrap();
    let gap = v["gap"].as_f64().unwrap();
    assert!(gap > 0.0);
    assert_eq!(gap.to_bits(), lib.gap.to_bits());
    assert_eq!(v["states"], lib.states);

    let v = json_of(&["gap", "--chain", "laplacian", "--circular", "--rank", "2", "--m", "2"]);
    let g = config_graph(&build_circular(2, 2).unwrap(), CAP).unwrap();
    let lib = spectral_gap(&chain_from_laplacian(&g).unwrap()).unwrap();
    assert_eq!(v["gap"].as_f64().unwrap().to_bits(), lib.gap.to_bits());

    let v = json_of(&["gap", "--chain", "hamiltonian", "--rank", "1", "--m", "2", "--seed", "3"]);
    let h = build_code_hamiltonian(&clifford_instance(1, 2, 3).unwrap(), 1).unwrap();
    let lib = h.operator().spectrum(false).unwrap();
    assert_eq!(v["kernel_dim"], lib.kernel_dim);
    assert_eq!(v["gap"].as_f64().unwrap().to_bits(), lib.gap.unwrap().to_bits());
}

#[test]
fn tile_mcmc_and_decomposition() {
    let tau = enumerate_valid(&build_bitonic_block(2).unwrap(), CAP).unwrap()[5].clone();
    let cfg: Vec<String> = tau.iter().map(|t| t.to_string()).collect();
    let v = json_of(&["tile", "--rank", "2", "--config", &cfg.join(",")]);
    let t = config_to_tiling(2, &tau).unwrap();
    assert_eq!(v["tiling"], json!(t.rects));

    let v = json_of(&["mcmc", "--rank", "2", "--steps", "2000", "--thin", "10", "--seed", "4"]);
    let lib = mcmc_run(
        &ChainSpec::EdgeFlip {
            l: 2,
            variant: FlipVariant::Lazy,
        },
        2000,
        4,
        10,
        CAP,
    )
    .unwrap();
    assert_eq!(v, serde_json::to_value(&lib).unwrap());

    let v = json_of(&["decompose-bound", "--rank", "2", "--m", "2"]);
    let (g, d) = block_decomposition(2, 2, CAP).unwrap();
    let lib = decomposition_bound(&chain_from_laplacian(&g).unwrap(), &d).unwrap();
    assert_eq!(v["bound"].as_f64().unwrap().to_bits(), lib.bound.to_bits());
    assert_eq!(v["holds"], true);
    assert_eq!(v["cheeger_holds"], true);
}

#[test]
fn hamiltonian_detect_embed() {
    let v = json_of(&["hamiltonian", "--rank", "1", "--m", "2", "--seed", "2"]);
    assert_eq!(v["spectrum"]["kernel_dim"], 2);
    assert!(v["history_residual"].as_f64().unwrap() < 1e-10);
    let h = build_code_hamiltonian(&clifford_instance(1, 2, 2).unwrap(), 1).unwrap();
    assert_eq!(v["terms"], h.terms.len());

    let v = json_of(&["detect", "--rank", "1", "--m", "2", "--samples", "40", "--seed", "2"]);
    assert_eq!(v["non_stabilizers"], 40);
    assert!(v["stabilizer_max_energy"].as_f64().unwrap() < 1e-10);

    let v = json_of(&["embed", "--rank", "2", "--m", "2"]);
    assert_eq!(v["min_dist2"], 1);
    assert_eq!(v["within_sqrt3"], true);
}

#[test]
fn route_uniformize_weighted_fk() {
    let v = json_of(&["route", "--n", "8", "--perm", "3,1,2,8,7,6,5,4"]);
    assert_eq!(v["wire_trace_ok"], true);
    let sigma = Permutation::from_map(vec![3, 1, 2, 8, 7, 6, 5, 4]).unwrap();
    let lib = spacetime_core::architecture::route_permutation(&sigma).unwrap();
    assert_eq!(v["depth"], lib.depth());
    assert_eq!(json_of(&["route", "--n", "16", "--seed", "5"])["wire_trace_ok"], true);

    let v = json_of(&["uniformize", "--n", "4", "--depth", "3", "--seed", "1"]);
    assert!(v["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-10);

    let v = json_of(&["weighted-fk", "--eps", "0.1", "--t", "4,8"]);
    let lib = fk_gap_overlap_sweep(&[4, 8], 0.1).unwrap();
    assert_eq!(v["rows"], serde_json::to_value(&lib).unwrap());
}

#[test]
fn exit_codes() {
    let cap = spacetime(&["enumerate", "--rank", "4", "--cap", "100"]);
    assert_eq!(cap.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&cap.stderr).contains("100"));
    let bad = spacetime(&["rank", "--rank", "2", "--config", "0,0"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = spacetime(&["count", "--family", "product", "--rank", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    let unknown = spacetime(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn out_dir_manifest_and_replay() {
    let dir = scratch("manifest");
    let d = dir.to_string_lossy().to_string();
    let out = spacetime(&["sample", "--rank", "3", "--samples", "3", "--seed", "9", "--out", &d]);
    assert!(out.status.success());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["spec"]["seed"], 9);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    let first = std::fs::read_to_string(dir.join("sample.json")).unwrap();
    // no temp files left behind
    let names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    assert!(names.iter().all(|n| !n.contains(".tmp")), "{names:?}");

    let m = dir.join("manifest.json").to_string_lossy().to_string();
    let replay = spacetime(&["replay", "--manifest", &m]);
    assert!(replay.status.success());
    assert_eq!(String::from_utf8_lossy(&replay.stdout), first);

    let csv = spacetime(&["weighted-fk", "--t", "4", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("t,gap,overlap,product,scaled"), "{text}");
    assert_eq!(text.lines().count(), 2);

    let dir2 = scratch("svg");
    let d2 = dir2.to_string_lossy().to_string();
    assert!(spacetime(&["tile", "--rank", "2", "--config", "0,0,0,0", "--out", &d2]).status.success());
    assert!(std::fs::read_to_string(dir2.join("tile.svg")).unwrap().contains("<svg"));
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&dir2);
}
