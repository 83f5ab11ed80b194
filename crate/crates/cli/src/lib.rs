//! Batch front-end: every analysis in `spacetime-core` as one deterministic
//! command with JSON or CSV output and a manifest for replay.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use spacetime_core::architecture::{
    build_bitonic_block, build_circular, build_product, hypercube_embedding, route_permutation, uniformize,
    Architecture, Permutation,
};
use spacetime_core::configurations::{self, enumerate_valid, sample_uniform, CountInt};
use spacetime_core::detection::{
    clifford_instance, detection_sweep, random_clifford_circuit, random_non_stabilizers, stabilizer_set,
};
use spacetime_core::hamiltonian::{
    build_code_hamiltonian, fk_gap_overlap_sweep, history_state, logical_input,
};
use spacetime_core::markov::{
    block_decomposition, chain_from_laplacian, cheeger_bound, config_graph, decomposition_bound,
    default_toggle_rate, edge_flip_chain, mcmc_run, spectral_gap, toggle_chain, window_cuts, ChainSpec,
    FlipVariant,
};
use spacetime_core::sim;
use spacetime_core::tilings::{config_to_hvtree, config_to_tiling, flippable_edges, Cut};
use spacetime_core::{Error as CoreError, DEFAULT_CAP};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Bad flag combinations caught before any library call.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

fn invalid<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ValidationError(msg.into()).into())
}

#[derive(Parser, Clone, Debug, Serialize, Deserialize)]
#[command(name = "spacetime", version, about = "Bitonic architectures, tilings, chains and spacetime Hamiltonians")]
pub struct ExperimentSpec {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest state space any enumeration may build.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Output directory. Without it the result goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Bitonic,
    Product,
    Circular,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ArchArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Bitonic)]
    pub family: FamilyArg,
    /// Block rank `l` (width `2^l`).
    #[arg(long)]
    pub rank: usize,
    /// Number of blocks for product and circular families.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Shorthand for `--family circular`.
    #[arg(long)]
    pub circular: bool,
}

impl ArchArgs {
    pub fn family(&self) -> FamilyArg {
        if self.circular {
            FamilyArg::Circular
        } else {
            self.family
        }
    }

    pub fn build(&self) -> anyhow::Result<Architecture> {
        Ok(match self.family() {
            FamilyArg::Bitonic => build_bitonic_block(self.rank)?,
            FamilyArg::Product => build_product(self.rank, self.m)?,
            FamilyArg::Circular => build_circular(self.rank, self.m)?,
        })
    }
}

/// Circular instance with seeded Clifford gates, as used by the Hamiltonian
/// and detection experiments.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct InstanceArgs {
    #[arg(long)]
    pub rank: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Logical qubits; the rest are ancillas pinned by the init penalty.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainArg {
    EdgeFlip,
    Toggle,
    Laplacian,
    Hamiltonian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Lazy,
    Resample,
}

impl From<VariantArg> for FlipVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Lazy => FlipVariant::Lazy,
            VariantArg::Resample => FlipVariant::Resample,
        }
    }
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Number of valid configurations.
    Count(ArchArgs),
    /// Every valid configuration, sorted.
    Enumerate(ArchArgs),
    /// Rank of a configuration given as comma-separated clocks.
    Rank {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_delimiter = ',')]
        config: Vec<usize>,
    },
    /// Configuration at a decimal rank.
    Unrank {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        index: String,
    },
    /// Uniform samples.
    Sample {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Configuration to HV-tree and dyadic tiling (SVG written with --out).
    Tile {
        #[arg(long)]
        rank: u32,
        #[arg(long, value_delimiter = ',')]
        config: Vec<usize>,
    },
    /// Seeded Markov-chain trajectory.
    Mcmc {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum, default_value_t = ChainArg::EdgeFlip)]
        chain: ChainArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Lazy)]
        variant: VariantArg,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 100)]
        thin: u64,
    },
    /// Exact spectral gap of a chain, or of a code Hamiltonian.
    Gap {
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, value_enum, default_value_t = ChainArg::Laplacian)]
        chain: ChainArg,
        #[arg(long, value_enum, default_value_t = VariantArg::Lazy)]
        variant: VariantArg,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Window decomposition bound and conductance on a circular chain.
    DecomposeBound {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        m: usize,
    },
    /// Build a code Hamiltonian and solve it exactly.
    Hamiltonian(InstanceArgs),
    /// Energy sweep over stabilizers and random non-stabilizer Paulis.
    Detect {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Bitonic routing circuit for a permutation (random when omitted).
    Route {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        perm: Option<Vec<usize>>,
    },
    /// Rewrite a random Clifford circuit onto bitonic blocks and compare.
    Uniformize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        no_merge: bool,
        #[arg(long, default_value_t = 5)]
        states: usize,
    },
    /// Hypercube embedding distances for a circular instance.
    Embed(InstanceArgs),
    /// Gap-overlap sweep of the weighted global-clock construction.
    WeightedFk {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 8, 16, 32, 64])]
        t: Vec<usize>,
    },
    /// Rerun the spec stored in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Enumerate(_) => "enumerate",
            Command::Rank { .. } => "rank",
            Command::Unrank { .. } => "unrank",
            Command::Sample { .. } => "sample",
            Command::Tile { .. } => "tile",
            Command::Mcmc { .. } => "mcmc",
            Command::Gap { .. } => "gap",
            Command::DecomposeBound { .. } => "decompose-bound",
            Command::Hamiltonian(_) => "hamiltonian",
            Command::Detect { .. } => "detect",
            Command::Route { .. } => "route",
            Command::Uniformize { .. } => "uniformize",
            Command::Embed(_) => "embed",
            Command::WeightedFk { .. } => "weighted-fk",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Result of one command: a JSON document, optional table rows for CSV, and
/// an optional SVG side file.
#[derive(Clone, Debug, Default)]
pub struct Output {
    pub value: Value,
    pub rows: Option<Vec<Map<String, Value>>>,
    pub svg: Option<String>,
}

impl Output {
    fn value(value: Value) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }

    /// CSV text: the rows when present, otherwise `key,value` pairs of the
    /// top-level scalars.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        match &self.rows {
            Some(rows) if !rows.is_empty() => {
                let header: Vec<&String> = rows[0].keys().collect();
                w.write_record(&header)?;
                for r in rows {
                    w.write_record(header.iter().map(|k| r.get(*k).map(cell).unwrap_or_default()))?;
                }
            }
            _ => {
                w.write_record(["key", "value"])?;
                if let Value::Object(m) = &self.value {
                    for (k, v) in m {
                        if !v.is_array() && !v.is_object() {
                            w.write_record([k.clone(), cell(v)])?;
                        }
                    }
                }
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.value)? + "\n"),
            Format::Csv => self.to_csv(),
        }
    }
}

fn rows_of(v: &Value) -> Vec<Map<String, Value>> {
    v.as_array()
        .map(|a| a.iter().filter_map(|r| r.as_object().cloned()).collect())
        .unwrap_or_default()
}

fn config_str(c: &[usize]) -> String {
    c.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

fn labels_str(labels: &[Cut]) -> String {
    labels
        .iter()
        .map(|c| match c {
            Cut::H => 'H',
            Cut::V => 'V',
        })
        .collect()
}

/// Runs one command and returns its output. Pure: no files are touched.
pub fn run(spec: &ExperimentSpec) -> anyhow::Result<Output> {
    let cap = spec.cap;
    let seed = spec.seed;
    Ok(match &spec.command {
        Command::Count(a) => {
            let arch = a.build()?;
            Output::value(json!({ "a": configurations::count(&arch, cap)?.to_string() }))
        }
        Command::Enumerate(a) => {
            let configs = enumerate_valid(&a.build()?, cap)?;
            let rows: Vec<Value> = configs
                .iter()
                .enumerate()
                .map(|(i, c)| json!({ "index": i, "config": config_str(c) }))
                .collect();
            Output {
                value: json!({ "count": configs.len(), "configs": configs }),
                rows: Some(rows_of(&Value::Array(rows))),
                svg: None,
            }
        }
        Command::Rank { arch, config } => {
            let a = arch.build()?;
            if config.len() != a.n {
                return invalid(format!("--config needs {} clocks, got {}", a.n, config.len()));
            }
            let r = configurations::rank(&a, config)?;
            Output::value(json!({ "config": config, "rank": r.to_string() }))
        }
        Command::Unrank { arch, index } => {
            let idx = match CountInt::from_str(index) {
                Ok(i) => i,
                Err(_) => return invalid(format!("--index {index:?} is not a decimal integer")),
            };
            let c = configurations::unrank(&arch.build()?, &idx)?;
            Output::value(json!({ "index": index, "config": c }))
        }
        Command::Sample { arch, samples } => {
            let a = arch.build()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws = (0..*samples)
                .map(|_| sample_uniform(&a, &mut rng))
                .collect::<spacetime_core::Result<Vec<_>>>()?;
            let rows: Vec<Value> = draws
                .iter()
                .enumerate()
                .map(|(i, c)| json!({ "sample": i, "config": config_str(c) }))
                .collect();
            Output {
                value: json!({ "seed": seed, "samples": draws }),
                rows: Some(rows_of(&Value::Array(rows))),
                svg: None,
            }
        }
        Command::Tile { rank, config } => {
            let tree = config_to_hvtree(*rank, config)?;
            let tiling = config_to_tiling(*rank, config)?;
            let rows: Vec<Value> = tiling
                .rects
                .iter()
                .map(|r| json!({ "a": r.a, "b": r.b, "s": r.s, "t": r.t }))
                .collect();
            Output {
                value: json!({
                    "config": config,
                    "hvtree": labels_str(&tree.labels),
                    "tiling": tiling.rects,
                    "flippable_edges": flippable_edges(&tiling).len(),
                }),
                rows: Some(rows_of(&Value::Array(rows))),
                svg: Some(tiling.to_svg(512.0)),
            }
        }
        Command::Mcmc {
            arch,
            chain,
            variant,
            steps,
            thin,
        } => {
            let cs = match chain {
                ChainArg::EdgeFlip => ChainSpec::EdgeFlip {
                    l: arch.rank as u32,
                    variant: (*variant).into(),
                },
                ChainArg::Toggle => ChainSpec::Toggle { arch: arch.build()? },
                other => return invalid(format!("mcmc supports edge-flip and toggle, not {other:?}")),
            };
            let report = mcmc_run(&cs, *steps, seed, *thin, cap)?;
            let rows: Vec<Value> = report
                .trace
                .iter()
                .enumerate()
                .map(|(i, v)| json!({ "step": i as u64 * report.thin, "vertical_segments": v }))
                .collect();
            Output {
                value: serde_json::to_value(&report)?,
                rows: Some(rows_of(&Value::Array(rows))),
                svg: None,
            }
        }
        Command::Gap {
            arch,
            chain,
            variant,
            k,
        } => {
            let value = match chain {
                ChainArg::EdgeFlip => {
                    let (_, c) = edge_flip_chain(arch.rank as u32, (*variant).into(), cap)?;
                    serde_json::to_value(spectral_gap(&c)?)?
                }
                ChainArg::Toggle => {
                    let a = arch.build()?;
                    let g = config_graph(&a, cap)?;
                    serde_json::to_value(spectral_gap(&toggle_chain(&g, default_toggle_rate(&a))?)?)?
                }
                ChainArg::Laplacian => {
                    let g = config_graph(&arch.build()?, cap)?;
                    serde_json::to_value(spectral_gap(&chain_from_laplacian(&g)?)?)?
                }
                ChainArg::Hamiltonian => {
                    let c = clifford_instance(arch.rank, arch.m, seed)?;
                    let h = build_code_hamiltonian(&c, *k)?;
                    serde_json::to_value(h.operator().spectrum(false)?)?
                }
            };
            Output::value(value)
        }
        Command::DecomposeBound { rank, m } => {
            let (g, d) = block_decomposition(*rank, *m, cap)?;
            let chain = chain_from_laplacian(&g)?;
            let b = decomposition_bound(&chain, &d)?;
            let cuts = window_cuts(&chain, &d);
            // small chains can have no window union under half the mass
            let (phi, lower) = if cuts.is_empty() {
                cheeger_bound(&chain, None)?
            } else {
                cheeger_bound(&chain, Some(&cuts))?
            };
            let mut v = serde_json::to_value(&b)?;
            let m = v.as_object_mut().expect("struct serializes to an object");
            m.insert("states".into(), json!(chain.len()));
            m.insert("window_cuts".into(), json!(cuts.len()));
            m.insert("cut_family".into(), json!(if cuts.is_empty() { "exhaustive" } else { "window" }));
            m.insert("conductance".into(), json!(phi));
            m.insert("cheeger_lower".into(), json!(lower));
            m.insert("cheeger_upper".into(), json!(2.0 * phi));
            m.insert(
                "cheeger_holds".into(),
                json!(lower <= b.gap + 1e-12 && b.gap <= 2.0 * phi + 1e-12),
            );
            Output::value(v)
        }
        Command::Hamiltonian(inst) => {
            let c = clifford_instance(inst.rank, inst.m, seed)?;
            let h = build_code_hamiltonian(&c, inst.k)?;
            let op = h.operator();
            let spectrum = op.spectrum(false)?;
            let mut residual: f64 = 0.0;
            for x in 0..1usize << inst.k {
                let psi = history_state(&c, &logical_input(c.n(), inst.k, x), cap)?;
                residual = residual.max(sim::norm(&op.apply(&psi)));
            }
            Output::value(json!({
                "n": c.n(),
                "depth": c.depth(),
                "k": inst.k,
                "qubits": h.layout.num_qubits(),
                "terms": h.terms.len(),
                "locality": h.locality_audit(),
                "spectrum": spectrum,
                "history_residual": residual,
            }))
        }
        Command::Detect { instance, samples } => {
            let c = clifford_instance(instance.rank, instance.m, seed)?;
            let h = build_code_hamiltonian(&c, instance.k)?;
            let group = stabilizer_set(&c)?;
            let psi = history_state(&c, &logical_input(c.n(), instance.k, 0), cap)?;
            let mut paulis = group.elements();
            paulis.extend(random_non_stabilizers(&group, *samples, seed));
            let rows = detection_sweep(&h, &group, &psi, &paulis)?;
            let stab: Vec<_> = rows.iter().filter(|r| r.case == "stabilizer").collect();
            let other: Vec<_> = rows.iter().filter(|r| r.case != "stabilizer").collect();
            let rows_v = serde_json::to_value(&rows)?;
            Output {
                value: json!({
                    "depth": c.depth(),
                    "threshold": 1.0 / (c.depth() * c.depth()) as f64,
                    "stabilizers": stab.len(),
                    "stabilizer_max_energy": stab.iter().map(|r| r.expectation).fold(0.0, f64::max),
                    "non_stabilizers": other.len(),
                    "detected": other.iter().filter(|r| r.detected).count(),
                    "meets_case_bound": other.iter().filter(|r| r.meets_case_bound).count(),
                    "min_expectation": other.iter().map(|r| r.expectation).fold(f64::INFINITY, f64::min),
                    "rows": rows_v,
                }),
                rows: Some(rows_of(&rows_v)),
                svg: None,
            }
        }
        Command::Route { n, perm } => {
            let map = match perm {
                Some(p) => p.clone(),
                None => {
                    let mut p: Vec<usize> = (1..=*n).collect();
                    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                    p
                }
            };
            if map.len() != *n {
                return invalid(format!("--perm needs {n} entries, got {}", map.len()));
            }
            let sigma = Permutation::from_map(map.clone())?;
            let r = route_permutation(&sigma)?;
            Output::value(json!({
                "n": n,
                "perm": map,
                "depth": r.depth(),
                "wire_trace_ok": r.wire_trace()? == sigma,
            }))
        }
        Command::Uniformize {
            n,
            depth,
            no_merge,
            states,
        } => {
            let c = random_clifford_circuit(*n, *depth, seed)?;
            let u = uniformize(&c, !no_merge)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut min_fid: f64 = 1.0;
            for _ in 0..*states {
                let psi = sim::random_state(1 << n, &mut rng);
                let (mut a, mut b) = (psi.clone(), psi);
                c.apply(&mut a);
                u.apply(&mut b);
                min_fid = min_fid.min(sim::fidelity(&a, &b));
            }
            Output::value(json!({
                "n": n,
                "input_depth": depth,
                "output_depth": u.depth(),
                "merge": !no_merge,
                "min_fidelity": min_fid,
            }))
        }
        Command::Embed(inst) => {
            let c = clifford_instance(inst.rank, inst.m, seed)?;
            let h = build_code_hamiltonian(&c, inst.k)?;
            let emb = hypercube_embedding(&c.arch, h.layout.x)?;
            let regs = emb.registers();
            let mut min_d2 = u32::MAX;
            for (i, &a) in regs.iter().enumerate() {
                for &b in &regs[i + 1..] {
                    min_d2 = min_d2.min(emb.dist2(a, b));
                }
            }
            let max_d2 = h.max_term_distance2(&emb);
            Output::value(json!({
                "registers": regs.len(),
                "dimension": emb.dim(),
                "min_dist2": min_d2,
                "max_term_dist2": max_d2,
                "within_sqrt3": max_d2 <= 3,
            }))
        }
        Command::WeightedFk { eps, t } => {
            if !(0.0..1.0).contains(eps) || *eps == 0.0 {
                return invalid(format!("--eps must lie in (0, 1), got {eps}"));
            }
            let rows = fk_gap_overlap_sweep(t, *eps)?;
            let c = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
            let rows_v = serde_json::to_value(&rows)?;
            Output {
                value: json!({ "eps": eps, "c": c, "rows": rows_v }),
                rows: Some(rows_of(&rows_v)),
                svg: None,
            }
        }
        Command::Replay { manifest } => {
            let inner = load_manifest(manifest)?;
            if matches!(inner.command, Command::Replay { .. }) {
                return invalid("a manifest cannot replay another replay");
            }
            run(&inner)?
        }
    })
}

pub fn load_manifest(path: &Path) -> anyhow::Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match v.get("spec") {
        Some(s) => Ok(serde_json::from_value(s.clone())?),
        None => bail!(ValidationError(format!("{} has no \"spec\" entry", path.display()))),
    }
}

/// Write-temp-then-rename in the target directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Runs `spec`. With `--out` the result, any SVG and a manifest go to that
/// directory and the manifest path is returned; otherwise the rendered
/// result is returned for stdout.
pub fn execute(spec: &ExperimentSpec) -> anyhow::Result<String> {
    let start = Instant::now();
    let output = run(spec)?;
    let wall = start.elapsed().as_secs_f64();
    let text = output.render(spec.format)?;
    let Some(dir) = &spec.out else {
        return Ok(text);
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = spec.command.name();
    let ext = match spec.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let mut files = vec![format!("{name}.{ext}")];
    write_atomic(&dir.join(&files[0]), text.as_bytes())?;
    if let Some(svg) = &output.svg {
        files.push(format!("{name}.svg"));
        write_atomic(&dir.join(&files[1]), svg.as_bytes())?;
    }
    let manifest = json!({
        "spec": spec,
        "command": name,
        "versions": {
            "spacetime-cli": env!("CARGO_PKG_VERSION"),
            "spacetime-core": spacetime_core::VERSION,
        },
        "wall_time_s": wall,
        "outputs": files,
    });
    let path = dir.join("manifest.json");
    write_atomic(&path, (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
    Ok(format!("{}\n", path.display()))
}

/// 3 for an exceeded cap, 2 for any other validation failure, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(ce) = cause.downcast_ref::<CoreError>() {
            return match ce {
                CoreError::CapExceeded { .. } => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<ValidationError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
    }
    1
}
