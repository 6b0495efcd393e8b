//! Subcommand implementations and the argument surface.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polaris_core::corpus::builtin_corpus;
use polaris_core::graph::{jcm, ColoredMultigraph};
use polaris_core::metrics::{color_assortativity, degree_assortativity, same_ensemble};
use polaris_core::oracle::{
    connectivity_report, empirical_tv, enumerate_ensemble, matrix_is_aperiodic, row_sum_error,
    stationarity_residual, transition_matrix, uniform_dist, ConstraintKind, EnsembleCaps,
    EnsembleCatalog, OracleError,
};
use polaris_core::samplers::{
    aperiodicity_conditions, run_chain, ChainConfig, PairWeightTarget, SamplerMode,
    TargetDistribution, UniformTarget,
};

use crate::io::{load_graph, write_graph, write_trace, IoError};

#[derive(Parser, Debug)]
#[command(
    name = "polaris",
    version,
    about = "Sample vertex-colored multigraphs that keep the degree sequence and the joint color matrix"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run sampler chains on a dataset and emit sampled graphs and traces.
    Sample(SampleArgs),
    /// Run the exact verification suite and write a JSON-lines report.
    Verify(VerifyArgs),
    /// Print summary statistics of a dataset.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    PolarisB,
    PolarisC,
    Cm,
}

impl From<ModeArg> for SamplerMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PolarisB => SamplerMode::PolarisB,
            ModeArg::PolarisC => SamplerMode::PolarisC,
            ModeArg::Cm => SamplerMode::Cm,
        }
    }
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub colors: PathBuf,
    /// Iteration count, or `auto` for ceil(m ln m).
    #[arg(long)]
    pub iterations: String,
    #[arg(long, default_value_t = 1)]
    pub samples: u32,
    #[arg(long)]
    pub seed: u64,
    /// Statistic recording stride; defaults to max(1, round(0.05 m)).
    #[arg(long)]
    pub record_every: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Resample non-preserving draws instead of counting them as rejected
    /// iterations (color-agnostic mode only; changes the sampled law).
    #[arg(long, default_value_t = false)]
    pub retry_out_of_space: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `builtin` or a directory of `NAME.edges` / `NAME.colors` pairs.
    #[arg(long, default_value = "builtin")]
    pub corpus: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub colors: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(args) => sample(&args),
        Command::Verify(args) => verify(&args),
        Command::Stats(args) => stats(&args),
    }
}

/// The protocol iteration count: ceil(m ln m), natural log.
pub fn auto_iterations(instances: u64) -> u64 {
    if instances < 2 {
        return 0;
    }
    let m = instances as f64;
    (m * m.ln()).ceil() as u64
}

fn default_record_every(instances: u64) -> u64 {
    ((instances as f64 * 0.05).round() as u64).max(1)
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    command: &'static str,
    mode: &'a str,
    edges: String,
    colors: String,
    iterations_requested: &'a str,
    iterations: u64,
    samples: u32,
    seed: u64,
    record_every: u64,
    retry_out_of_space: bool,
    vertices: u32,
    instances: u64,
    color_count: u32,
    generator: &'static str,
}

fn mode_name(mode: ModeArg) -> &'static str {
    match mode {
        ModeArg::PolarisB => "polaris-b",
        ModeArg::PolarisC => "polaris-c",
        ModeArg::Cm => "cm",
    }
}

fn sample(args: &SampleArgs) -> Result<(), CliError> {
    if args.retry_out_of_space && args.mode != ModeArg::PolarisB {
        return Err(CliError::Usage(
            "--retry-out-of-space applies only to --mode polaris-b".to_string(),
        ));
    }
    let doc = load_graph(&args.colors, &args.edges)?;
    let g = &doc.graph;
    let iterations = if args.iterations == "auto" {
        auto_iterations(g.instance_total())
    } else {
        args.iterations
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("--iterations must be a count or `auto`, got {:?}", args.iterations)))?
    };
    let record_every = args
        .record_every
        .unwrap_or_else(|| default_record_every(g.instance_total()));
    if record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".to_string()));
    }
    let mode: SamplerMode = args.mode.into();

    println!(
        "loaded graph: {} vertices, {} edge instances, {} colors",
        g.vertex_count(),
        g.instance_total(),
        g.color_count()
    );
    let mut per_color = vec![0u64; g.color_count() as usize];
    for v in 0..g.vertex_count() {
        per_color[g.color_of(v) as usize] += 1;
    }
    for (c, count) in per_color.iter().enumerate() {
        println!("  color {} ({}): {} vertices", c, doc.color_names[c], count);
    }
    if !aperiodicity_conditions(g, mode).any() {
        eprintln!(
            "warning: neither sufficient aperiodicity condition holds on this graph; \
             the chain may be periodic"
        );
    }
    if mode == SamplerMode::PolarisC {
        for c in 0..g.color_count() {
            let len = g.class_len(polaris_core::graph::ClassKind::Color(c));
            if len < 2 {
                eprintln!(
                    "warning: color {c} ({}) has {len} incident edge instance(s); \
                     draws of this color leave the state unchanged",
                    doc.color_names[c as usize]
                );
            }
        }
    }

    std::fs::create_dir_all(&args.out).map_err(|source| IoError::Io {
        path: args.out.clone(),
        source,
    })?;

    type ChainResult = Result<(ColoredMultigraph, polaris_core::samplers::ChainTrace), String>;
    let chains: Vec<ChainResult> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for k in 0..args.samples {
                let g = g.clone();
                let handle = scope.spawn(move || {
                    let mut g = g;
                    let config = ChainConfig {
                        mode,
                        iterations,
                        seed: args.seed,
                        stream: u64::from(k),
                        retry_out_of_space: args.retry_out_of_space,
                        record_every,
                    };
                    run_chain(&mut g, &config, &UniformTarget, None)
                        .map(|trace| (g, trace))
                        .map_err(|e| e.to_string())
                });
                handles.push(handle);
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });

    for (k, chain) in chains.into_iter().enumerate() {
        let (sampled, trace) = chain.map_err(CliError::Data)?;
        match mode {
            SamplerMode::PolarisB | SamplerMode::PolarisC => {
                assert!(
                    same_ensemble(g, &sampled).unwrap_or(false),
                    "sampler left the ensemble; this is a bug"
                );
            }
            SamplerMode::Cm => {
                assert_eq!(g.degrees(), sampled.degrees(), "degree sequence drifted");
            }
        }
        let out_doc = doc.with_graph(sampled);
        write_graph(
            &out_doc,
            &args.out.join(format!("sample_{k:03}.edges")),
            &args.out.join(format!("sample_{k:03}.colors")),
        )?;
        write_trace(&trace, &args.out.join(format!("trace_{k:03}.csv")))?;
    }

    let meta = RunMetadata {
        command: "sample",
        mode: mode_name(args.mode),
        edges: args.edges.display().to_string(),
        colors: args.colors.display().to_string(),
        iterations_requested: &args.iterations,
        iterations,
        samples: args.samples,
        seed: args.seed,
        record_every,
        retry_out_of_space: args.retry_out_of_space,
        vertices: g.vertex_count(),
        instances: g.instance_total(),
        color_count: g.color_count(),
        generator: "chacha8 (seed, stream = sample index)",
    };
    let meta_text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(args.out.join("run.json"), meta_text + "\n").map_err(|source| IoError::Io {
        path: args.out.join("run.json"),
        source,
    })?;
    println!(
        "wrote {} sample(s) and trace(s) to {}",
        args.samples,
        args.out.display()
    );
    Ok(())
}

/// Per-instance verification outcome, one JSON line each in the report.
#[derive(Serialize)]
pub struct InstanceReport {
    pub name: String,
    pub vertices: u32,
    pub instances: u64,
    pub colors: u32,
    pub ensemble_size: usize,
    pub strongly_connected: bool,
    pub diameter: u32,
    pub adjacency_symmetric: bool,
    pub row_sum_error_polaris_b: f64,
    pub row_sum_error_polaris_c: f64,
    pub stationarity_uniform_polaris_b: f64,
    pub stationarity_uniform_polaris_c: f64,
    pub stationarity_product_polaris_b: f64,
    pub stationarity_product_polaris_c: f64,
    pub aperiodicity_consistent: bool,
    pub tv_polaris_b: Option<f64>,
    pub tv_polaris_c: Option<f64>,
    pub pass: bool,
}

fn product_weight(p: polaris_core::graph::Pair) -> f64 {
    1.0 + f64::from((3 * p.0 + 5 * p.1) % 7) / 10.0
}

fn product_dist(catalog: &EnsembleCatalog) -> Vec<f64> {
    let target = PairWeightTarget::new(product_weight);
    let weights: Vec<f64> = (0..catalog.len())
        .map(|i| target.graph_weight(&catalog.member_graph(i)))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

const RESIDUAL_TOLERANCE: f64 = 1e-12;
const TV_TOLERANCE: f64 = 0.1;
const TV_REPLICATES: u64 = 600;
const TV_STEPS: u64 = 2_000;
const TV_MAX_MEMBERS: usize = 12;

/// Runs the full exact suite on one instance.
pub fn verify_instance(name: &str, observed: &ColoredMultigraph, seed: u64) -> Result<InstanceReport, CliError> {
    let caps = EnsembleCaps {
        max_members: 50_000,
        ..Default::default()
    };
    let catalog = enumerate_ensemble(observed, caps, ConstraintKind::DegreeAndJcm)?;
    let connectivity = connectivity_report(&catalog);
    let adjacency_symmetric = catalog
        .adjacency
        .iter()
        .enumerate()
        .all(|(i, nbrs)| nbrs.iter().all(|&j| catalog.adjacency[j].contains(&i)));

    let uniform = uniform_dist(&catalog);
    let product = product_dist(&catalog);
    let matrix_b = transition_matrix(&catalog, SamplerMode::PolarisB, &uniform)?;
    let matrix_c = transition_matrix(&catalog, SamplerMode::PolarisC, &uniform)?;
    let matrix_b_prod = transition_matrix(&catalog, SamplerMode::PolarisB, &product)?;
    let matrix_c_prod = transition_matrix(&catalog, SamplerMode::PolarisC, &product)?;

    let row_b = row_sum_error(&matrix_b).max(row_sum_error(&matrix_b_prod));
    let row_c = row_sum_error(&matrix_c).max(row_sum_error(&matrix_c_prod));
    let stat_u_b = stationarity_residual(&matrix_b, &uniform)?;
    let stat_u_c = stationarity_residual(&matrix_c, &uniform)?;
    let stat_p_b = stationarity_residual(&matrix_b_prod, &product)?;
    let stat_p_c = stationarity_residual(&matrix_c_prod, &product)?;

    let mut aperiodicity_consistent = true;
    for (mode, matrix) in [
        (SamplerMode::PolarisB, &matrix_b),
        (SamplerMode::PolarisC, &matrix_c),
    ] {
        if catalog.len() >= 2
            && aperiodicity_conditions(observed, mode).any()
            && !matrix_is_aperiodic(matrix)
        {
            aperiodicity_consistent = false;
        }
    }

    let run_tv = catalog.len() >= 2
        && catalog.len() <= TV_MAX_MEMBERS
        && connectivity.strongly_connected
        && matrix_is_aperiodic(&matrix_b)
        && matrix_is_aperiodic(&matrix_c);
    let (tv_b, tv_c) = if run_tv {
        let tv_b = empirical_tv(
            &catalog,
            SamplerMode::PolarisB,
            &UniformTarget,
            &uniform,
            TV_STEPS,
            TV_REPLICATES,
            seed,
        )?;
        let tv_c = empirical_tv(
            &catalog,
            SamplerMode::PolarisC,
            &UniformTarget,
            &uniform,
            TV_STEPS,
            TV_REPLICATES,
            seed + 1,
        )?;
        (Some(tv_b), Some(tv_c))
    } else {
        (None, None)
    };

    let pass = connectivity.strongly_connected
        && adjacency_symmetric
        && row_b <= RESIDUAL_TOLERANCE
        && row_c <= RESIDUAL_TOLERANCE
        && stat_u_b <= RESIDUAL_TOLERANCE
        && stat_u_c <= RESIDUAL_TOLERANCE
        && stat_p_b <= RESIDUAL_TOLERANCE
        && stat_p_c <= RESIDUAL_TOLERANCE
        && aperiodicity_consistent
        && tv_b.is_none_or(|tv| tv <= TV_TOLERANCE)
        && tv_c.is_none_or(|tv| tv <= TV_TOLERANCE);

    Ok(InstanceReport {
        name: name.to_string(),
        vertices: observed.vertex_count(),
        instances: observed.instance_total(),
        colors: observed.color_count(),
        ensemble_size: catalog.len(),
        strongly_connected: connectivity.strongly_connected,
        diameter: connectivity.diameter,
        adjacency_symmetric,
        row_sum_error_polaris_b: row_b,
        row_sum_error_polaris_c: row_c,
        stationarity_uniform_polaris_b: stat_u_b,
        stationarity_uniform_polaris_c: stat_u_c,
        stationarity_product_polaris_b: stat_p_b,
        stationarity_product_polaris_c: stat_p_c,
        aperiodicity_consistent,
        tv_polaris_b: tv_b,
        tv_polaris_c: tv_c,
        pass,
    })
}

fn corpus_instances(spec: &str) -> Result<Vec<(String, ColoredMultigraph)>, CliError> {
    if spec == "builtin" {
        return Ok(builtin_corpus()
            .into_iter()
            .map(|i| (i.name.to_string(), i.graph))
            .collect());
    }
    let dir = Path::new(spec);
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| IoError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "edges"))
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(CliError::Data(format!(
            "{spec}: no .edges files found in corpus directory"
        )));
    }
    let mut out = Vec::new();
    for edges_path in entries {
        let colors_path = edges_path.with_extension("colors");
        let name = edges_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let doc = load_graph(&colors_path, &edges_path)?;
        out.push((name, doc.graph));
    }
    Ok(out)
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let instances = corpus_instances(&args.corpus)?;
    let mut report_text = String::new();
    let mut all_pass = true;
    for (i, (name, graph)) in instances.iter().enumerate() {
        let report = verify_instance(name, graph, 0x5EED_0000 + i as u64)?;
        println!(
            "{:28} |Z|={:<6} connected={} residual<=({:.1e},{:.1e}) {}",
            report.name,
            report.ensemble_size,
            report.strongly_connected,
            report
                .stationarity_uniform_polaris_b
                .max(report.stationarity_product_polaris_b),
            report
                .stationarity_uniform_polaris_c
                .max(report.stationarity_product_polaris_c),
            if report.pass { "PASS" } else { "FAIL" }
        );
        all_pass &= report.pass;
        writeln!(
            report_text,
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        )
        .expect("string write");
    }
    std::fs::write(&args.out, report_text).map_err(|source| IoError::Io {
        path: args.out.clone(),
        source,
    })?;
    if all_pass {
        println!("verification passed ({} instances)", instances.len());
        Ok(())
    } else {
        Err(CliError::Verification(
            "verification failed; see report".to_string(),
        ))
    }
}

fn stats(args: &StatsArgs) -> Result<(), CliError> {
    let doc = load_graph(&args.colors, &args.edges)?;
    let g = &doc.graph;
    println!("vertices:       {}", g.vertex_count());
    println!("edge instances: {}", g.instance_total());
    println!("colors:         {}", g.color_count());
    let degrees = g.degrees();
    let dmin = degrees.iter().min().copied().unwrap_or(0);
    let dmax = degrees.iter().max().copied().unwrap_or(0);
    let dmean = degrees.iter().map(|&d| f64::from(d)).sum::<f64>()
        / f64::from(g.vertex_count().max(1));
    println!("degree:         min {dmin} / mean {dmean:.3} / max {dmax}");
    let mut per_color = vec![0u64; g.color_count() as usize];
    for v in 0..g.vertex_count() {
        per_color[g.color_of(v) as usize] += 1;
    }
    for (c, count) in per_color.iter().enumerate() {
        println!("color {c} ({}): {count} vertices", doc.color_names[c]);
    }
    match color_assortativity(g) {
        Ok(v) => println!("color assortativity:  {v}"),
        Err(_) => println!("color assortativity:  undefined"),
    }
    match degree_assortativity(g) {
        Ok(v) => println!("degree assortativity: {v}"),
        Err(_) => println!("degree assortativity: undefined"),
    }
    let j = jcm(g);
    println!("joint color matrix:");
    for l in 0..g.color_count() {
        for r in l..g.color_count() {
            println!("  J[{l},{r}] = {}", j.get(l, r));
        }
    }
    Ok(())
}

/// Uniform-target chain driver shared by tests; kept here so the binary and
/// the test suites agree on configuration defaults.
pub fn run_one_chain(
    g: &ColoredMultigraph,
    mode: SamplerMode,
    iterations: u64,
    seed: u64,
    stream: u64,
) -> (ColoredMultigraph, polaris_core::samplers::ChainTrace) {
    let mut g = g.clone();
    let config = ChainConfig {
        stream,
        record_every: u64::MAX,
        ..ChainConfig::new(mode, iterations, seed)
    };
    let trace = run_chain(&mut g, &config, &UniformTarget, None).expect("valid chain");
    (g, trace)
}

/// Target-parameterized variant of [`run_one_chain`].
pub fn run_one_chain_with_target(
    g: &ColoredMultigraph,
    mode: SamplerMode,
    iterations: u64,
    seed: u64,
    stream: u64,
    target: &dyn TargetDistribution,
) -> (ColoredMultigraph, polaris_core::samplers::ChainTrace) {
    let mut g = g.clone();
    let config = ChainConfig {
        stream,
        record_every: u64::MAX,
        ..ChainConfig::new(mode, iterations, seed)
    };
    let trace = run_chain(&mut g, &config, target, None).expect("valid chain");
    (g, trace)
}
