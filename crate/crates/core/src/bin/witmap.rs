//! Command-line front end: scenario configs in; shot files, witness maps,
//! PPM heatmaps and threshold scans out.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use witmap::analytic::{analytic_witness_map, pair_projector_expectation, GateErrorModel};
use witmap::config::{EngineKind, RunConfig};
use witmap::error::{Error, Result};
use witmap::estimator::{
    build_maps, build_pair_map, MapSource, PairEstimate, PairMap, WitnessEstimate, WitnessMap,
};
use witmap::graphstate::{expand_region_projector, generator, pair_generators};
use witmap::lattice::{
    build_lattice, enumerate_regions, region_patch, LatticeGraph, LatticeKind, RegionKind, SiteId,
    Sublattice,
};
use witmap::noise::{build_scenario, pauliize, sinc, NoiseScenario};
use witmap::oracle::DensePatch;
use witmap::render::render_map;
use witmap::scan::{representative_region, threshold_scan, ScanChannel};
use witmap::shotfile::{read_shot_file, write_shot_file};

#[derive(Parser)]
#[command(
    name = "witmap",
    version,
    about = "Noisy graph-state simulation and entanglement-witness mapping on bipartite 2D lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample measurement shots for every setting of the config and
    /// write one shot file per setting.
    Generate(GenerateArgs),
    /// Build witness maps (JSON + CSV) per region kind.
    Map(MapArgs),
    /// Render a witness map JSON file to a PPM heatmap.
    Render(RenderArgs),
    /// Scan a uniform single-channel noise parameter and locate the
    /// witness zero crossing per region kind.
    Scan(ScanArgs),
    /// Compare the analytic engine against the dense reference on
    /// minimal patches and adjudicate the gate-error factor.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config shot count.
    #[arg(long)]
    shots: Option<u64>,
    /// Override the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    config: PathBuf,
    /// sampled | analytic-exact | analytic-paper | oracle
    #[arg(long)]
    engine: Option<String>,
    /// Comma-separated region kinds (alpha,beta,gamma).
    #[arg(long)]
    regions: Option<String>,
    /// Directory holding the shot files (sampled engine).
    #[arg(long)]
    shots_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gate-error attenuation model: sinc | shifted-sinc.
    #[arg(long, default_value = "sinc")]
    gate_model: String,
}

#[derive(Args)]
struct RenderArgs {
    /// Witness map JSON file.
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Witness value mapped to full color saturation.
    #[arg(long, default_value_t = 0.5)]
    clamp: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    /// dephasing | gate_error | loss | spont_emission | depolarizing
    #[arg(long)]
    channel: String,
    /// Inclusive linear grid start:stop:count.
    #[arg(long, default_value = "0:1.2:25")]
    grid: String,
    #[arg(long)]
    regions: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; crossings go to <out>.crossings.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "sinc")]
    gate_model: String,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long)]
    config: PathBuf,
    /// Write the reference values as a golden JSON file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Map(args) => cmd_map(args),
        Command::Render(args) => cmd_render(args),
        Command::Scan(args) => cmd_scan(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn parse_gate_model(s: &str) -> Result<GateErrorModel> {
    match s {
        "sinc" => Ok(GateErrorModel::SincAverage),
        "shifted-sinc" => Ok(GateErrorModel::ShiftedSinc),
        other => Err(Error::InvalidConfig(format!(
            "unknown gate model {other:?} (expected sinc or shifted-sinc)"
        ))),
    }
}

fn parse_region_list(s: &str) -> Result<Vec<RegionKind>> {
    s.split(',').map(|tok| tok.trim().parse()).collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut config = RunConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(shots) = args.shots {
        config.n_shots = shots;
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    std::fs::create_dir_all(&config.output_dir)?;
    let graph = config.build_graph()?;
    let scenario = build_scenario(&graph, &config.noise)?;
    for setting in config.effective_settings() {
        let batch =
            witmap::sampler::sample(&graph, &scenario, setting, config.n_shots, config.seed)?;
        let path = config.shot_file(setting);
        write_shot_file(&path, &batch)?;
        println!(
            "wrote {} ({} shots, {} sites, digest {})",
            path.display(),
            batch.n_shots(),
            batch.n_sites(),
            batch.header.scenario_digest
        );
    }
    Ok(())
}

fn map_paths(out_dir: &std::path::Path, kind: &str, engine: &str) -> (PathBuf, PathBuf) {
    (
        out_dir.join(format!("map_{kind}_{engine}.json")),
        out_dir.join(format!("map_{kind}_{engine}.csv")),
    )
}

fn cmd_map(args: MapArgs) -> Result<()> {
    let mut config = RunConfig::from_file(&args.config)?;
    if let Some(engine) = &args.engine {
        config.engine = engine.parse()?;
    }
    if let Some(regions) = &args.regions {
        config.regions = parse_region_list(regions)?;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    let model = parse_gate_model(&args.gate_model)?;
    std::fs::create_dir_all(&config.output_dir)?;
    let graph = config.build_graph()?;
    let engine_label = match config.engine {
        EngineKind::Sampled => "sampled",
        EngineKind::AnalyticExact => "analytic-exact",
        EngineKind::AnalyticPaper => "analytic-paper",
        EngineKind::Oracle => "oracle",
    };

    if graph.kind() == LatticeKind::Pairs {
        let map = pair_map_for_engine(&config, &graph, &args, model)?;
        let (jpath, cpath) = map_paths(&config.output_dir, "pair", engine_label);
        map.write_json(&jpath)?;
        map.write_csv(&cpath)?;
        println!("wrote {} and {}", jpath.display(), cpath.display());
        return Ok(());
    }

    let kinds = config.effective_regions();
    let maps: Vec<WitnessMap> = match config.engine {
        EngineKind::Sampled => {
            let dir = args
                .shots_dir
                .clone()
                .unwrap_or_else(|| config.output_dir.clone());
            let batch_a = read_shot_file(&dir.join("shots_S_A.bin"))?;
            let batch_b = read_shot_file(&dir.join("shots_S_B.bin"))?;
            let catalogs: Vec<(RegionKind, Vec<_>)> = kinds
                .iter()
                .map(|k| (*k, enumerate_regions(&graph, *k)))
                .collect();
            build_maps(&batch_a, &batch_b, &graph, &catalogs)?
        }
        EngineKind::AnalyticExact | EngineKind::AnalyticPaper => {
            let scenario = build_scenario(&graph, &config.noise)?;
            let desc = pauliize(&graph, &scenario);
            let exact = config.engine == EngineKind::AnalyticExact;
            kinds
                .iter()
                .map(|k| {
                    analytic_witness_map(
                        &graph,
                        &desc,
                        &enumerate_regions(&graph, *k),
                        *k,
                        exact,
                        model,
                    )
                })
                .collect()
        }
        EngineKind::Oracle => {
            let scenario = build_scenario(&graph, &config.noise)?;
            let patch = DensePatch::prepare(&graph, &scenario)?;
            kinds
                .iter()
                .map(|k| oracle_witness_map(&graph, &patch, *k))
                .collect()
        }
    };
    for map in &maps {
        let (jpath, cpath) = map_paths(&config.output_dir, map.region_kind.label(), engine_label);
        map.write_json(&jpath)?;
        map.write_csv(&cpath)?;
        println!(
            "wrote {} and {} ({} regions)",
            jpath.display(),
            cpath.display(),
            map.entries.len()
        );
    }
    Ok(())
}

fn pair_map_for_engine(
    config: &RunConfig,
    graph: &LatticeGraph,
    args: &MapArgs,
    model: GateErrorModel,
) -> Result<PairMap> {
    match config.engine {
        EngineKind::Sampled => {
            let dir = args
                .shots_dir
                .clone()
                .unwrap_or_else(|| config.output_dir.clone());
            let xx = read_shot_file(&dir.join("shots_PAIR_XX.bin"))?;
            let yz = read_shot_file(&dir.join("shots_PAIR_YZ.bin"))?;
            let zy = read_shot_file(&dir.join("shots_PAIR_ZY.bin"))?;
            build_pair_map(&xx, &yz, &zy, graph)
        }
        EngineKind::Oracle => {
            let scenario = build_scenario(graph, &config.noise)?;
            let patch = DensePatch::prepare(graph, &scenario)?;
            let entries = pair_generators(graph)?
                .iter()
                .map(|pg| {
                    let value = 0.25
                        * (1.0
                            + patch.expectation_string(&pg.xx).re
                            + patch.expectation_string(&pg.yz).re
                            + patch.expectation_string(&pg.zy()).re);
                    pair_entry(graph, pg.cs, pg.li, value)
                })
                .collect();
            Ok(PairMap {
                source: MapSource::Oracle,
                lattice: graph.descriptor(),
                entries,
            })
        }
        _ => {
            let scenario = build_scenario(graph, &config.noise)?;
            let desc = pauliize(graph, &scenario);
            let entries = pair_generators(graph)?
                .iter()
                .map(|pg| {
                    let value = pair_projector_expectation(graph, &desc, pg, model);
                    pair_entry(graph, pg.cs, pg.li, value)
                })
                .collect();
            Ok(PairMap {
                source: match config.engine {
                    EngineKind::AnalyticPaper => MapSource::AnalyticPaper,
                    _ => MapSource::AnalyticExact,
                },
                lattice: graph.descriptor(),
                entries,
            })
        }
    }
}

fn pair_entry(graph: &LatticeGraph, cs: SiteId, li: SiteId, value: f64) -> PairEstimate {
    let (xa, ya) = graph.position(cs);
    let (xb, yb) = graph.position(li);
    PairEstimate {
        sites: (cs, li),
        centroid: ((xa + xb) / 2.0, (ya + yb) / 2.0),
        value,
        stderr: 0.0,
    }
}

fn oracle_witness_map(graph: &LatticeGraph, patch: &DensePatch, kind: RegionKind) -> WitnessMap {
    let entries = enumerate_regions(graph, kind)
        .into_iter()
        .map(|region| {
            let pa = patch.expectation_projector(&expand_region_projector(
                graph,
                &region,
                Sublattice::A,
            ));
            let pb = patch.expectation_projector(&expand_region_projector(
                graph,
                &region,
                Sublattice::B,
            ));
            let p_tilde = pa + pb - 1.0;
            let certified = region_patch(graph, &region);
            WitnessEstimate {
                kind: region.kind,
                sites: region.sites.clone(),
                centroid: region.centroid,
                p_a_hat: pa,
                p_b_hat: pb,
                p_tilde_hat: p_tilde,
                w_hat: 0.5 - p_tilde,
                stderr: 0.0,
                n_shots_a: 0,
                n_shots_b: 0,
                defect_adjacent: certified.iter().any(|s| graph.is_hole(*s)),
                entanglement_detected: 0.5 - p_tilde < 0.0,
                certified_sites: certified,
            }
        })
        .collect();
    WitnessMap {
        source: MapSource::Oracle,
        region_kind: kind,
        lattice: graph.descriptor(),
        entries,
    }
}

fn cmd_render(args: RenderArgs) -> Result<()> {
    let map = WitnessMap::read_json(&args.map)?;
    let img = render_map(&map, args.clamp)?;
    img.write(&args.out)?;
    println!(
        "wrote {} ({}x{}, {} regions)",
        args.out.display(),
        img.width,
        img.height,
        map.entries.len()
    );
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "grid must be start:stop:count, got {s:?}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid start {:?}", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid stop {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad grid count {:?}", parts[2])))?;
    if count < 2 || stop <= start {
        return Err(Error::InvalidConfig(
            "grid needs count >= 2 and stop > start".into(),
        ));
    }
    Ok((0..count)
        .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let config = RunConfig::from_file(&args.config)?;
    let channel: ScanChannel = args.channel.parse()?;
    let model = parse_gate_model(&args.gate_model)?;
    let grid = parse_grid(&args.grid)?;
    let kinds = match &args.regions {
        Some(list) => parse_region_list(list)?,
        None => config.effective_regions(),
    };
    let graph = config.build_graph()?;
    let shots = args.shots.unwrap_or(config.n_shots);
    let seed = args.seed.unwrap_or(config.seed);
    let scan = threshold_scan(&graph, &kinds, channel, &grid, shots, seed, model)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    scan.write_csv(&args.out)?;
    let crossings_path = args.out.with_extension("crossings.json");
    scan.write_crossings_json(&crossings_path)?;
    println!(
        "wrote {} and {}",
        args.out.display(),
        crossings_path.display()
    );
    for (kind, crossing) in &scan.crossings {
        match crossing {
            Some(x) => println!("zero crossing [{kind}] {} = {x:.6}", channel.label()),
            None => println!(
                "zero crossing [{kind}] {}: none on the grid",
                channel.label()
            ),
        }
    }
    Ok(())
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<()> {
    let config = RunConfig::from_file(&args.config)?;
    let graph = config.build_graph()?;
    let model = GateErrorModel::SincAverage;

    // Gate-factor adjudication: one noisy edge on a single cell, dense
    // <g_a> against the two closed forms.
    println!("== gate-error factor adjudication ==");
    let cell = build_lattice(LatticeKind::Honeycomb, 1, 1, &[])?;
    let mut sinc_wins = true;
    for eps in [0.2f64, 0.4, 0.8] {
        let mut scenario = NoiseScenario::identity(&cell);
        scenario
            .gate_eps
            .insert((SiteId::a(0, 0), SiteId::b(0, 0)), eps);
        let patch = DensePatch::prepare(&cell, &scenario)?;
        let g = generator(&cell, SiteId::a(0, 0));
        let dense = patch.expectation_string(&g).re;
        let derived = sinc(2.0 * eps);
        let shifted = 0.5 * (1.0 + derived);
        let matches_derived = (dense - derived).abs() <= 1e-9;
        let matches_shifted = (dense - shifted).abs() <= 1e-9;
        sinc_wins &= matches_derived && !matches_shifted;
        let verdict = if matches_derived {
            "sinc"
        } else if matches_shifted {
            "shifted"
        } else {
            "neither"
        };
        println!(
            "eps={eps:.1}: dense={dense:.12} sinc={derived:.12} shifted={shifted:.12} -> {verdict}"
        );
    }
    println!(
        "default engine mode (sinc) {} the dense reference",
        if sinc_wins { "matches" } else { "DOES NOT match" }
    );

    // Reset attenuation exponent: per-site factors give (1-p)^weight on a
    // weight-4 stabilizer, not a single power.
    println!("== reset attenuation exponent ==");
    {
        let probe = build_lattice(LatticeKind::Honeycomb, 2, 2, &[])?;
        let site = SiteId::a(1, 1); // degree 3, stabilizer weight 4
        let p = 0.1f64;
        let mut scenario = NoiseScenario::identity(&probe);
        for s in probe.sites() {
            scenario.loss_p.insert(*s, p);
        }
        let patch = DensePatch::prepare(&probe, &scenario)?;
        let g = generator(&probe, site);
        let dense = patch.expectation_string(&g).re;
        println!(
            "loss p={p}: dense <g>={dense:.12}, (1-p)^4={:.12}, (1-p)={:.12}",
            (1.0 - p).powi(4),
            1.0 - p
        );
    }

    // Analytic vs dense on the minimal patch of each region kind under
    // the config's noise fields.
    println!("== minimal-patch comparison ==");
    let mut golden = Vec::new();
    for kind in config.effective_regions() {
        let Some(region) = representative_region(&graph, kind) else {
            continue;
        };
        let patch_sites = region_patch(&graph, &region);
        let patch_graph = graph.induced_subgraph(&patch_sites)?;
        let scenario = build_scenario(&patch_graph, &config.noise)?;
        let desc = pauliize(&patch_graph, &scenario);
        let dense = DensePatch::prepare(&patch_graph, &scenario)?;
        let exact = witmap::analytic::exact_region_bound(&patch_graph, &desc, &region, model);
        let pa = dense.expectation_projector(&expand_region_projector(
            &patch_graph,
            &region,
            Sublattice::A,
        ));
        let pb = dense.expectation_projector(&expand_region_projector(
            &patch_graph,
            &region,
            Sublattice::B,
        ));
        let witness = 0.5 - (pa + pb - 1.0);
        println!(
            "{kind}: dense W={witness:.12} analytic W={:.12} |diff|={:.3e}",
            exact.witness,
            (witness - exact.witness).abs()
        );
        golden.push(serde_json::json!({
            "patch": patch_sites,
            "scenario": scenario,
            "region": region,
            "p_a": pa,
            "p_b": pb,
            "value": witness,
        }));
    }
    if let Some(out) = args.out {
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(&out, serde_json::to_string_pretty(&golden)? + "\n")?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
