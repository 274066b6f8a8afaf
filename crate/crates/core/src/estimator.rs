//! Shot post-processing: stabilizer means, region fidelity bounds,
//! witness values with standard errors, and full witness maps.
//!
//! In setting S_A every generator of sublattice A is diagonal in the
//! measured product basis, so the region projector evaluates exactly per
//! shot: the indicator is 1 iff every member generator outcome is +1.
//! One pass over the shot data updates every region of every requested
//! kind simultaneously — the maps for all regions come from the same two
//! measurement settings.

use crate::error::{Error, Result};
use crate::lattice::{
    region_patch, LatticeDescriptor, LatticeGraph, RegionKind, RegionSpec, SiteId, Sublattice,
};
use crate::sampler::{MeasurementSetting, ShotBatch};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Which engine produced a witness map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapSource {
    Sampled,
    AnalyticExact,
    AnalyticPaper,
    Oracle,
}

/// Witness value of one region.
///
/// Invariants: p_tilde_hat = p_a_hat + p_b_hat - 1 and
/// w_hat = 1/2 - p_tilde_hat; stderr^2 = var_A/n_A + var_B/n_B with var_S
/// the sample variance of the projector indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEstimate {
    pub kind: RegionKind,
    pub sites: Vec<SiteId>,
    pub centroid: (f64, f64),
    pub p_a_hat: f64,
    pub p_b_hat: f64,
    pub p_tilde_hat: f64,
    pub w_hat: f64,
    pub stderr: f64,
    pub n_shots_a: u64,
    pub n_shots_b: u64,
    /// True when a declared hole lies inside the certified site set.
    pub defect_adjacent: bool,
    /// Conservative detection flag: w_hat + 4 stderr < 0.
    pub entanglement_detected: bool,
    /// Union of the supports of all stabilizers entering the witness;
    /// the qubit set the certificate actually covers.
    pub certified_sites: Vec<SiteId>,
}

/// Per-region witness estimates for one region kind, ready for
/// serialization and rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessMap {
    pub source: MapSource,
    pub region_kind: RegionKind,
    pub lattice: LatticeDescriptor,
    pub entries: Vec<WitnessEstimate>,
}

impl WitnessMap {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<WitnessMap> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            std::fs::File::open(path)?,
        ))?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "kind,centroid_x,centroid_y,value,stderr")?;
        for e in &self.entries {
            writeln!(
                f,
                "{},{},{},{},{}",
                e.kind, e.centroid.0, e.centroid.1, e.w_hat, e.stderr
            )?;
        }
        f.flush()?;
        Ok(())
    }
}

fn measured_sublattice(setting: MeasurementSetting) -> Result<Sublattice> {
    match setting {
        MeasurementSetting::SA => Ok(Sublattice::A),
        MeasurementSetting::SB => Ok(Sublattice::B),
        other => Err(Error::SettingMismatch {
            setting: other.to_string(),
            context: "graph-state estimation".into(),
        }),
    }
}

fn check_same_experiment(a: &ShotBatch, b: &ShotBatch) -> Result<()> {
    if a.header.lattice != b.header.lattice {
        return Err(Error::ProvenanceMismatch("the lattice descriptor".into()));
    }
    if a.header.scenario_digest != b.header.scenario_digest {
        return Err(Error::ProvenanceMismatch("the scenario digest".into()));
    }
    if a.header.site_order != b.header.site_order {
        return Err(Error::ProvenanceMismatch("the site order".into()));
    }
    Ok(())
}

fn check_batch_graph(batch: &ShotBatch, graph: &LatticeGraph) -> Result<()> {
    if batch.header.lattice != graph.descriptor() || batch.header.site_order != graph.sites() {
        return Err(Error::ProvenanceMismatch(
            "the lattice the batch was sampled on".into(),
        ));
    }
    Ok(())
}

/// Count, per region, the shots in which every listed generator outcome
/// is +1. `members` holds measured-sublattice site indices per region.
/// Chunked in parallel; u64 sums make the reduction order irrelevant.
fn indicator_counts(batch: &ShotBatch, graph: &LatticeGraph, members: &[Vec<u32>]) -> Vec<u64> {
    let n = graph.site_count();
    let n_shots = batch.n_shots() as usize;
    let row_bytes = batch.row_bytes();
    let rows = batch.raw_rows();
    let chunk_shots = 512usize;

    let counts = rows
        .par_chunks(row_bytes * chunk_shots)
        .map(|chunk| {
            let mut counts = vec![0u64; members.len()];
            let mut g_bits = vec![0u8; n];
            for row in chunk.chunks(row_bytes) {
                let bit = |idx: usize| row[idx / 8] >> (idx % 8) & 1;
                for i in 0..n {
                    let mut b = bit(i);
                    for &j in graph.neighbor_indices(i) {
                        b ^= bit(j as usize);
                    }
                    g_bits[i] = b;
                }
                for (r, m) in members.iter().enumerate() {
                    if m.iter().all(|&i| g_bits[i as usize] == 0) {
                        counts[r] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; members.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    debug_assert!(counts.iter().all(|&c| c <= n_shots as u64));
    counts
}

/// Sample mean and binomial standard error of one stabilizer's outcomes.
pub fn estimate_stabilizer(
    batch: &ShotBatch,
    graph: &LatticeGraph,
    site: SiteId,
) -> Result<(f64, f64)> {
    check_batch_graph(batch, graph)?;
    let measured = measured_sublattice(batch.header.setting)?;
    if site.basis != measured {
        return Err(Error::SettingMismatch {
            setting: batch.header.setting.to_string(),
            context: format!("stabilizer of {site} (X is measured on {measured})"),
        });
    }
    let idx = graph
        .site_index(site)
        .ok_or(Error::SiteOutOfBounds(site))? as u32;
    let plus = indicator_counts(batch, graph, &[vec![idx]])[0];
    let n = batch.n_shots();
    let mean = 2.0 * plus as f64 / n as f64 - 1.0;
    let stderr = if n > 1 {
        ((1.0 - mean * mean).max(0.0) / (n - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((mean, stderr))
}

fn indicator_variance(count: u64, n: u64) -> f64 {
    let p = count as f64 / n as f64;
    if n > 1 {
        p * (1.0 - p) * n as f64 / (n - 1) as f64
    } else {
        f64::NAN
    }
}

fn assemble_estimate(
    graph: &LatticeGraph,
    region: &RegionSpec,
    count_a: u64,
    n_a: u64,
    count_b: u64,
    n_b: u64,
) -> WitnessEstimate {
    let p_a_hat = count_a as f64 / n_a as f64;
    let p_b_hat = count_b as f64 / n_b as f64;
    let p_tilde_hat = p_a_hat + p_b_hat - 1.0;
    let w_hat = 0.5 - p_tilde_hat;
    let stderr = (indicator_variance(count_a, n_a) / n_a as f64
        + indicator_variance(count_b, n_b) / n_b as f64)
        .sqrt();
    let certified = region_patch(graph, region);
    let defect_adjacent = certified.iter().any(|s| graph.is_hole(*s));
    WitnessEstimate {
        kind: region.kind,
        sites: region.sites.clone(),
        centroid: region.centroid,
        p_a_hat,
        p_b_hat,
        p_tilde_hat,
        w_hat,
        stderr,
        n_shots_a: n_a,
        n_shots_b: n_b,
        defect_adjacent,
        entanglement_detected: w_hat + 4.0 * stderr < 0.0,
        certified_sites: certified,
    }
}

fn region_members(graph: &LatticeGraph, region: &RegionSpec, subl: Sublattice) -> Vec<u32> {
    region
        .sites
        .iter()
        .filter(|s| s.basis == subl)
        .map(|s| graph.site_index(*s).expect("region site in graph") as u32)
        .collect()
}

fn validate_pair_of_batches(batch_a: &ShotBatch, batch_b: &ShotBatch) -> Result<()> {
    if batch_a.header.setting != MeasurementSetting::SA {
        return Err(Error::SettingMismatch {
            setting: batch_a.header.setting.to_string(),
            context: "first batch (expected S_A)".into(),
        });
    }
    if batch_b.header.setting != MeasurementSetting::SB {
        return Err(Error::SettingMismatch {
            setting: batch_b.header.setting.to_string(),
            context: "second batch (expected S_B)".into(),
        });
    }
    check_same_experiment(batch_a, batch_b)
}

/// Witness estimate of a single region from the two settings.
pub fn estimate_region(
    batch_a: &ShotBatch,
    batch_b: &ShotBatch,
    graph: &LatticeGraph,
    region: &RegionSpec,
) -> Result<WitnessEstimate> {
    validate_pair_of_batches(batch_a, batch_b)?;
    check_batch_graph(batch_a, graph)?;
    let count_a = indicator_counts(
        batch_a,
        graph,
        &[region_members(graph, region, Sublattice::A)],
    )[0];
    let count_b = indicator_counts(
        batch_b,
        graph,
        &[region_members(graph, region, Sublattice::B)],
    )[0];
    Ok(assemble_estimate(
        graph,
        region,
        count_a,
        batch_a.n_shots(),
        count_b,
        batch_b.n_shots(),
    ))
}

/// Witness maps for several region kinds from the same two batches, one
/// sweep over each batch updating every region indicator.
pub fn build_maps(
    batch_a: &ShotBatch,
    batch_b: &ShotBatch,
    graph: &LatticeGraph,
    catalogs: &[(RegionKind, Vec<RegionSpec>)],
) -> Result<Vec<WitnessMap>> {
    validate_pair_of_batches(batch_a, batch_b)?;
    check_batch_graph(batch_a, graph)?;
    let regions: Vec<&RegionSpec> = catalogs.iter().flat_map(|(_, rs)| rs.iter()).collect();
    let members_a: Vec<Vec<u32>> = regions
        .iter()
        .map(|r| region_members(graph, r, Sublattice::A))
        .collect();
    let members_b: Vec<Vec<u32>> = regions
        .iter()
        .map(|r| region_members(graph, r, Sublattice::B))
        .collect();
    let counts_a = indicator_counts(batch_a, graph, &members_a);
    let counts_b = indicator_counts(batch_b, graph, &members_b);

    let mut maps = Vec::with_capacity(catalogs.len());
    let mut offset = 0;
    for (kind, catalog) in catalogs {
        let entries = catalog
            .iter()
            .enumerate()
            .map(|(i, region)| {
                assemble_estimate(
                    graph,
                    region,
                    counts_a[offset + i],
                    batch_a.n_shots(),
                    counts_b[offset + i],
                    batch_b.n_shots(),
                )
            })
            .collect();
        offset += catalog.len();
        maps.push(WitnessMap {
            source: MapSource::Sampled,
            region_kind: *kind,
            lattice: graph.descriptor(),
            entries,
        });
    }
    Ok(maps)
}

/// Single-kind convenience wrapper around [`build_maps`].
pub fn build_map(
    batch_a: &ShotBatch,
    batch_b: &ShotBatch,
    graph: &LatticeGraph,
    kind: RegionKind,
    catalog: Vec<RegionSpec>,
) -> Result<WitnessMap> {
    Ok(build_maps(batch_a, batch_b, graph, &[(kind, catalog)])?.remove(0))
}

/// Dimer projector estimate 1/4 (1 + m_xx + m_yz + m_zy) of one pair
/// from the three dimer settings, with uncorrelated error propagation.
pub fn estimate_pair_projector(
    batch_xx: &ShotBatch,
    batch_yz: &ShotBatch,
    batch_zy: &ShotBatch,
    graph: &LatticeGraph,
    pair: (SiteId, SiteId),
) -> Result<(f64, f64)> {
    let want = [
        MeasurementSetting::PairXX,
        MeasurementSetting::PairYZ,
        MeasurementSetting::PairZY,
    ];
    for (batch, setting) in [batch_xx, batch_yz, batch_zy].iter().zip(want) {
        if batch.header.setting != setting {
            return Err(Error::SettingMismatch {
                setting: batch.header.setting.to_string(),
                context: format!("pair estimation (expected {setting})"),
            });
        }
        check_batch_graph(batch, graph)?;
    }
    check_same_experiment(batch_xx, batch_yz)?;
    check_same_experiment(batch_xx, batch_zy)?;

    let ia = graph
        .site_index(pair.0)
        .ok_or(Error::SiteOutOfBounds(pair.0))?;
    let ib = graph
        .site_index(pair.1)
        .ok_or(Error::SiteOutOfBounds(pair.1))?;
    let mut value = 1.0;
    let mut var = 0.0;
    for batch in [batch_xx, batch_yz, batch_zy] {
        let n = batch.n_shots();
        let mut plus = 0u64;
        for shot in 0..n as usize {
            if batch.outcome(shot, ia) * batch.outcome(shot, ib) == 1 {
                plus += 1;
            }
        }
        let mean = 2.0 * plus as f64 / n as f64 - 1.0;
        value += mean;
        if n > 1 {
            var += (1.0 - mean * mean).max(0.0) / (n - 1) as f64;
        }
    }
    Ok((0.25 * value, 0.25 * var.sqrt()))
}

/// Per-pair projector map of a `pairs` lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMap {
    pub source: MapSource,
    pub lattice: LatticeDescriptor,
    pub entries: Vec<PairEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub sites: (SiteId, SiteId),
    pub centroid: (f64, f64),
    /// <P> of the dimer projector; 1 for a perfect pair, 1/4 fully mixed.
    pub value: f64,
    pub stderr: f64,
}

impl PairMap {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "kind,centroid_x,centroid_y,value,stderr")?;
        for e in &self.entries {
            writeln!(
                f,
                "pair,{},{},{},{}",
                e.centroid.0, e.centroid.1, e.value, e.stderr
            )?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Projector map over every pair from the three dimer settings.
pub fn build_pair_map(
    batch_xx: &ShotBatch,
    batch_yz: &ShotBatch,
    batch_zy: &ShotBatch,
    graph: &LatticeGraph,
) -> Result<PairMap> {
    let mut entries = Vec::new();
    for pair in graph.pair_list()? {
        let (value, stderr) =
            estimate_pair_projector(batch_xx, batch_yz, batch_zy, graph, pair)?;
        let (xa, ya) = graph.position(pair.0);
        let (xb, yb) = graph.position(pair.1);
        entries.push(PairEstimate {
            sites: pair,
            centroid: ((xa + xb) / 2.0, (ya + yb) / 2.0),
            value,
            stderr,
        });
    }
    Ok(PairMap {
        source: MapSource::Sampled,
        lattice: graph.descriptor(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{exact_region_bound, GateErrorModel};
    use crate::lattice::{build_lattice, enumerate_regions, LatticeKind};
    use crate::noise::{build_scenario, pauliize, FieldSpec, NoiseScenario, ScenarioConfig};
    use crate::sampler::{sample, sample_pairs};

    fn two_batches(
        graph: &LatticeGraph,
        scenario: &NoiseScenario,
        shots: u64,
        seed: u64,
    ) -> (ShotBatch, ShotBatch) {
        (
            sample(graph, scenario, MeasurementSetting::SA, shots, seed).unwrap(),
            sample(graph, scenario, MeasurementSetting::SB, shots, seed ^ 0xDEAD_BEEF).unwrap(),
        )
    }

    #[test]
    fn stabilizer_mean_arithmetic() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        let batch = sample(&g, &s, MeasurementSetting::SA, 1000, 3).unwrap();
        let (mean, stderr) = estimate_stabilizer(&batch, &g, SiteId::a(1, 1)).unwrap();
        assert_eq!(mean, 1.0);
        assert_eq!(stderr, 0.0);
        // Wrong sublattice for the setting.
        assert!(matches!(
            estimate_stabilizer(&batch, &g, SiteId::b(1, 1)),
            Err(Error::SettingMismatch { .. })
        ));
    }

    #[test]
    fn identity_scenario_witness_is_exactly_minus_half() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        let (ba, bb) = two_batches(&g, &s, 500, 17);
        for kind in [RegionKind::Alpha, RegionKind::Beta, RegionKind::Gamma] {
            for region in enumerate_regions(&g, kind) {
                let e = estimate_region(&ba, &bb, &g, &region).unwrap();
                assert_eq!(e.p_a_hat, 1.0);
                assert_eq!(e.p_b_hat, 1.0);
                assert_eq!(e.w_hat, -0.5);
                assert_eq!(e.stderr, 0.0);
                assert!(e.entanglement_detected);
                assert!(!e.defect_adjacent);
            }
        }
    }

    #[test]
    fn fully_depolarized_beta_combinatorics() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let config = ScenarioConfig {
            depolarizing: FieldSpec::uniform(1.0),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let (ba, bb) = two_batches(&g, &s, 100_000, 23);
        // Beta region centered on an A site: 1 generator from S_A, 3 from S_B.
        let beta = enumerate_regions(&g, RegionKind::Beta);
        let region = beta
            .iter()
            .find(|r| r.sites.iter().filter(|x| x.basis == Sublattice::A).count() == 1)
            .unwrap();
        let e = estimate_region(&ba, &bb, &g, region).unwrap();
        assert!((e.p_a_hat - 0.5).abs() < 4.0 * 0.002, "{}", e.p_a_hat);
        assert!((e.p_b_hat - 0.125).abs() < 4.0 * 0.002, "{}", e.p_b_hat);
        assert!((e.w_hat - 0.875).abs() < 4.0 * e.stderr + 1e-9, "{}", e.w_hat);
    }

    #[test]
    fn sweep_equals_per_region() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[SiteId::b(1, 1)]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.25),
            depolarizing: FieldSpec::uniform(0.05),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let (ba, bb) = two_batches(&g, &s, 2000, 7);
        let catalogs: Vec<(RegionKind, Vec<RegionSpec>)> =
            [RegionKind::Alpha, RegionKind::Beta, RegionKind::Gamma]
                .into_iter()
                .map(|k| (k, enumerate_regions(&g, k)))
                .collect();
        let maps = build_maps(&ba, &bb, &g, &catalogs).unwrap();
        for (map, (_, catalog)) in maps.iter().zip(&catalogs) {
            for (entry, region) in map.entries.iter().zip(catalog) {
                let single = estimate_region(&ba, &bb, &g, region).unwrap();
                assert_eq!(*entry, single, "sweep and per-region disagree");
            }
        }
        // Regions whose supports touch the hole carry the flag.
        let alpha_map = &maps[0];
        assert!(alpha_map.entries.iter().any(|e| e.defect_adjacent));
        for e in &alpha_map.entries {
            let touches = e.certified_sites.contains(&SiteId::b(1, 1));
            assert_eq!(e.defect_adjacent, touches);
        }
    }

    #[test]
    fn provenance_mismatch_rejected() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let ident = NoiseScenario::identity(&g);
        let config = ScenarioConfig {
            depolarizing: FieldSpec::uniform(0.5),
            ..Default::default()
        };
        let other = build_scenario(&g, &config).unwrap();
        let ba = sample(&g, &ident, MeasurementSetting::SA, 50, 1).unwrap();
        let bb = sample(&g, &other, MeasurementSetting::SB, 50, 1).unwrap();
        let region = enumerate_regions(&g, RegionKind::Alpha).remove(0);
        assert!(matches!(
            estimate_region(&ba, &bb, &g, &region),
            Err(Error::ProvenanceMismatch(_))
        ));
        // Two S_A batches are also rejected.
        let ba2 = sample(&g, &ident, MeasurementSetting::SA, 50, 2).unwrap();
        assert!(matches!(
            estimate_region(&ba, &ba2, &g, &region),
            Err(Error::SettingMismatch { .. })
        ));
    }

    #[test]
    fn sampled_map_matches_analytic_within_4_sigma() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, &[]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.2),
            gate_error: FieldSpec::uniform(0.1),
            spont_emission: FieldSpec::uniform(0.03),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let desc = pauliize(&g, &s);
        let (ba, bb) = two_batches(&g, &s, 40_000, 301);
        for kind in [RegionKind::Alpha, RegionKind::Gamma] {
            let catalog = enumerate_regions(&g, kind);
            let map = build_map(&ba, &bb, &g, kind, catalog.clone()).unwrap();
            for (entry, region) in map.entries.iter().zip(&catalog) {
                let exact = exact_region_bound(&g, &desc, region, GateErrorModel::SincAverage);
                assert!(
                    (entry.w_hat - exact.witness).abs() < 4.0 * entry.stderr + 1e-9,
                    "{kind:?} at {:?}: {} vs {} (se {})",
                    region.centroid,
                    entry.w_hat,
                    exact.witness,
                    entry.stderr
                );
            }
        }
    }

    #[test]
    fn estimator_unbiased_over_seeds() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.3),
            depolarizing: FieldSpec::uniform(0.05),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let desc = pauliize(&g, &s);
        let gamma = enumerate_regions(&g, RegionKind::Gamma).remove(0);
        let truth = exact_region_bound(&g, &desc, &gamma, GateErrorModel::SincAverage).witness;
        let n_seeds = 20;
        let shots = 10_000;
        let mut sum = 0.0;
        let mut var_sum = 0.0;
        for seed in 0..n_seeds {
            let (ba, bb) = two_batches(&g, &s, shots, 1000 + seed);
            let e = estimate_region(&ba, &bb, &g, &gamma).unwrap();
            sum += e.w_hat;
            var_sum += e.stderr * e.stderr;
        }
        let mean = sum / n_seeds as f64;
        let pooled_se = (var_sum).sqrt() / n_seeds as f64;
        assert!(
            (mean - truth).abs() < 3.0 * pooled_se,
            "aggregate {mean} vs {truth} (pooled se {pooled_se})"
        );
    }

    #[test]
    fn pair_projector_estimation() {
        let g = build_lattice(LatticeKind::Pairs, 4, 1, &[]).unwrap();
        let ident = NoiseScenario::identity(&g);
        let sample3 = |scenario: &NoiseScenario, seed: u64| {
            (
                sample_pairs(&g, scenario, MeasurementSetting::PairXX, 20_000, seed).unwrap(),
                sample_pairs(&g, scenario, MeasurementSetting::PairYZ, 20_000, seed + 1).unwrap(),
                sample_pairs(&g, scenario, MeasurementSetting::PairZY, 20_000, seed + 2).unwrap(),
            )
        };
        let (xx, yz, zy) = sample3(&ident, 5);
        let pair = g.pair_list().unwrap()[0];
        let (value, stderr) = estimate_pair_projector(&xx, &yz, &zy, &g, pair).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(stderr, 0.0);
        // Fully depolarized: all means 0, value 1/4.
        let config = ScenarioConfig {
            depolarizing: FieldSpec::uniform(1.0),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let (xx, yz, zy) = sample3(&s, 31);
        let (value, stderr) = estimate_pair_projector(&xx, &yz, &zy, &g, pair).unwrap();
        assert!((value - 0.25).abs() < 4.0 * stderr, "{value} (se {stderr})");
        // Map covers every pair.
        let map = build_pair_map(&xx, &yz, &zy, &g).unwrap();
        assert_eq!(map.entries.len(), 4);
        // Wrong setting order rejected.
        assert!(matches!(
            estimate_pair_projector(&yz, &xx, &zy, &g, pair),
            Err(Error::SettingMismatch { .. })
        ));
    }

    #[test]
    fn map_json_csv_roundtrip() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        let (ba, bb) = two_batches(&g, &s, 100, 1);
        let map = build_map(
            &ba,
            &bb,
            &g,
            RegionKind::Alpha,
            enumerate_regions(&g, RegionKind::Alpha),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let jpath = dir.path().join("map.json");
        map.write_json(&jpath).unwrap();
        let back = WitnessMap::read_json(&jpath).unwrap();
        assert_eq!(back, map);
        let text = std::fs::read_to_string(&jpath).unwrap();
        assert!(text.contains("\"source\":\"sampled\""));
        let cpath = dir.path().join("map.csv");
        map.write_csv(&cpath).unwrap();
        let csv = std::fs::read_to_string(&cpath).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("kind,centroid_x,centroid_y,value,stderr"));
        assert_eq!(lines.count(), map.entries.len());
    }
}
