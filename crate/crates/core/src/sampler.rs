//! Monte Carlo measurement records for the two graph-state settings and
//! the three dimer settings, exactly reproducing the noisy state's
//! outcome statistics for the measured observables.
//!
//! Graph settings use a latent-variable construction. For S_A (X on
//! sublattice A, Z on B; S_B is the mirror): draw a uniform latent sign
//! z_j for every Z-basis site, set each X-basis outcome to the parity of
//! its neighbors' latents (the ideal graph-state constraint), then apply
//! the Pauli-fied channels in the fixed order gate -> dephasing ->
//! depolarizing -> reset. A reset replaces the *reported* value (Z basis:
//! +1, X basis: fresh uniform) while neighbors' parities keep the latent,
//! which reproduces the reduced statistics of the traced-out qubit.
//!
//! Randomness is counter-based: every draw is a pure function of
//! (seed, shot, purpose, entity), so batches are bit-identical regardless
//! of how shots are distributed over threads.

use crate::error::{Error, Result};
use crate::lattice::{LatticeDescriptor, LatticeGraph, LatticeKind, SiteId, Sublattice};
use crate::noise::{pauliize, ChannelDescriptor, NoiseScenario};
use crate::pauli::PauliLetter;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One simultaneous single-setting measurement basis assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementSetting {
    /// X on sublattice A, Z on B.
    #[serde(rename = "S_A")]
    SA,
    /// Z on sublattice A, X on B.
    #[serde(rename = "S_B")]
    SB,
    /// X on both members of every dimer.
    #[serde(rename = "PAIR_XX")]
    PairXX,
    /// Y on the A member, Z on the B member.
    #[serde(rename = "PAIR_YZ")]
    PairYZ,
    /// Z on the A member, Y on the B member.
    #[serde(rename = "PAIR_ZY")]
    PairZY,
}

impl MeasurementSetting {
    pub fn label(self) -> &'static str {
        match self {
            MeasurementSetting::SA => "S_A",
            MeasurementSetting::SB => "S_B",
            MeasurementSetting::PairXX => "PAIR_XX",
            MeasurementSetting::PairYZ => "PAIR_YZ",
            MeasurementSetting::PairZY => "PAIR_ZY",
        }
    }

    /// Measured Pauli letter on each sublattice.
    pub fn basis(self, sublattice: Sublattice) -> PauliLetter {
        use MeasurementSetting::*;
        match (self, sublattice) {
            (SA, Sublattice::A) | (SB, Sublattice::B) => PauliLetter::X,
            (SA, Sublattice::B) | (SB, Sublattice::A) => PauliLetter::Z,
            (PairXX, _) => PauliLetter::X,
            (PairYZ, Sublattice::A) => PauliLetter::Y,
            (PairYZ, Sublattice::B) => PauliLetter::Z,
            (PairZY, Sublattice::A) => PauliLetter::Z,
            (PairZY, Sublattice::B) => PauliLetter::Y,
        }
    }

    pub fn is_pair_setting(self) -> bool {
        matches!(
            self,
            MeasurementSetting::PairXX | MeasurementSetting::PairYZ | MeasurementSetting::PairZY
        )
    }
}

impl std::fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl std::str::FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<MeasurementSetting> {
        match s {
            "S_A" => Ok(MeasurementSetting::SA),
            "S_B" => Ok(MeasurementSetting::SB),
            "PAIR_XX" => Ok(MeasurementSetting::PairXX),
            "PAIR_YZ" => Ok(MeasurementSetting::PairYZ),
            "PAIR_ZY" => Ok(MeasurementSetting::PairZY),
            other => Err(Error::InvalidConfig(format!(
                "unknown measurement setting {other:?}"
            ))),
        }
    }
}

/// Provenance header of a shot batch; also the JSON first line of shot
/// files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotHeader {
    pub version: String,
    pub lattice: LatticeDescriptor,
    pub scenario_digest: String,
    pub setting: MeasurementSetting,
    pub n_shots: u64,
    pub n_sites: u32,
    pub seed: u64,
    pub site_order: Vec<SiteId>,
}

/// Measurement outcomes of one setting: n_shots rows of +-1 per site,
/// bit-packed (bit 0 <=> outcome +1), columns in canonical site order.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotBatch {
    pub header: ShotHeader,
    pub(crate) rows: Vec<u8>,
    pub(crate) row_bytes: usize,
}

impl ShotBatch {
    pub fn n_shots(&self) -> u64 {
        self.header.n_shots
    }

    pub fn n_sites(&self) -> usize {
        self.header.n_sites as usize
    }

    pub fn row_bytes(&self) -> usize {
        self.row_bytes
    }

    pub fn row(&self, shot: usize) -> &[u8] {
        &self.rows[shot * self.row_bytes..(shot + 1) * self.row_bytes]
    }

    pub(crate) fn raw_rows(&self) -> &[u8] {
        &self.rows
    }

    pub(crate) fn from_parts(header: ShotHeader, rows: Vec<u8>) -> ShotBatch {
        let row_bytes = (header.n_sites as usize).div_ceil(8);
        debug_assert_eq!(rows.len(), row_bytes * header.n_shots as usize);
        ShotBatch {
            header,
            rows,
            row_bytes,
        }
    }

    /// Outcome (+1/-1) of one site in one shot.
    pub fn outcome(&self, shot: usize, site_idx: usize) -> i8 {
        let byte = self.row(shot)[site_idx / 8];
        if byte >> (site_idx % 8) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

// Purpose tags of the counter-based RNG streams.
const D_LATENT: u32 = 0;
const D_GATE: u32 = 1;
const D_DEPHASE: u32 = 2;
const D_DEPOL_TRIG: u32 = 3;
const D_DEPOL_VAL: u32 = 4;
const D_RESET_TRIG: u32 = 5;
const D_RESET_VAL: u32 = 6;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-shot counter RNG: each draw is keyed by (purpose, entity) on top
/// of a mixed (seed, shot) base. No sequential state.
#[derive(Clone, Copy)]
struct ShotRng {
    base: u64,
}

impl ShotRng {
    fn new(seed: u64, shot: u64) -> ShotRng {
        ShotRng {
            base: splitmix(seed ^ splitmix(shot.wrapping_mul(0xA24B_AED4_963E_E407))),
        }
    }

    #[inline]
    fn raw(&self, purpose: u32, entity: u32) -> u64 {
        let key = ((purpose as u64) << 32 | entity as u64).wrapping_mul(0x9FB2_1C65_1E98_DF25);
        splitmix(self.base ^ key)
    }

    /// Uniform in [0, 1).
    #[inline]
    fn uniform(&self, purpose: u32, entity: u32) -> f64 {
        (self.raw(purpose, entity) >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform outcome bit: 0 <=> +1, 1 <=> -1.
    #[inline]
    fn bit(&self, purpose: u32, entity: u32) -> u8 {
        (self.raw(purpose, entity) >> 63) as u8
    }
}

fn make_header(
    graph: &LatticeGraph,
    scenario: &NoiseScenario,
    setting: MeasurementSetting,
    n_shots: u64,
    seed: u64,
) -> ShotHeader {
    let lattice = graph.descriptor();
    ShotHeader {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_digest: scenario.digest(&lattice),
        lattice,
        setting,
        n_shots,
        n_sites: graph.site_count() as u32,
        seed,
        site_order: graph.sites().to_vec(),
    }
}

/// Generate a shot batch for one graph-state setting (S_A or S_B).
pub fn sample(
    graph: &LatticeGraph,
    scenario: &NoiseScenario,
    setting: MeasurementSetting,
    n_shots: u64,
    seed: u64,
) -> Result<ShotBatch> {
    if setting.is_pair_setting() {
        return sample_pairs(graph, scenario, setting, n_shots, seed);
    }
    if graph.kind() == LatticeKind::Pairs {
        return Err(Error::SettingMismatch {
            setting: setting.to_string(),
            context: "pairs lattice (use the PAIR_* settings)".into(),
        });
    }
    if n_shots == 0 {
        return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
    }
    let desc = pauliize(graph, scenario);
    let header = make_header(graph, scenario, setting, n_shots, seed);
    let measured = match setting {
        MeasurementSetting::SA => Sublattice::A,
        _ => Sublattice::B,
    };

    let n = graph.site_count();
    let row_bytes = n.div_ceil(8);
    let mut rows = vec![0u8; row_bytes * n_shots as usize];
    rows.par_chunks_mut(row_bytes)
        .enumerate()
        .for_each(|(shot, row)| {
            let rng = ShotRng::new(seed, shot as u64);
            sample_graph_shot(graph, &desc, measured, &rng, row);
        });
    Ok(ShotBatch::from_parts(header, rows))
}

fn sample_graph_shot(
    graph: &LatticeGraph,
    desc: &ChannelDescriptor,
    measured: Sublattice,
    rng: &ShotRng,
    row: &mut [u8],
) {
    let n = graph.site_count();
    // Latent signs of the Z-basis sublattice, as bits (0 <=> +1).
    let mut latent = vec![0u8; n];
    for i in 0..n {
        if graph.site(i).basis != measured {
            latent[i] = rng.bit(D_LATENT, i as u32);
        }
    }
    for i in 0..n {
        let site = graph.site(i);
        let mut bit;
        if site.basis == measured {
            // X-basis outcome: parity of neighbor latents.
            bit = 0u8;
            for &j in graph.neighbor_indices(i) {
                bit ^= latent[j as usize];
            }
            // Gate errors flip the anticommuting (X-basis) endpoint.
            for &e in graph.edges_at(i) {
                let q = desc.edge_flip(e as usize);
                if q > 0.0 && rng.uniform(D_GATE, e) < q {
                    bit ^= 1;
                }
            }
            let p = desc.dephase_flip(i);
            if p > 0.0 && rng.uniform(D_DEPHASE, i as u32) < p {
                bit ^= 1;
            }
            let p = desc.depol(i);
            if p > 0.0 && rng.uniform(D_DEPOL_TRIG, i as u32) < p {
                bit = rng.bit(D_DEPOL_VAL, i as u32);
            }
            let r = desc.reset_weight(i);
            if r > 0.0 && rng.uniform(D_RESET_TRIG, i as u32) < r {
                bit = rng.bit(D_RESET_VAL, i as u32);
            }
        } else {
            // Z-basis outcome: report the latent, then noise. Dephasing
            // and gate errors commute with Z and do nothing here.
            bit = latent[i];
            let p = desc.depol(i);
            if p > 0.0 && rng.uniform(D_DEPOL_TRIG, i as u32) < p {
                bit = rng.bit(D_DEPOL_VAL, i as u32);
            }
            let r = desc.reset_weight(i);
            if r > 0.0 && rng.uniform(D_RESET_TRIG, i as u32) < r {
                bit = 0; // reset target is Z = +1
            }
        }
        row[i / 8] |= bit << (i % 8);
    }
}

/// Generate a shot batch for one dimer setting on a `pairs` lattice.
pub fn sample_pairs(
    graph: &LatticeGraph,
    scenario: &NoiseScenario,
    setting: MeasurementSetting,
    n_shots: u64,
    seed: u64,
) -> Result<ShotBatch> {
    if !setting.is_pair_setting() {
        return Err(Error::SettingMismatch {
            setting: setting.to_string(),
            context: "sample_pairs (use S_A/S_B for graph settings)".into(),
        });
    }
    if graph.kind() != LatticeKind::Pairs {
        return Err(Error::SettingMismatch {
            setting: setting.to_string(),
            context: format!("{} lattice", graph.kind()),
        });
    }
    if n_shots == 0 {
        return Err(Error::InvalidConfig("n_shots must be at least 1".into()));
    }
    let desc = pauliize(graph, scenario);
    let header = make_header(graph, scenario, setting, n_shots, seed);

    // Resolve pairs to (site index, edge index) once.
    let pairs: Vec<(usize, usize, usize)> = graph
        .pair_list()?
        .into_iter()
        .map(|(a, b)| {
            let ia = graph.site_index(a).unwrap();
            let ib = graph.site_index(b).unwrap();
            let e = graph.edges_at(ia)[0] as usize;
            (ia, ib, e)
        })
        .collect();
    let letter_a = setting.basis(Sublattice::A);
    let letter_b = setting.basis(Sublattice::B);

    let n = graph.site_count();
    let row_bytes = n.div_ceil(8);
    let mut rows = vec![0u8; row_bytes * n_shots as usize];
    rows.par_chunks_mut(row_bytes)
        .enumerate()
        .for_each(|(shot, row)| {
            let rng = ShotRng::new(seed, shot as u64);
            for &(ia, ib, e) in &pairs {
                // Measured dimer stabilizer is +1: correlated uniform pair.
                let common = rng.bit(D_LATENT, ia as u32);
                let mut bits = [common, common];
                // One gate-error event flips every anticommuting member.
                let q = desc.edge_flip(e);
                if q > 0.0 && rng.uniform(D_GATE, e as u32) < q {
                    if letter_a.anticommutes_with_z() {
                        bits[0] ^= 1;
                    }
                    if letter_b.anticommutes_with_z() {
                        bits[1] ^= 1;
                    }
                }
                for (k, (idx, letter)) in [(ia, letter_a), (ib, letter_b)].into_iter().enumerate()
                {
                    let i = idx as u32;
                    if letter.anticommutes_with_z() {
                        let p = desc.dephase_flip(idx);
                        if p > 0.0 && rng.uniform(D_DEPHASE, i) < p {
                            bits[k] ^= 1;
                        }
                    }
                    let p = desc.depol(idx);
                    if p > 0.0 && rng.uniform(D_DEPOL_TRIG, i) < p {
                        bits[k] = rng.bit(D_DEPOL_VAL, i);
                    }
                    let r = desc.reset_weight(idx);
                    if r > 0.0 && rng.uniform(D_RESET_TRIG, i) < r {
                        bits[k] = if letter.anticommutes_with_z() {
                            rng.bit(D_RESET_VAL, i)
                        } else {
                            0
                        };
                    }
                    row[idx / 8] |= bits[k] << (idx % 8);
                }
            }
        });
    Ok(ShotBatch::from_parts(header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::noise::{build_scenario, sinc, FieldSpec, ScenarioConfig};

    fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64, u64) {
        let mut n = 0u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for v in values {
            n += 1;
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0) * n as f64 / (n - 1) as f64;
        (mean, (var / n as f64).sqrt(), n)
    }

    /// Measured stabilizer outcome of `site` in one shot.
    fn g_outcome(graph: &LatticeGraph, batch: &ShotBatch, shot: usize, site: SiteId) -> f64 {
        let i = graph.site_index(site).unwrap();
        let mut v = batch.outcome(shot, i) as f64;
        for &j in graph.neighbor_indices(i) {
            v *= batch.outcome(shot, j as usize) as f64;
        }
        v
    }

    #[test]
    fn identity_scenario_satisfies_all_constraints() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        for (setting, measured) in [
            (MeasurementSetting::SA, Sublattice::A),
            (MeasurementSetting::SB, Sublattice::B),
        ] {
            let batch = sample(&g, &s, setting, 200, 7).unwrap();
            for shot in 0..200 {
                for site in g.sites().iter().filter(|s| s.basis == measured) {
                    assert_eq!(g_outcome(&g, &batch, shot, *site), 1.0);
                }
            }
        }
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let g = build_lattice(LatticeKind::Honeycomb, 4, 4, &[]).unwrap();
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(0.3),
            depolarizing: FieldSpec::uniform(0.1),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let b1 = sample(&g, &s, MeasurementSetting::SA, 300, 42).unwrap();
        let b2 = sample(&g, &s, MeasurementSetting::SA, 300, 42).unwrap();
        assert_eq!(b1, b2);
        let b3 = sample(&g, &s, MeasurementSetting::SA, 300, 43).unwrap();
        assert_ne!(b1.raw_rows(), b3.raw_rows());
        // Single-threaded run is bit-identical to the parallel one.
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b4 = pool.install(|| sample(&g, &s, MeasurementSetting::SA, 300, 42).unwrap());
        assert_eq!(b1, b4);
    }

    #[test]
    fn hole_breaks_neighbor_stabilizer() {
        let hole = SiteId::b(1, 1);
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[hole]).unwrap();
        let s = NoiseScenario::identity(&g);
        let n_shots = 100_000u64;
        let batch = sample(&g, &s, MeasurementSetting::SA, n_shots, 11).unwrap();
        // Reported hole outcome is always +1 in the Z basis.
        let ih = g.site_index(hole).unwrap();
        for shot in 0..1000 {
            assert_eq!(batch.outcome(shot, ih), 1);
        }
        // The stabilizer of a neighbor of the hole averages to zero.
        let nb = g.neighbors_of(hole).next().unwrap();
        let (mean, se, _) =
            mean_and_se((0..n_shots as usize).map(|t| g_outcome(&g, &batch, t, nb)));
        assert!(mean.abs() < 4.0 * se, "mean {mean} se {se}");
        // A far-away stabilizer is untouched.
        let far = SiteId::a(0, 0);
        let (mean, _, _) =
            mean_and_se((0..n_shots as usize).map(|t| g_outcome(&g, &batch, t, far)));
        assert_eq!(mean, 1.0);
    }

    #[test]
    fn dephasing_attenuates_sampled_stabilizers() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let eps = 0.4f64;
        let config = ScenarioConfig {
            dephasing: FieldSpec::uniform(eps),
            ..Default::default()
        };
        let s = build_scenario(&g, &config).unwrap();
        let n_shots = 100_000u64;
        let batch = sample(&g, &s, MeasurementSetting::SA, n_shots, 5).unwrap();
        let expect = sinc(2.0 * eps);
        for site in [SiteId::a(1, 1), SiteId::a(0, 0)] {
            let (mean, se, _) =
                mean_and_se((0..n_shots as usize).map(|t| g_outcome(&g, &batch, t, site)));
            assert!(
                (mean - expect).abs() < 4.0 * se,
                "{site}: {mean} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn pair_settings_ideal_and_noisy() {
        let g = build_lattice(LatticeKind::Pairs, 3, 1, &[]).unwrap();
        let ident = NoiseScenario::identity(&g);
        for setting in [
            MeasurementSetting::PairXX,
            MeasurementSetting::PairYZ,
            MeasurementSetting::PairZY,
        ] {
            let batch = sample_pairs(&g, &ident, setting, 500, 3).unwrap();
            for (a, b) in g.pair_list().unwrap() {
                let ia = g.site_index(a).unwrap();
                let ib = g.site_index(b).unwrap();
                for shot in 0..500 {
                    assert_eq!(
                        batch.outcome(shot, ia) * batch.outcome(shot, ib),
                        1,
                        "{setting} shot {shot}"
                    );
                }
            }
        }
        // Depolarizing one member attenuates the product mean to 1-p.
        let p = 0.4;
        let mut s = ident.clone();
        let (a0, b0) = g.pair_list().unwrap()[0];
        s.depol_p.insert(a0, p);
        let n_shots = 100_000u64;
        let batch = sample_pairs(&g, &s, MeasurementSetting::PairXX, n_shots, 9).unwrap();
        let ia = g.site_index(a0).unwrap();
        let ib = g.site_index(b0).unwrap();
        let (mean, se, _) = mean_and_se(
            (0..n_shots as usize)
                .map(|t| (batch.outcome(t, ia) * batch.outcome(t, ib)) as f64),
        );
        assert!((mean - (1.0 - p)).abs() < 4.0 * se, "{mean} (se {se})");
    }

    #[test]
    fn setting_lattice_mismatch_rejected() {
        let pairs = build_lattice(LatticeKind::Pairs, 2, 1, &[]).unwrap();
        let honey = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let sp = NoiseScenario::identity(&pairs);
        let sh = NoiseScenario::identity(&honey);
        assert!(matches!(
            sample(&pairs, &sp, MeasurementSetting::SA, 10, 0),
            Err(Error::SettingMismatch { .. })
        ));
        assert!(matches!(
            sample_pairs(&honey, &sh, MeasurementSetting::PairXX, 10, 0),
            Err(Error::SettingMismatch { .. })
        ));
        // sample() dispatches pair settings to sample_pairs.
        assert!(sample(&pairs, &sp, MeasurementSetting::PairYZ, 10, 0).is_ok());
    }

    #[test]
    fn header_provenance() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[SiteId::a(1, 1)]).unwrap();
        let s = NoiseScenario::identity(&g);
        let batch = sample(&g, &s, MeasurementSetting::SA, 10, 123).unwrap();
        assert_eq!(batch.header.setting, MeasurementSetting::SA);
        assert_eq!(batch.header.n_shots, 10);
        assert_eq!(batch.header.seed, 123);
        assert_eq!(batch.header.n_sites, 8);
        assert_eq!(batch.header.site_order, g.sites());
        assert_eq!(batch.header.scenario_digest, s.digest(&g.descriptor()));
    }
}
