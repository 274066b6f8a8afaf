//! Threshold scans: witness value of a representative interior region
//! versus a uniform single-channel noise parameter, with zero-crossing
//! extraction.

use crate::analytic::{exact_region_bound, GateErrorModel};
use crate::error::{Error, Result};
use crate::estimator::estimate_region;
use crate::lattice::{enumerate_regions, LatticeGraph, RegionKind, RegionSpec};
use crate::noise::{build_scenario, pauliize, FieldSpec, ScenarioConfig};
use crate::sampler::{sample, MeasurementSetting};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanChannel {
    Dephasing,
    GateError,
    Loss,
    SpontEmission,
    Depolarizing,
}

impl ScanChannel {
    pub fn label(self) -> &'static str {
        match self {
            ScanChannel::Dephasing => "dephasing",
            ScanChannel::GateError => "gate_error",
            ScanChannel::Loss => "loss",
            ScanChannel::SpontEmission => "spont_emission",
            ScanChannel::Depolarizing => "depolarizing",
        }
    }

    pub fn uniform_config(self, value: f64) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        let f = FieldSpec::uniform(value);
        match self {
            ScanChannel::Dephasing => c.dephasing = f,
            ScanChannel::GateError => c.gate_error = f,
            ScanChannel::Loss => c.loss = f,
            ScanChannel::SpontEmission => c.spont_emission = f,
            ScanChannel::Depolarizing => c.depolarizing = f,
        }
        c
    }
}

impl std::str::FromStr for ScanChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScanChannel> {
        match s {
            "dephasing" => Ok(ScanChannel::Dephasing),
            "gate_error" => Ok(ScanChannel::GateError),
            "loss" => Ok(ScanChannel::Loss),
            "spont_emission" => Ok(ScanChannel::SpontEmission),
            "depolarizing" => Ok(ScanChannel::Depolarizing),
            other => Err(Error::InvalidConfig(format!(
                "unknown channel {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub kind: RegionKind,
    pub parameter: f64,
    pub w_analytic: f64,
    pub w_sampled: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub channel: ScanChannel,
    pub points: Vec<ScanPoint>,
    /// Zero crossing of the analytic witness per region kind, by linear
    /// interpolation between grid points; None when no sign change.
    pub crossings: Vec<(RegionKind, Option<f64>)>,
}

/// The scanned region of each kind: the one whose centroid is closest to
/// the lattice centroid, i.e. a bulk region with full-degree stabilizers.
pub fn representative_region(graph: &LatticeGraph, kind: RegionKind) -> Option<RegionSpec> {
    let regions = enumerate_regions(graph, kind);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..graph.site_count() {
        let (x, y) = graph.position_by_index(i);
        cx += x;
        cy += y;
    }
    cx /= graph.site_count() as f64;
    cy /= graph.site_count() as f64;
    regions.into_iter().min_by(|a, b| {
        let da = (a.centroid.0 - cx).hypot(a.centroid.1 - cy);
        let db = (b.centroid.0 - cx).hypot(b.centroid.1 - cy);
        da.total_cmp(&db)
    })
}

/// Scan a uniform single-channel scenario over `grid`, reporting the
/// analytic and sampled witness of the representative region per kind.
pub fn threshold_scan(
    graph: &LatticeGraph,
    kinds: &[RegionKind],
    channel: ScanChannel,
    grid: &[f64],
    n_shots: u64,
    seed: u64,
    model: GateErrorModel,
) -> Result<ScanResult> {
    let mut points = Vec::new();
    let regions: Vec<(RegionKind, RegionSpec)> = kinds
        .iter()
        .filter_map(|k| representative_region(graph, *k).map(|r| (*k, r)))
        .collect();
    for (step, &value) in grid.iter().enumerate() {
        let scenario = build_scenario(graph, &channel.uniform_config(value))?;
        let desc = pauliize(graph, &scenario);
        let batch_a = sample(
            graph,
            &scenario,
            MeasurementSetting::SA,
            n_shots,
            seed.wrapping_add(2 * step as u64),
        )?;
        let batch_b = sample(
            graph,
            &scenario,
            MeasurementSetting::SB,
            n_shots,
            seed.wrapping_add(2 * step as u64 + 1),
        )?;
        for (kind, region) in &regions {
            let analytic = exact_region_bound(graph, &desc, region, model);
            let est = estimate_region(&batch_a, &batch_b, graph, region)?;
            points.push(ScanPoint {
                kind: *kind,
                parameter: value,
                w_analytic: analytic.witness,
                w_sampled: est.w_hat,
                stderr: est.stderr,
            });
        }
    }
    let crossings = regions
        .iter()
        .map(|(kind, _)| {
            let series: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.kind == *kind)
                .map(|p| (p.parameter, p.w_analytic))
                .collect();
            (*kind, zero_crossing(&series))
        })
        .collect();
    Ok(ScanResult {
        channel,
        points,
        crossings,
    })
}

/// First zero crossing of a sampled 1D function, by linear interpolation.
pub fn zero_crossing(series: &[(f64, f64)]) -> Option<f64> {
    for pair in series.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if y0 == 0.0 {
            return Some(x0);
        }
        if y0 < 0.0 && y1 >= 0.0 {
            return Some(x0 + (x1 - x0) * (-y0) / (y1 - y0));
        }
    }
    None
}

impl ScanResult {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "kind,parameter,w_analytic,w_sampled,stderr")?;
        for p in &self.points {
            writeln!(
                f,
                "{},{},{},{},{}",
                p.kind, p.parameter, p.w_analytic, p.w_sampled, p.stderr
            )?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn write_crossings_json(&self, path: &Path) -> Result<()> {
        let entries: Vec<serde_json::Value> = self
            .crossings
            .iter()
            .map(|(kind, x)| {
                serde_json::json!({
                    "kind": kind,
                    "channel": self.channel.label(),
                    "crossing": x,
                })
            })
            .collect();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut f, &entries)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};
    use crate::noise::sinc;

    #[test]
    fn zero_crossing_interpolation() {
        let series = [(0.0, -0.5), (1.0, -0.1), (2.0, 0.3)];
        let x = zero_crossing(&series).unwrap();
        assert!((x - 1.25).abs() < 1e-12);
        assert!(zero_crossing(&[(0.0, -0.5), (1.0, -0.4)]).is_none());
    }

    #[test]
    fn representative_region_is_interior() {
        let g = build_lattice(LatticeKind::Honeycomb, 6, 6, &[]).unwrap();
        for kind in [RegionKind::Alpha, RegionKind::Beta, RegionKind::Gamma] {
            let r = representative_region(&g, kind).unwrap();
            assert!(
                r.sites.iter().all(|s| g.degree(*s) == 3),
                "{kind:?} representative touches the boundary"
            );
        }
    }

    #[test]
    fn gate_error_crossing_matches_closed_form() {
        // Interior alpha: W = 1/2 - sinc(2 eps)^3 in derived mode.
        let g = build_lattice(LatticeKind::Honeycomb, 6, 6, &[]).unwrap();
        let grid: Vec<f64> = (0..=24).map(|k| k as f64 * 0.05).collect();
        let scan = threshold_scan(
            &g,
            &[RegionKind::Alpha],
            ScanChannel::GateError,
            &grid,
            400,
            9,
            GateErrorModel::SincAverage,
        )
        .unwrap();
        for p in &scan.points {
            let expect = 0.5 - sinc(2.0 * p.parameter).powi(3);
            assert!(
                (p.w_analytic - expect).abs() < 1e-12,
                "at {}: {} vs {}",
                p.parameter,
                p.w_analytic,
                expect
            );
        }
        let crossing = scan.crossings[0].1.unwrap();
        // sinc(2 eps*)^3 = 1/2 somewhere near 0.56.
        let expect_cross = {
            let series: Vec<(f64, f64)> = grid
                .iter()
                .map(|&e| (e, 0.5 - sinc(2.0 * e).powi(3)))
                .collect();
            zero_crossing(&series).unwrap()
        };
        assert!((crossing - expect_cross).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let scan = threshold_scan(
            &g,
            &[RegionKind::Alpha, RegionKind::Gamma],
            ScanChannel::Dephasing,
            &[0.0, 0.5],
            50,
            1,
            GateErrorModel::SincAverage,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        scan.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("kind,parameter,w_analytic,w_sampled,stderr")
        );
        assert_eq!(lines.count(), 4);
        // Dephasing 0 keeps the witness at -1/2 for all kinds.
        assert!(scan
            .points
            .iter()
            .filter(|p| p.parameter == 0.0)
            .all(|p| p.w_analytic == -0.5));
    }
}
