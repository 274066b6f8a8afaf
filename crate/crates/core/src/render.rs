//! Witness map rendering to binary PPM (P6) heatmaps.
//!
//! Each region is painted as a filled disk at its centroid (alpha:
//! edge midpoints, beta: center sites, gamma: plaquette centers) on a
//! white canvas at 24 pixels per lattice unit. Diverging palette:
//! -clamp maps to pure red (255,0,0), 0 to white, +clamp to pure blue
//! (0,0,255), linear in between, values clamped. Defect-adjacent regions
//! get a black outline ring.

use crate::error::{Error, Result};
use crate::estimator::WitnessMap;
use std::io::Write;
use std::path::Path;

pub const PIXELS_PER_UNIT: f64 = 24.0;
const MARGIN_UNITS: f64 = 1.0;
const DISK_RADIUS: f64 = 8.0;
const RING_WIDTH: f64 = 2.5;

#[derive(Clone, Debug)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl PpmImage {
    fn blank(width: usize, height: usize) -> PpmImage {
        PpmImage {
            width,
            height,
            pixels: vec![[255, 255, 255]; width * height],
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    fn fill_disk(&mut self, cx: f64, cy: f64, radius: f64, color: [u8; 3]) {
        let x0 = (cx - radius).floor().max(0.0) as usize;
        let x1 = (cx + radius).ceil().min(self.width as f64 - 1.0) as usize;
        let y0 = (cy - radius).floor().max(0.0) as usize;
        let y1 = (cy + radius).ceil().min(self.height as f64 - 1.0) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= radius * radius {
                    self.pixels[y * self.width + x] = color;
                }
            }
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(f, "P6\n{} {}\n255\n", self.width, self.height)?;
        for p in &self.pixels {
            f.write_all(p)?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Diverging red-white-blue palette, linear in the clamped value.
pub fn palette(value: f64, clamp: f64) -> [u8; 3] {
    let v = value.clamp(-clamp, clamp) / clamp; // -1 ..= 1
    let ramp = |t: f64| (255.0 * t).round().clamp(0.0, 255.0) as u8;
    if v <= 0.0 {
        // red -> white
        let t = v + 1.0;
        [255, ramp(t), ramp(t)]
    } else {
        // white -> blue
        let t = 1.0 - v;
        [ramp(t), ramp(t), 255]
    }
}

/// Render a witness map. `clamp` sets the value mapped to full
/// saturation (0.5 paints -1/2 pure red).
pub fn render_map(map: &WitnessMap, clamp: f64) -> Result<PpmImage> {
    if map.entries.is_empty() {
        return Err(Error::InvalidConfig("cannot render an empty map".into()));
    }
    let xs = map.entries.iter().map(|e| e.centroid.0);
    let ys = map.entries.iter().map(|e| e.centroid.1);
    let min_x = xs.clone().fold(f64::MAX, f64::min) - MARGIN_UNITS;
    let max_x = xs.fold(f64::MIN, f64::max) + MARGIN_UNITS;
    let min_y = ys.clone().fold(f64::MAX, f64::min) - MARGIN_UNITS;
    let max_y = ys.fold(f64::MIN, f64::max) + MARGIN_UNITS;
    let width = ((max_x - min_x) * PIXELS_PER_UNIT).ceil() as usize + 1;
    let height = ((max_y - min_y) * PIXELS_PER_UNIT).ceil() as usize + 1;
    let mut img = PpmImage::blank(width, height);
    // Image rows run top-down; lattice y runs bottom-up.
    let to_px = |x: f64, y: f64| {
        (
            (x - min_x) * PIXELS_PER_UNIT,
            (max_y - y) * PIXELS_PER_UNIT,
        )
    };
    for e in &map.entries {
        let (cx, cy) = to_px(e.centroid.0, e.centroid.1);
        if e.defect_adjacent {
            img.fill_disk(cx, cy, DISK_RADIUS + RING_WIDTH, [0, 0, 0]);
        }
        img.fill_disk(cx, cy, DISK_RADIUS, palette(e.w_hat, clamp));
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_witness_map, GateErrorModel};
    use crate::lattice::{build_lattice, enumerate_regions, LatticeKind, RegionKind, SiteId};
    use crate::noise::{pauliize, NoiseScenario};

    #[test]
    fn palette_endpoints() {
        assert_eq!(palette(-0.5, 0.5), [255, 0, 0]);
        assert_eq!(palette(0.0, 0.5), [255, 255, 255]);
        assert_eq!(palette(0.5, 0.5), [0, 0, 255]);
        assert_eq!(palette(-2.0, 0.5), [255, 0, 0]); // clamped
        assert_eq!(palette(-0.25, 0.5), [255, 128, 128]);
    }

    #[test]
    fn perfect_map_paints_only_red() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[]).unwrap();
        let desc = pauliize(&g, &NoiseScenario::identity(&g));
        let map = analytic_witness_map(
            &g,
            &desc,
            &enumerate_regions(&g, RegionKind::Alpha),
            RegionKind::Alpha,
            true,
            GateErrorModel::SincAverage,
        );
        let img = render_map(&map, 0.5).unwrap();
        let mut painted = 0usize;
        for p in &img.pixels {
            if *p != [255, 255, 255] {
                assert_eq!(*p, [255, 0, 0]);
                painted += 1;
            }
        }
        assert!(painted > 0);
    }

    #[test]
    fn defect_ring_appears() {
        let hole = SiteId::a(1, 1);
        let g = build_lattice(LatticeKind::Honeycomb, 3, 3, &[hole]).unwrap();
        let desc = pauliize(&g, &NoiseScenario::identity(&g));
        let map = analytic_witness_map(
            &g,
            &desc,
            &enumerate_regions(&g, RegionKind::Alpha),
            RegionKind::Alpha,
            true,
            GateErrorModel::SincAverage,
        );
        let img = render_map(&map, 0.5).unwrap();
        assert!(img.pixels.iter().any(|p| *p == [0, 0, 0]));
    }

    #[test]
    fn ppm_header_and_size() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let desc = pauliize(&g, &NoiseScenario::identity(&g));
        let map = analytic_witness_map(
            &g,
            &desc,
            &enumerate_regions(&g, RegionKind::Alpha),
            RegionKind::Alpha,
            true,
            GateErrorModel::SincAverage,
        );
        let img = render_map(&map, 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.ppm");
        img.write(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = format!("P6\n{} {}\n255\n", img.width, img.height);
        assert!(bytes.starts_with(header.as_bytes()));
        assert_eq!(bytes.len(), header.len() + 3 * img.width * img.height);
    }

    #[test]
    fn empty_map_rejected() {
        let g = build_lattice(LatticeKind::Chain, 2, 1, &[]).unwrap();
        let desc = pauliize(&g, &NoiseScenario::identity(&g));
        let map = analytic_witness_map(
            &g,
            &desc,
            &[],
            RegionKind::Gamma,
            true,
            GateErrorModel::SincAverage,
        );
        assert!(render_map(&map, 0.5).is_err());
    }
}
