//! Shot file format: one newline-terminated JSON header line, then raw
//! bit-packed rows.
//!
//! Each row is ceil(n_sites/8) bytes, little-endian bit order within a
//! byte (site k of the row lives in byte k/8, bit k%8). Bit value 0 means
//! outcome +1, bit value 1 means outcome -1. Column order is the header's
//! `site_order`.

use crate::error::{Error, Result};
use crate::sampler::{ShotBatch, ShotHeader};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub fn write_shot_file(path: &Path, batch: &ShotBatch) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &batch.header)?;
    w.write_all(b"\n")?;
    w.write_all(batch.raw_rows())?;
    w.flush()?;
    Ok(())
}

pub fn read_shot_file(path: &Path) -> Result<ShotBatch> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte)? {
            0 => {
                return Err(Error::MalformedShotFile(
                    "missing newline after header".into(),
                ))
            }
            _ if byte[0] == b'\n' => break,
            _ => header_line.push(byte[0]),
        }
    }
    let header: ShotHeader = serde_json::from_slice(&header_line)
        .map_err(|e| Error::MalformedShotFile(format!("bad header: {e}")))?;
    if header.site_order.len() != header.n_sites as usize {
        return Err(Error::MalformedShotFile(format!(
            "site_order has {} entries but n_sites is {}",
            header.site_order.len(),
            header.n_sites
        )));
    }
    let row_bytes = (header.n_sites as usize).div_ceil(8);
    let expected = row_bytes
        .checked_mul(header.n_shots as usize)
        .ok_or_else(|| Error::MalformedShotFile("row payload overflows".into()))?;
    let mut rows = Vec::with_capacity(expected);
    r.read_to_end(&mut rows)?;
    if rows.len() != expected {
        return Err(Error::MalformedShotFile(format!(
            "expected {expected} payload bytes, found {}",
            rows.len()
        )));
    }
    Ok(ShotBatch::from_parts(header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};
    use crate::noise::NoiseScenario;
    use crate::sampler::{sample, MeasurementSetting};
    use std::io::Write as _;

    #[test]
    fn roundtrip() {
        let g = build_lattice(LatticeKind::Honeycomb, 3, 2, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        let batch = sample(&g, &s, MeasurementSetting::SB, 17, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shots.bin");
        write_shot_file(&path, &batch).unwrap();
        let back = read_shot_file(&path).unwrap();
        assert_eq!(back, batch);
    }

    #[test]
    fn layout_is_header_line_plus_packed_rows() {
        let g = build_lattice(LatticeKind::Pairs, 5, 1, &[]).unwrap(); // 10 sites -> 2 bytes/row
        let s = NoiseScenario::identity(&g);
        let batch = sample(&g, &s, MeasurementSetting::PairXX, 3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shots.bin");
        write_shot_file(&path, &batch).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let nl = bytes.iter().position(|b| *b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
        assert_eq!(header["setting"], "PAIR_XX");
        assert_eq!(header["n_sites"], 10);
        assert_eq!(bytes.len() - nl - 1, 3 * 2);
        // Bit/site correspondence: byte k/8, bit k%8, 0 <=> +1.
        let row0 = &bytes[nl + 1..nl + 3];
        for idx in 0..10usize {
            let bit = row0[idx / 8] >> (idx % 8) & 1;
            let expect = if batch.outcome(0, idx) == 1 { 0 } else { 1 };
            assert_eq!(bit, expect, "site {idx}");
        }
    }

    #[test]
    fn truncated_and_malformed_files_rejected() {
        let g = build_lattice(LatticeKind::Honeycomb, 2, 2, &[]).unwrap();
        let s = NoiseScenario::identity(&g);
        let batch = sample(&g, &s, MeasurementSetting::SA, 5, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let path = dir.path().join("truncated.bin");
        write_shot_file(&path, &batch).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(
            read_shot_file(&path),
            Err(Error::MalformedShotFile(_))
        ));

        let path = dir.path().join("noheader.bin");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(b"{not json}\n\x00\x00").unwrap();
        drop(f);
        assert!(matches!(
            read_shot_file(&path),
            Err(Error::MalformedShotFile(_))
        ));
    }
}
