//! SBCSI1 binary dataset format and CSV import.
//!
//! All integers are little-endian.
//!
//! ```text
//! offset  size  field
//!      0     8  magic "SBCSI1\0\0"
//!      8     4  version (1)
//!     12     4  n_sta
//!     16     4  n_rx (per STA)
//!     20     4  n_tx
//!     24     4  n_sub
//!     28     8  n_samples
//!     36     8  seed (meaningful for synthetic provenance only)
//!     44     4  provenance (0 rayleigh, 1 clustered, 2 imported)
//!     48        samples
//! ```
//!
//! Each sample is `seq u64, timestamp u64` followed by
//! `n_sta * n_rx * n_tx * n_sub` complex values stored as `(re, im)` f32
//! pairs, ordered STA-major, then rx, tx, subcarrier.
//!
//! The header carries no stream count or bandwidth; on load the streams per
//! STA are `n_tx / n_sta` when that fits the receive antennas (else 1) and
//! the bandwidth is the one whose standard subcarrier count equals `n_sub`
//! (20 MHz otherwise).

use std::io::Read;
use std::path::Path;

use super::config::{Bandwidth, NetworkConfig};
use super::dataset::{CsiDataset, CsiTensor, Provenance};
use crate::error::{Error, Result};
use crate::tensor::Complex64;

pub const MAGIC: &[u8; 8] = b"SBCSI1\0\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

pub fn save(ds: &CsiDataset) -> Vec<u8> {
    let c = &ds.config;
    let per_sample = 16 + 8 * c.n_sta * c.entries_per_sta();
    let mut out = Vec::with_capacity(HEADER_LEN + per_sample * ds.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [c.n_sta, c.n_rx_per_sta, c.n_tx, c.n_subcarriers] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    out.extend_from_slice(&ds.seed.unwrap_or(0).to_le_bytes());
    out.extend_from_slice(&ds.provenance.code().to_le_bytes());
    for s in &ds.samples {
        out.extend_from_slice(&s.sequence_number.to_le_bytes());
        out.extend_from_slice(&s.timestamp_us.to_le_bytes());
        for sta in &s.h {
            for rx in 0..c.n_rx_per_sta {
                for tx in 0..c.n_tx {
                    for m in sta {
                        let z = m[(rx, tx)];
                        out.extend_from_slice(&(z.re as f32).to_le_bytes());
                        out.extend_from_slice(&(z.im as f32).to_le_bytes());
                    }
                }
            }
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.pos as u64,
                format!(
                    "truncated {what}: expected {n} bytes, {} available",
                    self.buf.len() - self.pos
                ),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn load(bytes: &[u8]) -> Result<CsiDataset> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let magic = cur.take(8, "magic")?;
    if magic != MAGIC {
        let bad = magic.iter().zip(MAGIC).position(|(a, b)| a != b).unwrap_or(0);
        return Err(Error::format(bad as u64, "bad magic, not an SBCSI1 file"));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::format(8, format!("unsupported version {version}")));
    }
    let n_sta = cur.u32("n_sta")? as usize;
    let n_rx = cur.u32("n_rx")? as usize;
    let n_tx = cur.u32("n_tx")? as usize;
    let n_sub = cur.u32("n_sub")? as usize;
    let n_samples = cur.u64("n_samples")?;
    let seed = cur.u64("seed")?;
    let prov_code = cur.u32("provenance")?;
    let provenance = Provenance::from_code(prov_code)
        .ok_or_else(|| Error::format(44, format!("unknown provenance code {prov_code}")))?;

    let n_ss = if n_sta > 0 && n_tx.is_multiple_of(n_sta) && n_tx / n_sta <= n_rx {
        n_tx / n_sta
    } else {
        1
    };
    let bandwidth = Bandwidth::from_subcarriers(n_sub).unwrap_or(Bandwidth::Mhz20);
    let config = NetworkConfig::new(n_sta, n_tx, n_rx, n_ss, n_sub, bandwidth)
        .map_err(|e| Error::format(12, format!("invalid dimensions: {e}")))?;

    let values_per_sample = n_sta * n_rx * n_tx * n_sub;
    let sample_len = 16 + 8 * values_per_sample;
    let expected = HEADER_LEN as u64 + sample_len as u64 * n_samples;
    if (bytes.len() as u64) < expected {
        let complete = (bytes.len() - HEADER_LEN) / sample_len;
        return Err(Error::format(
            (HEADER_LEN + complete * sample_len) as u64,
            format!(
                "truncated payload: expected {expected} bytes for {n_samples} samples, got {}",
                bytes.len()
            ),
        ));
    }
    if (bytes.len() as u64) > expected {
        return Err(Error::format(
            expected,
            format!("{} trailing bytes after the last sample", bytes.len() as u64 - expected),
        ));
    }

    let mut samples = Vec::with_capacity(n_samples as usize);
    for _ in 0..n_samples {
        let seq = cur.u64("sequence number")?;
        let ts = cur.u64("timestamp")?;
        let mut t = CsiTensor::zeros(&config, seq, ts);
        for sta in t.h.iter_mut() {
            for rx in 0..n_rx {
                for tx in 0..n_tx {
                    for m in sta.iter_mut() {
                        let at = cur.pos as u64;
                        let b = cur.take(8, "complex value")?;
                        let re = f32::from_le_bytes(b[..4].try_into().unwrap());
                        let im = f32::from_le_bytes(b[4..].try_into().unwrap());
                        if !re.is_finite() || !im.is_finite() {
                            return Err(Error::format(at, "non-finite CSI value"));
                        }
                        m[(rx, tx)] = Complex64::new(re as f64, im as f64);
                    }
                }
            }
        }
        samples.push(t);
    }
    let ds = CsiDataset {
        config,
        samples,
        provenance,
        seed: (provenance != Provenance::Imported).then_some(seed),
    };
    ds.validate()
        .map_err(|e| Error::format(HEADER_LEN as u64, e.to_string()))?;
    Ok(ds)
}

pub fn write_file(ds: &CsiDataset, path: &Path) -> Result<()> {
    std::fs::write(path, save(ds))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<CsiDataset> {
    load(&std::fs::read(path)?)
}

/// Imports CSI from CSV with header `seq,sta,rx,tx,sc,re,im`, one row per
/// complex entry. Dimensions are inferred from the largest indices; every
/// sequence number must supply every entry. Streams per STA default to 1.
pub fn import_csv<R: Read>(reader: R) -> Result<CsiDataset> {
    #[derive(serde::Deserialize)]
    struct Row {
        seq: u64,
        sta: usize,
        rx: usize,
        tx: usize,
        sc: usize,
        re: f64,
        im: f64,
    }

    let mut rows = Vec::new();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = rec.map_err(|e| Error::invalid(format!("csv row {}: {e}", line + 1)))?;
        if !row.re.is_finite() || !row.im.is_finite() {
            return Err(Error::invalid(format!("csv row {}: non-finite value", line + 1)));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("csv has no rows"));
    }
    let dim = |f: fn(&Row) -> usize| rows.iter().map(f).max().unwrap() + 1;
    let (n_sta, n_rx, n_tx, n_sub) = (dim(|r| r.sta), dim(|r| r.rx), dim(|r| r.tx), dim(|r| r.sc));
    let bandwidth = Bandwidth::from_subcarriers(n_sub).unwrap_or(Bandwidth::Mhz20);
    let config = NetworkConfig::new(n_sta, n_tx, n_rx, 1, n_sub, bandwidth)?;

    let mut by_seq: std::collections::BTreeMap<u64, (CsiTensor, Vec<bool>)> = Default::default();
    let per_sample = n_sta * n_rx * n_tx * n_sub;
    for r in &rows {
        let (t, seen) = by_seq
            .entry(r.seq)
            .or_insert_with(|| (CsiTensor::zeros(&config, r.seq, 0), vec![false; per_sample]));
        let flat = ((r.sta * n_rx + r.rx) * n_tx + r.tx) * n_sub + r.sc;
        if std::mem::replace(&mut seen[flat], true) {
            return Err(Error::invalid(format!(
                "duplicate entry seq={} sta={} rx={} tx={} sc={}",
                r.seq, r.sta, r.rx, r.tx, r.sc
            )));
        }
        t.h[r.sta][r.sc][(r.rx, r.tx)] = Complex64::new(r.re, r.im);
    }
    let mut samples = Vec::with_capacity(by_seq.len());
    for (seq, (t, seen)) in by_seq {
        let missing = seen.iter().filter(|s| !**s).count();
        if missing > 0 {
            return Err(Error::invalid(format!("sequence {seq} is missing {missing} entries")));
        }
        samples.push(t);
    }
    Ok(CsiDataset {
        config,
        samples,
        provenance: Provenance::Imported,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_rayleigh;

    fn sample_ds() -> CsiDataset {
        let cfg = NetworkConfig::symmetric(2, Bandwidth::Mhz20).unwrap();
        gen_rayleigh(&cfg, 3, 5).unwrap()
    }

    #[test]
    fn round_trip() {
        let ds = sample_ds();
        let back = load(&save(&ds)).unwrap();
        assert_eq!(back, ds.rounded_to_f32());
        assert_eq!(save(&back), save(&ds));
    }

    #[test]
    fn header_layout() {
        let bytes = save(&sample_ds());
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[36..44].try_into().unwrap()), 5);
        assert_eq!(bytes.len(), HEADER_LEN + 3 * (16 + 8 * 2 * 2 * 56));
    }

    #[test]
    fn bad_magic_at_offset_zero() {
        let mut bytes = save(&sample_ds());
        bytes[0] ^= 0xff;
        assert!(matches!(load(&bytes), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn truncated_names_lengths() {
        let bytes = save(&sample_ds());
        let err = load(&bytes[..bytes.len() - 5]).unwrap_err();
        match err {
            Error::Format { offset, message } => {
                assert_eq!(offset as usize, HEADER_LEN + 2 * (16 + 8 * 224));
                assert!(message.contains(&format!("expected {}", bytes.len())));
                assert!(message.contains(&format!("got {}", bytes.len() - 5)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nan_entry_rejected() {
        let mut bytes = save(&sample_ds());
        let at = HEADER_LEN + 16 + 8;
        bytes[at..at + 4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(load(&bytes), Err(Error::Format { offset, .. }) if offset as usize == at));
    }

    #[test]
    fn csv_import() {
        let mut text = String::from("seq,sta,rx,tx,sc,re,im\n");
        for seq in [4, 7] {
            for tx in 0..2 {
                for sc in 0..3 {
                    text.push_str(&format!("{seq},0,0,{tx},{sc},{},{}\n", tx as f64 + 0.5, sc as f64));
                }
            }
        }
        let ds = import_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.config.n_tx, 2);
        assert_eq!(ds.config.n_subcarriers, 3);
        assert_eq!(ds.samples[1].sequence_number, 7);
        assert_eq!(ds.samples[1].h[0][2][(0, 1)], Complex64::new(1.5, 2.0));
    }

    #[test]
    fn csv_incomplete_sample() {
        let text = "seq,sta,rx,tx,sc,re,im\n1,0,0,0,0,1,0\n1,0,0,1,0,1,0\n2,0,0,0,0,1,0\n";
        assert!(import_csv(text.as_bytes()).is_err());
    }
}
