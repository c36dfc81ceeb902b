//! CSV persistence of the zero table with a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ZeroCache, ZeroRecord};
use crate::complex::{Complex, ComplexValue};
use crate::context::PrecisionContext;
use crate::dd::Dd;
use crate::error::{Error, Result, Warning};

pub const SCHEMA_VERSION: u32 = 1;
const HEADER: [&str; 7] = ["k", "gamma", "delta", "delta_prime", "zetap_re", "zetap_im", "c_imag"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Save,
    Load,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    schema: u32,
    digits: u32,
    t_max: f64,
    count: usize,
    checksum: String,
    #[serde(default)]
    next_gamma: Option<String>,
    #[serde(default)]
    zetap_err: Vec<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Shortest decimal (from 34 digits up) that parses back to the same value.
fn encode(x: Dd) -> String {
    for sig in [34, 36, 40, 50, 80, 200, 800] {
        let s = x.to_sci_string(sig);
        if s.parse::<Dd>().map(|y| y == x).unwrap_or(false) {
            return s;
        }
    }
    x.to_sci_string(1100)
}

fn decode(s: &str, row: usize) -> Result<Dd> {
    s.parse::<Dd>().map_err(|e| Error::Schema(format!("row {row}: {e}")))
}

fn csv_bytes(cache: &ZeroCache) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in &cache.records {
        w.write_record([
            r.k.to_string(),
            encode(r.gamma),
            encode(r.delta),
            encode(r.delta_prime),
            encode(r.zeta_prime.re),
            encode(r.zeta_prime.im),
            r.c_imag.map(encode).unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn save_cache(cache: &ZeroCache, path: &Path) -> Result<()> {
    let bytes = csv_bytes(cache)?;
    let side = Sidecar {
        schema: SCHEMA_VERSION,
        digits: cache.digits,
        t_max: cache.t_max,
        count: cache.records.len(),
        checksum: checksum(&bytes),
        next_gamma: cache.next_gamma.map(encode),
        zetap_err: cache.records.iter().map(|r| r.zeta_prime.err).collect(),
    };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, &bytes)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

/// Loads and validates a cache; warns when it was built at lower precision
/// than `ctx` asks for.
pub fn load_cache(path: &Path, ctx: &PrecisionContext) -> Result<(ZeroCache, Vec<Warning>)> {
    if !path.exists() {
        return Err(Error::MissingCache(path.display().to_string()));
    }
    let side_path = sidecar_path(path);
    if !side_path.exists() {
        return Err(Error::MissingCache(side_path.display().to_string()));
    }
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(&side_path)?)?;
    if side.schema != SCHEMA_VERSION {
        return Err(Error::Schema(format!("schema {} (expected {SCHEMA_VERSION})", side.schema)));
    }
    let bytes = fs::read(path)?;
    let found = checksum(&bytes);
    if found != side.checksum {
        return Err(Error::Checksum { expected: side.checksum, found });
    }
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(Error::Schema(format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        if row.len() != HEADER.len() {
            return Err(Error::Schema(format!("row {} has {} fields", i + 1, row.len())));
        }
        let k: usize = row[0].parse().map_err(|_| Error::Schema(format!("row {}: bad index", i + 1)))?;
        if k != i + 1 {
            return Err(Error::Schema(format!("row {} carries index {k}", i + 1)));
        }
        let err = side.zetap_err.get(i).copied().unwrap_or(0.0);
        let zp = Complex::new(decode(&row[4], k)?, decode(&row[5], k)?);
        records.push(ZeroRecord {
            k,
            gamma: decode(&row[1], k)?,
            delta: decode(&row[2], k)?,
            delta_prime: decode(&row[3], k)?,
            zeta_prime: ComplexValue::new(zp, err),
            c_imag: if row[6].is_empty() { None } else { Some(decode(&row[6], k)?) },
        });
    }
    if records.len() != side.count {
        return Err(Error::Schema(format!("{} rows, sidecar says {}", records.len(), side.count)));
    }
    let next_gamma = side.next_gamma.as_deref().map(|s| decode(s, 0)).transpose()?;
    let mut warnings = Vec::new();
    if side.digits < ctx.digits {
        warnings.push(Warning::Precision { stored: side.digits, requested: ctx.digits });
    }
    Ok((ZeroCache { records, digits: side.digits, t_max: side.t_max, next_gamma }, warnings))
}

/// Save or load in one entry point; a save returns the cache unchanged.
pub fn cache_io(cache: Option<&ZeroCache>, path: &Path, direction: Direction, ctx: &PrecisionContext) -> Result<(ZeroCache, Vec<Warning>)> {
    match direction {
        Direction::Save => {
            let cache = cache.ok_or_else(|| Error::Config("nothing to save".into()))?;
            save_cache(cache, path)?;
            Ok((cache.clone(), Vec::new()))
        }
        Direction::Load => load_cache(path, ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ZeroCache {
        let g: Dd = "14.13472514173469379045725198356247027078".parse().unwrap();
        let rec = ZeroRecord {
            k: 1,
            gamma: g,
            delta: Dd::from(6.887),
            delta_prime: g.ln().recip(),
            zeta_prime: ComplexValue::new(Complex::new(Dd::from(0.78), Dd::ONE / 3.0), 1e-28),
            c_imag: Some(Dd::ONE / 7.0),
        };
        ZeroCache { records: vec![rec], digits: 30, t_max: 17.0, next_gamma: Some(Dd::from(21.0)) }
    }

    #[test]
    fn encode_round_trip() {
        for x in [Dd::PI, Dd::ONE / 3.0, Dd::new(1.0, 1e-200), -Dd::EULER] {
            assert_eq!(encode(x).parse::<Dd>().unwrap(), x);
        }
    }

    #[test]
    fn save_load_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.csv");
        let cache = sample();
        save_cache(&cache, &path).unwrap();
        let ctx = PrecisionContext::default();
        let (back, warnings) = load_cache(&path, &ctx).unwrap();
        assert_eq!(back, cache);
        assert!(warnings.is_empty());
        let hi = PrecisionContext::new(31).unwrap();
        let (_, w) = load_cache(&path, &hi).unwrap();
        assert_eq!(w, vec![Warning::Precision { stored: 30, requested: 31 }]);
        let text = fs::read_to_string(&path).unwrap().replace("1.4134", "1.4135");
        fs::write(&path, text).unwrap();
        assert!(matches!(load_cache(&path, &ctx), Err(Error::Checksum { .. })));
        assert!(matches!(load_cache(&dir.path().join("none.csv"), &ctx), Err(Error::MissingCache(_))));
    }
}
