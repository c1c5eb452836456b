//! Plain-text coefficient cache.
//!
//! ```text
//! momentlab-coeffs v1 weight=<κ> nmax=<N>
//! 1 <a(1)>
//! …
//! N <a(N)>
//! checksum=<FNV-1a 64 of the N coefficient lines, 16 hex digits>
//! ```
//!
//! The checksum covers the bytes of the coefficient lines including their
//! newlines. It is optional on read but always written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rug::Integer;

use super::{check_weight, CoefficientTable};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &str = "momentlab-coeffs";
const VERSION: &str = "v1";

pub fn cache_file_name(weight: u32, n_max: u64) -> String {
    format!("coeffs_w{weight}_n{n_max}.dat")
}

#[derive(Clone, Copy)]
struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

pub fn write_cache(table: &CoefficientTable, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(out, "{CACHE_MAGIC} {VERSION} weight={} nmax={}", table.weight(), table.n_max())?;
        let mut hash = Fnv64::new();
        let mut line = String::new();
        for (i, a) in table.coefficients().iter().enumerate() {
            line.clear();
            line.push_str(&format!("{} {}\n", i + 1, a));
            hash.update(line.as_bytes());
            out.write_all(line.as_bytes())?;
        }
        writeln!(out, "checksum={:016x}", hash.0)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Cache(format!("{}: {msg}", path.display()))
}

/// Reads and verifies a cache file. With `expected_weight`, a file for a
/// different weight is rejected.
pub fn read_cache(path: &Path, expected_weight: Option<u32>) -> Result<CoefficientTable> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.split_inclusive('\n');
    let header = lines.next().ok_or_else(|| bad(path, "empty file"))?.trim_end();
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != CACHE_MAGIC {
        return Err(bad(path, "not a coefficient cache"));
    }
    if fields[1] != VERSION {
        return Err(bad(path, format!("unsupported version {}", fields[1])));
    }
    let weight: u32 = fields[2]
        .strip_prefix("weight=")
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| bad(path, "malformed weight field"))?;
    let n_max: u64 = fields[3]
        .strip_prefix("nmax=")
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| bad(path, "malformed nmax field"))?;
    if let Some(want) = expected_weight {
        if weight != want {
            return Err(bad(path, format!("holds weight {weight}, expected {want}")));
        }
    }
    check_weight(weight)?;
    if n_max == 0 {
        return Err(bad(path, "nmax must be positive"));
    }

    let mut hash = Fnv64::new();
    let mut coeffs = Vec::with_capacity(n_max as usize);
    for expect_n in 1..=n_max {
        let line = lines
            .next()
            .ok_or_else(|| bad(path, format!("truncated after {} coefficients", expect_n - 1)))?;
        hash.update(line.as_bytes());
        let (n, value) = line
            .trim_end()
            .split_once(' ')
            .ok_or_else(|| bad(path, format!("malformed line for n = {expect_n}")))?;
        if n.parse::<u64>().ok() != Some(expect_n) {
            return Err(bad(path, format!("expected index {expect_n}, found {n:?}")));
        }
        let value = Integer::from_str_radix(value, 10)
            .map_err(|e| bad(path, format!("bad coefficient at n = {expect_n}: {e}")))?;
        coeffs.push(value);
    }
    match lines.next() {
        None => {}
        Some(line) => {
            let stored = line
                .trim_end()
                .strip_prefix("checksum=")
                .ok_or_else(|| bad(path, "unexpected trailing content"))?;
            let stored = u64::from_str_radix(stored, 16).map_err(|_| bad(path, "malformed checksum"))?;
            if stored != hash.0 {
                return Err(bad(path, format!("checksum mismatch: stored {stored:016x}, computed {:016x}", hash.0)));
            }
            if lines.any(|l| !l.trim().is_empty()) {
                return Err(bad(path, "content after checksum"));
            }
        }
    }
    CoefficientTable::from_coefficients(weight, coeffs)
}
