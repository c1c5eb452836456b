//! Locating, validating and building coefficient tables.

use std::fs;
use std::path::{Path, PathBuf};

use momentlab::cuspform::{cache_file_name, read_cache, write_cache, CoefficientTable};

use crate::Failure;

/// Cached files for `weight` as `(n_max, path)`, smallest first.
fn cached(dir: &Path, weight: u32) -> Vec<(u64, PathBuf)> {
    let prefix = format!("coeffs_w{weight}_n");
    let mut out: Vec<(u64, PathBuf)> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let n = name.strip_prefix(&prefix)?.strip_suffix(".dat")?.parse().ok()?;
            Some((n, e.path()))
        })
        .collect();
    out.sort();
    out
}

/// Loads a table covering `need`: the file for `n_max` if given, otherwise
/// the smallest cached table that is large enough. Without a usable cache
/// the table is built in memory, unless `require_cache` is set.
pub fn load(
    dir: &Path,
    weight: u32,
    n_max: Option<u64>,
    need: u64,
    require_cache: bool,
) -> Result<CoefficientTable, Failure> {
    if let Some(n) = n_max {
        if n < need {
            return Err(Failure::Usage(format!("--nmax {n} is below the {need} this command needs")));
        }
    }
    let path = match n_max {
        Some(n) => Some(dir.join(cache_file_name(weight, n))).filter(|p| p.exists()),
        None => cached(dir, weight).into_iter().find(|(n, _)| *n >= need).map(|(_, p)| p),
    };
    match path {
        Some(p) => Ok(read_cache(&p, Some(weight))?),
        None if require_cache => Err(Failure::Usage(format!(
            "no coefficient cache for weight {weight} with n_max >= {need} in {}; run `momentlab coeffs` first",
            dir.display()
        ))),
        None => Ok(CoefficientTable::new(weight, n_max.unwrap_or(need).max(1))?),
    }
}

pub enum Outcome {
    Reused(PathBuf),
    Written(PathBuf),
}

/// Builds, validates and caches the table, unless a valid cache file exists.
pub fn build_cached(
    dir: &Path,
    weight: u32,
    n_max: u64,
    hecke: (usize, usize, u64),
) -> Result<(CoefficientTable, Outcome), Failure> {
    let path = dir.join(cache_file_name(weight, n_max));
    if path.exists() {
        match read_cache(&path, Some(weight)) {
            Ok(t) if t.n_max() == n_max => return Ok((t, Outcome::Reused(path))),
            Ok(_) => eprintln!("{}: n_max does not match the file name, rebuilding", path.display()),
            Err(e) => eprintln!("{e}; rebuilding"),
        }
    }
    let table = CoefficientTable::new(weight, n_max)?;
    table.check_deligne()?;
    table.check_hecke(hecke.0, hecke.1, hecke.2)?;
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    write_cache(&table, &path)?;
    Ok((table, Outcome::Written(path)))
}
