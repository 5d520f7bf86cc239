//! On-disk cache of factor tables.
//!
//! Layout: the magic line `EKLAB1\n`, an ASCII line `lo hi\n`, then one
//! `(ω, Ω)` byte pair per integer in `[lo, hi)`.

use super::FactorTable;
use crate::error::{Error, Result};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

pub const CACHE_MAGIC: &[u8] = b"EKLAB1\n";

pub fn cache_path(dir: &Path, lo: u64, hi: u64) -> PathBuf {
    dir.join(format!("sieve-{lo}-{hi}.bin"))
}

pub fn save_table(path: &Path, table: &FactorTable) -> Result<()> {
    let mut buf = Vec::with_capacity(2 * table.len() + 64);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(format!("{} {}\n", table.lo(), table.hi()).as_bytes());
    for (o, b) in table.omega_slice().iter().zip(table.big_omega_slice()) {
        buf.push(*o);
        buf.push(*b);
    }
    // write-then-rename so a concurrent reader never sees a torn file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_table(path: &Path) -> Result<FactorTable> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(f);
    let bad = |msg: &str| Error::validation(format!("{}: {msg}", path.display()));
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if magic != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| Error::io(path, e))?;
    let mut it = line.split_whitespace().map(str::parse::<u64>);
    let (lo, hi) = match (it.next(), it.next()) {
        (Some(Ok(lo)), Some(Ok(hi))) if lo < hi => (lo, hi),
        _ => return Err(bad("bad range line")),
    };
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(|e| Error::io(path, e))?;
    if body.len() as u64 != 2 * (hi - lo) {
        return Err(bad("truncated body"));
    }
    let omega = body.iter().step_by(2).copied().collect();
    let big = body.iter().skip(1).step_by(2).copied().collect();
    Ok(FactorTable::from_parts(lo, hi, omega, big))
}
