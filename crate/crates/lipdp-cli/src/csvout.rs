//! CSV writing with a fixed layout: header row, data rows, and a trailing
//! metadata comment (version, seed, config hash) so reruns are
//! byte-comparable.

use std::io::Write;
use std::path::Path;

use lipdp::Error;

/// FNV-1a over the config description; stable across runs.
fn config_hash(config: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in config.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    seed: u64,
    config: &str,
) -> Result<(), Error> {
    let mut out = Vec::new();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    writeln!(
        out,
        "# version={} seed={} config={:016x}",
        env!("CARGO_PKG_VERSION"),
        seed,
        config_hash(config)
    )?;
    std::fs::write(path, out)?;
    Ok(())
}
