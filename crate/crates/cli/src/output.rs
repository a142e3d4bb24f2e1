use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Float formatting for CSV cells: 17 significant digits, positional where
/// reasonable, so every value parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{:.*}", (16 - exp).max(0) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn fmt_opt_usize(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn provenance() -> Value {
    json!({
        "package": "wishart-hs",
        "version": env!("CARGO_PKG_VERSION"),
        "rng": wishart_hs::rng::RNG_ALGORITHM,
        "argv": std::env::args().collect::<Vec<_>>(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Fails early when `path` could not be written later.
pub fn ensure_writable(path: &Path) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let probe = tempfile_in(&dir)?;
    fs::remove_file(&probe).ok();
    if path.is_dir() {
        return Err(CliError::Usage(format!("{} is a directory", path.display())));
    }
    Ok(())
}

fn tempfile_in(dir: &Path) -> Result<PathBuf, CliError> {
    let probe = dir.join(format!(".wishart-hs-probe-{}", std::process::id()));
    fs::File::create(&probe).map_err(|e| CliError::Usage(format!("{} is not writable: {e}", dir.display())))?;
    Ok(probe)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<String, CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(bytes))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<String, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

/// `{config, results, provenance}`.
pub fn write_artifact_json(path: &Path, config: &impl Serialize, results: &impl Serialize) -> Result<String, CliError> {
    write_json(path, &json!({ "config": config, "results": results, "provenance": provenance() }))
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Failure(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes a CSV and its `.meta.json` sidecar (config echo, provenance,
/// checksum, column list). Returns the CSV checksum.
pub fn write_csv_artifact(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    config: &impl Serialize,
    extra: Value,
) -> Result<String, CliError> {
    let sha = write_bytes(path, &csv_bytes(header, rows)?)?;
    let meta = json!({
        "config": config,
        "columns": header,
        "rows": rows.len(),
        "sha256": sha,
        "extra": extra,
        "provenance": provenance(),
    });
    write_json(&meta_path(path), &meta)?;
    Ok(sha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.6, 0.3, 1.0 / 3.0, 16.25, 1e-7, 6.02e23, -2.5e-300, 123456789.123, 0.0, 1e15, 9.999_999_999_999_998e15] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(16.25), "16.250000000000000");
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn csv_layout() {
        let b = csv_bytes(&["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\r\n1,\"x,y\"\r\n");
    }
}
