//! Plot-ready CSV emission and parsing.
//!
//! Floats are written in the shortest representation that round-trips, so
//! a parsed snapshot is bit-identical to the state that produced it and
//! reruns yield byte-identical files. Every file starts with a provenance
//! comment carrying the resolved configuration hash.

use crate::error::{Error, Result};
use crate::evolve::TrajectoryRecord;
use crate::manifold::ManifoldRecord;
use crate::matrix2::Herm2;
use crate::wigner::WignerState;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Shortest round-trip decimal form (17 significant digits at most).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

/// FNV-1a hash of a byte string, hex-encoded; used to stamp outputs with the
/// resolved configuration they came from.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn provenance_line(hash: Option<&str>) -> String {
    match hash {
        Some(h) => format!("# config_hash={h}\n"),
        None => String::new(),
    }
}

/// Writes a Wigner snapshot: `k,W_uu,W_dd,ReW_ud,ImW_ud`, one row per grid
/// point with `k` ascending in `[-1/2, 1/2)`.
pub fn write_snapshot(path: &Path, state: &WignerState, hash: Option<&str>) -> Result<()> {
    let n = state.n();
    let mut out = provenance_line(hash);
    out.push_str("k,W_uu,W_dd,ReW_ud,ImW_ud\n");
    for row in 0..n {
        // ascending k: start at the most negative representative j = n/2
        let j = (row + n / 2) % n;
        let v = state.value(j);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(state.k_at(j)),
            fmt_float(v.d_uu),
            fmt_float(v.d_dd),
            fmt_float(v.od_re),
            fmt_float(v.od_im)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses a snapshot written by [`write_snapshot`] back into a state.
pub fn read_snapshot(path: &Path) -> Result<WignerState> {
    let file = std::fs::File::open(path)?;
    let mut rows: Vec<(f64, Herm2)> = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('k') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedSnapshot(format!(
                "expected 5 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedSnapshot(format!("bad float {s:?}: {e}")))
        };
        rows.push((
            parse(fields[0])?,
            Herm2::new(
                parse(fields[1])?,
                parse(fields[2])?,
                parse(fields[3])?,
                parse(fields[4])?,
            ),
        ));
    }
    let n = rows.len();
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::MalformedSnapshot(format!("{n} rows")));
    }
    let mut values = vec![Herm2::ZERO; n];
    let mut seen = vec![false; n];
    for (k, v) in rows {
        let j = ((k * n as f64).round() as i64).rem_euclid(n as i64) as usize;
        if seen[j] {
            return Err(Error::MalformedSnapshot(format!(
                "duplicate grid point for k = {k}"
            )));
        }
        seen[j] = true;
        values[j] = v;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::MalformedSnapshot("missing grid points".into()));
    }
    WignerState::from_values(values, 0.0)
}

/// Writes the observables CSV:
/// `t,S,sigma,E,N_uu,N_dd,ReN_ud,ImN_ud,odd_trace_max,hs_dist0`.
pub fn write_observables(
    path: &Path,
    records: &[TrajectoryRecord],
    hash: Option<&str>,
) -> Result<()> {
    let mut out = provenance_line(hash);
    out.push_str("t,S,sigma,E,N_uu,N_dd,ReN_ud,ImN_ud,odd_trace_max,hs_dist0\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_float(r.t),
            fmt_float(r.entropy),
            fmt_float(r.sigma),
            fmt_float(r.energy),
            fmt_float(r.spin.d_uu),
            fmt_float(r.spin.d_dd),
            fmt_float(r.spin.od_re),
            fmt_float(r.spin.od_im),
            fmt_float(r.odd_trace_max),
            fmt_float(r.hs_dist0)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Observable row parsed back from CSV (the in-memory g-invariants are not
/// serialized).
pub fn read_observables(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::MalformedSnapshot(format!(
                "expected 10 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            let t = s.trim();
            if t == "nan" {
                return Ok(f64::NAN);
            }
            t.parse::<f64>()
                .map_err(|e| Error::MalformedSnapshot(format!("bad float {t:?}: {e}")))
        };
        out.push(TrajectoryRecord {
            t: parse(fields[0])?,
            entropy: parse(fields[1])?,
            sigma: parse(fields[2])?,
            energy: parse(fields[3])?,
            spin: Herm2::new(
                parse(fields[4])?,
                parse(fields[5])?,
                parse(fields[6])?,
                parse(fields[7])?,
            ),
            odd_trace_max: parse(fields[8])?,
            hs_dist0: parse(fields[9])?,
            g_invariants: [0.0; 3],
        });
    }
    Ok(out)
}

/// Writes the manifold export CSV: `k1,k3,k4,branch[,bx,by,bz]`.
pub fn write_manifold_csv(
    path: &Path,
    records: &[ManifoldRecord],
    hash: Option<&str>,
) -> Result<()> {
    let colored = records.first().is_some_and(|r| r.bloch.is_some());
    let mut out = provenance_line(hash);
    out.push_str(if colored {
        "k1,k3,k4,branch,bx,by,bz\n"
    } else {
        "k1,k3,k4,branch\n"
    });
    for r in records {
        match r.bloch {
            Some([bx, by, bz]) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_float(r.k1),
                    fmt_float(r.k3),
                    fmt_float(r.k4),
                    r.branch.name(),
                    fmt_float(bx),
                    fmt_float(by),
                    fmt_float(bz)
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_float(r.k1),
                    fmt_float(r.k3),
                    fmt_float(r.k4),
                    r.branch.name()
                );
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
