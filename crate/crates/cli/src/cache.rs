//! Intersection-number cache files.
//!
//! One record per line, `g;d1,d2,...;num/den`, sorted; merged with the
//! in-process cache on load. Corrupt lines are rejected with their line
//! number. Writes take an exclusive advisory lock on the file.

use modfun::intersect;
use modfun::scalar::{format_rational, parse_rational, Rational};
use std::io::Write;
use std::path::Path;

pub fn parse_line(line: &str) -> Option<(u32, Vec<u32>, Rational)> {
    let mut parts = line.trim().splitn(3, ';');
    let g: u32 = parts.next()?.trim().parse().ok()?;
    let degrees_part = parts.next()?.trim();
    let degrees: Vec<u32> = if degrees_part.is_empty() {
        Vec::new()
    } else {
        degrees_part.split(',').map(|d| d.trim().parse().ok()).collect::<Option<Vec<_>>>()?
    };
    let value = parse_rational(parts.next()?)?;
    Some((g, degrees, value))
}

pub fn format_line(g: u32, degrees: &[u32], value: &Rational) -> String {
    format!(
        "{};{};{}",
        g,
        degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
        format_rational(value)
    )
}

/// Load and merge a cache file into the process cache. Returns the number of
/// records merged; reports corrupt lines by number.
pub fn load(path: &Path) -> Result<usize, String> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(format!("cannot read {}: {e}", path.display())),
    };
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Some(rec) => records.push(rec),
            None => return Err(format!("{}: corrupt cache record at line {}", path.display(), i + 1)),
        }
    }
    let count = records.len();
    intersect::seed_cache(records);
    Ok(count)
}

/// Write the current process cache to disk (sorted, exclusive lock).
pub fn save(path: &Path) -> Result<usize, String> {
    let mut entries = intersect::cache_entries();
    entries.sort();
    let mut body = String::new();
    for (g, degrees, value) in &entries {
        body.push_str(&format_line(*g, degrees, value));
        body.push('\n');
    }
    let file = std::fs::OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(false)
        .open(path)
        .map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    lock_exclusive(&file)?;
    // truncate after acquiring the lock
    file.set_len(0).map_err(|e| e.to_string())?;
    let mut writer = std::io::BufWriter::new(&file);
    writer.write_all(body.as_bytes()).map_err(|e| e.to_string())?;
    writer.flush().map_err(|e| e.to_string())?;
    drop(writer);
    unlock(&file);
    Ok(entries.len())
}

#[cfg(unix)]
fn lock_exclusive(file: &std::fs::File) -> Result<(), String> {
    use std::os::unix::io::AsRawFd;
    let rc = unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_EX) };
    if rc != 0 {
        return Err("cannot lock cache file".into());
    }
    Ok(())
}

#[cfg(unix)]
fn unlock(file: &std::fs::File) {
    use std::os::unix::io::AsRawFd;
    unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_UN) };
}

#[cfg(not(unix))]
fn lock_exclusive(_file: &std::fs::File) -> Result<(), String> {
    Ok(())
}

#[cfg(not(unix))]
fn unlock(_file: &std::fs::File) {}
