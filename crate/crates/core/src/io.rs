//! File helpers shared by the CLI: atomic writes and small list formats.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{input, Result};

/// Writes `path` by filling a sibling temp file and renaming it into place.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| input(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Parses one node id per line; blank lines and `#` comments are skipped.
pub fn read_node_list<R: BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|_| input(format!("line {}: `{t}` is not a node id", i + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_node_list<W: Write>(nodes: &[usize], mut writer: W) -> Result<()> {
    for v in nodes {
        writeln!(writer, "{v}")?;
    }
    Ok(())
}

/// Parses `0.05,0.1,...` or the range form `start:stop:step` (inclusive,
/// tolerant to rounding at the end point).
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(input("empty list"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| input(format!("`{s}` is not a number")))
    };
    if parts.len() == 3 {
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(input(format!("bad range `{text}`")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // round to 12 decimals so the grid prints cleanly
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    text.split(',').map(num).collect()
}

pub(crate) fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(input(format!(
            "expected CSV header `{}`, found `{}`",
            expected.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_list_parsing() {
        let nodes = read_node_list("3\n\n# c\n 7 \n".as_bytes()).unwrap();
        assert_eq!(nodes, vec![3, 7]);
        assert!(read_node_list("x\n".as_bytes()).is_err());
    }

    #[test]
    fn list_and_range_parsing() {
        assert_eq!(parse_f64_list("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        let g = parse_f64_list("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[18], 0.95);
        assert!(parse_f64_list("").is_err());
        assert!(parse_f64_list("1:0:0.1").is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, |b| {
            b.extend_from_slice(b"one");
            Ok(())
        }).unwrap();
        write_atomic(&p, |b| {
            b.extend_from_slice(b"two");
            Ok(())
        }).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
