//! Small file-handling helpers shared by the artifact writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Write a file atomically: the content goes to a temporary file in the
/// same directory, which is renamed over the target only on success.
pub fn atomic_write<F>(path: &Path, write_fn: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    {
        let mut buf = BufWriter::new(tmp.as_file_mut());
        write_fn(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    Ok(())
}

/// Leading provenance comment recording how an artifact was produced.
pub fn write_provenance(w: &mut dyn Write, provenance: Option<&str>) -> Result<()> {
    if let Some(p) = provenance {
        writeln!(w, "# {p}")?;
    }
    Ok(())
}

/// Is this line a provenance/comment line in our text artifacts?
/// Structural sentinels like `#RELATIONS` or `#TRANSITIONS` do not count.
pub fn is_comment(line: &str) -> bool {
    line.starts_with("# ") || line == "#"
}

pub fn open_text(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

/// Read all non-comment lines of a text artifact.
pub fn read_content_lines(path: &Path) -> Result<Vec<String>> {
    let reader = open_text(path)?;
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if is_comment(&line) {
            continue;
        }
        out.push(line);
    }
    Ok(out)
}
