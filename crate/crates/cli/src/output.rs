use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use burstsim::{load_trace, Trace};
use tempfile::NamedTempFile;

/// Writes `path` through a sibling temp file so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> burstsim::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    let mut sink = BufWriter::new(tmp);
    body(&mut sink).with_context(|| format!("writing {}", path.display()))?;
    let tmp = sink.into_inner().map_err(|e| e.into_error())?;
    tmp.persist(path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_trace(BufReader::new(file)).with_context(|| format!("reading trace {}", path.display()))
}
