use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tempfile::NamedTempFile;
use vibrometer_core::{expand, ExpandedHamiltonian, SopHamiltonian};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Fails early when `path` cannot be an output file.
pub fn check_output(path: &Path) -> Result<()> {
    if path.is_dir() {
        bail!("output path {} is a directory", path.display());
    }
    let parent = parent_dir(path);
    if !parent.is_dir() {
        bail!("output directory {} does not exist", parent.display());
    }
    Ok(())
}

pub fn check_input(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = NamedTempFile::new_in(parent_dir(path))
        .with_context(|| format!("cannot create a temporary file next to {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Loads either a SOP file (expanded on the fly) or an expanded file.
pub fn load_hamiltonian(path: &Path, drop_threshold: f64) -> Result<ExpandedHamiltonian> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    let ctx = || format!("invalid Hamiltonian in {}", path.display());
    if value.get("strings").is_some() {
        Ok(ExpandedHamiltonian::from_json(&text).with_context(ctx)?)
    } else if value.get("terms").is_some() {
        let sop = SopHamiltonian::from_json(&text).with_context(ctx)?;
        Ok(expand(&sop, drop_threshold).with_context(ctx)?)
    } else {
        bail!(
            "{} is neither a SOP file (\"terms\") nor an expanded file (\"strings\")",
            path.display()
        )
    }
}
