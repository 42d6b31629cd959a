//! CSV tables, legacy VTK output and number formatting.

pub mod csv;
pub mod format;
pub mod vtk;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Reads and parses a `.femmesh` file.
pub fn read_mesh(path: &Path) -> Result<crate::mesh::Mesh> {
    let text = fs::read_to_string(path)?;
    Ok(crate::mesh::Mesh::parse(&text)?)
}
