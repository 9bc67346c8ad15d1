//! Reading and writing measured or simulated sweep campaigns.

mod archive;
mod touchstone;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use archive::{
    export_sweep_archive, export_sweep_archive_with_metadata, load_sweep_archive, read_manifest, ArchiveEntry,
    SweepArchiveManifest, LINEAR_COMPLEX, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use touchstone::{parse_touchstone_s2p, DataFormat, OptionLine};

use crate::error::{Error, Result};

/// Writes to a sibling temp file and renames it into place, so readers never
/// see a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::domain("path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}
