//! Output directories are filled in a hidden staging sibling and renamed
//! into place on success, so a failed run never leaves partial results.

use std::fs;
use std::path::{Path, PathBuf};

use chassis_ris::ingest::write_atomic;

use crate::error::{CliError, CliResult};

pub struct OutputDir {
    target: PathBuf,
    staging: PathBuf,
    force: bool,
    committed: bool,
}

impl OutputDir {
    /// Refuses an existing `target` unless `force` is set; the old directory
    /// is only replaced at commit time.
    pub fn create(target: &Path, force: bool) -> CliResult<Self> {
        if target.exists() && !force {
            return Err(CliError::Io(format!(
                "{} already exists; pass --force to replace it",
                target.display()
            )));
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::Config(format!("bad output directory {}", target.display())))?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| CliError::io(&parent, e))?;
        let staging = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
        }
        fs::create_dir(&staging).map_err(|e| CliError::io(&staging, e))?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            force,
            committed: false,
        })
    }

    /// Directory that files are written to before commit.
    pub fn path(&self) -> &Path {
        &self.staging
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        write_atomic(&self.staging.join(name), bytes)?;
        Ok(())
    }

    pub fn commit(mut self) -> CliResult<PathBuf> {
        if self.target.exists() {
            if !self.force {
                return Err(CliError::Io(format!(
                    "{} appeared during the run",
                    self.target.display()
                )));
            }
            let meta = fs::symlink_metadata(&self.target).map_err(|e| CliError::io(&self.target, e))?;
            let removed = if meta.is_dir() {
                fs::remove_dir_all(&self.target)
            } else {
                fs::remove_file(&self.target)
            };
            removed.map_err(|e| CliError::io(&self.target, e))?;
        }
        fs::rename(&self.staging, &self.target).map_err(|e| CliError::io(&self.target, e))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
