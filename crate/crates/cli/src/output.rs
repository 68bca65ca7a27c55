use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

/// Marker that identifies a directory as ours, so reruns may replace it.
const MARKER: &str = "metadata.toml";

/// Output directory that only appears once every file has been written.
pub struct Staged {
    target: PathBuf,
    staging: PathBuf,
    committed: bool,
}

impl Staged {
    pub fn new(target: &Path) -> Result<Self, CliError> {
        if target.exists() && !target.join(MARKER).exists() {
            if fs::read_dir(target)?.next().is_some() {
                return Err(CliError::Usage(format!(
                    "{} exists and is not an output directory of this tool",
                    target.display()
                )));
            }
        }
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
        let staging = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(Self { target: target.to_path_buf(), staging, committed: false })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.staging.join(file)
    }

    pub fn write(&self, file: &str, contents: &str) -> Result<(), CliError> {
        fs::write(self.path(file), contents)?;
        Ok(())
    }

    pub fn create(&self, file: &str) -> Result<fs::File, CliError> {
        Ok(fs::File::create(self.path(file))?)
    }

    /// Write the metadata file and move the directory into place.
    pub fn commit(mut self, command: &str, args: &[String]) -> Result<PathBuf, CliError> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = Metadata { command: command.into(), args: args.to_vec(), version: env!("CARGO_PKG_VERSION").into(), unix_time: secs };
        self.write(MARKER, &toml::to_string(&meta).map_err(|e| CliError::Run(e.to_string()))?)?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target)?;
        }
        fs::rename(&self.staging, &self.target)?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        let _ = fs::remove_dir_all(&self.staging);
    }
}

#[derive(serde::Serialize)]
struct Metadata {
    command: String,
    args: Vec<String>,
    version: String,
    unix_time: u64,
}

/// Four significant figures for human summaries.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (3 - mag).max(0) as usize, x)
    } else {
        format!("{x:.3e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_figures() {
        assert_eq!(sig4(0.0123456), "0.01235");
        assert_eq!(sig4(123.456), "123.5");
        assert_eq!(sig4(12345.6), "12346");
        assert_eq!(sig4(-1.0), "-1.000");
        assert_eq!(sig4(1.5e-7), "1.500e-7");
    }
}
