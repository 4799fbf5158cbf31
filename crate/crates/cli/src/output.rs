use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file. Without a path the
/// bytes go to standard output.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    emit(path, steklov_core::json::to_string(value)?.as_bytes())
}
