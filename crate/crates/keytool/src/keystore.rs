//! Directory keystore: one framed object per file, named `<role>.<digest>.bin`.
//!
//! Files are written to a fresh temporary name in the target directory and renamed into
//! place, so readers never observe a partially written object.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Mpk,
    Msk,
    Irm,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Mpk => "mpk",
            Role::Msk => "msk",
            Role::Irm => "irm",
        }
    }
}

/// First eight bytes of SHA-256, hex encoded.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

pub struct Keystore {
    root: PathBuf,
}

impl Keystore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Keystore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entries(&self, role: Role) -> Result<Vec<PathBuf>, CliError> {
        let dir = fs::read_dir(&self.root).map_err(|e| {
            CliError::Io(format!("cannot read keystore {}: {e}", self.root.display()))
        })?;
        let prefix = format!("{}.", role.as_str());
        let mut found = Vec::new();
        for entry in dir {
            let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with(&prefix) && name.ends_with(".bin") {
                found.push(entry.path());
            }
        }
        found.sort();
        Ok(found)
    }

    pub fn has(&self, role: Role) -> bool {
        self.entries(role).map(|e| !e.is_empty()).unwrap_or(false)
    }

    /// Reads the single object stored under `role`.
    pub fn load(&self, role: Role) -> Result<Vec<u8>, CliError> {
        let entries = self.entries(role)?;
        match entries.as_slice() {
            [one] => fs::read(one).map_err(|e| CliError::Io(format!("{}: {e}", one.display()))),
            [] => Err(CliError::Io(format!(
                "no {} in keystore {}",
                role.as_str(),
                self.root.display()
            ))),
            _ => Err(CliError::Io(format!(
                "several {} files in keystore {}",
                role.as_str(),
                self.root.display()
            ))),
        }
    }

    pub fn remove(&self, role: Role) -> Result<(), CliError> {
        for path in self.entries(role)? {
            fs::remove_file(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    /// Stores `bytes` and returns the path written.
    pub fn store(&self, role: Role, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self
            .root
            .join(format!("{}.{}.bin", role.as_str(), digest(bytes)));
        write_atomic(&path, bytes)?;
        Ok(path)
    }
}

/// Create-new temporary file next to `path`, then rename over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut attempt = 0u32;
    let (tmp, mut file) = loop {
        let tmp = dir.join(format!(".{name}.{}.{attempt}.tmp", std::process::id()));
        match OpenOptions::new().write(true).create_new(true).open(&tmp) {
            Ok(f) => break (tmp, f),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists && attempt < 64 => attempt += 1,
            Err(e) => return Err(io(e)),
        }
    };
    let written = file.write_all(bytes).and_then(|_| file.sync_all());
    drop(file);
    if let Err(e) = written.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}
