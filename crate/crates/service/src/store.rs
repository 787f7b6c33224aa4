//! Canonical `.scha.json` files in one directory, addressed by id.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use scha_core::{format, Analysis};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const EXTENSION: &str = ".scha.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid id {0:?}; use letters, digits, '_', '-' and '.'")]
    Id(String),
    #[error("{id} does not exist")]
    NotFound { id: String },
    #[error("{id} has changed; current ETag is {current}")]
    Stale { id: String, current: String },
    #[error("{id} does not exist, so If-Match cannot match")]
    Vanished { id: String },
    #[error("{id} already exists; send If-Match with its ETag to replace it")]
    PreconditionRequired { id: String },
    #[error("stored file {id} is unreadable: {source}")]
    Corrupt {
        id: String,
        source: format::ParseError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A document as stored: parsed, re-serialized canonically, and hashed.
#[derive(Debug, Clone)]
pub struct Stored {
    pub id: String,
    pub analysis: Analysis,
    pub canonical: String,
    pub etag: String,
}

impl Stored {
    fn new(id: &str, analysis: Analysis) -> Self {
        let canonical = format::serialize(&analysis);
        Stored {
            id: id.to_string(),
            etag: etag(&canonical),
            analysis,
            canonical,
        }
    }
}

/// Quoted hex SHA-256 of the canonical bytes.
pub fn etag(canonical: &str) -> String {
    format!("\"{}\"", hex::encode(Sha256::digest(canonical.as_bytes())))
}

pub fn valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    let Some(first) = chars.next() else { return false };
    id.len() <= 128
        && first.is_ascii_alphanumeric()
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !id.contains("..")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutOutcome {
    Created,
    Updated,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store {
            root: root.into(),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::Id(id.to_string()));
        }
        Ok(self.root.join(format!("{id}{EXTENSION}")))
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }

    pub async fn get(&self, id: &str) -> Result<Stored, StoreError> {
        let path = self.path(id)?;
        let text = match tokio::fs::read_to_string(&path).await {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound { id: id.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
        let analysis = format::parse(&text).map_err(|source| StoreError::Corrupt {
            id: id.to_string(),
            source,
        })?;
        Ok(Stored::new(id, analysis))
    }

    /// Ids of every stored document, sorted.
    pub async fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        let mut dir = tokio::fs::read_dir(&self.root).await?;
        while let Some(entry) = dir.next_entry().await? {
            let name = entry.file_name();
            let Some(id) = name.to_str().and_then(|n| n.strip_suffix(EXTENSION)) else {
                continue;
            };
            if valid_id(id) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Every readable document; unreadable files are logged and skipped.
    pub async fn all(&self) -> Result<Vec<Stored>, StoreError> {
        let mut out = Vec::new();
        for id in self.ids().await? {
            match self.get(&id).await {
                Ok(stored) => out.push(stored),
                Err(StoreError::NotFound { .. }) => {}
                Err(e) => log::warn!("skipping {id}: {e}"),
            }
        }
        Ok(out)
    }

    /// Writes `analysis` if `if_match` names the current ETag, or if the id
    /// is new and no precondition was sent. Writers to one id are serialized.
    pub async fn put(
        &self,
        id: &str,
        analysis: Analysis,
        if_match: Option<&str>,
    ) -> Result<(PutOutcome, Stored), StoreError> {
        let path = self.path(id)?;
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;

        let current = match self.get(id).await {
            Ok(stored) => Some(stored.etag),
            Err(StoreError::NotFound { .. }) => None,
            // a corrupt file may be overwritten by anyone who knows it exists
            Err(StoreError::Corrupt { .. }) => Some(String::new()),
            Err(e) => return Err(e),
        };
        let outcome = match (current, if_match) {
            (None, None) => PutOutcome::Created,
            (None, Some(_)) => return Err(StoreError::Vanished { id: id.to_string() }),
            (Some(_), None) => return Err(StoreError::PreconditionRequired { id: id.to_string() }),
            (Some(current), Some(tag)) => {
                if !etag_matches(tag, &current) {
                    return Err(StoreError::Stale {
                        id: id.to_string(),
                        current,
                    });
                }
                PutOutcome::Updated
            }
        };

        let stored = Stored::new(id, analysis);
        let tmp = self.root.join(format!(".{id}.{}.tmp", std::process::id()));
        tokio::fs::write(&tmp, stored.canonical.as_bytes()).await?;
        if let Err(e) = tokio::fs::rename(&tmp, &path).await {
            let _ = tokio::fs::remove_file(&tmp).await;
            return Err(e.into());
        }
        Ok((outcome, stored))
    }
}

/// `If-Match` may list several tags, quoted or not, or `*`.
fn etag_matches(header: &str, current: &str) -> bool {
    header.split(',').map(str::trim).any(|tag| {
        tag == "*" || tag == current || tag.strip_prefix("W/") == Some(current) || format!("\"{tag}\"") == current
    })
}
