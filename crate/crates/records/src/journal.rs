use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::store::{MedicalRecord, StoredUser};
use crate::{RecordsError, Result};

/// One journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(crate) enum Entry {
    User(StoredUser),
    Record(MedicalRecord),
}

pub(crate) struct Journal {
    file: Option<File>,
}

impl Journal {
    pub fn in_memory() -> Self {
        Journal { file: None }
    }

    /// Opens (creating if needed) the journal at `path` and returns its entries.
    pub fn open(path: &Path) -> Result<(Self, Vec<Entry>)> {
        let file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line).map_err(|e| RecordsError::Corrupt {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        Ok((Journal { file: Some(file) }, entries))
    }

    /// Writes one line and syncs it to disk before returning.
    pub fn append(&mut self, entry: &Entry) -> Result<()> {
        let Some(file) = &mut self.file else {
            return Ok(());
        };
        let mut line = serde_json::to_vec(entry).expect("journal entries serialize");
        line.push(b'\n');
        file.write_all(&line)?;
        file.sync_data()?;
        Ok(())
    }

    pub fn sync(&mut self) -> Result<()> {
        if let Some(file) = &mut self.file {
            file.sync_all()?;
        }
        Ok(())
    }
}
