use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::{load_ontology, ConceptEntry, Ontology, OntologyError};

/// Writes the canonical form through a temporary file in the same directory
/// and renames it over `path`, so readers never see a partial file.
pub fn save_ontology(o: &Ontology, path: &Path) -> Result<(), OntologyError> {
    let io_err = |source| OntologyError::Io {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(o.to_json().as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Shared ontology with a single-writer discipline.
///
/// Readers take cheap [`Arc`] snapshots. Writers are serialized by an
/// internal mutex; each successful write persists (when file-backed) before
/// the new snapshot becomes visible.
#[derive(Debug)]
pub struct OntologyStore {
    path: Option<PathBuf>,
    current: RwLock<Arc<Ontology>>,
    writer: Mutex<()>,
}

impl OntologyStore {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, OntologyError> {
        let path = path.into();
        let o = load_ontology(&path)?;
        Ok(Self {
            path: Some(path),
            current: RwLock::new(Arc::new(o)),
            writer: Mutex::new(()),
        })
    }

    pub fn in_memory(o: Ontology) -> Self {
        Self {
            path: None,
            current: RwLock::new(Arc::new(o)),
            writer: Mutex::new(()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn snapshot(&self) -> Arc<Ontology> {
        self.current.read().expect("ontology lock poisoned").clone()
    }

    /// Inserts `entries` into the latest snapshot. Entries whose (lemma, pos)
    /// is already present are skipped, so concurrent admissions of the same
    /// word collapse to the first one. Returns the snapshot now being served.
    pub fn admit(&self, entries: &[ConceptEntry]) -> Result<Arc<Ontology>, OntologyError> {
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let base = self.snapshot();
        let mut next: Option<Ontology> = None;
        for entry in entries {
            let current = next.as_ref().unwrap_or(&base);
            if current.concepts.contains_key(&entry.key()) {
                continue;
            }
            next = Some(current.insert_concept(entry.clone())?);
        }
        let Some(next) = next else {
            return Ok(base);
        };
        if let Some(path) = &self.path {
            save_ontology(&next, path)?;
        }
        let next = Arc::new(next);
        *self.current.write().expect("ontology lock poisoned") = next.clone();
        Ok(next)
    }
}
