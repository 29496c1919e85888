//! Content-addressed store of complexity results.
//!
//! Keys are SHA-256 digests of the canonical JSON of everything a search
//! result depends on. Exact-mode keys leave out the budget: a stored result
//! answers any budget it already covers, and a larger-budget search simply
//! replaces a cutoff.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::bfs::SearchConfig;
use super::predicate::Predicate;
use super::result::{ComplexityResult, SearchMode, Status};
use crate::error::{Error, Result};
use crate::lattice::GateSet;

/// Environment variable overriding the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "BRANCHLAB_CACHE_DIR";

#[derive(Serialize)]
struct KeyMaterial<'a> {
    predicate: &'a Predicate,
    gate_set: &'a GateSet,
    mode: SearchMode,
    search: &'a SearchConfig,
    /// Only heuristic results depend on the exact budget.
    budget: Option<u32>,
}

#[derive(Debug, Default)]
pub struct ComplexityCache {
    dir: Option<PathBuf>,
    mem: Mutex<HashMap<String, ComplexityResult>>,
}

impl ComplexityCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn at_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: Some(dir),
            mem: Mutex::default(),
        })
    }

    /// Disk-backed when [`CACHE_DIR_ENV`] is set, otherwise in-memory.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::at_dir(dir),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key(
        predicate: &Predicate,
        gate_set: &GateSet,
        mode: SearchMode,
        search: &SearchConfig,
        budget: u32,
    ) -> String {
        let material = KeyMaterial {
            predicate,
            gate_set,
            mode,
            search,
            budget: (mode == SearchMode::HeuristicLayers).then_some(budget),
        };
        let bytes = serde_json::to_vec(&material).expect("key material serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(&key[..2]).join(format!("{key}.json")))
    }

    fn load(&self, key: &str) -> Option<ComplexityResult> {
        if let Some(hit) = self.mem.lock().expect("cache lock").get(key) {
            return Some(hit.clone());
        }
        let path = self.path_for(key)?;
        let text = std::fs::read_to_string(path).ok()?;
        let result: ComplexityResult = serde_json::from_str(&text).ok()?;
        self.mem
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), result.clone());
        Some(result)
    }

    /// A stored answer valid for `budget`, rewritten exactly as a fresh
    /// search at that budget would report it.
    pub fn lookup(&self, key: &str, mode: SearchMode, budget: u32) -> Option<ComplexityResult> {
        let stored = self.load(key)?;
        if mode == SearchMode::HeuristicLayers {
            return Some(stored);
        }
        match stored.status {
            Status::Exact if stored.value <= budget => Some(ComplexityResult {
                cutoff: budget,
                ..stored
            }),
            Status::Exact => Some(ComplexityResult::cutoff(budget + 1, budget)),
            Status::LowerBoundCutoff if budget < stored.value => Some(ComplexityResult::cutoff(budget + 1, budget)),
            Status::LowerBoundCutoff if stored.frontier_limited => Some(ComplexityResult {
                cutoff: budget,
                ..stored
            }),
            _ => None,
        }
    }

    pub fn store(&self, key: &str, result: &ComplexityResult) -> Result<()> {
        {
            let mut mem = self.mem.lock().expect("cache lock");
            if let Some(old) = mem.get(key) {
                let keep_old = !result.heuristic
                    && match (old.status, result.status) {
                        (Status::Exact, _) => true,
                        (_, Status::Exact) => false,
                        _ => result.value <= old.value,
                    };
                if keep_old {
                    return Ok(());
                }
            }
            mem.insert(key.to_string(), result.clone());
        }
        if let Some(path) = self.path_for(key) {
            let parent = path.parent().expect("cache paths have a parent");
            std::fs::create_dir_all(parent).map_err(|e| Error::Cache(e.to_string()))?;
            let tmp = parent.join(format!(".{key}.{}.tmp", std::process::id()));
            let text = serde_json::to_string_pretty(result).map_err(|e| Error::Cache(e.to_string()))?;
            std::fs::write(&tmp, text).map_err(|e| Error::Cache(e.to_string()))?;
            std::fs::rename(&tmp, &path).map_err(|e| Error::Cache(e.to_string()))?;
        }
        Ok(())
    }
}
