//! Content-addressed store of forward moment expansions.
//!
//! Entries are keyed by a SHA-256 digest of the realized system (precision,
//! signs, supports, exact nodes and weights) and hold the expansions as exact
//! hex literals, so a hit is bit-identical to recomputing. Anything unreadable
//! is a miss.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nikishin_hp::algebra::LaurentTail;
use nikishin_hp::hermite_pade::ForwardMoments;
use nikishin_hp::nikishin::NikishinSystem;
use nikishin_hp::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const FORMAT: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Entry {
    precision_bits: u32,
    tails: Vec<Vec<String>>,
    checksum: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CacheFile {
    format: u32,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug)]
pub struct MomentCache {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, Entry>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

/// Digest of everything the expansions depend on.
pub fn system_key(sys: &NikishinSystem) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "moments v{FORMAT}\nbits {}\n",
        sys.precision().bits()
    ));
    for g in sys.generators() {
        h.update(format!(
            "gen {} {} {}\n",
            g.sign(),
            g.support().start().to_hex_string(),
            g.support().end().to_hex_string()
        ));
        for (x, w) in g.nodes().iter().zip(g.weights()) {
            h.update(format!("{} {}\n", x.to_hex_string(), w.to_hex_string()));
        }
    }
    format!("{:x}", h.finalize())
}

fn checksum(bits: u32, tails: &[Vec<String>]) -> String {
    let mut h = Sha256::new();
    h.update(format!("{bits}\n"));
    for t in tails {
        h.update(t.join(","));
        h.update("\n");
    }
    format!("{:x}", h.finalize())
}

impl MomentCache {
    /// A cache that neither reads nor writes.
    pub fn disabled() -> Self {
        MomentCache {
            path: None,
            entries: Mutex::new(BTreeMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    /// Loads `path` if it exists. A file that cannot be read as a cache is
    /// ignored with a warning and will be overwritten.
    pub fn open(path: &Path) -> Self {
        let entries = match std::fs::read_to_string(path) {
            Err(_) => BTreeMap::new(),
            Ok(text) => match serde_json::from_str::<CacheFile>(&text) {
                Ok(file) if file.format == FORMAT => file.entries,
                Ok(file) => {
                    log::warn!(
                        "ignoring moment cache {} with format {}",
                        path.display(),
                        file.format
                    );
                    BTreeMap::new()
                }
                Err(e) => {
                    log::warn!("ignoring unreadable moment cache {}: {e}", path.display());
                    BTreeMap::new()
                }
            },
        };
        MomentCache {
            path: Some(path.to_path_buf()),
            entries: Mutex::new(entries),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn decode(
        key: &str,
        entry: &Entry,
        sys: &NikishinSystem,
        len: usize,
    ) -> Option<ForwardMoments> {
        let bits = sys.precision().bits();
        if entry.precision_bits != bits || entry.tails.len() != sys.m() {
            log::warn!("moment cache entry {key} does not match its system; recomputing");
            return None;
        }
        if checksum(bits, &entry.tails) != entry.checksum {
            log::warn!("moment cache entry {key} fails its checksum; recomputing");
            return None;
        }
        if entry.tails.iter().any(|t| t.len() < len) {
            return None;
        }
        let mut tails = Vec::with_capacity(entry.tails.len());
        for t in &entry.tails {
            let coeffs = t[..len]
                .iter()
                .map(|c| Scalar::parse(c, sys.precision()))
                .collect::<Result<Vec<_>, _>>();
            match coeffs {
                Ok(c) => tails.push(LaurentTail::new(c)),
                Err(e) => {
                    log::warn!("moment cache entry {key} is corrupt ({e}); recomputing");
                    return None;
                }
            }
        }
        Some(ForwardMoments::from_tails(tails))
    }

    /// Expansions of `sys` to `len` terms, from the cache when possible.
    pub fn moments(&self, sys: &NikishinSystem, len: usize) -> ForwardMoments {
        if self.path.is_none() {
            self.misses.fetch_add(1, Ordering::Relaxed);
            return ForwardMoments::compute(sys, len);
        }
        let key = system_key(sys);
        let cached = {
            let entries = self.entries.lock().expect("cache lock");
            entries
                .get(&key)
                .and_then(|e| Self::decode(&key, e, sys, len))
        };
        if let Some(m) = cached {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return m;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let computed = ForwardMoments::compute(sys, len);
        let tails: Vec<Vec<String>> = computed
            .tails()
            .iter()
            .map(|t| t.coeffs().iter().map(Scalar::to_hex_string).collect())
            .collect();
        let bits = sys.precision().bits();
        let entry = Entry {
            precision_bits: bits,
            checksum: checksum(bits, &tails),
            tails,
        };
        let mut entries = self.entries.lock().expect("cache lock");
        // keep the longest expansion seen for this system
        let longer = entries
            .get(&key)
            .is_none_or(|old| old.tails.first().map_or(0, Vec::len) < len);
        if longer {
            entries.insert(key, entry);
        }
        computed
    }

    pub fn save(&self) -> Result<(), CliError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let file = CacheFile {
            format: FORMAT,
            entries: self.entries.lock().expect("cache lock").clone(),
        };
        let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
