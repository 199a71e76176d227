//! Spectrum cache keyed by `(N, Δ, ω, λ, n_tr, max_levels)`.
//!
//! Always in memory; optionally mirrored to a directory. Disk entries are a
//! fixed header followed by little-endian f64 arrays:
//!
//! ```text
//! magic "DICKESPC" | version u32 | n_qubits u64 | n_tr u64 | levels u64 | dim u64
//! delta f64 | omega f64 | lambda f64
//! energies[levels] | parities[levels] | coefficients[dim * levels] (column major)
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use faer::Mat;
use sha2::{Digest, Sha256};

use crate::ecs::EcsEigensystem;
use crate::error::{Error, Result};
use crate::model::DickeParams;
use crate::pipeline::SolverSettings;

const MAGIC: &[u8; 8] = b"DICKESPC";
pub const CACHE_VERSION: u32 = 1;
/// Environment variable naming the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "DICKE_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    n_qubits: usize,
    delta: u64,
    omega: u64,
    lambda: u64,
    n_tr: usize,
    max_levels: usize,
}

impl Key {
    fn new(p: &DickeParams, s: &SolverSettings) -> Self {
        Key {
            n_qubits: p.n_qubits,
            delta: p.delta.to_bits(),
            omega: p.omega.to_bits(),
            lambda: p.lambda.to_bits(),
            n_tr: s.n_tr,
            max_levels: s.max_levels,
        }
    }

    fn file_name(&self) -> String {
        let text = format!("{self:?}");
        let d = Sha256::digest(text.as_bytes());
        let hex: String = d.iter().take(16).map(|b| format!("{b:02x}")).collect();
        format!("{hex}.spc")
    }
}

#[derive(Debug, Default)]
pub struct SpectrumCache {
    memory: Mutex<HashMap<Key, Arc<EcsEigensystem>>>,
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl SpectrumCache {
    pub fn in_memory() -> Self {
        SpectrumCache::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SpectrumCache {
            dir: Some(dir),
            ..SpectrumCache::default()
        })
    }

    /// Disk-backed when `DICKE_CACHE_DIR` is set, memory only otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => SpectrumCache::with_dir(PathBuf::from(d)),
            _ => Ok(SpectrumCache::in_memory()),
        }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    /// Fraction of lookups served without diagonalizing.
    pub fn hit_ratio(&self) -> f64 {
        let (h, m) = (self.hits(), self.misses());
        if h + m == 0 {
            0.0
        } else {
            h as f64 / (h + m) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.memory.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_solve(
        &self,
        params: &DickeParams,
        settings: &SolverSettings,
    ) -> Result<Arc<EcsEigensystem>> {
        let key = Key::new(params, settings);
        if let Some(s) = self.memory.lock().expect("cache lock poisoned").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(s.clone());
        }
        let from_disk = self.dir.as_ref().and_then(|d| {
            let path = d.join(key.file_name());
            if !path.exists() {
                return None;
            }
            match read_spectrum(&path, params, settings) {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("ignoring unreadable cache entry: {e}");
                    None
                }
            }
        });
        let system = match from_disk {
            Some(s) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                s
            }
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                let s = settings.solve(params)?;
                if let Some(d) = &self.dir {
                    write_spectrum(&d.join(key.file_name()), &s)?;
                }
                s
            }
        };
        let mut mem = self.memory.lock().expect("cache lock poisoned");
        Ok(mem.entry(key).or_insert_with(|| Arc::new(system)).clone())
    }
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn write_spectrum(path: &Path, s: &EcsEigensystem) -> Result<()> {
    let p = s.params();
    let (levels, dim) = (s.levels(), s.dim());
    let mut out = Vec::with_capacity(64 + 8 * (2 * levels + dim * levels));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    for v in [p.n_qubits, s.n_tr(), levels, dim] {
        put_u64(&mut out, v as u64);
    }
    for v in [p.delta, p.omega, p.lambda] {
        put_f64(&mut out, v);
    }
    s.energies().iter().for_each(|&e| put_f64(&mut out, e));
    s.parities()
        .iter()
        .for_each(|&q| put_f64(&mut out, q as f64));
    let c = s.coefficients();
    for k in 0..levels {
        for r in 0..dim {
            put_f64(&mut out, c[(r, k)]);
        }
    }
    // write then rename so readers never see a partial file
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &out).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.at + n;
        if end > self.bytes.len() {
            return Err(Error::Cache("truncated cache entry".into()));
        }
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

/// Reads an entry and checks it was made for exactly these parameters.
pub fn read_spectrum(
    path: &Path,
    params: &DickeParams,
    settings: &SolverSettings,
) -> Result<EcsEigensystem> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut c = Cursor {
        bytes: &bytes,
        at: 0,
    };
    if c.take(8)? != MAGIC {
        return Err(Error::Cache(format!(
            "{}: not a spectrum cache file",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(c.take(4)?.try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!(
            "{}: format version {version}, expected {CACHE_VERSION}",
            path.display()
        )));
    }
    let n_qubits = c.u64()? as usize;
    let n_tr = c.u64()? as usize;
    let levels = c.u64()? as usize;
    let dim = c.u64()? as usize;
    let (delta, omega, lambda) = (c.f64()?, c.f64()?, c.f64()?);
    let same = n_qubits == params.n_qubits
        && n_tr == settings.n_tr
        && delta.to_bits() == params.delta.to_bits()
        && omega.to_bits() == params.omega.to_bits()
        && lambda.to_bits() == params.lambda.to_bits()
        && levels <= settings.max_levels;
    if !same {
        return Err(Error::Cache(format!("{}: key mismatch", path.display())));
    }
    let energies = (0..levels).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let parities = (0..levels)
        .map(|_| c.f64().map(|q| q as i8))
        .collect::<Result<Vec<_>>>()?;
    let mut coefficients = Mat::<f64>::zeros(dim, levels);
    for k in 0..levels {
        for r in 0..dim {
            coefficients[(r, k)] = c.f64()?;
        }
    }
    if c.at != bytes.len() {
        return Err(Error::Cache(format!("{}: trailing bytes", path.display())));
    }
    EcsEigensystem::from_parts(params, n_tr, energies, parities, coefficients)
}
