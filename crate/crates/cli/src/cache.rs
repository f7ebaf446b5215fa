//! Persistent cache of generator mode matrices, one JSON file per realized module.
//!
//! Files are keyed by the SHA-256 of (kind, module spec, code version) and written with a
//! temp-file-then-rename so concurrent runs never observe partial files. Loaded tables are
//! spot-checked against freshly computed matrices before use; a mismatch discards the file.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vertexbound::exact::{parse_rational, Matrix, Rational};
use vertexbound::voa::RealizedModule;

pub const CACHE_ENV: &str = "VERTEXBOUND_CACHE_DIR";
const SPOT_CHECKS: usize = 3;

#[derive(Serialize, Deserialize)]
struct Entry {
    j: i64,
    level: usize,
    rows: usize,
    cols: usize,
    /// Nonzero entries `(row, col, "p/q")`.
    entries: Vec<(usize, usize, String)>,
}

#[derive(Serialize, Deserialize)]
struct File {
    key: String,
    spec: String,
    entries: Vec<Entry>,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// The environment variable wins over the configured directory; no cache when neither is set.
    pub fn locate(configured: Option<&Path>) -> Option<Cache> {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .or_else(|| configured.map(Path::to_path_buf))
            .map(|dir| Cache { dir })
    }

    pub fn key(module: &RealizedModule) -> String {
        let mut h = Sha256::new();
        h.update(b"generators\0");
        h.update(module.spec().to_string().as_bytes());
        h.update(b"\0");
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Preloads cached generators into `module`. Returns the number of entries loaded.
    pub fn load(&self, module: &RealizedModule) -> usize {
        let key = Self::key(module);
        let path = self.path(&key);
        let Ok(text) = fs::read_to_string(&path) else { return 0 };
        let table = match serde_json::from_str::<File>(&text).ok().and_then(|f| decode(&key, f)) {
            Some(t) => t,
            None => {
                let _ = fs::remove_file(&path);
                return 0;
            }
        };
        let n = table.len();
        let picks = sample(&mut rand::thread_rng(), n, SPOT_CHECKS.min(n));
        for i in picks.iter() {
            let ((j, level), m) = &table[i];
            if module.fresh_generator(*j, *level) != *m {
                let _ = fs::remove_file(&path);
                return 0;
            }
        }
        if module.preload_generators(table).is_err() {
            let _ = fs::remove_file(&path);
            return 0;
        }
        n
    }

    pub fn store(&self, module: &RealizedModule) -> std::io::Result<()> {
        let key = Self::key(module);
        let table = module.generator_table(module.depth());
        if table.is_empty() {
            return Ok(());
        }
        fs::create_dir_all(&self.dir)?;
        let file = File { key: key.clone(), spec: module.spec().to_string(), entries: table.iter().map(encode).collect() };
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&file)?)?;
        fs::rename(&tmp, self.path(&key))
    }
}

fn encode(((j, level), m): &((i64, usize), Matrix)) -> Entry {
    let mut entries = Vec::new();
    for r in 0..m.rows() {
        for (c, x) in m.row(r).iter().enumerate() {
            if *x != Rational::from_integer(0.into()) {
                entries.push((r, c, x.to_string()));
            }
        }
    }
    Entry { j: *j, level: *level, rows: m.rows(), cols: m.cols(), entries }
}

fn decode(key: &str, file: File) -> Option<Vec<((i64, usize), Matrix)>> {
    if file.key != key {
        return None;
    }
    file.entries
        .into_iter()
        .map(|e| {
            let mut m = Matrix::zeros(e.rows, e.cols);
            for (r, c, x) in e.entries {
                if r >= e.rows || c >= e.cols {
                    return None;
                }
                m.set(r, c, parse_rational(&x).ok()?);
            }
            Some(((e.j, e.level), m))
        })
        .collect()
}
