//! On-disk cache of arc moment tables.

use std::fs;
use std::path::{Path, PathBuf};

use loopeq::contours::{Contour, Weight};
use loopeq::loopgen::Potential;
use loopeq::quad::MomentTable;
use sha2::{Digest, Sha256};

pub struct MomentCache {
    dir: Option<PathBuf>,
}

impl MomentCache {
    /// `LOOPEQ_CACHE` takes precedence over the configured directory; with
    /// neither set the cache is disabled.
    pub fn new(configured: Option<&Path>) -> Self {
        let dir = std::env::var_os("LOOPEQ_CACHE")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| configured.map(Path::to_path_buf));
        MomentCache { dir }
    }

    pub fn key(v: &Potential, arcs: &[Contour], kmax: u32, tol: f64) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&v.to_json()).expect("potential serializes"));
        h.update(b"\n");
        h.update(serde_json::to_vec(arcs).expect("contours serialize"));
        h.update(format!("\n{kmax}\n{tol:e}").as_bytes());
        hex::encode(h.finalize())
    }

    /// Returns the cached table or builds and stores it. Unreadable cache
    /// entries are rebuilt.
    pub fn table(&self, v: &Potential, arcs: &[Contour], kmax: u32, tol: f64) -> loopeq::Result<MomentTable> {
        let path = self.dir.as_ref().map(|d| d.join(format!("{}.json", Self::key(v, arcs, kmax, tol))));
        if let Some(p) = &path {
            if let Some(t) = fs::read(p).ok().and_then(|b| serde_json::from_slice::<MomentTable>(&b).ok()) {
                return Ok(t);
            }
        }
        let table = MomentTable::build(arcs, &Weight::new(v)?, kmax, tol)?;
        if let (Some(p), Some(dir)) = (&path, &self.dir) {
            // a failed write only costs a recomputation next time
            if fs::create_dir_all(dir).is_ok() {
                let _ = fs::write(p, serde_json::to_vec(&table).expect("table serializes"));
            }
        }
        Ok(table)
    }
}
