use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use lt_models::ParamRegistry;
use lt_tensor::Tensor;

use crate::error::{PruneError, PruneResult};

const SNAPSHOT_MAGIC: &[u8; 7] = b"LTSNAP1";

/// Named, shaped parameter tensors captured at one training instant.
///
/// Entry order matches the registry the snapshot was taken from and is the
/// canonical order for pruning pools and file layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSnapshot {
    entries: Vec<(String, Tensor)>,
}

impl ModelSnapshot {
    pub fn from_registry(reg: &ParamRegistry) -> Self {
        ModelSnapshot {
            entries: reg
                .entries()
                .iter()
                .map(|e| (e.name.clone(), e.tensor.clone()))
                .collect(),
        }
    }

    pub fn from_entries(entries: Vec<(String, Tensor)>) -> Self {
        ModelSnapshot { entries }
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn total_params(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Load every tensor into the registry.
    pub fn apply_to(&self, reg: &mut ParamRegistry) -> PruneResult<()> {
        if reg.len() != self.entries.len() {
            return Err(PruneError::Contract(format!(
                "snapshot has {} entries, registry {}",
                self.entries.len(),
                reg.len()
            )));
        }
        for (name, tensor) in &self.entries {
            reg.set_tensor(name, tensor.clone())?;
        }
        Ok(())
    }

    /// Check name/shape alignment against a registry.
    pub fn aligned_with(&self, reg: &ParamRegistry) -> bool {
        reg.len() == self.entries.len()
            && self
                .entries
                .iter()
                .zip(reg.entries())
                .all(|((n, t), e)| *n == e.name && t.shape() == e.tensor.shape())
    }

    pub fn write_to(&self, path: &Path) -> PruneResult<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(SNAPSHOT_MAGIC);
        write_u32(&mut buf, self.entries.len() as u32);
        for (name, tensor) in &self.entries {
            write_u32(&mut buf, name.len() as u32);
            buf.extend_from_slice(name.as_bytes());
            write_u32(&mut buf, tensor.rank() as u32);
            for &d in tensor.shape() {
                write_u32(&mut buf, d as u32);
            }
            for &v in tensor.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        atomic_write(path, &buf)
    }

    pub fn read_from(path: &Path) -> PruneResult<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Reader::new(&bytes, path);
        r.expect_magic(SNAPSHOT_MAGIC)?;
        let count = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = r.str_bytes(name_len)?;
            let rank = r.u32()? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32()? as usize);
            }
            let len: usize = shape.iter().product();
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(r.f64()?);
            }
            let tensor = Tensor::new(shape, data)
                .map_err(|e| PruneError::Format(format!("{}: {e}", path.display())))?;
            entries.push((name, tensor));
        }
        r.expect_end()?;
        Ok(ModelSnapshot { entries })
    }
}

/// Snapshots keyed by (run id, training instant), persisted one file per
/// key under a base directory.
pub struct SnapshotStore {
    base: PathBuf,
    cache: HashMap<(String, String), ModelSnapshot>,
}

impl SnapshotStore {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        SnapshotStore {
            base: base.into(),
            cache: HashMap::new(),
        }
    }

    fn path_for(&self, run_id: &str, instant: &str) -> PathBuf {
        self.base.join(run_id).join(format!("snapshot.{instant}"))
    }

    pub fn put(&mut self, run_id: &str, instant: &str, snap: &ModelSnapshot) -> PruneResult<()> {
        let path = self.path_for(run_id, instant);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        snap.write_to(&path)?;
        self.cache
            .insert((run_id.to_string(), instant.to_string()), snap.clone());
        Ok(())
    }

    pub fn get(&mut self, run_id: &str, instant: &str) -> PruneResult<ModelSnapshot> {
        let key = (run_id.to_string(), instant.to_string());
        if let Some(s) = self.cache.get(&key) {
            return Ok(s.clone());
        }
        let snap = ModelSnapshot::read_from(&self.path_for(run_id, instant))?;
        self.cache.insert(key, snap.clone());
        Ok(snap)
    }

    pub fn contains(&self, run_id: &str, instant: &str) -> bool {
        self.path_for(run_id, instant).is_file()
    }
}

pub(crate) fn write_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

/// Write via a temp file and rename so readers never observe a torn file.
pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> PruneResult<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        Reader { bytes, pos: 0, path }
    }

    fn take(&mut self, n: usize) -> PruneResult<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(PruneError::Format(format!(
                "{}: truncated at byte {}",
                self.path.display(),
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn expect_magic(&mut self, magic: &[u8]) -> PruneResult<()> {
        if self.take(magic.len())? != magic {
            return Err(PruneError::Format(format!(
                "{}: bad magic bytes",
                self.path.display()
            )));
        }
        Ok(())
    }

    pub fn u32(&mut self) -> PruneResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> PruneResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn str_bytes(&mut self, n: usize) -> PruneResult<String> {
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| PruneError::Format(format!("{}: invalid utf-8 name", self.path.display())))
    }

    pub fn raw(&mut self, n: usize) -> PruneResult<&'a [u8]> {
        self.take(n)
    }

    pub fn expect_end(&mut self) -> PruneResult<()> {
        if self.pos != self.bytes.len() {
            return Err(PruneError::Format(format!(
                "{}: {} trailing bytes",
                self.path.display(),
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}
