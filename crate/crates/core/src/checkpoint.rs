//! Checkpoint file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "MFCK"
//! version u32      currently 1
//! count   u32      number of entries
//! entry*  name_len u16, name bytes, rank u8, dims u32 x rank, payload f32 x prod(dims)
//! ```
//!
//! Only parameter values are stored; gradient buffers are recreated at zero
//! on load. Entries are written in name order so identical stores produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::param::ParamStore;
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"MFCK";
const VERSION: u32 = 1;

pub fn save_checkpoint(store: &ParamStore, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(store.len() as u32).to_le_bytes())?;
    for (name, param) in store.iter() {
        let name_bytes = name.as_bytes();
        if name_bytes.len() > u16::MAX as usize {
            return Err(Error::Format(format!("param name too long: {name}")));
        }
        w.write_all(&(name_bytes.len() as u16).to_le_bytes())?;
        w.write_all(name_bytes)?;
        let shape = param.value.shape();
        if shape.len() > u8::MAX as usize {
            return Err(Error::Format(format!("rank too large for {name}")));
        }
        w.write_all(&[shape.len() as u8])?;
        for &d in shape {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in param.value.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ParamStore> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad checkpoint magic {:?} in {}",
            magic,
            path.display()
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let count = read_u32(&mut r)?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let name_len = read_u16(&mut r)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|e| Error::Format(format!("param name not utf-8: {e}")))?;
        let mut rank = [0u8; 1];
        r.read_exact(&mut rank)?;
        let mut shape = Vec::with_capacity(rank[0] as usize);
        for _ in 0..rank[0] {
            shape.push(read_u32(&mut r)? as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = vec![0.0f32; len];
        let mut buf = [0u8; 4];
        for v in data.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f32::from_le_bytes(buf);
        }
        store.insert(&name, Tensor::from_vec(&shape, data)?)?;
    }
    Ok(store)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut buf = [0u8; 2];
    r.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn round_trip_preserves_values_and_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.mfck");
        let mut store = ParamStore::new();
        let mut rng = Rng::new(4);
        store.insert_kaiming("a.w", &[3, 4], 3, &mut rng).unwrap();
        store.insert_kaiming("b.w", &[2, 2, 5], 10, &mut rng).unwrap();
        store.insert("c", Tensor::from_slice(&[1.0, -2.5])).unwrap();
        save_checkpoint(&store, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.len(), 3);
        for (name, p) in store.iter() {
            assert_eq!(loaded.get(name).shape(), p.value.shape());
            assert_eq!(loaded.get(name).data(), p.value.data());
            assert!(loaded.grad(name).data().iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn identical_stores_produce_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let build = || {
            let mut store = ParamStore::new();
            let mut rng = Rng::new(77);
            store.insert_kaiming("w", &[16], 16, &mut rng).unwrap();
            store
        };
        let p1 = dir.path().join("a.mfck");
        let p2 = dir.path().join("b.mfck");
        save_checkpoint(&build(), &p1).unwrap();
        save_checkpoint(&build(), &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.mfck");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Format(_))));
    }
}
