//! Binary checkpoint of a [`FieldStore`] and its [`TimeGrid`].
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "DSCSTATE"
//! version    u32      1
//! fields     u32      5   (T, u_x, u_y, u_z, p)
//! cells      u64
//! step       u64
//! tau        f64
//! time       f64
//! per field: node[cells], node_prev[cells], port[cells*6],
//!            port_prev[cells*6], grad_b[cells*6*3]     (f64)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{FieldStore, ScalarField, TimeGrid};
use crate::error::{DscError, Result};

pub const MAGIC: &[u8; 8] = b"DSCSTATE";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(w: &mut impl Write, store: &FieldStore, grid: &TimeGrid) -> Result<()> {
    let n = store.n_cells();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(store.fields.len() as u32).to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&grid.step.to_le_bytes())?;
    w.write_all(&grid.tau.to_le_bytes())?;
    w.write_all(&grid.time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(n * 32 * 8);
    for f in &store.fields {
        buf.clear();
        let values = f
            .node
            .iter()
            .chain(&f.node_prev)
            .chain(f.port.iter().flatten())
            .chain(f.port_prev.iter().flatten())
            .chain(f.grad_b.iter().flatten().flatten());
        for v in values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<(FieldStore, TimeGrid)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DscError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(DscError::Checkpoint(format!("unsupported version {version}")));
    }
    let nfields = read_u32(r)?;
    if nfields != 5 {
        return Err(DscError::Checkpoint(format!("expected 5 fields, found {nfields}")));
    }
    let n = usize::try_from(read_u64(r)?).map_err(|_| DscError::Checkpoint("cell count overflows".into()))?;
    let step = read_u64(r)?;
    let tau = read_f64(r)?;
    let time = read_f64(r)?;
    let mut store = FieldStore::zeros(n);
    for f in &mut store.fields {
        read_field(r, f)?;
    }
    Ok((store, TimeGrid { tau, step, time }))
}

pub fn save(path: &Path, store: &FieldStore, grid: &TimeGrid) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut w, store, grid)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(FieldStore, TimeGrid)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_checkpoint(&mut r)
}

fn read_field(r: &mut impl Read, f: &mut ScalarField) -> Result<()> {
    for v in f.node.iter_mut().chain(f.node_prev.iter_mut()) {
        *v = read_f64(r)?;
    }
    for v in f.port.iter_mut().chain(f.port_prev.iter_mut()).flatten() {
        *v = read_f64(r)?;
    }
    for v in f.grad_b.iter_mut().flatten().flatten() {
        *v = read_f64(r)?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> DscError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        DscError::Checkpoint("truncated file".into())
    } else {
        DscError::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsc_state::Field;

    #[test]
    fn header_layout_is_fixed() {
        let store = FieldStore::zeros(2);
        let grid = TimeGrid {
            tau: 0.25,
            step: 7,
            time: 1.75,
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &store, &grid).unwrap();
        assert_eq!(&buf[..8], b"DSCSTATE");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 5);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 7);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), 0.25);
        assert_eq!(buf.len(), 48 + 5 * 2 * (2 + 12 + 18) * 8);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut store = FieldStore::zeros(3);
        for (k, f) in Field::ALL.into_iter().enumerate() {
            let sf = store.get_mut(f);
            sf.node[1] = 0.1 * k as f64 + 1.0 / 3.0;
            sf.port_prev[2][5] = -1e-300;
            sf.grad_b[0][4][2] = std::f64::consts::PI;
        }
        let grid = TimeGrid {
            tau: 1e-3,
            step: 12,
            time: 0.012,
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &store, &grid).unwrap();
        let (back, g) = read_checkpoint(&mut buf.as_slice()).unwrap();
        assert_eq!(back, store);
        assert_eq!(g, grid);
    }

    #[test]
    fn truncated_input_is_reported() {
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &FieldStore::zeros(1), &TimeGrid::new(1.0).unwrap()).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(
            read_checkpoint(&mut buf.as_slice()),
            Err(DscError::Checkpoint(_))
        ));
    }
}
