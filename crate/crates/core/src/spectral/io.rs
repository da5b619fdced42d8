//! Binary field dumps and CSV export.
//!
//! Binary layout (little-endian): 16-byte magic, `u32` dim, `u32` n, `u32` side
//! flag (0 physical, 1 frequency), `f64` extent, then `n^dim` pairs of `f64`
//! (re, im) in row-major order.

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Field, Side, SpectralGrid};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 16] = b"PSIDYN-FIELD\0\0\0\0";

pub fn write_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    decode_field(&mut r)
}

pub(crate) fn encode_field(w: &mut impl Write, field: &Field) -> Result<()> {
    let grid = field.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&field.side().flag().to_le_bytes())?;
    w.write_all(&grid.extent().to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn decode_field(r: &mut impl Read) -> Result<Field> {
    let mut magic = [0u8; 16];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let side = Side::from_flag(read_u32(r)?)
        .ok_or_else(|| Error::Format("unknown side flag".into()))?;
    let extent = read_f64(r)?;
    let grid = SpectralGrid::new(dim, n, extent)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        values.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Field::new(grid, side, values)
}

/// One row per lattice point: signed lattice offsets, then `re`, `im`.
pub fn write_field_csv(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_csv(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn write_csv(w: &mut impl Write, field: &Field) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let header: Vec<String> = (0..dim)
        .map(|a| format!("index{a}"))
        .chain(["re".to_string(), "im".to_string()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (k, v) in field.values().iter().enumerate() {
        let off = grid.lattice_offsets(k);
        for o in &off[..dim] {
            write!(w, "{o},")?;
        }
        writeln!(w, "{:.16e},{:.16e}", v.re, v.im)?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, sample};
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let g = make_grid(2, 4, 1.5).unwrap();
        let f = Field::zeros(g, Side::Frequency);
        let mut buf = Vec::new();
        encode_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..16], FIELD_MAGIC);
        assert_eq!(&buf[16..20], &2u32.to_le_bytes());
        assert_eq!(&buf[20..24], &4u32.to_le_bytes());
        assert_eq!(&buf[24..28], &1u32.to_le_bytes());
        assert_eq!(&buf[28..36], &1.5f64.to_le_bytes());
        assert_eq!(buf.len(), 36 + 16 * 16);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = make_grid(1, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        encode_field(&mut buf, &Field::zeros(g, Side::Physical)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(decode_field(&mut bad.as_slice()), Err(Error::Format(_))));
        let short = &buf[..buf.len() - 3];
        assert!(decode_field(&mut &short[..]).is_err());
    }

    #[test]
    fn csv_has_header_and_offsets() {
        let g = make_grid(1, 4, 1.0).unwrap();
        let f = sample(&g, Side::Physical, |x| Complex64::new(x[0], 1.0)).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index0,re,im");
        assert!(lines[1].starts_with("-2,-5.0000000000000000e-1,"));
        assert_eq!(lines.len(), 5);
    }

    proptest! {
        #[test]
        fn binary_roundtrip(dim in 1usize..=2, half in 2usize..5, extent in 0.1f64..50.0,
                            seed in any::<u64>(), freq in any::<bool>()) {
            let g = make_grid(dim, 2 * half, extent).unwrap();
            let side = if freq { Side::Frequency } else { Side::Physical };
            let values = (0..g.len())
                .map(|k| {
                    let s = (seed ^ k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    Complex64::new((s >> 11) as f64 / 1e15, -((s >> 7) as f64) / 3e16)
                })
                .collect();
            let f = Field::new(g, side, values).unwrap();
            let mut buf = Vec::new();
            encode_field(&mut buf, &f).unwrap();
            let back = decode_field(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
