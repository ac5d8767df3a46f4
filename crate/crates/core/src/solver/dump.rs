//! Binary snapshot of a steady state.
//!
//! Layout, all little endian: magic `GHZRHO01`; `u32` site count; one `u32`
//! dimension per site; `u32` scheme-name length and UTF-8 bytes; the ten
//! rates as `f64` in field order; then `D*D` entries of `rho` in row-major
//! order, each as `(re, im)` `f64` pairs.

use std::io::{Read, Write};

use faer::Mat;

use super::DensityOperator;
use crate::catalog::{RateName, RateSet};
use crate::error::{Error, Result};
use crate::tensor::C64;

const MAGIC: &[u8; 8] = b"GHZRHO01";

#[derive(Clone, Debug, PartialEq)]
pub struct DumpHeader {
    pub dims: Vec<usize>,
    pub scheme: String,
    pub rates: RateSet,
}

pub fn write_dump(mut w: impl Write, header: &DumpHeader, rho: &DensityOperator) -> Result<()> {
    let d: usize = header.dims.iter().product();
    if d != rho.dim() {
        return Err(Error::DimensionMismatch { expected: d, got: rho.dim() });
    }
    w.write_all(MAGIC)?;
    w.write_all(&(header.dims.len() as u32).to_le_bytes())?;
    for &x in &header.dims {
        w.write_all(&(x as u32).to_le_bytes())?;
    }
    w.write_all(&(header.scheme.len() as u32).to_le_bytes())?;
    w.write_all(header.scheme.as_bytes())?;
    for name in RateName::FIELDS {
        w.write_all(&header.rates.get(name).to_le_bytes())?;
    }
    let dense = rho.to_dense();
    for i in 0..d {
        for j in 0..d {
            let v = dense[(i, j)];
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
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

pub fn read_dump(mut r: impl Read) -> Result<(DumpHeader, Mat<C64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Unsupported("not a steady-state dump".into()));
    }
    let n_sites = read_u32(&mut r)? as usize;
    let dims = (0..n_sites).map(|_| read_u32(&mut r).map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    let len = read_u32(&mut r)? as usize;
    let mut name = vec![0u8; len];
    r.read_exact(&mut name)?;
    let scheme = String::from_utf8(name).map_err(|e| Error::Unsupported(e.to_string()))?;
    let mut rates = RateSet::default();
    for field in RateName::FIELDS {
        rates.set(field, read_f64(&mut r)?);
    }
    let d: usize = dims.iter().product();
    let mut m = Mat::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok((DumpHeader { dims, scheme, rates }, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rho = Mat::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let header = DumpHeader {
            dims: vec![2, 2],
            scheme: "ltv_only".into(),
            rates: RateSet { kappa_c: 3.0, ..Default::default() },
        };
        let mut buf = Vec::new();
        write_dump(&mut buf, &header, &DensityOperator::Dense(rho.clone())).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 4 + 8 + 80 + 16 * 16);
        let (h, m) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(m, rho);
        assert!(read_dump(&b"nonsense"[..]).is_err());
    }
}
