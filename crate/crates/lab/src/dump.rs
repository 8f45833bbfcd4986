//! Binary dump of a [`MeasurementSet`].
//!
//! Layout, all little endian:
//!
//! ```text
//! magic   8 bytes  "SFFTMSET"
//! version u32      1
//! n d B F r_max c_max shifts   u64 each
//! seed    u64
//! count   u64      number of complex entries
//! tables  count × (re: f64, im: f64) in (r, c, w, bucket) order
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use sfft_core::hashing::MeasurementSet;

use crate::{io_err, LabError, Result};

pub const MAGIC: &[u8; 8] = b"SFFTMSET";
pub const VERSION: u32 = 1;

/// Header fields of a dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DumpHeader {
    pub n: u64,
    pub d: u64,
    pub buckets: u64,
    pub sharpness: u64,
    pub r_max: u64,
    pub c_max: u64,
    pub shifts: u64,
    pub seed: u64,
}

/// A decoded dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub tables: Vec<Complex64>,
}

impl Dump {
    pub fn from_measurements(mset: &MeasurementSet, seed: u64) -> Self {
        let p = mset.params();
        let header = DumpHeader {
            n: mset.grid().n() as u64,
            d: mset.grid().d() as u64,
            buckets: p.buckets as u64,
            sharpness: p.sharpness as u64,
            r_max: p.r_max as u64,
            c_max: p.c_max as u64,
            shifts: mset.schedule().len() as u64,
            seed,
        };
        Dump {
            header,
            tables: mset.raw_tables().to_vec(),
        }
    }

    /// `m(r, c, w)` over all buckets.
    pub fn table(&self, r: usize, c: usize, w: usize) -> &[Complex64] {
        let h = &self.header;
        let b = h.buckets as usize;
        let at = ((r * h.c_max as usize + c) * h.shifts as usize + w) * b;
        &self.tables[at..at + b]
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        let h = &self.header;
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        for v in [
            h.n,
            h.d,
            h.buckets,
            h.sharpness,
            h.r_max,
            h.c_max,
            h.shifts,
            h.seed,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        out.write_all(&(self.tables.len() as u64).to_le_bytes())?;
        for z in &self.tables {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(&mut input, &mut magic)?;
        if &magic != MAGIC {
            return Err(LabError::Dump("bad magic".into()));
        }
        let mut v = [0u8; 4];
        read_exact(&mut input, &mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(LabError::Dump(format!("unsupported version {version}")));
        }
        let mut fields = [0u64; 9];
        for f in fields.iter_mut() {
            *f = read_u64(&mut input)?;
        }
        let [n, d, buckets, sharpness, r_max, c_max, shifts, seed, count] = fields;
        let header = DumpHeader {
            n,
            d,
            buckets,
            sharpness,
            r_max,
            c_max,
            shifts,
            seed,
        };
        let expected = buckets
            .checked_mul(r_max)
            .and_then(|x| x.checked_mul(c_max))
            .and_then(|x| x.checked_mul(shifts));
        if expected != Some(count) {
            return Err(LabError::Dump(format!(
                "table count {count} does not match header"
            )));
        }
        let mut tables = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let re = f64::from_bits(read_u64(&mut input)?);
            let im = f64::from_bits(read_u64(&mut input)?);
            tables.push(Complex64::new(re, im));
        }
        Ok(Dump { header, tables })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(io_err(path))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_exact(input: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    input
        .read_exact(buf)
        .map_err(|e| LabError::Dump(format!("truncated: {e}")))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(input, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
