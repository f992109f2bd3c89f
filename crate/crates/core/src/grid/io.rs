//! `GGR1` grid files.
//!
//! Little-endian layout, no padding:
//!
//! ```text
//! "GGR1"            4 bytes magic
//! version           u32 (= 1)
//! rank              u8
//! dtype             u8  (0 = real f64, 1 = complex f64 pairs re,im)
//! per axis          u64 extent, f64 spacing, f64 origin
//! payload           f64 values, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use super::{Grid, GridError, GridGeometry};

const MAGIC: &[u8; 4] = b"GGR1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 1 + 1;
const AXIS_LEN: usize = 8 + 8 + 8;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("unknown dtype {0}")]
    UnknownDtype(u8),
    #[error("dtype mismatch: file holds {found}, expected {expected}")]
    DtypeMismatch { expected: &'static str, found: &'static str },
    #[error("truncated file: needed {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("malformed header: {0}")]
    Malformed(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sample types storable in a grid file.
pub trait GridValue: Copy {
    const DTYPE: u8;
    const NAME: &'static str;
    const WORDS: usize;

    fn push_words(&self, out: &mut Vec<u8>);
    fn from_words(words: &[f64]) -> Self;
    fn is_finite_value(&self) -> bool;
    fn zero_value() -> Self;
}

impl GridValue for f64 {
    const DTYPE: u8 = 0;
    const NAME: &'static str = "real64";
    const WORDS: usize = 1;

    fn push_words(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn from_words(words: &[f64]) -> Self {
        words[0]
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn zero_value() -> Self {
        0.0
    }
}

impl GridValue for Complex64 {
    const DTYPE: u8 = 1;
    const NAME: &'static str = "complex128";
    const WORDS: usize = 2;

    fn push_words(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }

    fn from_words(words: &[f64]) -> Self {
        Complex64::new(words[0], words[1])
    }

    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn zero_value() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// A grid read from disk whose dtype is only known at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGrid {
    Real(Grid<f64>),
    Complex(Grid<Complex64>),
}

impl AnyGrid {
    pub fn geometry(&self) -> &GridGeometry {
        match self {
            AnyGrid::Real(g) => g.geometry(),
            AnyGrid::Complex(g) => g.geometry(),
        }
    }

    pub fn dtype(&self) -> u8 {
        match self {
            AnyGrid::Real(_) => f64::DTYPE,
            AnyGrid::Complex(_) => Complex64::DTYPE,
        }
    }

    pub fn into_real(self) -> Result<Grid<f64>, FormatError> {
        match self {
            AnyGrid::Real(g) => Ok(g),
            AnyGrid::Complex(_) => {
                Err(FormatError::DtypeMismatch { expected: f64::NAME, found: Complex64::NAME })
            }
        }
    }

    pub fn into_complex(self) -> Result<Grid<Complex64>, FormatError> {
        match self {
            AnyGrid::Complex(g) => Ok(g),
            AnyGrid::Real(_) => {
                Err(FormatError::DtypeMismatch { expected: Complex64::NAME, found: f64::NAME })
            }
        }
    }
}

pub fn encode_grid<T: GridValue>(grid: &Grid<T>) -> Vec<u8> {
    let g = grid.geometry();
    let mut out =
        Vec::with_capacity(HEADER_LEN + g.rank() * AXIS_LEN + grid.len() * T::WORDS * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(g.rank() as u8);
    out.push(T::DTYPE);
    for a in 0..g.rank() {
        out.extend_from_slice(&(g.extents()[a] as u64).to_le_bytes());
        out.extend_from_slice(&g.spacing()[a].to_le_bytes());
        out.extend_from_slice(&g.origin()[a].to_le_bytes());
    }
    for v in grid.values() {
        v.push_words(&mut out);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(FormatError::Truncated { needed: end, have: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_grid(bytes: &[u8]) -> Result<AnyGrid, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let rank = r.u8()? as usize;
    let dtype = r.u8()?;
    if dtype > 1 {
        return Err(FormatError::UnknownDtype(dtype));
    }
    let mut extents = Vec::with_capacity(rank);
    let mut spacing = Vec::with_capacity(rank);
    let mut origin = Vec::with_capacity(rank);
    for _ in 0..rank {
        let e = r.u64()?;
        extents.push(usize::try_from(e).map_err(|_| {
            GridError::InvalidGeometry(format!("extent {e} does not fit in memory"))
        })?);
        spacing.push(r.f64()?);
        origin.push(r.f64()?);
    }
    let geometry = GridGeometry::new(extents, spacing, origin)?;
    match dtype {
        0 => Ok(AnyGrid::Real(read_payload(&mut r, geometry)?)),
        _ => Ok(AnyGrid::Complex(read_payload(&mut r, geometry)?)),
    }
}

fn read_payload<T: GridValue>(r: &mut Reader<'_>, geometry: GridGeometry) -> Result<Grid<T>, FormatError> {
    let n = geometry.len();
    let needed = n
        .checked_mul(T::WORDS * 8)
        .ok_or_else(|| GridError::InvalidGeometry("payload size overflows".into()))?;
    let payload = r.take(needed)?;
    if r.pos != r.bytes.len() {
        return Err(FormatError::TrailingBytes(r.bytes.len() - r.pos));
    }
    let mut words = [0.0; 2];
    let values = payload
        .chunks_exact(T::WORDS * 8)
        .map(|chunk| {
            for (w, b) in words.iter_mut().zip(chunk.chunks_exact(8)) {
                *w = f64::from_le_bytes(b.try_into().unwrap());
            }
            T::from_words(&words[..T::WORDS])
        })
        .collect();
    Ok(Grid::new(geometry, values)?)
}

/// Write atomically: the bytes go to a sibling temp file that is then renamed.
pub fn write_grid<T: GridValue>(path: impl AsRef<Path>, grid: &Grid<T>) -> Result<(), FormatError> {
    let path = path.as_ref();
    let bytes = encode_grid(grid);
    let tmp = path.with_extension("ggr.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<AnyGrid, FormatError> {
    decode_grid(&fs::read(path)?)
}
