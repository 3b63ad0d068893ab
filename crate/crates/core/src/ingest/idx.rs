use std::io::{Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};
use serde::Serialize;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// An unsigned-byte IDX tensor: `n` labels (`dims = [n]`) or `n` images of
/// `rows x cols` pixels (`dims = [n, rows, cols]`), row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    #[serde(skip)]
    pub data: Vec<u8>,
}

impl IdxTensor {
    pub fn images(n: usize, rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        Self::checked(vec![n, rows, cols], data)
    }

    pub fn labels(data: Vec<u8>) -> Self {
        IdxTensor { dims: vec![data.len()], data }
    }

    fn checked(dims: Vec<usize>, data: Vec<u8>) -> Result<Self> {
        let want: usize = dims.iter().product();
        if want != data.len() {
            return Err(Error::InvalidInput(format!("dims {dims:?} need {want} bytes, got {}", data.len())));
        }
        Ok(IdxTensor { dims, data })
    }

    pub fn len(&self) -> usize {
        self.dims[0]
    }

    pub fn is_empty(&self) -> bool {
        self.dims[0] == 0
    }

    pub fn magic(&self) -> u32 {
        if self.dims.len() == 1 {
            LABELS_MAGIC
        } else {
            IMAGES_MAGIC
        }
    }

    /// Bytes per item (pixels per image, 1 for labels).
    pub fn item_size(&self) -> usize {
        self.dims[1..].iter().product()
    }

    pub fn item(&self, i: usize) -> &[u8] {
        let s = self.item_size();
        &self.data[i * s..(i + 1) * s]
    }
}

struct Cursor<R> {
    inner: R,
    offset: usize,
}

impl<R: Read> Cursor<R> {
    fn u32(&mut self, what: &str) -> Result<u32> {
        let off = self.offset;
        let v = self.inner.read_u32::<BigEndian>().map_err(|e| truncated(off, what, e))?;
        self.offset += 4;
        Ok(v)
    }
}

fn truncated(offset: usize, what: &str, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format { offset, msg: format!("truncated file while reading {what}") }
    } else {
        Error::Io(e)
    }
}

/// Decodes an IDX stream.
pub fn decode_idx<R: Read>(reader: R) -> Result<IdxTensor> {
    let mut cur = Cursor { inner: reader, offset: 0 };
    let magic = cur.u32("magic number")?;
    let n_dims = match magic {
        IMAGES_MAGIC => 3,
        LABELS_MAGIC => 1,
        other => {
            return Err(Error::Format {
                offset: 0,
                msg: format!("bad magic number {other:#010x}, expected 0x00000803 or 0x00000801"),
            })
        }
    };
    let mut dims = Vec::with_capacity(n_dims);
    for k in 0..n_dims {
        dims.push(cur.u32(&format!("dimension {k}"))? as usize);
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(Error::Format {
        offset: 4,
        msg: format!("dimensions {dims:?} overflow"),
    })?;
    let start = cur.offset;
    let mut data = Vec::new();
    let got = cur.inner.by_ref().take(total as u64).read_to_end(&mut data)?;
    if got < total {
        return Err(Error::Format {
            offset: start + got,
            msg: format!("truncated file: expected {total} data bytes, found {got}"),
        });
    }
    Ok(IdxTensor { dims, data })
}

pub fn read_idx(path: impl AsRef<Path>) -> Result<IdxTensor> {
    let file = std::fs::File::open(path)?;
    decode_idx(std::io::BufReader::new(file))
}

pub fn encode_idx<W: Write>(tensor: &IdxTensor, mut out: W) -> Result<()> {
    if tensor.dims.len() != 1 && tensor.dims.len() != 3 {
        return Err(Error::InvalidInput("IDX tensors are 1-D labels or 3-D images".into()));
    }
    out.write_u32::<BigEndian>(tensor.magic())?;
    for &d in &tensor.dims {
        let d = u32::try_from(d).map_err(|_| Error::InvalidInput(format!("dimension {d} exceeds u32")))?;
        out.write_u32::<BigEndian>(d)?;
    }
    out.write_all(&tensor.data)?;
    out.flush()?;
    Ok(())
}

pub fn write_idx(tensor: &IdxTensor, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    encode_idx(tensor, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tiny_images() {
        let mut bytes = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
        bytes.extend([0, 1, 2, 3, 252, 253, 254, 255]);
        let t = decode_idx(&bytes[..]).unwrap();
        assert_eq!(t.dims, vec![2, 2, 2]);
        assert_eq!(t.item(1), &[252, 253, 254, 255]);
    }

    #[test]
    fn labels() {
        let bytes = [0, 0, 8, 1, 0, 0, 0, 3, 5, 0, 4];
        let t = decode_idx(&bytes[..]).unwrap();
        assert_eq!(t.data, vec![5, 0, 4]);
        assert_eq!(t.item_size(), 1);
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let bytes = [0, 0, 8, 2, 0, 0, 0, 0];
        match decode_idx(&bytes[..]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncation_offsets() {
        match decode_idx(&[0u8, 0, 8, 1, 0, 0][..]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        match decode_idx(&[0u8, 0, 8, 1, 0, 0, 0, 3, 7][..]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
