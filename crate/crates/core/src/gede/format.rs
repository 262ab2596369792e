//! The `EGD1` container file.
//!
//! ```text
//! magic "EGD1" | version u8
//! n u64 | m u64 | n_b u64
//! l_t u32 | l_b u32 | l_d u32 | beta u32 | tau u32
//! schema block:  mode u8 | target u32 (u32::MAX = none) | columns u32
//!                per column: name_len u16 | name | kind u8 | bit_width u32 | offset i64
//! base positions: l_b × u32 (increasing)
//! cluster positions: count u32 | count × u32
//! bases block | records block | weights block   (each byte-aligned, MSB-first)
//! checksum u64 (CRC-64/XZ of every preceding byte)
//! ```
//!
//! All integers are little-endian. Records are `⌈log2 n_b⌉` id bits then
//! `l_d` deviation bits; weights are stored as `w - 1` in `⌈log2 n⌉` bits.

use std::io::{self, Read, Seek, SeekFrom, Write};

use crc::{Crc, CRC_64_XZ};

use crate::bitcodec::{ColumnKind, ColumnSchema, Record, Schema};

use super::bits::{get_bit, get_bits, BitWriter};
use super::container::{CompressedDataset, ContainerHeader};
use super::{CondensedMode, GedeError};

pub const MAGIC: [u8; 4] = *b"EGD1";
pub const VERSION: u8 = 1;
const NO_TARGET: u32 = u32::MAX;
const CHECKSUM: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

fn encode_header(h: &ContainerHeader) -> Vec<u8> {
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    for v in [h.n, h.m, h.n_b] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [h.l_t(), h.l_b(), h.l_d(), h.beta, h.tau] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(h.mode.code());
    out.extend_from_slice(&h.target.unwrap_or(NO_TARGET).to_le_bytes());
    out.extend_from_slice(&(h.schema.len() as u32).to_le_bytes());
    for c in h.schema.columns() {
        let name = c.name.as_bytes();
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name);
        out.push(c.kind.code());
        out.extend_from_slice(&c.bit_width.to_le_bytes());
        out.extend_from_slice(&c.offset.to_le_bytes());
    }
    for &p in &h.base_positions {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out.extend_from_slice(&(h.cluster_positions.len() as u32).to_le_bytes());
    for &p in &h.cluster_positions {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

/// Serialized header length in bits; the `S_params` term of the size model.
pub fn header_bits(h: &ContainerHeader) -> u64 {
    encode_header(h).len() as u64 * 8
}

impl CompressedDataset {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = encode_header(&self.header);
        out.extend_from_slice(&self.bases);
        out.extend_from_slice(&self.records);
        let mut ww = BitWriter::default();
        let wb = self.header.weight_bits();
        for &w in &self.weights {
            ww.push_bits(w - 1, wb);
        }
        out.extend_from_slice(&ww.finish());
        let sum = CHECKSUM.checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn encoded_len(&self) -> u64 {
        header_bits(&self.header) / 8
            + self.header.base_block_bytes()
            + self.header.record_block_bytes()
            + self.header.weight_block_bytes()
            + 8
    }

    /// Parses and fully validates a container.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GedeError> {
        if bytes.len() < 8 {
            return Err(GedeError::CorruptContainer("truncated container".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let mut r = body;
        let header = read_header(&mut r, body.len() as u64)?;
        let bases = take_block(&mut r, u128::from(header.n_b) * u128::from(header.l_b()))?;
        let records = take_block(&mut r, u128::from(header.rows()) * u128::from(header.record_bits()))?;
        let wblock = take_block(&mut r, u128::from(header.m) * u128::from(header.weight_bits()))?;
        if !r.is_empty() {
            return Err(GedeError::CorruptContainer(format!("{} trailing bytes", r.len())));
        }
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if stored != CHECKSUM.checksum(body) && !cfg!(fuzzing) {
            return Err(GedeError::ChecksumMismatch);
        }
        let wb = header.weight_bits();
        let weights = (0..header.m).map(|j| get_bits(&wblock, j * u64::from(wb), wb) + 1).collect();
        CompressedDataset::from_parts(header, bases, records, weights)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, GedeError> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }

    /// Bits of header overhead, reported next to `best_size`.
    pub fn header_bits(&self) -> u64 {
        header_bits(&self.header)
    }
}

/// Takes a packed block of `bits` bits; the padding in its last byte must
/// be zero.
fn take_block(r: &mut &[u8], bits: u128) -> Result<Vec<u8>, GedeError> {
    let len = u64::try_from(bits.div_ceil(8)).map_err(|_| GedeError::CorruptContainer("block too large".into()))?;
    let block = take(r, len)?;
    let used = (bits % 8) as u32;
    if used != 0 && block.last().is_some_and(|b| b & (0xff >> used) != 0) {
        return Err(GedeError::CorruptContainer("nonzero block padding".into()));
    }
    Ok(block)
}

fn take(r: &mut &[u8], len: u64) -> Result<Vec<u8>, GedeError> {
    if (r.len() as u64) < len {
        return Err(GedeError::CorruptContainer("truncated block".into()));
    }
    let (head, rest) = r.split_at(len as usize);
    *r = rest;
    Ok(head.to_vec())
}

struct Fields<'a, R> {
    r: &'a mut R,
    /// Upper bound on bytes left, used to reject absurd counts before
    /// allocating.
    budget: u64,
}

impl<R: Read> Fields<'_, R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], GedeError> {
        let mut b = [0u8; N];
        self.spend(N as u64)?;
        self.r.read_exact(&mut b).map_err(eof)?;
        Ok(b)
    }

    fn spend(&mut self, n: u64) -> Result<(), GedeError> {
        self.budget = self
            .budget
            .checked_sub(n)
            .ok_or_else(|| GedeError::CorruptContainer("header runs past end of file".into()))?;
        Ok(())
    }

    fn u8(&mut self) -> Result<u8, GedeError> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, GedeError> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32, GedeError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, GedeError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn i64(&mut self) -> Result<i64, GedeError> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn u32_list(&mut self, count: u64) -> Result<Vec<u32>, GedeError> {
        self.spend(0)?;
        if count.saturating_mul(4) > self.budget {
            return Err(GedeError::CorruptContainer("position list runs past end of file".into()));
        }
        (0..count).map(|_| self.u32()).collect()
    }
}

fn eof(e: io::Error) -> GedeError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        GedeError::CorruptContainer("truncated header".into())
    } else {
        GedeError::Io(e)
    }
}

/// Reads and checks the header. `budget` bounds the bytes available.
fn read_header<R: Read>(r: &mut R, budget: u64) -> Result<ContainerHeader, GedeError> {
    let mut f = Fields { r, budget };
    if f.bytes::<4>()? != MAGIC {
        return Err(GedeError::BadMagic);
    }
    let version = f.u8()?;
    if version != VERSION {
        return Err(GedeError::UnsupportedVersion(version));
    }
    let (n, m, n_b) = (f.u64()?, f.u64()?, f.u64()?);
    let (l_t, l_b, l_d, beta, tau) = (f.u32()?, f.u32()?, f.u32()?, f.u32()?, f.u32()?);
    let mode = CondensedMode::from_code(f.u8()?)
        .ok_or_else(|| GedeError::CorruptContainer("unknown condensed mode".into()))?;
    let target = match f.u32()? {
        NO_TARGET => None,
        t => Some(t),
    };
    let ncols = f.u32()?;
    // smallest column entry is 15 bytes
    if u64::from(ncols) * 15 > f.budget {
        return Err(GedeError::CorruptContainer("column count runs past end of file".into()));
    }
    let mut columns = Vec::with_capacity(ncols as usize);
    for _ in 0..ncols {
        let len = f.u16()?;
        f.spend(u64::from(len))?;
        let mut name = vec![0u8; len as usize];
        f.r.read_exact(&mut name).map_err(eof)?;
        let name = String::from_utf8(name)
            .map_err(|_| GedeError::CorruptContainer("column name is not utf-8".into()))?;
        let kind = ColumnKind::from_code(f.u8()?)
            .ok_or_else(|| GedeError::CorruptContainer("unknown column kind".into()))?;
        let bit_width = f.u32()?;
        let offset = f.i64()?;
        columns.push(ColumnSchema { name, kind, bit_width, offset });
    }
    let schema = Schema::new(columns).map_err(|e| GedeError::CorruptContainer(e.to_string()))?;
    if schema.total_bits() != l_t || l_b.checked_add(l_d) != Some(l_t) {
        return Err(GedeError::CorruptContainer("bit counts disagree with schema".into()));
    }
    let base_positions = f.u32_list(u64::from(l_b))?;
    let ncluster = f.u32()?;
    let cluster_positions = f.u32_list(u64::from(ncluster))?;
    let header = ContainerHeader { schema, target, mode, n, m, n_b, beta, tau, base_positions, cluster_positions };
    header.validate()?;
    let blocks = u128::from(header.base_block_bytes())
        + u128::from(header.record_block_bytes())
        + u128::from(header.weight_block_bytes());
    if blocks > u128::from(f.budget) {
        return Err(GedeError::CorruptContainer("blocks run past end of file".into()));
    }
    Ok(header)
}

struct Counting<R> {
    inner: R,
    read: u64,
}

impl<R: Read> Read for Counting<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let k = self.inner.read(buf)?;
        self.read += k as u64;
        Ok(k)
    }
}

/// Random-access reader over a container on disk (or any seekable source).
///
/// Opening reads only the header. Each record access seeks to the record,
/// then to its base, and reads just the bytes they span; alternatively
/// [`ContainerReader::cache_bases`] loads the whole base block once. The
/// checksum is only checked by [`ContainerReader::verify`], which reads the
/// whole file.
pub struct ContainerReader<R> {
    src: Counting<R>,
    header: ContainerHeader,
    dev_positions: Vec<u32>,
    bases: Option<Vec<u8>>,
    bases_at: u64,
    records_at: u64,
    total_len: u64,
}

impl<R: Read + Seek> ContainerReader<R> {
    pub fn open(inner: R) -> Result<Self, GedeError> {
        let mut src = Counting { inner, read: 0 };
        let total_len = src.inner.seek(SeekFrom::End(0))?;
        src.inner.seek(SeekFrom::Start(0))?;
        if total_len < 8 {
            return Err(GedeError::CorruptContainer("truncated container".into()));
        }
        let header = read_header(&mut src, total_len - 8)?;
        let bases_at = header_bits(&header) / 8;
        let expected =
            bases_at + header.base_block_bytes() + header.record_block_bytes() + header.weight_block_bytes() + 8;
        if expected != total_len {
            return Err(GedeError::CorruptContainer(format!(
                "file is {total_len} bytes, layout needs {expected}"
            )));
        }
        let records_at = bases_at + header.base_block_bytes();
        let dev_positions = header.deviation_positions();
        Ok(Self { src, header, dev_positions, bases: None, bases_at, records_at, total_len })
    }

    /// Loads the base block so later accesses read only their record.
    pub fn cache_bases(&mut self) -> Result<(), GedeError> {
        if self.bases.is_none() {
            let mut bases = vec![0u8; self.header.base_block_bytes() as usize];
            self.src.inner.seek(SeekFrom::Start(self.bases_at))?;
            self.src.read_exact(&mut bases).map_err(eof)?;
            self.bases = Some(bases);
        }
        Ok(())
    }

    pub fn header(&self) -> &ContainerHeader {
        &self.header
    }

    /// Number of original records.
    pub fn len(&self) -> u64 {
        self.header.n
    }

    pub fn is_empty(&self) -> bool {
        self.header.n == 0
    }

    pub fn bytes_read(&self) -> u64 {
        self.src.read
    }

    pub fn file_len(&self) -> u64 {
        self.total_len
    }

    /// Reads `bits` bits starting `bit0` bits into the file region at
    /// `region`; returns the bytes and the offset of `bit0` in them.
    fn read_bits(&mut self, region: u64, bit0: u64, bits: u64) -> Result<(Vec<u8>, u64), GedeError> {
        let start = region + bit0 / 8;
        let end = region + (bit0 + bits).div_ceil(8);
        let mut buf = vec![0u8; (end - start) as usize];
        self.src.inner.seek(SeekFrom::Start(start))?;
        self.src.read_exact(&mut buf).map_err(eof)?;
        Ok((buf, bit0 % 8))
    }

    /// Decodes original record `index`.
    pub fn record(&mut self, index: u64) -> Result<Record, GedeError> {
        if index >= self.header.n {
            return Err(GedeError::IndexOutOfRange { index, len: self.header.n });
        }
        let rb = self.header.record_bits();
        let (buf, bit0) = self.read_bits(self.records_at, index * rb, rb)?;
        let id = get_bits(&buf, bit0, self.header.id_bits());
        if id >= self.header.n_b {
            return Err(GedeError::CorruptContainer("base id out of range".into()));
        }
        let l_b = u64::from(self.header.l_b());
        let (base, base0) = match &self.bases {
            Some(b) => (std::borrow::Cow::Borrowed(b.as_slice()), id * l_b),
            None => {
                let (b, off) = self.read_bits(self.bases_at, id * l_b, l_b)?;
                (std::borrow::Cow::Owned(b), off)
            }
        };
        let mut row = crate::bitcodec::BitMatrix::zeroed(1, self.header.schema.clone());
        for (k, &p) in self.header.base_positions.iter().enumerate() {
            row.set(0, p as usize, get_bit(&base, base0 + k as u64));
        }
        let dev0 = bit0 + u64::from(self.header.id_bits());
        for (k, &p) in self.dev_positions.iter().enumerate() {
            row.set(0, p as usize, get_bit(&buf, dev0 + k as u64));
        }
        Ok(row.decode_row(0))
    }

    /// Reads the whole file and checks the trailing checksum.
    pub fn verify(&mut self) -> Result<(), GedeError> {
        self.src.inner.seek(SeekFrom::Start(0))?;
        let mut all = Vec::with_capacity(self.total_len as usize);
        (&mut self.src).take(self.total_len).read_to_end(&mut all)?;
        let (body, tail) = all.split_at(all.len() - 8);
        if u64::from_le_bytes(tail.try_into().unwrap()) != CHECKSUM.checksum(body) && !cfg!(fuzzing) {
            return Err(GedeError::ChecksumMismatch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcodec::{encode_tabular, Value};
    use crate::gede::{compress, decompress, random_access, SearchConfig};
    use std::io::Cursor;

    fn sample() -> CompressedDataset {
        let s = Schema::new(vec![ColumnSchema::int("a", -5, 6), ColumnSchema::float32("b")]).unwrap();
        let rows: Vec<_> = (0..50)
            .map(|i| vec![Value::Int(i % 7 - 5), Value::F32((i % 5) as f32 * 0.25)])
            .collect();
        let bm = encode_tabular(&rows, &s).unwrap();
        let mut cd = compress(&bm, &SearchConfig { beta: 2, tau: 4, condensed_mode: CondensedMode::Stored, target: None }).unwrap();
        cd.set_target(Some(1)).unwrap();
        cd
    }

    #[test]
    fn bytes_round_trip() {
        let cd = sample();
        let bytes = cd.to_bytes();
        assert_eq!(&bytes[..4], b"EGD1");
        assert_eq!(bytes[4], 1);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 50);
        assert_eq!(bytes.len() as u64, cd.encoded_len());
        let back = CompressedDataset::from_bytes(&bytes).unwrap();
        assert_eq!(back, cd);
        assert_eq!(back.target(), Some(1));
    }

    #[test]
    fn detects_bit_flips_and_truncation() {
        let bytes = sample().to_bytes();
        let mut flipped = bytes.clone();
        let last = flipped.len() - 9;
        flipped[last] ^= 1;
        assert!(CompressedDataset::from_bytes(&flipped).is_err());
        assert!(CompressedDataset::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(CompressedDataset::from_bytes(&bad), Err(GedeError::BadMagic)));
        let mut v2 = bytes;
        v2[4] = 9;
        assert!(matches!(CompressedDataset::from_bytes(&v2), Err(GedeError::UnsupportedVersion(9))));
    }

    #[test]
    fn reader_matches_in_memory_access() {
        let cd = sample();
        let full = decompress(&cd).unwrap();
        let mut rd = ContainerReader::open(Cursor::new(cd.to_bytes())).unwrap();
        let opened = rd.bytes_read();
        let h = cd.header().clone();
        let per_access = h.record_bits().div_ceil(8) + 1 + u64::from(h.l_b()).div_ceil(8) + 1;
        for i in 0..cd.n() {
            let before = rd.bytes_read();
            let rec = rd.record(i).unwrap();
            assert_eq!(rec, full.decode_row(i as usize));
            assert_eq!(rec, random_access(&cd, i).unwrap());
            assert!(rd.bytes_read() - before <= per_access);
        }
        assert_eq!(opened, cd.header_bits() / 8);
        rd.cache_bases().unwrap();
        for i in (0..cd.n()).rev() {
            let before = rd.bytes_read();
            assert_eq!(rd.record(i).unwrap(), full.decode_row(i as usize));
            assert!(rd.bytes_read() - before <= h.record_bits().div_ceil(8) + 1);
        }
        rd.verify().unwrap();
        assert!(rd.record(cd.n()).is_err());
    }
}
