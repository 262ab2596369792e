//! MSB-first bit packing into byte blocks.

#[derive(Debug, Default, Clone)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn with_capacity_bits(bits: u64) -> Self {
        Self { bytes: Vec::with_capacity(bits.div_ceil(8) as usize), len: 0 }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = (self.len % 8) as u32;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> off;
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for j in (0..width).rev() {
            self.push((value >> j) & 1 == 1);
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

#[inline]
pub(crate) fn get_bit(bytes: &[u8], index: u64) -> bool {
    (bytes[(index / 8) as usize] >> (7 - index % 8)) & 1 == 1
}

/// Reads `width` (≤ 64) bits starting at bit `start`.
pub(crate) fn get_bits(bytes: &[u8], start: u64, width: u32) -> u64 {
    debug_assert!(width <= 64);
    let mut v = 0u64;
    for k in 0..u64::from(width) {
        v = (v << 1) | u64::from(get_bit(bytes, start + k));
    }
    v
}

/// Bits needed to index `count` distinct values; 0 for `count <= 1`.
pub fn ceil_log2(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(16512), 15);
        assert_eq!(ceil_log2(u64::MAX), 64);
    }

    #[test]
    fn writer_packs_msb_first() {
        let mut w = BitWriter::default();
        w.push_bits(0b101, 3);
        w.push_bits(0b11111, 5);
        w.push(true);
        let b = w.finish();
        assert_eq!(b, vec![0b1011_1111, 0b1000_0000]);
        assert_eq!(get_bits(&b, 0, 3), 0b101);
        assert_eq!(get_bits(&b, 3, 6), 0b111111);
        assert!(!get_bit(&b, 9));
    }
}
