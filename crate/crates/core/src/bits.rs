//! Packed bit matrix used for array images, workloads and oracles.

use std::fmt;

use crate::error::ArrayError;

/// Row-major bit matrix, each row packed into `u64` words (bit `i % 64` of
/// word `i / 64` is column `i`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, ArrayError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ArrayError::Image("ragged rows".into()));
        }
        Ok(Self::from_fn(rows.len(), cols, |r, c| rows[r][c]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols);
        let w = self.words[row * self.words_per_row + col / 64];
        (w >> (col % 64)) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        assert!(row < self.rows && col < self.cols);
        let w = &mut self.words[row * self.words_per_row + col / 64];
        let mask = 1u64 << (col % 64);
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.words[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    pub fn row_popcount(&self, row: usize) -> u32 {
        self.row_words(row).iter().map(|w| w.count_ones()).sum()
    }

    pub fn not(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| !self.get(r, c))
    }

    /// One line per row of `'0'`/`'1'` characters.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if self.get(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ArrayError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = parse_bit_string(line)
                .map_err(|e| ArrayError::Image(format!("line {}: {e}", i + 1)))?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    /// Raw packed form: `ceil(cols/8)` bytes per row, row-major, the most
    /// significant bit of each byte is the lowest column index.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let bytes_per_row = self.cols.div_ceil(8);
        let mut out = vec![0u8; self.rows * bytes_per_row];
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out[r * bytes_per_row + c / 8] |= 0x80 >> (c % 8);
                }
            }
        }
        out
    }

    pub fn from_packed_bytes(bytes: &[u8], cols: usize) -> Result<Self, ArrayError> {
        if cols == 0 {
            return Err(ArrayError::Image("zero columns".into()));
        }
        let bytes_per_row = cols.div_ceil(8);
        if bytes.len() % bytes_per_row != 0 {
            return Err(ArrayError::Image(format!(
                "{} bytes is not a whole number of {bytes_per_row}-byte rows",
                bytes.len()
            )));
        }
        let rows = bytes.len() / bytes_per_row;
        Ok(Self::from_fn(rows, cols, |r, c| {
            bytes[r * bytes_per_row + c / 8] & (0x80 >> (c % 8)) != 0
        }))
    }

    /// Packed bytes written as hex, one row per line.
    pub fn to_hex(&self) -> String {
        let bytes_per_row = self.cols.div_ceil(8);
        let packed = self.to_packed_bytes();
        let mut out = String::new();
        for row in packed.chunks(bytes_per_row.max(1)).take(self.rows) {
            for b in row {
                out.push_str(&format!("{b:02x}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_hex(text: &str, cols: usize) -> Result<Self, ArrayError> {
        let mut bytes = Vec::new();
        let bytes_per_row = cols.div_ceil(8);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.len() != 2 * bytes_per_row {
                return Err(ArrayError::Image(format!(
                    "line {}: expected {} hex digits",
                    i + 1,
                    2 * bytes_per_row
                )));
            }
            for pair in line.as_bytes().chunks(2) {
                let s = std::str::from_utf8(pair).unwrap_or("");
                let b = u8::from_str_radix(s, 16)
                    .map_err(|_| ArrayError::Image(format!("line {}: bad hex '{s}'", i + 1)))?;
                bytes.push(b);
            }
        }
        Self::from_packed_bytes(&bytes, cols)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.to_text())
    }
}

pub fn parse_bit_string(s: &str) -> Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("invalid bit character '{other}'")),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packed_layout_is_msb_first() {
        let m = BitMatrix::from_rows(&[vec![
            true, false, false, false, false, false, false, false, true,
        ]])
        .unwrap();
        assert_eq!(m.to_packed_bytes(), vec![0x80, 0x80]);
        assert_eq!(m.to_hex(), "8080\n");
    }

    #[test]
    fn text_rejects_bad_characters() {
        assert!(BitMatrix::from_text("0101\n01a1\n").is_err());
        assert!(BitMatrix::from_text("01\n011\n").is_err());
    }

    proptest! {
        #[test]
        fn image_formats_roundtrip(rows in 1usize..6, cols in 1usize..80, seed in any::<u64>()) {
            let m = BitMatrix::from_fn(rows, cols, |r, c| (seed >> ((r * 7 + c) % 64)) & 1 == 1);
            prop_assert_eq!(&BitMatrix::from_text(&m.to_text()).unwrap(), &m);
            prop_assert_eq!(&BitMatrix::from_packed_bytes(&m.to_packed_bytes(), cols).unwrap(), &m);
            prop_assert_eq!(&BitMatrix::from_hex(&m.to_hex(), cols).unwrap(), &m);
        }
    }
}
