//! Demo workloads built on the parallel XOR: a binarized dense layer and a
//! one-time pad. Popcount, thresholding and byte packing are periphery logic
//! done in software; the array only ever computes XOR.

use crate::array::{ArrayState, ExecStats, RowMask};
use crate::bitcell::Logic;
use crate::bits::BitMatrix;
use crate::error::WorkloadError;

fn to_logic(bits: &[bool]) -> Vec<Logic> {
    bits.iter().map(|&b| Logic::from_bool(b)).collect()
}

/// Binarized dense layer. Bit 1 encodes +1 and bit 0 encodes -1; each weight
/// row is one output neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnnLayer {
    pub weights: BitMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnnOutput {
    /// `C - 2 * popcount(w XOR x)` per neuron, in `[-C, C]`.
    pub pre_activations: Vec<i64>,
    /// Sign threshold: `pre_activation >= 0`.
    pub outputs: Vec<bool>,
    /// Cost of the in-array XOR alone (weight reload and reads excluded).
    pub xor_stats: ExecStats,
}

impl BnnLayer {
    pub fn new(weights: BitMatrix) -> Self {
        BnnLayer { weights }
    }

    pub fn neurons(&self) -> usize {
        self.weights.rows()
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    /// Runs the layer on `array`. The XOR overwrites the stored weights, so
    /// they are rewritten before every invocation.
    pub fn forward(
        &self,
        array: &mut ArrayState,
        activations: &[bool],
    ) -> Result<BnnOutput, WorkloadError> {
        if activations.len() != self.inputs() {
            return Err(WorkloadError::Dimension(format!(
                "{} activations for {} inputs",
                activations.len(),
                self.inputs()
            )));
        }
        if array.cols() != self.inputs() || array.rows() < self.neurons() {
            return Err(WorkloadError::Dimension(format!(
                "{}x{} layer does not fit a {}x{} array",
                self.neurons(),
                self.inputs(),
                array.rows(),
                array.cols()
            )));
        }
        array.load_image(&self.weights)?;
        let rows: Vec<usize> = (0..self.neurons()).collect();
        let mask = RowMask::from_rows(array.rows(), &rows)?;
        let xor_stats = array.xor_parallel(&mask, &to_logic(activations))?;
        let c = self.inputs() as i64;
        let mut pre_activations = Vec::with_capacity(self.neurons());
        for r in rows {
            let ones = array.read_row_bools(r)?.iter().filter(|&&b| b).count() as i64;
            pre_activations.push(c - 2 * ones);
        }
        let outputs = pre_activations.iter().map(|&v| v >= 0).collect();
        Ok(BnnOutput {
            pre_activations,
            outputs,
            xor_stats,
        })
    }
}

/// Runs one layer on a fresh array sized to the weights.
pub fn bnn_layer_forward(
    weights: &BitMatrix,
    activations: &[bool],
) -> Result<BnnOutput, WorkloadError> {
    let mut array = ArrayState::new(weights.rows(), weights.cols())?;
    BnnLayer::new(weights.clone()).forward(&mut array, activations)
}

/// Reference dot products in explicit ±1 arithmetic.
pub fn bnn_oracle(weights: &BitMatrix, activations: &[bool]) -> Vec<i64> {
    let pm = |b: bool| if b { 1i64 } else { -1 };
    (0..weights.rows())
        .map(|r| {
            (0..weights.cols())
                .map(|c| pm(weights.get(r, c)) * pm(activations[c]))
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtpMessage {
    pub plaintext: Vec<u8>,
    pub key: Vec<u8>,
    pub ciphertext: Vec<u8>,
}

impl OtpMessage {
    pub fn encrypt(
        array: &mut ArrayState,
        plaintext: &[u8],
        key: &[u8],
    ) -> Result<Self, WorkloadError> {
        let ciphertext = otp_apply(array, plaintext, key)?;
        Ok(OtpMessage {
            plaintext: plaintext.to_vec(),
            key: key.to_vec(),
            ciphertext,
        })
    }
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|ch| ch.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)))
        .collect()
}

/// XORs `data` with `key` in the array. Key blocks of `cols` bits are written
/// as operand A rows; each data block is driven as operand B onto its own
/// row. The final block is zero-padded. The array is refilled with fresh key
/// blocks once every row has been consumed.
pub fn otp_apply(
    array: &mut ArrayState,
    data: &[u8],
    key: &[u8],
) -> Result<Vec<u8>, WorkloadError> {
    if data.len() != key.len() {
        return Err(WorkloadError::Dimension(format!(
            "message of {} bytes, key of {} bytes",
            data.len(),
            key.len()
        )));
    }
    let cols = array.cols();
    let rows = array.rows();
    let pad = |bits: Vec<bool>| {
        let mut bits = bits;
        let len = bits.len().div_ceil(cols).max(1) * cols;
        bits.resize(len, false);
        bits
    };
    let data_bits = pad(bytes_to_bits(data));
    let key_bits = pad(bytes_to_bits(key));
    let mut out = Vec::with_capacity(data_bits.len());
    let blocks: Vec<(&[bool], &[bool])> =
        data_bits.chunks(cols).zip(key_bits.chunks(cols)).collect();
    for group in blocks.chunks(rows) {
        for (r, (_, k)) in group.iter().enumerate() {
            array.write_row_bools(r, k)?;
        }
        for (r, (d, _)) in group.iter().enumerate() {
            let mask = RowMask::from_rows(rows, &[r])?;
            array.xor_parallel(&mask, &to_logic(d))?;
        }
        for r in 0..group.len() {
            out.extend(array.read_row_bools(r)?);
        }
    }
    out.truncate(data.len() * 8);
    Ok(bits_to_bytes(&out))
}

pub fn otp_encrypt(
    array: &mut ArrayState,
    plaintext: &[u8],
    key: &[u8],
) -> Result<Vec<u8>, WorkloadError> {
    otp_apply(array, plaintext, key)
}

pub fn otp_decrypt(
    array: &mut ArrayState,
    ciphertext: &[u8],
    key: &[u8],
) -> Result<Vec<u8>, WorkloadError> {
    otp_apply(array, ciphertext, key)
}

/// Software reference.
pub fn xor_oracle(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}
