use crate::error::{Error, Result};

const WORD: usize = 64;

/// Fixed-length vector over {0, 1}, packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    len: usize,
    words: Vec<u64>,
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        BinaryVector {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    /// Builds from a slice of 0/1 values; any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut v = BinaryVector::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(j),
                other => return Err(Error::value(format!("cell {j} is {other}, expected 0 or 1"))),
            }
        }
        Ok(v)
    }

    /// Builds a vector of length `len` with the given columns set.
    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = BinaryVector::zeros(len);
        for j in ones {
            if j >= len {
                return Err(Error::value(format!("index {j} out of range for length {len}")));
            }
            v.set(j);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        self.words[j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize) {
        assert!(j < self.len, "index {j} out of range for length {}", self.len);
        self.words[j / WORD] |= 1 << (j % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set columns, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + bit)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|j| self.get(j) as u8).collect()
    }

    /// Number of differing columns, i.e. the squared Euclidean distance.
    #[inline]
    pub fn hamming(&self, other: &BinaryVector) -> u32 {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Euclidean distance between two binary vectors of equal length.
pub fn euclidean_distance(a: &BinaryVector, b: &BinaryVector) -> Result<f64> {
    Error::check_dim(a.len(), b.len())?;
    Ok(f64::from(a.hamming(b)).sqrt())
}
