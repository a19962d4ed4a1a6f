//! Binary-reflected Gray labeling over ascending symbol order.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `m`-bit labels attached to the symbols of a `2^m`-ary constellation.
///
/// Labels are stored as integers; bit position 0 is the most significant
/// bit of the label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabeling", into = "RawLabeling")]
pub struct BitLabeling {
    bits: usize,
    labels: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawLabeling {
    m: usize,
    labels: Vec<String>,
}

impl TryFrom<RawLabeling> for BitLabeling {
    type Error = Error;

    fn try_from(raw: RawLabeling) -> Result<Self> {
        let labels = raw
            .labels
            .iter()
            .map(|s| parse_label(s, raw.m))
            .collect::<Result<Vec<_>>>()?;
        BitLabeling::from_labels(raw.m, labels)
    }
}

impl From<BitLabeling> for RawLabeling {
    fn from(l: BitLabeling) -> Self {
        RawLabeling {
            m: l.bits,
            labels: (0..l.len()).map(|i| l.label_string(i)).collect(),
        }
    }
}

pub(crate) fn parse_label(s: &str, bits: usize) -> Result<u32> {
    if s.len() != bits || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(invalid(format!("label `{s}` is not a {bits}-bit string")));
    }
    Ok(u32::from_str_radix(s, 2).expect("validated binary string"))
}

impl BitLabeling {
    /// Builds a labeling from explicit integer labels, checking only that
    /// they form a bijection onto `{0,1}^bits`. The Gray property is checked
    /// separately by [`BitLabeling::is_gray`].
    pub fn from_labels(bits: usize, labels: Vec<u32>) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(invalid(format!("label width {bits} out of range 1..=16")));
        }
        if labels.len() != 1 << bits {
            return Err(invalid(format!(
                "{} labels for {bits}-bit labeling",
                labels.len()
            )));
        }
        let mut seen = vec![false; labels.len()];
        for &l in &labels {
            let slot = seen
                .get_mut(l as usize)
                .ok_or_else(|| invalid(format!("label {l} exceeds {bits} bits")))?;
            if *slot {
                return Err(invalid(format!("label {l} assigned twice")));
            }
            *slot = true;
        }
        Ok(BitLabeling { bits, labels })
    }

    /// Bits per label, `m = log2 M`.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Bit `position` (0 = most significant) of the label of symbol `symbol`.
    #[inline]
    pub fn bit(&self, symbol: usize, position: usize) -> u8 {
        ((self.labels[symbol] >> (self.bits - 1 - position)) & 1) as u8
    }

    /// Label of `symbol` as an MSB-first bit string.
    pub fn label_string(&self, symbol: usize) -> String {
        format!("{:0width$b}", self.labels[symbol], width = self.bits)
    }

    /// Every adjacent pair (in symbol order) differs in exactly one bit.
    pub fn is_gray(&self) -> bool {
        self.first_non_gray_pair().is_none()
    }

    /// Index `i` of the first pair `(i, i+1)` whose labels are not at
    /// Hamming distance one.
    pub fn first_non_gray_pair(&self) -> Option<usize> {
        self.labels
            .windows(2)
            .position(|w| (w[0] ^ w[1]).count_ones() != 1)
    }

    pub(crate) fn check_matches(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(invalid(format!(
                "labeling has {} labels but the constellation has {m} symbols",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Binary-reflected Gray code of `i − 1` for the `i`-th symbol.
pub fn gray_labels(m: usize) -> Result<BitLabeling> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!(
            "BICM needs M to be a power of two >= 2, got {m}"
        )));
    }
    let bits = m.trailing_zeros() as usize;
    let labels = (0..m as u32).map(|i| i ^ (i >> 1)).collect();
    BitLabeling::from_labels(bits, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(l: &BitLabeling) -> Vec<String> {
        (0..l.len()).map(|i| l.label_string(i)).collect()
    }

    #[test]
    fn small_codes() {
        assert_eq!(strings(&gray_labels(2).unwrap()), ["0", "1"]);
        assert_eq!(strings(&gray_labels(4).unwrap()), ["00", "01", "11", "10"]);
        assert_eq!(
            strings(&gray_labels(8).unwrap()),
            ["000", "001", "011", "010", "110", "111", "101", "100"]
        );
    }

    #[test]
    fn bit_positions_are_msb_first() {
        let l = gray_labels(8).unwrap();
        // symbol 4 carries 110
        assert_eq!((l.bit(4, 0), l.bit(4, 1), l.bit(4, 2)), (1, 1, 0));
    }

    #[test]
    fn rejects_non_power_of_two() {
        for m in [0, 1, 3, 6, 12] {
            assert!(matches!(gray_labels(m), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn non_gray_is_detected() {
        let l = BitLabeling::from_labels(2, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(l.first_non_gray_pair(), Some(1));
        assert!(BitLabeling::from_labels(2, vec![0, 1, 1, 3]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let l = gray_labels(16).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert!(s.contains("\"0001\""));
        assert_eq!(serde_json::from_str::<BitLabeling>(&s).unwrap(), l);
    }

    proptest! {
        #[test]
        fn gray_is_bijective_and_adjacent(bits in 1usize..=12) {
            let l = gray_labels(1 << bits).unwrap();
            prop_assert!(l.is_gray());
            let mut sorted = l.labels().to_vec();
            sorted.sort_unstable();
            prop_assert!(sorted.iter().enumerate().all(|(i, &v)| v as usize == i));
        }
    }
}
