//! Bit-packed state descriptors.
//!
//! A domain declares its quantized state fields once; the resulting
//! [`StateLayout`] packs every field at its minimal bit width into a single
//! 64-bit descriptor, with no per-field byte alignment.

use thiserror::Error;

/// A bit-packed state descriptor. Unused high bits are always zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PackedState(pub u64);

/// One quantized state field: an inclusive range of scaled-integer values on
/// a fixed step grid.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub name: &'static str,
    pub min: i64,
    pub max: i64,
    pub step: i64,
}

impl FieldSpec {
    pub fn new(name: &'static str, min: i64, max: i64, step: i64) -> FieldSpec {
        FieldSpec {
            name,
            min,
            max,
            step,
        }
    }

    /// Number of representable values.
    pub fn cardinality(&self) -> u64 {
        ((self.max - self.min) / self.step + 1) as u64
    }

    fn bits(&self) -> u32 {
        let card = self.cardinality();
        if card <= 1 {
            1
        } else {
            64 - (card - 1).leading_zeros()
        }
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("field {0}: step must be positive")]
    NonPositiveStep(&'static str),
    #[error("field {0}: max < min")]
    EmptyRange(&'static str),
    #[error("field {0}: range is not a whole number of steps")]
    MisalignedRange(&'static str),
    #[error("descriptor would need {0} bits, more than the 64 supported")]
    TooWide(u32),
}

#[derive(Debug, Error)]
pub enum PackError {
    #[error("field {field}: value {value} outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("field {field}: value {value} is not on the quantization grid")]
    OffGrid { field: &'static str, value: i64 },
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("corrupted state descriptor: field {field} index {index} exceeds cardinality")]
    FieldRange { field: &'static str, index: u64 },
    #[error("corrupted state descriptor: nonzero bits above declared width {width}")]
    TrailingBits { width: u32 },
}

/// Field layout for a fixed-width packed descriptor.
#[derive(Debug, Clone)]
pub struct StateLayout {
    fields: Vec<FieldSpec>,
    offsets: Vec<u32>,
    total_bits: u32,
}

impl StateLayout {
    pub fn new(fields: Vec<FieldSpec>) -> Result<StateLayout, LayoutError> {
        let mut offsets = Vec::with_capacity(fields.len());
        let mut offset = 0u32;
        for f in &fields {
            if f.step <= 0 {
                return Err(LayoutError::NonPositiveStep(f.name));
            }
            if f.max < f.min {
                return Err(LayoutError::EmptyRange(f.name));
            }
            if (f.max - f.min) % f.step != 0 {
                return Err(LayoutError::MisalignedRange(f.name));
            }
            offsets.push(offset);
            offset += f.bits();
        }
        if offset > 64 {
            return Err(LayoutError::TooWide(offset));
        }
        Ok(StateLayout {
            fields,
            offsets,
            total_bits: offset,
        })
    }

    pub fn fields(&self) -> &[FieldSpec] {
        &self.fields
    }

    /// Total descriptor width in bits (sum of per-field widths).
    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    /// Product of per-field cardinalities: the theoretical state-space size.
    pub fn state_space_size(&self) -> f64 {
        self.fields.iter().map(|f| f.cardinality() as f64).product()
    }

    pub fn encode(&self, values: &[i64]) -> Result<PackedState, PackError> {
        debug_assert_eq!(values.len(), self.fields.len());
        let mut bits = 0u64;
        for (i, f) in self.fields.iter().enumerate() {
            let v = values[i];
            if v < f.min || v > f.max {
                return Err(PackError::OutOfRange {
                    field: f.name,
                    value: v,
                    min: f.min,
                    max: f.max,
                });
            }
            if (v - f.min) % f.step != 0 {
                return Err(PackError::OffGrid {
                    field: f.name,
                    value: v,
                });
            }
            let index = ((v - f.min) / f.step) as u64;
            bits |= index << self.offsets[i];
        }
        Ok(PackedState(bits))
    }

    pub fn decode(&self, p: PackedState, out: &mut [i64]) -> Result<(), DecodeError> {
        debug_assert_eq!(out.len(), self.fields.len());
        if self.total_bits < 64 && (p.0 >> self.total_bits) != 0 {
            return Err(DecodeError::TrailingBits {
                width: self.total_bits,
            });
        }
        for (i, f) in self.fields.iter().enumerate() {
            let width = f.bits();
            let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            let index = (p.0 >> self.offsets[i]) & mask;
            if index >= f.cardinality() {
                return Err(DecodeError::FieldRange {
                    field: f.name,
                    index,
                });
            }
            out[i] = f.min + index as i64 * f.step;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> StateLayout {
        StateLayout::new(vec![
            FieldSpec::new("mode", 0, 5, 1),
            FieldSpec::new("a", -50, 50, 1),
            FieldSpec::new("v", 0, 150, 1),
        ])
        .unwrap()
    }

    #[test]
    fn widths_are_minimal() {
        let l = layout();
        // 6 values -> 3 bits, 101 -> 7 bits, 151 -> 8 bits.
        assert_eq!(l.total_bits(), 18);
        assert_eq!(l.state_space_size(), 6.0 * 101.0 * 151.0);
    }

    #[test]
    fn roundtrip_boundaries() {
        let l = layout();
        for values in [[0i64, -50, 0], [5, 50, 150], [3, 0, 75]] {
            let p = l.encode(&values).unwrap();
            let mut out = [0i64; 3];
            l.decode(p, &mut out).unwrap();
            assert_eq!(out, values);
        }
    }

    #[test]
    fn out_of_range_names_field() {
        let l = layout();
        let err = l.encode(&[0, 51, 0]).unwrap_err();
        assert!(matches!(err, PackError::OutOfRange { field: "a", .. }));
    }

    #[test]
    fn corrupted_descriptor_rejected() {
        let l = layout();
        let err = l.decode(PackedState(u64::MAX), &mut [0i64; 3]).unwrap_err();
        assert!(matches!(err, DecodeError::TrailingBits { .. }));
        // In-width bits but an index beyond the mode cardinality.
        let err = l.decode(PackedState(0b111), &mut [0i64; 3]).unwrap_err();
        assert!(matches!(err, DecodeError::FieldRange { field: "mode", .. }));
    }
}
