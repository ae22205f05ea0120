use std::f64::consts::PI;

use crate::channel::ArrayGeometry;
use crate::linalg::C64;

/// Quantized steering vectors; the index into `entries` is an agent's action.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    angles: Vec<f64>,
    entries: Vec<Vec<C64>>,
}

impl Codebook {
    /// `size` beams spread uniformly over (−π/2, π/2), centred in their bins.
    pub fn uniform(array: &ArrayGeometry, size: usize) -> Self {
        let angles: Vec<f64> = (0..size)
            .map(|q| -PI / 2.0 + PI * (q as f64 + 0.5) / size as f64)
            .collect();
        let entries = angles.iter().map(|&a| array.response(a)).collect();
        Self { angles, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn entry(&self, q: usize) -> &[C64] {
        &self.entries[q]
    }

    pub fn entries(&self) -> &[Vec<C64>] {
        &self.entries
    }
}
