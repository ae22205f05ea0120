//! Per-BS observation vectors built from the omni-rate memories of the UEs
//! the BS currently serves.

use serde::{Deserialize, Serialize};

use crate::environment::UserEquipment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEncoder {
    /// UE slots the network was built for.
    pub slots: usize,
    pub memory_len: usize,
    pub include_locations: bool,
    /// Rates are divided by this and clipped to [0, 1].
    pub rate_scale: f64,
    /// Coordinates are divided by this.
    pub position_scale: f64,
}

impl StateEncoder {
    pub fn input_dim(&self) -> usize {
        self.slots * self.memory_len + if self.include_locations { 2 * self.slots } else { 0 }
    }

    /// Encodes the view of BS `bs`. `selected[i]` is the UE id placed in slot `i`;
    /// missing slots and UEs not served by `bs` stay zero.
    pub fn encode(
        &self,
        bs: usize,
        ues: &[UserEquipment],
        association: &[Option<usize>],
        selected: &[usize],
    ) -> Result<Vec<f64>> {
        if selected.len() > self.slots {
            return Err(Error::DimensionMismatch {
                expected: self.slots,
                actual: selected.len(),
            });
        }
        let mut x = vec![0.0; self.input_dim()];
        let loc_base = self.slots * self.memory_len;
        for (slot, &id) in selected.iter().enumerate() {
            let ue = &ues[id];
            if ue.memory.len() != self.memory_len {
                return Err(Error::DimensionMismatch {
                    expected: self.memory_len,
                    actual: ue.memory.len(),
                });
            }
            if association.get(id).copied().flatten() != Some(bs) {
                continue;
            }
            let dst = &mut x[slot * self.memory_len..(slot + 1) * self.memory_len];
            for (d, &r) in dst.iter_mut().zip(&ue.memory) {
                *d = (r / self.rate_scale).clamp(0.0, 1.0);
            }
            if self.include_locations {
                x[loc_base + 2 * slot] = ue.position[0] / self.position_scale;
                x[loc_base + 2 * slot + 1] = ue.position[1] / self.position_scale;
            }
        }
        Ok(x)
    }

    /// Identity slot map: UE `i` in slot `i`.
    pub fn encode_all(&self, bs: usize, ues: &[UserEquipment], association: &[Option<usize>]) -> Result<Vec<f64>> {
        let ids: Vec<usize> = (0..ues.len()).collect();
        self.encode(bs, ues, association, &ids)
    }
}
