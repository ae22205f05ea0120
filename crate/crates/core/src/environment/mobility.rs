//! Two crossing streets; UEs enter at a street end and drive straight through.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreetParams {
    /// Streets span `[-half_length, half_length]` along their axis.
    pub half_length: f64,
    /// Lanes lie strictly inside `(-half_width, half_width)` across the street.
    pub half_width: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub dt: f64,
}

impl Default for StreetParams {
    fn default() -> Self {
        Self {
            half_length: 50.0,
            half_width: 4.0,
            speed_min: 2.0,
            speed_max: 5.0,
            dt: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Street {
    /// Runs along x; the lane offset is the y coordinate.
    AlongX,
    /// Runs along y; the lane offset is the x coordinate.
    AlongY,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserEquipment {
    pub id: usize,
    pub street: Street,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub active: bool,
    /// Last `T_m` omni rates, oldest first.
    pub memory: VecDeque<f64>,
}

impl UserEquipment {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }

    pub fn along(&self) -> f64 {
        match self.street {
            Street::AlongX => self.position[0],
            Street::AlongY => self.position[1],
        }
    }

    pub fn across(&self) -> f64 {
        match self.street {
            Street::AlongX => self.position[1],
            Street::AlongY => self.position[0],
        }
    }

    pub fn push_memory(&mut self, rate: f64) {
        self.memory.pop_front();
        self.memory.push_back(rate);
    }
}

pub fn spawn_episode<R: Rng + ?Sized>(
    rng: &mut R,
    params: &StreetParams,
    n_ues: usize,
    memory_len: usize,
) -> Vec<UserEquipment> {
    (0..n_ues)
        .map(|id| {
            let street = if rng.random_bool(0.5) { Street::AlongX } else { Street::AlongY };
            let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let lane = loop {
                let v = rng.random_range(-params.half_width..params.half_width);
                if v.abs() < params.half_width {
                    break v;
                }
            };
            let speed = if params.speed_max > params.speed_min {
                rng.random_range(params.speed_min..=params.speed_max)
            } else {
                params.speed_min
            };
            let along = -dir * params.half_length;
            let (position, velocity) = match street {
                Street::AlongX => ([along, lane], [dir * speed, 0.0]),
                Street::AlongY => ([lane, along], [0.0, dir * speed]),
            };
            UserEquipment {
                id,
                street,
                position,
                velocity,
                active: true,
                memory: std::iter::repeat_n(0.0, memory_len).collect(),
            }
        })
        .collect()
}

/// Moves every active UE by one time step. Returns `true` once no UE is active.
pub fn advance(ues: &mut [UserEquipment], params: &StreetParams) -> bool {
    for ue in ues.iter_mut().filter(|u| u.active) {
        ue.position[0] += ue.velocity[0] * params.dt;
        ue.position[1] += ue.velocity[1] * params.dt;
        if ue.along().abs() > params.half_length {
            ue.active = false;
        }
    }
    ues.iter().all(|u| !u.active)
}
