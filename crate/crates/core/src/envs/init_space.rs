//! Initial-state abstraction maps for the two environments.
//!
//! The scheduler explores a low-dimensional abstraction of the initial-state
//! space; these adapters define that abstraction per environment: how to
//! project a full initial state down, how to lift an abstraction point back
//! up (sampling the components the abstraction leaves free), and which box
//! the abstraction lives in.

use super::{CartpoleParams, HighwayEnv, HighwayParams};
use crate::maximizer::InitSpace;
use crate::rng::Rng;
use rand::Rng as _;

/// Cartpole abstraction: cart position and pole angle.
///
/// The box is deliberately smaller than the termination region — position
/// restricted to [-1, 1] and angle to half the terminal limit — so scheduled
/// episodes never start on (or beyond) the edge where they would end
/// immediately. Velocities are sampled from the environment's default reset
/// range on lift.
#[derive(Debug, Clone)]
pub struct CartpoleInitSpace {
    params: CartpoleParams,
    bounds: [(f64, f64); 2],
}

impl CartpoleInitSpace {
    pub fn new(params: CartpoleParams) -> Self {
        let half_angle = params.theta_threshold * 0.5;
        Self { bounds: [(-1.0, 1.0), (-half_angle, half_angle)], params }
    }
}

impl InitSpace for CartpoleInitSpace {
    fn abs_dim(&self) -> usize {
        2
    }

    fn init_dim(&self) -> usize {
        4
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn begin_node(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn project(&self, init: &[f64]) -> Vec<f64> {
        vec![init[0], init[2]]
    }

    fn lift(&self, abs: &[f64], rng: &mut Rng) -> Vec<f64> {
        let b = self.params.reset_bound;
        vec![abs[0], rng.gen_range(-b..=b), abs[1], rng.gen_range(-b..=b)]
    }

    fn is_valid(&self, init: &[f64]) -> bool {
        init.len() == 4
            && init.iter().all(|v| v.is_finite())
            && init[0].abs() <= self.params.x_threshold
            && init[2].abs() <= self.params.theta_threshold
    }

    fn full_bounds(&self) -> Vec<(f64, f64)> {
        let b = self.params.reset_bound;
        vec![self.bounds[0], (-b, b), self.bounds[1], (-b, b)]
    }
}

/// Highway abstraction: the planar positions of every vehicle, interleaved
/// as `[x_0, y_0, x_1, y_1, ...]` with vehicle 0 the ego. Speeds are sampled
/// from the environment's default range on lift. A lifted state is valid
/// only if the placements survive the environment's same-lane spacing rule
/// after lane snapping.
#[derive(Debug, Clone)]
pub struct HighwayInitSpace {
    params: HighwayParams,
    bounds: Vec<(f64, f64)>,
}

impl HighwayInitSpace {
    pub fn new(params: HighwayParams) -> Self {
        let (y_lo, y_hi) = params.y_extent();
        let mut bounds = Vec::with_capacity(2 * params.n_vehicles);
        for _ in 0..params.n_vehicles {
            bounds.push((0.0, params.road_length));
            bounds.push((y_lo, y_hi));
        }
        Self { params, bounds }
    }
}

impl InitSpace for HighwayInitSpace {
    fn abs_dim(&self) -> usize {
        2 * self.params.n_vehicles
    }

    fn init_dim(&self) -> usize {
        3 * self.params.n_vehicles
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn begin_node(&self) -> Vec<f64> {
        HighwayEnv::default_placement(&self.params)
            .into_iter()
            .flat_map(|(x, y)| [x, y])
            .collect()
    }

    fn project(&self, init: &[f64]) -> Vec<f64> {
        (0..self.params.n_vehicles)
            .flat_map(|i| [init[3 * i], init[3 * i + 1]])
            .collect()
    }

    fn lift(&self, abs: &[f64], rng: &mut Rng) -> Vec<f64> {
        let p = &self.params;
        (0..p.n_vehicles)
            .flat_map(|i| {
                [abs[2 * i], abs[2 * i + 1], rng.gen_range(p.init_speed_lo..=p.init_speed_hi)]
            })
            .collect()
    }

    fn is_valid(&self, init: &[f64]) -> bool {
        let p = &self.params;
        if init.len() != 3 * p.n_vehicles || init.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let (y_lo, y_hi) = p.y_extent();
        let mut cells: Vec<(usize, f64)> = Vec::with_capacity(p.n_vehicles);
        for i in 0..p.n_vehicles {
            let (x, y, v) = (init[3 * i], init[3 * i + 1], init[3 * i + 2]);
            if !(0.0..=p.road_length).contains(&x) || !(y_lo..=y_hi).contains(&y) {
                return false;
            }
            let (sp_lo, sp_hi) = if i == 0 {
                (p.reward.v_min, p.reward.v_max)
            } else {
                (0.0, 2.0 * p.reward.v_max)
            };
            if !(sp_lo..=sp_hi).contains(&v) {
                return false;
            }
            cells.push((p.nearest_lane(y), x));
        }
        for i in 0..cells.len() {
            for j in (i + 1)..cells.len() {
                if cells[i].0 == cells[j].0 && (cells[i].1 - cells[j].1).abs() < p.min_spacing {
                    return false;
                }
            }
        }
        true
    }

    fn full_bounds(&self) -> Vec<(f64, f64)> {
        let p = &self.params;
        let (y_lo, y_hi) = p.y_extent();
        (0..p.n_vehicles)
            .flat_map(|_| {
                [(0.0, p.road_length), (y_lo, y_hi), (p.init_speed_lo, p.init_speed_hi)]
            })
            .collect()
    }
}
