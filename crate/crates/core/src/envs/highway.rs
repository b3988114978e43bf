//! Simplified multi-vehicle highway driving task.
//!
//! A fixed population of vehicles on a straight multi-lane road. Vehicle 0 is
//! the ego, driven by the agent through five meta-actions (change lane left or
//! right, idle, speed up, slow down) that set targets for low-level
//! proportional controllers feeding a kinematic bicycle model. The remaining
//! vehicles follow IDM longitudinally and change lanes via MOBIL. Each agent
//! decision advances the scene through a fixed number of physics substeps;
//! reward trades speed against collisions and the episode ends on a collision
//! or at the horizon.
//!
//! Geometry conventions: lanes run along +x, lane centers sit at
//! `lane_index * lane_width` starting at y = 0, and "left" means toward lane
//! 0 (decreasing y). Vehicles are axis-aligned boxes; only ego collisions are
//! checked, and only against vehicle centers (headings stay small).

use super::bicycle::{bicycle_step, BicyclePose};
use super::traffic::{idm_acceleration, mobil_decide, LaneDecision, TrafficCar};
use super::{EnvError, Environment, IdmParams, MobilParams, StepOutcome};
use crate::rng::Rng;
use rand::Rng as _;

/// Display names of the five meta-actions, indexed by action id.
pub const HIGHWAY_ACTIONS: [&str; 5] = ["left-lane", "idle", "right-lane", "faster", "slower"];

/// Reward shape: `R = a·(v − v_min)/(v_max − v_min) − b·collision`.
#[derive(Debug, Clone)]
pub struct HighwayRewardParams {
    pub a: f64,
    pub b: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for HighwayRewardParams {
    fn default() -> Self {
        Self { a: 0.4, b: 1.0, v_min: 20.0, v_max: 30.0 }
    }
}

/// Scalar reward for an ego speed and collision flag.
pub fn highway_reward(v: f64, collision: bool, p: &HighwayRewardParams) -> f64 {
    p.a * (v - p.v_min) / (p.v_max - p.v_min) - p.b * (collision as u8 as f64)
}

/// Scene geometry, population, physics cadence, and controller gains.
#[derive(Debug, Clone)]
pub struct HighwayParams {
    pub lane_count: usize,
    pub lane_width: f64,
    /// Longitudinal extent of the placement region (m).
    pub road_length: f64,
    /// Total vehicles including the ego.
    pub n_vehicles: usize,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    /// Minimum same-lane center-to-center spacing at reset (m).
    pub min_spacing: f64,
    pub wheelbase: f64,
    /// Decision steps before truncation.
    pub horizon: usize,
    /// Physics substeps per decision step.
    pub substeps: usize,
    /// Decisions per second; the substep dt is 1/(decision_hz·substeps).
    pub decision_hz: f64,
    /// Steering limit (rad).
    pub max_steer: f64,
    /// Speed change commanded by faster/slower (m/s).
    pub speed_step: f64,
    /// Non-ego (and default ego) reset speeds drawn from this range (m/s).
    pub init_speed_lo: f64,
    pub init_speed_hi: f64,
    /// Ego acceleration command magnitude limit (m/s²).
    pub max_accel: f64,
    /// Lateral-position gain: desired heading ~ atan(kp_lateral·Δy / v).
    pub kp_lateral: f64,
    /// Heading gain: steering ~ kp_heading·(ψ_des − ψ).
    pub kp_heading: f64,
    /// Speed gain: accel ~ kp_speed·(v_target − v).
    pub kp_speed: f64,
    pub reward: HighwayRewardParams,
    pub idm: IdmParams,
    pub mobil: MobilParams,
}

impl Default for HighwayParams {
    fn default() -> Self {
        Self {
            lane_count: 4,
            lane_width: 4.0,
            road_length: 180.0,
            n_vehicles: 5,
            vehicle_length: 5.0,
            vehicle_width: 2.0,
            min_spacing: 10.0,
            wheelbase: 5.0,
            horizon: 40,
            substeps: 15,
            decision_hz: 1.0,
            max_steer: 30.0_f64.to_radians(),
            speed_step: 5.0,
            init_speed_lo: 21.0,
            init_speed_hi: 27.0,
            max_accel: 5.0,
            kp_lateral: 0.6,
            kp_heading: 2.0,
            kp_speed: 1.0,
            reward: HighwayRewardParams::default(),
            idm: IdmParams::default(),
            mobil: MobilParams::default(),
        }
    }
}

impl HighwayParams {
    pub fn lane_center(&self, lane: usize) -> f64 {
        lane as f64 * self.lane_width
    }

    /// Lane whose center is nearest to `y`.
    pub fn nearest_lane(&self, y: f64) -> usize {
        let idx = (y / self.lane_width).round();
        (idx.max(0.0) as usize).min(self.lane_count - 1)
    }

    /// Lateral extent of the road: half a lane beyond the outer centers.
    pub fn y_extent(&self) -> (f64, f64) {
        (
            -self.lane_width / 2.0,
            self.lane_center(self.lane_count - 1) + self.lane_width / 2.0,
        )
    }

    fn substep_dt(&self) -> f64 {
        1.0 / (self.decision_hz * self.substeps as f64)
    }
}

/// One vehicle as observed: presence flag plus planar position and velocity.
/// `desired_speed` is the IDM set point for non-ego vehicles (the ego uses
/// its commanded target speed instead).
#[derive(Debug, Clone)]
pub struct Vehicle {
    pub present: bool,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub lane: usize,
    pub desired_speed: f64,
}

/// Full scene state: all vehicle records plus the ego heading.
#[derive(Debug, Clone)]
pub struct HighwayState {
    pub vehicles: Vec<Vehicle>,
    pub ego_heading: f64,
}

/// Record of one executed non-ego lane change, kept so the safety criterion
/// can be audited after the fact.
#[derive(Debug, Clone)]
pub struct LaneChangeEvent {
    /// Decision step at which the change was made.
    pub step: usize,
    pub vehicle: usize,
    pub from: usize,
    pub to: usize,
    /// Projected IDM acceleration of the new follower at decision time;
    /// `None` when the target lane had no follower.
    pub follower_decel: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HighwayEnv {
    params: HighwayParams,
    vehicles: Vec<Vehicle>,
    ego_heading: f64,
    /// Scalar forward speed of the ego, kept within [v_min, v_max].
    ego_speed: f64,
    target_lane: usize,
    target_speed: f64,
    steps: usize,
    finished: bool,
    lane_change_log: Vec<LaneChangeEvent>,
}

impl HighwayEnv {
    pub fn new(params: HighwayParams) -> Self {
        Self {
            params,
            vehicles: Vec::new(),
            ego_heading: 0.0,
            ego_speed: 0.0,
            target_lane: 0,
            target_speed: 0.0,
            steps: 0,
            finished: true,
            lane_change_log: Vec::new(),
        }
    }

    pub fn params(&self) -> &HighwayParams {
        &self.params
    }

    pub fn state(&self) -> HighwayState {
        HighwayState { vehicles: self.vehicles.clone(), ego_heading: self.ego_heading }
    }

    /// Executed non-ego lane changes since the last reset.
    pub fn lane_change_log(&self) -> &[LaneChangeEvent] {
        &self.lane_change_log
    }

    /// Deterministic placement used as the scheduler's root point: vehicles
    /// strung out ahead of the ego across the lanes with generous spacing.
    pub fn default_placement(p: &HighwayParams) -> Vec<(f64, f64)> {
        let lanes = [1usize, 0, 2, 1, 3];
        (0..p.n_vehicles)
            .map(|i| {
                let lane = lanes[i % lanes.len()] % p.lane_count;
                (10.0 + 30.0 * i as f64, p.lane_center(lane))
            })
            .collect()
    }

    /// Reset with explicit `(x, y)` placements (vehicle 0 = ego) and
    /// optionally explicit speeds; missing speeds are sampled uniformly from
    /// the configured range. The y coordinates are snapped to the nearest
    /// lane center after validation.
    pub fn reset_explicit(
        &mut self,
        placements: &[(f64, f64)],
        speeds: Option<&[f64]>,
        rng: &mut Rng,
    ) -> Result<Vec<f64>, EnvError> {
        let p = &self.params;
        if placements.len() != p.n_vehicles {
            return Err(EnvError::InitLength { got: placements.len(), expected: p.n_vehicles });
        }
        let (y_lo, y_hi) = p.y_extent();
        for (i, &(x, y)) in placements.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(EnvError::NonFiniteInit { index: i });
            }
            if x < 0.0 || x > p.road_length {
                return Err(EnvError::InitOutOfBounds {
                    field: "x",
                    value: x,
                    lo: 0.0,
                    hi: p.road_length,
                });
            }
            if y < y_lo || y > y_hi {
                return Err(EnvError::InitOutOfBounds { field: "y", value: y, lo: y_lo, hi: y_hi });
            }
        }

        let lanes: Vec<usize> = placements.iter().map(|&(_, y)| p.nearest_lane(y)).collect();
        // Same-lane spacing check over every pair.
        for i in 0..placements.len() {
            for j in (i + 1)..placements.len() {
                if lanes[i] == lanes[j] {
                    let gap = (placements[i].0 - placements[j].0).abs();
                    if gap < p.min_spacing {
                        return Err(EnvError::OverlappingPlacement {
                            first: i,
                            second: j,
                            lane: lanes[i],
                            gap,
                            min: p.min_spacing,
                        });
                    }
                }
            }
        }

        let speeds: Vec<f64> = match speeds {
            Some(s) => {
                if s.len() != p.n_vehicles {
                    return Err(EnvError::InitLength { got: s.len(), expected: p.n_vehicles });
                }
                s.to_vec()
            }
            None => (0..p.n_vehicles)
                .map(|_| rng.gen_range(p.init_speed_lo..=p.init_speed_hi))
                .collect(),
        };
        for (i, &v) in speeds.iter().enumerate() {
            if !v.is_finite() {
                return Err(EnvError::NonFiniteInit { index: i });
            }
            let (lo, hi) = if i == 0 {
                (p.reward.v_min, p.reward.v_max)
            } else {
                (0.0, 2.0 * p.reward.v_max)
            };
            if v < lo || v > hi {
                return Err(EnvError::InitOutOfBounds { field: "speed", value: v, lo, hi });
            }
        }

        self.vehicles = placements
            .iter()
            .zip(&lanes)
            .zip(&speeds)
            .map(|((&(x, _), &lane), &v)| Vehicle {
                present: true,
                x,
                y: self.params.lane_center(lane),
                vx: v,
                vy: 0.0,
                lane,
                desired_speed: v,
            })
            .collect();
        self.ego_heading = 0.0;
        self.ego_speed = speeds[0];
        self.target_lane = lanes[0];
        self.target_speed = speeds[0];
        self.steps = 0;
        self.finished = false;
        self.lane_change_log.clear();
        Ok(self.observation())
    }

    /// Default randomized reset: uniform lanes and longitudinal positions,
    /// rejection-sampled until every same-lane pair respects the minimum
    /// spacing; speeds uniform in the configured range.
    pub fn reset_random(&mut self, rng: &mut Rng) -> Result<Vec<f64>, EnvError> {
        const ATTEMPTS: usize = 1000;
        for _ in 0..ATTEMPTS {
            let p = &self.params;
            let placements: Vec<(f64, f64)> = (0..p.n_vehicles)
                .map(|_| {
                    let lane = rng.gen_range(0..p.lane_count);
                    (rng.gen_range(0.0..=p.road_length), p.lane_center(lane))
                })
                .collect();
            let ok = {
                let lanes: Vec<usize> =
                    placements.iter().map(|&(_, y)| p.nearest_lane(y)).collect();
                (0..placements.len()).all(|i| {
                    ((i + 1)..placements.len()).all(|j| {
                        lanes[i] != lanes[j]
                            || (placements[i].0 - placements[j].0).abs() >= p.min_spacing
                    })
                })
            };
            if ok {
                return self.reset_explicit(&placements, None, rng);
            }
        }
        Err(EnvError::PlacementRetriesExhausted { attempts: ATTEMPTS })
    }

    /// Ego controller: steering toward the target lane center and
    /// acceleration toward the target speed.
    fn ego_commands(&self) -> (f64, f64) {
        let p = &self.params;
        let ego = &self.vehicles[0];
        let y_target = p.lane_center(self.target_lane);
        // Desired heading points the velocity vector at the lane center with
        // lateral speed proportional to the offset.
        let psi_des = (p.kp_lateral * (y_target - ego.y) / self.ego_speed.max(1.0)).atan();
        let steer = (p.kp_heading * (psi_des - self.ego_heading)).clamp(-p.max_steer, p.max_steer);
        let accel =
            (p.kp_speed * (self.target_speed - self.ego_speed)).clamp(-p.max_accel, p.max_accel);
        (steer, accel)
    }

    /// View of the scene for the traffic models. The ego's IDM set point is
    /// its commanded target speed.
    fn car_view(&self) -> Vec<TrafficCar> {
        self.vehicles
            .iter()
            .enumerate()
            .map(|(i, v)| TrafficCar {
                x: v.x,
                v: v.vx,
                v0: if i == 0 { self.target_speed } else { v.desired_speed },
                lane: v.lane,
            })
            .collect()
    }

    /// Non-ego MOBIL pass, executed once per decision step. Changes are
    /// instantaneous lane jumps; each is appended to the audit log.
    fn apply_lane_changes(&mut self) {
        for i in 1..self.vehicles.len() {
            let cars = self.car_view();
            let decision = mobil_decide(
                &cars,
                i,
                self.params.lane_count,
                self.params.vehicle_length,
                &self.params.idm,
                &self.params.mobil,
            );
            if let LaneDecision::Change { to, follower_decel } = decision {
                let from = self.vehicles[i].lane;
                self.vehicles[i].lane = to;
                self.vehicles[i].y = self.params.lane_center(to);
                self.lane_change_log.push(LaneChangeEvent {
                    step: self.steps,
                    vehicle: i,
                    from,
                    to,
                    follower_decel,
                });
            }
        }
    }

    /// One physics substep; returns true if the ego collided.
    fn substep(&mut self) -> bool {
        let p = self.params.clone();
        let dt = p.substep_dt();

        // Ego first: controllers feed the bicycle model.
        let (steer, accel) = self.ego_commands();
        let pose = BicyclePose {
            x: self.vehicles[0].x,
            y: self.vehicles[0].y,
            psi: self.ego_heading,
            v: self.ego_speed,
        };
        let next = bicycle_step(pose, steer, accel, p.wheelbase, dt);
        let (y_lo, y_hi) = p.y_extent();
        self.ego_speed = next.v.clamp(p.reward.v_min, p.reward.v_max);
        self.ego_heading = next.psi;
        let ego = &mut self.vehicles[0];
        ego.x = next.x;
        ego.y = next.y.clamp(y_lo, y_hi);
        let (sin_psi, cos_psi) = super::sin_cos_unfused(self.ego_heading);
        ego.vx = self.ego_speed * cos_psi;
        ego.vy = self.ego_speed * sin_psi;
        ego.lane = p.nearest_lane(ego.y);

        // Non-ego longitudinal IDM, synchronous: accelerations from the
        // frozen scene, then positions and speeds together.
        let cars = self.car_view();
        let mut accels = vec![0.0; cars.len()];
        for (i, acc) in accels.iter_mut().enumerate().skip(1) {
            let leader = cars
                .iter()
                .enumerate()
                .filter(|&(j, c)| j != i && c.lane == cars[i].lane && c.x > cars[i].x)
                .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
                .map(|(_, c)| (c.x - cars[i].x - p.vehicle_length, cars[i].v - c.v));
            *acc = idm_acceleration(cars[i].v, cars[i].v0, leader, &p.idm);
        }
        for (v, &a) in self.vehicles.iter_mut().zip(&accels).skip(1) {
            v.x += v.vx * dt;
            v.vx = (v.vx + a * dt).max(0.0);
        }

        // Ego collision check against every other vehicle.
        let ego = &self.vehicles[0];
        self.vehicles[1..].iter().any(|v| {
            (ego.x - v.x).abs() < p.vehicle_length && (ego.y - v.y).abs() < p.vehicle_width
        })
    }

    /// Advance one decision step.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        if self.finished {
            return Err(EnvError::StepOnFinished);
        }
        if action >= 5 {
            return Err(EnvError::InvalidAction { action, count: 5 });
        }
        let p = &self.params;
        match action {
            0 => self.target_lane = self.target_lane.saturating_sub(1),
            1 => {}
            2 => self.target_lane = (self.target_lane + 1).min(p.lane_count - 1),
            3 => {
                self.target_speed =
                    (self.target_speed + p.speed_step).clamp(p.reward.v_min, p.reward.v_max)
            }
            4 => {
                self.target_speed =
                    (self.target_speed - p.speed_step).clamp(p.reward.v_min, p.reward.v_max)
            }
            _ => unreachable!(),
        }

        self.apply_lane_changes();

        let mut collision = false;
        for _ in 0..self.params.substeps {
            if self.substep() {
                collision = true;
                break;
            }
        }

        self.steps += 1;
        let reward = highway_reward(self.ego_speed, collision, &self.params.reward);
        let terminal = collision;
        let truncated = !terminal && self.steps >= self.params.horizon;
        self.finished = terminal || truncated;

        Ok(StepOutcome { obs: self.observation(), reward, terminal, truncated })
    }

    /// Flattened observation, V rows of 5 features each.
    ///
    /// The ego row carries its own normalized lateral position and speeds;
    /// the remaining rows are relative to the ego. Everything is scaled into
    /// [-1, 1] with fixed ranges (±100 m longitudinal, the road's lateral
    /// extent, the reward speed band, ±4 m/s lateral speed) and clamped so
    /// the network never sees values outside the unit box.
    pub fn observation(&self) -> Vec<f64> {
        let p = &self.params;
        let ego = &self.vehicles[0];
        let (y_lo, y_hi) = p.y_extent();
        let y_mid = (y_lo + y_hi) / 2.0;
        let y_half = (y_hi - y_lo) / 2.0;
        let v_mid = (p.reward.v_min + p.reward.v_max) / 2.0;
        let v_half = (p.reward.v_max - p.reward.v_min) / 2.0;

        let mut obs = Vec::with_capacity(p.n_vehicles * 5);
        for (i, v) in self.vehicles.iter().enumerate() {
            if i == 0 {
                obs.push(1.0);
                obs.push(0.0);
                obs.push(((v.y - y_mid) / y_half).clamp(-1.0, 1.0));
                obs.push(((self.ego_speed - v_mid) / v_half).clamp(-1.0, 1.0));
                obs.push((v.vy / 4.0).clamp(-1.0, 1.0));
            } else {
                obs.push(1.0);
                obs.push(((v.x - ego.x) / 100.0).clamp(-1.0, 1.0));
                obs.push(((v.y - ego.y) / (y_hi - y_lo)).clamp(-1.0, 1.0));
                obs.push(((v.vx - ego.vx) / 10.0).clamp(-1.0, 1.0));
                obs.push(((v.vy - ego.vy) / 4.0).clamp(-1.0, 1.0));
            }
        }
        obs
    }
}

impl Environment for HighwayEnv {
    fn obs_dim(&self) -> usize {
        self.params.n_vehicles * 5
    }

    fn n_actions(&self) -> usize {
        5
    }

    fn init_dim(&self) -> usize {
        self.params.n_vehicles * 3
    }

    fn reset_sampled(&mut self, rng: &mut Rng) -> Result<Vec<f64>, EnvError> {
        self.reset_random(rng)
    }

    /// Flat layout: `[x_0, y_0, v_0, x_1, y_1, v_1, ...]`.
    fn reset_flat(&mut self, init: &[f64]) -> Result<Vec<f64>, EnvError> {
        let n = self.params.n_vehicles;
        if init.len() != 3 * n {
            return Err(EnvError::InitLength { got: init.len(), expected: 3 * n });
        }
        let placements: Vec<(f64, f64)> =
            (0..n).map(|i| (init[3 * i], init[3 * i + 1])).collect();
        let speeds: Vec<f64> = (0..n).map(|i| init[3 * i + 2]).collect();
        // Explicit speeds: the rng is never touched.
        let mut unused = crate::rng::seeded_rng(0);
        self.reset_explicit(&placements, Some(&speeds), &mut unused)
    }

    fn step_index(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        self.step(action)
    }
}
