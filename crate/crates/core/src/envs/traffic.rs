//! Longitudinal and lane-change behavior for the non-ego highway traffic.
//!
//! Car following uses the Intelligent Driver Model; lane changes use MOBIL,
//! which couples a safety criterion (the prospective new follower must not be
//! forced to brake harder than `b_safe`) with an incentive criterion (the
//! politeness-weighted acceleration gains must clear a threshold). Both are
//! pure functions over small value types so the highway environment and the
//! tests can drive them identically.

/// Intelligent Driver Model parameters. Literature-standard defaults.
#[derive(Debug, Clone)]
pub struct IdmParams {
    /// Maximum acceleration (m/s²).
    pub a_max: f64,
    /// Comfortable braking deceleration (m/s², positive).
    pub b_comf: f64,
    /// Free-flow exponent.
    pub delta: f64,
    /// Jam distance (m).
    pub s0: f64,
    /// Desired time headway (s).
    pub t_headway: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            a_max: 1.5,
            b_comf: 2.0,
            delta: 4.0,
            s0: 2.0,
            t_headway: 1.5,
        }
    }
}

/// MOBIL parameters. Literature-standard defaults.
#[derive(Debug, Clone)]
pub struct MobilParams {
    /// Weight on the followers' acceleration gains.
    pub politeness: f64,
    /// Safety bound: a change is vetoed if the new follower would need to
    /// brake harder than this (m/s², positive).
    pub b_safe: f64,
    /// Minimum net incentive required to change (m/s²).
    pub a_threshold: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self {
            politeness: 0.1,
            b_safe: 4.0,
            a_threshold: 0.1,
        }
    }
}

/// IDM acceleration for a vehicle at speed `v` with desired speed `v0`.
///
/// `leader` carries `(gap, dv)` when a leader exists: `gap` is the bumper-to-
/// bumper distance and `dv = v - v_leader` the closing speed. Without a
/// leader the interaction term vanishes and the model free-flows toward `v0`.
/// A non-positive gap means the follower is touching or overlapping its
/// leader; the model is undefined there, so we return emergency braking at
/// `-b_comf` instead of a meaningless huge value. A non-positive desired
/// speed ("doesn't want to move") saturates the free-flow term so a parked
/// vehicle holds still instead of dividing by zero.
pub fn idm_acceleration(v: f64, v0: f64, leader: Option<(f64, f64)>, p: &IdmParams) -> f64 {
    let free = if v0 > 0.0 { (v / v0).powf(p.delta) } else { 1.0 };
    match leader {
        None => p.a_max * (1.0 - free),
        Some((gap, _)) if gap <= 0.0 => -p.b_comf,
        Some((gap, dv)) => {
            let s_star =
                p.s0 + v * p.t_headway + v * dv / (2.0 * (p.a_max * p.b_comf).sqrt());
            let interaction = (s_star / gap).powi(2);
            p.a_max * (1.0 - free - interaction)
        }
    }
}

/// Minimal view of a vehicle for lane-change reasoning: longitudinal position
/// of the vehicle center, current speed, desired speed, and lane index.
#[derive(Debug, Clone, Copy)]
pub struct TrafficCar {
    pub x: f64,
    pub v: f64,
    pub v0: f64,
    pub lane: usize,
}

/// Outcome of a MOBIL evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaneDecision {
    Stay,
    Change {
        to: usize,
        /// Projected IDM acceleration of the new follower with the subject as
        /// its leader; `None` when the target lane has no follower. Logged by
        /// the environment so the safety criterion can be audited.
        follower_decel: Option<f64>,
    },
}

/// Nearest leader of car `i` in `lane`: smallest x strictly ahead.
fn leader_in_lane(cars: &[TrafficCar], i: usize, lane: usize) -> Option<usize> {
    cars.iter()
        .enumerate()
        .filter(|&(j, c)| j != i && c.lane == lane && c.x > cars[i].x)
        .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
        .map(|(j, _)| j)
}

/// Nearest follower of car `i` in `lane`: largest x strictly behind.
fn follower_in_lane(cars: &[TrafficCar], i: usize, lane: usize) -> Option<usize> {
    cars.iter()
        .enumerate()
        .filter(|&(j, c)| j != i && c.lane == lane && c.x < cars[i].x)
        .max_by(|a, b| a.1.x.total_cmp(&b.1.x))
        .map(|(j, _)| j)
}

/// Bumper-to-bumper gap between follower `f` and leader `l` (center
/// positions minus one vehicle length).
fn bumper_gap(follower_x: f64, leader_x: f64, vehicle_length: f64) -> f64 {
    leader_x - follower_x - vehicle_length
}

/// IDM acceleration of car `f` following optional car `l`.
fn accel_following(
    cars: &[TrafficCar],
    f: usize,
    l: Option<usize>,
    vehicle_length: f64,
    idm: &IdmParams,
) -> f64 {
    let leader = l.map(|j| {
        (
            bumper_gap(cars[f].x, cars[j].x, vehicle_length),
            cars[f].v - cars[j].v,
        )
    });
    idm_acceleration(cars[f].v, cars[f].v0, leader, idm)
}

/// MOBIL lane-change decision for car `subject`.
///
/// Both adjacent lanes are evaluated. A lane is feasible only if the subject
/// would have strictly positive bumper gaps to its prospective new leader and
/// follower — without this pre-check a lane change directly into another
/// vehicle would be scored by the (clamped) IDM emergency value and could
/// slip past the safety criterion. Among feasible, safe lanes the one with
/// the larger incentive wins; an exact tie goes to the smaller lane index.
pub fn mobil_decide(
    cars: &[TrafficCar],
    subject: usize,
    lane_count: usize,
    vehicle_length: f64,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> LaneDecision {
    let me = cars[subject];
    let old_leader = leader_in_lane(cars, subject, me.lane);
    let old_follower = follower_in_lane(cars, subject, me.lane);
    let a_self_old = accel_following(cars, subject, old_leader, vehicle_length, idm);

    let mut best: Option<(f64, usize, Option<f64>)> = None;
    for target in [me.lane.checked_sub(1), me.lane.checked_add(1)] {
        let Some(target) = target else { continue };
        if target >= lane_count {
            continue;
        }

        let new_leader = leader_in_lane(cars, subject, target);
        let new_follower = follower_in_lane(cars, subject, target);

        // Feasibility: the slot must physically exist.
        let leader_gap_ok = new_leader
            .map(|j| bumper_gap(me.x, cars[j].x, vehicle_length) > 0.0)
            .unwrap_or(true);
        let follower_gap_ok = new_follower
            .map(|j| bumper_gap(cars[j].x, me.x, vehicle_length) > 0.0)
            .unwrap_or(true);
        if !leader_gap_ok || !follower_gap_ok {
            continue;
        }

        // Safety: the new follower must not be forced past b_safe when the
        // subject drops in front of it.
        let a_nf_new = new_follower.map(|j| {
            let gap = bumper_gap(cars[j].x, me.x, vehicle_length);
            idm_acceleration(cars[j].v, cars[j].v0, Some((gap, cars[j].v - me.v)), idm)
        });
        if let Some(a) = a_nf_new {
            if a < -mobil.b_safe {
                continue;
            }
        }

        // Incentive: own gain plus politeness-weighted follower gains.
        let a_self_new = accel_following(cars, subject, new_leader, vehicle_length, idm);
        let own_gain = a_self_new - a_self_old;

        let nf_gain = new_follower.map_or(0.0, |j| {
            let a_old = accel_following(cars, j, leader_in_lane(cars, j, target), vehicle_length, idm);
            a_nf_new.unwrap() - a_old
        });
        let of_gain = old_follower.map_or(0.0, |j| {
            // When the subject leaves, its old follower inherits the
            // subject's old leader.
            let a_old = accel_following(cars, j, Some(subject), vehicle_length, idm);
            let a_new = accel_following(cars, j, old_leader, vehicle_length, idm);
            a_new - a_old
        });

        let incentive = own_gain + mobil.politeness * (nf_gain + of_gain);
        if incentive > mobil.a_threshold {
            let better = match best {
                None => true,
                // Strict comparison keeps the earlier (smaller) lane on ties.
                Some((best_inc, _, _)) => incentive > best_inc,
            };
            if better {
                best = Some((incentive, target, a_nf_new));
            }
        }
    }

    match best {
        Some((_, to, follower_decel)) => LaneDecision::Change { to, follower_decel },
        None => LaneDecision::Stay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEN: f64 = 5.0;

    #[test]
    fn free_flow_at_desired_speed_is_zero() {
        let p = IdmParams::default();
        let a = idm_acceleration(25.0, 25.0, None, &p);
        assert!(a.abs() <= 1e-12, "free-flow accel at v0 was {a}");
    }

    #[test]
    fn standstill_without_leader_accelerates_at_a_max() {
        let p = IdmParams::default();
        assert_eq!(idm_acceleration(0.0, 30.0, None, &p), p.a_max);
    }

    #[test]
    fn matches_direct_formula_evaluation() {
        // Independent evaluation of the published formula, spelled out
        // term by term rather than through the production code path.
        let p = IdmParams::default();
        let (v, v0, gap, dv) = (20.0, 30.0, 30.0, 5.0);
        let s_star = p.s0 + v * p.t_headway + (v * dv) / (2.0 * f64::sqrt(p.a_max * p.b_comf));
        let expected = p.a_max * (1.0 - f64::powf(v / v0, p.delta) - (s_star / gap) * (s_star / gap));
        let got = idm_acceleration(v, v0, Some((gap, dv)), &p);
        assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn zero_desired_speed_keeps_a_parked_car_still() {
        let p = IdmParams::default();
        assert_eq!(idm_acceleration(0.0, 0.0, None, &p), 0.0);
        // Moving with no desire to move: pure braking.
        assert!(idm_acceleration(10.0, 0.0, None, &p) <= 0.0);
    }

    #[test]
    fn overlapping_gap_returns_emergency_braking() {
        let p = IdmParams::default();
        assert_eq!(idm_acceleration(25.0, 30.0, Some((0.0, 0.0)), &p), -p.b_comf);
        assert_eq!(idm_acceleration(25.0, 30.0, Some((-3.0, 5.0)), &p), -p.b_comf);
    }

    #[test]
    fn follower_converges_to_equilibrium_behind_constant_leader() {
        // Leader cruises at 25 m/s; a follower with higher desired speed
        // closes in and must settle with acceleration ~0.
        let p = IdmParams::default();
        let dt = 0.05;
        let mut x = 0.0;
        let mut v: f64 = 20.0;
        let mut leader_x = 60.0;
        let leader_v = 25.0;
        let mut a = f64::INFINITY;
        for _ in 0..40_000 {
            let gap = leader_x - x - LEN;
            a = idm_acceleration(v, 30.0, Some((gap, v - leader_v)), &p);
            x += v * dt;
            v = (v + a * dt).max(0.0);
            leader_x += leader_v * dt;
        }
        assert!(a.abs() <= 1e-3, "did not reach equilibrium: accel {a}");
        assert!((v - leader_v).abs() < 0.05, "speed off equilibrium: {v}");
    }

    #[test]
    fn unsafe_follower_vetoes_change() {
        // Fast follower right behind the slot in lane 1: dropping in front
        // of it would demand braking beyond b_safe.
        let cars = [
            TrafficCar { x: 50.0, v: 22.0, v0: 25.0, lane: 0 }, // subject
            TrafficCar { x: 44.0, v: 35.0, v0: 40.0, lane: 1 }, // hot follower
            TrafficCar { x: 55.0, v: 18.0, v0: 20.0, lane: 0 }, // slow leader
        ];
        let d = mobil_decide(&cars, 0, 2, LEN, &IdmParams::default(), &MobilParams::default());
        // Verify the premise: the follower's projected braking really is
        // beyond the bound.
        let gap = cars[0].x - cars[1].x - LEN;
        let a = idm_acceleration(cars[1].v, cars[1].v0, Some((gap, cars[1].v - cars[0].v)), &IdmParams::default());
        assert!(a < -MobilParams::default().b_safe, "premise broken: {a}");
        assert_eq!(d, LaneDecision::Stay);
    }

    #[test]
    fn blocked_lane_with_empty_neighbor_triggers_change() {
        // Slow leader close ahead in lane 0, lane 1 empty, politeness 0:
        // the incentive is the raw own-acceleration gain, which is large.
        let idm = IdmParams::default();
        let mobil = MobilParams { politeness: 0.0, ..MobilParams::default() };
        let cars = [
            TrafficCar { x: 50.0, v: 25.0, v0: 30.0, lane: 0 },
            TrafficCar { x: 62.0, v: 15.0, v0: 15.0, lane: 0 },
        ];
        // Oracle: evaluate both accelerations straight from the formula.
        let gap = 62.0 - 50.0 - LEN;
        let a_old = idm_acceleration(25.0, 30.0, Some((gap, 10.0)), &idm);
        let a_new = idm_acceleration(25.0, 30.0, None, &idm);
        assert!(a_new - a_old > mobil.a_threshold, "premise broken");
        let d = mobil_decide(&cars, 0, 2, LEN, &idm, &mobil);
        assert_eq!(d, LaneDecision::Change { to: 1, follower_decel: None });
    }

    #[test]
    fn identical_conditions_give_no_incentive() {
        // Leaders at the same distance and speed in the current and target
        // lanes: the gain is exactly zero, below any positive threshold.
        let cars = [
            TrafficCar { x: 50.0, v: 25.0, v0: 30.0, lane: 0 },
            TrafficCar { x: 80.0, v: 20.0, v0: 20.0, lane: 0 },
            TrafficCar { x: 80.0, v: 20.0, v0: 20.0, lane: 1 },
        ];
        let d = mobil_decide(&cars, 0, 2, LEN, &IdmParams::default(), &MobilParams::default());
        assert_eq!(d, LaneDecision::Stay);
    }

    #[test]
    fn occupied_slot_is_infeasible() {
        // A car sits exactly beside the subject in the target lane (zero
        // longitudinal offset): no gap, so the lane must be skipped even
        // though the clamped IDM value (-b_comf) would pass the safety test.
        let cars = [
            TrafficCar { x: 50.0, v: 25.0, v0: 30.0, lane: 0 },
            TrafficCar { x: 52.0, v: 25.0, v0: 25.0, lane: 1 },
            TrafficCar { x: 56.0, v: 5.0, v0: 5.0, lane: 0 }, // near-standstill leader
        ];
        let d = mobil_decide(&cars, 0, 2, LEN, &IdmParams::default(), &MobilParams::default());
        assert_eq!(d, LaneDecision::Stay);
    }

    #[test]
    fn equal_incentive_prefers_smaller_lane_index() {
        // Subject in lane 1 with a crawling leader; lanes 0 and 2 both empty
        // ahead: identical incentives, change must go to lane 0.
        let cars = [
            TrafficCar { x: 50.0, v: 25.0, v0: 30.0, lane: 1 },
            TrafficCar { x: 60.0, v: 10.0, v0: 10.0, lane: 1 },
        ];
        let d = mobil_decide(&cars, 0, 3, LEN, &IdmParams::default(), &MobilParams::default());
        assert_eq!(d, LaneDecision::Change { to: 0, follower_decel: None });
    }
}
