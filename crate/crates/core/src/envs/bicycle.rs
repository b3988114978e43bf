//! Kinematic bicycle model for the ego vehicle.
//!
//! Planar pose plus scalar speed, advanced by explicit Euler: position and
//! heading integrate with the values from the start of the step, then speed
//! picks up the commanded acceleration. Heading rate is v·tan(δ)/L.

/// Pose and speed of the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicyclePose {
    pub x: f64,
    pub y: f64,
    /// Heading angle (rad), 0 pointing along +x.
    pub psi: f64,
    /// Forward speed (m/s).
    pub v: f64,
}

/// One Euler step under constant steering angle and acceleration.
///
/// Callers are responsible for keeping `steering` within the vehicle's
/// mechanical limit; the integration itself is well defined for any
/// |steering| < π/2.
pub fn bicycle_step(pose: BicyclePose, steering: f64, accel: f64, wheelbase: f64, dt: f64) -> BicyclePose {
    let (sin_psi, cos_psi) = super::sin_cos_unfused(pose.psi);
    BicyclePose {
        x: pose.x + pose.v * cos_psi * dt,
        y: pose.y + pose.v * sin_psi * dt,
        psi: pose.psi + pose.v * steering.tan() / wheelbase * dt,
        v: pose.v + accel * dt,
    }
}
