//! Special-relativity building blocks in natural units (`c = 1`).
//!
//! Frequencies are carried as ratios `x = omega / omega0`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

/// Lorentz factor from `beta^2`.
#[inline]
pub fn lorentz_gamma(beta_sq: f64) -> f64 {
    1.0 / (1.0 - beta_sq).sqrt()
}

/// Lorentz factor from the speed; `(1 - beta)(1 + beta)` keeps full relative
/// precision as `beta -> 1`.
#[inline]
pub fn lorentz_gamma_of_speed(beta: f64) -> f64 {
    1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt()
}

/// Kinematics of a single emission: speed, direction cosine between the
/// velocity and the line of sight, and the derived Lorentz factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionState {
    beta: f64,
    cos_theta: f64,
    gamma: f64,
}

impl EmissionState {
    pub fn new(beta: f64, cos_theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::domain("beta", beta, "0 <= beta < 1"));
        }
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::domain(
                "cos_theta",
                cos_theta,
                "-1 <= cos_theta <= 1",
            ));
        }
        Ok(EmissionState {
            beta,
            cos_theta,
            gamma: lorentz_gamma_of_speed(beta),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `1 - beta cos(theta)`.
    #[inline]
    pub fn retardation(&self) -> f64 {
        1.0 - self.beta * self.cos_theta
    }
}

/// Observed over emitted frequency, `sqrt(1 - beta^2) / (1 - beta cos theta)`.
pub fn doppler_factor(s: &EmissionState) -> f64 {
    1.0 / (s.gamma * s.retardation())
}

/// Energy received per unit observer time relative to an emitter at rest,
/// `(1 - beta^2)^2 / (1 - beta cos theta)^3`.
pub fn energy_rate_boost(s: &EmissionState) -> f64 {
    let one_minus = 1.0 - s.beta * s.beta;
    let r = s.retardation();
    one_minus * one_minus / (r * r * r)
}

/// Angular power boost, `(1 - beta^2)^2 / (1 - beta cos theta)^4`.
pub fn power_boost(s: &EmissionState) -> f64 {
    energy_rate_boost(s) / s.retardation()
}

/// Direction cosine in the emitter's rest frame for a lab-frame cosine.
pub fn aberration(cos_theta_lab: f64, beta: f64) -> f64 {
    let c = (cos_theta_lab - beta) / (1.0 - beta * cos_theta_lab);
    c.clamp(-1.0, 1.0)
}

/// Range of frequency ratios an emitter at speed `beta` can produce.
pub fn doppler_support(beta: f64) -> (f64, f64) {
    let x_min = ((1.0 - beta) / (1.0 + beta)).sqrt();
    (x_min, 1.0 / x_min)
}

/// Smallest speed that can produce frequency ratio `x`.
pub fn beta_min(x: f64) -> f64 {
    let x2 = x * x;
    (x2 - 1.0).abs() / (x2 + 1.0)
}

/// Velocity and its coordinate-time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub beta: Vec3,
    pub beta_dot: Vec3,
}

impl KinematicState {
    pub fn new(beta: Vec3, beta_dot: Vec3) -> Result<Self> {
        let b = beta.norm();
        if !(b < 1.0) {
            return Err(Error::domain("|beta|", b, "|beta| < 1"));
        }
        Ok(KinematicState { beta, beta_dot })
    }

    pub fn gamma(&self) -> f64 {
        lorentz_gamma(self.beta.norm_sq())
    }

    /// Four-velocity `(gamma, gamma beta)`.
    pub fn four_velocity(&self) -> (f64, Vec3) {
        let g = self.gamma();
        (g, g * self.beta)
    }
}

/// Four-acceleration components in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourAcceleration {
    pub time: f64,
    pub space: Vec3,
}

impl FourAcceleration {
    /// Minkowski product with a four-vector, signature `(+, -, -, -)`.
    pub fn contract(&self, time: f64, space: Vec3) -> f64 {
        self.time * time - self.space.dot(space)
    }
}

/// `a^0 = gamma^4 (beta . beta_dot)`, `a = gamma^2 beta_dot + a^0 beta`.
pub fn four_acceleration(k: &KinematicState) -> FourAcceleration {
    let b2 = k.beta.norm_sq();
    let inv = 1.0 / (1.0 - b2);
    // (1/2) d(beta^2)/dt / (1 - beta^2)^2
    let time = k.beta.dot(k.beta_dot) * inv * inv;
    let space = inv * k.beta_dot + time * k.beta;
    FourAcceleration { time, space }
}

/// Coordinate-time derivative of the velocity produced by a proper
/// (rest-frame) acceleration `rest_accel` at velocity `beta`.
pub fn coordinate_acceleration(rest_accel: Vec3, beta: Vec3) -> Vec3 {
    let b2 = beta.norm_sq();
    let g = lorentz_gamma(b2);
    let along = g / (1.0 + g) * rest_accel.dot(beta);
    (1.0 - b2) * (rest_accel - along * beta)
}

/// Pure boost of a four-vector into the frame moving with velocity `beta`.
pub fn boost(time: f64, space: Vec3, beta: Vec3) -> (f64, Vec3) {
    let b2 = beta.norm_sq();
    if b2 == 0.0 {
        return (time, space);
    }
    let g = lorentz_gamma(b2);
    let bp = beta.dot(space);
    let t = g * (time - bp);
    let s = space + ((g - 1.0) * bp / b2 - g * time) * beta;
    (t, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(b: f64, c: f64) -> EmissionState {
        EmissionState::new(b, c).unwrap()
    }

    #[test]
    fn doppler_examples() {
        assert_eq!(doppler_factor(&state(0.0, 0.3)), 1.0);
        assert!((doppler_factor(&state(0.6, 1.0)) - 2.0).abs() < 1e-15);
        assert!((doppler_factor(&state(0.6, 0.0)) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn head_on_and_tail_factors_are_reciprocal_near_light_speed() {
        for i in 0..=2000 {
            let b = 0.999_999 * i as f64 / 2000.0;
            let p = doppler_factor(&state(b, 1.0)) * doppler_factor(&state(b, -1.0));
            assert!((p - 1.0).abs() <= 1e-14, "beta {b}: {p}");
        }
    }

    #[test]
    fn boost_factor_examples() {
        assert_eq!(energy_rate_boost(&state(0.0, -0.7)), 1.0);
        assert!((energy_rate_boost(&state(0.6, 1.0)) - 6.4).abs() < 1e-13);
        assert!((energy_rate_boost(&state(0.6, -1.0)) - 0.1).abs() < 1e-15);
        assert_eq!(power_boost(&state(0.0, 0.2)), 1.0);
        assert!((power_boost(&state(0.6, 1.0)) - 16.0).abs() < 1e-12);
        assert!((power_boost(&state(0.6, -1.0)) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn aberration_examples() {
        assert_eq!(aberration(0.37, 0.0), 0.37);
        assert_eq!(aberration(1.0, 0.9), 1.0);
        assert!((aberration(0.0, 0.6) + 0.6).abs() < 1e-15);
    }

    #[test]
    fn support_examples() {
        assert_eq!(doppler_support(0.0), (1.0, 1.0));
        let (lo, hi) = doppler_support(0.6);
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!((beta_min(2.0) - 0.6).abs() < 1e-15);
        assert_eq!(beta_min(1.0), 0.0);
    }

    #[test]
    fn invalid_states() {
        assert!(EmissionState::new(1.0, 0.0).is_err());
        assert!(EmissionState::new(-0.1, 0.0).is_err());
        assert!(EmissionState::new(0.5, 1.5).is_err());
        assert!(KinematicState::new(Vec3::new(0.8, 0.7, 0.0), Vec3::ZERO).is_err());
    }

    #[test]
    fn inertial_and_rest_limits() {
        let k = KinematicState::new(Vec3::new(0.3, -0.2, 0.5), Vec3::ZERO).unwrap();
        let a = four_acceleration(&k);
        assert_eq!(a.time, 0.0);
        assert_eq!(a.space, Vec3::ZERO);

        let k = KinematicState::new(Vec3::ZERO, Vec3::new(2.5, 0.0, 0.0)).unwrap();
        let a = four_acceleration(&k);
        assert_eq!(a.time, 0.0);
        assert_eq!(a.space, Vec3::new(2.5, 0.0, 0.0));
        assert_eq!(
            coordinate_acceleration(Vec3::new(1.0, 2.0, 3.0), Vec3::ZERO),
            Vec3::new(1.0, 2.0, 3.0)
        );
    }

    #[test]
    fn longitudinal_acceleration_scales_with_gamma_cubed() {
        let beta = Vec3::new(0.0, 0.8, 0.0);
        let rest = Vec3::new(0.0, 3.0, 0.0);
        let g = lorentz_gamma(0.64);
        let bd = coordinate_acceleration(rest, beta);
        assert!((bd.0[1] - 3.0 / (g * g * g)).abs() < 1e-14);
        // transverse component scales with gamma^2
        let bd = coordinate_acceleration(Vec3::new(3.0, 0.0, 0.0), beta);
        assert!((bd.0[0] - 3.0 / (g * g)).abs() < 1e-14);
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn velocity() -> impl Strategy<Value = Vec3> {
        (vec3(), 0.0f64..0.99).prop_map(|(v, s)| {
            let n = v.norm();
            if n == 0.0 {
                Vec3::ZERO
            } else {
                (s / n) * v
            }
        })
    }

    proptest! {
        #[test]
        fn forward_backward_doppler_product(beta in 0.0f64..0.999_999) {
            let p = doppler_factor(&state(beta, 1.0)) * doppler_factor(&state(beta, -1.0));
            prop_assert!((p - 1.0).abs() <= 1e-14 * (1.0 / (1.0 - beta)).max(1.0));
        }

        #[test]
        fn doppler_within_support(beta in 0.0f64..0.99, c in -1.0f64..=1.0) {
            let d = doppler_factor(&state(beta, c));
            let (lo, hi) = doppler_support(beta);
            prop_assert!(d >= lo * (1.0 - 1e-14) && d <= hi * (1.0 + 1e-14));
        }

        #[test]
        fn power_is_energy_over_retardation(beta in 0.0f64..0.99, c in -1.0f64..=1.0) {
            let s = state(beta, c);
            let lhs = power_boost(&s);
            let rhs = energy_rate_boost(&s) / (1.0 - beta * c);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs);
        }

        #[test]
        fn beta_min_symmetry(x in 1e-3f64..1e3) {
            prop_assert!((beta_min(x) - beta_min(1.0 / x)).abs() <= 1e-15);
        }

        #[test]
        fn aberration_stays_in_range(beta in 0.0f64..0.999, c in -1.0f64..=1.0) {
            let cp = aberration(c, beta);
            prop_assert!((-1.0..=1.0).contains(&cp));
        }

        #[test]
        fn four_acceleration_is_orthogonal(beta in velocity(), bd in vec3()) {
            let k = KinematicState::new(beta, bd).unwrap();
            let a = four_acceleration(&k);
            let (u0, u) = k.four_velocity();
            let scale = a.time.abs() * u0 + a.space.norm() * u.norm();
            prop_assert!(a.contract(u0, u).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn rest_acceleration_round_trip(beta in velocity(), rest in vec3()) {
            let bd = coordinate_acceleration(rest, beta);
            let a = four_acceleration(&KinematicState::new(beta, bd).unwrap());
            let (t, s) = boost(a.time, a.space, beta);
            let scale = rest.max_abs().max(1e-300);
            prop_assert!(t.abs() <= 1e-10 * scale);
            prop_assert!((s - rest).max_abs() <= 1e-10 * scale);
        }
    }
}
