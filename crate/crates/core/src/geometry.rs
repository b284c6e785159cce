//! SE(2) pose algebra and the sine/cosine ("Euler6") rotation encoding.

use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Deviation from the unit circle that is silently re-projected.
pub const UNIT_CIRCLE_RENORMALIZE: f64 = 1e-9;
/// Deviation from the unit circle beyond which a rotation is rejected.
pub const UNIT_CIRCLE_REJECT: f64 = 1e-6;

/// Wraps an angle into `(-π, π]`, rejecting non-finite input.
pub fn normalize_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap(theta))
}

/// Infallible wrap into `(-π, π]`. NaN and infinities come out as NaN.
#[inline]
pub(crate) fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = libm::remainder(theta, TAU);
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Signed shortest rotation taking `b` to `a`, in `(-π, π]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap(a - b)
}

/// Magnitude of the shortest angular difference, in `[0, π]`.
#[inline]
pub fn angular_error(a: f64, b: f64) -> f64 {
    libm::fabs(angle_diff(a, b))
}

/// A planar pose. The heading is kept in `(-π, π]`.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    x: f64,
    y: f64,
    theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    /// Builds a pose, wrapping `theta`. Non-finite input propagates as NaN;
    /// use [`Pose2::try_new`] on untrusted data.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            x,
            y,
            theta: wrap(theta),
        }
    }

    pub fn try_new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("pose translation"));
        }
        Ok(Pose2 {
            x,
            y,
            theta: normalize_angle(theta)?,
        })
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn translation(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Same heading, translation moved by `(dx, dy)` in the world frame.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Pose2 {
            x: self.x + dx,
            y: self.y + dy,
            theta: self.theta,
        }
    }

    /// Same translation, heading replaced (and wrapped).
    pub fn with_theta(&self, theta: f64) -> Self {
        Pose2::new(self.x, self.y, theta)
    }

    /// Euclidean distance between the translations of two poses.
    pub fn planar_distance(&self, other: &Pose2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    /// Applies a body-frame motion: `self ⊕ rel`.
    pub fn compose(&self, rel: &RelativeMotion) -> Pose2 {
        let (s, c) = libm::sincos(self.theta);
        Pose2 {
            x: self.x + c * rel.dx - s * rel.dy,
            y: self.y + s * rel.dx + c * rel.dy,
            theta: wrap(self.theta + rel.dtheta()),
        }
    }

    /// Full SE(2) product `self ∘ other`.
    pub fn compose_pose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = libm::sincos(self.theta);
        Pose2 {
            x: self.x + c * other.x - s * other.y,
            y: self.y + s * other.x + c * other.y,
            theta: wrap(self.theta + other.theta),
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = libm::sincos(self.theta);
        Pose2 {
            x: -(c * self.x + s * self.y),
            y: s * self.x - c * self.y,
            theta: wrap(-self.theta),
        }
    }

    /// Motion that takes `self` to `other`, expressed in the frame of `self`.
    pub fn relative_to(&self, other: &Pose2) -> RelativeMotion {
        relative_between(self, other)
    }
}

/// A relative motion `[dx, dy, sin dθ, cos dθ]` with translation in the
/// frame of the source pose.
///
/// The rotation pair always lies on the unit circle: small drift (up to
/// [`UNIT_CIRCLE_REJECT`]) is re-projected at construction, anything larger
/// is rejected.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeMotion {
    dx: f64,
    dy: f64,
    sin_dtheta: f64,
    cos_dtheta: f64,
}

impl Default for RelativeMotion {
    fn default() -> Self {
        RelativeMotion::ZERO
    }
}

impl RelativeMotion {
    pub const ZERO: RelativeMotion = RelativeMotion {
        dx: 0.0,
        dy: 0.0,
        sin_dtheta: 0.0,
        cos_dtheta: 1.0,
    };

    pub fn new(dx: f64, dy: f64, sin_dtheta: f64, cos_dtheta: f64) -> Result<Self> {
        if !(dx.is_finite() && dy.is_finite()) {
            return Err(Error::NonFinite("motion translation"));
        }
        if !(sin_dtheta.is_finite() && cos_dtheta.is_finite()) {
            return Err(Error::NonFinite("motion rotation"));
        }
        let norm = libm::hypot(sin_dtheta, cos_dtheta);
        let deviation = libm::fabs(norm - 1.0);
        if deviation > UNIT_CIRCLE_REJECT {
            return Err(Error::NotUnitCircle { deviation });
        }
        let (sin_dtheta, cos_dtheta) = if deviation > UNIT_CIRCLE_RENORMALIZE {
            (sin_dtheta / norm, cos_dtheta / norm)
        } else {
            (sin_dtheta, cos_dtheta)
        };
        Ok(RelativeMotion {
            dx,
            dy,
            sin_dtheta,
            cos_dtheta,
        })
    }

    /// Encodes a heading change as its sine/cosine pair.
    pub fn from_angle(dx: f64, dy: f64, dtheta: f64) -> Self {
        let (s, c) = libm::sincos(dtheta);
        RelativeMotion {
            dx,
            dy,
            sin_dtheta: s,
            cos_dtheta: c,
        }
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        self.dy
    }

    #[inline]
    pub fn sin_dtheta(&self) -> f64 {
        self.sin_dtheta
    }

    #[inline]
    pub fn cos_dtheta(&self) -> f64 {
        self.cos_dtheta
    }

    /// Heading change recovered with `atan2`.
    #[inline]
    pub fn dtheta(&self) -> f64 {
        libm::atan2(self.sin_dtheta, self.cos_dtheta)
    }

    /// Length of the translation part.
    #[inline]
    pub fn distance(&self) -> f64 {
        libm::hypot(self.dx, self.dy)
    }

    /// The encoding as a 4-vector `[dx, dy, sin, cos]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.dx, self.dy, self.sin_dtheta, self.cos_dtheta]
    }
}

/// Motion taking `a` to `b`, translation expressed in the frame of `a`.
///
/// `a.compose(&relative_between(a, b)) == b` up to rounding.
pub fn relative_between(a: &Pose2, b: &Pose2) -> RelativeMotion {
    let (s, c) = libm::sincos(a.theta);
    let gx = b.x - a.x;
    let gy = b.y - a.y;
    RelativeMotion::from_angle(c * gx + s * gy, -s * gx + c * gy, b.theta - a.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        libm::fabs(a - b) <= tol
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
        assert!(close(normalize_angle(3.0 * PI).unwrap(), PI, 1e-12));
        assert_eq!(normalize_angle(-PI).unwrap(), PI);
        assert_eq!(normalize_angle(PI).unwrap(), PI);
        assert!(close(normalize_angle(-3.0 * PI).unwrap(), PI, 1e-12));
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn compose_examples() {
        let r = RelativeMotion::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(Pose2::IDENTITY.compose(&r), Pose2::new(1.0, 0.0, 0.0));

        let p = Pose2::new(0.0, 0.0, FRAC_PI_2).compose(&r);
        assert!(close(p.x(), 0.0, 1e-15));
        assert!(close(p.y(), 1.0, 1e-15));
        assert!(close(p.theta(), FRAC_PI_2, 1e-15));
    }

    #[test]
    fn relative_between_examples() {
        let a = Pose2::new(2.0, -1.0, 0.7);
        assert_eq!(relative_between(&a, &a).as_array(), [0.0, 0.0, 0.0, 1.0]);

        let b = Pose2::new(1.0, 2.0, PI / 4.0);
        let r = relative_between(&Pose2::IDENTITY, &b);
        assert_eq!(r.dx(), 1.0);
        assert_eq!(r.dy(), 2.0);
        assert!(close(r.sin_dtheta(), libm::sin(PI / 4.0), 1e-15));
        assert!(close(r.cos_dtheta(), libm::cos(PI / 4.0), 1e-15));
    }

    #[test]
    fn unit_circle_tolerance() {
        // within renormalize band: kept as is
        let r = RelativeMotion::new(0.0, 0.0, 0.0, 1.0 + 5e-10).unwrap();
        assert_eq!(r.cos_dtheta(), 1.0 + 5e-10);
        // renormalized
        let r = RelativeMotion::new(0.0, 0.0, 0.6 * (1.0 + 1e-7), 0.8 * (1.0 + 1e-7)).unwrap();
        assert!(close(
            libm::hypot(r.sin_dtheta(), r.cos_dtheta()),
            1.0,
            1e-15
        ));
        // rejected
        assert!(matches!(
            RelativeMotion::new(0.0, 0.0, 0.6, 0.81),
            Err(Error::NotUnitCircle { .. })
        ));
        assert!(RelativeMotion::new(f64::NAN, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn angular_error_examples() {
        assert_eq!(angular_error(0.1, 0.1), 0.0);
        assert!(close(angular_error(PI - 0.05, -PI + 0.05), 0.1, 1e-12));
        assert!(close(angular_error(-PI + 0.05, PI - 0.05), 0.1, 1e-12));
    }

    #[test]
    fn inverse_is_two_sided() {
        let p = Pose2::new(2.0, 3.0, 0.3);
        let e = p.compose_pose(&p.inverse());
        assert!(
            close(e.x(), 0.0, 1e-15) && close(e.y(), 0.0, 1e-15) && close(e.theta(), 0.0, 1e-15)
        );
        let e = p.inverse().compose_pose(&p);
        assert!(
            close(e.x(), 0.0, 1e-15) && close(e.y(), 0.0, 1e-15) && close(e.theta(), 0.0, 1e-15)
        );
    }

    /// Homogeneous 3×3 matrix product, kept independent of `compose`.
    fn homogeneous_compose(p: (f64, f64, f64), r: (f64, f64, f64)) -> (f64, f64, f64) {
        let m = |x: f64, y: f64, t: f64| {
            [
                [t.cos(), -t.sin(), x],
                [t.sin(), t.cos(), y],
                [0.0, 0.0, 1.0],
            ]
        };
        let a = m(p.0, p.1, p.2);
        let b = m(r.0, r.1, r.2);
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        (c[0][2], c[1][2], c[1][0].atan2(c[0][0]))
    }

    proptest! {
        #[test]
        fn compose_matches_matrix_product(dx in -5.0..5.0f64, dy in -5.0..5.0f64, dt in -PI..PI) {
            let p = Pose2::new(2.0, 3.0, 0.3);
            let q = p.compose(&RelativeMotion::from_angle(dx, dy, dt));
            let (x, y, t) = homogeneous_compose((2.0, 3.0, 0.3), (dx, dy, dt));
            prop_assert!(close(q.x(), x, 1e-12));
            prop_assert!(close(q.y(), y, 1e-12));
            prop_assert!(angular_error(q.theta(), t) < 1e-12);
        }

        #[test]
        fn round_trip(ax in -100.0..100.0f64, ay in -100.0..100.0f64, at in -10.0..10.0f64,
                      bx in -100.0..100.0f64, by in -100.0..100.0f64, bt in -10.0..10.0f64) {
            let a = Pose2::new(ax, ay, at);
            let b = Pose2::new(bx, by, bt);
            let c = a.compose(&relative_between(&a, &b));
            prop_assert!(close(c.x(), b.x(), 1e-9));
            prop_assert!(close(c.y(), b.y(), 1e-9));
            prop_assert!(angular_error(c.theta(), b.theta()) < 1e-9);
        }

        #[test]
        fn left_identity(x in -100.0..100.0f64, y in -100.0..100.0f64, t in -10.0..10.0f64) {
            let p = Pose2::new(x, y, t);
            let q = Pose2::IDENTITY.compose_pose(&p);
            prop_assert_eq!(q, p);
        }

        #[test]
        fn normalized_range(t in -1e6..1e6f64) {
            let w = normalize_angle(t).unwrap();
            prop_assert!(w > -PI && w <= PI);
            let k = libm::round((t - w) / TAU);
            prop_assert!(close(t - w, k * TAU, 1e-9 * (1.0 + libm::fabs(t))));
        }

        #[test]
        fn angular_error_brute_force(a in -20.0..20.0f64, b in -20.0..20.0f64) {
            let e = angular_error(a, b);
            prop_assert!((0.0..=PI).contains(&e));
            prop_assert!(close(e, angular_error(b, a), 1e-12));
            // |a - b| < 40 here, so |k| <= 8 covers every candidate.
            let brute = (-8..=8)
                .map(|k| libm::fabs(a - b + TAU * k as f64))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(close(e, brute, 1e-9));
        }
    }
}
