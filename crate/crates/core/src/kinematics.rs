//! Constant-curvature forward kinematics.
//!
//! The robot backbone is modeled as a circular arc parameterized by arc
//! length `s`, signed curvature `kappa`, and the bending-plane angle `phi`.
//! With `phi = 0` the arc lives in the world (x, z) plane; this crate maps
//! that plane onto planar coordinates as `(x_plane, y_plane) = (x, z)`, so a
//! straight robot grows along +y and positive curvature bends it toward -x.
//!
//! For obstacle interaction the backbone is split into `N` equal-length
//! sub-segments with independent curvatures ([`SegmentedShape`]); the chain
//! of sub-segment arcs is composed by [`chain_poses`]. A pose heading of 0
//! points along +y (the growth direction of a straight robot), and heading
//! increases counter-clockwise, consistent with the curvature sign above.

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature magnitudes with `|kappa * s|` below this use series expansions
/// of `(cos(ks)-1)/k` and `sin(ks)/k` to avoid cancellation near `kappa = 0`.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Shape state of the whole robot: arc length `s` (m), signed curvature
/// `kappa` (1/m), and bending-plane angle `phi` (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub s: f64,
    pub kappa: f64,
    pub phi: f64,
}

impl Configuration {
    pub fn new(s: f64, kappa: f64, phi: f64) -> Result<Self> {
        if !s.is_finite() || !kappa.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite configuration (s={s}, kappa={kappa}, phi={phi})"
            )));
        }
        if s < 0.0 {
            return Err(Error::InvalidInput(format!("arc length must be >= 0, got {s}")));
        }
        Ok(Self { s, kappa, phi })
    }

    /// Planar configuration (`phi = 0`); the only kind the simulator builds.
    pub fn planar(s: f64, kappa: f64) -> Result<Self> {
        Self::new(s, kappa, 0.0)
    }
}

/// A point in the robot's working plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Position plus tangent direction of a point on the backbone.
///
/// Heading is measured counter-clockwise from +y (the straight growth
/// direction) and normalized to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub position: PlanarPoint,
    pub heading: f64,
}

impl PlanarPose {
    pub const ORIGIN: PlanarPose = PlanarPose {
        position: PlanarPoint::ORIGIN,
        heading: 0.0,
    };

    pub fn new(position: PlanarPoint, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.heading.is_finite()
    }
}

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = angle.rem_euclid(two_pi); // [0, 2*pi)
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// The backbone as `N` equal-length sub-segments with independent signed
/// curvatures; the decision variable of the interaction solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedShape {
    kappas: Vec<f64>,
    total_length: f64,
}

impl SegmentedShape {
    pub fn new(kappas: Vec<f64>, total_length: f64) -> Result<Self> {
        if kappas.is_empty() {
            return Err(Error::InvalidInput("shape needs at least one sub-segment".into()));
        }
        if !total_length.is_finite() || total_length < 0.0 {
            return Err(Error::InvalidInput(format!(
                "total length must be finite and >= 0, got {total_length}"
            )));
        }
        if kappas.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidInput("non-finite curvature in shape".into()));
        }
        Ok(Self { kappas, total_length })
    }

    /// Shape with the same curvature on every sub-segment.
    pub fn uniform(kappa: f64, segments: usize, total_length: f64) -> Result<Self> {
        Self::new(vec![kappa; segments], total_length)
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn segments(&self) -> usize {
        self.kappas.len()
    }

    pub fn segment_length(&self) -> f64 {
        self.total_length / self.kappas.len() as f64
    }
}

/// `(cos(kappa*s) - 1) / kappa`, singularity-safe.
pub(crate) fn cos_um1_over_kappa(kappa: f64, s: f64) -> f64 {
    let u = kappa * s;
    if u.abs() < SERIES_THRESHOLD {
        -kappa * s * s / 2.0 * (1.0 - u * u / 12.0)
    } else {
        (u.cos() - 1.0) / kappa
    }
}

/// `sin(kappa*s) / kappa`, singularity-safe.
pub(crate) fn sin_u_over_kappa(kappa: f64, s: f64) -> f64 {
    let u = kappa * s;
    if u.abs() < SERIES_THRESHOLD {
        s * (1.0 - u * u / 6.0)
    } else {
        u.sin() / kappa
    }
}

fn check_positive_length(q: &Configuration) -> Result<()> {
    if q.s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tip queries need arc length > 0, got {}",
            q.s
        )));
    }
    Ok(())
}

/// Homogeneous base-to-tip transform of a single constant-curvature arc.
///
/// The rotation block is orthonormal for any finite inputs and the
/// translation column is evaluated with series expansions near `kappa = 0`.
pub fn tip_transform(q: &Configuration) -> Result<Matrix4<f64>> {
    check_positive_length(q)?;
    let u = q.kappa * q.s;
    let (su, cu) = u.sin_cos();
    let (sp, cp) = q.phi.sin_cos();
    let c = cos_um1_over_kappa(q.kappa, q.s);
    let z = sin_u_over_kappa(q.kappa, q.s);

    let mut m = Matrix4::identity();
    m[(0, 0)] = cp * cp * (cu - 1.0) + 1.0;
    m[(0, 1)] = sp * cp * (cu - 1.0);
    m[(0, 2)] = -cp * su;
    m[(0, 3)] = cp * c;
    m[(1, 0)] = sp * cp * (cu - 1.0);
    m[(1, 1)] = cp * cp * (1.0 - cu) + cu;
    m[(1, 2)] = -sp * su;
    m[(1, 3)] = sp * c;
    m[(2, 0)] = cp * su;
    m[(2, 1)] = sp * su;
    m[(2, 2)] = cu;
    m[(2, 3)] = z;
    Ok(m)
}

/// Cartesian tip position `(x, y, z)` of a single arc.
pub fn tip_position(q: &Configuration) -> Result<Vector3<f64>> {
    check_positive_length(q)?;
    let (sp, cp) = q.phi.sin_cos();
    let c = cos_um1_over_kappa(q.kappa, q.s);
    let z = sin_u_over_kappa(q.kappa, q.s);
    Ok(Vector3::new(cp * c, sp * c, z))
}

/// Tip position of a planar (`phi = 0`) arc in working-plane coordinates.
pub fn planar_tip(q: &Configuration) -> Result<PlanarPoint> {
    if q.phi != 0.0 {
        return Err(Error::Unsupported(format!(
            "planar tip is only defined for phi = 0, got phi = {}",
            q.phi
        )));
    }
    check_positive_length(q)?;
    Ok(PlanarPoint::new(
        cos_um1_over_kappa(q.kappa, q.s),
        sin_u_over_kappa(q.kappa, q.s),
    ))
}

/// Chord displacement of one arc segment expressed in its local frame
/// (heading 0).
pub(crate) fn arc_chord(kappa: f64, length: f64) -> (f64, f64) {
    (cos_um1_over_kappa(kappa, length), sin_u_over_kappa(kappa, length))
}

/// Poses at the sub-segment boundaries of a segmented shape.
///
/// Returns `N + 1` poses: index 0 is `base`, index `i + 1` is the tip of
/// sub-segment `i`. Each step advances by the rotated chord of one arc and
/// turns the heading by `kappa_i * l`.
pub fn chain_poses(shape: &SegmentedShape, base: &PlanarPose) -> Result<Vec<PlanarPose>> {
    if !base.is_finite() {
        return Err(Error::InvalidInput("non-finite base pose".into()));
    }
    let l = shape.segment_length();
    let mut poses = Vec::with_capacity(shape.segments() + 1);
    let mut pose = PlanarPose::new(base.position, base.heading);
    poses.push(pose);
    for &kappa in shape.kappas() {
        let (cx, cy) = arc_chord(kappa, l);
        let (sh, ch) = pose.heading.sin_cos();
        let position = PlanarPoint::new(
            pose.position.x + ch * cx - sh * cy,
            pose.position.y + sh * cx + ch * cy,
        );
        pose = PlanarPose::new(position, pose.heading + kappa * l);
        poses.push(pose);
    }
    Ok(poses)
}
