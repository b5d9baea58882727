use nalgebra::{Matrix3, Point3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GeometryError;

/// Largest tolerated deviation of `RᵀR` from identity.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Rigid camera-to-world transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        if rotation.iter().chain(translation.iter()).any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite("pose"));
        }
        let dev = orthonormality_error(&rotation);
        if !(dev < ORTHONORMAL_TOL) || rotation.determinant() <= 0.0 {
            return Err(GeometryError::InvalidRotation(dev));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_quaternion(q: &UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation: q.to_rotation_matrix().into_inner(),
            translation,
        }
    }

    /// Camera at `eye` looking at `target`. `up` is the world direction that
    /// should appear upward in the image (camera -y).
    pub fn look_at(
        eye: &Point3<f64>,
        target: &Point3<f64>,
        up: &Vector3<f64>,
    ) -> Result<Self, GeometryError> {
        let z = target - eye;
        let zn = z.norm();
        if !(zn > 1e-12) {
            return Err(GeometryError::NumericalFailure(
                "look_at target coincides with eye".into(),
            ));
        }
        let z = z / zn;
        let x = (-up).cross(&z);
        let xn = x.norm();
        if !(xn > 1e-12) {
            return Err(GeometryError::NumericalFailure(
                "look_at up vector parallel to viewing direction".into(),
            ));
        }
        let x = x / xn;
        let y = z.cross(&x);
        Ok(Self::from_axes(&x, &y, &z, eye.coords))
    }

    /// Pose whose camera x/y/z axes (expressed in world coordinates) are the
    /// given orthonormal vectors.
    pub(crate) fn from_axes(
        x: &Vector3<f64>,
        y: &Vector3<f64>,
        z: &Vector3<f64>,
        position: Vector3<f64>,
    ) -> Self {
        Self {
            rotation: Matrix3::from_columns(&[*x, *y, *z]),
            translation: position,
        }
    }

    /// Uniformly random rotation, translation uniform in a cube of half-size `extent`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, extent: f64) -> Self {
        // Shoemake's subgroup algorithm.
        let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let tau = std::f64::consts::TAU;
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let q = Quaternion::new(
            b * (tau * u3).cos(),
            a * (tau * u2).sin(),
            a * (tau * u2).cos(),
            b * (tau * u3).sin(),
        );
        let t = if extent > 0.0 {
            Vector3::new(
                rng.random_range(-extent..extent),
                rng.random_range(-extent..extent),
                rng.random_range(-extent..extent),
            )
        } else {
            Vector3::zeros()
        };
        Self::from_quaternion(&UnitQuaternion::from_quaternion(q), t)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Camera center in world coordinates.
    pub fn position(&self) -> Point3<f64> {
        Point3::from(self.translation)
    }

    /// Viewing direction (camera +Z) in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    pub fn quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation))
    }

    pub fn camera_to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn world_to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.transpose() * (p.coords - self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Geodesic angle between the two rotations, in radians.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        let r = self.rotation * other.rotation.transpose();
        ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }

    /// Row-major rotation entries.
    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
        ]
    }

    pub fn from_row_major(rotation: [f64; 9], translation: [f64; 3]) -> Result<Self, GeometryError> {
        Self::new(
            Matrix3::from_row_slice(&rotation),
            Vector3::from(translation),
        )
    }

    #[cfg(test)]
    pub(crate) fn approx_eq(&self, other: &Pose, tol: f64) -> bool {
        (self.rotation - other.rotation).amax() <= tol
            && (self.translation - other.translation).amax() <= tol
    }
}

fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    rotation: [f64; 9],
    translation: [f64; 3],
}

impl Serialize for Pose {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PoseRecord {
            rotation: self.rotation_row_major(),
            translation: self.translation.into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = PoseRecord::deserialize(d)?;
        Pose::from_row_major(rec.rotation, rec.translation).map_err(serde::de::Error::custom)
    }
}

/// `count` poses from `a` to `b`: rotation by shortest-arc slerp, translation
/// linear in t = i / (count - 1). Endpoints are returned unchanged.
pub fn interpolate_poses(a: &Pose, b: &Pose, count: usize) -> Result<Vec<Pose>, GeometryError> {
    if count < 2 {
        return Err(GeometryError::InvalidCount(count));
    }
    let qa = a.quaternion().into_inner();
    let mut qb = b.quaternion().into_inner();
    let mut dot = qa.dot(&qb);
    if dot < 0.0 {
        qb = -qb;
        dot = -dot;
    }
    let dot = dot.min(1.0);
    let theta = dot.acos();
    let sin_theta = theta.sin();

    let mut out = Vec::with_capacity(count);
    out.push(*a);
    for i in 1..count - 1 {
        let t = i as f64 / (count - 1) as f64;
        let q = if sin_theta < 1e-12 {
            qa * (1.0 - t) + qb * t
        } else {
            let wa = ((1.0 - t) * theta).sin() / sin_theta;
            let wb = (t * theta).sin() / sin_theta;
            qa * wa + qb * wb
        };
        let q = UnitQuaternion::from_quaternion(q);
        let translation = a.translation * (1.0 - t) + b.translation * t;
        out.push(Pose::from_quaternion(&q, translation));
    }
    out.push(*b);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rot_y(deg: f64) -> Pose {
        let r = Rotation3::from_axis_angle(&Vector3::y_axis(), deg.to_radians());
        Pose::new(r.into_inner(), Vector3::zeros()).unwrap()
    }

    /// Relative angle through quaternions, independent of the trace formula.
    fn quat_angle(a: &Pose, b: &Pose) -> f64 {
        let d = a.quaternion().into_inner().dot(&b.quaternion().into_inner()).abs();
        2.0 * d.min(1.0).acos()
    }

    #[test]
    fn rejects_non_rotations() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            Pose::new(m, Vector3::zeros()),
            Err(GeometryError::InvalidRotation(_))
        ));
        assert!(Pose::new(Matrix3::identity() * 1.01, Vector3::zeros()).is_err());
    }

    #[test]
    fn look_at_identity_frame() {
        let p = Pose::look_at(
            &Point3::origin(),
            &Point3::new(0.0, 0.0, 5.0),
            &Vector3::new(0.0, -1.0, 0.0),
        )
        .unwrap();
        assert!(p.approx_eq(&Pose::identity(), 1e-15));
    }

    #[test]
    fn interpolate_same_pose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Pose::random(&mut rng, 1.0);
        let seq = interpolate_poses(&c, &c, 5).unwrap();
        assert_eq!(seq.len(), 5);
        for p in &seq {
            assert!(p.approx_eq(&c, 1e-12));
        }
    }

    #[test]
    fn interpolate_midpoint_halves_angle() {
        let seq = interpolate_poses(&Pose::identity(), &rot_y(90.0), 3).unwrap();
        let mid = seq[1].rotation_angle_to(&Pose::identity()).to_degrees();
        assert!((mid - 45.0).abs() < 1e-9, "{mid}");
    }

    #[test]
    fn interpolate_rejects_short_count() {
        assert_eq!(
            interpolate_poses(&Pose::identity(), &Pose::identity(), 1),
            Err(GeometryError::InvalidCount(1))
        );
    }

    #[test]
    fn interpolate_takes_short_arc() {
        // 350 degrees one way is 10 degrees the other.
        let seq = interpolate_poses(&Pose::identity(), &rot_y(350.0), 3).unwrap();
        let mid = quat_angle(&seq[1], &Pose::identity()).to_degrees();
        assert!((mid - 5.0).abs() < 1e-9, "{mid}");
    }

    #[test]
    fn interpolate_constant_angular_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = Pose::random(&mut rng, 2.0);
            let b = Pose::random(&mut rng, 2.0);
            let seq = interpolate_poses(&a, &b, 25).unwrap();
            assert_eq!(seq[0], a);
            assert_eq!(seq[24], b);
            let total = quat_angle(&a, &b);
            for w in seq.windows(2) {
                let step = quat_angle(&w[0], &w[1]);
                assert!((step - total / 24.0).abs() < 1e-9);
            }
            for (i, p) in seq.iter().enumerate() {
                let t = i as f64 / 24.0;
                let lin = a.translation() * (1.0 - t) + b.translation() * t;
                assert!((p.translation() - lin).amax() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn compose_with_inverse_is_identity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = Pose::random(&mut rng, 10.0);
            prop_assert!(p.compose(&p.inverse()).approx_eq(&Pose::identity(), 1e-9));
            prop_assert!(p.inverse().compose(&p).approx_eq(&Pose::identity(), 1e-9));
        }

        #[test]
        fn interpolated_rotations_are_orthonormal(seed in any::<u64>(), count in 2usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Pose::random(&mut rng, 1.0);
            let b = Pose::random(&mut rng, 1.0);
            for p in interpolate_poses(&a, &b, count).unwrap() {
                prop_assert!(p.orthonormality_error() < ORTHONORMAL_TOL);
                prop_assert!(p.rotation().determinant() > 0.0);
            }
        }
    }
}
