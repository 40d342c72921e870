//! Camera back-projection, world transforms and the bird's-eye grid projection.
//!
//! World frame convention: `y` is height above the floor, the map plane is spanned by
//! `x` (grid rows, `px`) and `z` (grid columns, `py`, with `+z` mapping to decreasing `py`).

use num_traits::{Num, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Cell;
use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];

/// Row-major 3x3 matrix over any numeric type, including exact rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Copy + Num> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]);
            }
        }
        Mat3(out)
    }

    /// Cofactor expansion along the first row.
    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }
}

/// Fixed rotation between the robot base frame and the camera frame.
pub fn robot_camera_rotation<T: Copy + Num + Signed>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    Mat3([[z, z, o], [-o, z, z], [z, -o, z]])
}

/// Rotation about the world vertical (`y`) axis by `yaw` radians.
pub fn yaw_rotation<T: Scalar>(yaw: T) -> Mat3<T> {
    let (s, c) = yaw.sin_cos();
    let (o, z) = (T::one(), T::zero());
    Mat3([[c, z, s], [z, o, z], [-s, z, c]])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    /// Meters per raw depth unit.
    pub depth_scale: T,
}

impl<T: Scalar> CameraIntrinsics<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !ok(self.fx) || !ok(self.fy) {
            return Err(Error::invalid("intrinsics", "focal lengths must be positive"));
        }
        if !ok(self.depth_scale) {
            return Err(Error::invalid("intrinsics", "depth_scale must be positive"));
        }
        if !self.cx.is_finite() || !self.cy.is_finite() {
            return Err(Error::invalid("intrinsics", "principal point must be finite"));
        }
        Ok(())
    }
}

/// World-from-camera rigid transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Scalar> Pose<T> {
    pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

    pub fn identity() -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: [T::zero(); 3],
        }
    }

    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    /// Builds a pose from a row-major 3x4 `[R | t]` matrix.
    pub fn from_row_major_3x4(m: &[T; 12]) -> Self {
        Pose {
            rotation: Mat3([[m[0], m[1], m[2]], [m[4], m[5], m[6]], [m[8], m[9], m[10]]]),
            translation: [m[3], m[7], m[11]],
        }
    }

    pub fn to_row_major_3x4(&self) -> [T; 12] {
        let r = &self.rotation.0;
        let t = &self.translation;
        [
            r[0][0], r[0][1], r[0][2], t[0], r[1][0], r[1][1], r[1][2], t[1], r[2][0], r[2][1],
            r[2][2], t[2],
        ]
    }

    /// Largest deviation of `RᵀR` from the identity and of `det R` from +1.
    pub fn orthonormality_error(&self) -> f64 {
        let rtr = self.rotation.transpose().mul(&self.rotation);
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((rtr.0[i][j].to_f64_lossy() - target).abs());
            }
        }
        err.max((self.rotation.det().to_f64_lossy() - 1.0).abs())
    }

    pub fn validate(&self, tolerance: f64) -> Result<()> {
        if self
            .to_row_major_3x4()
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("pose".into()));
        }
        let err = self.orthonormality_error();
        if !(err <= tolerance) {
            return Err(Error::invalid(
                "pose",
                format!("rotation is not orthonormal with det +1 (error {err:.3e} > {tolerance:.1e})"),
            ));
        }
        Ok(())
    }
}

/// Top-down grid geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    /// Grid rows (`px` range).
    pub h_bar: usize,
    /// Grid columns (`py` range).
    pub w_bar: usize,
    /// Meters per cell.
    pub cell_size: T,
    /// Points at or above this height (meters) are ignored.
    pub robot_height: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.h_bar == 0 || self.w_bar == 0 {
            return Err(Error::invalid("grid", "grid must have at least one row and column"));
        }
        if !(self.cell_size.is_finite() && self.cell_size > T::zero()) {
            return Err(Error::invalid("grid", "cell size must be positive"));
        }
        if !(self.robot_height.is_finite() && self.robot_height > T::zero()) {
            return Err(Error::invalid("grid", "robot height must be positive"));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.h_bar * self.w_bar
    }

    pub fn cast<U: Scalar>(&self) -> GridSpec<U> {
        GridSpec {
            h_bar: self.h_bar,
            w_bar: self.w_bar,
            cell_size: U::from_f64_lossy(self.cell_size.to_f64_lossy()),
            robot_height: U::from_f64_lossy(self.robot_height.to_f64_lossy()),
        }
    }

    /// World `(x, z)` of a cell center; inverse of the projection on cell centers.
    pub fn cell_center_world(&self, (px, py): Cell) -> (f64, f64) {
        let s = self.cell_size.to_f64_lossy();
        let x = (px as f64 - self.h_bar as f64 / 2.0) * s;
        let z = -(py as f64 - self.w_bar as f64 / 2.0) * s;
        (x, z)
    }
}

/// Back-projects a pixel into the camera frame. `None` for non-positive or non-finite depth.
pub fn backproject<T: Scalar>(
    row: usize,
    col: usize,
    depth_raw: T,
    intr: &CameraIntrinsics<T>,
) -> Option<Vec3<T>> {
    let d = depth_raw * intr.depth_scale;
    if !(d.is_finite() && d > T::zero()) {
        return None;
    }
    let u = T::from_usize(col)?;
    let v = T::from_usize(row)?;
    Some([(u - intr.cx) * d / intr.fx, (v - intr.cy) * d / intr.fy, d])
}

pub fn to_world<T: Scalar>(p_cam: &Vec3<T>, pose: &Pose<T>) -> Vec3<T> {
    let r = pose.rotation.mul_vec(p_cam);
    [
        r[0] + pose.translation[0],
        r[1] + pose.translation[1],
        r[2] + pose.translation[2],
    ]
}

/// Exact `⌊x / s + f⌋` for `f ∈ {0, ½}` and `s > 0`.
///
/// The quotient is only an estimate; the result is corrected by checking the sign of
/// `x − (k − f)·s` with a fused multiply-add, which rounds once and therefore never
/// flips the sign of the exact residual.
fn floor_quotient<T: Scalar>(x: T, s: T, half: bool) -> Option<i64> {
    let f = if half {
        T::from_f64_lossy(0.5)
    } else {
        T::zero()
    };
    // Integers (and half-integers) must stay exactly representable in T.
    let limit = T::one() / (T::epsilon() * T::from_f64_lossy(8.0));
    let q = x / s + f;
    if !q.is_finite() || q.abs() > limit {
        return None;
    }
    let mut k = q.floor();
    let residual = |m: T| (-m).mul_add(s, x);
    while residual(k - f) < T::zero() {
        k = k - T::one();
    }
    while residual(k + T::one() - f) >= T::zero() {
        k = k + T::one();
    }
    k.to_i64()
}

/// Signed grid index of a world point: `px = ⌊H̄/2 + x/s + ½⌋`, `py = ⌊W̄/2 − z/s + ½⌋`.
///
/// `None` only for non-finite or absurdly distant points.
pub fn grid_index<T: Scalar>(p_world: &Vec3<T>, grid: &GridSpec<T>) -> Option<(i64, i64)> {
    let axis = |n: usize, coord: T| -> Option<i64> {
        // n/2 + ½ is either an integer (odd n) or an integer plus ½ (even n).
        let (base, half) = if n % 2 == 0 {
            (n as i64 / 2, true)
        } else {
            ((n as i64 + 1) / 2, false)
        };
        floor_quotient(coord, grid.cell_size, half).map(|k| base + k)
    };
    Some((axis(grid.h_bar, p_world[0])?, axis(grid.w_bar, -p_world[2])?))
}

/// Projects a world point onto the grid, `None` when it falls outside.
pub fn project_to_grid<T: Scalar>(p_world: &Vec3<T>, grid: &GridSpec<T>) -> Option<Cell> {
    let (px, py) = grid_index(p_world, grid)?;
    let inside = px >= 0 && py >= 0 && (px as usize) < grid.h_bar && (py as usize) < grid.w_bar;
    inside.then_some((px as usize, py as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, s: f64) -> GridSpec<f64> {
        GridSpec {
            h_bar: n,
            w_bar: n,
            cell_size: s,
            robot_height: 1.5,
        }
    }

    #[test]
    fn principal_point_maps_to_optical_axis() {
        let intr = CameraIntrinsics {
            fx: 100.0,
            fy: 120.0,
            cx: 50.0,
            cy: 40.0,
            depth_scale: 1.0,
        };
        assert_eq!(backproject(40, 50, 3.0, &intr), Some([0.0, 0.0, 3.0]));
    }

    #[test]
    fn backproject_pinhole_formula() {
        let intr = CameraIntrinsics {
            fx: 100.0,
            fy: 100.0,
            cx: 50.0,
            cy: 50.0,
            depth_scale: 1.0,
        };
        assert_eq!(backproject(50, 150, 2.0, &intr), Some([2.0, 0.0, 2.0]));
        assert_eq!(backproject(50, 150, 0.0, &intr), None);
        assert_eq!(backproject(50, 150, -1.0, &intr), None);
        assert_eq!(backproject(50, 150, f64::NAN, &intr), None);
    }

    #[test]
    fn to_world_identity_and_translation() {
        let p = [0.3, -1.0, 2.0];
        assert_eq!(to_world(&p, &Pose::identity()), p);
        let pose = Pose::new(Mat3::identity(), [1.0, 0.0, 0.0]);
        assert_eq!(to_world(&[0.0, 0.0, 0.0], &pose), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn to_world_with_robot_rotation() {
        let pose = Pose::new(robot_camera_rotation::<f64>(), [0.0; 3]);
        assert_eq!(to_world(&[0.0, 0.0, 1.0], &pose), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn projection_examples() {
        let g = grid(1000, 0.05);
        assert_eq!(project_to_grid(&[0.0, 0.7, 0.0], &g), Some((500, 500)));
        assert_eq!(project_to_grid(&[1.0, 0.0, -0.5], &g), Some((520, 510)));
        assert_eq!(project_to_grid(&[30.0, 0.0, 0.0], &g), None);
        assert_eq!(grid_index(&[30.0, 0.0, 0.0], &g), Some((1100, 500)));
    }

    #[test]
    fn projection_floors_negative_coordinates() {
        let g = grid(10, 1.0);
        // 5 + (-0.6) + 0.5 = 4.9 -> 4 ; truncation would give 4 as well, so probe -1.6.
        assert_eq!(grid_index(&[-1.6, 0.0, 0.0], &g), Some((3, 5)));
        // exactly on a boundary: 5 - 5.5 + 0.5 = 0 -> 0
        assert_eq!(grid_index(&[-5.5, 0.0, 0.0], &g), Some((0, 5)));
        assert_eq!(grid_index(&[-5.6, 0.0, 0.0], &g), Some((-1, 5)));
    }

    #[test]
    fn odd_grid_sizes() {
        let g = grid(999, 0.05);
        assert_eq!(grid_index(&[0.0, 0.0, 0.0], &g), Some((500, 500)));
        assert_eq!(grid_index(&[-0.01, 0.0, 0.01], &g), Some((499, 499)));
    }

    #[test]
    fn non_finite_points_are_rejected() {
        let g = grid(10, 0.05);
        assert_eq!(grid_index(&[f64::NAN, 0.0, 0.0], &g), None);
        assert_eq!(grid_index(&[f64::INFINITY, 0.0, 0.0], &g), None);
        assert_eq!(grid_index(&[1e300, 0.0, 0.0], &g), None);
    }

    #[test]
    fn rotation_is_exactly_orthonormal() {
        let r = robot_camera_rotation::<i64>();
        assert_eq!(r.transpose().mul(&r), Mat3::identity());
        assert_eq!(r.det(), 1);
        assert_eq!(r.mul_vec(&[0, 0, 1]), [1, 0, 0]);
        assert_eq!(r.0, [[0, 0, 1], [-1, 0, 0], [0, -1, 0]]);
    }

    #[test]
    fn pose_validation() {
        assert!(Pose::<f64>::identity().validate(1e-6).is_ok());
        let mut bad = Pose::<f64>::identity();
        bad.rotation.0[0][0] = 1.002;
        assert!(bad.validate(1e-3).is_err());
        let mut reflect = Pose::<f64>::identity();
        reflect.rotation.0[2][2] = -1.0;
        assert!(reflect.validate(1e-3).is_err());
        let yawed = Pose::new(yaw_rotation(0.7f64), [1.0, 2.0, 3.0]);
        assert!(yawed.validate(1e-9).is_ok());
        assert_eq!(Pose::from_row_major_3x4(&yawed.to_row_major_3x4()), yawed);
    }

    #[test]
    fn intrinsics_validation() {
        let mut intr = CameraIntrinsics {
            fx: 1.0f32,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            depth_scale: 0.001,
        };
        assert!(intr.validate().is_ok());
        intr.fy = 0.0;
        assert!(intr.validate().is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(grid(1, 0.05).validate().is_ok());
        assert!(grid(0, 0.05).validate().is_err());
        assert!(grid(5, 0.0).validate().is_err());
    }
}
