//! Geometric primitives shared by the kinematic and metrology code.
//!
//! Rotations follow the right-handed convention
//!
//! ```text
//! Rx(φ) = [1 0 0; 0 cos φ −sin φ; 0 sin φ cos φ]
//! Ry(θ) = [cos θ 0 sin θ; 0 1 0; −sin θ 0 cos θ]
//! Rz(ψ) = [cos ψ −sin ψ 0; sin ψ cos ψ 0; 0 0 1]
//! ```
//!
//! and a link transform `H(φ, θ, ψ, L)` rotates by `Rx(φ)·Ry(θ)·Rz(ψ)` and then
//! walks a distance `L` along the rotated z-axis.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Relative threshold below which a determinant-like quantity counts as zero.
const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Elementary rotation about a coordinate axis.
pub fn rotation(axis: Axis, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X => Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Axis::Y => Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::Z => Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

/// `Rx(φ)·Ry(θ)·Rz(ψ)`.
pub fn rotation_xyz(phi: f64, theta: f64, psi: f64) -> Mat3 {
    rotation(Axis::X, phi) * rotation(Axis::Y, theta) * rotation(Axis::Z, psi)
}

/// A rigid transform `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn from_rotation(rotation: Mat3) -> Self {
        Self { rotation, translation: Vec3::zeros() }
    }

    /// Frame origin expressed in the parent frame.
    pub fn origin(&self) -> Vec3 {
        self.translation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> FrameTransform {
        let rt = self.rotation.transpose();
        FrameTransform { rotation: rt, translation: -(rt * self.translation) }
    }
}

impl std::ops::Mul for FrameTransform {
    type Output = FrameTransform;

    fn mul(self, rhs: FrameTransform) -> FrameTransform {
        self.compose(&rhs)
    }
}

/// Link transform `H(φ, θ, ψ, L)`: rotation `Rx(φ)·Ry(θ)·Rz(ψ)` followed by a
/// translation of `L` along the rotated z-axis.
pub fn homogeneous(phi: f64, theta: f64, psi: f64, length: f64) -> FrameTransform {
    let rotation = rotation_xyz(phi, theta, psi);
    FrameTransform { rotation, translation: rotation * Vec3::new(0.0, 0.0, length) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneMode {
    /// `z = a·x + b·y + c`, minimizing vertical residuals.
    Functional,
    /// `n·p = d` with `|n| = 1`, minimizing perpendicular residuals.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PlaneFit {
    Functional { a: f64, b: f64, c: f64, rmse: f64 },
    Orthogonal { normal: [f64; 3], offset: f64, rmse: f64 },
}

impl PlaneFit {
    pub fn rmse(&self) -> f64 {
        match *self {
            PlaneFit::Functional { rmse, .. } | PlaneFit::Orthogonal { rmse, .. } => rmse,
        }
    }

    /// Unit normal, oriented with a non-negative z component.
    pub fn normal(&self) -> Vec3 {
        match *self {
            PlaneFit::Functional { a, b, .. } => Vec3::new(-a, -b, 1.0).normalize(),
            PlaneFit::Orthogonal { normal, .. } => Vec3::from(normal),
        }
    }

    /// Signed residual of `p`: vertical for the functional form, perpendicular
    /// for the orthogonal form.
    pub fn residual(&self, p: &Vec3) -> f64 {
        match *self {
            PlaneFit::Functional { a, b, c, .. } => p.z - (a * p.x + b * p.y + c),
            PlaneFit::Orthogonal { normal, offset, .. } => Vec3::from(normal).dot(p) - offset,
        }
    }
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64
}

fn scatter(points: &[Vec3], center: &Vec3) -> Mat3 {
    points.iter().fold(Mat3::zeros(), |acc, p| {
        let d = p - center;
        acc + d * d.transpose()
    })
}

/// Eigen-decomposition of a symmetric scatter matrix with ascending eigenvalues.
fn sorted_eigen(m: Mat3) -> ([f64; 3], [Vec3; 3]) {
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    (vals, vecs)
}

/// Least-squares plane through `points`.
pub fn fit_plane(points: &[Vec3], mode: PlaneMode) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput("plane fit needs at least 3 points"));
    }
    let center = centroid(points);
    let s = scatter(points, &center);
    let (vals, vecs) = sorted_eigen(s);
    if vals[1] <= DEGENERATE_REL * vals[2].max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateInput("points are collinear or coincident"));
    }
    let n = points.len() as f64;
    match mode {
        PlaneMode::Orthogonal => {
            // Ties in the smallest eigenvalue leave the plane ambiguous; prefer
            // the candidate closest to horizontal so the choice is deterministic.
            let tie = 1e-10 * vals[2];
            let mut normal = (0..3)
                .filter(|&i| vals[i] - vals[0] <= tie)
                .map(|i| vecs[i])
                .max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
                .unwrap_or(vecs[0]);
            if normal.z < 0.0 {
                normal = -normal;
            }
            let offset = normal.dot(&center);
            let ss: f64 = points.iter().map(|p| (normal.dot(p) - offset).powi(2)).sum();
            Ok(PlaneFit::Orthogonal { normal: normal.into(), offset, rmse: (ss / n).sqrt() })
        }
        PlaneMode::Functional => {
            let (sxx, sxy, syy) = (s[(0, 0)], s[(0, 1)], s[(1, 1)]);
            let (sxz, syz) = (s[(0, 2)], s[(1, 2)]);
            let det = sxx * syy - sxy * sxy;
            if det <= DEGENERATE_REL * (sxx + syy).powi(2) {
                return Err(Error::IllConditioned("xy spread is degenerate (near-vertical data)"));
            }
            let a = (sxz * syy - syz * sxy) / det;
            let b = (syz * sxx - sxz * sxy) / det;
            let c = center.z - a * center.x - b * center.y;
            let ss: f64 = points.iter().map(|p| (p.z - a * p.x - b * p.y - c).powi(2)).sum();
            Ok(PlaneFit::Functional { a, b, c, rmse: (ss / n).sqrt() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereFit {
    pub center: Vec3,
    pub radius: f64,
    pub rmse: f64,
}

/// Least-squares sphere: algebraic solution refined by Gauss–Newton on the
/// geometric (radial) residuals.
pub fn fit_sphere(points: &[Vec3]) -> Result<SphereFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput("sphere fit needs at least 4 points"));
    }
    let c0 = centroid(points);
    let (vals, _) = sorted_eigen(scatter(points, &c0));
    if vals[0] <= DEGENERATE_REL * vals[2].max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateInput("points are coplanar"));
    }
    // Work relative to the centroid for conditioning.
    let rel: Vec<Vec3> = points.iter().map(|p| p - c0).collect();
    let m = rel.len();
    let design = DMatrix::from_fn(m, 4, |i, j| if j < 3 { 2.0 * rel[i][j] } else { 1.0 });
    let rhs = DVector::from_fn(m, |i, _| rel[i].norm_squared());
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::DegenerateInput("sphere system is singular"))?;
    let mut center = Vec3::new(sol[0], sol[1], sol[2]);
    let r2 = sol[3] + center.norm_squared();
    if r2 <= 0.0 {
        return Err(Error::DegenerateInput("algebraic sphere has no real radius"));
    }
    let mut radius = r2.sqrt();

    for _ in 0..20 {
        let mut jtj = nalgebra::Matrix4::<f64>::zeros();
        let mut jtr = nalgebra::Vector4::<f64>::zeros();
        for p in &rel {
            let d = p - center;
            let dist = d.norm();
            if dist == 0.0 {
                continue;
            }
            let u = d / dist;
            let row = nalgebra::Vector4::new(-u.x, -u.y, -u.z, -1.0);
            let r = dist - radius;
            jtj += row * row.transpose();
            jtr += row * r;
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else { break };
        center += Vec3::new(step[0], step[1], step[2]);
        radius += step[3];
        if step.norm() <= 1e-15 * radius.max(1.0) {
            break;
        }
    }
    let ss: f64 = rel.iter().map(|p| ((p - center).norm() - radius).powi(2)).sum();
    Ok(SphereFit { center: center + c0, radius, rmse: (ss / m as f64).sqrt() })
}

/// Clamp a slightly negative discriminant to zero when it is within rounding
/// of tangency.
fn clamp_discriminant(disc: f64, b: f64, four_ac: f64) -> Option<f64> {
    let tol = DEGENERATE_REL * (b * b + four_ac.abs());
    if disc >= 0.0 {
        Some(if disc <= tol { 0.0 } else { disc })
    } else if -disc <= tol {
        Some(0.0)
    } else {
        None
    }
}

/// Both intersection points of three spheres, ascending by z.
///
/// Subtracting the sphere equations pairwise gives two planes, solved for
/// `y = a₁z + b₁` and `x = a₂z + b₂`; substituting into the first sphere
/// leaves a quadratic in `z`. The denominator is twice the signed area of the
/// centers projected onto the xy-plane, so centers whose projections are
/// collinear are reported as [`Error::DegenerateCenters`].
pub fn three_sphere_intersection(
    c3: &Vec3,
    r3: f64,
    c4: &Vec3,
    r4: f64,
    c5: &Vec3,
    r5: f64,
) -> Result<(Vec3, Vec3)> {
    let (x3, y3, z3) = (c3.x, c3.y, c3.z);
    let (x4, y4, z4) = (c4.x, c4.y, c4.z);
    let (x5, y5, z5) = (c5.x, c5.y, c5.z);
    let w3 = c3.norm_squared() - r3 * r3;
    let w4 = c4.norm_squared() - r4 * r4;
    let w5 = c5.norm_squared() - r5 * r5;

    let d = 2.0 * (y3 * (x4 - x5) + y4 * (x5 - x3) + y5 * (x3 - x4));
    let scale = [(c4 - c3).norm(), (c5 - c3).norm(), (c5 - c4).norm()]
        .into_iter()
        .fold(0.0_f64, f64::max);
    if d.abs() <= DEGENERATE_REL * scale * scale {
        return Err(Error::DegenerateCenters { denominator: d });
    }

    let a1 = -2.0 / d * (z3 * (x4 - x5) + z4 * (x5 - x3) + z5 * (x3 - x4));
    let b1 = 1.0 / d * (x3 * (w5 - w4) + x4 * (w3 - w5) + x5 * (w4 - w3));
    let a2 = 2.0 / d * (z3 * (y4 - y5) + z4 * (y5 - y3) + z5 * (y3 - y4));
    let b2 = -1.0 / d * (y3 * (w5 - w4) + y4 * (w3 - w5) + y5 * (w4 - w3));

    let qa = a1 * a1 + a2 * a2 + 1.0;
    let qb = 2.0 * a1 * (b1 - y3) - 2.0 * z3 + 2.0 * a2 * (b2 - x3);
    let qc = z3 * z3 + (b1 - y3).powi(2) + (b2 - x3).powi(2) - r3 * r3;
    let disc = qb * qb - 4.0 * qa * qc;
    let disc = clamp_discriminant(disc, qb, 4.0 * qa * qc)
        .ok_or(Error::NoIntersection { discriminant: disc })?;
    let sq = disc.sqrt();
    let za = (-qb - sq) / (2.0 * qa);
    let zb = (-qb + sq) / (2.0 * qa);
    let point = |z: f64| Vec3::new(a2 * z + b2, a1 * z + b1, z);
    Ok((point(za), point(zb)))
}

/// Both intersections of a circle with a plane, ascending by the parameter
/// `t` of the line `p₀ + t·d`, `d = n_circle × n_plane`. A tangent circle yields
/// the same point twice.
pub fn circle_plane_intersection(
    circle_center: &Vec3,
    circle_radius: f64,
    circle_normal: &Vec3,
    plane_normal: &Vec3,
    plane_point: &Vec3,
) -> Result<(Vec3, Vec3)> {
    let nb_len = circle_normal.norm();
    let ng_len = plane_normal.norm();
    if nb_len == 0.0 || ng_len == 0.0 {
        return Err(Error::ZeroNormal);
    }
    let nb = circle_normal / nb_len;
    let ng = plane_normal / ng_len;
    let dir = nb.cross(&ng);
    let dir_sq = dir.norm_squared();
    if dir_sq.sqrt() <= DEGENERATE_REL {
        return Err(Error::ParallelPlanes);
    }
    let db = nb.dot(circle_center);
    let dg = ng.dot(plane_point);
    let p0 = (db * ng.cross(&dir) + dg * dir.cross(&nb)) / dir_sq;
    let p0_rel = p0 - circle_center;

    let a = dir_sq;
    let b = 2.0 * p0_rel.dot(&dir);
    let c = p0_rel.norm_squared() - circle_radius * circle_radius;
    let disc = b * b - 4.0 * a * c;
    let disc = clamp_discriminant(disc, b, 4.0 * a * c)
        .ok_or(Error::NoIntersection { discriminant: disc })?;
    let sq = disc.sqrt();
    let t1 = (-b - sq) / (2.0 * a);
    let t2 = (-b + sq) / (2.0 * a);
    Ok((p0 + t1 * dir, p0 + t2 * dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rotation_identity_and_quarter_turn() {
        assert_eq!(rotation(Axis::Z, 0.0), Mat3::identity());
        let v = rotation(Axis::X, FRAC_PI_2) * Vec3::new(0.0, 1.0, 0.0);
        assert_relative_eq!(v, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn rotation_xyz_matches_expanded_product() {
        // Closed-form expansion of Rx(φ)Ry(θ)Rz(ψ).
        let (phi, theta, psi) = (0.1_f64, 0.2_f64, 0.3_f64);
        let (sf, cf) = phi.sin_cos();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = psi.sin_cos();
        let expected = Mat3::new(
            ct * cp,
            -ct * sp,
            st,
            sf * st * cp + cf * sp,
            -sf * st * sp + cf * cp,
            -sf * ct,
            -cf * st * cp + sf * sp,
            cf * st * sp + sf * cp,
            cf * ct,
        );
        assert_relative_eq!(rotation_xyz(phi, theta, psi), expected, epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_cases() {
        let h = homogeneous(0.0, 0.0, 0.0, 2.5);
        assert_eq!(h.rotation, Mat3::identity());
        assert_eq!(h.translation, Vec3::new(0.0, 0.0, 2.5));
        assert_eq!(homogeneous(0.0, 0.0, 0.0, 0.0), FrameTransform::identity());
        let chain = homogeneous(0.0, 0.0, 0.0, 1.0) * homogeneous(0.0, FRAC_PI_2, 0.0, 1.0);
        assert_relative_eq!(chain.apply(&Vec3::zeros()).norm(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let t = homogeneous(0.3, -1.1, 2.0, 4.0) * homogeneous(-0.7, 0.2, 0.9, 1.5);
        let id = t.inverse() * t;
        assert_relative_eq!(id.rotation, Mat3::identity(), epsilon = 1e-12);
        assert_relative_eq!(id.translation, Vec3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn functional_plane_exact() {
        let pts: Vec<Vec3> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 3.0)]
            .iter()
            .map(|&(x, y)| Vec3::new(x, y, 2.0 * x + 3.0 * y + 1.0))
            .collect();
        match fit_plane(&pts, PlaneMode::Functional).unwrap() {
            PlaneFit::Functional { a, b, c, rmse } => {
                assert_relative_eq!(a, 2.0, epsilon = 1e-12);
                assert_relative_eq!(b, 3.0, epsilon = 1e-12);
                assert_relative_eq!(c, 1.0, epsilon = 1e-12);
                assert!(rmse < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orthogonal_plane_alternating_square() {
        let pts = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
        ];
        let fit = fit_plane(&pts, PlaneMode::Orthogonal).unwrap();
        assert_relative_eq!(fit.rmse(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.normal(), Vec3::z(), epsilon = 1e-12);
    }

    #[test]
    fn plane_degenerate_inputs() {
        let two = [Vec3::zeros(), Vec3::x()];
        assert!(matches!(fit_plane(&two, PlaneMode::Orthogonal), Err(Error::DegenerateInput(_))));
        let line: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.5)).collect();
        assert!(matches!(fit_plane(&line, PlaneMode::Functional), Err(Error::DegenerateInput(_))));
        let vertical: Vec<Vec3> =
            (0..6).map(|i| Vec3::new(i as f64, 0.0, (i * i) as f64 * 0.1)).collect();
        assert!(matches!(fit_plane(&vertical, PlaneMode::Functional), Err(Error::IllConditioned(_))));
        assert!(fit_plane(&vertical, PlaneMode::Orthogonal).is_ok());
    }

    #[test]
    fn sphere_exact_points() {
        let c = Vec3::new(1.0, 2.0, 3.0);
        let pts: Vec<Vec3> = [Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()]
            .iter()
            .map(|d| c + d)
            .collect();
        let fit = fit_sphere(&pts).unwrap();
        assert_relative_eq!(fit.center, c, epsilon = 1e-12);
        assert_relative_eq!(fit.radius, 1.0, epsilon = 1e-12);
        assert!(fit.rmse < 1e-12);

        let scaled: Vec<Vec3> = pts.iter().map(|p| (p - c) * 7.5).collect();
        let fit = fit_sphere(&scaled).unwrap();
        assert_relative_eq!(fit.center, Vec3::zeros(), epsilon = 1e-12);
        assert_relative_eq!(fit.radius, 7.5, epsilon = 1e-12);
    }

    #[test]
    fn sphere_degenerate() {
        let flat: Vec<Vec3> =
            (0..8).map(|i| Vec3::new((i as f64).cos(), (i as f64).sin(), 0.0)).collect();
        assert!(matches!(fit_sphere(&flat), Err(Error::DegenerateInput(_))));
        assert!(matches!(fit_sphere(&flat[..3]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn three_spheres_symmetric() {
        let (lo, hi) = three_sphere_intersection(
            &Vec3::x(),
            1.0,
            &Vec3::y(),
            1.0,
            &Vec3::z(),
            1.0,
        )
        .unwrap();
        assert_relative_eq!(lo, Vec3::zeros(), epsilon = 1e-14);
        assert_relative_eq!(hi, Vec3::repeat(2.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn three_spheres_collinear_centers() {
        let r = three_sphere_intersection(
            &Vec3::zeros(),
            1.0,
            &Vec3::x(),
            1.0,
            &(2.0 * Vec3::x()),
            1.0,
        );
        assert!(matches!(r, Err(Error::DegenerateCenters { .. })));
    }

    #[test]
    fn three_spheres_too_far_apart() {
        let r = three_sphere_intersection(
            &Vec3::x(),
            0.1,
            &Vec3::y(),
            0.1,
            &Vec3::new(-1.0, -1.0, 0.0),
            0.1,
        );
        assert!(matches!(r, Err(Error::NoIntersection { .. })));
    }

    #[test]
    fn circle_plane_cases() {
        let (a, b) =
            circle_plane_intersection(&Vec3::zeros(), 1.0, &Vec3::z(), &Vec3::x(), &Vec3::zeros())
                .unwrap();
        let mut ys = [a.y, b.y];
        ys.sort_by(f64::total_cmp);
        assert_relative_eq!(ys[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(ys[1], 1.0, epsilon = 1e-15);
        assert!(a.x.abs() < 1e-15 && a.z.abs() < 1e-15);

        let (a, b) =
            circle_plane_intersection(&Vec3::zeros(), 1.0, &Vec3::z(), &Vec3::x(), &Vec3::x())
                .unwrap();
        assert_relative_eq!(a, Vec3::x(), epsilon = 1e-15);
        assert_eq!(a, b);

        let r = circle_plane_intersection(
            &Vec3::zeros(),
            1.0,
            &Vec3::z(),
            &Vec3::x(),
            &(2.0 * Vec3::x()),
        );
        assert!(matches!(r, Err(Error::NoIntersection { .. })));

        let r =
            circle_plane_intersection(&Vec3::zeros(), 1.0, &Vec3::z(), &Vec3::z(), &Vec3::zeros());
        assert_eq!(r, Err(Error::ParallelPlanes));
        let r = circle_plane_intersection(
            &Vec3::zeros(),
            1.0,
            &Vec3::zeros(),
            &Vec3::z(),
            &Vec3::zeros(),
        );
        assert_eq!(r, Err(Error::ZeroNormal));
    }

    #[test]
    fn quarter_turns_compose() {
        let r = rotation(Axis::Z, PI / 2.0) * rotation(Axis::Z, PI / 2.0);
        assert_relative_eq!(r, rotation(Axis::Z, PI), epsilon = 1e-15);
    }
}
