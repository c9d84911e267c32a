//! Forward and inverse kinematics.
//!
//! # Frames
//!
//! The base frame sits at the base node `O` with `+z` pointing along the ground
//! link toward `F`, so `F = (0, 0, A₀)`. The control link `F–B` deflects by
//! `θ` from `+z` in the vertical half-plane at azimuth `φ`. The frame attached
//! to the control node `B` is reached through the virtual link `O–B` of length
//!
//! ```text
//! L₂ = √(A₀² + A₁² − 2·A₀·A₁·cos(π − θ))
//! ```
//!
//! with rotation `Rz(φ)·Ry(θ₂)·Rz(−φ)`. The trailing `Rz(−φ)` cancels the
//! azimuth so that the ring of nodes `A`, `C`, `E` does not spin with `φ`:
//!
//! ```text
//!        x (frame at B, looking down its z-axis)
//!        ^
//!        |
//!   A ---+---- y          A sits at azimuth π (the −x side),
//!       / \               C at π − ω_C and E at π + ω_E.
//!      C   E
//! ```
//!
//! On exact geometry the endpoint `D` is the inverse of `B` in the sphere of
//! radius `√(C² − B²)` about `O`, so it stays on the plane `z = L_c` and its
//! azimuth equals `φ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::design::{idx, LinkSet};
use crate::error::{Error, Result};
use crate::geom::{
    circle_plane_intersection, homogeneous, rotation, three_sphere_intersection, Axis,
    FrameTransform, Vec3,
};

/// Control-link deflection `theta` at `F` and azimuth `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub theta: f64,
    pub phi: f64,
}

impl ControlInput {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Input whose ideal endpoint lands at planar radius `r` and azimuth `phi`.
    pub fn for_radius(l_c: f64, r: f64, phi: f64) -> Self {
        Self { theta: 2.0 * (r / l_c).atan(), phi }
    }
}

/// Motor angles of the actuated mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAngles {
    pub alpha: f64,
    pub beta: f64,
}

/// Every intermediate quantity of one forward evaluation.
///
/// Node-indexed arrays are ordered `[C, A, E]`; the two projected diagonal
/// lengths are ordered `[AC, AE]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicTrace {
    pub l2: f64,
    pub theta2: f64,
    /// Cosine of the angle at `B` between `B→O` and `B→node`.
    pub kappa: [f64; 3],
    /// Polar angle of each `B–node` link measured from the `B` frame's `+z`.
    pub polar: [f64; 3],
    /// Lengths of the `B–node` links projected onto the `B` frame's xy-plane.
    pub b_proj: [f64; 3],
    pub d_proj: [f64; 2],
    /// Azimuthal offsets of `C` and `E` from `A`.
    pub omega: [f64; 2],
    /// Frames at `O`, `F`, `B`, `C`, `A`, `E`.
    pub frames: [FrameTransform; 6],
    pub b_point: Vec3,
    pub endpoint: Vec3,
    /// The discarded root of the three-sphere solve.
    pub lower_root: Vec3,
}

impl KinematicTrace {
    pub fn node_c(&self) -> Vec3 {
        self.frames[3].origin()
    }

    pub fn node_a(&self) -> Vec3 {
        self.frames[4].origin()
    }

    pub fn node_e(&self) -> Vec3 {
        self.frames[5].origin()
    }

    pub fn node_f(&self) -> Vec3 {
        self.frames[1].origin()
    }
}

/// Distance to the line through `O` and `B` plus the inversion product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub collinearity_residual: f64,
    pub k_squared: f64,
    pub k_squared_expected: f64,
}

fn checked_acos(v: f64, what: &str) -> Result<f64> {
    if (-1.0..=1.0).contains(&v) {
        Ok(v.acos())
    } else {
        Err(Error::OutOfWorkspace(format!("{what}: cosine {v} outside [-1, 1]")))
    }
}

fn map_solver(err: Error) -> Error {
    match err {
        Error::DegenerateCenters { denominator } => {
            Error::DegenerateFrame(format!("node projections are collinear (d = {denominator:e})"))
        }
        Error::NoIntersection { discriminant } => Error::OutOfWorkspace(format!(
            "endpoint spheres do not meet (discriminant {discriminant:e})"
        )),
        other => other,
    }
}

/// Endpoint and full trace for control input `input`.
///
/// Works on the 13 physical lengths in `links.per_link`, so it also models a
/// fabricated instance. Ring nodes are placed from the law-of-cosines
/// triangles about the virtual link; the in-plane spacing of `C` and `E`
/// relative to `A` uses the diagonal links projected by the height mismatch
/// `C₁·κ_A − C₀·κ_C` (resp. `C₂·κ_E`), which vanishes on exact geometry.
pub fn forward(links: &LinkSet, input: ControlInput) -> Result<(Vec3, KinematicTrace)> {
    let ControlInput { theta, phi } = input;
    if !(theta.is_finite() && phi.is_finite()) || !(0.0..PI).contains(&theta) {
        return Err(Error::OutOfWorkspace(format!("theta = {theta} outside [0, π)")));
    }
    let p = &links.per_link;
    let (a0, a1) = (p[idx::A0], p[idx::A1]);

    // Virtual link O–B.
    let l2 = (a0 * a0 + a1 * a1 - 2.0 * a0 * a1 * (PI - theta).cos()).sqrt();
    let s2 = a1 * (PI - theta).sin() / l2;
    if !(-1.0..=1.0).contains(&s2) {
        return Err(Error::OutOfWorkspace(format!("virtual link sine {s2} outside [-1, 1]")));
    }
    let theta2 = s2.asin();
    let untwist = |angle: f64| {
        rotation(Axis::Z, phi) * rotation(Axis::Y, angle) * rotation(Axis::Z, -phi)
    };
    let frame_f = FrameTransform::new(untwist(theta), Vec3::new(0.0, 0.0, a0));
    let rot_b = untwist(theta2);
    let frame_b = FrameTransform::new(rot_b, rot_b * Vec3::new(0.0, 0.0, l2));

    // Ring-node triangles O–B–node, ordered C, A, E.
    let spokes = [(p[idx::B0], p[idx::C0]), (p[idx::B1], p[idx::C1]), (p[idx::B2], p[idx::C2])];
    let mut kappa = [0.0; 3];
    let mut polar = [0.0; 3];
    let mut b_proj = [0.0; 3];
    for (i, &(b, c)) in spokes.iter().enumerate() {
        kappa[i] = (l2 * l2 + b * b - c * c) / (2.0 * l2 * b);
        polar[i] = PI - checked_acos(kappa[i], "ring triangle")?;
        b_proj[i] = b * polar[i].sin();
    }

    let [kc, ka, ke] = kappa;
    let (d0, d1) = (p[idx::D0], p[idx::D1]);
    let delta_ac = p[idx::C1] * ka - p[idx::C0] * kc;
    let delta_ae = p[idx::C1] * ka - p[idx::C2] * ke;
    let d_proj = [d0 * (delta_ac / d0).atan().cos(), d1 * (delta_ae / d1).atan().cos()];

    let [bc, ba, be] = b_proj;
    let omega_c = checked_acos(
        (bc * bc + ba * ba - d_proj[0] * d_proj[0]) / (2.0 * bc * ba),
        "ring spacing A–C",
    )?;
    let omega_e = checked_acos(
        (be * be + ba * ba - d_proj[1] * d_proj[1]) / (2.0 * be * ba),
        "ring spacing A–E",
    )?;

    let node = |azimuth: f64, pol: f64, len: f64| {
        frame_b * FrameTransform::from_rotation(rotation(Axis::Z, azimuth)) * homogeneous(0.0, pol, 0.0, len)
    };
    let frame_c = node(PI - omega_c, polar[0], spokes[0].0);
    let frame_a = node(PI, polar[1], spokes[1].0);
    let frame_e = node(PI + omega_e, polar[2], spokes[2].0);

    let (lower_root, endpoint) = three_sphere_intersection(
        &frame_c.origin(),
        p[idx::B3],
        &frame_a.origin(),
        p[idx::B4],
        &frame_e.origin(),
        p[idx::B5],
    )
    .map_err(map_solver)?;

    let trace = KinematicTrace {
        l2,
        theta2,
        kappa,
        polar,
        b_proj,
        d_proj,
        omega: [omega_c, omega_e],
        frames: [FrameTransform::identity(), frame_f, frame_b, frame_c, frame_a, frame_e],
        b_point: frame_b.origin(),
        endpoint,
        lower_root,
    };
    Ok((endpoint, trace))
}

/// Closed-form endpoint of the exact mechanism.
pub fn ideal_endpoint(l_c: f64, input: ControlInput) -> Vec3 {
    let r = l_c * (input.theta / 2.0).tan();
    Vec3::new(r * input.phi.cos(), r * input.phi.sin(), l_c)
}

pub fn inversion_invariants(links: &LinkSet, input: ControlInput) -> Result<InversionReport> {
    let (d, trace) = forward(links, input)?;
    let b = trace.b_point;
    let ob = b.norm();
    let collinearity_residual = if ob > 0.0 { b.cross(&d).norm() / ob } else { d.norm() };
    Ok(InversionReport {
        collinearity_residual,
        k_squared: ob * d.norm(),
        k_squared_expected: links.c * links.c - links.b * links.b,
    })
}

/// Raw second-motor angle before removing the home offset.
fn raw_joint_angles(links: &LinkSet, x: f64, y: f64) -> Result<JointAngles> {
    let l_c = links.characteristic_length();
    let target = Vec3::new(x, y, l_c);
    let od = target.norm();
    let theta = x.hypot(y).atan2(l_c);
    let ob = 2.0 * links.a * theta.cos();
    let b = target * (ob / od);
    let alpha = b.x.atan2(b.z - links.a);

    let n_b = rotation(Axis::Y, alpha) * Vec3::x();
    let n_g = target / od;
    let g = target * ((ob + od) / (2.0 * od));
    let (_, node_a) = circle_plane_intersection(&b, links.b, &n_b, &n_g, &g).map_err(|e| match e {
        Error::ParallelPlanes => {
            Error::DegenerateTarget(format!("({x}, {y}): motor plane parallel to bisector"))
        }
        Error::NoIntersection { .. } => {
            Error::OutOfWorkspace(format!("({x}, {y}): no ring node in the motor plane"))
        }
        other => other,
    })?;
    Ok(JointAngles { alpha, beta: node_a.y.atan2(node_a.z) })
}

/// Second-motor reading at the home pose; [`inverse`] reports `β` relative to it.
pub fn beta_home(links: &LinkSet) -> Result<f64> {
    raw_joint_angles(links, 0.0, 0.0).map(|j| j.beta)
}

/// Motor angles that place the endpoint at `(x, y)` on the output plane.
///
/// `α` turns the plane holding `F`, `B` and ring node `A` about the `y`-axis
/// through `F`; `β` tilts the plane holding `O`, `A` and the `x`-axis. Both are
/// zero at the home pose.
pub fn inverse(links: &LinkSet, x: f64, y: f64) -> Result<JointAngles> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::DegenerateTarget(format!("({x}, {y}) is not finite")));
    }
    let raw = raw_joint_angles(links, x, y)?;
    Ok(JointAngles { alpha: raw.alpha, beta: raw.beta - beta_home(links)? })
}

/// Endpoint reached by the actuated mechanism at `joints`: the forward map
/// paired with [`inverse`].
pub fn robot_forward(links: &LinkSet, joints: JointAngles) -> Result<Vec3> {
    let beta = joints.beta + beta_home(links)?;
    let f = Vec3::new(0.0, 0.0, links.a);
    let n_alpha = rotation(Axis::Y, joints.alpha) * Vec3::x();
    let n_beta = Vec3::new(0.0, -beta.cos(), beta.sin());
    let (p, q) =
        circle_plane_intersection(&Vec3::zeros(), links.c, &n_beta, &n_alpha, &f).map_err(map_solver)?;
    let node_a = if p.z >= q.z { p } else { q };

    // B is where the control link (about F) meets link B–A, inside the α plane.
    let span = node_a - f;
    let dist = span.norm();
    let u = span / dist;
    let along = (links.a * links.a - links.b * links.b + dist * dist) / (2.0 * dist);
    let h2 = links.a * links.a - along * along;
    if h2 < 0.0 {
        return Err(Error::OutOfWorkspace("control link cannot reach ring node".into()));
    }
    let w = n_alpha.cross(&u);
    let mid = f + along * u;
    let (b1, b2) = (mid + h2.sqrt() * w, mid - h2.sqrt() * w);
    let b = if b1.z >= b2.z { b1 } else { b2 };
    let k2 = links.c * links.c - links.b * links.b;
    Ok(b * (k2 / b.norm_squared()))
}
