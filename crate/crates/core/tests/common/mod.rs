#![allow(dead_code)]

use fpm::design::{idx, links_from_design, DesignParams, LinkSet};
use fpm::kinematics::{forward, ControlInput};
use nalgebra::{SMatrix, SVector, Vector3};

pub fn optimal() -> LinkSet {
    links_from_design(&DesignParams::optimal(1.0)).unwrap()
}

/// A = 125, B = 224.06, C = 414.82, D = 329.1, L_c = 487.5 mm.
pub fn robotic() -> LinkSet {
    links_from_design(&DesignParams::new(487.5, 190.0, 118.75, 120f64.to_radians())).unwrap()
}

/// Endpoint of the mechanism found by solving all ring distance constraints
/// at once with Newton's method, independent of the triangle decomposition.
///
/// Unknowns are the positions of C, A, E and D. O and B come from the input
/// chain. The eleven ring lengths leave one rotation of the ring about O–B
/// free; it is pinned by keeping A in the xz-plane of the frame at B.
pub fn constraint_endpoint(links: &LinkSet, input: ControlInput) -> Vector3<f64> {
    let (_, tr) = forward(links, input).unwrap();
    let p = &links.per_link;
    let b = tr.b_point;
    let gauge = tr.frames[2].rotation * Vector3::y();
    let mut x = SVector::<f64, 12>::zeros();
    for (k, v) in [tr.node_c(), tr.node_a(), tr.node_e(), tr.endpoint].iter().enumerate() {
        x.fixed_rows_mut::<3>(3 * k).copy_from(v);
    }
    let o = Vector3::zeros();
    // (node slot or fixed point, node slot, length)
    enum End {
        Fixed(Vector3<f64>),
        Node(usize),
    }
    let cons = [
        (End::Fixed(o), 0, p[idx::C0]),
        (End::Fixed(o), 1, p[idx::C1]),
        (End::Fixed(o), 2, p[idx::C2]),
        (End::Fixed(b), 0, p[idx::B0]),
        (End::Fixed(b), 1, p[idx::B1]),
        (End::Fixed(b), 2, p[idx::B2]),
        (End::Node(0), 3, p[idx::B3]),
        (End::Node(1), 3, p[idx::B4]),
        (End::Node(2), 3, p[idx::B5]),
        (End::Node(1), 0, p[idx::D0]),
        (End::Node(1), 2, p[idx::D1]),
    ];
    for _ in 0..50 {
        let node = |x: &SVector<f64, 12>, k: usize| Vector3::from(x.fixed_rows::<3>(3 * k).into_owned());
        let mut f = SVector::<f64, 12>::zeros();
        let mut j = SMatrix::<f64, 12, 12>::zeros();
        for (r, (end, k, len)) in cons.iter().enumerate() {
            let q = node(&x, *k);
            let other = match end {
                End::Fixed(v) => *v,
                End::Node(m) => node(&x, *m),
            };
            let d = q - other;
            f[r] = d.norm_squared() - len * len;
            for c in 0..3 {
                j[(r, 3 * k + c)] += 2.0 * d[c];
                if let End::Node(m) = end {
                    j[(r, 3 * m + c)] -= 2.0 * d[c];
                }
            }
        }
        f[11] = (node(&x, 1) - b).dot(&gauge);
        for c in 0..3 {
            j[(11, 3 + c)] = gauge[c];
        }
        let step = j.lu().solve(&(-f)).expect("singular constraint Jacobian");
        x += step;
        if step.norm() < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    Vector3::from(x.fixed_rows::<3>(9).into_owned())
}
