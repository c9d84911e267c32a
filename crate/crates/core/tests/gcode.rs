mod common;

use common::robotic;
use fpm::gcode::{parse_gcode, plan_trajectory, samples_csv, serialize_gcode, CommandKind, GCommand, PlanOptions};
use fpm::kinematics::{robot_forward, JointAngles};
use fpm::geom::Vec3;
use fpm::metrology::{build_error_field, ErrorField, SurfaceScan};
use proptest::prelude::*;

fn field() -> ErrorField {
    let mut pts = Vec::new();
    for j in 0..9 {
        for i in 0..9 {
            let (x, y) = (-100.0 + 25.0 * i as f64, -100.0 + 25.0 * j as f64);
            pts.push(Vec3::new(x, y, 0.002 * (x * 0.05).sin() * (y * 0.03).cos()));
        }
    }
    build_error_field(&SurfaceScan::new(pts)).unwrap()
}

#[test]
fn straight_move_stays_on_segment() {
    let links = robotic();
    let cmds = parse_gcode("G1 X0 Y0\nG1 X80 Y0").unwrap();
    let s = plan_trajectory(&cmds, &links, None, &PlanOptions::for_links(&links, 1.0)).unwrap();
    assert_eq!(s.len(), 81);
    for (k, j) in s[1..].iter().enumerate() {
        let p = robot_forward(&links, JointAngles { alpha: j.alpha, beta: j.beta }).unwrap();
        assert!((p.x - (k + 1) as f64).abs() <= 1e-9 * 487.5 && p.y.abs() <= 1e-9 * 487.5, "{k}: {p}");
    }
}

#[test]
fn halving_the_segment_keeps_every_sample() {
    let links = robotic();
    let cmds = parse_gcode("G0 X10 Y-5\nG1 X-30 Y42.5 Z2\nG91\nG1 X7.3 Y-3").unwrap();
    let coarse = plan_trajectory(&cmds, &links, None, &PlanOptions::for_links(&links, 3.0)).unwrap();
    let fine = plan_trajectory(&cmds, &links, None, &PlanOptions::for_links(&links, 1.5)).unwrap();
    for c in &coarse {
        assert!(fine.iter().any(|f| f.alpha == c.alpha && f.beta == c.beta && f.z == c.z), "{c:?}");
    }
}

#[test]
fn zero_field_changes_nothing() {
    let links = robotic();
    let cmds = parse_gcode("G1 X20 Y10 Z1\nG1 X-40 Y30").unwrap();
    let opts = PlanOptions::for_links(&links, 5.0);
    let plain = plan_trajectory(&cmds, &links, None, &opts).unwrap();
    let zero = plan_trajectory(&cmds, &links, Some(&field().zeroed()), &opts).unwrap();
    assert_eq!(plain, zero);
}

#[test]
fn compensation_adds_the_predicted_error() {
    let links = robotic();
    let f = field();
    let cmds = parse_gcode("G1 X50 Y-25 Z1").unwrap();
    let s = plan_trajectory(&cmds, &links, Some(&f), &PlanOptions::for_links(&links, 1000.0)).unwrap();
    let e = f.grid.e[3][6];
    assert!((s[0].z - (1.0 + e)).abs() < 1e-15);
}

#[test]
fn csv_header() {
    let links = robotic();
    let s = plan_trajectory(&parse_gcode("G1 X1").unwrap(), &links, None, &PlanOptions::for_links(&links, 1.0)).unwrap();
    assert!(samples_csv(&s).starts_with("index,alpha_rad,beta_rad,z_mm\n0,"));
}

fn command() -> impl Strategy<Value = GCommand> {
    let coord = proptest::option::of(-1e4..1e4f64);
    (0..5usize, coord.clone(), coord.clone(), coord, proptest::option::of(1.0..1e4f64)).prop_map(
        |(k, x, y, z, f)| {
            let kind = [CommandKind::RapidMove, CommandKind::LinearMove, CommandKind::Home, CommandKind::AbsoluteMode, CommandKind::RelativeMode][k];
            let mut c = GCommand { kind, x, y, z, f, line: 0 };
            match kind {
                CommandKind::AbsoluteMode | CommandKind::RelativeMode => (c.x, c.y, c.z, c.f) = (None, None, None, None),
                CommandKind::RapidMove | CommandKind::LinearMove if c.x.is_none() && c.y.is_none() && c.z.is_none() => {
                    c.x = Some(0.0)
                }
                _ => {}
            }
            c
        },
    )
}

proptest! {
    #[test]
    fn parse_serialize_fixed_point(cmds in proptest::collection::vec(command(), 0..20)) {
        let text = serialize_gcode(&cmds);
        let parsed = parse_gcode(&text).unwrap();
        let expected: Vec<GCommand> = cmds.iter().enumerate().map(|(i, c)| GCommand { line: i + 1, ..c.clone() }).collect();
        prop_assert_eq!(&parsed, &expected);
        prop_assert_eq!(serialize_gcode(&parsed), text);
    }
}
