//! Flatness, scan calibration and related measurement statistics.
//!
//! Calibration removes a best-fit plane `z ≈ a·x + b·y + c` from a reference
//! scan and keeps the residuals `eᵢ = zᵢ − (a·xᵢ + b·yᵢ + c)` on a grid. Later
//! scans are compensated pointwise, `z_corr = z − ê(x, y)`, with `ê` the
//! bilinear interpolant of the residual grid.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, FloatTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geom::{fit_plane, PlaneFit, PlaneMode, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceScan {
    pub points: Vec<Vec3>,
    pub frame: String,
}

impl SurfaceScan {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points, frame: "fpm".to_string() }
    }

    /// Read `x,y,z` CSV. A leading `# unit=…` comment is returned as the unit.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<(Self, String)> {
        let mut unit = "mm".to_string();
        let mut body = String::new();
        for line in reader.lines() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if let Some(comment) = line.trim_start().strip_prefix('#') {
                if let Some(u) = comment.trim().strip_prefix("unit=") {
                    unit = u.trim().to_string();
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "z"] {
            return Err(Error::Format(format!("expected header x,y,z, got {headers:?}")));
        }
        let mut points = Vec::new();
        for rec in rdr.deserialize::<(f64, f64, f64)>() {
            let (x, y, z) = rec.map_err(|e| Error::Format(e.to_string()))?;
            points.push(Vec3::new(x, y, z));
        }
        Ok((Self::new(points), unit))
    }

    pub fn write_csv<W: Write>(&self, unit: &str, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        writeln!(out, "# unit={unit}").map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "z"]).map_err(|e| Error::Format(e.to_string()))?;
        for p in &self.points {
            w.serialize((p.x, p.y, p.z)).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(io)
    }
}

/// RMS perpendicular distance from the least-squares plane.
pub fn flatness_rmse(scan: &SurfaceScan) -> Result<f64> {
    if scan.points.len() < 4 {
        return Err(Error::DegenerateInput("flatness needs at least 4 points"));
    }
    Ok(fit_plane(&scan.points, PlaneMode::Orthogonal)?.rmse())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PlaneCoeffs {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

/// Residual grid; `e[j][i]` belongs to node `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub e: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorField {
    pub plane: PlaneCoeffs,
    pub grid: ResidualGrid,
}

/// What to do with queries outside the field's grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Clamp the query onto the grid rectangle.
    #[default]
    Clip,
    /// Reject the query with [`Error::OutOfDomain`].
    Omit,
}

impl ErrorField {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let g = &f.grid;
        let sorted = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&g.xs) || !sorted(&g.ys) || g.e.len() != g.ys.len() || g.e.iter().any(|r| r.len() != g.xs.len()) {
            return Err(Error::Format("error field grid is malformed".into()));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error field serializes")
    }

    /// Field with the same grid and all residuals zero.
    pub fn zeroed(&self) -> Self {
        let mut f = self.clone();
        f.grid.e.iter_mut().flatten().for_each(|v| *v = 0.0);
        f
    }

    /// Grid nodes with their residuals as points.
    pub fn node_points(&self) -> Vec<Vec3> {
        let g = &self.grid;
        g.ys.iter()
            .zip(&g.e)
            .flat_map(|(&y, row)| g.xs.iter().zip(row).map(move |(&x, &e)| Vec3::new(x, y, e)))
            .collect()
    }
}

/// Sorted distinct values, merging those closer than `tol`.
fn distinct(values: impl Iterator<Item = f64>, tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

fn locate(axis: &[f64], v: f64, tol: f64) -> Option<usize> {
    let i = axis.partition_point(|&a| a < v - tol);
    (i < axis.len() && (axis[i] - v).abs() <= tol).then_some(i)
}

/// Residuals on the scan's own grid, or `None` when the scan is not a full grid.
fn as_grid(points: &[Vec3], residual: &[f64]) -> Option<ResidualGrid> {
    let (lo, hi) = points.iter().fold((Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    });
    let tol = 1e-9 * (hi.x - lo.x).max(hi.y - lo.y);
    let xs = distinct(points.iter().map(|p| p.x), tol);
    let ys = distinct(points.iter().map(|p| p.y), tol);
    if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != points.len() {
        return None;
    }
    let mut e = vec![vec![f64::NAN; xs.len()]; ys.len()];
    for (p, &r) in points.iter().zip(residual) {
        let (i, j) = (locate(&xs, p.x, tol)?, locate(&ys, p.y, tol)?);
        if !e[j][i].is_nan() {
            return None;
        }
        e[j][i] = r;
    }
    Some(ResidualGrid { xs, ys, e })
}

struct Sample {
    pos: Point2<f64>,
    value: f64,
}

impl HasPosition for Sample {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Resample scattered residuals onto a regular grid by linear interpolation
/// over a Delaunay triangulation. Nodes outside the convex hull take the
/// value of the nearest sample.
fn resample(points: &[Vec3], residual: &[f64]) -> Result<ResidualGrid> {
    let mut tri: DelaunayTriangulation<Sample> = DelaunayTriangulation::new();
    for (p, &r) in points.iter().zip(residual) {
        tri.insert(Sample { pos: Point2::new(p.x, p.y), value: r })
            .map_err(|_| Error::DegenerateInput("scan contains non-finite coordinates"))?;
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::DegenerateInput("scan xy positions are collinear"));
    }
    let n = ((points.len() as f64).sqrt().round() as usize).max(2);
    let (xmin, xmax) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (ymin, ymax) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let axis = |lo: f64, hi: f64| (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect::<Vec<_>>();
    let (xs, ys) = (axis(xmin, xmax), axis(ymin, ymax));
    let bary = tri.barycentric();
    let e = ys
        .iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    let q = Point2::new(x, y);
                    bary.interpolate(|v| v.data().value, q).unwrap_or_else(|| {
                        tri.nearest_neighbor(q).map(|v| v.data().value).unwrap_or(0.0)
                    })
                })
                .collect()
        })
        .collect();
    Ok(ResidualGrid { xs, ys, e })
}

/// Fit the reference plane and keep the residual field.
///
/// A scan that forms a full rectangular grid is used as is; any other layout
/// is resampled onto a `√N × √N` grid first. The grid residuals are then
/// re-fitted and any leftover tilt folded into the plane, so the stored
/// residuals have a zero best-fit plane.
pub fn build_error_field(scan: &SurfaceScan) -> Result<ErrorField> {
    if scan.points.len() < 4 {
        return Err(Error::DegenerateInput("calibration needs at least 4 points"));
    }
    let PlaneFit::Functional { a, b, c, .. } = fit_plane(&scan.points, PlaneMode::Functional)? else {
        unreachable!("functional mode returns functional fit")
    };
    let mut plane = PlaneCoeffs { a, b, c };
    let residual: Vec<f64> = scan.points.iter().map(|p| p.z - plane.eval(p.x, p.y)).collect();
    let mut grid = match as_grid(&scan.points, &residual) {
        Some(g) => g,
        None => resample(&scan.points, &residual)?,
    };

    let field = ErrorField { plane, grid: grid.clone() };
    if let PlaneFit::Functional { a, b, c, .. } = fit_plane(&field.node_points(), PlaneMode::Functional)? {
        for (row, &y) in grid.e.iter_mut().zip(&grid.ys) {
            for (v, &x) in row.iter_mut().zip(&grid.xs) {
                *v -= a * x + b * y + c;
            }
        }
        plane = PlaneCoeffs { a: plane.a + a, b: plane.b + b, c: plane.c + c };
    }
    Ok(ErrorField { plane, grid })
}

/// Bilinear interpolation of the residual grid at `(x, y)`.
pub fn interpolate_error(field: &ErrorField, x: f64, y: f64, boundary: Boundary) -> Result<f64> {
    let g = &field.grid;
    let (x0, x1) = (g.xs[0], *g.xs.last().unwrap());
    let (y0, y1) = (g.ys[0], *g.ys.last().unwrap());
    let inside = (x0..=x1).contains(&x) && (y0..=y1).contains(&y);
    if !inside && boundary == Boundary::Omit {
        return Err(Error::OutOfDomain { x, y });
    }
    let (x, y) = (x.clamp(x0, x1), y.clamp(y0, y1));
    let cell = |axis: &[f64], v: f64| axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
    let (i, j) = (cell(&g.xs, x), cell(&g.ys, y));
    let tx = (x - g.xs[i]) / (g.xs[i + 1] - g.xs[i]);
    let ty = (y - g.ys[j]) / (g.ys[j + 1] - g.ys[j]);
    let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else if t == 1.0 { b } else { a + (b - a) * t };
    let bottom = lerp(g.e[j][i], g.e[j][i + 1], tx);
    let top = lerp(g.e[j + 1][i], g.e[j + 1][i + 1], tx);
    Ok(lerp(bottom, top, ty))
}

/// Subtract the interpolated residual from every point; xy is unchanged.
pub fn compensate(scan: &SurfaceScan, field: &ErrorField, boundary: Boundary) -> Result<SurfaceScan> {
    let points = scan
        .points
        .iter()
        .map(|p| Ok(Vec3::new(p.x, p.y, p.z - interpolate_error(field, p.x, p.y, boundary)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceScan { points, frame: scan.frame.clone() })
}

/// Angle between two plane normals, in degrees.
pub fn tilt_between_planes(n_i: &Vec3, n_g: &Vec3) -> Result<f64> {
    if n_i.norm() == 0.0 || n_g.norm() == 0.0 {
        return Err(Error::ZeroNormal);
    }
    // atan2 keeps full precision for the sub-millidegree tilts of interest.
    Ok(n_i.cross(n_g).norm().atan2(n_i.dot(n_g)).to_degrees())
}

/// Lateral offset accumulated over `travel` along an axis tilted by `tilt_deg`.
pub fn lateral_runout(tilt_deg: f64, travel: f64) -> f64 {
    travel * tilt_deg.to_radians().tan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatabilityStats {
    pub mean: [f64; 3],
    /// Sample standard deviation (denominator `n − 1`).
    pub std: [f64; 3],
    pub count: usize,
}

pub fn repeatability_stats(samples: &[Vec3]) -> Result<RepeatabilityStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let var = samples.iter().fold(Vec3::zeros(), |a, p| a + (p - mean).component_mul(&(p - mean))) / (n - 1.0);
    Ok(RepeatabilityStats { mean: mean.into(), std: var.map(f64::sqrt).into(), count: samples.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_scan(n: usize, f: impl Fn(f64, f64) -> f64) -> SurfaceScan {
        let mut pts = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (10.0 * i as f64, 10.0 * j as f64);
                pts.push(Vec3::new(x, y, f(x, y)));
            }
        }
        SurfaceScan::new(pts)
    }

    #[test]
    fn flatness_cases() {
        let flat = grid_scan(3, |x, y| 0.1 * x - 0.3 * y + 2.0);
        assert!(flatness_rmse(&flat).unwrap() < 1e-12);
        let h = 0.7;
        let sq = SurfaceScan::new(vec![
            Vec3::new(1.0, 1.0, h),
            Vec3::new(-1.0, 1.0, -h),
            Vec3::new(-1.0, -1.0, h),
            Vec3::new(1.0, -1.0, -h),
        ]);
        assert_relative_eq!(flatness_rmse(&sq).unwrap(), h, epsilon = 1e-12);
        assert!(flatness_rmse(&SurfaceScan::new(sq.points[..3].to_vec())).is_err());
    }

    #[test]
    fn planar_scan_has_zero_field() {
        let f = build_error_field(&grid_scan(5, |x, y| 0.01 * x - 0.02 * y + 5.0)).unwrap();
        assert!(f.grid.e.iter().flatten().all(|v| v.abs() < 1e-12));
        assert_relative_eq!(f.plane.a, 0.01, epsilon = 1e-12);
        assert_relative_eq!(f.plane.b, -0.02, epsilon = 1e-12);
        assert_relative_eq!(f.plane.c, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn bump_matches_refit() {
        let mut scan = grid_scan(5, |x, y| 0.01 * x - 0.02 * y + 5.0);
        scan.points[7].z += 0.05;
        let f = build_error_field(&scan).unwrap();
        // Oracle: the refit plane, evaluated directly.
        let PlaneFit::Functional { a, b, c, .. } = fit_plane(&scan.points, PlaneMode::Functional).unwrap() else {
            panic!()
        };
        let p = scan.points[7];
        let expected = p.z - (a * p.x + b * p.y + c);
        assert_relative_eq!(f.grid.e[1][2], expected, epsilon = 1e-12);
        assert!(expected > 0.04 && expected < 0.05);
    }

    #[test]
    fn bilinear_cases() {
        let f = build_error_field(&grid_scan(3, |x, y| (x * 0.37).sin() + (y * 0.11).cos())).unwrap();
        let g = &f.grid;
        assert_eq!(interpolate_error(&f, 10.0, 20.0, Boundary::Omit).unwrap(), g.e[2][1]);
        let mid = interpolate_error(&f, 5.0, 5.0, Boundary::Omit).unwrap();
        assert_relative_eq!(mid, (g.e[0][0] + g.e[0][1] + g.e[1][0] + g.e[1][1]) / 4.0, epsilon = 1e-15);
        let edge = interpolate_error(&f, 2.5, 0.0, Boundary::Omit).unwrap();
        assert_relative_eq!(edge, 0.75 * g.e[0][0] + 0.25 * g.e[0][1], epsilon = 1e-15);
        assert_eq!(interpolate_error(&f, -5.0, 0.0, Boundary::Clip).unwrap(), g.e[0][0]);
        assert_eq!(
            interpolate_error(&f, -5.0, 0.0, Boundary::Omit),
            Err(Error::OutOfDomain { x: -5.0, y: 0.0 })
        );
    }

    #[test]
    fn irregular_scan_is_resampled() {
        let pts: Vec<Vec3> = (0..40)
            .map(|k| {
                let (x, y) = ((k * 7 % 40) as f64, (k * 13 % 37) as f64);
                Vec3::new(x, y, 0.2 * x + 0.1 * y + 0.003 * x * y)
            })
            .collect();
        let f = build_error_field(&SurfaceScan::new(pts)).unwrap();
        assert_eq!(f.grid.xs.len(), 6);
        let refit = fit_plane(&f.node_points(), PlaneMode::Functional).unwrap();
        let PlaneFit::Functional { a, b, c, .. } = refit else { panic!() };
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12 && c.abs() < 1e-12);
    }

    #[test]
    fn tilt_and_runout() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(tilt_between_planes(&n, &n).unwrap(), 0.0);
        assert_relative_eq!(tilt_between_planes(&n, &Vec3::x()).unwrap(), 90.0, epsilon = 1e-12);
        assert_eq!(tilt_between_planes(&n, &Vec3::zeros()), Err(Error::ZeroNormal));
        assert_relative_eq!(lateral_runout(0.021, 50.0) * 1000.0, 18.326, epsilon = 1e-3);
    }

    #[test]
    fn repeatability_closed_forms() {
        let s = repeatability_stats(&[Vec3::new(1.0, 0.0, 2.0), Vec3::new(-1.0, 0.0, 2.0)]).unwrap();
        assert_relative_eq!(s.std[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(s.std[1], 0.0);
        assert_eq!(s.mean, [0.0, 0.0, 2.0]);
        assert!(matches!(repeatability_stats(&[Vec3::zeros()]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let scan = grid_scan(2, |x, y| x * 0.5 - y);
        let mut buf = Vec::new();
        scan.write_csv("um", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# unit=um\nx,y,z\n"));
        let (back, unit) = SurfaceScan::read_csv(text.as_bytes()).unwrap();
        assert_eq!(unit, "um");
        assert_eq!(back.points, scan.points);
        assert!(SurfaceScan::read_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn field_json_round_trip() {
        let f = build_error_field(&grid_scan(3, |x, y| (x * y).sqrt())).unwrap();
        let back = ErrorField::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert!(v["plane"]["a"].is_number() && v["grid"]["e"][0].is_array());
    }
}
