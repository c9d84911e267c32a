//! Design parameterization, link lengths, validity checks and fabrication noise.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of physical links in the mechanism.
pub const LINK_COUNT: usize = 13;

/// Physical link names in storage order.
pub const LINK_NAMES: [&str; LINK_COUNT] =
    ["A0", "A1", "B0", "B1", "B2", "B3", "B4", "B5", "C0", "C1", "C2", "D0", "D1"];

/// Indices into [`LinkSet::per_link`].
pub mod idx {
    /// Ground link O–F.
    pub const A0: usize = 0;
    /// Control link F–B.
    pub const A1: usize = 1;
    /// B–C.
    pub const B0: usize = 2;
    /// B–A.
    pub const B1: usize = 3;
    /// B–E.
    pub const B2: usize = 4;
    /// C–D.
    pub const B3: usize = 5;
    /// A–D.
    pub const B4: usize = 6;
    /// E–D.
    pub const B5: usize = 7;
    /// O–C.
    pub const C0: usize = 8;
    /// O–A.
    pub const C1: usize = 9;
    /// O–E.
    pub const C2: usize = 10;
    /// A–C.
    pub const D0: usize = 11;
    /// A–E.
    pub const D1: usize = 12;
}

/// Link type of each physical link, as an index into `[A, B, C, D]`.
pub const LINK_TYPE: [usize; LINK_COUNT] = [0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3, 3];

/// Bipyramid parameterization of a design at its neutral pose.
///
/// `l_c` is the base-to-tip distance, `r` the ring radius, `h` the offset of the
/// ring plane from the control node and `gamma` the angular spread of the ring
/// nodes as seen from the central node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    #[serde(rename = "L_c")]
    pub l_c: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub gamma: f64,
}

impl DesignParams {
    pub fn new(l_c: f64, r: f64, h: f64, gamma: f64) -> Self {
        Self { l_c, r, h, gamma }
    }

    /// The attenuation optimum `H = L_c/4`, `R = L_c/2`, `γ = π/2`.
    pub fn optimal(l_c: f64) -> Self {
        Self::new(l_c, 0.5 * l_c, 0.25 * l_c, PI / 2.0)
    }

    pub fn check(&self) -> Result<()> {
        let Self { l_c, r, h, gamma } = *self;
        if ![l_c, r, h, gamma].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite parameter".into()));
        }
        if l_c <= 0.0 {
            return Err(Error::InvalidDesign(format!("L_c = {l_c} must be positive")));
        }
        if !(h > 0.0 && h < 0.5 * l_c) {
            return Err(Error::InvalidDesign(format!("H = {h} must lie in (0, L_c/2)")));
        }
        if r <= 0.0 {
            return Err(Error::InvalidDesign(format!("R = {r} must be positive")));
        }
        if !(gamma > 0.0 && gamma < TAU) {
            return Err(Error::InvalidDesign(format!("gamma = {gamma} must lie in (0, 2π)")));
        }
        Ok(())
    }

    /// Same design at a different size.
    pub fn scaled(&self, s: f64) -> Self {
        Self { l_c: self.l_c * s, r: self.r * s, h: self.h * s, gamma: self.gamma }
    }
}

/// Link-type lengths together with the 13 physical lengths of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub per_link: [f64; LINK_COUNT],
}

impl LinkSet {
    /// Nominal set with every physical link at its type length.
    pub fn nominal(a: f64, b: f64, c: f64, d: f64) -> Self {
        let types = [a, b, c, d];
        Self { a, b, c, d, per_link: LINK_TYPE.map(|t| types[t]) }
    }

    pub fn types(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Base-to-tip distance `(C² − B²)/(2A)` implied by the type lengths.
    pub fn characteristic_length(&self) -> f64 {
        (self.c * self.c - self.b * self.b) / (2.0 * self.a)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
            per_link: self.per_link.map(|l| l * s),
        }
    }

    /// Copy with one physical link replaced.
    pub fn with_link(mut self, index: usize, length: f64) -> Self {
        self.per_link[index] = length;
        self
    }
}

/// Outcome of the design-space boundary checks.
///
/// `margins` are signed slacks, positive inside the valid region:
/// `[C² − 4A² − B², 2A + B − C, 2R − D, D]`. The last two bound the apex
/// angle implied by `D = 2R·cos(γ/4)` away from `γ = 0` and `γ = 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub obtuse_check: bool,
    pub triangle_check: bool,
    pub apex_check: bool,
    pub margins: [f64; 4],
}

pub fn links_from_design(p: &DesignParams) -> Result<LinkSet> {
    p.check()?;
    let DesignParams { l_c, r, h, gamma } = *p;
    let a = (l_c - 2.0 * h) / 2.0;
    let b = h.hypot(r);
    let c = (l_c - h).hypot(r);
    let d = (r + r * (gamma / 2.0).cos()).hypot(r * (gamma / 2.0).sin());
    Ok(LinkSet::nominal(a, b, c, d))
}

pub fn validate_links(links: &LinkSet) -> ValidityReport {
    let [a, b, c, d] = links.types();
    let obtuse = c * c - 4.0 * a * a - b * b;
    let triangle = 2.0 * a + b - c;
    // Ring radius implied by the first two checks; imaginary outside them.
    let l_c = links.characteristic_length();
    let h = (l_c - 2.0 * a) / 2.0;
    let r2 = b * b - h * h;
    let r = if r2 > 0.0 { r2.sqrt() } else { 0.0 };
    let upper = 2.0 * r - d;
    // Values within rounding of a boundary count as singular.
    let tol = 1e-12;
    let obtuse_check = obtuse > tol * c * c;
    let triangle_check = triangle > tol * c;
    let apex_check = r2 > tol * b * b && upper > tol * d && d > 0.0;
    ValidityReport {
        valid: obtuse_check && triangle_check && apex_check,
        obtuse_check,
        triangle_check,
        apex_check,
        margins: [obtuse, triangle, upper, d],
    }
}

pub fn design_from_links(links: &LinkSet) -> Result<DesignParams> {
    let [a, b, _, d] = links.types();
    if !links.types().iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::InvalidLinks("type lengths must be positive and finite".into()));
    }
    let report = validate_links(links);
    if !report.valid {
        return Err(Error::InvalidLinks(format!("outside the design space: {report:?}")));
    }
    let l_c = links.characteristic_length();
    let h = (l_c - 2.0 * a) / 2.0;
    let r = (b * b - h * h).sqrt();
    let gamma = 4.0 * (d / (2.0 * r)).acos();
    Ok(DesignParams { l_c, r, h, gamma })
}

/// Draw a fabricated instance: independent Gaussian noise of standard
/// deviation `sigma` on each physical link, truncated at ±6σ.
pub fn perturb_links<R: Rng + ?Sized>(links: &LinkSet, sigma: f64, rng: &mut R) -> Result<LinkSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("sigma = {sigma} must be non-negative")));
    }
    let mut out = *links;
    if sigma == 0.0 {
        return Ok(out);
    }
    for (index, len) in out.per_link.iter_mut().enumerate() {
        let z = loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= 6.0 {
                break z;
            }
        };
        *len += sigma * z;
        if *len <= 0.0 {
            return Err(Error::NonPositiveResult { index, length: *len });
        }
    }
    Ok(out)
}

/// Root-mean-square deviation over the 13 physical links.
pub fn link_rmse(nominal: &LinkSet, instance: &LinkSet) -> f64 {
    let ss: f64 = nominal
        .per_link
        .iter()
        .zip(&instance.per_link)
        .map(|(n, i)| (i - n).powi(2))
        .sum();
    (ss / LINK_COUNT as f64).sqrt()
}

/// On-disk design description: either bipyramid parameters or link lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    #[serde(default = "default_unit")]
    pub unit: String,
    #[serde(flatten)]
    pub spec: DesignSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesignSpec {
    Params {
        #[serde(rename = "L_c")]
        l_c: f64,
        #[serde(rename = "R")]
        r: f64,
        #[serde(rename = "H")]
        h: f64,
        gamma_deg: f64,
    },
    Links { links: TypeLengths },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TypeLengths {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
}

fn default_unit() -> String {
    "mm".to_string()
}

impl DesignFile {
    pub fn from_params(p: &DesignParams, unit: &str) -> Self {
        Self {
            unit: unit.to_string(),
            spec: DesignSpec::Params {
                l_c: p.l_c,
                r: p.r,
                h: p.h,
                gamma_deg: p.gamma.to_degrees(),
            },
        }
    }

    pub fn from_links(l: &LinkSet, unit: &str) -> Self {
        Self {
            unit: unit.to_string(),
            spec: DesignSpec::Links { links: TypeLengths { A: l.a, B: l.b, C: l.c, D: l.d } },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design file serializes")
    }

    /// Nominal link set described by the file.
    pub fn links(&self) -> Result<LinkSet> {
        match self.spec {
            DesignSpec::Params { l_c, r, h, gamma_deg } => {
                links_from_design(&DesignParams::new(l_c, r, h, gamma_deg.to_radians()))
            }
            DesignSpec::Links { links: TypeLengths { A, B, C, D } } => {
                let set = LinkSet::nominal(A, B, C, D);
                design_from_links(&set)?;
                Ok(set)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn micro_row() -> DesignParams {
        DesignParams::new(100.0, 42.18, 18.29, 120.71_f64.to_radians())
    }

    #[test]
    fn micro_row_links() {
        let l = links_from_design(&micro_row()).unwrap();
        // Reference lengths are given to four significant figures.
        assert_relative_eq!(l.a, 31.71, max_relative = 2e-4);
        assert_relative_eq!(l.b, 45.98, max_relative = 2e-4);
        assert_relative_eq!(l.c, 91.95, max_relative = 2e-4);
        assert_relative_eq!(l.d, 72.93, max_relative = 2e-4);
    }

    #[test]
    fn normalized_targets() {
        let l = links_from_design(&DesignParams::new(4.0, 2.0, 1.0, PI / 2.0)).unwrap();
        assert_relative_eq!(l.a, 1.0, max_relative = 1e-15);
        assert_relative_eq!(l.b, 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(l.c, 13f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(l.d, 2.0 * (2.0 + 2f64.sqrt()).sqrt(), max_relative = 1e-15);
        assert_eq!(l.per_link[idx::D1], l.d);
        assert_eq!(l.per_link[idx::B5], l.b);
    }

    #[test]
    fn mapping_is_homogeneous() {
        let p = micro_row();
        let l1 = links_from_design(&p).unwrap();
        let l2 = links_from_design(&p.scaled(2.0)).unwrap();
        for (x, y) in l1.types().iter().zip(l2.types()) {
            assert_relative_eq!(2.0 * x, y, max_relative = 1e-15);
        }
    }

    #[test]
    fn invalid_designs_rejected() {
        for p in [
            DesignParams::new(0.0, 1.0, 0.1, 1.0),
            DesignParams::new(1.0, 1.0, 0.5, 1.0),
            DesignParams::new(1.0, 1.0, 0.0, 1.0),
            DesignParams::new(1.0, -1.0, 0.2, 1.0),
            DesignParams::new(1.0, 1.0, 0.2, TAU),
        ] {
            assert!(matches!(links_from_design(&p), Err(Error::InvalidDesign(_))), "{p:?}");
        }
    }

    #[test]
    fn inverse_mapping() {
        let l = LinkSet::nominal(1.0, 5f64.sqrt(), 13f64.sqrt(), 2.0 * (2.0 + 2f64.sqrt()).sqrt());
        let p = design_from_links(&l).unwrap();
        assert_relative_eq!(p.l_c, 4.0, max_relative = 1e-14);
        assert_relative_eq!(p.h, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.r, 2.0, max_relative = 1e-14);
        assert_relative_eq!(p.gamma, PI / 2.0, max_relative = 1e-14);

        let back = design_from_links(&links_from_design(&micro_row()).unwrap()).unwrap();
        assert_relative_eq!(back.l_c, 100.0, max_relative = 1e-12);
        assert_relative_eq!(back.r, 42.18, max_relative = 1e-12);
        assert_relative_eq!(back.h, 18.29, max_relative = 1e-12);
        assert_relative_eq!(back.gamma.to_degrees(), 120.71, max_relative = 1e-12);
    }

    #[test]
    fn validity_cases() {
        let ok = validate_links(&LinkSet::nominal(1.0, 2.0, 3.0, 3.0));
        assert!(ok.valid, "{ok:?}");
        let right = validate_links(&LinkSet::nominal(1.0, 2.0, 8f64.sqrt(), 1.0));
        assert!(!right.valid && !right.obtuse_check);
        assert!(right.margins[0].abs() < 1e-12);
        let line = validate_links(&LinkSet::nominal(1.0, 2.0, 4.0, 1.0));
        assert!(!line.valid && !line.triangle_check);
        assert_eq!(line.margins[1], 0.0);
        let wide = validate_links(&LinkSet::nominal(1.0, 2.0, 3.0, 10.0));
        assert!(!wide.apex_check && wide.margins[2] < 0.0);
    }

    #[test]
    fn gamma_pi_is_interior() {
        let l = links_from_design(&DesignParams::new(1.0, 0.5, 0.25, PI)).unwrap();
        assert!(validate_links(&l).valid);
    }

    #[test]
    fn perturbation_contract() {
        let l = LinkSet::nominal(1.0, 2.0, 3.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(perturb_links(&l, 0.0, &mut rng).unwrap(), l);
        let a = perturb_links(&l, 0.01, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = perturb_links(&l, 0.01, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.types(), l.types());
        assert_ne!(a.per_link, l.per_link);
        let err = perturb_links(&LinkSet::nominal(1e-6, 2.0, 3.0, 3.0), 1.0, &mut rng);
        assert!(matches!(err, Err(Error::NonPositiveResult { .. })));
    }

    #[test]
    fn rmse_closed_forms() {
        let l = LinkSet::nominal(1.0, 2.0, 3.0, 3.0);
        assert_eq!(link_rmse(&l, &l), 0.0);
        let eps = 1e-3;
        let one = l.with_link(idx::C1, l.c + 13.0 * eps);
        assert_relative_eq!(link_rmse(&l, &one), eps * 13f64.sqrt(), max_relative = 1e-9);
        let mut all = l;
        all.per_link.iter_mut().for_each(|v| *v += eps);
        assert_relative_eq!(link_rmse(&l, &all), eps, max_relative = 1e-9);
    }

    #[test]
    fn design_file_round_trip() {
        let f = DesignFile::from_json(r#"{"L_c": 1, "R": 0.5, "H": 0.25, "gamma_deg": 90}"#).unwrap();
        assert_eq!(f.unit, "mm");
        let l = f.links().unwrap();
        assert_relative_eq!(l.a, 0.25);
        let g = DesignFile::from_json(r#"{"unit":"um","links":{"A":1,"B":2,"C":3,"D":3}}"#).unwrap();
        assert_eq!(g.unit, "um");
        assert_eq!(g.links().unwrap(), LinkSet::nominal(1.0, 2.0, 3.0, 3.0));
        let again = DesignFile::from_json(&g.to_json()).unwrap();
        assert_eq!(again, g);
        assert!(DesignFile::from_json(r#"{"links":{"A":1,"B":2,"C":4,"D":1}}"#)
            .unwrap()
            .links()
            .is_err());
    }
}
