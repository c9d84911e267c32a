//! Monte Carlo kinematic sensitivity.
//!
//! `S_k` is the ratio between the RMS flatness of the endpoint over a set of
//! workspace points and the RMS error of the 13 link lengths that produced it:
//!
//! ```text
//!        √(Σᵢ δ_plane,ᵢ² / n)
//! S_k = ──────────────────────
//!        √(Σⱼ δ_link,ⱼ² / 13)
//! ```
//!
//! Each instance draws independent link errors, evaluates the forward
//! kinematics at the same workspace points and fits an orthogonal plane.
//! Instance `k` always uses random stream `k` of the configured seed, so
//! results are bit-identical regardless of thread count.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{link_rmse, links_from_design, perturb_links, validate_links, DesignParams, LinkSet};
use crate::error::{Error, Result};
use crate::geom::{fit_plane, PlaneMode, Vec3};
use crate::kinematics::{forward, ControlInput};
use crate::rng::{child_seed, substream};

/// How per-instance results are reduced to a single `S_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    /// Mean over instances of `flatness / link_rmse`.
    #[default]
    MeanOfRatios,
    /// Mean flatness divided by mean link RMSE.
    RatioOfMeans,
}

/// Layout of the workspace points whose endpoints are fitted.
///
/// The default square of side `W_d` spans `W_d` in both X and Y. The disc is kept for comparison; it leaves out the
/// corners, where curvature of the error surface is largest, and reports
/// roughly 0.67× the square's `S_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplePattern {
    /// Additive-recurrence points filling the square of side `W_d`.
    #[default]
    Square,
    /// Golden-angle spiral filling the disc of diameter `W_d`.
    Sunflower,
}

impl SamplePattern {
    /// `n` planar sample positions for a workspace of extent `w`.
    pub fn points(self, n: usize, w: f64) -> Vec<(f64, f64)> {
        match self {
            SamplePattern::Sunflower => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..n)
                    .map(|i| {
                        let r = 0.5 * w * ((i as f64 + 0.5) / n as f64).sqrt();
                        let t = i as f64 * golden;
                        (r * t.cos(), r * t.sin())
                    })
                    .collect()
            }
            SamplePattern::Square => {
                // Two-dimensional recurrence based on the plastic number.
                let g = 1.324_717_957_244_746_f64;
                let (a1, a2) = (1.0 / g, 1.0 / (g * g));
                (0..n)
                    .map(|i| {
                        let u = (0.5 + a1 * i as f64).fract();
                        let v = (0.5 + a2 * i as f64).fract();
                        (w * (u - 0.5), w * (v - 0.5))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig {
    /// Link noise standard deviation as a fraction of `L_c`.
    pub sigma_rel: f64,
    pub n_points: usize,
    pub n_instances: usize,
    /// Workspace extent `W_d / L_c`.
    pub workspace_rel: f64,
    pub seed: u64,
    #[serde(default)]
    pub aggregate: Aggregate,
    #[serde(default)]
    pub pattern: SamplePattern,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            sigma_rel: 0.0005,
            n_points: 50,
            n_instances: 50,
            workspace_rel: 0.4,
            seed: 0,
            aggregate: Aggregate::default(),
            pattern: SamplePattern::default(),
        }
    }
}

impl SensitivityConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_points < 3 || self.n_instances < 2 {
            return Err(Error::Config("need at least 3 points and 2 instances".into()));
        }
        if !(self.workspace_rel > 0.0 && self.workspace_rel < 2.0) {
            return Err(Error::Config(format!("workspace_rel = {} outside (0, 2)", self.workspace_rel)));
        }
        if !(self.sigma_rel > 0.0 && self.sigma_rel.is_finite()) {
            return Err(Error::Config(format!("sigma_rel = {} must be positive", self.sigma_rel)));
        }
        Ok(())
    }

    /// Control inputs whose ideal endpoints form the sample pattern.
    pub fn control_inputs(&self, l_c: f64, workspace_rel: f64) -> Vec<ControlInput> {
        self.pattern
            .points(self.n_points, workspace_rel * l_c)
            .into_iter()
            .map(|(x, y)| ControlInput::for_radius(l_c, x.hypot(y), y.atan2(x)))
            .collect()
    }
}

/// Flatness and link error of one fabricated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSample {
    pub flatness: f64,
    pub link_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub s_k: f64,
    /// Half-width of the 95 % normal-approximation interval on `s_k`.
    pub ci95: f64,
    pub flatness_rmse_mean: f64,
    pub link_rmse_mean: f64,
    /// One entry per instance; `None` marks an instance that left the workspace.
    pub per_instance: Vec<Option<InstanceSample>>,
    pub failures: usize,
    pub config: SensitivityConfig,
}

/// RMS perpendicular distance of the endpoints of `links` at `inputs` from
/// their best-fit plane.
pub fn instance_flatness(links: &LinkSet, inputs: &[ControlInput]) -> Result<f64> {
    let pts = inputs
        .iter()
        .map(|&u| forward(links, u).map(|(d, _)| d))
        .collect::<Result<Vec<Vec3>>>()?;
    Ok(fit_plane(&pts, PlaneMode::Orthogonal)?.rmse())
}

fn check_nominal(links: &LinkSet, inputs: &[ControlInput]) -> Result<()> {
    let report = validate_links(links);
    if !report.valid {
        return Err(Error::InvalidLinks(format!("{report:?}")));
    }
    for &u in inputs {
        forward(links, u).map_err(|e| {
            Error::OutOfWorkspace(format!("nominal design cannot reach theta = {}: {e}", u.theta))
        })?;
    }
    Ok(())
}

fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn abort_on_failures(failures: usize, total: usize) -> Result<()> {
    if failures * 10 >= total && failures > 0 {
        return Err(Error::TooManyFailures { failed: failures, total });
    }
    Ok(())
}

/// Draw instance `k` of the configured noise.
fn draw_instance(links: &LinkSet, cfg: &SensitivityConfig, k: usize) -> Result<LinkSet> {
    let sigma = cfg.sigma_rel * links.characteristic_length();
    perturb_links(links, sigma, &mut substream(cfg.seed, k as u64))
}

pub fn kinematic_sensitivity(links: &LinkSet, cfg: &SensitivityConfig) -> Result<SensitivityResult> {
    cfg.check()?;
    let l_c = links.characteristic_length();
    let inputs = cfg.control_inputs(l_c, cfg.workspace_rel);
    check_nominal(links, &inputs)?;

    let per_instance: Vec<Option<InstanceSample>> = (0..cfg.n_instances)
        .into_par_iter()
        .map(|k| {
            let inst = draw_instance(links, cfg, k).ok()?;
            let flatness = instance_flatness(&inst, &inputs).ok()?;
            Some(InstanceSample { flatness, link_rmse: link_rmse(links, &inst) })
        })
        .collect();
    summarize(per_instance, *cfg)
}

fn summarize(per_instance: Vec<Option<InstanceSample>>, cfg: SensitivityConfig) -> Result<SensitivityResult> {
    let ok: Vec<InstanceSample> = per_instance.iter().flatten().copied().collect();
    let failures = per_instance.len() - ok.len();
    abort_on_failures(failures, per_instance.len())?;
    let ratios: Vec<f64> = ok.iter().map(|s| s.flatness / s.link_rmse).collect();
    let (mean_ratio, ci95) = mean_ci(&ratios);
    let n = ok.len() as f64;
    let flatness_rmse_mean = ok.iter().map(|s| s.flatness).sum::<f64>() / n;
    let link_rmse_mean = ok.iter().map(|s| s.link_rmse).sum::<f64>() / n;
    let s_k = match cfg.aggregate {
        Aggregate::MeanOfRatios => mean_ratio,
        Aggregate::RatioOfMeans => flatness_rmse_mean / link_rmse_mean,
    };
    Ok(SensitivityResult {
        s_k,
        ci95,
        flatness_rmse_mean,
        link_rmse_mean,
        per_instance,
        failures,
        config: cfg,
    })
}

/// Inclusive grid axis with `n` evenly spaced nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis1 {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Axis1 {
    pub fn new(range: RangeInclusive<f64>, n: usize) -> Self {
        Self { start: *range.start(), end: *range.end(), n }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + step * i as f64).collect()
    }
}

/// Design-space grid at `L_c = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub h: Axis1,
    pub r: Axis1,
    pub gamma: Vec<f64>,
}

impl SweepGrid {
    /// `n × n` grid with `H = 0.5·i/n` and `R = i/n` for `i = 1..=n`.
    ///
    /// The last `H` row sits on the `H = L_c/2` boundary and is reported invalid.
    pub fn square(n: usize, gamma: f64) -> Self {
        Self {
            h: Axis1::new(0.5 / n as f64..=0.5, n),
            r: Axis1::new(1.0 / n as f64..=1.0, n),
            gamma: vec![gamma],
        }
    }

    pub fn nodes(&self) -> Vec<DesignParams> {
        let (hs, rs) = (self.h.values(), self.r.values());
        let mut out = Vec::with_capacity(hs.len() * rs.len() * self.gamma.len());
        for &g in &self.gamma {
            for &h in &hs {
                for &r in &rs {
                    out.push(DesignParams::new(1.0, r, h, g));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub h: f64,
    pub r: f64,
    pub gamma: f64,
    pub h_over_r: f64,
    /// `None` when the design is invalid or too many instances failed.
    pub s_k: Option<f64>,
    pub ci95: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeTable {
    pub rows: Vec<LandscapeRow>,
}

impl LandscapeTable {
    pub const HEADER: &'static str = "H,R,gamma,H_over_R,s_k,ci95,failures";

    /// Row with the smallest finite `s_k`.
    pub fn minimum(&self) -> Option<&LandscapeRow> {
        self.rows
            .iter()
            .filter(|r| r.s_k.is_some())
            .min_by(|a, b| a.s_k.unwrap().total_cmp(&b.s_k.unwrap()))
    }

    /// CSV with `gamma` in radians; invalid cells carry `NaN`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.h,
                r.r,
                r.gamma,
                r.h_over_r,
                r.s_k.unwrap_or(f64::NAN),
                r.ci95.unwrap_or(f64::NAN),
                r.failures
            ));
        }
        s
    }
}

/// Evaluate `S_k` at every grid node. Node `i` uses seed `child_seed(cfg.seed, i)`.
pub fn sweep_landscape(grid: &SweepGrid, cfg: &SensitivityConfig) -> Result<LandscapeTable> {
    cfg.check()?;
    let rows = grid
        .nodes()
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = LandscapeRow {
                h: p.h,
                r: p.r,
                gamma: p.gamma,
                h_over_r: p.h / p.r,
                s_k: None,
                ci95: None,
                failures: 0,
            };
            let Ok(links) = links_from_design(&p) else { return row };
            let node_cfg = SensitivityConfig { seed: child_seed(cfg.seed, i as u64), ..*cfg };
            match kinematic_sensitivity(&links, &node_cfg) {
                Ok(res) => {
                    row.s_k = Some(res.s_k);
                    row.ci95 = Some(res.ci95);
                    row.failures = res.failures;
                }
                Err(Error::TooManyFailures { failed, .. }) => row.failures = failed,
                Err(_) => {}
            }
            row
        })
        .collect();
    Ok(LandscapeTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub workspace_rel: f64,
    pub flatness_rmse: f64,
    pub ci95: f64,
}

/// Mean flatness at each workspace level, reusing the same fabricated
/// instances at every level. An instance that fails at any level is dropped
/// from all of them.
pub fn workspace_flatness_curve(
    links: &LinkSet,
    cfg: &SensitivityConfig,
    levels: &[f64],
) -> Result<Vec<CurvePoint>> {
    cfg.check()?;
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("workspace levels must be ascending".into()));
    }
    let l_c = links.characteristic_length();
    let inputs: Vec<Vec<ControlInput>> =
        levels.iter().map(|&w| cfg.control_inputs(l_c, w)).collect();
    for set in &inputs {
        check_nominal(links, set)?;
    }
    let per_instance: Vec<Option<Vec<f64>>> = (0..cfg.n_instances)
        .into_par_iter()
        .map(|k| {
            let inst = draw_instance(links, cfg, k).ok()?;
            inputs.iter().map(|set| instance_flatness(&inst, set).ok()).collect()
        })
        .collect();
    let ok: Vec<&Vec<f64>> = per_instance.iter().flatten().collect();
    abort_on_failures(per_instance.len() - ok.len(), per_instance.len())?;
    Ok(levels
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let vals: Vec<f64> = ok.iter().map(|v| v[j]).collect();
            let (flatness_rmse, ci95) = mean_ci(&vals);
            CurvePoint { workspace_rel: w, flatness_rmse, ci95 }
        })
        .collect())
}
