use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use fpm::design::{design_from_links, validate_links, DesignFile, LinkSet};
use fpm::fabrication::{
    bootstrap_refine, scale_link_integer, trajectory_csv, BootstrapConfig, BootstrapLengths, NoiseModel,
};
use fpm::gcode::{parse_gcode, plan_trajectory, samples_csv, PlanOptions};
use fpm::geom::{fit_plane, PlaneMode, Vec3};
use fpm::kinematics::{forward, inverse, ControlInput};
use fpm::metrology::{
    build_error_field, compensate, flatness_rmse, lateral_runout, tilt_between_planes, Boundary, ErrorField,
    SurfaceScan,
};
use fpm::rng::substream;
use fpm::sensitivity::{
    kinematic_sensitivity, sweep_landscape, workspace_flatness_curve, Aggregate, Axis1, SamplePattern,
    SensitivityConfig, SweepGrid,
};
use serde::Serialize;

use crate::args::*;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or refused overwrite.
    Usage(String),
    /// Computation or input-file failure.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<fpm::Error> for CliError {
    fn from(e: fpm::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

/// What a subcommand produced.
struct Report {
    data: String,
    extra: Vec<(PathBuf, String)>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    /// Exit status when the run succeeded but the answer is negative.
    status: u8,
}

impl Report {
    fn new(data: String) -> Self {
        Self { data, extra: Vec::new(), seed: None, inputs: Vec::new(), status: 0 }
    }

    fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn inputs(mut self, paths: &[&PathBuf]) -> Self {
        self.inputs = paths.iter().map(|p| p.to_path_buf()).collect();
        self
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn load_design(path: &Path) -> Result<(DesignFile, LinkSet)> {
    let file = DesignFile::from_json(&read(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let links = file.links()?;
    Ok((file, links))
}

fn load_scan(path: &Path) -> Result<(SurfaceScan, String)> {
    let f = fs::File::open(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    SurfaceScan::read_csv(BufReader::new(f)).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn sensitivity_config(mc: &MonteCarlo) -> Result<SensitivityConfig> {
    let cfg = SensitivityConfig {
        sigma_rel: mc.sigma,
        n_points: mc.points,
        n_instances: mc.instances,
        workspace_rel: mc.workspace,
        seed: mc.seed,
        aggregate: match mc.aggregate {
            AggregateArg::MeanOfRatios => Aggregate::MeanOfRatios,
            AggregateArg::RatioOfMeans => Aggregate::RatioOfMeans,
        },
        pattern: match mc.pattern {
            Pattern::Square => SamplePattern::Square,
            Pattern::Sunflower => SamplePattern::Sunflower,
        },
    };
    cfg.check().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn noise_model(n: &Noise) -> Result<NoiseModel> {
    let m = NoiseModel { copy_sigma_rel: n.copy_noise, closure_sigma_rel: n.closure_noise, cut_sigma_rel: n.cut_noise };
    m.check().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(m)
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Usage(format!("--grid expects N or NxM, got `{text}`"));
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    let nums: Vec<usize> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    match nums[..] {
        [n] if n >= 2 => Ok((n, n)),
        [h, r] if h >= 2 && r >= 2 => Ok((h, r)),
        _ => Err(bad()),
    }
}

fn fk(a: &FkArgs) -> Result<Report> {
    let (_, links) = load_design(&a.design)?;
    let (p, _) = forward(&links, ControlInput::new(a.theta.to_radians(), a.phi.to_radians()))?;
    let clean = |v: f64| if v.abs() < 1e-12 * links.characteristic_length() { 0.0 } else { v };
    Ok(Report::new(format!("{} {} {}\n", clean(p.x), clean(p.y), clean(p.z))).inputs(&[&a.design]))
}

fn ik(a: &IkArgs) -> Result<Report> {
    let (_, links) = load_design(&a.design)?;
    let j = inverse(&links, a.x, a.y)?;
    Ok(Report::new(format!("{} {}\n", j.alpha.to_degrees(), j.beta.to_degrees())).inputs(&[&a.design]))
}

fn validate(a: &DesignArg) -> Result<Report> {
    let file = DesignFile::from_json(&read(&a.design)?)?;
    let links = match file.spec {
        fpm::design::DesignSpec::Links { links: l } => LinkSet::nominal(l.A, l.B, l.C, l.D),
        _ => file.links()?,
    };
    let report = validate_links(&links);
    let mut out = Report::new(json(&report)).inputs(&[&a.design]);
    if !report.valid {
        eprintln!("design lies outside the design space");
        out.status = 1;
    }
    Ok(out)
}

fn links(a: &LinksArgs) -> Result<Report> {
    let (file, links) = load_design(&a.design)?;
    let converted = match a.to {
        LinksForm::Links => DesignFile::from_links(&links, &file.unit),
        LinksForm::Params => DesignFile::from_params(&design_from_links(&links)?, &file.unit),
    };
    Ok(Report::new(converted.to_json() + "\n").inputs(&[&a.design]))
}

fn sweep(a: &SweepArgs) -> Result<Report> {
    let (nh, nr) = parse_grid(&a.grid)?;
    let cfg = sensitivity_config(&a.mc)?;
    let grid = SweepGrid {
        h: Axis1::new(0.5 / nh as f64..=0.5, nh),
        r: Axis1::new(1.0 / nr as f64..=1.0, nr),
        gamma: a.gamma.iter().map(|g| g.to_radians()).collect(),
    };
    let table = sweep_landscape(&grid, &cfg)?;
    if let Some(m) = table.minimum() {
        eprintln!("minimum S_k = {:.4} at H = {:.4}, R = {:.4}", m.s_k.unwrap_or(f64::NAN), m.h, m.r);
    }
    Ok(Report::new(table.to_csv()).seed(cfg.seed))
}

fn tradeoff(a: &TradeoffArgs) -> Result<Report> {
    let (_, links) = load_design(&a.design)?;
    let cfg = sensitivity_config(&a.mc)?;
    let curve = workspace_flatness_curve(&links, &cfg, &a.levels)?;
    let mut s = String::from("workspace_rel,flatness_rmse,ci95\n");
    for c in curve {
        s.push_str(&format!("{},{},{}\n", c.workspace_rel, c.flatness_rmse, c.ci95));
    }
    Ok(Report::new(s).seed(cfg.seed).inputs(&[&a.design]))
}

fn sensitivity(a: &SensitivityArgs) -> Result<Report> {
    let (_, links) = load_design(&a.design)?;
    let cfg = sensitivity_config(&a.mc)?;
    let r = kinematic_sensitivity(&links, &cfg)?;
    let data = if a.output.out.is_some() {
        json(&r)
    } else {
        format!("S_k = {:.4} ± {:.4} ({} of {} instances failed)\n", r.s_k, r.ci95, r.failures, cfg.n_instances)
    };
    Ok(Report::new(data).seed(cfg.seed).inputs(&[&a.design]))
}

fn flatness(a: &ScanArgs) -> Result<Report> {
    let (scan, unit) = load_scan(&a.scan)?;
    let rmse = flatness_rmse(&scan)?;
    let fit = fit_plane(&scan.points, PlaneMode::Orthogonal)?;
    #[derive(Serialize)]
    struct Out {
        unit: String,
        points: usize,
        flatness_rmse: f64,
        plane: fpm::geom::PlaneFit,
    }
    Ok(Report::new(json(&Out { unit, points: scan.points.len(), flatness_rmse: rmse, plane: fit })).inputs(&[&a.scan]))
}

fn calibrate(a: &CalibrateArgs) -> Result<Report> {
    let (scan, _) = load_scan(&a.scan)?;
    let field = build_error_field(&scan)?;
    Ok(Report::new(field.to_json() + "\n").inputs(&[&a.scan]))
}

fn compensate_cmd(a: &CompensateArgs) -> Result<Report> {
    let (scan, unit) = load_scan(&a.scan)?;
    let field = ErrorField::from_json(&read(&a.field)?)?;
    let boundary = match a.boundary {
        BoundaryArg::Clip => Boundary::Clip,
        BoundaryArg::Omit => Boundary::Omit,
    };
    let out = compensate(&scan, &field, boundary)?;
    eprintln!("flatness {:.6e} -> {:.6e} {unit}", flatness_rmse(&scan)?, flatness_rmse(&out)?);
    let mut buf = Vec::new();
    out.write_csv(&unit, &mut buf)?;
    Ok(Report::new(String::from_utf8(buf).expect("csv is utf-8")).inputs(&[&a.scan, &a.field]))
}

fn tilt(a: &TiltArgs) -> Result<Report> {
    let mut inputs = Vec::new();
    let mut plane = |normal: &Option<Vec<f64>>, scan: &Option<PathBuf>, which: &str| -> Result<Vec3> {
        match (normal, scan) {
            (Some(n), None) if n.len() == 3 => Ok(Vec3::new(n[0], n[1], n[2])),
            (Some(_), None) => Err(CliError::Usage(format!("--normal-{which} needs three components x,y,z"))),
            (None, Some(p)) => {
                inputs.push(p.clone());
                Ok(fit_plane(&load_scan(p)?.0.points, PlaneMode::Orthogonal)?.normal())
            }
            _ => Err(CliError::Usage(format!("give exactly one of --normal-{which} or --scan-{which}"))),
        }
    };
    let na = plane(&a.normal_a, &a.scan_a, "a")?;
    let nb = plane(&a.normal_b, &a.scan_b, "b")?;
    let deg = tilt_between_planes(&na, &nb)?;
    let runout = lateral_runout(deg, a.travel);
    let mut r = Report::new(format!("tilt_deg,travel,runout\n{deg},{},{runout}\n", a.travel));
    r.inputs = inputs;
    Ok(r)
}

fn bootstrap(a: &BootstrapArgs) -> Result<Report> {
    let init = BootstrapLengths { a: a.init[0], b: a.init[1], c: a.init[2], k: a.init[3], d: a.init[4] };
    let cfg = BootstrapConfig {
        noise: noise_model(&a.noise)?,
        relaxation: a.relaxation,
        sensitivity: SensitivityConfig { seed: a.sk_seed, ..Default::default() },
    };
    let traj = bootstrap_refine(init, &cfg, &mut substream(a.seed, 0), a.iters).map_err(|e| match e {
        fpm::Error::Config(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    for st in &traj {
        if let Some(issue) = &st.issue {
            eprintln!("iteration {}: {issue}", st.iteration);
        }
    }
    Ok(Report::new(trajectory_csv(&traj)).seed(a.seed))
}

fn scale_link(a: &ScaleLinkArgs) -> Result<Report> {
    let noise = noise_model(&a.noise)?;
    let mut s = String::from("run,iter,estimate,rel_error\n");
    for run in 0..a.runs {
        let t = scale_link_integer(a.seed_length, a.n, &noise, &mut substream(a.seed, run as u64), a.max_iters)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for (i, (e, r)) in t.estimates.iter().zip(&t.rel_errors).enumerate() {
            s.push_str(&format!("{run},{},{e},{r}\n", i + 1));
        }
    }
    Ok(Report::new(s).seed(a.seed))
}

fn plan(a: &PlanArgs) -> Result<Report> {
    let (_, links) = load_design(&a.design)?;
    let cmds = parse_gcode(&read(&a.gcode)?)?;
    let field = match &a.field {
        Some(p) => Some(ErrorField::from_json(&read(p)?)?),
        None => None,
    };
    let mut opts = PlanOptions::for_links(&links, a.max_segment);
    if let Some(r) = a.radius {
        opts.workspace_radius = r;
    }
    let samples = plan_trajectory(&cmds, &links, field.as_ref(), &opts)?;
    let mut inputs = vec![&a.gcode, &a.design];
    if let Some(p) = &a.field {
        inputs.push(p);
    }
    let mut r = Report::new(samples_csv(&samples)).inputs(&inputs);
    if let Some(p) = &a.json {
        r.extra.push((p.clone(), json(&samples)));
    }
    Ok(r)
}

fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Fk(a) => &a.output,
        Command::Ik(a) => &a.output,
        Command::Validate(a) => &a.output,
        Command::Links(a) => &a.output,
        Command::Sweep(a) => &a.output,
        Command::Tradeoff(a) => &a.output,
        Command::Sensitivity(a) => &a.output,
        Command::Flatness(a) => &a.output,
        Command::Calibrate(a) => &a.output,
        Command::Compensate(a) => &a.output,
        Command::Tilt(a) => &a.output,
        Command::Bootstrap(a) => &a.output,
        Command::ScaleLink(a) => &a.output,
        Command::Plan(a) => &a.output,
    }
}

fn config_of(cmd: &Command) -> serde_json::Value {
    let v = match cmd {
        Command::Fk(a) => serde_json::to_value(a),
        Command::Ik(a) => serde_json::to_value(a),
        Command::Validate(a) => serde_json::to_value(a),
        Command::Links(a) => serde_json::to_value(a),
        Command::Sweep(a) => serde_json::to_value(a),
        Command::Tradeoff(a) => serde_json::to_value(a),
        Command::Sensitivity(a) => serde_json::to_value(a),
        Command::Flatness(a) => serde_json::to_value(a),
        Command::Calibrate(a) => serde_json::to_value(a),
        Command::Compensate(a) => serde_json::to_value(a),
        Command::Tilt(a) => serde_json::to_value(a),
        Command::Bootstrap(a) => serde_json::to_value(a),
        Command::ScaleLink(a) => serde_json::to_value(a),
        Command::Plan(a) => serde_json::to_value(a),
    };
    v.expect("arguments serialize")
}

fn manifest_path(out: &Output) -> Option<PathBuf> {
    out.manifest.clone().or_else(|| {
        out.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<u8> {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("FPM_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("FPM_THREADS=`{v}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Domain(e.to_string()))?;
    }

    let output = output_of(&cli.command).clone();
    let manifest = manifest_path(&output);
    let mut declared: Vec<&PathBuf> = output.out.iter().chain(manifest.iter()).collect();
    if let Command::Plan(a) = &cli.command {
        declared.extend(a.json.iter());
    }
    if !output.force {
        if let Some(p) = declared.iter().find(|p| p.exists()) {
            return Err(CliError::Usage(format!("{} exists; pass --force to overwrite", p.display())));
        }
    }

    let report = match &cli.command {
        Command::Fk(a) => fk(a),
        Command::Ik(a) => ik(a),
        Command::Validate(a) => validate(a),
        Command::Links(a) => links(a),
        Command::Sweep(a) => sweep(a),
        Command::Tradeoff(a) => tradeoff(a),
        Command::Sensitivity(a) => sensitivity(a),
        Command::Flatness(a) => flatness(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Compensate(a) => compensate_cmd(a),
        Command::Tilt(a) => tilt(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::ScaleLink(a) => scale_link(a),
        Command::Plan(a) => plan(a),
    }?;

    match &output.out {
        Some(p) => write_file(p, &report.data)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.data.as_bytes()).map_err(|e| CliError::Domain(e.to_string()))?;
        }
    }
    for (p, text) in &report.extra {
        write_file(p, text)?;
    }
    let m = RunManifest {
        tool: "fpm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name(),
        config: config_of(&cli.command),
        seed: report.seed,
        inputs: report.inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: output.out.iter().chain(report.extra.iter().map(|(p, _)| p)).map(|p| p.display().to_string()).collect(),
    };
    match manifest {
        Some(p) => write_file(&p, &json(&m))?,
        None => eprint!("{}", json(&m)),
    }
    Ok(report.status)
}
