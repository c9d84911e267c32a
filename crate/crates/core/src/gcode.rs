//! G-code front end: parse a small dialect and turn toolpaths into motor
//! angles.
//!
//! Supported: `G0`, `G1`, `G28`, `G90`, `G91` with `X`, `Y`, `Z`, `F` words,
//! plus `N` line numbers. Comments run from `;` to end of line or sit inside
//! parentheses. Any other `G` or `M` code is rejected rather than skipped, so a
//! file either converts completely or not at all.
//!
//! The output plane carries `x` and `y`; `z` goes to a separate linear axis.
//! With an error field, the commanded `z` is raised by the predicted error
//! `ê(x, y)`: if a reference scan read 2 µm high at a point, the surface there
//! is 2 µm low as seen by the machine, so the tool is sent 2 µm higher to touch
//! the nominal surface.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::design::{validate_links, LinkSet};
use crate::error::{Error, Result};
use crate::kinematics::inverse;
use crate::metrology::{interpolate_error, Boundary, ErrorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandKind {
    /// `G0`
    RapidMove,
    /// `G1`
    LinearMove,
    /// `G28`
    Home,
    /// `G90`
    AbsoluteMode,
    /// `G91`
    RelativeMode,
}

impl CommandKind {
    fn code(self) -> u32 {
        match self {
            CommandKind::RapidMove => 0,
            CommandKind::LinearMove => 1,
            CommandKind::Home => 28,
            CommandKind::AbsoluteMode => 90,
            CommandKind::RelativeMode => 91,
        }
    }

    fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => CommandKind::RapidMove,
            1 => CommandKind::LinearMove,
            28 => CommandKind::Home,
            90 => CommandKind::AbsoluteMode,
            91 => CommandKind::RelativeMode,
            _ => return None,
        })
    }

    fn is_motion(self) -> bool {
        matches!(self, CommandKind::RapidMove | CommandKind::LinearMove)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GCommand {
    pub kind: CommandKind,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    /// Feed, carried through to the output unchanged.
    pub f: Option<f64>,
    /// 1-based source line.
    pub line: usize,
}

impl GCommand {
    pub fn new(kind: CommandKind, line: usize) -> Self {
        Self { kind, x: None, y: None, z: None, f: None, line }
    }
}

impl fmt::Display for GCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.kind.code())?;
        for (letter, v) in [('X', self.x), ('Y', self.y), ('Z', self.z), ('F', self.f)] {
            if let Some(v) = v {
                write!(f, " {letter}{v}")?;
            }
        }
        Ok(())
    }
}

/// Drop `;` and parenthesized comments.
fn strip_comments(line: &str, lineno: usize) -> Result<String> {
    let mut out = String::with_capacity(line.len());
    let mut depth = 0usize;
    for ch in line.chars() {
        match ch {
            ';' if depth == 0 => break,
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            ')' => return Err(Error::Parse { line: lineno, token: ")".into() }),
            _ if depth == 0 => out.push(ch),
            _ => {}
        }
    }
    if depth > 0 {
        return Err(Error::Parse { line: lineno, token: "(".into() });
    }
    Ok(out)
}

/// Split into `(letter, number text)` words; `G1X10` and `G1 X10` both work.
fn words(text: &str, lineno: usize) -> Result<Vec<(char, String)>> {
    let mut out: Vec<(char, String)> = Vec::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            continue;
        }
        if ch.is_ascii_alphabetic() {
            out.push((ch.to_ascii_uppercase(), String::new()));
        } else if ch.is_ascii_digit() || matches!(ch, '.' | '-' | '+') {
            match out.last_mut() {
                Some((_, num)) => num.push(ch),
                None => return Err(Error::Parse { line: lineno, token: ch.to_string() }),
            }
        } else {
            return Err(Error::Parse { line: lineno, token: ch.to_string() });
        }
    }
    Ok(out)
}

fn number(letter: char, text: &str, lineno: usize) -> Result<f64> {
    let bad = || Error::Parse { line: lineno, token: format!("{letter}{text}") };
    let digits = text.trim_start_matches(['+', '-']);
    if text.len() - digits.len() > 1 || !digits.chars().any(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let v: f64 = text.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Parse a G-code program. Axis words without a `G` word continue the last
/// motion mode.
pub fn parse_gcode(text: &str) -> Result<Vec<GCommand>> {
    let mut cmds = Vec::new();
    let mut modal: Option<CommandKind> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let clean = strip_comments(raw, lineno)?;
        let ws = words(&clean, lineno)?;
        if ws.is_empty() {
            continue;
        }
        let mut kind = None;
        let mut axes: [Option<f64>; 4] = [None; 4];
        for (letter, num) in &ws {
            let v = number(*letter, num, lineno)?;
            let token = || format!("{letter}{num}");
            match letter {
                'G' | 'M' => {
                    if kind.is_some() {
                        return Err(Error::Parse { line: lineno, token: token() });
                    }
                    let known = (*letter == 'G' && v.fract() == 0.0 && v >= 0.0)
                        .then(|| CommandKind::from_code(v as u32))
                        .flatten();
                    kind = Some(known.ok_or_else(|| Error::UnsupportedCommand { line: lineno, code: token() })?);
                }
                'N' => {}
                'X' | 'Y' | 'Z' | 'F' => {
                    let slot = &mut axes["XYZF".find(*letter).unwrap()];
                    if slot.is_some() {
                        return Err(Error::Parse { line: lineno, token: token() });
                    }
                    *slot = Some(v);
                }
                _ => return Err(Error::Parse { line: lineno, token: token() }),
            }
        }
        let has_words = axes.iter().any(Option::is_some);
        let kind = match kind {
            Some(k) => k,
            None if !has_words => continue,
            None => modal.ok_or_else(|| Error::Parse { line: lineno, token: clean.trim().to_string() })?,
        };
        if kind.is_motion() {
            if axes[..3].iter().all(Option::is_none) {
                return Err(Error::Parse { line: lineno, token: clean.trim().to_string() });
            }
            modal = Some(kind);
        } else if matches!(kind, CommandKind::AbsoluteMode | CommandKind::RelativeMode) && has_words {
            return Err(Error::Parse { line: lineno, token: clean.trim().to_string() });
        }
        let [x, y, z, f] = axes;
        cmds.push(GCommand { kind, x, y, z, f, line: lineno });
    }
    Ok(cmds)
}

/// One command per line, explicit `G` words, shortest exact numbers.
pub fn serialize_gcode(cmds: &[GCommand]) -> String {
    cmds.iter().map(|c| format!("{c}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Longest straight piece between two IK evaluations.
    pub max_segment: f64,
    /// Radius of the usable disc on the output plane.
    pub workspace_radius: f64,
    pub boundary: Boundary,
}

impl PlanOptions {
    /// Workspace of diameter `0.4·L_c`.
    pub fn for_links(links: &LinkSet, max_segment: f64) -> Self {
        Self { max_segment, workspace_radius: 0.2 * links.characteristic_length(), boundary: Boundary::Clip }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Linear-axis command, compensated when a field is given.
    pub z: f64,
    /// Source line of the command that produced the sample.
    pub line: usize,
    pub feed: Option<f64>,
}

/// Convert commands into joint samples.
///
/// Moves start from the origin in absolute mode. Each move is cut at whole
/// multiples of `max_segment` from its start, plus its end point, so halving
/// the segment keeps every earlier sample. A move of zero length still emits
/// its end point. `G28` returns the named axes (all, if none) to zero.
pub fn plan_trajectory(
    cmds: &[GCommand],
    links: &LinkSet,
    field: Option<&ErrorField>,
    opts: &PlanOptions,
) -> Result<Vec<JointSample>> {
    let report = validate_links(links);
    if !report.valid {
        return Err(Error::InvalidLinks(format!("margins {:?}", report.margins)));
    }
    if !(opts.max_segment > 0.0 && opts.max_segment.is_finite()) {
        return Err(Error::Config(format!("max_segment must be positive, got {}", opts.max_segment)));
    }
    if opts.workspace_radius.is_nan() || opts.workspace_radius <= 0.0 {
        return Err(Error::Config(format!("workspace radius must be positive, got {}", opts.workspace_radius)));
    }

    let mut pos = [0.0f64; 3];
    let mut relative = false;
    let mut feed = None;
    let mut out = Vec::new();
    for (index, cmd) in cmds.iter().enumerate() {
        let wrap = |e: Error| Error::Command { index, source: Box::new(e) };
        let next = match cmd.kind {
            CommandKind::AbsoluteMode => {
                relative = false;
                continue;
            }
            CommandKind::RelativeMode => {
                relative = true;
                continue;
            }
            CommandKind::Home => {
                let all = cmd.x.is_none() && cmd.y.is_none() && cmd.z.is_none();
                let mut p = pos;
                for (k, w) in [cmd.x, cmd.y, cmd.z].into_iter().enumerate() {
                    if all || w.is_some() {
                        p[k] = 0.0;
                    }
                }
                p
            }
            CommandKind::RapidMove | CommandKind::LinearMove => {
                let mut p = pos;
                for (k, w) in [cmd.x, cmd.y, cmd.z].into_iter().enumerate() {
                    if let Some(v) = w {
                        p[k] = if relative { pos[k] + v } else { v };
                    }
                }
                p
            }
        };
        if cmd.f.is_some() {
            feed = cmd.f;
        }
        let r = next[0].hypot(next[1]);
        if r > opts.workspace_radius {
            return Err(wrap(Error::OutOfWorkspace(format!(
                "line {}: ({}, {}) lies {r} from the axis, beyond {}",
                cmd.line, next[0], next[1], opts.workspace_radius
            ))));
        }
        let delta = [next[0] - pos[0], next[1] - pos[1], next[2] - pos[2]];
        let len = (delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]).sqrt();
        let mut ts: Vec<f64> = Vec::new();
        let mut k = 1usize;
        while (k as f64) * opts.max_segment < len {
            ts.push(k as f64 * opts.max_segment / len);
            k += 1;
        }
        ts.push(1.0);
        for t in ts {
            let p = if t == 1.0 { next } else { [pos[0] + t * delta[0], pos[1] + t * delta[1], pos[2] + t * delta[2]] };
            let joints = inverse(links, p[0], p[1]).map_err(wrap)?;
            let z = match field {
                Some(fd) => p[2] + interpolate_error(fd, p[0], p[1], opts.boundary).map_err(wrap)?,
                None => p[2],
            };
            out.push(JointSample { index: out.len(), alpha: joints.alpha, beta: joints.beta, z, line: cmd.line, feed });
        }
        pos = next;
    }
    Ok(out)
}

/// CSV with header `index,alpha_rad,beta_rad,z_mm`.
pub fn samples_csv(samples: &[JointSample]) -> String {
    let mut s = String::from("index,alpha_rad,beta_rad,z_mm\n");
    for j in samples {
        s.push_str(&format!("{},{},{},{}\n", j.index, j.alpha, j.beta, j.z));
    }
    s
}
