//! Run configuration: a TOML recipe, overridden field by field by flags.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use helicoid_core::{parse_h, HFunction, Orientation, PhasePoint};
use serde::Deserialize;
use thiserror::Error;

/// A rejected field, named by its dotted path in the recipe file.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn bad(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub description: Option<String>,
    pub reproduces: Option<String>,
    pub h: Option<String>,
    pub c0: Option<f64>,
    pub eps: Option<f64>,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default)]
    pub start: StartSection,
    #[serde(default)]
    pub surface: SurfaceSection,
    #[serde(default)]
    pub portrait: PortraitSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub x_max: Option<f64>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub s_max: Option<f64>,
    pub tol: Option<f64>,
    pub max_step: Option<f64>,
    /// Stop an orbit once `|x|` exceeds this.
    pub x_window: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSection {
    pub from_axis: Option<bool>,
    pub point: Option<[f64; 2]>,
    pub through_axis: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub n_theta: Option<usize>,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitSection {
    pub seeds: Option<Vec<[f64; 2]>>,
    pub axis_seed: Option<bool>,
    pub seed_span: Option<f64>,
    pub glyphs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Flag values; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub h: Option<String>,
    pub c0: Option<f64>,
    pub eps: Option<f64>,
    pub x_max: Option<f64>,
    pub grid: Option<usize>,
    pub s_max: Option<f64>,
    pub tol: Option<f64>,
    pub max_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub from_axis: bool,
    /// `x,y` text.
    pub start: Option<String>,
    pub through_axis: bool,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub n_theta: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Axis,
    Point(PhasePoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub description: Option<String>,
    pub reproduces: Option<String>,
    pub h_text: String,
    pub h: HFunction,
    pub c0: f64,
    pub eps: Option<Orientation>,
    pub x_max: f64,
    pub grid: usize,
    pub s_max: f64,
    pub tol: f64,
    pub max_step: f64,
    pub x_window: Option<f64>,
    pub start: Option<Start>,
    pub through_axis: bool,
    pub theta_range: (f64, f64),
    pub n_theta: usize,
    pub rows: usize,
    pub seeds: Option<Vec<PhasePoint>>,
    pub axis_seed: bool,
    pub seed_span: f64,
    pub glyphs: usize,
    pub out: PathBuf,
}

impl RunConfig {
    /// `eps` as given, else `+1`.
    pub fn orientation(&self) -> Orientation {
        self.eps.unwrap_or(Orientation::Plus)
    }
}

pub fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
    parse_file(&text)
}

pub fn parse_file(text: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let path = e
            .span()
            .map(|sp| key_at(text, sp.start))
            .filter(|k| !k.is_empty())
            .unwrap_or_else(|| "config".into());
        bad(&path, message)
    })
}

/// Dotted key of the line holding byte offset `at`, using the nearest table header above it.
fn key_at(text: &str, at: usize) -> String {
    let upto = &text[..at.min(text.len())];
    let line_start = upto.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    let table = upto[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    match (table, key.starts_with('[')) {
        (_, true) => key.trim_matches(|c| c == '[' || c == ']').trim().to_string(),
        (Some(t), false) if !key.is_empty() => format!("{t}.{key}"),
        (None, false) => key.to_string(),
        (Some(t), false) => t,
    }
}

fn finite_positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(path, format!("must be finite and positive, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, format!("must be finite, got {v}")))
    }
}

fn phase_point(path: &str, x: f64, y: f64) -> Result<PhasePoint, ConfigError> {
    PhasePoint::new(x, y).map_err(|e| bad(path, e.to_string()))
}

pub fn parse_point(path: &str, text: &str) -> Result<PhasePoint, ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [x, y] = parts[..] else {
        return Err(bad(path, format!("expected `x,y`, got `{text}`")));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(path, format!("`{s}`: {e}")));
    phase_point(path, num(x)?, num(y)?)
}

/// Merges flags over the file and validates every field.
pub fn resolve(file: FileConfig, o: &Overrides, name: &str) -> Result<RunConfig, ConfigError> {
    let h_text = o.h.clone().or(file.h).ok_or_else(|| bad("h", "required"))?;
    let h = parse_h(&h_text).map_err(|e| bad("h", e.to_string()))?;
    let c0 = o.c0.or(file.c0).ok_or_else(|| bad("c0", "required"))?;
    if !c0.is_finite() || c0 == 0.0 {
        return Err(bad("c0", format!("must be finite and non-zero, got {c0}")));
    }
    let eps = match o.eps.or(file.eps) {
        None => None,
        Some(e) => Some(Orientation::from_sign(e).ok_or_else(|| bad("eps", format!("must be 1 or -1, got {e}")))?),
    };

    let x_max = finite_positive("window.x_max", o.x_max.or(file.window.x_max).unwrap_or(4.0))?;
    let grid = o.grid.or(file.window.grid).unwrap_or(400);
    if grid < 64 {
        return Err(bad("window.grid", format!("must be at least 64, got {grid}")));
    }

    let it = &file.integration;
    let s_max = finite_positive("integration.s_max", o.s_max.or(it.s_max).unwrap_or(30.0))?;
    let tol = finite_positive("integration.tol", o.tol.or(it.tol).unwrap_or(1e-9))?;
    if tol > 1e-3 {
        return Err(bad("integration.tol", format!("must be at most 1e-3, got {tol}")));
    }
    let max_step = finite_positive("integration.max_step", o.max_step.or(it.max_step).unwrap_or(0.05))?;
    let x_window = it
        .x_window
        .map(|v| finite_positive("integration.x_window", v))
        .transpose()?;

    let st = &file.start;
    let start = if let Some(text) = &o.start {
        Some(Start::Point(parse_point("start.point", text)?))
    } else if o.from_axis {
        Some(Start::Axis)
    } else {
        match (st.from_axis.unwrap_or(false), st.point) {
            (true, Some(_)) => return Err(bad("start", "give either from_axis or point, not both")),
            (true, None) => Some(Start::Axis),
            (false, Some([x, y])) => Some(Start::Point(phase_point("start.point", x, y)?)),
            (false, None) => None,
        }
    };
    let through_axis = o.through_axis || st.through_axis.unwrap_or(false);

    let sf = &file.surface;
    let theta_min = finite("surface.theta_min", o.theta_min.or(sf.theta_min).unwrap_or(0.0))?;
    let theta_max = finite("surface.theta_max", o.theta_max.or(sf.theta_max).unwrap_or(TAU))?;
    if theta_max <= theta_min {
        return Err(bad("surface.theta_max", "must exceed surface.theta_min"));
    }
    let n_theta = o.n_theta.or(sf.n_theta).unwrap_or(48);
    if n_theta < 8 {
        return Err(bad("surface.n_theta", format!("must be at least 8, got {n_theta}")));
    }
    let rows = sf.rows.unwrap_or(240);
    if rows < 2 {
        return Err(bad("surface.rows", format!("must be at least 2, got {rows}")));
    }

    let pt = &file.portrait;
    let seeds = pt
        .seeds
        .as_ref()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(i, &[x, y])| phase_point(&format!("portrait.seeds[{i}]"), x, y))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let seed_span = finite_positive("portrait.seed_span", pt.seed_span.unwrap_or(40.0))?;
    let glyphs = pt.glyphs.unwrap_or(24);
    if !(4..=200).contains(&glyphs) {
        return Err(bad("portrait.glyphs", format!("must lie in 4..=200, got {glyphs}")));
    }

    Ok(RunConfig {
        name: name.to_string(),
        description: file.description,
        reproduces: file.reproduces,
        h_text,
        h,
        c0,
        eps,
        x_max,
        grid,
        s_max,
        tol,
        max_step,
        x_window,
        start,
        through_axis,
        theta_range: (theta_min, theta_max),
        n_theta,
        rows,
        seeds,
        axis_seed: pt.axis_seed.unwrap_or(true),
        seed_span,
        glyphs,
        out: o
            .out
            .clone()
            .or(file.output.dir)
            .unwrap_or_else(|| PathBuf::from("out")),
    })
}

/// Reads the optional file and applies the flags.
pub fn load(path: Option<&Path>, o: &Overrides) -> Result<RunConfig, ConfigError> {
    let (file, name) = match path {
        Some(p) => (
            read_file(p)?,
            p.file_stem()
                .map_or("config".into(), |s| s.to_string_lossy().into_owned()),
        ),
        None => (FileConfig::default(), "flags".to_string()),
    };
    resolve(file, o, &name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_paths_for_toml_errors() {
        let e = parse_file("h = \"1\"\n[window]\nx_max = \"wide\"\n").unwrap_err();
        assert_eq!(e.path, "window.x_max");
        let e = parse_file("h = \"1\"\nbogus = 3\n").unwrap_err();
        assert_eq!(e.path, "bogus");
    }

    #[test]
    fn point_text() {
        assert_eq!(
            parse_point("p", " 1.5, -0.25").unwrap(),
            PhasePoint { x: 1.5, y: -0.25 }
        );
        assert!(parse_point("p", "1").is_err());
        assert_eq!(parse_point("p", "0,0").unwrap_err().path, "p");
    }
}
