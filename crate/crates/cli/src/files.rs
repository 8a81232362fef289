//! Text formats for measurements and ground-truth scenes.
//!
//! A measurement file is a `key value` header followed by `M` lines holding
//! the real and imaginary part of one sample, in `m_c Ms + m_s` order:
//!
//! ```text
//! # fcomp measurement
//! M 256
//! Ms 16
//! Mc 16
//! f0 2.4e10
//! bandwidth 2e8
//! ts 5e-6
//! tc 8e-5
//! 1e0 0e0
//! ...
//! ```
//!
//! A scene file holds one `r v re im` line per target after a `K <count>`
//! header. Floats are written in shortest round-trip form, so files reload
//! bit-exactly.

use std::fs;
use std::path::Path;

use fcomp_core::{Measurement, RadarConfig, Scene, Target};
use num_complex::Complex64;

use crate::error::{CliError, Result};

const MEASUREMENT_TAG: &str = "# fcomp measurement";
const SCENE_TAG: &str = "# fcomp scene";

pub fn format_measurement(cfg: &RadarConfig, y: &Measurement) -> String {
    let mut out = String::with_capacity(48 * y.len() + 128);
    out.push_str(MEASUREMENT_TAG);
    out.push('\n');
    out.push_str(&format!(
        "M {}\nMs {}\nMc {}\nf0 {:e}\nbandwidth {:e}\nts {:e}\ntc {:e}\n",
        y.len(),
        y.ms(),
        y.mc(),
        cfg.f0,
        cfg.bandwidth,
        cfg.ts,
        cfg.tc
    ));
    for z in y.samples() {
        out.push_str(&format!("{:e} {:e}\n", z.re, z.im));
    }
    out
}

fn parse_err(what: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::invalid(format!("{what} line {line}: {msg}"))
}

fn parse_num<T: std::str::FromStr>(what: &str, line: usize, tok: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse::<T>().map_err(|e| parse_err(what, line, format!("'{tok}': {e}")))
}

/// Content lines with their 1-based line numbers, comments and blanks removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn header_value<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    what: &str,
    key: &str,
) -> Result<(usize, &'a str)> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| CliError::invalid(format!("{what}: missing '{key}' header")))?;
    match line.split_once(char::is_whitespace) {
        Some((k, v)) if k == key => Ok((n, v.trim())),
        _ => Err(parse_err(what, n, format!("expected '{key} <value>'"))),
    }
}

/// Parsed measurement file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFile {
    pub radar: RadarConfig,
    pub measurement: Measurement,
}

pub fn parse_measurement(text: &str) -> Result<MeasurementFile> {
    const WHAT: &str = "measurement";
    let mut lines = content_lines(text);
    let mut int = |key| -> Result<usize> {
        let (n, v) = header_value(&mut lines, WHAT, key)?;
        parse_num(WHAT, n, v)
    };
    let (m, ms, mc) = (int("M")?, int("Ms")?, int("Mc")?);
    let mut float = |key| -> Result<f64> {
        let (n, v) = header_value(&mut lines, WHAT, key)?;
        parse_num(WHAT, n, v)
    };
    let (f0, bandwidth, ts, tc) = (float("f0")?, float("bandwidth")?, float("ts")?, float("tc")?);
    if ms.checked_mul(mc) != Some(m) {
        return Err(CliError::invalid(format!("measurement: M = {m} but Ms * Mc = {ms} * {mc}")));
    }
    let radar = RadarConfig::new(f0, bandwidth, ts, tc, ms, mc)?;
    let mut samples = Vec::with_capacity(m);
    for (n, line) in lines {
        let mut toks = line.split_whitespace();
        let (Some(re), Some(im), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(parse_err(WHAT, n, "expected two columns"));
        };
        samples.push(Complex64::new(parse_num(WHAT, n, re)?, parse_num(WHAT, n, im)?));
    }
    if samples.len() != m {
        return Err(CliError::invalid(format!(
            "measurement: header says M = {m} but {} samples follow",
            samples.len()
        )));
    }
    let measurement = Measurement::from_samples(ms, mc, samples)?;
    Ok(MeasurementFile { radar, measurement })
}

pub fn format_scene(scene: &Scene) -> String {
    let mut out = format!("{SCENE_TAG}\n# r v re im\nK {}\n", scene.len());
    for t in &scene.targets {
        out.push_str(&format!("{:e} {:e} {:e} {:e}\n", t.r, t.v, t.alpha.re, t.alpha.im));
    }
    out
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    const WHAT: &str = "scene";
    let mut lines = content_lines(text);
    let (n, v) = header_value(&mut lines, WHAT, "K")?;
    let k: usize = parse_num(WHAT, n, v)?;
    let mut targets = Vec::with_capacity(k);
    for (n, line) in lines {
        let vals = line
            .split_whitespace()
            .map(|t| parse_num::<f64>(WHAT, n, t))
            .collect::<Result<Vec<_>>>()?;
        let [r, v, re, im] = vals[..] else {
            return Err(parse_err(WHAT, n, "expected four columns"));
        };
        targets.push(Target::new(r, v, Complex64::new(re, im)));
    }
    if targets.len() != k {
        return Err(CliError::invalid(format!(
            "scene: header says K = {k} but {} targets follow",
            targets.len()
        )));
    }
    Ok(Scene::new(targets))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
