use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dpcnn_optics::LedArray;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_err, CoreError, Result};

fn nonzero(w: &[f64]) -> Result<()> {
    if w.iter().all(|&v| v == 0.0) {
        return invalid("weight vector is all zero");
    }
    if w.iter().any(|v| !v.is_finite()) {
        return invalid("weights must be finite");
    }
    Ok(())
}

/// Flip `w` so its largest-magnitude entry (first one on ties) is positive.
pub fn canonicalize_sign(w: &[f64]) -> Result<Vec<f64>> {
    nonzero(w)?;
    let mut peak = 0;
    for (i, v) in w.iter().enumerate() {
        if v.abs() > w[peak].abs() {
            peak = i;
        }
    }
    Ok(if w[peak] < 0.0 { w.iter().map(|v| -v).collect() } else { w.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternStats {
    /// Share of `Σ w²` on each ring, indexed by ring number.
    pub ring_energy_fractions: Vec<f64>,
    /// `Σ_{w<0} w² / Σ w²`.
    pub negative_energy_fraction: f64,
}

pub fn pattern_stats(w: &[f64], array: &LedArray) -> Result<PatternStats> {
    nonzero(w)?;
    if w.len() != array.len() {
        return Err(CoreError::Shape(format!("{} weights for {} LEDs", w.len(), array.len())));
    }
    let rings = array.leds.iter().map(|l| l.ring as usize + 1).max().unwrap_or(0);
    let total: f64 = w.iter().map(|v| v * v).sum();
    let mut ring = vec![0.0; rings];
    let mut negative = 0.0;
    for (v, led) in w.iter().zip(&array.leds) {
        ring[led.ring as usize] += v * v;
        if *v < 0.0 {
            negative += v * v;
        }
    }
    Ok(PatternStats {
        ring_energy_fractions: ring.into_iter().map(|e| e / total).collect(),
        negative_energy_fraction: negative / total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternFiles {
    pub csv: PathBuf,
    pub pgm: PathBuf,
    pub sign: PathBuf,
}

pub const PATTERN_IMAGE_SIDE: usize = 64;
const DOT_RADIUS: f64 = 3.0;

/// Pixel center of an LED in the pattern images (+y up).
pub fn pattern_pixel(array: &LedArray, led: usize) -> (usize, usize) {
    let extent = array
        .leds
        .iter()
        .map(|l| l.sx.abs().max(l.sy.abs()))
        .fold(0.0f64, f64::max);
    let half = PATTERN_IMAGE_SIDE as f64 / 2.0;
    let scale = if extent > 0.0 { (half - DOT_RADIUS - 1.0) / extent } else { 0.0 };
    let l = &array.leds[led];
    let col = (half + l.sx * scale).round() as usize;
    let row = (half - l.sy * scale).round() as usize;
    (row.min(PATTERN_IMAGE_SIDE - 1), col.min(PATTERN_IMAGE_SIDE - 1))
}

fn pgm(pixels: &[u8], comment: &str) -> Vec<u8> {
    let n = PATTERN_IMAGE_SIDE;
    let mut out = format!("P5\n# {comment}\n{n} {n}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Writes `<prefix>.csv` (led, sx, sy, ring, bright_field, weight),
/// `<prefix>.pgm` (|w| dots at the LED direction sines, 255 = max |w|) and
/// `<prefix>.sign.pgm` (255 positive, 0 negative, 128 zero or background).
pub fn export_pattern(w: &[f64], array: &LedArray, prefix: &Path) -> Result<PatternFiles> {
    if w.len() != array.len() {
        return Err(CoreError::Shape(format!("{} weights for {} LEDs", w.len(), array.len())));
    }
    let mut csv = String::from("led,sx,sy,ring,bright_field,weight\n");
    for (i, (v, led)) in w.iter().zip(&array.leds).enumerate() {
        writeln!(csv, "{i},{},{},{},{},{v}", led.sx, led.sy, led.ring, led.bright_field).unwrap();
    }
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let n = PATTERN_IMAGE_SIDE;
    let mut heat = vec![0u8; n * n];
    let mut sign = vec![128u8; n * n];
    for (i, v) in w.iter().enumerate() {
        let (r0, c0) = pattern_pixel(array, i);
        let level = if max > 0.0 { (v.abs() / max * 255.0).round() as u8 } else { 0 };
        let s = if *v > 0.0 { 255 } else if *v < 0.0 { 0 } else { 128 };
        for r in 0..n {
            for c in 0..n {
                let d2 = (r as f64 - r0 as f64).powi(2) + (c as f64 - c0 as f64).powi(2);
                if d2 <= DOT_RADIUS * DOT_RADIUS && level >= heat[r * n + c] {
                    heat[r * n + c] = level;
                    sign[r * n + c] = s;
                }
            }
        }
    }
    let base = prefix.as_os_str().to_owned();
    let with = |ext: &str| {
        let mut p = base.clone();
        p.push(ext);
        PathBuf::from(p)
    };
    let files = PatternFiles {
        csv: with(".csv"),
        pgm: with(".pgm"),
        sign: with(".sign.pgm"),
    };
    std::fs::write(&files.csv, csv).map_err(io_err(&files.csv))?;
    std::fs::write(&files.pgm, pgm(&heat, &format!("scale: 255 = |w| {max}"))).map_err(io_err(&files.pgm))?;
    std::fs::write(&files.sign, pgm(&sign, "sign: 255 positive, 0 negative, 128 zero"))
        .map_err(io_err(&files.sign))?;
    Ok(files)
}

/// Weights column of a pattern CSV, in LED order.
pub fn parse_pattern_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, message: &str| CoreError::Parse {
        path: path.display().to_string(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "led,sx,sy,ring,bright_field,weight" => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut w = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(i + 1, "expected 6 fields"));
        }
        let idx: usize = fields[0].trim().parse().map_err(|_| bad(i + 1, "bad LED index"))?;
        if idx != w.len() {
            return Err(bad(i + 1, "LED indices out of order"));
        }
        w.push(fields[5].trim().parse().map_err(|_| bad(i + 1, "bad weight"))?);
    }
    Ok(w)
}
