//! Raster input/output and sliding-window roughness maps.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_alpha_with, EstimatorKind, EstimatorOptions};
use crate::harness::thread_pool;
use crate::model::{csv_error, ModelKind, Sample};

/// Fewest usable pixels a window needs before estimation is attempted.
pub const MIN_WINDOW_PIXELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RasterFormat {
    Pgm,
    Rawf32,
    Csv,
}

impl FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(RasterFormat::Pgm),
            "rawf32" => Ok(RasterFormat::Rawf32),
            "csv" => Ok(RasterFormat::Csv),
            _ => Err(Error::domain(format!("unknown raster format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    model: ModelKind,
    looks: f64,
}

impl Raster {
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<f64>,
        model: ModelKind,
        looks: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::domain(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::domain(format!(
                "raster is {width}x{height} but has {} pixels",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain(format!(
                "pixel ({}, {}) is {}, expected a finite nonnegative value",
                i % width,
                i / width,
                pixels[i]
            )));
        }
        if !(looks.is_finite() && looks > 0.0) {
            return Err(Error::domain(format!("looks must be positive, got {looks}")));
        }
        Ok(Self {
            width,
            height,
            pixels,
            model,
            looks,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::domain(format!("pixel value {value} is not finite and nonnegative")));
        }
        self.pixels[y * self.width + x] = value;
        Ok(())
    }
}

pub fn read_raster(
    path: impl AsRef<Path>,
    format: RasterFormat,
    model: ModelKind,
    looks: f64,
) -> Result<Raster> {
    let path = path.as_ref();
    let (width, height, pixels) = match format {
        RasterFormat::Pgm => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            parse_pgm(&bytes).map_err(|m| Error::format(path, m))?
        }
        RasterFormat::Rawf32 => read_rawf32(path)?,
        RasterFormat::Csv => read_grid_csv(path)?,
    };
    Raster::new(width, height, pixels, model, looks).map_err(|e| match e {
        Error::Domain(m) => Error::format(path, m),
        other => other,
    })
}

/// Tokenizer over a PGM header, skipping whitespace and `#` comments.
struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PgmHeader<'_> {
    fn token(&mut self) -> std::result::Result<&str, String> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b'#') => {
                    while !matches!(self.bytes.get(self.pos), None | Some(b'\n' | b'\r')) {
                        self.pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
                None => return Err("unexpected end of PGM header".into()),
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| "non-ASCII PGM header".into())
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| format!("bad PGM {what} '{tok}'"))
    }
}

/// Parses a P2 or P5 graymap. Sample values are returned unscaled.
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    let mut header = PgmHeader { bytes, pos: 0 };
    let magic = header.token()?.to_string();
    if magic != "P2" && magic != "P5" {
        return Err(format!("unsupported PGM magic '{magic}'"));
    }
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("PGM dimensions must be positive, got {width}x{height}"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("PGM maxval {maxval} outside 1..=65535"));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| "PGM dimensions overflow".to_string())?;
    let mut pixels = Vec::with_capacity(count);
    if magic == "P2" {
        for _ in 0..count {
            let v = header.number("sample")?;
            if v > maxval {
                return Err(format!("PGM sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64);
        }
    } else {
        // Exactly one whitespace byte separates maxval from the raster.
        let data = bytes.get(header.pos + 1..).unwrap_or(&[]);
        let depth = if maxval < 256 { 1 } else { 2 };
        if data.len() < count * depth {
            return Err(format!(
                "PGM raster holds {} bytes, {}x{} needs {}",
                data.len(),
                width,
                height,
                count * depth
            ));
        }
        if depth == 1 {
            pixels.extend(data[..count].iter().map(|&b| b as f64));
        } else {
            pixels.extend(
                data[..2 * count]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64),
            );
        }
    }
    Ok((width, height, pixels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Dimensions {
    width: usize,
    height: usize,
}

/// Path of the JSON sidecar holding the dimensions of a raw float32 raster.
pub fn rawf32_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn read_rawf32(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let sidecar = rawf32_sidecar(path);
    let text = std::fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let dims: Dimensions =
        serde_json::from_str(&text).map_err(|e| Error::format(&sidecar, e.to_string()))?;
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 || Some(bytes.len() / 4) != dims.width.checked_mul(dims.height) {
        return Err(Error::format(
            path,
            format!(
                "sidecar says {}x{} but the file holds {} bytes",
                dims.width,
                dims.height,
                bytes.len()
            ),
        ));
    }
    let pixels = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok((dims.width, dims.height, pixels))
}

fn read_grid_csv(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut width = 0;
    let mut height = 0;
    let mut pixels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if height == 0 {
            width = record.len();
        }
        for field in record.iter() {
            let v = field.parse::<f64>().map_err(|_| {
                Error::format(path, format!("row {}: bad value '{field}'", height + 1))
            })?;
            pixels.push(v);
        }
        height += 1;
    }
    if height == 0 {
        return Err(Error::format(path, "empty raster"));
    }
    Ok((width, height, pixels))
}

pub fn write_raster(raster: &Raster, path: impl AsRef<Path>, format: RasterFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        RasterFormat::Csv => write_grid_csv(path, raster.width, &raster.pixels, |v| format!("{v:?}")),
        RasterFormat::Rawf32 => {
            let mut bytes = Vec::with_capacity(raster.pixels.len() * 4);
            for &p in &raster.pixels {
                bytes.extend_from_slice(&(p as f32).to_le_bytes());
            }
            std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
            let sidecar = rawf32_sidecar(path);
            let dims = Dimensions {
                width: raster.width,
                height: raster.height,
            };
            let json = serde_json::to_string(&dims).map_err(|e| Error::format(&sidecar, e.to_string()))?;
            std::fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))
        }
        RasterFormat::Pgm => {
            let max = raster.pixels.iter().cloned().fold(0.0_f64, f64::max);
            if max > 65535.0 || raster.pixels.iter().any(|p| p.fract() != 0.0) {
                return Err(Error::domain(
                    "PGM output requires integer pixels no larger than 65535",
                ));
            }
            let maxval = if max < 256.0 { 255 } else { 65535 };
            let samples: Vec<u16> = raster.pixels.iter().map(|&p| p as u16).collect();
            write_pgm(path, raster.width, raster.height, maxval, &samples)
        }
    }
}

fn write_grid_csv(
    path: &Path,
    width: usize,
    values: &[f64],
    fmt: impl Fn(f64) -> String,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_pgm(path: &Path, width: usize, height: usize, maxval: u16, samples: &[u16]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write!(out, "P5\n{width} {height}\n{maxval}\n").map_err(|e| Error::io(path, e))?;
    for &s in samples {
        let res = if maxval < 256 {
            out.write_all(&[s as u8])
        } else {
            out.write_all(&s.to_be_bytes())
        };
        res.map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Per-pixel roughness estimates. Border pixels and failed windows are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessMap {
    pub width: usize,
    pub height: usize,
    pub window: usize,
    pub estimator: EstimatorKind,
    pub alpha_floor: f64,
    pub alpha: Vec<Option<f64>>,
    pub gamma: Vec<Option<f64>>,
    pub n_failures: usize,
    pub elapsed: Duration,
}

impl RoughnessMap {
    pub fn alpha_at(&self, x: usize, y: usize) -> Option<f64> {
        self.alpha[y * self.width + x]
    }

    /// Whether the full window centered on `(x, y)` fits inside the raster.
    pub fn is_interior(&self, x: usize, y: usize) -> bool {
        let h = self.window / 2;
        x >= h && y >= h && x + h < self.width && y + h < self.height
    }

    pub fn interior_count(&self) -> usize {
        (self.width + 1 - self.window) * (self.height + 1 - self.window)
    }

    /// Alpha values with absent entries replaced by 0.
    pub fn alpha_or_zero(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.unwrap_or(0.0)).collect()
    }
}

pub fn roughness_map(
    raster: &Raster,
    window: usize,
    kind: EstimatorKind,
    parallelism: usize,
) -> Result<RoughnessMap> {
    roughness_map_with(raster, window, kind, parallelism, &EstimatorOptions::default())
}

pub fn roughness_map_with(
    raster: &Raster,
    window: usize,
    kind: EstimatorKind,
    parallelism: usize,
    options: &EstimatorOptions,
) -> Result<RoughnessMap> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::domain(format!("window must be odd and positive, got {window}")));
    }
    if window > raster.width.min(raster.height) {
        return Err(Error::domain(format!(
            "window {window} exceeds the {}x{} raster",
            raster.width, raster.height
        )));
    }
    let pool = thread_pool(parallelism)?;
    let (w, h, half) = (raster.width, raster.height, window / 2);
    let start = Instant::now();

    let rows: Vec<Vec<(Option<f64>, Option<f64>)>> = pool.install(|| {
        (0..h)
            .into_par_iter()
            .map(|y| {
                let mut row = vec![(None, None); w];
                if y < half || y + half >= h {
                    return Ok(row);
                }
                let mut buf = Vec::with_capacity(window * window);
                for (x, cell) in row.iter_mut().enumerate().take(w - half).skip(half) {
                    buf.clear();
                    for yy in y - half..=y + half {
                        let line = &raster.pixels[yy * w + x - half..=yy * w + x + half];
                        buf.extend(line.iter().copied().filter(|&p| p > 0.0));
                    }
                    if buf.len() < MIN_WINDOW_PIXELS {
                        continue;
                    }
                    let sample = Sample::new(buf.clone(), raster.model)?;
                    let r = estimate_alpha_with(&sample, raster.looks, raster.model, kind, options)?;
                    *cell = (r.alpha_hat, r.gamma_hat);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut alpha = Vec::with_capacity(w * h);
    let mut gamma = Vec::with_capacity(w * h);
    for row in rows {
        for (a, g) in row {
            alpha.push(a);
            gamma.push(g);
        }
    }
    let mut map = RoughnessMap {
        width: w,
        height: h,
        window,
        estimator: kind,
        alpha_floor: options.alpha_floor,
        alpha,
        gamma,
        n_failures: 0,
        elapsed: start.elapsed(),
    };
    map.n_failures = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| map.is_interior(x, y) && map.alpha_at(x, y).is_none())
        .count();
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MapFormat {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub n_failures: usize,
    pub elapsed_ns: u64,
    pub window: usize,
    pub estimator: EstimatorKind,
}

/// Path of the metadata file written next to a CSV map.
pub fn map_meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_map(map: &RoughnessMap, path: impl AsRef<Path>, format: MapFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        MapFormat::Csv => {
            write_grid_csv(path, map.width, &map.alpha_or_zero(), |v| format!("{v:?}"))?;
            let meta = MapMeta {
                n_failures: map.n_failures,
                elapsed_ns: map.elapsed.as_nanos() as u64,
                window: map.window,
                estimator: map.estimator,
            };
            let meta_path = map_meta_path(path);
            let json =
                serde_json::to_string_pretty(&meta).map_err(|e| Error::format(&meta_path, e.to_string()))?;
            std::fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
        }
        MapFormat::Pgm => {
            let floor = map.alpha_floor;
            let samples: Vec<u16> = map
                .alpha_or_zero()
                .iter()
                .map(|&a| {
                    let t = ((a - floor) / -floor).clamp(0.0, 1.0);
                    (t * 255.0).round() as u16
                })
                .collect();
            write_pgm(path, map.width, map.height, 255, &samples)
        }
    }
}

/// Reads a CSV map back as `(width, height, alpha)` with zeros for absent entries.
pub fn read_map_csv(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let path = path.as_ref();
    let (w, h, values) = read_grid_csv(path)?;
    if values.len() != w * h {
        return Err(Error::format(path, "ragged map rows"));
    }
    Ok((w, h, values))
}
