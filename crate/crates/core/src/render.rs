//! Deterministic tiled rasterisation of the parameter and dynamic planes.
//!
//! Every pixel is a pure function of its coordinates, so the image does not
//! depend on the number of threads or on tile scheduling. Output is binary PPM
//! with a `key=value` sidecar holding the render metadata.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{iterate_orbit_with, OrbitOutcome, OrbitSettings, Parameter, MAX_PERIOD};
use crate::error::{Error, Result};
use crate::parameter::{classify_parameter, Classification, ComponentKind, DEFAULT_BUDGET};
use crate::text::{format_complex, format_real, parse_complex};

pub const TILE: usize = 64;

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];
const GREY: Rgb = [160, 160, 160];
const GOLDEN_ANGLE: f64 = 137.507_764_050_037_85;

/// A rectangle of the plane sampled at pixel centers. Pixel `(0, 0)` is the
/// top-left corner; rows go down in the imaginary direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    pub width: f64,
    pub cols: usize,
    pub rows: usize,
}

impl Viewport {
    pub fn new(center: Complex64, width: f64, cols: usize, rows: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || cols == 0 || rows == 0 {
            return Err(Error::InvalidInput(format!(
                "viewport needs width > 0 and nonzero size, got width {width}, {cols}x{rows}"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidInput("viewport center must be finite".into()));
        }
        Ok(Viewport {
            center,
            width,
            cols,
            rows,
        })
    }

    pub fn square(center: Complex64, width: f64, pixels: usize) -> Result<Self> {
        Viewport::new(center, width, pixels, pixels)
    }

    pub fn pitch(&self) -> f64 {
        self.width / self.cols as f64
    }

    pub fn height(&self) -> f64 {
        self.pitch() * self.rows as f64
    }

    /// Offsets are symmetric about the center, so the pixel grid is exactly
    /// invariant under rotation by 180 degrees and under reflection.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let pitch = self.pitch();
        let dx = (col as f64 + 0.5 - self.cols as f64 / 2.0) * pitch;
        let dy = (row as f64 + 0.5 - self.rows as f64 / 2.0) * pitch;
        Complex64::new(self.center.re + dx, self.center.im - dy)
    }

    fn subpixel(&self, col: usize, row: usize, i: u32, j: u32, n: u32) -> Complex64 {
        let pitch = self.pitch();
        let fx = (i as f64 + 0.5) / n as f64;
        let fy = (j as f64 + 0.5) / n as f64;
        let dx = (col as f64 + fx - self.cols as f64 / 2.0) * pitch;
        let dy = (row as f64 + fy - self.rows as f64 / 2.0) * pitch;
        Complex64::new(self.center.re + dx, self.center.im - dy)
    }

    /// The viewport reflected across the real axis.
    pub fn conjugated(&self) -> Self {
        Viewport {
            center: self.center.conj(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Palette {
    /// Hue from the period, lightness from the component kind.
    #[default]
    Standard,
    /// White where an attracting cycle was found, black elsewhere.
    Mono,
}

impl fmt::Display for Palette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Palette::Standard => "standard",
            Palette::Mono => "mono",
        })
    }
}

impl FromStr for Palette {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Palette::Standard),
            "mono" => Ok(Palette::Mono),
            other => Err(Error::InvalidInput(format!("unknown palette {other:?}"))),
        }
    }
}

fn hsl(hue_deg: f64, s: f64, l: f64) -> Rgb {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let h = hue_deg.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let q = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

fn period_hue(period: usize) -> f64 {
    (period as f64 * GOLDEN_ANGLE).rem_euclid(360.0)
}

impl Palette {
    /// Color of a classified parameter.
    pub fn component_color(&self, period: usize, kind: ComponentKind) -> Rgb {
        match self {
            Palette::Mono => WHITE,
            Palette::Standard => match kind {
                ComponentKind::UnitDisk => GREY,
                ComponentKind::TwoCycles => hsl(period_hue(period), 0.7, 0.68),
                ComponentKind::SingleDoubled => hsl(period_hue(period), 0.7, 0.32),
            },
        }
    }

    pub fn classification_color(&self, c: &Classification) -> Rgb {
        match c.sample() {
            Some(s) => self.component_color(s.period, s.kind),
            None => BLACK,
        }
    }

    /// Color of a dynamic-plane outcome. Depends only on the period and the
    /// capture time, so a point and its negative always match.
    pub fn orbit_color(&self, outcome: &OrbitOutcome) -> Rgb {
        match (self, outcome) {
            (_, OrbitOutcome::Undetermined { .. }) => BLACK,
            (Palette::Mono, OrbitOutcome::Attracted { .. }) => WHITE,
            (Palette::Mono, OrbitOutcome::PrepoleHit { .. }) => BLACK,
            (Palette::Standard, OrbitOutcome::PrepoleHit { .. }) => WHITE,
            (Palette::Standard, OrbitOutcome::Attracted { cycle, steps }) => {
                let band = (steps / 4 % 6) as f64;
                hsl(period_hue(cycle.period), 0.65, 0.3 + 0.07 * band)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Iteration budget per orbit.
    pub budget: usize,
    pub palette: Palette,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Samples per pixel side; `1` samples pixel centers only.
    pub supersample: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            budget: DEFAULT_BUDGET,
            palette: Palette::Standard,
            threads: None,
            supersample: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub cols: usize,
    pub rows: usize,
    /// Row-major.
    pub pixels: Vec<Rgb>,
    pub metadata: BTreeMap<String, String>,
}

impl RasterImage {
    pub fn new(cols: usize, rows: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if pixels.len() != cols * rows {
            return Err(Error::InvalidInput(format!(
                "{} pixels for a {cols}x{rows} image",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            cols,
            rows,
            pixels,
            metadata: BTreeMap::new(),
        })
    }

    pub fn get(&self, col: usize, row: usize) -> Rgb {
        self.pixels[row * self.cols + col]
    }

    pub fn rotated_half_turn(&self) -> RasterImage {
        let mut pixels = self.pixels.clone();
        pixels.reverse();
        RasterImage {
            pixels,
            ..self.clone()
        }
    }

    pub fn flipped_vertically(&self) -> RasterImage {
        let pixels = self
            .pixels
            .chunks(self.cols)
            .rev()
            .flatten()
            .copied()
            .collect();
        RasterImage {
            pixels,
            ..self.clone()
        }
    }
}

fn render_with<F>(vp: &Viewport, opts: &RenderOptions, pixel: F) -> Result<Vec<Rgb>>
where
    F: Fn(Complex64) -> Rgb + Sync,
{
    if opts.supersample == 0 {
        return Err(Error::InvalidInput("supersample must be at least 1".into()));
    }
    let tiles: Vec<(usize, usize)> = (0..vp.rows)
        .step_by(TILE)
        .flat_map(|r| (0..vp.cols).step_by(TILE).map(move |c| (r, c)))
        .collect();
    let n = opts.supersample;
    let shade = |col: usize, row: usize| -> Rgb {
        if n == 1 {
            return pixel(vp.pixel_center(col, row));
        }
        let mut acc = [0u32; 3];
        for j in 0..n {
            for i in 0..n {
                let c = pixel(vp.subpixel(col, row, i, j, n));
                for k in 0..3 {
                    acc[k] += c[k] as u32;
                }
            }
        }
        let count = n * n;
        acc.map(|v| ((v + count / 2) / count) as u8)
    };
    let run = || -> Vec<(usize, usize, Vec<Rgb>)> {
        tiles
            .par_iter()
            .map(|&(r0, c0)| {
                let r1 = (r0 + TILE).min(vp.rows);
                let c1 = (c0 + TILE).min(vp.cols);
                let mut buf = Vec::with_capacity((r1 - r0) * (c1 - c0));
                for row in r0..r1 {
                    for col in c0..c1 {
                        buf.push(shade(col, row));
                    }
                }
                (r0, c0, buf)
            })
            .collect()
    };
    let done = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut pixels = vec![BLACK; vp.cols * vp.rows];
    for (r0, c0, buf) in done {
        let w = (c0 + TILE).min(vp.cols) - c0;
        for (k, row) in buf.chunks(w).enumerate() {
            let start = (r0 + k) * vp.cols + c0;
            pixels[start..start + w].copy_from_slice(row);
        }
    }
    Ok(pixels)
}

fn base_metadata(kind: &str, vp: &Viewport, opts: &RenderOptions) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("plane".into(), kind.into());
    m.insert("center".into(), format_complex(vp.center));
    m.insert("width".into(), format_real(vp.width));
    m.insert("cols".into(), vp.cols.to_string());
    m.insert("rows".into(), vp.rows.to_string());
    m.insert("budget".into(), opts.budget.to_string());
    m.insert("palette".into(), opts.palette.to_string());
    m.insert("supersample".into(), opts.supersample.to_string());
    m.insert("version.tandyn-core".into(), env!("CARGO_PKG_VERSION").into());
    m
}

/// Color each parameter by its hyperbolic component. `λ = 0` is background.
pub fn render_parameter_plane(vp: &Viewport, opts: &RenderOptions) -> Result<RasterImage> {
    let palette = opts.palette;
    let budget = opts.budget;
    let pixels = render_with(vp, opts, |lam| match Parameter::new(lam) {
        Ok(p) => palette.classification_color(&classify_parameter(p, budget)),
        Err(_) => BLACK,
    })?;
    let mut img = RasterImage::new(vp.cols, vp.rows, pixels)?;
    img.metadata = base_metadata("parameter", vp, opts);
    Ok(img)
}

/// Color each point by the fate of its orbit under `f_λ`.
pub fn render_dynamic_plane(
    lambda: Parameter,
    vp: &Viewport,
    opts: &RenderOptions,
) -> Result<RasterImage> {
    let palette = opts.palette;
    let settings = OrbitSettings {
        max_iter: opts.budget,
        max_period: MAX_PERIOD,
        extend_once: false,
    };
    let pixels = render_with(vp, opts, |z| {
        palette.orbit_color(&iterate_orbit_with(lambda, z, &settings, None))
    })?;
    let mut img = RasterImage::new(vp.cols, vp.rows, pixels)?;
    img.metadata = base_metadata("dynamic", vp, opts);
    img.metadata.insert("lambda".into(), format_complex(lambda.value()));
    Ok(img)
}

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for p in &img.pixels {
        out.extend_from_slice(p);
    }
    out
}

/// Parse a binary PPM with maxval 255. Comments are not supported.
pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage> {
    let bad = |why: &str| Error::InvalidInput(format!("bad PPM: {why}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P6" {
        return Err(bad("magic"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("dimension"));
    let (cols, rows) = (num(fields[1])?, num(fields[2])?);
    if fields[3] != "255" {
        return Err(bad("maxval must be 255"));
    }
    let body = bytes.get(pos..).ok_or_else(|| bad("missing raster"))?;
    if body.len() != cols * rows * 3 {
        return Err(bad("raster length"));
    }
    let pixels = body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    RasterImage::new(cols, rows, pixels)
}

/// Sorted `key=value` lines, each LF terminated.
pub fn encode_sidecar(metadata: &BTreeMap<String, String>) -> String {
    metadata.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn parse_sidecar(text: &str) -> Result<BTreeMap<String, String>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::InvalidInput(format!("bad sidecar line {l:?}")))
        })
        .collect()
}

pub fn sidecar_path(image: &Path) -> PathBuf {
    let mut s = image.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Write `path` and `path.meta`.
pub fn write_image(path: &Path, img: &RasterImage) -> std::io::Result<()> {
    fs::write(path, encode_ppm(img))?;
    fs::write(sidecar_path(path), encode_sidecar(&img.metadata))
}

pub fn read_image(path: &Path) -> Result<RasterImage> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut img = decode_ppm(&fs::read(path).map_err(io)?)?;
    let meta = sidecar_path(path);
    if meta.exists() {
        img.metadata = parse_sidecar(&fs::read_to_string(&meta).map_err(io)?)?;
    }
    Ok(img)
}

/// Viewport recorded in an image's metadata.
pub fn viewport_from_metadata(meta: &BTreeMap<String, String>) -> Result<Viewport> {
    let get = |k: &str| {
        meta.get(k)
            .ok_or_else(|| Error::InvalidInput(format!("metadata lacks {k}")))
    };
    let num = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad {k}")))
    };
    let width: f64 = get("width")?
        .parse()
        .map_err(|_| Error::InvalidInput("bad width".into()))?;
    Viewport::new(parse_complex(get("center")?)?, width, num("cols")?, num("rows")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parameter::ComponentKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pixel_grid() {
        let vp = Viewport::new(c(1.0, -2.0), 4.0, 4, 2).unwrap();
        assert_eq!(vp.pitch(), 1.0);
        assert_eq!(vp.pixel_center(0, 0), c(-0.5, -1.5));
        assert_eq!(vp.pixel_center(3, 1), c(2.5, -2.5));
        let one = Viewport::square(c(0.5, 0.0), 1.0, 1).unwrap();
        assert_eq!(one.pixel_center(0, 0), c(0.5, 0.0));
        assert!(Viewport::new(c(0.0, 0.0), 0.0, 1, 1).is_err());
        assert!(Viewport::new(c(0.0, 0.0), 1.0, 0, 1).is_err());
    }

    #[test]
    fn ppm_examples() {
        let img = RasterImage::new(1, 1, vec![WHITE]).unwrap();
        assert_eq!(encode_ppm(&img), b"P6\n1 1\n255\n\xff\xff\xff".to_vec());
        let img = RasterImage::new(2, 1, vec![BLACK, WHITE]).unwrap();
        let bytes = encode_ppm(&img);
        assert_eq!(bytes, b"P6\n2 1\n255\n\x00\x00\x00\xff\xff\xff".to_vec());
        assert_eq!(decode_ppm(&bytes).unwrap(), img);
        assert!(decode_ppm(b"P5\n1 1\n255\n\x00").is_err());
        assert!(decode_ppm(b"P6\n2 1\n255\n\x00\x00\x00").is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let mut m = BTreeMap::new();
        m.insert("width".to_string(), "12".to_string());
        m.insert("center".to_string(), "0+0i".to_string());
        let text = encode_sidecar(&m);
        assert_eq!(text, "center=0+0i\nwidth=12\n");
        assert_eq!(parse_sidecar(&text).unwrap(), m);
        assert!(parse_sidecar("novalue\n").is_err());
    }

    #[test]
    fn single_pixel_parameter_render() {
        let vp = Viewport::square(c(0.5, 0.0), 0.1, 1).unwrap();
        let img = render_parameter_plane(&vp, &RenderOptions::default()).unwrap();
        assert_eq!(
            img.pixels,
            vec![Palette::Standard.component_color(1, ComponentKind::UnitDisk)]
        );
        assert_eq!(viewport_from_metadata(&img.metadata).unwrap(), vp);
    }

    #[test]
    fn zero_parameter_is_background() {
        let vp = Viewport::square(c(0.0, 0.0), 1.0, 1).unwrap();
        let img = render_parameter_plane(&vp, &RenderOptions::default()).unwrap();
        assert_eq!(img.pixels, vec![BLACK]);
    }

    #[test]
    fn palette_distinguishes_kinds() {
        let p = Palette::Standard;
        let two = p.component_color(2, ComponentKind::TwoCycles);
        let dbl = p.component_color(2, ComponentKind::SingleDoubled);
        assert_ne!(two, dbl);
        assert_ne!(p.component_color(1, ComponentKind::TwoCycles), two);
        assert_ne!(two, BLACK);
        assert_eq!("mono".parse::<Palette>().unwrap(), Palette::Mono);
    }

    #[test]
    fn small_dynamic_render_is_symmetric_and_thread_independent() {
        let lam = Parameter::new(c(1.3, 0.6)).unwrap();
        let vp = Viewport::square(c(0.0, 0.0), 6.0, 70).unwrap();
        let one = RenderOptions {
            budget: 300,
            threads: Some(1),
            ..RenderOptions::default()
        };
        let many = RenderOptions {
            threads: Some(4),
            ..one.clone()
        };
        let a = render_dynamic_plane(lam, &vp, &one).unwrap();
        let b = render_dynamic_plane(lam, &vp, &many).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pixels, a.rotated_half_turn().pixels);
    }

    #[test]
    fn supersampling_averages() {
        let vp = Viewport::square(c(0.5, 0.0), 0.01, 2).unwrap();
        let opts = RenderOptions {
            supersample: 3,
            ..RenderOptions::default()
        };
        let img = render_parameter_plane(&vp, &opts).unwrap();
        let grey = Palette::Standard.component_color(1, ComponentKind::UnitDisk);
        assert!(img.pixels.iter().all(|&p| p == grey));
        let zero = RenderOptions {
            supersample: 0,
            ..RenderOptions::default()
        };
        assert!(render_parameter_plane(&vp, &zero).is_err());
    }
}
