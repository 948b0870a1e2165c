//! Readers and writers for the files the experiment runner emits: residual
//! histories, field dumps and grayscale rasters.

use crate::error::{Error, Result};
use std::io::Write;

/// 8-bit grayscale image, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl GrayImage {
    /// Scales `values` (row-major, row 0 at the bottom) so the maximum maps
    /// to 255. An all-zero field gives a black image.
    pub fn from_field(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("raster values must be finite and nonnegative".into()));
        }
        let max = values.iter().fold(0.0f64, |a, b| a.max(*b));
        let mut pixels = Vec::with_capacity(values.len());
        for row in (0..height).rev() {
            for v in &values[row * width..(row + 1) * width] {
                let p = if max > 0.0 { (v / max * 255.0).round() } else { 0.0 };
                pixels.push(p as u16);
            }
        }
        Ok(Self { width, height, maxval: 255, pixels })
    }

    /// Plain (ASCII) PGM.
    pub fn write_pgm(&self, mut w: impl Write) -> Result<()> {
        let mut buf = format!("P2\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.pixels.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            buf.push_str(&line.join(" "));
            buf.push('\n');
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Plain PGM with `#` comments.
    pub fn parse_pgm(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let magic = tokens.next().ok_or_else(|| Error::Parse("empty PGM".into()))?;
        if magic != "P2" {
            return Err(Error::Parse(format!("expected plain PGM magic P2, found {magic:?}")));
        }
        let mut header = |what: &str| -> Result<usize> {
            let t = tokens.next().ok_or_else(|| Error::Parse(format!("PGM header ends before {what}")))?;
            t.parse().map_err(|_| Error::Parse(format!("PGM {what} {t:?} is not an integer")))
        };
        let width = header("width")?;
        let height = header("height")?;
        let maxval = header("maxval")?;
        if maxval == 0 || maxval > u16::MAX as usize {
            return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
        }
        let pixels = tokens
            .map(|t| match t.parse::<u16>() {
                Ok(p) if p as usize <= maxval => Ok(p),
                _ => Err(Error::Parse(format!("PGM pixel {t:?} invalid for maxval {maxval}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if pixels.len() != width * height {
            return Err(Error::Parse(format!("PGM has {} pixels, header says {}", pixels.len(), width * height)));
        }
        Ok(Self { width, height, maxval: maxval as u16, pixels })
    }
}

fn data_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines.map(|(i, l)| (i + 1, l))),
        Some((_, h)) => Err(Error::Parse(format!("expected header {header:?}, found {:?}", h.trim()))),
        None => Err(Error::Parse("empty CSV".into())),
    }
}

fn field<T: std::str::FromStr>(cell: Option<&str>, line: usize, name: &str) -> Result<T> {
    let cell = cell.ok_or_else(|| Error::Parse(format!("line {line}: missing column {name}")))?.trim();
    cell.parse().map_err(|_| Error::Parse(format!("line {line}: {name} {cell:?} is not a number")))
}

/// Parses `iteration,relative_residual` rows. Iterations must count up from 0.
pub fn parse_residual_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, row) in data_lines(text, "iteration,relative_residual")? {
        let mut cells = row.split(',');
        let k: usize = field(cells.next(), line, "iteration")?;
        let r: f64 = field(cells.next(), line, "relative_residual")?;
        if cells.next().is_some() {
            return Err(Error::Parse(format!("line {line}: too many columns")));
        }
        if k != out.len() {
            return Err(Error::Parse(format!("line {line}: iteration {k} out of sequence")));
        }
        out.push(r);
    }
    Ok(out)
}

/// One `x,y,re,im` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub re: f64,
    pub im: f64,
}

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldSample>> {
    let mut out = Vec::new();
    for (line, row) in data_lines(text, "x,y,re,im")? {
        let mut cells = row.split(',');
        let s = FieldSample {
            x: field(cells.next(), line, "x")?,
            y: field(cells.next(), line, "y")?,
            re: field(cells.next(), line, "re")?,
            im: field(cells.next(), line, "im")?,
        };
        if cells.next().is_some() {
            return Err(Error::Parse(format!("line {line}: too many columns")));
        }
        out.push(s);
    }
    Ok(out)
}
