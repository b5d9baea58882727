//! Raster types shared by the renderer, completers and metrics, plus their
//! file codecs: 8-bit PNG for frames and masks, little-endian PFM for depth.

use std::io::Cursor;
use std::path::Path;

#[derive(thiserror::Error, Debug)]
pub enum ImageError {
    #[error("{what}: expected {expected} values, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("png: {0}")]
    Png(String),
    #[error("pfm: {0}")]
    Pfm(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn check_len(what: &'static str, width: u32, height: u32, actual: usize) -> Result<(), ImageError> {
    let expected = width as usize * height as usize;
    if expected != actual {
        return Err(ImageError::Shape {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Row-major RGB image with channels in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[f32; 3]>,
}

impl RgbImage {
    pub fn black(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![[0.0; 3]; width as usize * height as usize],
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [f32; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<[f32; 3]>) -> Result<Self, ImageError> {
        check_len("rgb image", width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[f32; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [f32; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [f32; 3]) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = rgb;
    }

    /// Bitwise equality, distinguishing e.g. -0.0 from 0.0.
    pub fn bit_eq(&self, other: &RgbImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .pixels
                .iter()
                .zip(&other.pixels)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()))
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.map(channel_to_u8))
            .collect()
    }

    pub fn from_rgb8(width: u32, height: u32, data: &[u8]) -> Result<Self, ImageError> {
        check_len("rgb8 buffer", width, height, data.len() / 3)?;
        if data.len() % 3 != 0 {
            return Err(ImageError::Png("rgb8 buffer length not a multiple of 3".into()));
        }
        let pixels = data
            .chunks_exact(3)
            .map(|c| [u8_to_channel(c[0]), u8_to_channel(c[1]), u8_to_channel(c[2])])
            .collect();
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image as it would come back from an 8-bit PNG round trip.
    pub fn quantized(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|p| p.map(|c| u8_to_channel(channel_to_u8(c))))
                .collect(),
        }
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, ImageError> {
        encode_png(self.width, self.height, png::ColorType::Rgb, &self.to_rgb8())
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let (w, h, rgb) = decode_png_rgb8(bytes)?;
        Self::from_rgb8(w, h, &rgb)
    }

    pub fn write_png(&self, path: &Path) -> Result<(), ImageError> {
        write_file(path, &self.encode_png()?)
    }

    pub fn read_png(path: &Path) -> Result<Self, ImageError> {
        Self::decode_png(&read_file(path)?)
    }
}

pub fn channel_to_u8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn u8_to_channel(c: u8) -> f32 {
    c as f32 / 255.0
}

/// Per-pixel camera depth. Uncovered pixels hold `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl DepthMap {
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            values: vec![f32::INFINITY; width as usize * height as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<f32>) -> Result<Self, ImageError> {
        check_len("depth map", width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        &mut self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn bit_eq(&self, other: &DepthMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Grayscale PFM, little-endian, rows stored bottom to top. `+∞` is written
    /// as 0.0 and read back as `+∞`.
    pub fn encode_pfm(&self) -> Vec<u8> {
        let mut out = format!("Pf\n{} {}\n-1.0\n", self.width, self.height).into_bytes();
        out.reserve(self.values.len() * 4);
        let w = self.width as usize;
        for row in (0..self.height as usize).rev() {
            for &d in &self.values[row * w..(row + 1) * w] {
                let stored = if d.is_finite() { d } else { 0.0 };
                out.extend_from_slice(&stored.to_le_bytes());
            }
        }
        out
    }

    pub fn decode_pfm(bytes: &[u8]) -> Result<Self, ImageError> {
        let bad = |m: &str| ImageError::Pfm(m.to_string());
        // Header is three whitespace-terminated tokens after the magic line.
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
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
        }
        // exactly one whitespace byte separates the header from the data
        pos += 1;
        if fields[0] != "Pf" {
            return Err(bad("expected grayscale 'Pf' magic"));
        }
        let width: u32 = fields[1].parse().map_err(|_| bad("bad width"))?;
        let height: u32 = fields[2].parse().map_err(|_| bad("bad height"))?;
        let scale: f32 = fields[3].parse().map_err(|_| bad("bad scale"))?;
        let little = scale < 0.0;
        let n = width as usize * height as usize;
        let data = bytes.get(pos..).unwrap_or(&[]);
        if data.len() != n * 4 {
            return Err(bad(&format!("expected {} data bytes, got {}", n * 4, data.len())));
        }
        let mut values = vec![0.0f32; n];
        let w = width as usize;
        for (k, chunk) in data.chunks_exact(4).enumerate() {
            let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
            let d = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
            let row = height as usize - 1 - k / w;
            values[row * w + k % w] = if d == 0.0 { f32::INFINITY } else { d };
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn write_pfm(&self, path: &Path) -> Result<(), ImageError> {
        write_file(path, &self.encode_pfm())
    }

    pub fn read_pfm(path: &Path) -> Result<Self, ImageError> {
        Self::decode_pfm(&read_file(path)?)
    }
}

/// Binary coverage mask: 1 marks a hole (nothing rendered), 0 a covered pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleMask {
    width: u32,
    height: u32,
    values: Vec<u8>,
}

impl HoleMask {
    pub fn all_holes(width: u32, height: u32) -> Self {
        Self::filled(width, height, 1)
    }

    pub fn no_holes(width: u32, height: u32) -> Self {
        Self::filled(width, height, 0)
    }

    fn filled(width: u32, height: u32, v: u8) -> Self {
        Self {
            width,
            height,
            values: vec![v; width as usize * height as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<u8>) -> Result<Self, ImageError> {
        check_len("hole mask", width, height, values.len())?;
        if let Some(bad) = values.iter().find(|&&v| v > 1) {
            return Err(ImageError::Png(format!("mask value {bad} is not binary")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn is_hole(&self, x: u32, y: u32) -> bool {
        self.values[y as usize * self.width as usize + x as usize] == 1
    }

    pub fn set(&mut self, x: u32, y: u32, hole: bool) {
        let w = self.width as usize;
        self.values[y as usize * w + x as usize] = hole as u8;
    }

    pub fn hole_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    /// 8-bit grayscale PNG, holes as 255.
    pub fn encode_png(&self) -> Result<Vec<u8>, ImageError> {
        let data: Vec<u8> = self.values.iter().map(|&v| v * 255).collect();
        encode_png(self.width, self.height, png::ColorType::Grayscale, &data)
    }

    /// Any nonzero gray level is read as a hole.
    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let (w, h, rgb) = decode_png_rgb8(bytes)?;
        let values = rgb.chunks_exact(3).map(|c| (c[0] > 0) as u8).collect();
        Self::from_values(w, h, values)
    }

    pub fn write_png(&self, path: &Path) -> Result<(), ImageError> {
        write_file(path, &self.encode_png()?)
    }

    pub fn read_png(path: &Path) -> Result<Self, ImageError> {
        Self::decode_png(&read_file(path)?)
    }
}

// Pinned encoder settings: fixed compression and filter, no ancillary chunks,
// so identical pixels always give identical bytes.
fn encode_png(width: u32, height: u32, color: png::ColorType, data: &[u8]) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Balanced);
        enc.set_filter(png::Filter::Adaptive);
        let mut writer = enc.write_header().map_err(|e| ImageError::Png(e.to_string()))?;
        writer
            .write_image_data(data)
            .map_err(|e| ImageError::Png(e.to_string()))?;
        writer.finish().map_err(|e| ImageError::Png(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes any 8-bit PNG to packed RGB (alpha dropped, gray replicated).
fn decode_png_rgb8(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), ImageError> {
    let err = |e: png::DecodingError| ImageError::Png(e.to_string());
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = dec.read_info().map_err(err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Png("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(err)?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width, info.height);
    let rgb = match info.color_type {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|c| [c[0], c[1], c[2]]).collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|c| [c[0], c[0], c[0]]).collect(),
        png::ColorType::Indexed => return Err(ImageError::Png("unexpanded palette".into())),
    };
    Ok((w, h, rgb))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ImageError> {
    std::fs::write(path, bytes).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, ImageError> {
    std::fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })
}
