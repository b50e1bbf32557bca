//! Portable Float Map IO for 3-channel raw images.
//!
//! Only the color variant (`PF` header) is supported. Scanlines are stored
//! bottom-to-top per the format convention; a negative scale marks
//! little-endian payloads, which is what we write.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A 3-channel 32-bit float image in row-major top-down pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<[f32; 3]>,
}

impl RawImage {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[f32; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage(format!(
                "image dimensions {width}x{height} must be positive"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::MalformedImage(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(RawImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.pixels
    }
}

fn read_header_token(reader: &mut impl Read) -> Result<String> {
    // Headers are whitespace-separated ASCII tokens.
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        reader.read_exact(&mut byte)?;
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(byte[0]);
        if token.len() > 32 {
            return Err(Error::MalformedImage("header token too long".into()));
        }
    }
    String::from_utf8(token).map_err(|_| Error::MalformedImage("non-ASCII header".into()))
}

/// Read a color PFM file.
pub fn read_pfm(path: &Path) -> Result<RawImage> {
    let mut reader = BufReader::new(File::open(path)?);

    let magic = read_header_token(&mut reader)?;
    match magic.as_str() {
        "PF" => {}
        "Pf" => {
            return Err(Error::MalformedImage(
                "grayscale PFM not supported: 3-channel required".into(),
            ))
        }
        other => {
            return Err(Error::MalformedImage(format!(
                "bad magic {other:?}, expected PF"
            )))
        }
    }

    let width: usize = read_header_token(&mut reader)?
        .parse()
        .map_err(|e| Error::MalformedImage(format!("bad width: {e}")))?;
    let height: usize = read_header_token(&mut reader)?
        .parse()
        .map_err(|e| Error::MalformedImage(format!("bad height: {e}")))?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage(format!(
            "image dimensions {width}x{height} must be positive"
        )));
    }
    let scale: f32 = read_header_token(&mut reader)?
        .parse()
        .map_err(|e| Error::MalformedImage(format!("bad scale: {e}")))?;
    let little_endian = scale < 0.0;

    let mut payload = vec![0u8; width * height * 3 * 4];
    reader
        .read_exact(&mut payload)
        .map_err(|_| Error::MalformedImage("truncated pixel payload".into()))?;

    let mut pixels = vec![[0.0f32; 3]; width * height];
    for (i, chunk) in payload.chunks_exact(12).enumerate() {
        // Scanlines run bottom-to-top.
        let row = height - 1 - i / width;
        let col = i % width;
        let mut px = [0.0f32; 3];
        for (c, b) in chunk.chunks_exact(4).enumerate() {
            let bytes = [b[0], b[1], b[2], b[3]];
            px[c] = if little_endian {
                f32::from_le_bytes(bytes)
            } else {
                f32::from_be_bytes(bytes)
            };
        }
        pixels[row * width + col] = px;
    }
    RawImage::from_pixels(width, height, pixels)
}

/// Write a color PFM file (little-endian payload, scale -1).
pub fn write_pfm(image: &RawImage, path: &Path) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write!(writer, "PF\n{} {}\n-1.0\n", image.width, image.height)?;
    for row in (0..image.height).rev() {
        for col in 0..image.width {
            let px = image.pixels[row * image.width + col];
            for c in px {
                writer.write_all(&c.to_le_bytes())?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}
