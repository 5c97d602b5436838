//! 8-bit rasters and binary Netpbm I/O (P5 grayscale, P6 RGB, maxval 255).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, fill: u8) -> Self {
        assert!(channels == 1 || channels == 3, "1 or 3 channels");
        Self {
            width,
            height,
            channels,
            data: vec![fill; width as usize * height as usize * channels as usize],
        }
    }

    pub fn from_raw(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!("{channels} channels")));
        }
        if data.len() != width as usize * height as usize * channels as usize {
            return Err(Error::InvalidInput(format!(
                "raster buffer has {} bytes, expected {}",
                data.len(),
                width as usize * height as usize * channels as usize
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    /// Luma (BT.601 integer weights) for RGB, identity for gray.
    pub fn to_gray(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| ((77 * p[0] as u32 + 150 * p[1] as u32 + 29 * p[2] as u32 + 128) >> 8) as u8)
            .collect();
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Copy of the integer region `[x, x+w) × [y, y+h)`, clipped to the image.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Raster {
        let x1 = (x + w).min(self.width);
        let y1 = (y + h).min(self.height);
        let (cw, ch) = (x1.saturating_sub(x), y1.saturating_sub(y));
        let c = self.channels as usize;
        let mut out = Vec::with_capacity(cw as usize * ch as usize * c);
        for row in y..y1 {
            let o = self.offset(x, row);
            out.extend_from_slice(&self.data[o..o + cw as usize * c]);
        }
        Raster {
            width: cw,
            height: ch,
            channels: self.channels,
            data: out,
        }
    }

    pub fn read_pnm(path: impl AsRef<Path>) -> Result<Raster> {
        let path = path.as_ref();
        let bytes = std::fs::read(path)?;
        decode_pnm(&bytes).map_err(|message| Error::Format {
            path: path.to_owned(),
            message,
        })
    }

    pub fn write_pnm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(&self.encode_pnm())?;
        w.flush()?;
        Ok(())
    }

    /// P5 for one channel, P6 for three.
    pub fn encode_pnm(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }
}

/// Parse a binary P5/P6 image. Header comments (`#` to end of line) are skipped.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<Raster, String> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err("not a binary PGM (P5) or PPM (P6) file".into()),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("expected a number at byte {start}"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|e| format!("bad header number: {e}"))?;
    }
    // Exactly one whitespace byte separates the header from the samples.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("missing whitespace after maxval".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval} (only 255)"));
    }
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    let need = width as usize * height as usize * channels as usize;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| format!("expected {need} sample bytes, found {}", bytes.len() - pos))?
        .to_vec();
    Ok(Raster {
        width,
        height,
        channels,
        data,
    })
}
