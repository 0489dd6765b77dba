//! Lossless image codecs: PNG (through the `png` crate) and binary PPM/PGM.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use super::{Channels, Image};
use crate::error::{Error, Result};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Reads a PNG, binary PPM (P6) or binary PGM (P5) file.
///
/// The format is sniffed from the file contents, not the extension.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Writes `img` losslessly. The extension picks the codec: `.ppm` needs an
/// RGB image, `.pgm` a gray one, anything else is written as PNG.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("ppm") => encode_pnm(img, Channels::Rgb)?,
        Some("pgm") => encode_pnm(img, Channels::Gray)?,
        _ => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") || bytes.starts_with(b"P5") {
        decode_pnm(bytes)
    } else {
        Err(Error::Format("unrecognised image signature".into()))
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("png: image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    buf.truncate(info.buffer_size());

    let (w, h) = (info.width, info.height);
    match info.color_type {
        png::ColorType::Grayscale => Image::new(w, h, Channels::Gray, buf),
        png::ColorType::Rgb => Image::new(w, h, Channels::Rgb, buf),
        png::ColorType::Rgba => Image::new(w, h, Channels::Rgba, buf),
        png::ColorType::GrayscaleAlpha => {
            let data = buf
                .chunks_exact(2)
                .flat_map(|px| [px[0], px[0], px[0], px[1]])
                .collect();
            Image::new(w, h, Channels::Rgba, data)
        }
        // EXPAND turns palettes into RGB(A).
        png::ColorType::Indexed => Err(Error::Format("png: unexpanded palette".into())),
    }
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width(), img.height());
        encoder.set_color(match img.channels() {
            Channels::Gray => png::ColorType::Grayscale,
            Channels::Rgb => png::ColorType::Rgb,
            Channels::Rgba => png::ColorType::Rgba,
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Format(format!("png: {e}")))?;
        writer
            .write_image_data(img.data())
            .map_err(|e| Error::Format(format!("png: {e}")))?;
    }
    Ok(out)
}

fn encode_pnm(img: &Image, want: Channels) -> Result<Vec<u8>> {
    if img.channels() != want {
        return Err(Error::Format(format!(
            "cannot write {:?} image as {}",
            img.channels(),
            if want == Channels::Rgb { "PPM" } else { "PGM" }
        )));
    }
    let magic = if want == Channels::Rgb { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    Ok(out)
}

/// Cursor over a PNM header: whitespace-separated ASCII tokens with `#`
/// comments running to end of line.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("pnm: missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("pnm: bad {what}")))
    }
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = match &bytes[..2] {
        b"P6" => Channels::Rgb,
        b"P5" => Channels::Gray,
        _ => return Err(Error::Format("pnm: unsupported magic".into())),
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    let width = rd.number("width")?;
    let height = rd.number("height")?;
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("pnm: maxval {maxval} unsupported")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(rd.pos) {
        Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
        _ => return Err(Error::Format("pnm: header not terminated".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::Format("pnm: zero dimension".into()));
    }
    let need = width as usize * height as usize * channels.count();
    let payload = &bytes[rd.pos..];
    if payload.len() < need {
        return Err(Error::Format(format!(
            "pnm: truncated payload ({} of {need} bytes)",
            payload.len()
        )));
    }
    Image::new(width, height, channels, payload[..need].to_vec())
}
