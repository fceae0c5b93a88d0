//! Binary PGM (P5) / PPM (P6) frame I/O with 8-bit samples.

use std::io::{Read, Write};
use std::path::Path;

use super::{Image, Tensor3};
use crate::{Error, Result};

fn parse_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line: 1, msg: msg.into() }
}

/// Decodes a P5 (1 channel) or P6 (3 channel) image, scaling samples to `[0, 1]`.
pub fn decode(bytes: &[u8], name: &str) -> Result<Image> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(name, "truncated header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| parse_err(name, "non-ascii header"))?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let channels = match tokens[0] {
        "P5" => 1,
        "P6" => 3,
        other => return Err(parse_err(name, format!("unsupported magic {:?}", other))),
    };
    let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(name, format!("bad header field {:?}", s)));
    let (width, height, maxval) = (num(tokens[1])?, num(tokens[2])?, num(tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(name, format!("maxval {} not supported", maxval)));
    }
    let n = width * height * channels;
    let raster = bytes.get(pos..pos + n).ok_or_else(|| parse_err(name, "truncated raster"))?;
    let scale = maxval as f64;
    Tensor3::from_vec(height, width, channels, raster.iter().map(|&b| b as f64 / scale).collect())
}

pub fn encode(img: &Image) -> Result<Vec<u8>> {
    let magic = match img.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::ShapeMismatch(format!("cannot encode {} channel image", c))),
    };
    let mut out = format!("{}\n{} {}\n255\n", magic, img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    Ok(out)
}

pub fn read(path: &Path) -> Result<Image> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, &path.display().to_string())
}

pub fn write(path: &Path, img: &Image) -> Result<()> {
    let bytes = encode(img)?;
    std::fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}
