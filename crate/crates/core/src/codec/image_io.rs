//! Binary PGM (P5) and a raw `r x c` byte format with an 8-byte header
//! (`r` as u32 LE, then `c` as u32 LE).

use super::GrayImage;
use crate::error::{Error, Result};

pub const RAW_HEADER_LEN: usize = 8;

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedImage(msg.into())
}

/// Reads one whitespace-delimited header token, skipping `#` comments.
fn next_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' && data[*pos] != b'\r' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() && data[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(malformed("unexpected end of PGM header"));
    }
    Ok(&data[start..*pos])
}

fn parse_num(tok: &[u8], what: &str) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(format!("bad PGM {what}")))
}

/// Parses a binary PGM with `maxval <= 255`.
pub fn read_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    if next_token(data, &mut pos)? != b"P5" {
        return Err(malformed("not a binary PGM (P5)"));
    }
    let cols = parse_num(next_token(data, &mut pos)?, "width")?;
    let rows = parse_num(next_token(data, &mut pos)?, "height")?;
    let maxval = parse_num(next_token(data, &mut pos)?, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(malformed(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(malformed("missing raster"));
    }
    pos += 1;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let raster = data
        .get(pos..pos + n)
        .ok_or_else(|| malformed(format!("raster truncated: need {n} bytes")))?;
    if raster.iter().any(|&p| p as usize > maxval) {
        return Err(malformed("pixel exceeds maxval"));
    }
    GrayImage::new(rows, cols, raster.to_vec())
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_raw(data: &[u8]) -> Result<GrayImage> {
    if data.len() < RAW_HEADER_LEN {
        return Err(malformed("raw header truncated"));
    }
    let rows = u32::from_le_bytes(data[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
    let body = &data[RAW_HEADER_LEN..];
    if rows.checked_mul(cols) != Some(body.len()) {
        return Err(malformed(format!(
            "raw body has {} bytes, header says {rows}x{cols}",
            body.len()
        )));
    }
    GrayImage::new(rows, cols, body.to_vec())
}

pub fn write_raw(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + img.pixels().len());
    out.extend_from_slice(&(img.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(img.cols() as u32).to_le_bytes());
    out.extend_from_slice(img.pixels());
    out
}
