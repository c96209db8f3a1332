//! Grayscale image <-> field-element stream transform.
//!
//! Each row is scanned by a window of `t` consecutive pixels that moves one
//! pixel at a time and wraps around to the start of the row, so a row of
//! `c` pixels yields `c` windows and every pixel sits in `t` of them. A
//! window packs its pixels big-endian: the first pixel is the most
//! significant byte.
//!
//! Decoding reads every pixel from the window in which it is the second
//! pixel. Small additive noise can only carry into or borrow from that byte,
//! so its circular error stays within one grey level.

mod image_io;

pub use image_io::{read_pgm, read_raw, write_pgm, write_raw, RAW_HEADER_LEN};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::mkmr::MessageMatrix;

/// 8-bit grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::MalformedImage(format!("empty image {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::MalformedImage(format!(
                "{} pixels for a {rows}x{cols} image",
                pixels.len()
            )));
        }
        Ok(GrayImage { rows, cols, pixels })
    }

    /// Builds an image from a per-pixel function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let pixels = (0..rows)
            .flat_map(|y| (0..cols).map(move |x| (y, x)))
            .map(|(y, x)| f(y, x))
            .collect();
        Self::new(rows, cols, pixels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.pixels[y * self.cols + x]
    }
}

/// Window values for an `r x c` image: `r * c` elements, row by row, with
/// the window starting at column 0, 1, ..., c - 1 in each row.
///
/// A freshly encoded stream has every value below `2^(8t)`; a stream built
/// from decrypted data may carry noise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowStream {
    rows: usize,
    cols: usize,
    width: usize,
    elems: Vec<FieldElement>,
}

impl WindowStream {
    /// Wraps received elements, e.g. a decrypted stream truncated to `r * c`.
    pub fn from_elements(rows: usize, cols: usize, width: usize, elems: Vec<FieldElement>) -> Result<Self> {
        if elems.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: elems.len(),
            });
        }
        if width == 0 || cols < width {
            return Err(Error::WindowTooWide { rows, cols, width });
        }
        Ok(WindowStream {
            rows,
            cols,
            width,
            elems,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elems
    }

    pub fn into_elements(self) -> Vec<FieldElement> {
        self.elems
    }
}

/// Window width `t = floor(floor(log2 q) / 8)`, so that `8t <= floor(log2 q)`
/// and every window value is below `q`.
pub fn window_width(field: &FieldParams) -> Result<usize> {
    let bits = field.floor_log2();
    if bits < 16 {
        return Err(Error::ModulusTooSmall(field.modulus()));
    }
    Ok((bits / 8) as usize)
}

fn check_width(field: &FieldParams, t: usize) -> Result<()> {
    if t == 0 || 8 * t as u32 > field.floor_log2() {
        return Err(Error::InvalidParams(format!(
            "window of {t} bytes does not fit below q = {}",
            field.modulus()
        )));
    }
    Ok(())
}

/// Packs every window of `img` into one field element.
pub fn encode_image(img: &GrayImage, t: usize, field: &FieldParams) -> Result<WindowStream> {
    check_width(field, t)?;
    let (r, c) = (img.rows, img.cols);
    if c < t {
        return Err(Error::WindowTooWide {
            rows: r,
            cols: c,
            width: t,
        });
    }
    let mut elems = Vec::with_capacity(r * c);
    for row in img.pixels.chunks_exact(c) {
        for x in 0..c {
            let v = (0..t).fold(0u64, |acc, u| (acc << 8) | row[(x + u) % c] as u64);
            elems.push(field.reduce(v));
        }
    }
    Ok(WindowStream {
        rows: r,
        cols: c,
        width: t,
        elems,
    })
}

/// Centered value clamped to `[0, 2^(8t))`.
fn clamped(field: &FieldParams, e: FieldElement, t: usize) -> u64 {
    let max = (1i64 << (8 * t)) - 1;
    field.centered(e).clamp(0, max) as u64
}

fn byte_at(v: u64, t: usize, pos: usize) -> u8 {
    (v >> (8 * (t - 1 - pos))) as u8
}

/// Recovers the image. With `t >= 3` each pixel is read as the second byte
/// of the window that starts one pixel to its left. For `t < 3` there is no
/// interior byte and the pixel is read as the first byte of the window
/// starting at it instead, which tolerates less noise.
pub fn decode_stream(ws: &WindowStream, field: &FieldParams) -> Result<GrayImage> {
    let (r, c, t) = (ws.rows, ws.cols, ws.width);
    let (offset, pos) = if t >= 3 { (c - 1, 1) } else { (0, 0) };
    let mut pixels = Vec::with_capacity(r * c);
    for row in ws.elems.chunks_exact(c) {
        for x in 0..c {
            let w = clamped(field, row[(x + offset) % c], t);
            pixels.push(byte_at(w, t, pos));
        }
    }
    GrayImage::new(r, c, pixels)
}

/// Diagnostic decode: each pixel takes the most common value among its `t`
/// windows, ties going to the second-position reading.
pub fn decode_majority(ws: &WindowStream, field: &FieldParams) -> Result<GrayImage> {
    let (r, c, t) = (ws.rows, ws.cols, ws.width);
    let mut pixels = Vec::with_capacity(r * c);
    let mut votes = Vec::with_capacity(t);
    for row in ws.elems.chunks_exact(c) {
        for x in 0..c {
            votes.clear();
            for u in 0..t {
                let w = clamped(field, row[(x + c - u) % c], t);
                votes.push(byte_at(w, t, u));
            }
            let preferred = votes[1.min(t - 1)];
            let count = |v: u8| votes.iter().filter(|&&x| x == v).count();
            let best = votes
                .iter()
                .copied()
                .max_by_key(|&v| (count(v), v == preferred))
                .unwrap_or(preferred);
            pixels.push(best);
        }
    }
    GrayImage::new(r, c, pixels)
}

/// Stacks up to `m` streams into a message matrix, filling short streams
/// and the remaining rows with uniform elements. With no streams `l` must
/// be given.
pub fn pack_messages<R: RngCore + ?Sized>(
    streams: &[Vec<FieldElement>],
    m: usize,
    l: Option<usize>,
    field: &FieldParams,
    rng: &mut R,
) -> Result<MessageMatrix> {
    if streams.is_empty() && l.unwrap_or(0) == 0 {
        return Err(Error::EmptyMessage);
    }
    MessageMatrix::from_streams(*field, m, streams, l, rng)
}

/// Deterministic test images: smooth gradient, concentric rings, a noisy
/// checkerboard and white noise, selected by `kind % 4`.
pub fn synthetic_image(kind: usize, rows: usize, cols: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = crate::sampler::Seed::from_u64(seed).generator();
    let jitter: Vec<u8> = (0..rows * cols).map(|_| (rng.next_u32() & 0xff) as u8).collect();
    let (cy, cx) = (rows as f64 / 2.0, cols as f64 / 2.0);
    GrayImage::from_fn(rows, cols, |y, x| match kind % 4 {
        0 => ((x * 255 / cols.max(2)) + (y * 97 / rows.max(1))) as u8,
        1 => {
            let r = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
            (128.0 + 100.0 * (r / 3.0).sin()).round() as u8
        }
        2 => {
            let base = if (x / 8 + y / 8) % 2 == 0 { 48 } else { 176 };
            base + jitter[y * cols + x] / 8
        }
        _ => jitter[y * cols + x],
    })
}

/// Circular distance between two grey levels.
pub fn circular_error(a: u8, b: u8) -> u8 {
    let d = a.wrapping_sub(b);
    d.min(d.wrapping_neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{GaussianSpec, Seed};
    use rand::Rng;

    fn f31() -> FieldParams {
        FieldParams::mersenne31()
    }

    fn random_image(r: usize, c: usize, seed: u64) -> GrayImage {
        let mut rng = Seed::from_u64(seed).generator();
        GrayImage::new(r, c, (0..r * c).map(|_| rng.gen()).collect()).unwrap()
    }

    #[test]
    fn window_widths() {
        assert_eq!(window_width(&f31()).unwrap(), 3);
        assert_eq!(
            window_width(&FieldParams::with_any_prime((1 << 20) - 3).unwrap()).unwrap(),
            2
        );
        let big = FieldParams::new((1 << 40) - 87).unwrap();
        // integer-log oracle: 2^39 <= q < 2^40
        assert!(big.modulus() >= 1 << 39 && big.modulus() < 1 << 40);
        assert!(big.modulus() > 1 << 32);
        assert_eq!(window_width(&big).unwrap(), 4);
        assert!(matches!(
            window_width(&FieldParams::with_any_prime(65521).unwrap()),
            Err(Error::ModulusTooSmall(_))
        ));
    }

    #[test]
    fn encode_small_rows() {
        let f = f31();
        let z = encode_image(&GrayImage::new(1, 3, vec![0, 0, 0]).unwrap(), 3, &f).unwrap();
        assert!(z.elements().iter().all(|e| e.value() == 0));
        let ws = encode_image(&GrayImage::new(1, 3, vec![1, 2, 3]).unwrap(), 3, &f).unwrap();
        let vals: Vec<u64> = ws.elements().iter().map(|e| e.value()).collect();
        assert_eq!(vals, vec![0x010203, 0x020301, 0x030102]);
        assert!(matches!(
            encode_image(&GrayImage::new(2, 2, vec![0; 4]).unwrap(), 3, &f),
            Err(Error::WindowTooWide { .. })
        ));
        assert!(encode_image(&GrayImage::new(1, 8, vec![0; 8]).unwrap(), 4, &f).is_err());
    }

    #[test]
    fn each_pixel_in_t_windows() {
        let f = f31();
        let (r, c, t) = (3, 7, 3);
        // tag every pixel with a distinct value so windows can be inspected
        let img = GrayImage::from_fn(r, c, |y, x| (y * c + x + 1) as u8).unwrap();
        let ws = encode_image(&img, t, &f).unwrap();
        assert_eq!(ws.elements().len(), r * c);
        for y in 0..r {
            for x in 0..c {
                let p = img.get(y, x);
                let hits = (0..c)
                    .filter(|&s| {
                        let v = ws.elements()[y * c + s].value();
                        (0..t).any(|u| byte_at(v, t, u) == p)
                    })
                    .count();
                assert_eq!(hits, t);
            }
        }
    }

    #[test]
    fn noiseless_roundtrip() {
        let f = f31();
        for seed in 0..50 {
            let img = random_image(16, 16, seed);
            let ws = encode_image(&img, 3, &f).unwrap();
            assert_eq!(decode_stream(&ws, &f).unwrap(), img);
            assert_eq!(decode_majority(&ws, &f).unwrap(), img);
        }
        let big = FieldParams::new((1 << 40) - 87).unwrap();
        let img = random_image(5, 9, 99);
        let ws = encode_image(&img, 4, &big).unwrap();
        assert_eq!(decode_stream(&ws, &big).unwrap(), img);
        let small = FieldParams::with_any_prime((1 << 20) - 3).unwrap();
        let ws = encode_image(&img, 2, &small).unwrap();
        assert_eq!(decode_stream(&ws, &small).unwrap(), img);
    }

    #[test]
    fn negative_window_clamps_to_zero() {
        let f = f31();
        let e = f.from_centered(-5).unwrap();
        let ws = WindowStream::from_elements(1, 3, 3, vec![e; 3]).unwrap();
        assert_eq!(decode_stream(&ws, &f).unwrap().pixels(), &[0, 0, 0]);
        let over = f.reduce((1 << 24) + 7);
        let ws = WindowStream::from_elements(1, 3, 3, vec![over; 3]).unwrap();
        assert_eq!(decode_stream(&ws, &f).unwrap().pixels(), &[255, 255, 255]);
    }

    /// Exhaustive over the two low bytes and every noise value up to 255 for
    /// boundary and interior top bytes.
    #[test]
    fn middle_byte_tolerates_noise_below_256() {
        let f = f31();
        for a in [0u64, 1, 127, 254, 255] {
            for b in 0..256u64 {
                for cc in 0..256u64 {
                    let w = (a << 16) | (b << 8) | cc;
                    for e in -255i64..=255 {
                        let noisy = f.add(f.reduce(w), f.from_centered(e).unwrap());
                        let got = byte_at(clamped(&f, noisy, 3), 3, 1);
                        assert!(circular_error(got, b as u8) <= 1, "a={a} b={b} c={cc} e={e}");
                    }
                }
            }
        }
    }

    #[test]
    fn noisy_image_error_rate() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        let mut rng = Seed::from_u64(77).generator();
        let (mut total, mut wrong) = (0usize, 0usize);
        for seed in 0..16 {
            let img = random_image(256, 256, 1000 + seed);
            let ws = encode_image(&img, 3, &f).unwrap();
            let noisy: Vec<FieldElement> = ws
                .elements()
                .iter()
                .map(|&x| f.add(x, f.from_centered(noise.sample(&mut rng)).unwrap()))
                .collect();
            let out = decode_stream(&WindowStream::from_elements(256, 256, 3, noisy).unwrap(), &f).unwrap();
            for (a, b) in out.pixels().iter().zip(img.pixels()) {
                let d = circular_error(*a, *b);
                assert!(d <= 1);
                total += 1;
                wrong += (d != 0) as usize;
            }
        }
        assert!(total >= 1_000_000);
        let rate = wrong as f64 / total as f64;
        assert!(rate < 0.02, "error rate {rate}");
    }

    #[test]
    fn packing() {
        let f = f31();
        let streams: Vec<Vec<FieldElement>> = (0..4)
            .map(|s| encode_image(&random_image(4, 4, s), 3, &f).unwrap().into_elements())
            .collect();
        let mut rng = Seed::from_u64(5).generator();
        let msg = pack_messages(&streams, 1024, None, &f, &mut rng).unwrap();
        assert_eq!(msg.rows(), 1024);
        assert_eq!(msg.cols(), 16);
        assert!(msg.lengths().iter().all(|&n| n == 16));
        for (j, s) in streams.iter().enumerate() {
            assert_eq!(&msg.row(j), s);
        }
        // filler rows are uniform, hence essentially never below 2^24
        let filler_small = (4..1024)
            .flat_map(|j| msg.row(j))
            .filter(|e| e.value() < 1 << 24)
            .count();
        assert!(filler_small < 200);

        assert_eq!(pack_messages(&[], 8, None, &f, &mut rng), Err(Error::EmptyMessage));
        let blank = pack_messages(&[], 8, Some(5), &f, &mut rng).unwrap();
        assert_eq!((blank.rows(), blank.cols()), (8, 5));
        assert!(matches!(
            pack_messages(&streams, 3, None, &f, &mut rng),
            Err(Error::TooManyStreams { given: 4, m: 3 })
        ));
    }

    #[test]
    fn circular_distance() {
        assert_eq!(circular_error(0, 255), 1);
        assert_eq!(circular_error(255, 0), 1);
        assert_eq!(circular_error(10, 12), 2);
        assert_eq!(circular_error(0, 128), 128);
    }
}
