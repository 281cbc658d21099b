//! Raw Y and binary PGM readers/writers, plus the [0,1] normalization.
//!
//! Raw Y is headerless: row-major, one byte per pixel, frames concatenated.
//! With [`RawLayout::Yuv420`] each frame is followed by `width*height/2`
//! chroma bytes that are skipped on read.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{DepthFrame, DepthSequence, SequenceMeta};
use crate::plane::Plane;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RawLayout {
    /// Luma plane only.
    #[default]
    Luma,
    /// Planar YUV 4:2:0; only the Y plane is kept.
    Yuv420,
}

impl RawLayout {
    fn frame_bytes(self, meta: &SequenceMeta) -> usize {
        let luma = meta.pixels_per_frame();
        match self {
            RawLayout::Luma => luma,
            RawLayout::Yuv420 => luma + luma / 2,
        }
    }
}

pub fn read_raw_y(path: impl AsRef<Path>, meta: &SequenceMeta, layout: RawLayout) -> Result<DepthSequence> {
    let path = path.as_ref();
    meta.validate()?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_raw_y(&bytes, meta, layout, path)
}

pub(crate) fn parse_raw_y(bytes: &[u8], meta: &SequenceMeta, layout: RawLayout, path: &Path) -> Result<DepthSequence> {
    meta.validate()?;
    let frame_bytes = layout.frame_bytes(meta);
    let actual = bytes.len() as u64;
    if bytes.is_empty() || !bytes.len().is_multiple_of(frame_bytes) {
        // round up to the next whole frame
        let expected = (bytes.len() / frame_bytes + 1) * frame_bytes;
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: expected as u64,
            actual,
        });
    }
    let available = bytes.len() / frame_bytes;
    let wanted = if meta.frame_count == 0 {
        available
    } else {
        meta.frame_count
    };
    if wanted > available {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: (wanted * frame_bytes) as u64,
            actual,
        });
    }
    let luma = meta.pixels_per_frame();
    let frames = bytes
        .chunks_exact(frame_bytes)
        .take(wanted)
        .map(|chunk| DepthFrame::new(meta.width, meta.height, chunk[..luma].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    DepthSequence::new(frames, meta.fps)
}

/// Writes the luma planes back to back.
pub fn write_raw_y(seq: &DepthSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(seq.len() * seq.meta().pixels_per_frame());
    for f in seq.frames() {
        out.extend_from_slice(f.pixels());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(frame: &DepthFrame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", frame.width(), frame.height());
    let mut out = Vec::with_capacity(header.len() + frame.pixels().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(frame.pixels());
    out
}

pub fn write_pgm(frame: &DepthFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_pgm(frame)).map_err(|e| Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Option<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()?.parse().ok()
    }
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<DepthFrame> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::format(path, "not a binary PGM (missing P5 magic)"));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number().ok_or_else(|| Error::format(path, "bad width"))?;
    let height = cur.number().ok_or_else(|| Error::format(path, "bad height"))?;
    let maxval = cur.number().ok_or_else(|| Error::format(path, "bad maxval"))?;
    if maxval != 255 {
        return Err(Error::format(path, format!("maxval {maxval} unsupported (need 255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(Error::format(path, "missing raster separator"));
    }
    let start = cur.pos + 1;
    let need = width * height;
    if bytes.len() - start < need {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: (start + need) as u64,
            actual: bytes.len() as u64,
        });
    }
    DepthFrame::new(width, height, bytes[start..start + need].to_vec())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<DepthFrame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

/// Filename pattern with one index slot: either `*` or a printf-style
/// `%d` / `%0Nd`, e.g. `frame_%04d.pgm` or `f*.pgm`.
#[derive(Clone, Debug)]
struct FramePattern {
    prefix: String,
    suffix: String,
    digits_only: bool,
    pad: usize,
}

impl FramePattern {
    fn parse(pattern: &str) -> Result<Self> {
        if let Some(star) = pattern.find('*') {
            return Ok(FramePattern {
                prefix: pattern[..star].to_string(),
                suffix: pattern[star + 1..].to_string(),
                digits_only: false,
                pad: 0,
            });
        }
        if let Some(pct) = pattern.find('%') {
            let rest = &pattern[pct + 1..];
            if let Some(d) = rest.find('d') {
                let spec = &rest[..d];
                let pad = if spec.is_empty() {
                    0
                } else {
                    spec.trim_start_matches('0')
                        .parse()
                        .map_err(|_| Error::validation(format!("bad index slot in pattern {pattern:?}")))?
                };
                return Ok(FramePattern {
                    prefix: pattern[..pct].to_string(),
                    suffix: rest[d + 1..].to_string(),
                    digits_only: true,
                    pad,
                });
            }
        }
        Err(Error::validation(format!(
            "pattern {pattern:?} needs an index slot ('*' or '%0Nd')"
        )))
    }

    /// Numeric index of a matching file name, taken from the last digit run
    /// inside the slot.
    fn index_of(&self, name: &str) -> Option<u64> {
        let slot = name.strip_prefix(&self.prefix)?.strip_suffix(&self.suffix)?;
        if slot.is_empty() {
            return None;
        }
        if self.digits_only {
            return if slot.bytes().all(|b| b.is_ascii_digit()) {
                slot.parse().ok()
            } else {
                None
            };
        }
        let end = slot.rfind(|c: char| c.is_ascii_digit())? + 1;
        let start = slot[..end].rfind(|c: char| !c.is_ascii_digit()).map_or(0, |i| i + 1);
        slot[start..end].parse().ok()
    }

    fn render(&self, index: usize) -> String {
        format!("{}{:0width$}{}", self.prefix, index, self.suffix, width = self.pad)
    }
}

/// Reads every file in `dir` matching `pattern`, ordered by numeric index.
pub fn read_pgm_sequence(dir: impl AsRef<Path>, pattern: &str, fps: f64) -> Result<DepthSequence> {
    let dir = dir.as_ref();
    let pat = FramePattern::parse(pattern)?;
    let mut found: Vec<(u64, String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(idx) = pat.index_of(&name) {
            found.push((idx, name, entry.path()));
        }
    }
    if found.is_empty() {
        return Err(Error::Lookup(format!(
            "no files matching {pattern:?} in {}",
            dir.display()
        )));
    }
    found.sort();
    let mut frames = Vec::with_capacity(found.len());
    for (_, _, path) in &found {
        let frame = read_pgm(path)?;
        if let Some(first) = frames.first() {
            let first: &DepthFrame = first;
            if !frame.same_shape(first) {
                return Err(Error::validation(format!(
                    "{} is {}x{}, expected {}x{}",
                    path.display(),
                    frame.width(),
                    frame.height(),
                    first.width(),
                    first.height()
                )));
            }
        }
        frames.push(frame);
    }
    DepthSequence::new(frames, fps)
}

/// Writes frames as `pattern` with indexes starting at 0. The pattern must
/// use a `%0Nd` slot.
pub fn write_pgm_sequence(seq: &DepthSequence, dir: impl AsRef<Path>, pattern: &str) -> Result<()> {
    let dir = dir.as_ref();
    let pat = FramePattern::parse(pattern)?;
    if !pat.digits_only {
        return Err(Error::validation("output pattern needs a '%0Nd' index slot"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, f) in seq.frames().iter().enumerate() {
        write_pgm(f, dir.join(pat.render(i)))?;
    }
    Ok(())
}

/// Maps samples onto [0,1] by dividing by `2^bit_depth - 1`.
pub fn normalize<T: Scalar>(frame: &DepthFrame) -> Plane<T> {
    let max = T::from_u32(frame.max_value()).expect("max value representable");
    let data = frame
        .pixels()
        .iter()
        .map(|&p| T::from_u8(p).expect("u8 representable") / max)
        .collect();
    Plane::new(frame.width(), frame.height(), data).expect("frame dimensions are valid")
}
