//! Replays sequences encoded by an external encoder.
//!
//! Layout under `root`, one directory per QP:
//!
//! ```text
//! <root>/qp40/frame_0000.pgm
//! <root>/qp40/frame_0001.pgm
//! <root>/qp40/bits.csv        # header `frame,bits`
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{CodecBackend, EncodedFrame, QuantParam};
use crate::error::{Error, Result};
use crate::frame::DepthFrame;
use crate::frame_io::read_pgm;

pub const MANIFEST_NAME: &str = "bits.csv";
pub const PRECODED_FRAME_PATTERN: &str = "frame_%04d.pgm";

#[derive(Debug, Deserialize)]
struct ManifestRow {
    frame: usize,
    bits: f64,
}

#[derive(Clone, Debug)]
struct PrecodedSet {
    frames: BTreeMap<usize, (DepthFrame, f64)>,
}

/// Read-only lookup of `(frame index, qp)` to a decoded frame and its bits.
#[derive(Clone, Debug)]
pub struct PrecodedProvider {
    root: PathBuf,
    sets: BTreeMap<QuantParam, PrecodedSet>,
}

pub fn qp_dir_name(qp: QuantParam) -> String {
    format!("qp{:02}", qp.get())
}

pub fn precoded_frame_name(index: usize) -> String {
    format!("frame_{index:04}.pgm")
}

fn load_set(dir: &Path) -> Result<PrecodedSet> {
    if !dir.is_dir() {
        return Err(Error::Lookup(format!("missing QP directory {}", dir.display())));
    }
    let manifest = dir.join(MANIFEST_NAME);
    if !manifest.is_file() {
        return Err(Error::Lookup(format!("missing manifest {}", manifest.display())));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&manifest)
        .map_err(|e| Error::format(&manifest, e.to_string()))?;
    let mut frames = BTreeMap::new();
    for row in reader.deserialize::<ManifestRow>() {
        let row = row.map_err(|e| Error::format(&manifest, e.to_string()))?;
        if !(row.bits.is_finite() && row.bits >= 0.0) {
            return Err(Error::format(
                &manifest,
                format!("frame {} has invalid bits {}", row.frame, row.bits),
            ));
        }
        let path = dir.join(precoded_frame_name(row.frame));
        if !path.is_file() {
            return Err(Error::Lookup(format!("missing frame {}", path.display())));
        }
        frames.insert(row.frame, (read_pgm(&path)?, row.bits));
    }
    Ok(PrecodedSet { frames })
}

/// Loads every `qp<NN>/` directory named by `qp_set`.
pub fn precoded_provider(root: impl AsRef<Path>, qp_set: &[QuantParam]) -> Result<PrecodedProvider> {
    let root = root.as_ref().to_path_buf();
    let mut sets = BTreeMap::new();
    for &qp in qp_set {
        sets.insert(qp, load_set(&root.join(qp_dir_name(qp)))?);
    }
    Ok(PrecodedProvider { root, sets })
}

impl PrecodedProvider {
    /// Loads every `qp<NN>/` directory present under `root`.
    pub fn discover(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        let mut qps = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(n) = name.strip_prefix("qp").and_then(|n| n.parse::<i32>().ok()) {
                if entry.path().is_dir() {
                    qps.push(QuantParam::new(n)?);
                }
            }
        }
        qps.sort();
        precoded_provider(root, &qps)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn qps(&self) -> impl Iterator<Item = QuantParam> + '_ {
        self.sets.keys().copied()
    }

    /// Sum of manifest bits at `qp`.
    pub fn total_bits(&self, qp: QuantParam) -> Option<f64> {
        self.sets.get(&qp).map(|s| s.frames.values().map(|(_, b)| b).sum())
    }

    pub fn lookup(&self, frame_index: usize, qp: QuantParam) -> Result<(&DepthFrame, f64)> {
        let set = self
            .sets
            .get(&qp)
            .ok_or_else(|| Error::Lookup(format!("QP {qp} not available under {}", self.root.display())))?;
        let (frame, bits) = set.frames.get(&frame_index).ok_or_else(|| {
            Error::Lookup(format!(
                "frame {frame_index} missing from {}",
                self.root.join(qp_dir_name(qp)).join(MANIFEST_NAME).display()
            ))
        })?;
        Ok((frame, *bits))
    }
}

impl CodecBackend for PrecodedProvider {
    fn encode_frame(&self, frame_index: usize, frame: &DepthFrame, qp: QuantParam) -> Result<EncodedFrame> {
        let (decoded, bits) = self.lookup(frame_index, qp)?;
        frame.ensure_same_shape(decoded, "precoded frame")?;
        Ok(EncodedFrame {
            reconstruction: decoded.clone(),
            estimated_bits: bits,
            qp_used: qp,
        })
    }
}
