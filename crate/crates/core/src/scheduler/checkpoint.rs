//! Scheduler checkpoints: a flat binary parameter file plus a text sidecar
//! describing the architecture.
//!
//! Binary layout: the 8-byte magic `DORTSCHD`, a little-endian `u32` version,
//! then every parameter array as little-endian `f64` in declared layer order
//! (conv1 weights, conv1 bias, conv2 weights, conv2 bias, fc weights, fc bias).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{SchedulerConfig, SchedulerModel};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DORTSCHD";
pub const CHECKPOINT_VERSION: u32 = 1;

/// `<checkpoint>.arch`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".arch");
    PathBuf::from(s)
}

fn sidecar_text(model: &SchedulerModel) -> String {
    let (h, w, c) = model.feature_dims;
    let cfg = model.config();
    format!(
        "format = DORTSCHD\nversion = {}\nfeature_height = {}\nfeature_width = {}\nfeature_channels = {}\nd = {}\n\
         kernel = {}\nstride = {}\nconv1_channels = {}\nconv2_channels = {}\nfc_inputs = {}\ndelta = {}\n",
        CHECKPOINT_VERSION,
        h,
        w,
        c,
        cfg.d,
        cfg.kernel,
        cfg.stride,
        cfg.conv1_channels,
        cfg.conv2_channels,
        model.fc_inputs(),
        cfg.delta
    )
}

pub fn save_checkpoint(model: &SchedulerModel, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + 8 * model.param_count());
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for array in model.params() {
        for v in array {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes)?;
    std::fs::write(sidecar_path(path), sidecar_text(model))?;
    Ok(())
}

fn parse_sidecar(text: &str, name: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: name.to_string(),
            line: i as u64 + 1,
            msg: "expected key = value".into(),
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn load_checkpoint(path: &Path) -> Result<SchedulerModel> {
    let arch_path = sidecar_path(path);
    let name = arch_path.display().to_string();
    let arch = parse_sidecar(&std::fs::read_to_string(&arch_path)?, &name)?;
    let get = |k: &str| -> Result<&str> {
        arch.get(k).map(String::as_str).ok_or_else(|| Error::Checkpoint(format!("{} missing key {}", name, k)))
    };
    let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| Error::Checkpoint(format!("bad value for {}", k))) };
    if get("format")? != "DORTSCHD" {
        return Err(Error::Checkpoint("sidecar format is not DORTSCHD".into()));
    }
    let cfg = SchedulerConfig {
        d: num("d")?,
        conv1_channels: num("conv1_channels")?,
        conv2_channels: num("conv2_channels")?,
        kernel: num("kernel")?,
        stride: num("stride")?,
        delta: get("delta")?.parse().map_err(|_| Error::Checkpoint("bad delta".into()))?,
    };
    let dims = (num("feature_height")?, num("feature_width")?, num("feature_channels")?);
    let mut model = SchedulerModel::new(dims, &cfg, 0)?;
    if model.fc_inputs() != num("fc_inputs")? {
        return Err(Error::Checkpoint("fc input size disagrees with architecture".into()));
    }

    let bytes = std::fs::read(path)?;
    if bytes.len() < 12 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("{} is not a scheduler checkpoint", path.display())));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", version)));
    }
    let body = &bytes[12..];
    if body.len() != 8 * model.param_count() {
        return Err(Error::Checkpoint(format!(
            "expected {} parameters, file holds {} bytes",
            model.param_count(),
            body.len()
        )));
    }
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    for array in model.params_mut() {
        for slot in array.iter_mut() {
            *slot = values.next().expect("length checked");
        }
    }
    Ok(model)
}
