//! Raw waveform dumps: little-endian interleaved `f32` I/Q plus a `.txt`
//! sidecar holding `sample_rate_hz` and `length`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".txt");
    PathBuf::from(name)
}

pub fn write_waveform(path: &Path, samples: &[Complex64], sample_rate: f64) -> Result<()> {
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    fs::write(sidecar(path), format!("sample_rate_hz = {sample_rate}\nlength = {}\n", samples.len()))?;
    Ok(())
}

pub fn read_waveform(path: &Path) -> Result<(Vec<Complex64>, f64)> {
    let meta = fs::read_to_string(sidecar(path))?;
    let field = |key: &str| -> Result<f64> {
        meta.lines()
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .and_then(|(_, v)| v.trim().parse().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("sidecar lacks {key}")))
    };
    let rate = field("sample_rate_hz")?;
    let length = field("length")? as usize;
    let bytes = fs::read(path)?;
    if bytes.len() != length * 8 {
        return Err(Error::InvalidParameter(format!("expected {} bytes, found {}", length * 8, bytes.len())));
    }
    let f = |b: &[u8]| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
    let samples = bytes.chunks_exact(8).map(|c| Complex64::new(f(&c[..4]), f(&c[4..]))).collect();
    Ok((samples, rate))
}
