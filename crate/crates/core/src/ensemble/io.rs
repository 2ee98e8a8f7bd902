//! Flat binary layout for final realization states, all little-endian:
//!
//! | offset | type      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | `[u8; 4]` | magic `WTLB`                            |
//! | 4      | `u32`     | version (1)                             |
//! | 8      | `u32`     | grid resolution `N`                     |
//! | 12     | `u32`     | dimension `d`                           |
//! | 16     | `u64`     | modes per state `M`                     |
//! | 24     | `u64`     | number of states `R`                    |
//! | 32     | body      | per state: time `f64`, then `M` pairs `(re, im)` of `f64` |

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::ModeState;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"WTLB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub resolution: u32,
    pub dim: u32,
    pub states: Vec<ModeState>,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Domain(format!("state file I/O: {e}"))
}

pub fn write_states(w: &mut impl Write, file: &StateFile) -> Result<()> {
    let modes = file.states.first().map_or(0, |s| s.amplitudes.len());
    if file.states.iter().any(|s| s.amplitudes.len() != modes) {
        return Err(Error::Domain("all states must have the same number of modes".into()));
    }
    let mut buf = Vec::with_capacity(32 + file.states.len() * (8 + 16 * modes));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&file.resolution.to_le_bytes());
    buf.extend_from_slice(&file.dim.to_le_bytes());
    buf.extend_from_slice(&(modes as u64).to_le_bytes());
    buf.extend_from_slice(&(file.states.len() as u64).to_le_bytes());
    for s in &file.states {
        buf.extend_from_slice(&s.time.to_le_bytes());
        for z in &s.amplitudes {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_states(r: &mut impl Read) -> Result<StateFile> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() < 32 || bytes[..4] != MAGIC {
        return Err(Error::Domain("not a state file".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    if u32_at(4) != VERSION {
        return Err(Error::Domain(format!("unsupported state file version {}", u32_at(4))));
    }
    let modes = u64_at(16) as usize;
    let count = u64_at(24) as usize;
    let expected = modes.checked_mul(16).and_then(|m| m.checked_add(8)).and_then(|s| s.checked_mul(count)).map(|b| b + 32);
    if expected != Some(bytes.len()) {
        return Err(Error::Domain(format!("state file length {} does not match its header", bytes.len())));
    }
    let stride = 8 + 16 * modes;
    let states = (0..count)
        .map(|i| {
            let o = 32 + i * stride;
            let amplitudes = (0..modes).map(|m| C64::new(f64_at(o + 8 + 16 * m), f64_at(o + 16 + 16 * m))).collect();
            ModeState::new(amplitudes, f64_at(o))
        })
        .collect();
    Ok(StateFile { resolution: u32_at(8), dim: u32_at(12), states })
}
