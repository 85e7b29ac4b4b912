//! SBNN1 model files.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "SBNN1\0\0\0" | version u32 | n_widths u32 | bottleneck u32 |
//! activation u32 | widths u32[n_widths] |
//! per layer: weights f32[out × in] (row-major), bias f32[out]
//! ```
//!
//! The low byte of the activation word holds the activation code and the
//! high byte the role: 0 for a full model, 1 for a head export
//! (`widths[0..=e]`, bottleneck index `e`), 2 for a tail export
//! (`widths[e..]`, bottleneck index 0).

use std::path::Path;

use super::arch::{Activation, ArchSpec};
use super::model::{Dense, SplitModel};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SBNN1\0\0\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Full,
    Head,
    Tail,
}

impl Role {
    fn code(self) -> u32 {
        match self {
            Role::Full => 0,
            Role::Head => 1,
            Role::Tail => 2,
        }
    }

    fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(Role::Full),
            1 => Some(Role::Head),
            2 => Some(Role::Tail),
            _ => None,
        }
    }
}

/// A head-only or tail-only export, runnable on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPart {
    pub role: Role,
    pub activation: Activation,
    pub widths: Vec<usize>,
    pub layers: Vec<Dense>,
}

impl ModelPart {
    /// Head parts activate every layer (their output is the bottleneck);
    /// tail parts leave the final layer linear.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.widths[0] {
            return Err(Error::invalid(format!(
                "input has {} values, part expects {}",
                x.len(),
                self.widths[0]
            )));
        }
        let mut cur = x.to_vec();
        let n = self.layers.len();
        for (j, l) in self.layers.iter().enumerate() {
            let act = if self.role == Role::Tail && j + 1 == n {
                Activation::Linear
            } else {
                self.activation
            };
            cur = l
                .weights
                .chunks_exact(l.inputs)
                .zip(&l.bias)
                .map(|(row, b)| act.apply(row.iter().zip(&cur).fold(*b, |a, (w, v)| a + w * v)))
                .collect();
        }
        Ok(cur)
    }
}

fn encode(role: Role, activation: Activation, e: usize, widths: &[usize], layers: &[Dense]) -> Vec<u8> {
    let n_params: usize = layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
    let mut out = Vec::with_capacity(24 + 4 * widths.len() + 4 * n_params);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(widths.len() as u32).to_le_bytes());
    out.extend_from_slice(&(e as u32).to_le_bytes());
    let act = activation.code() as u32 | role.code() << 24;
    out.extend_from_slice(&act.to_le_bytes());
    for &w in widths {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    for l in layers {
        for &v in l.weights.iter().chain(&l.bias) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

/// Serializes every parameter as f32.
pub fn save_model(m: &SplitModel) -> Vec<u8> {
    encode(
        Role::Full,
        m.arch.activation,
        m.arch.bottleneck,
        &m.arch.widths,
        &m.layers,
    )
}

pub fn save_head(m: &SplitModel) -> Vec<u8> {
    let e = m.arch.bottleneck;
    encode(Role::Head, m.arch.activation, e, &m.arch.widths[..=e], &m.layers[..e])
}

pub fn save_tail(m: &SplitModel) -> Vec<u8> {
    let e = m.arch.bottleneck;
    encode(Role::Tail, m.arch.activation, 0, &m.arch.widths[e..], &m.layers[e..])
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn u32(&mut self, what: &str) -> Result<u32> {
        let end = self.pos + 4;
        let b = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::format(self.pos as u64, format!("truncated while reading {what}")))?;
        self.pos = end;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }
}

/// Role, activation, bottleneck index, widths and layers.
type Decoded = (Role, Activation, usize, Vec<usize>, Vec<Dense>);

fn decode(bytes: &[u8]) -> Result<Decoded> {
    if let Some(i) = (0..MAGIC.len()).find(|&i| bytes.get(i) != Some(&MAGIC[i])) {
        return Err(Error::format(i as u64, "bad SBNN1 magic"));
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::format(8, format!("unsupported version {version}")));
    }
    let n = r.u32("width count")? as usize;
    let e_pos = r.pos;
    let e = r.u32("bottleneck index")? as usize;
    let act_pos = r.pos;
    let word = r.u32("activation")?;
    let activation = Activation::from_code((word & 0xFF) as u8)
        .ok_or_else(|| Error::format(act_pos as u64, format!("unknown activation code {}", word & 0xFF)))?;
    if word & 0x00FF_FF00 != 0 {
        return Err(Error::format(act_pos as u64, "reserved activation bits set"));
    }
    let role = Role::from_code(word >> 24)
        .ok_or_else(|| Error::format(act_pos as u64 + 3, format!("unknown role {}", word >> 24)))?;
    if n < 2 || n > bytes.len() / 4 {
        return Err(Error::format(12, format!("implausible width count {n}")));
    }
    let mut widths = Vec::with_capacity(n);
    for _ in 0..n {
        let pos = r.pos;
        let w = r.u32("widths")? as usize;
        if w == 0 {
            return Err(Error::format(pos as u64, "zero layer width"));
        }
        widths.push(w);
    }
    let structural = match role {
        Role::Full => ArchSpec::new(widths.clone(), e, activation).map(|_| ()),
        Role::Head if e + 1 == n => Ok(()),
        Role::Tail if e == 0 => Ok(()),
        _ => Err(Error::invalid(format!("bottleneck index {e} inconsistent with role"))),
    };
    structural.map_err(|err| Error::format(e_pos as u64, err.to_string()))?;

    let expected: usize = widths.windows(2).map(|w| 4 * (w[0] * w[1] + w[1])).sum();
    let available = bytes.len() - r.pos;
    if available != expected {
        return Err(Error::format(
            (r.pos + available.min(expected)) as u64,
            format!("header declares {expected} parameter bytes, file holds {available}"),
        ));
    }
    let next_f32 = |r: &mut Reader| -> Result<f64> {
        let pos = r.pos;
        let v = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        r.pos += 4;
        if v.is_finite() {
            Ok(v as f64)
        } else {
            Err(Error::format(pos as u64, "non-finite parameter"))
        }
    };
    let mut layers = Vec::with_capacity(n - 1);
    for w in widths.windows(2) {
        let mut l = Dense::zeros(w[0], w[1]);
        for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
            *v = next_f32(&mut r)?;
        }
        layers.push(l);
    }
    Ok((role, activation, e, widths, layers))
}

pub fn load_model(bytes: &[u8]) -> Result<SplitModel> {
    let (role, activation, e, widths, layers) = decode(bytes)?;
    if role != Role::Full {
        return Err(Error::format(23, "file holds a partial model"));
    }
    Ok(SplitModel {
        arch: ArchSpec::new(widths, e, activation)?,
        layers,
    })
}

pub fn load_part(bytes: &[u8]) -> Result<ModelPart> {
    let (role, activation, _, widths, layers) = decode(bytes)?;
    if role == Role::Full {
        return Err(Error::format(23, "file holds a full model, not a part"));
    }
    Ok(ModelPart {
        role,
        activation,
        widths,
        layers,
    })
}

pub fn write_model_file(m: &SplitModel, path: &Path) -> Result<()> {
    std::fs::write(path, save_model(m))?;
    Ok(())
}

pub fn read_model_file(path: &Path) -> Result<SplitModel> {
    load_model(&std::fs::read(path)?)
}
