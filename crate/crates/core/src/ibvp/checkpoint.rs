use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::State;
use crate::error::{Error, Result};
use crate::spectral::{Grid, GridSpec, ScalarField, VectorField};

pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON sidecar of a flat-binary checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub version: u32,
    pub grid: GridSpec,
    pub t: f64,
    /// Field names in file order; each is N2·N1 little-endian f64.
    pub fields: Vec<String>,
    /// Index order of each array.
    pub layout: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `path` (binary) and `path.json` (metadata).
pub fn write_checkpoint(path: &Path, state: &State) -> Result<CheckpointMeta> {
    let grid = state.u.grid();
    let mut fields: Vec<(&str, &ScalarField)> =
        vec![("u1", &state.u.c1), ("u2", &state.u.c2), ("b1", &state.b.c1), ("b2", &state.b.c2)];
    if let Some(p) = &state.p {
        fields.push(("p", p));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    for (_, f) in &fields {
        for v in &f.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    let meta = CheckpointMeta {
        version: CHECKPOINT_VERSION,
        grid: grid.spec,
        t: state.t,
        fields: fields.iter().map(|(n, _)| n.to_string()).collect(),
        layout: "row-major [x2][x1]".into(),
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

pub fn read_checkpoint(path: &Path) -> Result<State> {
    let meta: CheckpointMeta = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    if meta.version != CHECKPOINT_VERSION {
        return Err(Error::Domain(format!("unsupported checkpoint version {}", meta.version)));
    }
    let grid = Grid::new(meta.grid)?;
    let n = grid.n1() * grid.n2();
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * n * meta.fields.len() {
        return Err(Error::ShapeMismatch { expected: 8 * n * meta.fields.len(), got: bytes.len() });
    }
    let arrays: Vec<Vec<f64>> = bytes
        .chunks_exact(8 * n)
        .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect())
        .collect();
    let get = |name: &str| -> Result<Option<ScalarField>> {
        match meta.fields.iter().position(|f| f == name) {
            Some(i) => Ok(Some(ScalarField::from_values(&grid, arrays[i].clone())?)),
            None => Ok(None),
        }
    };
    let need = |f: Option<ScalarField>, name: &str| f.ok_or_else(|| Error::Domain(format!("checkpoint lacks {name}")));
    let u1 = need(get("u1")?, "u1")?;
    let u2 = need(get("u2")?, "u2")?;
    let b1 = need(get("b1")?, "b1")?;
    let b2 = need(get("b2")?, "b2")?;
    let p = get("p")?;
    Ok(State { t: meta.t, u: VectorField::new(u1, u2)?, b: VectorField::new(b1, b2)?, p })
}
