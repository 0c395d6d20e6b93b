use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use polywell_core::{DoubleWell, Matrix, Mesh2, VectorField};
use serde::{Deserialize, Serialize};

pub fn read_wells(path: &str) -> Result<DoubleWell> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read wells file {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("invalid wells file {path}"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineSpec {
    #[serde(rename = "M")]
    m: Matrix,
    #[serde(default)]
    c: [f64; 2],
}

/// Boundary data y₀(x) = Mx + c from inline JSON or a JSON file.
fn parse_affine(spec: &str) -> Result<(Matrix, [f64; 2])> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).with_context(|| format!("cannot read boundary-affine file {spec}"))?
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).context("boundary-affine is not valid JSON")?;
    let (m, c) = if value.get("M").is_some() {
        let s: AffineSpec = serde_json::from_value(value).context("invalid boundary-affine")?;
        (s.m, s.c)
    } else {
        let m: Matrix = serde_json::from_value(value).context("invalid boundary-affine matrix")?;
        (m, [0.0, 0.0])
    };
    if m.n() != 2 {
        bail!("boundary-affine: M must be 2x2, got {}x{}", m.n(), m.n());
    }
    if !c.iter().all(|v| v.is_finite()) {
        bail!("boundary-affine: c must be finite");
    }
    Ok((m, c))
}

pub fn boundary_field(mesh: &Mesh2, affine: Option<&str>, csv: Option<&str>) -> Result<VectorField> {
    match (affine, csv) {
        (Some(spec), None) => {
            let (m, c) = parse_affine(spec)?;
            Ok(VectorField::affine(mesh, &m, c)?)
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("cannot read boundary-csv file {path}"))?;
            mesh.parse_field_csv(&text)
                .with_context(|| format!("invalid boundary-csv file {path}"))
        }
        (None, None) => bail!("one of --boundary-affine or --boundary-csv is required"),
        (Some(_), Some(_)) => bail!("--boundary-affine and --boundary-csv are mutually exclusive"),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(Path::new(path), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `<dir>/<stem>.field.csv` next to the JSON output.
pub fn field_path(out: &str) -> std::path::PathBuf {
    let p = Path::new(out);
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".into());
    p.with_file_name(format!("{stem}.field.csv"))
}
