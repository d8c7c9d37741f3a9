//! Plain-text model format.
//!
//! ```text
//! penalearn-model v1
//! 2 20 20 2
//! <W₀ entries, row-major>
//! <b₀ entries>
//! <W₁ entries>
//! ...
//! ```
//!
//! Every value is written with 17 significant digits, which round-trips
//! an `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{Matrix, Mlp};

pub const MODEL_HEADER: &str = "penalearn-model v1";
const MODEL_MAGIC: &str = "penalearn-model";

pub fn model_to_string(net: &Mlp) -> String {
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    let sizes: Vec<String> = net.layer_sizes().iter().map(|s| s.to_string()).collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let mut push_tensor = |values: &[f64]| {
        let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    };
    for (w, b) in net.weights().iter().zip(net.biases()) {
        push_tensor(w.as_slice());
        push_tensor(b);
    }
    out
}

pub fn model_from_str(text: &str) -> Result<Mlp> {
    let eof_line = text.lines().count() + 1;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty model file".into()))?;
    match header.split_once(' ') {
        Some((MODEL_MAGIC, "v1")) => {}
        Some((MODEL_MAGIC, other)) => return Err(Error::Version(other.to_string())),
        _ => return Err(parse_err(1, format!("expected '{MODEL_HEADER}', found '{header}'"))),
    }

    let (ln, sizes_line) = lines.next().ok_or_else(|| parse_err(2, "missing layer sizes".into()))?;
    let sizes = sizes_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| parse_err(ln, format!("bad layer size: {e}")))?;
    let skeleton = Mlp::zeros(&sizes).map_err(|e| parse_err(ln, e.to_string()))?;

    let mut next_tensor = |expected: usize, what: &str| -> Result<Vec<f64>> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(eof_line, format!("truncated file: missing {what}")))?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(ln, format!("bad number in {what}: {e}")))?;
        if values.len() != expected {
            return Err(parse_err(ln, format!("{what} has {} values, expected {expected}", values.len())));
        }
        Ok(values)
    };

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (t, (w, b)) in skeleton.weights().iter().zip(skeleton.biases()).enumerate() {
        let data = next_tensor(w.rows() * w.cols(), &format!("weights of layer {t}"))?;
        weights.push(Matrix::from_vec(w.rows(), w.cols(), data)?);
        biases.push(next_tensor(b.len(), &format!("biases of layer {t}"))?);
    }
    if let Some((ln, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(parse_err(ln, format!("unexpected trailing content '{extra}'")));
    }
    Mlp::from_parts(&sizes, weights, biases)
}

/// Writes to a sibling temp file and renames it into place, so a failed
/// write never leaves a partial model behind.
pub fn save_model(net: &Mlp, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(net).as_bytes())
}

pub fn load_model(path: &Path) -> Result<Mlp> {
    model_from_str(&fs::read_to_string(path)?)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("'{}' is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}
