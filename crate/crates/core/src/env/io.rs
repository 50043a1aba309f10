//! Instance files: a small TOML document naming the model kind, the declared
//! density bound and either the density matrix or the atom list.
//!
//! ```toml
//! kind = "cell-density"
//! sigma = 1.5
//! density = [[1.5, 0.5], [0.5, 1.5]]   # rows are seller cells
//! ```
//!
//! ```toml
//! kind = "point-mass-mixture"
//! sigma = inf
//! atoms = [[0.1, 0.9, 1.0]]            # seller value, buyer value, mass
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

use super::{CellDensity, JointValuationModel, PointMassMixture};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: String,
    sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<[f64; 3]>>,
}

/// Line and column (1-based) of a byte offset.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub(crate) fn toml_error(text: &str, err: toml::de::Error) -> Error {
    let (line, column) = err
        .span()
        .map(|s| line_col(text, s.start))
        .unwrap_or((1, 1));
    Error::Parse {
        line,
        column,
        message: err.message().to_string(),
    }
}

pub fn parse_instance<S: Real>(text: &str) -> Result<JointValuationModel<S>> {
    let raw: InstanceFile = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    let lit = S::lit;
    match raw.kind.as_str() {
        "product-uniform" => {
            if raw.density.is_some() || raw.atoms.is_some() {
                return Err(invalid("product-uniform takes no density or atoms"));
            }
            if raw.sigma != 1.0 {
                return Err(invalid(format!(
                    "product-uniform has density bound 1, not {}",
                    raw.sigma
                )));
            }
            Ok(JointValuationModel::ProductUniform)
        }
        "cell-density" => {
            let rows = raw
                .density
                .ok_or_else(|| invalid("cell-density needs a `density` matrix"))?;
            let m = rows.len();
            if rows.iter().any(|r| r.len() != m) {
                return Err(invalid("cell-density matrix must be square"));
            }
            let flat = rows.into_iter().flatten().map(lit).collect();
            Ok(JointValuationModel::CellDensity(CellDensity::with_sigma(
                m,
                flat,
                lit(raw.sigma),
            )?))
        }
        "point-mass-mixture" => {
            let atoms = raw
                .atoms
                .ok_or_else(|| invalid("point-mass-mixture needs an `atoms` list"))?;
            if raw.sigma.is_finite() {
                return Err(invalid("point-mass mixtures have density bound inf"));
            }
            let atoms = atoms
                .into_iter()
                .map(|[s, b, w]| (lit(s), lit(b), lit(w)))
                .collect();
            Ok(JointValuationModel::PointMasses(PointMassMixture::new(
                atoms,
            )?))
        }
        other => Err(invalid(format!("unknown instance kind `{other}`"))),
    }
}

pub fn serialize_instance<S: Real>(model: &JointValuationModel<S>) -> String {
    let f = |x: S| x.as_f64();
    let file = match model {
        JointValuationModel::ProductUniform => InstanceFile {
            kind: model.kind_name().into(),
            sigma: 1.0,
            density: None,
            atoms: None,
        },
        JointValuationModel::CellDensity(c) => InstanceFile {
            kind: model.kind_name().into(),
            sigma: f(c.sigma()),
            density: Some(
                c.densities()
                    .chunks(c.order())
                    .map(|row| row.iter().copied().map(f).collect())
                    .collect(),
            ),
            atoms: None,
        },
        JointValuationModel::PointMasses(pm) => InstanceFile {
            kind: model.kind_name().into(),
            sigma: f64::INFINITY,
            density: None,
            atoms: Some(
                pm.atoms()
                    .iter()
                    .map(|(a, w)| [f(a.p), f(a.q), f(*w)])
                    .collect(),
            ),
        },
    };
    toml::to_string(&file).expect("instance serializes")
}
