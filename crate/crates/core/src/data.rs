//! Delimited-text loading and fixed row/feature subsets.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::drs::{minimize_hinge, DrsConfig};
use crate::error::{Error, Result};
use crate::model::Dataset;

/// Hinge loss at or below this counts as zero when certifying separability.
pub const SEPARABILITY_TOL: f64 = 1e-6;

/// Version tag of subset specification files.
pub const SUBSET_SCHEMA_VERSION: u32 = 1;

/// Which columns of a delimited file hold the features and the label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    /// Header names of the feature columns, in the order they enter `x`.
    pub features: Vec<String>,
    pub label: String,
    /// Label string to class index in `1..=K`; when absent the label column
    /// must hold integers in `1..=K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_map: Option<BTreeMap<String, usize>>,
    /// `K`; inferred from the label map or the largest label when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_classes: Option<usize>,
}

impl Schema {
    /// The layout of the bundled `iris.csv`.
    pub fn iris() -> Self {
        let label_map = [("setosa", 1), ("versicolor", 2), ("virginica", 3)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Schema {
            features: IRIS_FEATURES.iter().map(|s| s.to_string()).collect(),
            label: "species".into(),
            label_map: Some(label_map),
            n_classes: Some(3),
        }
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }
}

pub const IRIS_FEATURES: [&str; 4] = ["sepal_length", "sepal_width", "petal_length", "petal_width"];

fn data_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Data {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn split_fields(line: &str, comma: bool) -> Vec<&str> {
    if comma {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses delimited text; `source` only labels error messages.
///
/// The first non-blank line is the header. Fields are comma-separated when
/// the header contains a comma and whitespace-separated otherwise. Blank
/// lines and lines starting with `#` are skipped. Row numbers in errors are
/// 1-based line numbers of the file.
pub fn parse_delimited(text: &str, schema: &Schema, source: &Path) -> Result<Dataset> {
    if schema.features.is_empty() {
        return Err(Error::config("schema lists no feature columns"));
    }
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| data_error(source, "file is empty: zero rows and no header"))?;
    let comma = header.contains(',');
    let columns = split_fields(header, comma);
    let find = |name: &str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| data_error(source, format!("header has no column {name:?}")))
    };
    let feature_cols = schema
        .features
        .iter()
        .map(|f| find(f))
        .collect::<Result<Vec<_>>>()?;
    let label_col = find(&schema.label)?;

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (row, line) in lines {
        let fields = split_fields(line, comma);
        if fields.len() != columns.len() {
            return Err(data_error(
                source,
                format!("row {row}: expected {} fields, found {}", columns.len(), fields.len()),
            ));
        }
        let mut x = Vec::with_capacity(feature_cols.len());
        for (&c, name) in feature_cols.iter().zip(&schema.features) {
            let v: f64 = fields[c].parse().map_err(|_| {
                data_error(source, format!("row {row}: {name} = {:?} is not a number", fields[c]))
            })?;
            if !v.is_finite() {
                return Err(data_error(source, format!("row {row}: {name} is not finite")));
            }
            x.push(v);
        }
        let raw = fields[label_col];
        let y = match &schema.label_map {
            Some(map) => *map
                .get(raw)
                .ok_or_else(|| data_error(source, format!("row {row}: unknown label {raw:?}")))?,
            None => raw.parse::<usize>().map_err(|_| {
                data_error(source, format!("row {row}: label {raw:?} is not a class index"))
            })?,
        };
        samples.push(x);
        labels.push(y);
    }
    if samples.is_empty() {
        return Err(data_error(source, "file has a header but zero data rows"));
    }
    let n_classes = schema
        .n_classes
        .or_else(|| schema.label_map.as_ref().and_then(|m| m.values().max().copied()))
        .unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0));
    Dataset::new(samples, labels, n_classes).map_err(|e| data_error(source, e.to_string()))
}

pub fn load_delimited(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_delimited(&text, schema, path)
}

/// A feature column, by position in the loaded dataset or by schema name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureRef {
    Index(usize),
    Name(String),
}

/// A fixed selection of rows and feature columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub features: Vec<FeatureRef>,
    /// 1-based row indices into the loaded dataset.
    pub rows: Vec<usize>,
    /// Expected separability; verified by [`make_subset`] when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable: Option<bool>,
}

impl SubsetSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SubsetSpec =
            toml::from_str(text).map_err(|e| Error::Document(format!("subset spec: {e}")))?;
        if spec.schema_version != SUBSET_SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "unsupported subset schema version {}",
                spec.schema_version
            )));
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| Error::Data {
            path: PathBuf::from(path),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Document(e.to_string()))
    }

    /// Every feature and every row of `d`, no separability claim.
    pub fn identity(d: &Dataset) -> Self {
        SubsetSpec {
            schema_version: SUBSET_SCHEMA_VERSION,
            name: "all".into(),
            features: (0..d.n_features()).map(FeatureRef::Index).collect(),
            rows: (1..=d.len()).collect(),
            separable: None,
        }
    }

    /// Replaces feature names by their positions in `schema`.
    pub fn resolve(&self, schema: &Schema) -> Result<Self> {
        let features = self
            .features
            .iter()
            .map(|f| match f {
                FeatureRef::Index(i) => Ok(FeatureRef::Index(*i)),
                FeatureRef::Name(n) => schema
                    .feature_index(n)
                    .map(FeatureRef::Index)
                    .ok_or_else(|| Error::config(format!("subset names unknown feature {n:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SubsetSpec {
            features,
            ..self.clone()
        })
    }
}

/// Extracts the rows and columns named by `spec`, in the spec's row order,
/// and checks the separability claim when there is one.
pub fn make_subset(d: &Dataset, spec: &SubsetSpec) -> Result<Dataset> {
    let sub = select(d, spec)?;
    if let Some(claim) = spec.separable {
        let outcome = minimize_hinge(&sub, &DrsConfig::default())?;
        let separable = outcome.hinge_loss <= SEPARABILITY_TOL;
        if separable != claim {
            return Err(Error::input(format!(
                "subset {:?} is declared {} but its least hinge loss is {:.3e}",
                spec.name,
                if claim { "separable" } else { "non-separable" },
                outcome.hinge_loss
            )));
        }
        if !claim && outcome.residual >= DrsConfig::default().fixed_point_tol {
            return Err(Error::input(format!(
                "subset {:?}: could not certify non-separability (DRS residual {:.3e})",
                spec.name, outcome.residual
            )));
        }
    }
    Ok(sub)
}

/// The extraction part of [`make_subset`], without the separability check.
pub fn select(d: &Dataset, spec: &SubsetSpec) -> Result<Dataset> {
    if spec.features.is_empty() {
        return Err(Error::input("subset selects no features"));
    }
    if spec.rows.is_empty() {
        return Err(Error::input("subset selects no rows"));
    }
    let cols = spec
        .features
        .iter()
        .map(|f| match f {
            FeatureRef::Index(i) if *i < d.n_features() => Ok(*i),
            FeatureRef::Index(i) => Err(Error::input(format!(
                "feature index {i} out of range for {} features",
                d.n_features()
            ))),
            FeatureRef::Name(n) => Err(Error::input(format!(
                "feature {n:?} must be resolved against a schema first"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = vec![false; d.len()];
    let mut samples = Vec::with_capacity(spec.rows.len());
    let mut labels = Vec::with_capacity(spec.rows.len());
    for &row in &spec.rows {
        if row == 0 || row > d.len() {
            return Err(Error::input(format!(
                "row index {row} out of range 1..={}",
                d.len()
            )));
        }
        if std::mem::replace(&mut seen[row - 1], true) {
            return Err(Error::input(format!("row index {row} listed twice")));
        }
        let x = d.sample(row - 1);
        samples.push(cols.iter().map(|&c| x[c]).collect());
        labels.push(d.label(row - 1));
    }
    Dataset::new(samples, labels, d.n_classes())
}
