//! Structured-text documents for models, evaluations and solver runs.
//!
//! Models and reports are TOML; iteration histories are comma-separated.
//! Infinite margins (degenerate pairs) serialize as TOML `inf`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassifierParams, EvaluationReport, PairMargin};

/// Version tag written into every model document.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Hierarchical solver: least hinge loss, then largest smallest margin.
    Rhc,
    /// Weighted-sum (Crammer–Singer) baseline.
    Ncr,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Rhc => "rhc",
            SolverKind::Ncr => "ncr",
        })
    }
}

/// One row of the iteration history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub n: usize,
    /// Epigraph variable `t_n` (zero for solvers without one).
    pub t: f64,
    pub hinge_loss: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub solver: SolverKind,
    pub iterations: usize,
    /// Whether the stopping rule fired before the iteration cap.
    pub converged: bool,
    pub final_residual: f64,
    /// Final epigraph variable, hierarchical solver only.
    pub final_t: Option<f64>,
    pub evaluation: EvaluationReport,
    pub history: Vec<HistoryRecord>,
    pub wall_time_secs: f64,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MarginDoc {
    r: usize,
    s: usize,
    margin: f64,
}

#[derive(Serialize, Deserialize)]
struct EvaluationDoc {
    hinge_loss: f64,
    risk_count: usize,
    worst_pair_objective: f64,
    smallest_margin: MarginDoc,
    per_sample_deviation: Vec<f64>,
    margins: BTreeMap<String, BTreeMap<String, f64>>,
}

impl From<&EvaluationReport> for EvaluationDoc {
    fn from(rep: &EvaluationReport) -> Self {
        let mut margins: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for pm in &rep.pairwise_margins {
            margins
                .entry(pm.r.to_string())
                .or_default()
                .insert(pm.s.to_string(), pm.margin);
        }
        let sm = rep.smallest_margin();
        EvaluationDoc {
            hinge_loss: rep.hinge_loss,
            risk_count: rep.risk_count,
            worst_pair_objective: rep.worst_pair_objective,
            smallest_margin: MarginDoc {
                r: sm.r,
                s: sm.s,
                margin: sm.margin,
            },
            per_sample_deviation: rep.per_sample_deviation.clone(),
            margins,
        }
    }
}

impl EvaluationDoc {
    fn into_report(self) -> Result<EvaluationReport> {
        let mut pairwise_margins = Vec::new();
        for (r, row) in &self.margins {
            for (s, &margin) in row {
                let parse = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| Error::Document(format!("bad class label {v:?} in margins")))
                };
                pairwise_margins.push(PairMargin {
                    r: parse(r)?,
                    s: parse(s)?,
                    margin,
                });
            }
        }
        pairwise_margins.sort_by_key(|pm| (pm.r, pm.s));
        if pairwise_margins.is_empty() {
            return Err(Error::Document("evaluation has no margins".into()));
        }
        Ok(EvaluationReport {
            hinge_loss: self.hinge_loss,
            per_sample_deviation: self.per_sample_deviation,
            pairwise_margins,
            worst_pair_objective: self.worst_pair_objective,
            risk_count: self.risk_count,
        })
    }
}

impl EvaluationReport {
    /// Key–value TOML with `hinge_loss`, `risk_count`, `worst_pair_objective`
    /// and a `[margins.r]` table per first class holding `s = margin`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&EvaluationDoc::from(self)).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: EvaluationDoc = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        doc.into_report()
    }
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    solver: SolverKind,
    iterations: usize,
    converged: bool,
    final_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    final_t: Option<f64>,
    warnings: Vec<String>,
    evaluation: EvaluationDoc,
}

impl SolverReport {
    /// The report without its history (see [`SolverReport::write_history`])
    /// and without the wall time, so equal runs give equal files.
    pub fn to_toml(&self) -> Result<String> {
        let doc = ReportDoc {
            solver: self.solver,
            iterations: self.iterations,
            converged: self.converged,
            final_residual: self.final_residual,
            final_t: self.final_t,
            warnings: self.warnings.clone(),
            evaluation: EvaluationDoc::from(&self.evaluation),
        };
        toml::to_string(&doc).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ReportDoc = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Ok(SolverReport {
            solver: doc.solver,
            iterations: doc.iterations,
            converged: doc.converged,
            final_residual: doc.final_residual,
            final_t: doc.final_t,
            evaluation: doc.evaluation.into_report()?,
            history: Vec::new(),
            wall_time_secs: 0.0,
            warnings: doc.warnings,
        })
    }

    /// Writes `n,t_n,hinge_loss,residual` rows with a header line.
    pub fn write_history<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,t_n,hinge_loss,residual")?;
        for h in &self.history {
            writeln!(out, "{},{:e},{:e},{:e}", h.n, h.t, h.hinge_loss, h.residual)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ClassDoc {
    label: usize,
    w: Vec<f64>,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    solver: SolverKind,
    n_features: usize,
    n_classes: usize,
    class: Vec<ClassDoc>,
}

/// A trained classifier together with the solver that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub solver: SolverKind,
    pub params: ClassifierParams,
}

impl ModelDocument {
    pub fn new(solver: SolverKind, params: ClassifierParams) -> Self {
        ModelDocument { solver, params }
    }

    /// One `[[class]]` table per label with its `w` block and `b`.
    pub fn to_toml(&self) -> Result<String> {
        let p = &self.params;
        let doc = ModelDoc {
            schema_version: MODEL_SCHEMA_VERSION,
            solver: self.solver,
            n_features: p.n_features(),
            n_classes: p.n_classes(),
            class: (1..=p.n_classes())
                .map(|j| ClassDoc {
                    label: j,
                    w: p.w(j).to_vec(),
                    b: p.b(j),
                })
                .collect(),
        };
        toml::to_string(&doc).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Document(format!(
                "unsupported model schema version {}",
                doc.schema_version
            )));
        }
        if doc.class.len() != doc.n_classes {
            return Err(Error::Document(format!(
                "model declares {} classes but lists {}",
                doc.n_classes,
                doc.class.len()
            )));
        }
        let mut class = doc.class;
        class.sort_by_key(|c| c.label);
        if class.iter().enumerate().any(|(i, c)| c.label != i + 1) {
            return Err(Error::Document("class labels must be exactly 1..=K".into()));
        }
        let weights: Vec<Vec<f64>> = class.iter().map(|c| c.w.clone()).collect();
        let offsets: Vec<f64> = class.iter().map(|c| c.b).collect();
        let params = ClassifierParams::from_parts(&weights, &offsets)
            .map_err(|e| Error::Document(e.to_string()))?;
        if params.n_features() != doc.n_features {
            return Err(Error::Document(format!(
                "model declares N = {} but weights have length {}",
                doc.n_features,
                params.n_features()
            )));
        }
        Ok(ModelDocument {
            solver: doc.solver,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Dataset};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn model_document_round_trips(values in prop::collection::vec(-1e3f64..1e3, 9)) {
            let p = ClassifierParams::from_flat(2, 3, values).unwrap();
            let doc = ModelDocument::new(SolverKind::Rhc, p);
            let text = doc.to_toml().unwrap();
            prop_assert_eq!(ModelDocument::from_toml(&text).unwrap(), doc);
        }
    }

    #[test]
    fn evaluation_document_has_stable_keys() {
        let d = Dataset::new(vec![vec![1.0], vec![-1.0], vec![0.0]], vec![1, 2, 3], 3).unwrap();
        // w1 = w2 makes pair (1, 2) degenerate.
        let p = ClassifierParams::from_parts(&[vec![1.0], vec![1.0], vec![0.0]], &[0.0, 0.0, 0.5])
            .unwrap();
        let rep = evaluate(&p, &d).unwrap();
        let text = rep.to_toml().unwrap();
        for key in ["hinge_loss", "risk_count", "worst_pair_objective", "[margins.1]", "[margins.2]"] {
            assert!(text.contains(key), "missing {key} in\n{text}");
        }
        assert!(text.contains("inf"));
        let back = EvaluationReport::from_toml(&text).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = "schema_version = 7\nsolver = \"rhc\"\nn_features = 1\nn_classes = 2\n";
        assert!(ModelDocument::from_toml(text).is_err());
    }
}
