//! Serialized tree model and prediction by leaf routing.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::tree::TreeState;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelClause {
    pub feature: String,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelLeaf {
    pub clauses: Vec<ModelClause>,
    pub prediction: u8,
    pub n_captured: usize,
    pub n_correct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    /// Regularization as given by the user.
    pub lambda: String,
    pub objective: ExactValue,
    pub training_accuracy: f64,
    pub certified: bool,
    pub leaves: Vec<ModelLeaf>,
}

/// Outcome of applying a model to labelled data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub n_samples: usize,
    pub n_correct: usize,
}

impl Evaluation {
    pub fn mistakes(&self) -> usize {
        self.n_samples - self.n_correct
    }

    pub fn accuracy(&self) -> ExactValue {
        ExactValue::ratio(self.n_correct as i128, self.n_samples.max(1) as i128)
    }
}

impl Model {
    pub fn from_tree(
        ds: &Dataset,
        tree: &TreeState,
        lambda_text: &str,
        objective: ExactValue,
        certified: bool,
    ) -> Model {
        let names = ds.feature_names();
        let leaves = tree
            .leaves()
            .map(|leaf| ModelLeaf {
                clauses: leaf
                    .clauses()
                    .iter()
                    .map(|c| ModelClause {
                        feature: names[c.feature as usize].clone(),
                        value: u8::from(c.polarity),
                    })
                    .collect(),
                prediction: u8::from(leaf.prediction()),
                n_captured: leaf.n_captured(),
                n_correct: leaf.n_correct(),
            })
            .collect();
        Model {
            lambda: lambda_text.to_string(),
            objective,
            training_accuracy: tree.n_correct() as f64 / ds.n_samples() as f64,
            certified,
            leaves,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let model: Model =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model JSON: {e}")))?;
        for leaf in &model.leaves {
            if leaf.prediction > 1 || leaf.clauses.iter().any(|c| c.value > 1) {
                return Err(Error::Format("model values must be 0 or 1".into()));
            }
        }
        Ok(model)
    }

    /// Predicted labels, routing each sample to the leaf whose clauses it
    /// satisfies. A sample matching zero or several leaves means the model's
    /// leaves do not partition the feature space.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<bool>> {
        let resolved: Vec<Vec<(usize, bool)>> = self
            .leaves
            .iter()
            .map(|leaf| {
                leaf.clauses
                    .iter()
                    .map(|c| {
                        ds.feature_index(&c.feature)
                            .map(|i| (i, c.value == 1))
                            .ok_or_else(|| {
                                Error::Format(format!("data has no feature column {:?}", c.feature))
                            })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        (0..ds.n_samples())
            .map(|n| {
                let row = ds.row(n);
                let mut hit = None;
                for (i, clauses) in resolved.iter().enumerate() {
                    if clauses.iter().all(|&(f, v)| row[f] == v) {
                        if hit.is_some() {
                            return Err(Error::Invariant(format!(
                                "sample {} matches more than one leaf",
                                n + 1
                            )));
                        }
                        hit = Some(i);
                    }
                }
                hit.map(|i| self.leaves[i].prediction == 1).ok_or_else(|| {
                    Error::Invariant(format!("sample {} matches no leaf", n + 1))
                })
            })
            .collect()
    }

    pub fn evaluate(&self, ds: &Dataset) -> Result<Evaluation> {
        let predicted = self.predict(ds)?;
        let n_correct = predicted
            .iter()
            .enumerate()
            .filter(|&(n, &p)| ds.label(n) == p)
            .count();
        Ok(Evaluation {
            n_samples: ds.n_samples(),
            n_correct,
        })
    }
}
