//! Versioned JSON model files.
//!
//! Matrices are stored as arrays of rows. Numbers are written in the shortest
//! decimal form that parses back to the same `f64`, so a file read and written
//! again is byte-identical.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use prnn::model::PrnnModel;
use prnn::reduction::ReducedModel;
use prnn::spectral::{BlockKind, RealJordanBlock};
use prnn::Complex64;

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockType {
    Real,
    ComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDescriptor {
    pub kind: BlockType,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub generator: String,
    /// `readout`, `full` or `reduced`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Where the training series came from, e.g. `function:square_t`,
    /// `expr:t^2` or `csv:data.csv`.
    pub source: String,
    pub train_points: usize,
    /// Sub-sampling stride applied to a CSV source.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Neuron count of the model this one was reduced from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_size: Option<usize>,
}

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub kind: ModelKind,
    pub d: usize,
    /// Reservoir size of a full model; for a reduced model, its neuron count.
    pub n_res: usize,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_index: Option<Vec<usize>>,
    pub provenance: Provenance,
}

/// A model loaded from disk.
pub enum LoadedModel {
    Full(PrnnModel),
    Reduced(ReducedModel),
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> CliResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Io(format!("model file: rows of '{name}' have different lengths")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn require<'a, T>(field: &'a Option<T>, name: &str, kind: &str) -> CliResult<&'a T> {
    field.as_ref().ok_or_else(|| CliError::Io(format!("model file: {kind} model lacks '{name}'")))
}

impl ModelFile {
    pub fn from_full(model: &PrnnModel, provenance: Provenance) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: ModelKind::Full,
            d: model.d,
            n_res: model.n_res,
            tau: model.tau,
            w: Some(rows(&model.w)),
            x0: Some(model.x0.iter().copied().collect()),
            blocks: None,
            a: None,
            y: None,
            block_index: None,
            provenance,
        }
    }

    pub fn from_reduced(model: &ReducedModel, provenance: Provenance) -> Self {
        let blocks = model
            .blocks
            .iter()
            .map(|b| BlockDescriptor {
                kind: match b.kind {
                    BlockKind::Real => BlockType::Real,
                    BlockKind::ComplexPair => BlockType::ComplexPair,
                },
                lambda_re: b.lambda.re,
                lambda_im: b.lambda.im,
                m: b.m,
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            kind: ModelKind::Reduced,
            d: model.d(),
            n_res: model.width(),
            tau: model.tau,
            w: None,
            x0: None,
            blocks: Some(blocks),
            a: Some(rows(&model.a)),
            y: Some(model.y.iter().copied().collect()),
            block_index: Some(model.block_index.clone()),
            provenance,
        }
    }

    pub fn to_model(&self) -> CliResult<LoadedModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Io(format!(
                "model file: unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let bad = |e: prnn::Error| CliError::Io(format!("model file: {e}"));
        match self.kind {
            ModelKind::Full => {
                let w = matrix("w", require(&self.w, "w", "full")?)?;
                let x0 = DVector::from_vec(require(&self.x0, "x0", "full")?.clone());
                let model = PrnnModel::new(w, x0, self.d, self.tau).map_err(bad)?;
                if model.n_res != self.n_res {
                    return Err(CliError::Io(format!(
                        "model file: n_res is {} but W implies {}",
                        self.n_res, model.n_res
                    )));
                }
                Ok(LoadedModel::Full(model))
            }
            ModelKind::Reduced => {
                let blocks = require(&self.blocks, "blocks", "reduced")?
                    .iter()
                    .map(|b| match b.kind {
                        BlockType::Real if b.lambda_im == 0.0 && b.m > 0 => Ok(RealJordanBlock::real(b.lambda_re, b.m)),
                        BlockType::ComplexPair if b.lambda_im != 0.0 && b.m > 0 => {
                            Ok(RealJordanBlock::pair(Complex64::new(b.lambda_re, b.lambda_im), b.m))
                        }
                        _ => Err(CliError::Io(format!("model file: invalid block descriptor {b:?}"))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let a = matrix("a", require(&self.a, "a", "reduced")?)?;
                let y = DVector::from_vec(require(&self.y, "y", "reduced")?.clone());
                let index = require(&self.block_index, "block_index", "reduced")?.clone();
                let model = ReducedModel::new(a, blocks, y, self.tau, index).map_err(bad)?;
                if model.d() != self.d || model.width() != self.n_res {
                    return Err(CliError::Io("model file: d or n_res disagree with the stored matrices".into()));
                }
                Ok(LoadedModel::Reduced(model))
            }
        }
    }

    fn all_finite(&self) -> bool {
        let vec_ok = |v: &Option<Vec<f64>>| v.as_ref().is_none_or(|v| v.iter().all(|x| x.is_finite()));
        let mat_ok = |m: &Option<Vec<Vec<f64>>>| m.as_ref().is_none_or(|m| m.iter().flatten().all(|x| x.is_finite()));
        self.tau.is_finite()
            && vec_ok(&self.x0)
            && vec_ok(&self.y)
            && mat_ok(&self.w)
            && mat_ok(&self.a)
            && self.blocks.as_ref().is_none_or(|bs| bs.iter().all(|b| b.lambda_re.is_finite() && b.lambda_im.is_finite()))
    }

    pub fn to_json(&self) -> CliResult<String> {
        if !self.all_finite() {
            return Err(CliError::Numeric("model contains non-finite numbers and cannot be saved".into()));
        }
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Io(format!("model file: {e}")))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::io_at(path, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io_at(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::io_at(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance {
            generator: "prnn test".into(),
            mode: "readout".into(),
            seed: Some(3),
            source: "function:square_t".into(),
            train_points: 4,
            stride: 1,
            theta: None,
            parent_size: None,
        }
    }

    #[test]
    fn full_model_round_trip_is_byte_identical() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0 / 3.0]);
        let model = PrnnModel::new(w, DVector::from_vec(vec![0.1, 1e-300, -7.25e12]), 1, 0.01).unwrap();
        let text = ModelFile::from_full(&model, provenance()).to_json().unwrap();
        let parsed = ModelFile::from_json(&text).unwrap();
        assert_eq!(parsed.to_json().unwrap(), text);
        match parsed.to_model().unwrap() {
            LoadedModel::Full(m) => assert_eq!(m, model),
            LoadedModel::Reduced(_) => panic!("kind changed"),
        }
    }

    #[test]
    fn reduced_model_round_trip() {
        let blocks = vec![RealJordanBlock::pair(Complex64::new(0.6, 0.8), 1), RealJordanBlock::real(-0.5, 2)];
        let a = DMatrix::from_row_slice(1, 4, &[0.5, -0.25, 1.0, 3.0]);
        let model = ReducedModel::new(a, blocks, DVector::from_element(4, 1.0), 1.0, vec![0, 3]).unwrap();
        let file = ModelFile::from_reduced(&model, provenance());
        let text = file.to_json().unwrap();
        assert!(text.contains("\"complex_pair\""));
        let parsed = ModelFile::from_json(&text).unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_json().unwrap(), text);
        match parsed.to_model().unwrap() {
            LoadedModel::Reduced(m) => assert_eq!(m, model),
            LoadedModel::Full(_) => panic!("kind changed"),
        }
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ModelFile::from_json("{}").is_err());
        let w = DMatrix::identity(2, 2);
        let model = PrnnModel::new(w, DVector::from_vec(vec![1.0, 1.0]), 1, 1.0).unwrap();
        let mut file = ModelFile::from_full(&model, provenance());
        file.format_version = 99;
        assert!(file.to_model().is_err());
        file.format_version = FORMAT_VERSION;
        file.w = Some(vec![vec![1.0, 0.0], vec![0.0]]);
        assert!(file.to_model().is_err());
        file.w = Some(vec![vec![f64::NAN, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(file.to_json(), Err(CliError::Numeric(_))));
    }
}
