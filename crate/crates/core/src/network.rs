//! Layer stacking.
//!
//! Layer `l` is solved on `A_{l-1}`, and its bilinear reconstruction
//! `A_l = P_l A_{l-1} Z_l` becomes the next input and dictionary, so
//! `A_l = P_l ... P_1 X Z_1 ... Z_l`. The sparsity weight grows as
//! `lambda_l = rho^(l-1) lambda_1`.

use std::fs;
use std::path::Path;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::io::{read_matrix, write_matrix, MatrixFormat};
use crate::matrix::{DataMatrix, Matrix};
use crate::solver::{solve_layer, AlmState, LayerParams};

/// `rho^(l-1) * lambda1` for a 1-based layer index.
pub fn lambda_schedule(lambda1: f64, rho: f64, layer: usize) -> f64 {
    // repeated multiplication keeps lambda_l / lambda_{l-1} == rho exactly
    (1..layer.max(1)).fold(lambda1, |lambda, _| lambda * rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub params: LayerParams,
    pub state: AlmState,
    pub lambda: f64,
}

/// A trained stack. `inputs[0]` is `X`; `inputs[l]` is the reconstruction after layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub layers: Vec<Layer>,
    pub inputs: Vec<Matrix>,
    pub config: SolverConfig,
}

/// Next-layer input `P (A Z)`.
pub fn collaborative_reconstruction(a: &Matrix, params: &LayerParams) -> Matrix {
    &params.p * (a * &params.z)
}

/// Trains `cfg.layers` layers in sequence.
///
/// A layer that hits `max_iter` is kept with `converged == false` and the
/// next layer trains on its reconstruction.
pub fn train(x: &DataMatrix, cfg: &SolverConfig) -> Result<NetworkModel> {
    let mut model = NetworkModel::new(x, cfg)?;
    while model.depth() < cfg.layers {
        model.train_next_layer()?;
    }
    Ok(model)
}

impl NetworkModel {
    /// An untrained stack holding only `A_0 = X`.
    pub fn new(x: &DataMatrix, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(NetworkModel {
            layers: Vec::with_capacity(cfg.layers),
            inputs: vec![x.as_matrix().clone()],
            config: cfg.clone(),
        })
    }

    /// Solves one more layer on the current deepest reconstruction.
    pub fn train_next_layer(&mut self) -> Result<&Layer> {
        let l = self.depth() + 1;
        let lambda = lambda_schedule(self.config.lambda1, self.config.rho, l);
        let input = &self.inputs[l - 1];
        let (params, state) = solve_layer(input, &self.config, lambda, self.config.alpha)?;
        let next = collaborative_reconstruction(input, &params);
        self.layers.push(Layer { params, state, lambda });
        self.inputs.push(next);
        Ok(&self.layers[l - 1])
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `A_l` for `l` in `0..=depth`.
    pub fn reconstruct_input(&self, l: usize) -> Result<&Matrix> {
        self.inputs.get(l).ok_or(Error::LayerOutOfRange {
            requested: l,
            depth: self.depth(),
        })
    }

    /// Parameters of 1-based layer `l`.
    pub fn layer(&self, l: usize) -> Result<&Layer> {
        if l == 0 || l > self.depth() {
            return Err(Error::LayerOutOfRange {
                requested: l,
                depth: self.depth(),
            });
        }
        Ok(&self.layers[l - 1])
    }

    fn deepest(&self) -> Result<(&Layer, &Matrix)> {
        let depth = self.depth();
        if depth == 0 {
            return Err(Error::EmptyModel);
        }
        Ok((&self.layers[depth - 1], &self.inputs[depth - 1]))
    }

    /// Deep salient features `P_L A_{L-1}`.
    pub fn deep_salient_features(&self) -> Result<Matrix> {
        let (layer, input) = self.deepest()?;
        Ok(&layer.params.p * input)
    }

    /// Deep principal features `A_{L-1} Z_L`.
    pub fn deep_principal_features(&self) -> Result<Matrix> {
        let (layer, input) = self.deepest()?;
        Ok(input * &layer.params.z)
    }

    /// Deep reconstruction `A_L = P_L A_{L-1} Z_L`.
    pub fn deep_reconstruction(&self) -> Result<Matrix> {
        self.deepest()?;
        Ok(self.inputs[self.depth()].clone())
    }

    pub fn all_converged(&self) -> bool {
        self.layers.iter().all(|l| l.state.converged)
    }

    /// Writes `Z_<l>.dlrm`, `P_<l>.dlrm`, `E_<l>.dlrm` for each layer and `model.cfg`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, layer) in self.layers.iter().enumerate() {
            let l = i + 1;
            for (name, m) in [("Z", &layer.params.z), ("P", &layer.params.p), ("E", &layer.params.e)] {
                let data = DataMatrix::new(m.clone())?;
                write_matrix(&data, dir.join(format!("{name}_{l}.dlrm")), MatrixFormat::Binary)?;
            }
        }
        let cfg_path = dir.join("model.cfg");
        fs::write(&cfg_path, self.config.to_text()).map_err(|e| Error::io(&cfg_path, e))
    }
}

/// Layers and configuration read back from a model directory.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub layers: Vec<LayerParams>,
    pub config: SolverConfig,
}

impl SavedModel {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let cfg_path = dir.join("model.cfg");
        let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
        let config = SolverConfig::from_text(&text)?;
        let mut layers = Vec::with_capacity(config.layers);
        for l in 1..=config.layers {
            let read = |name: &str| -> Result<Matrix> {
                Ok(read_matrix(dir.join(format!("{name}_{l}.dlrm")), MatrixFormat::Binary)?.into_matrix())
            };
            layers.push(LayerParams {
                z: read("Z")?,
                p: read("P")?,
                e: read("E")?,
            });
        }
        Ok(SavedModel { layers, config })
    }

    pub fn layer(&self, l: usize) -> Result<&LayerParams> {
        if l == 0 || l > self.layers.len() {
            return Err(Error::LayerOutOfRange {
                requested: l,
                depth: self.layers.len(),
            });
        }
        Ok(&self.layers[l - 1])
    }
}
