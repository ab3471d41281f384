use std::collections::HashMap;

use lt_tensor::{derive_seed, Graph, Rng, Tensor, Var};

use crate::error::{ModelError, ModelResult};

/// Which pruning pool a tensor belongs to. Embedding tables can be excluded
/// from pruning while everything else ("core") is always in scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneGroup {
    Core,
    Embedding,
}

/// How a tensor is initialized. Stored per entry so kept positions of a
/// ticket can be re-sampled from the exact same distribution later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    /// Uniform in [-bound, bound] with bound = (1/fan_in)^(1/2).
    UniformFanIn { bound: f64 },
    /// Uniform in [-bound, bound] with bound = (1/hidden)^(1/2), used for
    /// recurrent weight matrices.
    UniformRecurrent { bound: f64 },
    /// Normal with mean 0, used for embedding tables.
    NormalScaled { std: f64 },
    /// Every element set to the same value (biases 0, layer-norm gains 1).
    Constant(f64),
}

impl InitSpec {
    pub fn sample(&self, shape: &[usize], rng: &mut Rng) -> Tensor {
        let len: usize = shape.iter().product();
        let data: Vec<f64> = match self {
            InitSpec::UniformFanIn { bound } | InitSpec::UniformRecurrent { bound } => {
                (0..len).map(|_| rng.uniform(-bound, *bound)).collect()
            }
            InitSpec::NormalScaled { std } => (0..len).map(|_| rng.normal() * std).collect(),
            InitSpec::Constant(v) => vec![*v; len],
        };
        Tensor::new(shape.to_vec(), data).expect("init shape")
    }
}

#[derive(Debug, Clone)]
pub struct ParamEntry {
    pub name: String,
    pub tensor: Tensor,
    pub init: InitSpec,
    pub group: PruneGroup,
}

/// Ordered collection of every trainable tensor in a model.
///
/// Iteration order is the registration order and is the canonical order for
/// pruning pools, snapshots and tie-breaking, so it must be deterministic.
#[derive(Debug, Clone)]
pub struct ParamRegistry {
    seed: u64,
    entries: Vec<ParamEntry>,
    index: HashMap<String, usize>,
}

impl ParamRegistry {
    pub fn new(seed: u64) -> Self {
        ParamRegistry {
            seed,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Seed the registry was initialized from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Register and initialize a tensor. Each tensor gets its own stream
    /// derived from (registry seed, name), so re-sampling a single entry
    /// reproduces exactly what `build_model` produced.
    pub fn add(
        &mut self,
        name: &str,
        shape: &[usize],
        init: InitSpec,
        group: PruneGroup,
    ) -> ModelResult<()> {
        if self.index.contains_key(name) {
            return Err(ModelError::Config(format!("duplicate parameter `{name}`")));
        }
        let mut rng = Rng::from_seed(derive_seed(self.seed, &["init", name]));
        let tensor = init.sample(shape, &mut rng);
        self.index.insert(name.to_string(), self.entries.len());
        self.entries.push(ParamEntry {
            name: name.to_string(),
            tensor,
            init,
            group,
        });
        Ok(())
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParamEntry> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn tensor(&self, name: &str) -> ModelResult<&Tensor> {
        self.get(name)
            .map(|e| &e.tensor)
            .ok_or_else(|| ModelError::Contract(format!("unknown parameter `{name}`")))
    }

    pub fn set_tensor(&mut self, name: &str, tensor: Tensor) -> ModelResult<()> {
        let idx = *self
            .index
            .get(name)
            .ok_or_else(|| ModelError::Contract(format!("unknown parameter `{name}`")))?;
        let entry = &mut self.entries[idx];
        if entry.tensor.shape() != tensor.shape() {
            return Err(ModelError::Contract(format!(
                "shape {:?} does not match `{name}` ({:?})",
                tensor.shape(),
                entry.tensor.shape()
            )));
        }
        entry.tensor = tensor;
        Ok(())
    }

    /// Total scalar parameter count.
    pub fn total_params(&self) -> usize {
        self.entries.iter().map(|e| e.tensor.len()).sum()
    }

    /// Bind every entry into a graph as a named parameter.
    pub fn bind(&self, g: &Graph) -> BoundParams {
        let mut vars = HashMap::new();
        for e in &self.entries {
            vars.insert(e.name.clone(), g.param(&e.name, &e.tensor));
        }
        BoundParams { vars }
    }

    /// Mutable (name, tensor) pairs in registration order, for optimizers.
    pub fn params_mut(&mut self) -> Vec<(&str, &mut Tensor)> {
        self.entries
            .iter_mut()
            .map(|e| (e.name.as_str(), &mut e.tensor))
            .collect()
    }
}

/// Graph handles for every registry entry of one forward pass.
pub struct BoundParams {
    vars: HashMap<String, Var>,
}

impl BoundParams {
    pub fn var(&self, name: &str) -> Var {
        *self
            .vars
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` not bound"))
    }
}
