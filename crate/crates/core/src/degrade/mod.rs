//! Linear measurement operators with exact adjoints.

mod ops;
mod task;

pub use ops::{BoxDownsample, GaussianBlur, TemporalAverage};
pub use task::{Task, TaskKind};

use std::fmt::Debug;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seqio::{dot, norm, Dims, FrameSequence};

/// A linear map between two fixed sequence shapes.
pub trait LinearOp: Debug + Send + Sync {
    fn input_dims(&self) -> Dims;
    fn output_dims(&self) -> Dims;
    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence>;
    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence>;
    fn describe(&self) -> String;
}

pub type Degradation = Arc<dyn LinearOp>;

pub(crate) fn expect_dims(seq: &FrameSequence, want: Dims, what: &str) -> Result<()> {
    if seq.dims() != want {
        return Err(Error::validation(format!(
            "{what} expects a {want} sequence, got {}",
            seq.dims()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    dims: Dims,
}

impl Identity {
    pub fn new(dims: Dims) -> Result<Self> {
        dims.validate()?;
        Ok(Identity { dims })
    }
}

impl LinearOp for Identity {
    fn input_dims(&self) -> Dims {
        self.dims
    }
    fn output_dims(&self) -> Dims {
        self.dims
    }
    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        expect_dims(x, self.dims, "identity")?;
        Ok(x.clone())
    }
    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        self.forward(y)
    }
    fn describe(&self) -> String {
        "identity".into()
    }
}

/// Operators applied left to right.
#[derive(Debug, Clone)]
pub struct Compose {
    ops: Vec<Degradation>,
}

impl Compose {
    pub fn new(ops: Vec<Degradation>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::validation("compose needs at least one operator"));
        }
        for pair in ops.windows(2) {
            if pair[0].output_dims() != pair[1].input_dims() {
                return Err(Error::validation(format!(
                    "cannot chain {} (out {}) into {} (in {})",
                    pair[0].describe(),
                    pair[0].output_dims(),
                    pair[1].describe(),
                    pair[1].input_dims()
                )));
            }
        }
        Ok(Compose { ops })
    }

    pub fn ops(&self) -> &[Degradation] {
        &self.ops
    }
}

impl LinearOp for Compose {
    fn input_dims(&self) -> Dims {
        self.ops[0].input_dims()
    }
    fn output_dims(&self) -> Dims {
        self.ops[self.ops.len() - 1].output_dims()
    }
    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        let mut cur = self.ops[0].forward(x)?;
        for op in &self.ops[1..] {
            cur = op.forward(&cur)?;
        }
        Ok(cur)
    }
    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        let mut cur = y.clone();
        for op in self.ops.iter().rev() {
            cur = op.adjoint(&cur)?;
        }
        Ok(cur)
    }
    fn describe(&self) -> String {
        self.ops.iter().map(|o| o.describe()).collect::<Vec<_>>().join(" -> ")
    }
}

/// Dense row-major matrix acting on flattened sequences.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    input: Dims,
    output: Dims,
    matrix: Vec<f64>,
}

impl MatrixOperator {
    pub fn new(input: Dims, output: Dims, matrix: Vec<f64>) -> Result<Self> {
        input.validate()?;
        output.validate()?;
        if matrix.len() != input.len() * output.len() {
            return Err(Error::validation(format!(
                "matrix has {} entries, expected {}x{}",
                matrix.len(),
                output.len(),
                input.len()
            )));
        }
        Ok(MatrixOperator { input, output, matrix })
    }

    /// Materializes any operator column by column.
    pub fn from_op(op: &dyn LinearOp) -> Result<Self> {
        let (n, m) = (op.input_dims().len(), op.output_dims().len());
        let mut matrix = vec![0.0; n * m];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = op.forward(&FrameSequence::new(op.input_dims(), e.clone())?)?;
            for (i, v) in col.data().iter().enumerate() {
                matrix[i * n + j] = *v;
            }
            e[j] = 0.0;
        }
        Self::new(op.input_dims(), op.output_dims(), matrix)
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }
}

impl LinearOp for MatrixOperator {
    fn input_dims(&self) -> Dims {
        self.input
    }
    fn output_dims(&self) -> Dims {
        self.output
    }
    fn forward(&self, x: &FrameSequence) -> Result<FrameSequence> {
        expect_dims(x, self.input, "matrix operator")?;
        let n = self.input.len();
        let y = self.matrix.chunks_exact(n).map(|row| dot(row, x.data())).collect();
        FrameSequence::new(self.output, y)
    }
    fn adjoint(&self, y: &FrameSequence) -> Result<FrameSequence> {
        expect_dims(y, self.output, "matrix operator adjoint")?;
        let n = self.input.len();
        let mut x = vec![0.0; n];
        for (row, &yi) in self.matrix.chunks_exact(n).zip(y.data()) {
            for (xj, a) in x.iter_mut().zip(row) {
                *xj += a * yi;
            }
        }
        FrameSequence::new(self.input, x)
    }
    fn describe(&self) -> String {
        format!("matrix({} -> {})", self.input, self.output)
    }
}

pub(crate) fn gaussian_sequence(dims: Dims, rng: &mut ChaCha8Rng) -> Result<FrameSequence> {
    let data = (0..dims.len()).map(|_| StandardNormal.sample(rng)).collect();
    FrameSequence::new(dims, data)
}

/// Largest `|⟨Ax,y⟩ − ⟨x,Aᵀy⟩| / (‖Ax‖‖y‖ + ε)` over random Gaussian probes.
pub fn adjoint_test(op: &dyn LinearOp, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = gaussian_sequence(op.input_dims(), &mut rng)?;
        let y = gaussian_sequence(op.output_dims(), &mut rng)?;
        let ax = op.forward(&x)?;
        let aty = op.adjoint(&y)?;
        let lhs = dot(ax.data(), y.data());
        let rhs = dot(x.data(), aty.data());
        let scale = norm(ax.data()) * norm(y.data()) + 1e-300;
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}
