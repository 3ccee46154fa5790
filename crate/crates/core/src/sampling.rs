//! b-nice sampling and the reweighted minibatch gradient estimator
//! `∇̃G(y) = (1/N) Σᵢ vᵢ ∇Gᵢ(y)` with `vᵢ = 1{i ∈ S} / pᵢ`.

use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Result, StamError};
use crate::linalg;
use crate::model::ProblemInstance;

/// Seedable counter-based random stream. Identical `(seed, stream_id)` pairs
/// produce identical draws on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// An independent child stream. Depends only on `(seed, stream_id, child)`,
    /// never on how much of the parent has been consumed.
    pub fn split(&self, child: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(child.wrapping_add(1)));
        RngStream::new(self.seed, id)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// A sampled index set `S` with its sampling vector `v` and probabilities `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    indices: Vec<usize>,
    weights: Vec<f64>,
    probs: Vec<f64>,
}

impl SampleBatch {
    /// Batch over the sorted, duplicate-free `indices` with uniform
    /// inclusion probability `|S| / N`.
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        let b = indices.len();
        if b == 0 || b > n || indices.last().is_some_and(|&i| i >= n) {
            return Err(StamError::arg(format!(
                "batch indices must be a nonempty subset of 0..{n}"
            )));
        }
        let p = b as f64 / n as f64;
        let w = n as f64 / b as f64;
        let mut weights = vec![0.0; n];
        for &i in &indices {
            weights[i] = w;
        }
        Ok(SampleBatch {
            n,
            indices,
            weights,
            probs: vec![p; n],
        })
    }

    /// The deterministic full batch, `vᵢ = 1` for every `i`.
    pub fn full(n: usize) -> Self {
        SampleBatch::from_indices(n, (0..n).collect()).expect("n ≥ 1")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn check_batch_size(n: usize, b: usize) -> Result<()> {
    if b == 0 || b > n {
        return Err(StamError::arg(format!(
            "batch size {b} outside [1, {n}]"
        )));
    }
    Ok(())
}

/// Uniform size-`b` subset of `0..n`, drawn without replacement.
pub fn draw_b_nice(n: usize, b: usize, rng: &mut RngStream) -> Result<SampleBatch> {
    check_batch_size(n, b)?;
    let picked = index::sample(rng.rng(), n, b).into_vec();
    SampleBatch::from_indices(n, picked)
}

/// `E[vᵢ²]` under b-nice sampling: `E[1{i∈S}] / pᵢ² = 1/pᵢ = N/b`.
pub fn second_moment_vi(n: usize, b: usize) -> Result<f64> {
    check_batch_size(n, b)?;
    Ok(n as f64 / b as f64)
}

/// `(1/N) Σ_{i∈S} vᵢ ∇Gᵢ(y)`, accumulated in index order.
pub fn stochastic_gradient_g(
    problem: &ProblemInstance,
    y: &[f64],
    batch: &SampleBatch,
) -> Result<Vec<f64>> {
    check_len("batch population", problem.n_components(), batch.n())?;
    check_len("y", problem.dim_y(), y.len())?;
    let mut sum = vec![0.0; y.len()];
    let mut scratch = vec![0.0; y.len()];
    for &i in batch.indices() {
        scratch.iter_mut().for_each(|v| *v = 0.0);
        problem.finite_sum().add_component_gradient(i, y, 1.0, &mut scratch);
        if !linalg::all_finite(&scratch) {
            return Err(StamError::NonFiniteComponent { component: i });
        }
        linalg::axpy(batch.weights()[i], &scratch, &mut sum);
    }
    let inv = batch.n() as f64;
    sum.iter_mut().for_each(|v| *v /= inv);
    Ok(sum)
}

/// How minibatches are drawn along a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Fresh b-nice draw at every iteration.
    BNice,
    /// Reshuffle once per pass, then take consecutive chunks of size `b`.
    /// A trailing chunk shorter than `b` is used as a smaller batch.
    EpochShuffle,
}

/// Stateful batch source for a solver run.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    mode: SamplingMode,
    n: usize,
    b: usize,
    perm: Vec<usize>,
    cursor: usize,
}

impl BatchSampler {
    pub fn new(mode: SamplingMode, n: usize, b: usize) -> Result<Self> {
        check_batch_size(n, b)?;
        Ok(BatchSampler {
            mode,
            n,
            b,
            perm: (0..n).collect(),
            cursor: n,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.b
    }

    pub fn next_batch(&mut self, rng: &mut RngStream) -> Result<SampleBatch> {
        if self.b == self.n {
            return Ok(SampleBatch::full(self.n));
        }
        match self.mode {
            SamplingMode::BNice => draw_b_nice(self.n, self.b, rng),
            SamplingMode::EpochShuffle => {
                if self.cursor >= self.n {
                    self.perm.sort_unstable();
                    self.perm.shuffle(rng.rng());
                    self.cursor = 0;
                }
                let end = (self.cursor + self.b).min(self.n);
                let chunk = self.perm[self.cursor..end].to_vec();
                self.cursor = end;
                SampleBatch::from_indices(self.n, chunk)
            }
        }
    }
}
