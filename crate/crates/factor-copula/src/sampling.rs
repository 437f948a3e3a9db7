//! Exact sampling from factor models.
//!
//! A single-layer draw conditions on one uniform factor, samples the frozen
//! inner copula, and pushes each coordinate through the inverse h-function
//! of its linking copula.  The nested case draws all layer variables first,
//! samples the inner copula frozen at the last layer, and inverts the whole
//! transform chain from the last layer back to the first.

use crate::bicop::clamp_unit;
use crate::error::{FcError, Result};
use crate::factor_model::FactorModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Reproducible RNG handle: a seed plus a stream id.
///
/// Distinct `(seed, stream)` pairs produce independent sequences; the same
/// pair reproduces the identical sequence.  Row `k` of a sample runs on
/// stream `stream + k`, so parallel and serial generation agree; use
/// [`RngHandle::child`] to carve out widely separated stream blocks for
/// independent experiments under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngHandle {
    /// Base seed.
    pub seed: u64,
    /// Stream id within the seed.
    pub stream: u64,
}

impl RngHandle {
    /// Handle on stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        RngHandle { seed, stream: 0 }
    }

    /// Handle on a specific stream of `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngHandle { seed, stream }
    }

    /// Generator for this handle's own stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Generator for row `k` (stream offset by `k`).
    pub fn row_rng(&self, k: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream.wrapping_add(k));
        rng
    }

    /// A handle whose stream block is far from this one: child `i` starts at
    /// stream `stream + (i + 1) * 2^40`, leaving room for `2^40` rows per
    /// block.
    pub fn child(&self, i: u64) -> RngHandle {
        RngHandle {
            seed: self.seed,
            stream: self.stream.wrapping_add((i + 1) << 40),
        }
    }
}

/// Inverse of the conditional transform: solves `G_i(u; t) = p` by applying
/// the layer inverse h-functions in reverse order (last layer first).
pub fn g_inverse(model: &FactorModel, i: usize, p: f64, t: &[f64]) -> Result<f64> {
    if i >= model.d() {
        return Err(FcError::Domain(format!("variable index {i} out of range (d = {})", model.d())));
    }
    if t.len() != model.w() {
        return Err(FcError::Domain(format!(
            "expected {} layer coordinates, got {}",
            model.w(),
            t.len()
        )));
    }
    let mut x = clamp_unit(p);
    for j in (0..model.w()).rev() {
        let cop = model.linking_copula(i, j);
        x = match cop.hinv(x, t[j]) {
            Ok(v) => v,
            // One retry from a freshly clamped argument before giving up.
            Err(_) => cop.hinv(clamp_unit(x), clamp_unit(t[j]))?,
        };
    }
    Ok(x)
}

fn sample_rows(model: &FactorModel, n: usize, handle: RngHandle) -> Result<Vec<Vec<f64>>> {
    let d = model.d();
    let w = model.w();
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = handle.row_rng(k);
            let mut t = vec![0.0f64; w];
            for tj in t.iter_mut() {
                *tj = clamp_unit(rng.random::<f64>());
            }
            let mut p = vec![0.0f64; d];
            model.inner().sample_into(t[w - 1], &mut rng, &mut p)?;
            let mut row = vec![0.0f64; d];
            for i in 0..d {
                row[i] = g_inverse(model, i, p[i], &t)?;
            }
            Ok(row)
        })
        .collect()
}

/// Draw `n` exact observations from a single-layer (extended one-factor)
/// model: factor, frozen inner sample, inverse h-functions.
pub fn sample_eofc(model: &FactorModel, n: usize, handle: RngHandle) -> Result<Vec<Vec<f64>>> {
    if model.w() != 1 {
        return Err(FcError::Domain(format!(
            "single-layer sampler called on a model with {} layers",
            model.w()
        )));
    }
    sample_rows(model, n, handle)
}

/// Draw `n` exact observations from a nested model of any depth: layer
/// variables, frozen inner sample, inverse transform chains.
pub fn sample_neofc(model: &FactorModel, n: usize, handle: RngHandle) -> Result<Vec<Vec<f64>>> {
    sample_rows(model, n, handle)
}
