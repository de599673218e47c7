//! Seeded random instances: spaces, vectors, block systems and spans.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::blocks::{make_rosenthal, Block, BlockFunctional};
use crate::error::Result;
use crate::operators::search::{gaussian_point, sample_rng};
use crate::operators::BlockSystem;
use crate::space::{SpVector, SupportSet, WeightedSpace};

/// Ranges for random spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceRanges {
    pub p: (f64, f64),
    pub weight: (f64, f64),
    pub dim: (usize, usize),
}

impl Default for SpaceRanges {
    fn default() -> Self {
        Self {
            p: (2.1, 8.0),
            weight: (1e-3, 2.0),
            dim: (4, 40),
        }
    }
}

/// Log-uniform sample from `[lo, hi)`.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn random_space(rng: &mut ChaCha8Rng, r: SpaceRanges) -> Result<Arc<WeightedSpace>> {
    let p = rng.random_range(r.p.0..r.p.1);
    let d = rng.random_range(r.dim.0..=r.dim.1);
    let w = (0..d)
        .map(|_| log_uniform(rng, r.weight.0, r.weight.1))
        .collect();
    WeightedSpace::new(p, w)
}

/// A random nonempty subset of `1..=dim` of size at most `max_len`.
pub fn random_subset(rng: &mut ChaCha8Rng, dim: usize, max_len: usize) -> SupportSet {
    let len = rng.random_range(1..=max_len.min(dim).max(1));
    let mut idx: Vec<usize> = (1..=dim).collect();
    idx.shuffle(rng);
    idx.truncate(len);
    SupportSet::from(idx)
}

/// Gaussian coefficients on `set`, redrawn until nonzero.
pub fn random_vector_on(
    rng: &mut ChaCha8Rng,
    space: &Arc<WeightedSpace>,
    set: &SupportSet,
) -> Result<SpVector> {
    loop {
        let g = gaussian_point(rng, set.len());
        let x = SpVector::new(space, set.iter().zip(g))?;
        if !x.is_zero() {
            return Ok(x);
        }
    }
}

/// Gaussian coefficients on a random subset of random density.
pub fn random_vector(rng: &mut ChaCha8Rng, space: &Arc<WeightedSpace>) -> Result<SpVector> {
    let set = random_subset(rng, space.dim(), space.dim());
    random_vector_on(rng, space, &set)
}

/// A random valid system on `space`: disjoint supports over a shuffled
/// subset of the indices, each with a random nonempty `E`, and a vector that
/// is either extremal or Gaussian with the `E` part boosted. Every block is
/// normalized and the global `(delta, c)` are the tightest constants the
/// blocks admit.
pub fn random_block_system(
    rng: &mut ChaCha8Rng,
    space: &Arc<WeightedSpace>,
) -> Result<BlockSystem> {
    let d = space.dim();
    let mut idx: Vec<usize> = (1..=d).collect();
    idx.shuffle(rng);
    let used = rng.random_range(1..=d);
    let max_block = rng.random_range(1..=8usize);
    let mut parts: Vec<(SupportSet, SpVector, SupportSet)> = Vec::new();
    let mut rest = &idx[..used];
    while !rest.is_empty() {
        let len = rng.random_range(1..=max_block.min(rest.len()));
        let support = SupportSet::from(rest[..len].to_vec());
        rest = &rest[len..];
        let mut e_idx = support.as_slice().to_vec();
        e_idx.shuffle(rng);
        e_idx.truncate(rng.random_range(1..=len));
        let e = SupportSet::from(e_idx);
        let z = if rng.random_bool(0.3) {
            make_rosenthal(space, support.clone())?.vector().clone()
        } else {
            let g = random_vector_on(rng, space, &support)?;
            let boost = rng.random_range(1.0..4.0);
            g.restrict(&e)
                .scale(boost)
                .add(&g.restrict_complement(&e))?
        };
        let z = if z.restrict(&e).is_zero() {
            // keep (a) meaningful
            z.add(&SpVector::basis(space, e.first().unwrap())?)?
        } else {
            z
        };
        parts.push((support, z.normalized()?, e));
    }
    let mut delta = f64::INFINITY;
    let mut c = 0.0f64;
    let mut blocks = Vec::with_capacity(parts.len());
    for (support, z, e) in parts {
        let b = Block::new_unchecked(support, z, e, 1.0, 1.0)?;
        delta = delta.min(b.tight_delta());
        c = c.max(b.tight_c());
        blocks.push(b);
    }
    let blocks = blocks
        .into_iter()
        .map(|b| {
            Block::new(
                b.support().clone(),
                b.vector().clone(),
                b.eset().clone(),
                delta,
                c,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    BlockSystem::new(blocks, delta, c)
}

/// `count` disjointly supported random vectors (fewer if the space is small).
pub fn random_disjoint_family(
    rng: &mut ChaCha8Rng,
    space: &Arc<WeightedSpace>,
    count: usize,
    max_len: usize,
) -> Result<Vec<SpVector>> {
    let mut idx: Vec<usize> = (1..=space.dim()).collect();
    idx.shuffle(rng);
    let mut out = Vec::with_capacity(count);
    let mut rest = &idx[..];
    while out.len() < count && !rest.is_empty() {
        let len = rng.random_range(1..=max_len.min(rest.len()));
        let set = SupportSet::from(rest[..len].to_vec());
        rest = &rest[len..];
        out.push(random_vector_on(rng, space, &set)?);
    }
    Ok(out)
}

/// Convenience: the generator for `(seed, stream)`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    sample_rng(seed, index)
}
