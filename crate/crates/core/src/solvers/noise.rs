use crate::rng::{Domain, KeyedRng};

/// Brownian increments indexed by (step, dimension).
pub trait BrownianSource: Sync {
    fn dt(&self) -> f64;
    fn dim(&self) -> usize;
    fn n_steps(&self) -> usize;
    fn seed(&self) -> u64;
    fn sample(&self) -> u32;
    /// `B_{t_{k+1}}^d − B_{t_k}^d`, distributed N(0, dt).
    fn increment(&self, step: usize, dim: usize) -> f64;
}

/// Increments keyed by `(seed, sample_index, step, dimension)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStream {
    pub seed: u64,
    pub sample_index: u32,
    pub dim: usize,
    pub dt: f64,
    pub n_steps: usize,
    rng: KeyedRng,
    scale: f64,
}

impl NoiseStream {
    pub fn new(seed: u64, sample_index: u32, dim: usize, dt: f64, n_steps: usize) -> Self {
        assert!(dt > 0.0, "noise stream needs dt > 0");
        Self {
            seed,
            sample_index,
            dim,
            dt,
            n_steps,
            rng: KeyedRng::new(seed, Domain::Brownian),
            scale: dt.sqrt(),
        }
    }
}

impl BrownianSource for NoiseStream {
    fn dt(&self) -> f64 {
        self.dt
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn n_steps(&self) -> usize {
        self.n_steps
    }
    fn seed(&self) -> u64 {
        self.seed
    }
    fn sample(&self) -> u32 {
        self.sample_index
    }
    #[inline]
    fn increment(&self, step: usize, dim: usize) -> f64 {
        self.scale * self.rng.normal(step as u64, dim as u32, self.sample_index)
    }
}

/// The same Brownian path on a grid `factor` times coarser: each increment is
/// the sum of `factor` consecutive fine increments.
#[derive(Debug, Clone, Copy)]
pub struct CoarsenedNoise<'a, B: BrownianSource> {
    fine: &'a B,
    factor: usize,
}

impl<'a, B: BrownianSource> CoarsenedNoise<'a, B> {
    pub fn new(fine: &'a B, factor: usize) -> Self {
        assert!(factor >= 1);
        Self { fine, factor }
    }
}

impl<B: BrownianSource> BrownianSource for CoarsenedNoise<'_, B> {
    fn dt(&self) -> f64 {
        self.fine.dt() * self.factor as f64
    }
    fn dim(&self) -> usize {
        self.fine.dim()
    }
    fn n_steps(&self) -> usize {
        self.fine.n_steps() / self.factor
    }
    fn seed(&self) -> u64 {
        self.fine.seed()
    }
    fn sample(&self) -> u32 {
        self.fine.sample()
    }
    fn increment(&self, step: usize, dim: usize) -> f64 {
        (step * self.factor..(step + 1) * self.factor)
            .map(|k| self.fine.increment(k, dim))
            .sum()
    }
}

/// All increments of a stream as an `n_steps × dim` matrix.
pub fn brownian_increments(stream: &NoiseStream) -> Vec<Vec<f64>> {
    (0..stream.n_steps)
        .map(|k| (0..stream.dim).map(|d| stream.increment(k, d)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_are_reproducible() {
        let s = NoiseStream::new(1, 0, 2, 1e-3, 10);
        assert_eq!(brownian_increments(&s), brownian_increments(&s.clone()));
        let other = NoiseStream::new(1, 1, 2, 1e-3, 10);
        assert_ne!(brownian_increments(&s), brownian_increments(&other));
    }

    #[test]
    fn coarsening_sums_fine_increments() {
        let fine = NoiseStream::new(9, 2, 1, 0.25, 8);
        let coarse = CoarsenedNoise::new(&fine, 4);
        assert_eq!(coarse.n_steps(), 2);
        assert_eq!(coarse.dt(), 1.0);
        let expect: f64 = (4..8).map(|k| fine.increment(k, 0)).sum();
        assert_eq!(coarse.increment(1, 0), expect);
    }
}
