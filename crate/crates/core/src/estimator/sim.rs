use crate::error::{Error, Result};
use crate::model::{RewardVector, StochasticMatrix};
use crate::rng::{self, StreamRng};

/// Draws successor states by inverse CDF over each row in stored order.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    cdf: Vec<Vec<f64>>,
    /// Last state with positive probability in each row; absorbs the rounding
    /// gap when a cumulative sum ends just below one.
    last_positive: Vec<usize>,
    rng: StreamRng,
}

impl ChainSampler {
    pub fn new(p: &StochasticMatrix, seed: u64) -> Self {
        let m = p.matrix();
        let n = p.size();
        let mut cdf = Vec::with_capacity(n);
        let mut last_positive = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = 0.0;
            let mut row = Vec::with_capacity(n);
            let mut last = 0;
            for j in 0..n {
                acc += m[(i, j)];
                row.push(acc);
                if m[(i, j)] > 0.0 {
                    last = j;
                }
            }
            cdf.push(row);
            last_positive.push(last);
        }
        Self {
            cdf,
            last_positive,
            rng: rng::stream(seed),
        }
    }

    pub fn next_state(&mut self, state: usize) -> usize {
        let u = rng::unit_f64(&mut self.rng);
        let row = &self.cdf[state];
        row.iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive[state])
    }
}

/// `steps` visited states starting from `s0`, each paired with its reward.
pub fn simulate_chain(
    p: &StochasticMatrix,
    f: &RewardVector,
    s0: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    f.expect_len(p.size())?;
    if s0 >= p.size() {
        return Err(Error::InvalidParameter(format!(
            "start state {s0} out of range for {} states",
            p.size()
        )));
    }
    let mut sampler = ChainSampler::new(p, seed);
    let mut state = s0;
    let mut path = Vec::with_capacity(steps);
    for k in 0..steps {
        if k > 0 {
            state = sampler.next_state(state);
        }
        path.push((state, f.values()[state]));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_path() {
        let p = StochasticMatrix::from_rows(&[[1.0]], 1e-9).unwrap();
        let f = RewardVector::new(vec![2.0]).unwrap();
        let path = simulate_chain(&p, &f, 0, 5, 1).unwrap();
        assert_eq!(path, vec![(0, 2.0); 5]);
    }

    #[test]
    fn deterministic_alternation() {
        let p = StochasticMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]], 1e-9).unwrap();
        let f = RewardVector::new(vec![1.0, 0.0]).unwrap();
        let states: Vec<usize> = simulate_chain(&p, &f, 0, 6, 3)
            .unwrap()
            .into_iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(states, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn visit_frequency() {
        let p = StochasticMatrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]], 1e-9).unwrap();
        let f = RewardVector::new(vec![1.0, 0.0]).unwrap();
        let path = simulate_chain(&p, &f, 0, 100_000, 42).unwrap();
        let freq = path.iter().filter(|x| x.0 == 0).count() as f64 / path.len() as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn same_seed_same_path() {
        let p =
            StochasticMatrix::from_rows(&[[0.2, 0.3, 0.5], [0.6, 0.4, 0.0], [0.1, 0.1, 0.8]], 1e-9).unwrap();
        let f = RewardVector::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            simulate_chain(&p, &f, 2, 1000, 9).unwrap(),
            simulate_chain(&p, &f, 2, 1000, 9).unwrap()
        );
        assert_ne!(
            simulate_chain(&p, &f, 2, 1000, 9).unwrap(),
            simulate_chain(&p, &f, 2, 1000, 10).unwrap()
        );
    }
}
