//! Seeded generators for random chains, generators and MDPs.
#![allow(dead_code)]

use fundmat::rng::{stream, unit_f64, StreamRng};
use fundmat::{GeneratorMatrix, MdpModel, ReferenceVector, RewardVector, StochasticMatrix};

pub struct Gen {
    rng: StreamRng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self { rng: stream(seed) }
    }

    pub fn unit(&mut self) -> f64 {
        unit_f64(&mut self.rng)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn index(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }

    /// Sparse-ish random weights on a ring `i -> i+1` plus a self loop at 0,
    /// so the chain is irreducible and aperiodic whatever else is dropped.
    pub fn chain_rows(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let mut row: Vec<f64> = (0..n)
                    .map(|_| if self.unit() < 0.4 { 0.0 } else { self.unit() })
                    .collect();
                row[(i + 1) % n] += 0.1 + self.unit();
                if i == 0 {
                    row[0] += 0.1 + self.unit();
                }
                let s: f64 = row.iter().sum();
                row.iter().map(|x| x / s).collect()
            })
            .collect()
    }

    pub fn chain(&mut self, n: usize) -> StochasticMatrix {
        StochasticMatrix::from_rows(&self.chain_rows(n), 1e-9).expect("rows are stochastic")
    }

    /// Entries of mixed sign, shifted so that `r·e = dot`.
    pub fn reference_with_dot(&mut self, n: usize, dot: f64) -> ReferenceVector {
        let v: Vec<f64> = (0..n).map(|_| self.range(-0.5, 1.0)).collect();
        let shift = (dot - v.iter().sum::<f64>()) / n as f64;
        ReferenceVector::with_tol(v.iter().map(|x| x + shift).collect(), 0.0).expect("finite reference")
    }

    pub fn reference(&mut self, n: usize) -> ReferenceVector {
        let dot = self.range(0.1, 1.9);
        self.reference_with_dot(n, dot)
    }

    pub fn rewards(&mut self, n: usize) -> RewardVector {
        RewardVector::new((0..n).map(|_| self.range(-2.0, 2.0)).collect()).expect("finite rewards")
    }

    pub fn generator(&mut self, n: usize) -> GeneratorMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row: Vec<f64> = (0..n)
                    .map(|j| {
                        if j == i || self.unit() < 0.4 {
                            0.0
                        } else {
                            self.range(0.0, 3.0)
                        }
                    })
                    .collect();
                if n > 1 {
                    row[(i + 1) % n] += 0.1 + self.unit();
                }
                row[i] = -row.iter().sum::<f64>();
                row
            })
            .collect();
        GeneratorMatrix::from_rows(&rows, 1e-9).expect("valid generator")
    }

    pub fn mdp(&mut self, states: usize, actions: usize) -> MdpModel {
        let transitions: Vec<Vec<Vec<f64>>> = (0..states)
            .map(|_| (0..actions).map(|_| self.positive_row(states)).collect())
            .collect();
        let rewards: Vec<Vec<f64>> = (0..states)
            .map(|_| (0..actions).map(|_| self.range(-2.0, 2.0)).collect())
            .collect();
        let policy: Vec<Vec<f64>> = (0..states).map(|_| self.positive_row(actions)).collect();
        MdpModel::new(&transitions, &rewards, &policy, 1e-9).expect("valid mdp")
    }

    fn positive_row(&mut self, n: usize) -> Vec<f64> {
        let row: Vec<f64> = (0..n).map(|_| 0.05 + self.unit()).collect();
        let s: f64 = row.iter().sum();
        row.iter().map(|x| x / s).collect()
    }
}
