use std::collections::HashSet;

use rand::seq::index;

use crate::error::{param_err, Error, Result};
use crate::genealogy::{Coordinate, Regime, SampleGenealogy};
use crate::params::ModelParams;
use crate::rng::StreamRng;

/// Largest expected population `e^{rT}` the forward simulator accepts.
pub const FORWARD_POPULATION_GUARD: f64 = 1e5;

/// Number of forward runs tried before giving up on reaching `N_T >= n`.
pub const REJECTION_BUDGET: usize = 1_000_000;

/// Every individual ever born in one forward run, with the survivors in
/// planar order.
#[derive(Debug, Clone)]
pub struct ForwardPopulation {
    pub horizon: f64,
    pub birth_time: Vec<f64>,
    pub parent: Vec<Option<usize>>,
    /// Ids of the individuals alive at the horizon, left to right. A
    /// daughter is placed immediately to the right of her mother.
    pub alive: Vec<usize>,
}

impl ForwardPopulation {
    pub fn size(&self) -> usize {
        self.alive.len()
    }

    fn ancestry(&self, mut id: usize) -> Vec<usize> {
        let mut chain = vec![id];
        while let Some(p) = self.parent[id] {
            chain.push(p);
            id = p;
        }
        chain
    }

    /// Time at which the ancestral lines of two distinct individuals split.
    fn split_time(&self, x: usize, y: usize) -> f64 {
        let cx = self.ancestry(x);
        let on_x: HashSet<usize> = cx.iter().copied().collect();
        let cy = self.ancestry(y);
        let pos_y = cy.iter().position(|id| on_x.contains(id)).expect("one founder");
        let common = cy[pos_y];
        let pos_x = cx.iter().position(|&id| id == common).expect("common ancestor on both lines");
        // the branch off the common ancestor born first is where the lines part
        let mut split = f64::INFINITY;
        if pos_x > 0 {
            split = split.min(self.birth_time[cx[pos_x - 1]]);
        }
        if pos_y > 0 {
            split = split.min(self.birth_time[cy[pos_y - 1]]);
        }
        split
    }

    /// Coalescence heights between consecutive members of `positions`,
    /// which index into `alive` in increasing order.
    pub fn heights_between(&self, positions: &[usize]) -> Vec<f64> {
        positions
            .windows(2)
            .map(|w| self.horizon - self.split_time(self.alive[w[0]], self.alive[w[1]]))
            .collect()
    }
}

fn check_forward(params: &ModelParams) -> Result<()> {
    let growth = (params.r() * params.horizon()).exp();
    if growth > FORWARD_POPULATION_GUARD {
        return param_err(format!(
            "expected population e^(rT) = {growth:.3e} exceeds the forward simulator's limit {FORWARD_POPULATION_GUARD:e}"
        ));
    }
    Ok(())
}

/// Simulates the birth-death process forward from one founder at time 0
/// up to the horizon.
pub fn forward_population(params: &ModelParams, rng: &mut StreamRng) -> Result<ForwardPopulation> {
    check_forward(params)?;
    let (lambda, mu) = (params.lambda(), params.mu());
    let horizon = params.horizon();
    let mut pop = ForwardPopulation {
        horizon,
        birth_time: vec![0.0],
        parent: vec![None],
        alive: vec![0],
    };
    let mut t = 0.0;
    while !pop.alive.is_empty() {
        let size = pop.alive.len();
        let rate = (lambda + mu) * size as f64;
        t += -rng.uniform_open().ln() / rate;
        if t > horizon {
            break;
        }
        let j = ((rng.uniform_open() * size as f64) as usize).min(size - 1);
        if rng.uniform_open() * (lambda + mu) < lambda {
            let id = pop.birth_time.len();
            pop.birth_time.push(t);
            pop.parent.push(Some(pop.alive[j]));
            pop.alive.insert(j + 1, id);
        } else {
            pop.alive.remove(j);
        }
    }
    Ok(pop)
}

/// Genealogy of a uniform sample of `n` individuals at the horizon,
/// conditioned on `N_T >= n` by rejection, from a direct forward
/// simulation.
///
/// `fraction` is the realized sampling fraction `n / N_T`.
pub fn forward_bd_genealogy(params: &ModelParams, rng: &mut StreamRng) -> Result<SampleGenealogy> {
    check_forward(params)?;
    let n = params.n();
    if n < 1 {
        return param_err("sample size must be at least 1");
    }
    for _ in 0..REJECTION_BUDGET {
        let pop = forward_population(params, rng)?;
        let size = pop.size();
        if size < n {
            continue;
        }
        let mut picked = index::sample(rng, size, n).into_vec();
        picked.sort_unstable();
        return Ok(SampleGenealogy {
            regime: Regime::Exact,
            coordinate: Coordinate::H,
            horizon: params.horizon(),
            r: params.r(),
            times: pop.heights_between(&picked),
            population_size: Some(size as u64),
            fraction: n as f64 / size as f64,
        });
    }
    Err(Error::RetryBudget {
        attempts: REJECTION_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn whole_population_sample_counts() {
        let p = ModelParams::new(1.0, 0.5, 3.0, 1, 0.0).unwrap();
        let mut rng = RandomStream::new(3, 0).rng();
        for _ in 0..50 {
            let pop = forward_population(&p, &mut rng).unwrap();
            let all: Vec<usize> = (0..pop.size()).collect();
            let h = pop.heights_between(&all);
            assert_eq!(h.len() + 1, pop.size().max(1));
            assert!(h.iter().all(|&x| x > 0.0 && x <= 3.0));
        }
    }

    #[test]
    fn yule_never_goes_extinct() {
        let p = ModelParams::new(1.0, 0.0, 2.0, 1, 0.0).unwrap();
        let mut rng = RandomStream::new(1, 0).rng();
        for _ in 0..100 {
            assert!(forward_population(&p, &mut rng).unwrap().size() >= 1);
        }
    }

    #[test]
    fn sample_has_requested_size() {
        let p = ModelParams::new(1.0, 1.0, 4.0, 3, 0.0).unwrap();
        let mut rng = RandomStream::new(9, 0).rng();
        let g = forward_bd_genealogy(&p, &mut rng).unwrap();
        assert_eq!(g.n(), 3);
        assert!(g.population_size.unwrap() >= 3);
        assert!(g.times.iter().all(|&h| h > 0.0 && h <= 4.0));
    }

    #[test]
    fn guard_rejects_large_populations() {
        let p = ModelParams::new(2.0, 1.0, 20.0, 2, 0.0).unwrap();
        let mut rng = RandomStream::new(0, 0).rng();
        assert!(forward_bd_genealogy(&p, &mut rng).is_err());
    }

    #[test]
    fn planar_order_puts_daughters_right() {
        // founder 0 has daughters 1 (t=1) then 2 (t=2): order 0, 2, 1
        let pop = ForwardPopulation {
            horizon: 3.0,
            birth_time: vec![0.0, 1.0, 2.0],
            parent: vec![None, Some(0), Some(0)],
            alive: vec![0, 2, 1],
        };
        assert_eq!(pop.heights_between(&[0, 1, 2]), vec![1.0, 2.0]);
        assert_eq!(pop.heights_between(&[0, 2]), vec![2.0]);
    }
}
