//! Genetic algorithm on bit strings: fitness-proportional parent selection,
//! single-point crossover, per-bit mutation, and replacement of the worst
//! members by offspring that beat them.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::BitObjective;
use crate::error::{Error, Result};
use crate::record::{Pulse, Stage, Tracker};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population: usize,
    pub mutation_rate: f64,
    pub parent_pairs: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 70,
            mutation_rate: 0.001,
            parent_pairs: 30,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population <= 2 * self.parent_pairs || self.parent_pairs == 0 {
            return Err(Error::Domain(format!(
                "population {} must exceed the {} parents per generation",
                self.population,
                2 * self.parent_pairs
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Domain("mutation_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Children of a single-point crossover at `point` (bits before `point`
/// come from the first parent).
pub fn crossover(a: &[u8], b: &[u8], point: usize) -> (Vec<u8>, Vec<u8>) {
    let mut c1 = a[..point].to_vec();
    c1.extend_from_slice(&b[point..]);
    let mut c2 = b[..point].to_vec();
    c2.extend_from_slice(&a[point..]);
    (c1, c2)
}

/// Flips each bit with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(bits: &mut [u8], rate: f64, rng: &mut R) {
    if rate == 0.0 {
        return;
    }
    for b in bits {
        if rng.gen::<f64>() < rate {
            *b ^= 1;
        }
    }
}

/// Roulette-wheel index; uniform when all fitnesses are zero.
pub fn roulette<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    let total: f64 = fitness.iter().sum();
    if !(total > 0.0) {
        return rng.gen_range(0..fitness.len());
    }
    let mut u = rng.gen::<f64>() * total;
    for (k, &f) in fitness.iter().enumerate() {
        if u < f {
            return k;
        }
        u -= f;
    }
    fitness.len() - 1
}

#[derive(Clone, Debug)]
pub struct GaOutcome {
    pub best: Vec<u8>,
    pub fitness: f64,
    pub generations: u64,
}

/// Evolves a population until the tracker's budget is used; one record per
/// generation with the best member.
pub fn ga_optimize<R: Rng + ?Sized>(
    objective: &dyn BitObjective,
    config: &GaConfig,
    tracker: &mut Tracker<'_>,
    rng: &mut R,
) -> Result<GaOutcome> {
    config.validate()?;
    let len = objective.bit_count();
    let mut population: Vec<Vec<u8>> = (0..config.population)
        .map(|_| (0..len).map(|_| rng.gen_range(0..2u8)).collect())
        .collect();
    let mut fitness: Vec<f64> = population.par_iter().map(|b| objective.fitness(b)).collect();
    tracker.work(population.len() as u64);
    let mut generation = 0;
    while !tracker.exhausted() {
        let mut offspring = Vec::with_capacity(2 * config.parent_pairs);
        for _ in 0..config.parent_pairs {
            let a = roulette(&fitness, rng);
            let b = roulette(&fitness, rng);
            let point = if len > 1 { rng.gen_range(1..len) } else { 0 };
            let (mut c1, mut c2) = crossover(&population[a], &population[b], point);
            mutate(&mut c1, config.mutation_rate, rng);
            mutate(&mut c2, config.mutation_rate, rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        let child_fitness: Vec<f64> = offspring.par_iter().map(|b| objective.fitness(b)).collect();
        tracker.work(offspring.len() as u64);
        let mut order: Vec<usize> = (0..offspring.len()).collect();
        order.sort_by(|&i, &j| child_fitness[j].total_cmp(&child_fitness[i]).then(i.cmp(&j)));
        for k in order {
            let worst = (0..fitness.len())
                .min_by(|&i, &j| fitness[i].total_cmp(&fitness[j]).then(j.cmp(&i)))
                .expect("non-empty population");
            if child_fitness[k] > fitness[worst] {
                population[worst] = offspring[k].clone();
                fitness[worst] = child_fitness[k];
            } else {
                break;
            }
        }
        let best = best_index(&fitness);
        tracker.emit(Stage::Generation, generation, None, fitness[best], Pulse::Bits(population[best].clone()))?;
        generation += 1;
        tracker.complete_unit();
    }
    let best = best_index(&fitness);
    Ok(GaOutcome {
        best: population[best].clone(),
        fitness: fitness[best],
        generations: generation,
    })
}

fn best_index(fitness: &[f64]) -> usize {
    (0..fitness.len())
        .max_by(|&i, &j| fitness[i].total_cmp(&fitness[j]).then(j.cmp(&i)))
        .expect("non-empty population")
}
