use rand::Rng;

use super::config::{MutationPools, ResolvedPools};
use super::{Candidate, GaError, Provenance, Result};

/// Draws `k` members uniformly with replacement and returns the index of the
/// fittest; ties go to the lowest population index.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Candidate], k: usize, rng: &mut R) -> Result<usize> {
    if population.is_empty() {
        return Err(GaError::EmptyPool);
    }
    if let Some(i) = population.iter().position(|c| c.fitness().is_none()) {
        return Err(GaError::UnevaluatedFitness(i));
    }
    let mut best: Option<usize> = None;
    for _ in 0..k.max(1) {
        let i = rng.gen_range(0..population.len());
        best = Some(match best {
            None => i,
            Some(b) => {
                let (fb, fi) = (population[b].fitness().unwrap(), population[i].fitness().unwrap());
                if fi > fb || (fi == fb && i < b) {
                    i
                } else {
                    b
                }
            }
        });
    }
    Ok(best.expect("at least one draw"))
}

/// Swaps the word suffixes of `a` and `b` from `index` on.
pub fn crossover_at(a: &Candidate, b: &Candidate, index: usize) -> (Candidate, Candidate) {
    let index = index.min(a.len()).min(b.len());
    let join = |head: &[String], tail: &[String]| {
        let tokens: Vec<String> = head.iter().chain(tail).cloned().collect();
        Candidate::from_tokens(tokens, Provenance::Crossover).expect("children of non-empty parents are non-empty")
    };
    (
        join(&a.tokens()[..index], &b.tokens()[index..]),
        join(&b.tokens()[..index], &a.tokens()[index..]),
    )
}

/// Single-point crossover at an index drawn from `1..min(len(a), len(b))`.
/// Parents shorter than two words are returned unchanged without a draw.
pub fn crossover<R: Rng + ?Sized>(a: &Candidate, b: &Candidate, rng: &mut R) -> (Candidate, Candidate) {
    let m = a.len().min(b.len());
    if m < 2 {
        return (a.clone(), b.clone());
    }
    let i = rng.gen_range(1..m);
    crossover_at(a, b, i)
}

/// Which pool supplies an inserted or replacement word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolChoice {
    Initial,
    Dictionary,
    Wordlist,
}

impl PoolChoice {
    fn index(self) -> usize {
        match self {
            PoolChoice::Initial => 0,
            PoolChoice::Dictionary => 1,
            PoolChoice::Wordlist => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationOp {
    Delete { position: usize },
    Insert { position: usize, token: String },
    Replace { position: usize, token: String },
}

/// Applies a fully specified edit. Deleting the only word is a no-op.
pub fn apply_mutation(c: &Candidate, op: &MutationOp) -> Result<Candidate> {
    let mut tokens = c.tokens().to_vec();
    match op {
        MutationOp::Delete { position } => {
            if tokens.len() == 1 {
                return Ok(c.clone());
            }
            tokens.remove((*position).min(tokens.len() - 1));
        }
        MutationOp::Insert { position, token } => {
            tokens.insert((*position).min(tokens.len()), token.clone());
        }
        MutationOp::Replace { position, token } => {
            let p = (*position).min(tokens.len() - 1);
            tokens[p] = token.clone();
        }
    }
    Candidate::from_tokens(tokens, Provenance::Mutation)
}

fn draw_token<R: Rng + ?Sized>(pools: &ResolvedPools, rng: &mut R) -> Result<String> {
    let total = pools.active_weight();
    if total <= 0.0 {
        return Err(GaError::EmptyPool);
    }
    let active: Vec<usize> = (0..3)
        .filter(|&i| pools.weights[i] > 0.0 && !pools.pools[i].is_empty())
        .collect();
    let mut x = rng.gen::<f64>() * total;
    let mut chosen = *active.last().expect("non-empty");
    for &i in &active {
        if x < pools.weights[i] {
            chosen = i;
            break;
        }
        x -= pools.weights[i];
    }
    let pool = &pools.pools[chosen];
    Ok(pool[rng.gen_range(0..pool.len())].clone())
}

/// One random edit (delete, insert or replace, chosen uniformly) at a uniform
/// position, with new words drawn from the weighted pools.
pub fn mutate_resolved<R: Rng + ?Sized>(c: &Candidate, pools: &ResolvedPools, rng: &mut R) -> Result<Candidate> {
    let op = match rng.gen_range(0..3) {
        0 => {
            if c.len() == 1 {
                return Ok(c.clone());
            }
            MutationOp::Delete {
                position: rng.gen_range(0..c.len()),
            }
        }
        1 => {
            let position = rng.gen_range(0..=c.len());
            MutationOp::Insert {
                position,
                token: draw_token(pools, rng)?,
            }
        }
        _ => {
            let position = rng.gen_range(0..c.len());
            MutationOp::Replace {
                position,
                token: draw_token(pools, rng)?,
            }
        }
    };
    apply_mutation(c, &op)
}

pub fn mutate<R: Rng + ?Sized>(c: &Candidate, pools: &MutationPools, source: &str, rng: &mut R) -> Result<Candidate> {
    mutate_resolved(c, &pools.resolve(source), rng)
}

/// Draws a token from one specific pool; used for forced-pool edits.
pub fn draw_from_pool<R: Rng + ?Sized>(pools: &ResolvedPools, choice: PoolChoice, rng: &mut R) -> Result<String> {
    let pool = pools.pool(choice.index());
    if pool.is_empty() {
        return Err(GaError::EmptyPool);
    }
    Ok(pool[rng.gen_range(0..pool.len())].clone())
}
