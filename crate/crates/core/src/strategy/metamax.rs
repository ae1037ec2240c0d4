use rand_chacha::ChaCha8Rng;

use super::RunContext;
use crate::error::{Error, Result};
use crate::hull::{select_metamax, HSchedule, TieBreak};
use crate::instance::{Instance, RoundRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum RoundStatus {
    Completed(RoundRecord),
    /// The budget ran out part-way through the round.
    OutOfBudget,
    /// No active instance is left.
    Exhausted,
}

/// Index of the best instance; ties go to the smallest index.
pub fn leader_by_index(pool: &[Instance]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, inst) in pool.iter().enumerate() {
        if best.is_none_or(|b| inst.state.best_value > pool[b].state.best_value) {
            best = Some(i);
        }
    }
    best
}

/// Index of the best instance; ties go to the fewest steps, then the
/// smallest index.
pub fn leader_by_steps(pool: &[Instance]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, inst) in pool.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let (s, bs) = (&inst.state, &pool[b].state);
                s.best_value > bs.best_value || (s.best_value == bs.best_value && s.n < bs.n)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

fn total_steps(pool: &[Instance]) -> u64 {
    pool.iter().map(|i| i.state.n).sum()
}

fn record(round: u64, selected: Vec<usize>, leader: usize, pool: &[Instance], ctx: &RunContext<'_>) -> RoundRecord {
    RoundRecord {
        round,
        selected,
        leader,
        leader_steps: pool[leader].state.n,
        total_steps: total_steps(pool),
        best_value: ctx.objective.unshift(pool[leader].state.best_value),
        evals: ctx.objective.eval_count(),
        pool_size: pool.len(),
    }
}

/// METAMAX with a fixed pool of `K` instances.
pub struct MetaMaxK {
    k: usize,
    h: HSchedule,
    rng: ChaCha8Rng,
    pool: Vec<Instance>,
    round: u64,
}

impl MetaMaxK {
    pub fn new(k: usize, h: HSchedule, rng: ChaCha8Rng) -> Self {
        MetaMaxK {
            k,
            h,
            rng,
            pool: Vec::with_capacity(k),
            round: 0,
        }
    }

    pub fn pool(&self) -> &[Instance] {
        &self.pool
    }

    /// Creates the pool and steps every instance once. Returns `false` if the
    /// budget ran out first.
    pub fn initialize(&mut self, ctx: &mut RunContext<'_>) -> Result<bool> {
        for id in 0..self.k {
            let mut inst = ctx.spawn(id)?;
            let stepped = ctx.step(&mut inst)?;
            self.pool.push(inst);
            if !stepped {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn round(&mut self, ctx: &mut RunContext<'_>) -> Result<RoundStatus> {
        let h = self.h.at(total_steps(&self.pool));
        let selected = match select_metamax(self.pool.iter().map(|i| &i.state), &h, TieBreak::Random(&mut self.rng)) {
            Ok(s) => s,
            Err(Error::Exhausted) => return Ok(RoundStatus::Exhausted),
            Err(e) => return Err(e),
        };
        for &id in &selected {
            if !ctx.step(&mut self.pool[id])? {
                return Ok(RoundStatus::OutOfBudget);
            }
        }
        self.round += 1;
        let leader = leader_by_index(&self.pool).expect("non-empty pool");
        Ok(RoundStatus::Completed(record(
            self.round, selected, leader, &self.pool, ctx,
        )))
    }
}

/// METAMAX(∞) and METAMAX: one new instance joins in every round.
///
/// With `catch_up` set (METAMAX), ties in the selection go to the smallest
/// index, leader ties go to the fewest steps, and a new leader is stepped
/// until it has taken one more step than the previous leader.
pub struct MetaMaxUnbounded {
    h: HSchedule,
    catch_up: bool,
    rng: ChaCha8Rng,
    pool: Vec<Instance>,
    round: u64,
    leader: Option<usize>,
}

impl MetaMaxUnbounded {
    pub fn new(h: HSchedule, catch_up: bool, rng: ChaCha8Rng) -> Self {
        MetaMaxUnbounded {
            h,
            catch_up,
            rng,
            pool: Vec::new(),
            round: 0,
            leader: None,
        }
    }

    pub fn pool(&self) -> &[Instance] {
        &self.pool
    }

    pub fn round(&mut self, ctx: &mut RunContext<'_>) -> Result<RoundStatus> {
        let h = self.h.at(total_steps(&self.pool));
        let id = self.pool.len();
        let inst = ctx.spawn(id)?;
        self.pool.push(inst);

        let tie = if self.catch_up {
            TieBreak::SmallestIndex
        } else {
            TieBreak::Random(&mut self.rng)
        };
        let selected = match select_metamax(self.pool.iter().map(|i| &i.state), &h, tie) {
            Ok(s) => s,
            Err(Error::Exhausted) => return Ok(RoundStatus::Exhausted),
            Err(e) => return Err(e),
        };
        for &i in &selected {
            if !ctx.step(&mut self.pool[i])? {
                return Ok(RoundStatus::OutOfBudget);
            }
        }

        let leader = if self.catch_up {
            let leader = leader_by_steps(&self.pool).expect("non-empty pool");
            if let Some(prev) = self.leader.filter(|&p| p != leader) {
                let target = self.pool[prev].state.n + 1;
                let current = self.pool[leader].state.n;
                if current >= target {
                    // only reachable once terminated instances stop stepping
                    if self.pool.iter().all(|i| i.state.is_active()) {
                        return Err(Error::Contract(format!(
                            "catch-up count {} for leader {leader} (n = {current}) after {prev} (n = {})",
                            target as i64 - current as i64,
                            target - 1
                        )));
                    }
                }
                let extra = target.saturating_sub(current);
                for _ in 0..extra {
                    if !self.pool[leader].state.is_active() {
                        break;
                    }
                    if !ctx.step(&mut self.pool[leader])? {
                        return Ok(RoundStatus::OutOfBudget);
                    }
                }
            }
            leader
        } else {
            leader_by_index(&self.pool).expect("non-empty pool")
        };
        self.leader = Some(leader);
        self.round += 1;
        Ok(RoundStatus::Completed(record(
            self.round, selected, leader, &self.pool, ctx,
        )))
    }
}
