//! Reference strategies: UNIF, RAND, LUBY, SERIAL and the explore-and-exploit
//! wrappers.

use super::RunContext;
use crate::error::Result;
use crate::instance::Instance;

/// Round-robin choice at step `t`.
pub fn unif_select(t: u64, k: usize) -> usize {
    (t % k as u64) as usize
}

/// Length of the `i`-th run (1-based) of the Luby restart schedule:
/// 1, 1, 2, 1, 1, 2, 4, 1, ...
pub fn luby_length(i: u64) -> u64 {
    assert!(i >= 1, "luby index starts at 1");
    let mut i = i;
    loop {
        // smallest k with i <= 2^k - 1
        let k = 64 - i.leading_zeros();
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i = i - (1u64 << (k - 1)) + 1;
    }
}

/// The instance with the highest estimate among those that took a step,
/// earliest first on ties.
fn best_of(instances: Vec<Instance>) -> Option<Instance> {
    let mut best: Option<Instance> = None;
    for inst in instances.into_iter().filter(|i| i.state.n > 0) {
        if best.as_ref().is_none_or(|b| inst.state.best_value > b.state.best_value) {
            best = Some(inst);
        }
    }
    best
}

pub(super) fn run_unif(ctx: &mut RunContext<'_>, k: usize) -> Result<Vec<Instance>> {
    let mut pool = (0..k).map(|id| ctx.spawn(id)).collect::<Result<Vec<_>>>()?;
    let mut t = 0u64;
    loop {
        if pool.iter().all(|i| !i.state.is_active()) {
            return Ok(pool);
        }
        let id = unif_select(t, k);
        t += 1;
        if !pool[id].state.is_active() {
            continue;
        }
        if !ctx.step(&mut pool[id])? {
            return Ok(pool);
        }
    }
}

pub(super) fn run_rand(ctx: &mut RunContext<'_>) -> Result<()> {
    loop {
        let mut inst = ctx.spawn(ctx.spawned())?;
        if !ctx.step(&mut inst)? {
            return Ok(());
        }
    }
}

/// Runs instances back to back with Luby run lengths. Returns the best
/// instance seen.
pub(super) fn run_luby(ctx: &mut RunContext<'_>) -> Result<Option<Instance>> {
    let mut best: Option<Instance> = None;
    for i in 1u64.. {
        let mut inst = ctx.spawn(ctx.spawned())?;
        let mut out_of_budget = false;
        for _ in 0..luby_length(i) {
            if !inst.state.is_active() {
                break;
            }
            if !ctx.step(&mut inst)? {
                out_of_budget = true;
                break;
            }
        }
        best = best_of(best.into_iter().chain(std::iter::once(inst)).collect());
        if out_of_budget {
            break;
        }
    }
    Ok(best)
}

/// Runs one instance until it terminates, then starts the next. `start`
/// continues an existing instance first.
pub(super) fn run_serial(ctx: &mut RunContext<'_>, start: Option<Instance>) -> Result<()> {
    let mut current = match start {
        Some(i) => i,
        None => ctx.spawn(ctx.spawned())?,
    };
    loop {
        if !current.state.is_active() {
            current = ctx.spawn(ctx.spawned())?;
        }
        if !ctx.step(&mut current)? {
            return Ok(());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Explorer {
    Unif(usize),
    Luby,
}

/// Explores for half of the budget, then spends the rest on the best
/// instance found. If that instance terminates, fresh instances are run
/// serially.
pub(super) fn run_explore_exploit(ctx: &mut RunContext<'_>, explorer: Explorer) -> Result<()> {
    let total = ctx.budget;
    ctx.budget = total / 2;
    let best = match explorer {
        Explorer::Unif(k) => best_of(run_unif(ctx, k)?),
        Explorer::Luby => run_luby(ctx)?,
    };
    ctx.budget = total;
    run_serial(ctx, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn luby_oracle(i: u64) -> u64 {
        // direct transcription of the two-case recursion
        let mut k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            1 << (k - 1)
        } else {
            luby_oracle(i - (1u64 << (k - 1)) + 1)
        }
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (1..=15).map(luby_length).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
        assert_eq!(luby_length(7), 4);
    }

    #[test]
    fn luby_matches_recursion() {
        for i in 1..5000 {
            assert_eq!(luby_length(i), luby_oracle(i), "i = {i}");
        }
    }

    #[test]
    fn unif_examples() {
        assert_eq!(unif_select(5, 3), 2);
        assert_eq!(unif_select(0, 7), 0);
        assert_eq!(unif_select(7, 7), 0);
    }
}
