use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, GameState};

/// Limits on one decision. Forward calls are engine steps plus state copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchBudget {
    pub max_forward_calls: u64,
    pub max_millis: Option<u64>,
    /// Optional cap on search iterations (evaluations for population and
    /// bandit planners).
    pub max_iterations: Option<u64>,
}

impl SearchBudget {
    pub fn calls(n: u64) -> Self {
        SearchBudget {
            max_forward_calls: n,
            max_millis: None,
            max_iterations: None,
        }
    }

    pub fn iterations(n: u64) -> Self {
        SearchBudget {
            max_forward_calls: u64::MAX,
            max_millis: None,
            max_iterations: Some(n),
        }
    }

    pub fn with_millis(mut self, ms: u64) -> Self {
        self.max_millis = Some(ms);
        self
    }

    /// The same limits with the call allowance scaled by `f` (at least 1).
    pub fn fraction(&self, f: f64) -> Self {
        let scale = |x: u64| {
            if x == u64::MAX {
                x
            } else {
                ((x as f64 * f).floor() as u64).max(1)
            }
        };
        SearchBudget {
            max_forward_calls: scale(self.max_forward_calls),
            max_millis: self.max_millis,
            max_iterations: self.max_iterations.map(scale),
        }
    }
}

/// Metered access to the forward model. Every copy and step goes through
/// here and is refused once the allowance or the deadline is reached, so a
/// planner cannot overspend.
#[derive(Debug)]
pub struct Forward {
    used: u64,
    max: u64,
    deadline: Option<Instant>,
}

impl Forward {
    pub fn new(budget: &SearchBudget) -> Self {
        Forward {
            used: 0,
            max: budget.max_forward_calls,
            deadline: budget.max_millis.map(|ms| Instant::now() + Duration::from_millis(ms)),
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.max - self.used
    }

    pub fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Whether `n` more calls fit.
    pub fn can_afford(&self, n: u64) -> bool {
        self.remaining() >= n && !self.timed_out()
    }

    fn charge(&mut self) -> bool {
        if self.can_afford(1) {
            self.used += 1;
            true
        } else {
            false
        }
    }

    pub fn copy(&mut self, s: &GameState) -> Option<GameState> {
        self.charge().then(|| s.fork())
    }

    /// One tick. `false` when the budget is spent or the game is over.
    pub fn step(&mut self, s: &mut GameState) -> bool {
        if s.terminal().is_some() || !self.charge() {
            return false;
        }
        match s.step() {
            Ok(()) => true,
            Err(EngineError::Terminal) => false,
            Err(e) => panic!("engine step failed: {e}"),
        }
    }

    /// Step until the next command phase or the end of the game. `false`
    /// when the budget ran out first.
    pub fn advance_cycle(&mut self, s: &mut GameState) -> bool {
        loop {
            if s.terminal().is_some() {
                return true;
            }
            if !self.step(s) {
                return false;
            }
            if s.is_command_phase() {
                return true;
            }
        }
    }

    /// Charge one call made outside this meter (a fork inside a helper).
    pub fn charge_external(&mut self) -> bool {
        self.charge()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::forward_calls;
    use crate::scenario::fixtures;

    #[test]
    fn meter_refuses_past_the_allowance() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 1).unwrap();
        let mut f = Forward::new(&SearchBudget::calls(5));
        let before = forward_calls();
        let mut c = f.copy(&s).unwrap();
        assert!(!f.advance_cycle(&mut c));
        assert_eq!(f.used(), 5);
        assert!(f.copy(&s).is_none());
        assert_eq!(forward_calls() - before, 5);
        assert_eq!(c.tick(), 4);
    }

    #[test]
    fn cycle_stops_at_command_phase() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 1).unwrap();
        let mut f = Forward::new(&SearchBudget::calls(100));
        let mut c = f.copy(&s).unwrap();
        assert!(f.advance_cycle(&mut c));
        assert_eq!(c.tick(), 10);
        assert_eq!(f.used(), 11);
    }

    #[test]
    fn fraction_keeps_at_least_one_call() {
        let b = SearchBudget::calls(3).fraction(0.1);
        assert_eq!(b.max_forward_calls, 1);
        assert_eq!(SearchBudget::iterations(10).fraction(0.5).max_iterations, Some(5));
    }
}
