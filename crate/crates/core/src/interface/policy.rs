use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use super::observe::{observe, Observation, ObservationLevel};
use crate::engine::{EngineError, GameState, GlobalAction, Rules, Side, UnitId, UnitOrder};

/// A decision function from a side's observation to orders for that side.
pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Named numeric parameters, for logs.
    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn decide(&self, obs: &Observation) -> GlobalAction;
}

/// Orders every own unit to hold.
#[derive(Clone, Copy, Debug, Default)]
pub struct HoldPolicy;

impl Policy for HoldPolicy {
    fn name(&self) -> &str {
        "hold"
    }

    fn decide(&self, obs: &Observation) -> GlobalAction {
        obs.own_units.iter().map(|u| (u.id, UnitOrder::Hold)).collect()
    }
}

/// A policy from a closure.
pub struct FnPolicy<F> {
    name: String,
    f: F,
}

impl<F> FnPolicy<F>
where
    F: Fn(&Observation) -> GlobalAction + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnPolicy { name: name.into(), f }
    }
}

impl<F> Policy for FnPolicy<F>
where
    F: Fn(&Observation) -> GlobalAction + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&self, obs: &Observation) -> GlobalAction {
        (self.f)(obs)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistrationError {
    #[error("unit {0:?} already has a registered policy")]
    AlreadyRegistered(UnitId),
    #[error("unit {unit:?} does not belong to {side}")]
    WrongSide { unit: UnitId, side: Side },
}

struct Registration {
    side: Side,
    units: Vec<UnitId>,
    policy: Arc<dyn Policy>,
}

/// Which units are driven by which policy, and what they may observe.
pub struct RunConfig {
    rules: Arc<Rules>,
    pub level: ObservationLevel,
    registrations: Vec<Registration>,
}

impl RunConfig {
    pub fn new(rules: Arc<Rules>, level: ObservationLevel) -> Self {
        RunConfig {
            rules,
            level,
            registrations: Vec::new(),
        }
    }

    pub fn register_policy(
        mut self,
        side: Side,
        units: &[UnitId],
        policy: Arc<dyn Policy>,
    ) -> Result<Self, RegistrationError> {
        let mut fresh = HashSet::new();
        for &u in units {
            let belongs = self.rules.roster.get(u.index()).is_some_and(|r| r.side == side);
            if !belongs {
                return Err(RegistrationError::WrongSide { unit: u, side });
            }
            if !fresh.insert(u) || self.policy_of(u).is_some() {
                return Err(RegistrationError::AlreadyRegistered(u));
            }
        }
        let mut units = units.to_vec();
        units.sort();
        self.registrations.push(Registration { side, units, policy });
        Ok(self)
    }

    /// The policy driving `unit`, if any.
    pub fn policy_of(&self, unit: UnitId) -> Option<&Arc<dyn Policy>> {
        self.registrations
            .iter()
            .find(|r| r.units.binary_search(&unit).is_ok())
            .map(|r| &r.policy)
    }

    /// In a command phase, give every registered live unit its policy's
    /// order. Orders a policy issues for units outside its registration are
    /// ignored.
    pub fn apply_policies(&self, state: &mut GameState) -> Result<(), EngineError> {
        if !state.is_command_phase() || state.terminal().is_some() {
            return Ok(());
        }
        for reg in &self.registrations {
            let obs = observe(state, reg.side, self.level);
            let decided = reg.policy.decide(&obs);
            let action: GlobalAction = decided
                .iter()
                .filter(|(id, _)| reg.units.binary_search(id).is_ok())
                .filter(|(id, _)| state.unit(*id).is_some_and(|u| u.alive()))
                .map(|(id, o)| (id, *o))
                .collect();
            state.apply_orders(reg.side, &action)?;
        }
        Ok(())
    }

    /// Apply registered policies if a command phase is open, then step.
    pub fn advance(&self, state: &mut GameState) -> Result<(), EngineError> {
        self.apply_policies(state)?;
        state.step()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Hex;
    use crate::scenario::fixtures;

    #[test]
    fn hold_policy_keeps_red_still_for_a_whole_game() {
        let s0 = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
        let rules = s0.rules().clone();
        let reds = rules.side_units(Side::Red).to_vec();
        let advance_all = FnPolicy::new("advance", |obs: &Observation| {
            let target = obs.rules.objectives_of(obs.side).next().unwrap().hex;
            obs.own_units
                .iter()
                .map(|u| (u.id, UnitOrder::move_to(target)))
                .collect()
        });
        let cfg = RunConfig::new(rules.clone(), ObservationLevel::Fog)
            .register_policy(Side::Red, &reds, Arc::new(HoldPolicy))
            .unwrap()
            .register_policy(Side::Blue, rules.side_units(Side::Blue), Arc::new(advance_all))
            .unwrap();
        let mut s = s0.fork();
        while s.terminal().is_none() {
            cfg.advance(&mut s).unwrap();
            for u in s.live_units(Side::Red) {
                assert_eq!(u.pos, rules.roster[u.id.index()].start);
            }
        }
        assert_eq!(s.score().mp_expended[Side::Red.index()], 0);
        assert!(s.score().mp_expended[Side::Blue.index()] > 0);
    }

    #[test]
    fn registered_and_external_orders_coexist() {
        let mut s = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
        let rules = s.rules().clone();
        let blues = rules.side_units(Side::Blue);
        let (a, b) = blues.split_at(2);
        let cfg = RunConfig::new(rules.clone(), ObservationLevel::Fog)
            .register_policy(Side::Blue, a, Arc::new(HoldPolicy))
            .unwrap();
        let target = Hex::new(3, 3);
        let external: GlobalAction = b.iter().map(|id| (*id, UnitOrder::move_to(target))).collect();
        s.apply_orders(Side::Blue, &external).unwrap();
        cfg.advance(&mut s).unwrap();
        for id in a {
            assert_eq!(s.unit(*id).unwrap().order, Some(UnitOrder::Hold));
        }
        for id in b {
            let o = s.unit(*id).unwrap().order;
            // Either still moving or arrived and converted to Hold.
            assert!(o == Some(UnitOrder::move_to(target)) || s.unit(*id).unwrap().pos == target);
        }
    }

    #[test]
    fn double_registration_rejected() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 1).unwrap();
        let rules = s.rules().clone();
        let b = rules.side_units(Side::Blue)[0];
        let cfg = RunConfig::new(rules.clone(), ObservationLevel::Full)
            .register_policy(Side::Blue, &[b], Arc::new(HoldPolicy))
            .unwrap();
        assert_eq!(
            cfg.register_policy(Side::Blue, &[b], Arc::new(HoldPolicy)).err(),
            Some(RegistrationError::AlreadyRegistered(b))
        );
        let cfg = RunConfig::new(rules.clone(), ObservationLevel::Full);
        assert!(matches!(
            cfg.register_policy(Side::Red, &[b], Arc::new(HoldPolicy)),
            Err(RegistrationError::WrongSide { .. })
        ));
    }
}
