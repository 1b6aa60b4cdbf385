//! Particle-filter tracking of enemy units a side cannot see, and sampling of
//! fully specified states for planning under fog of war.
//!
//! A particle hypothesizes a position for every hidden enemy unit: an enemy
//! on the scenario roster that is neither a current contact nor a known
//! kill. Contacts are known and stay out of the particles.
//!
//! Evidence is of two kinds. A hypothesis is impossible when it places a
//! unit on a hex occupied by an own unit or by a contact seen this tick.
//! Otherwise an own unit that could see the hypothesized hex but did not
//! report a contact multiplies the weight by the probability of missing it,
//! `1 - pSpot`. Between updates each hypothesized unit follows a lazy random
//! walk: per elapsed command cycle it stays with probability 1/2 and
//! otherwise steps to a uniformly chosen free adjacent passable hex.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::engine::combat::spot_probability;
use crate::engine::rng::derive_seed;
use crate::engine::{GameState, Hex, Rules, Side, SplitMix64, UnitId};
use crate::interface::{inject_belief, BeliefAssumption, HypothesizedUnit, InjectError, Observation, ObservationLevel};

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    /// One entry per hidden enemy unit, ascending by unit id.
    pub units: Vec<HypothesizedUnit>,
    pub weight: f64,
}

impl Particle {
    pub fn assumption(&self) -> BeliefAssumption {
        BeliefAssumption {
            placements: self.units.clone(),
        }
    }

    pub fn position_of(&self, id: UnitId) -> Option<Hex> {
        self.units.iter().find(|u| u.unit == id).map(|u| u.pos)
    }
}

#[derive(Clone, Debug)]
pub struct ParticleSet {
    pub side: Side,
    pub particles: Vec<Particle>,
    /// Set when an update found every particle impossible and the set was
    /// redrawn from the prior.
    pub degenerate: bool,
    /// Tick of the observation last incorporated.
    pub tick: u64,
    level: ObservationLevel,
    rules: Arc<Rules>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeliefError {
    #[error("a particle set needs at least one particle")]
    NoParticles,
    #[error("no free hex left for hidden unit {0:?}")]
    NoRoom(UnitId),
    #[error(transparent)]
    Inject(#[from] InjectError),
}

/// What an observation says about where hidden units cannot be and which
/// hexes own units are watching.
struct Evidence {
    hidden: Vec<(UnitId, u16, u8)>,
    blocked: HashSet<Hex>,
    /// `(position, sight)` of every own unit.
    watchers: Vec<(Hex, u32)>,
}

impl Evidence {
    fn from(obs: &Observation) -> Evidence {
        let rules = &obs.rules;
        let hidden = rules
            .side_units(obs.side.opponent())
            .iter()
            .copied()
            .filter(|id| obs.contact(*id).is_none() && !obs.known_kills.contains(id))
            .map(|id| {
                let r = &rules.roster[id.index()];
                (id, r.kind, r.strength)
            })
            .collect();
        let mut blocked: HashSet<Hex> = obs.own_units.iter().map(|u| u.pos).collect();
        blocked.extend(obs.contacts.iter().filter(|c| c.staleness == 0).map(|c| c.pos));
        let watchers = obs
            .own_units
            .iter()
            .map(|u| (u.pos, rules.unit_type(u.kind).sight))
            .collect();
        Evidence {
            hidden,
            blocked,
            watchers,
        }
    }

    /// Probability that no own unit spots a unit standing on `h`.
    fn miss_probability(&self, rules: &Rules, h: Hex) -> f64 {
        let conceal = rules.map.terrain(h).map(|t| t.concealment()).unwrap_or(1.0);
        self.watchers
            .iter()
            .filter(|(p, sight)| p.distance(h) <= *sight && rules.map.line_of_sight(*p, h))
            .map(|(p, sight)| 1.0 - spot_probability(p.distance(h), *sight, conceal))
            .product()
    }
}

fn candidate_hexes(rules: &Rules, blocked: &HashSet<Hex>) -> Vec<Hex> {
    rules
        .map
        .hexes()
        .filter(|h| rules.map.passable(*h) && !blocked.contains(h))
        .collect()
}

fn draw_particle(
    rules: &Rules,
    ev: &Evidence,
    candidates: &[Hex],
    rng: &mut SplitMix64,
) -> Result<Particle, BeliefError> {
    let mut taken: HashSet<Hex> = HashSet::new();
    let mut units = Vec::with_capacity(ev.hidden.len());
    for &(id, kind, strength) in &ev.hidden {
        let free = candidates.len() - taken.len().min(candidates.len());
        if free == 0 {
            return Err(BeliefError::NoRoom(id));
        }
        let pos = loop {
            let h = candidates[rng.gen_range(0..candidates.len())];
            if !taken.contains(&h) {
                break h;
            }
        };
        taken.insert(pos);
        units.push(HypothesizedUnit {
            unit: id,
            type_name: rules.unit_type(kind).name.clone(),
            pos,
            strength,
        });
    }
    Ok(Particle { units, weight: 0.0 })
}

fn draw_from_prior(obs: &Observation, n: usize, seed: u64) -> Result<Vec<Particle>, BeliefError> {
    let ev = Evidence::from(obs);
    let candidates = candidate_hexes(&obs.rules, &ev.blocked);
    let mut rng = SplitMix64::new(seed);
    let w = 1.0 / n as f64;
    (0..n)
        .map(|_| {
            let mut p = draw_particle(&obs.rules, &ev, &candidates, &mut rng)?;
            p.weight = w;
            Ok(p)
        })
        .collect()
}

/// `n` equally weighted particles with hidden units placed uniformly over
/// passable hexes not known to be occupied.
pub fn init_particles(obs: &Observation, n: usize, seed: u64) -> Result<ParticleSet, BeliefError> {
    if n == 0 {
        return Err(BeliefError::NoParticles);
    }
    Ok(ParticleSet {
        side: obs.side,
        particles: draw_from_prior(obs, n, seed)?,
        degenerate: false,
        tick: obs.tick,
        level: obs.level,
        rules: obs.rules.clone(),
    })
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Effective sample size `1 / sum(w^2)`.
    pub fn ess(&self) -> f64 {
        1.0 / self.particles.iter().map(|p| p.weight * p.weight).sum::<f64>()
    }

    /// Posterior probability that hidden unit `id` is on each hex that any
    /// particle places it on, ascending by hex.
    pub fn marginal(&self, id: UnitId) -> Vec<(Hex, f64)> {
        let mut m: std::collections::BTreeMap<Hex, f64> = Default::default();
        for p in &self.particles {
            if let Some(h) = p.position_of(id) {
                *m.entry(h).or_insert(0.0) += p.weight;
            }
        }
        m.into_iter().collect()
    }

    fn normalize(&mut self) -> bool {
        let total: f64 = self.particles.iter().map(|p| p.weight).sum();
        if !total.is_finite() || total <= 0.0 {
            return false;
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        true
    }

    /// Systematic resampling to `n` equally weighted particles.
    fn resample(&mut self, rng: &mut SplitMix64) {
        let n = self.particles.len();
        let step = 1.0 / n as f64;
        let mut u = rng.gen::<f64>() * step;
        let mut out = Vec::with_capacity(n);
        let mut cum = 0.0;
        let mut i = 0;
        for p in &self.particles {
            cum += p.weight;
            while u < cum && out.len() < n {
                out.push(Particle {
                    units: p.units.clone(),
                    weight: step,
                });
                u += step;
            }
            i += 1;
        }
        // Rounding can leave the last slots unfilled.
        while out.len() < n {
            out.push(Particle {
                units: self.particles[i - 1].units.clone(),
                weight: step,
            });
        }
        self.particles = out;
    }
}

fn walk(units: &mut [HypothesizedUnit], blocked: &HashSet<Hex>, rules: &Rules, rng: &mut SplitMix64) {
    for i in 0..units.len() {
        if rng.gen::<f64>() < 0.5 {
            continue;
        }
        let here = units[i].pos;
        let free: Vec<Hex> = rules
            .map
            .passable_neighbors(here)
            .filter(|h| !blocked.contains(h) && !units.iter().any(|u| u.pos == *h))
            .collect();
        if !free.is_empty() {
            units[i].pos = free[rng.gen_range(0..free.len())];
        }
    }
}

/// Incorporate a new observation of the same side.
pub fn update_particles(set: &ParticleSet, obs: &Observation, seed: u64) -> ParticleSet {
    let rules = set.rules.clone();
    let ev = Evidence::from(obs);
    let hidden: HashSet<UnitId> = ev.hidden.iter().map(|h| h.0).collect();
    let cycles = obs.tick.saturating_sub(set.tick) / rules.ticks_per_command as u64;
    let mut rng = SplitMix64::new(seed);
    let mut out = set.clone();
    out.degenerate = false;
    out.tick = obs.tick;

    for p in &mut out.particles {
        // Units now seen or destroyed leave the hypothesis.
        p.units.retain(|u| hidden.contains(&u.unit));
        for _ in 0..cycles {
            walk(&mut p.units, &ev.blocked, &rules, &mut rng);
        }
        let impossible = p.units.iter().any(|u| ev.blocked.contains(&u.pos));
        p.weight = if impossible {
            0.0
        } else {
            p.weight
                * p.units
                    .iter()
                    .map(|u| ev.miss_probability(&rules, u.pos))
                    .product::<f64>()
        };
    }

    if !out.normalize() {
        let n = out.particles.len();
        match draw_from_prior(obs, n, derive_seed(seed, 1)) {
            Ok(ps) => out.particles = ps,
            Err(_) => {
                for p in &mut out.particles {
                    p.weight = 1.0 / n as f64;
                }
            }
        }
        out.degenerate = true;
        return out;
    }
    if out.ess() < out.particles.len() as f64 / 2.0 {
        out.resample(&mut rng);
    }
    out
}

/// Draw one particle in proportion to its weight and plant it in a planning
/// copy of `state`. A set built from full observations has nothing to plant
/// and yields a plain copy.
pub fn sample_determinization(set: &ParticleSet, state: &GameState, seed: u64) -> Result<GameState, BeliefError> {
    let p = pick(set, seed)?;
    if set.level == ObservationLevel::Full {
        return Ok(state.fork());
    }
    Ok(inject_belief(
        state,
        set.side,
        &repair(state, set.side, p.assumption()),
    )?)
}

/// Make a particle consistent with the current state: units that are no
/// longer hidden are dropped, and a hypothesis that lands on an occupied hex
/// moves to the nearest free passable hex (breadth-first, neighbour order).
/// Particles can go stale this way between updates because own units and
/// contacts keep moving.
fn repair(state: &GameState, side: Side, mut a: BeliefAssumption) -> BeliefAssumption {
    let enemy = side.opponent();
    let hidden = |id: UnitId| {
        state.rules().roster.get(id.index()).is_some_and(|r| r.side == enemy)
            && state.contact(side, id).is_none()
            && !state.known_kills(side).contains(&id)
    };
    let map = &state.rules().map;
    let mut occupied: HashSet<Hex> = state
        .units()
        .iter()
        .filter(|u| u.alive() && (u.side == side || !hidden(u.id)))
        .map(|u| u.pos)
        .collect();
    a.placements.retain(|p| hidden(p.unit));
    let mut keep = Vec::with_capacity(a.placements.len());
    for mut p in a.placements {
        if occupied.contains(&p.pos) || !map.passable(p.pos) {
            let mut queue = std::collections::VecDeque::from([p.pos]);
            let mut visited = HashSet::from([p.pos]);
            let mut found = None;
            while let Some(h) = queue.pop_front() {
                if map.passable(h) && !occupied.contains(&h) {
                    found = Some(h);
                    break;
                }
                for n in map.passable_neighbors(h) {
                    if visited.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
            match found {
                Some(h) => p.pos = h,
                None => continue,
            }
        }
        occupied.insert(p.pos);
        keep.push(p);
    }
    a.placements = keep;
    a
}

/// The particle a weighted draw with `seed` selects.
pub fn pick(set: &ParticleSet, seed: u64) -> Result<&Particle, BeliefError> {
    if set.particles.is_empty() {
        return Err(BeliefError::NoParticles);
    }
    let mut rng = SplitMix64::new(seed);
    let total: f64 = set.particles.iter().map(|p| p.weight).sum();
    let target = rng.gen::<f64>() * total;
    let mut cum = 0.0;
    for p in &set.particles {
        cum += p.weight;
        if target < cum {
            return Ok(p);
        }
    }
    Ok(set.particles.last().unwrap())
}
