use std::collections::{HashMap, HashSet};

use crate::engine::{Hex, Objective, Side, Terrain, UnitType, VictoryWeights};

/// A declared unit in a force list.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitPlacement {
    pub id: String,
    pub type_name: String,
    pub pos: Hex,
    pub strength: u8,
}

/// A parsed scenario, in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDoc {
    pub name: String,
    pub version: u32,
    pub width: i32,
    pub height: i32,
    pub default_terrain: Terrain,
    /// Per-hex overrides, applied in order.
    pub terrain: Vec<(Hex, Terrain)>,
    pub unit_types: Vec<UnitType>,
    pub forces: [Vec<UnitPlacement>; 2],
    pub objectives: Vec<Objective>,
    pub victory: [VictoryWeights; 2],
    pub ticks_per_command: u32,
    pub max_ticks: u32,
    pub deterministic_combat: bool,
}

impl ScenarioDoc {
    /// An empty clear map with default timing and weights.
    pub fn new(name: impl Into<String>, width: i32, height: i32) -> Self {
        ScenarioDoc {
            name: name.into(),
            version: 1,
            width,
            height,
            default_terrain: Terrain::Clear,
            terrain: Vec::new(),
            unit_types: Vec::new(),
            forces: [Vec::new(), Vec::new()],
            objectives: Vec::new(),
            victory: [VictoryWeights::default(); 2],
            ticks_per_command: 10,
            max_ticks: 100,
            deterministic_combat: false,
        }
    }

    pub fn units(&self) -> impl Iterator<Item = (Side, &UnitPlacement)> {
        Side::BOTH
            .into_iter()
            .flat_map(move |s| self.forces[s.index()].iter().map(move |p| (s, p)))
    }

    pub fn terrain_at(&self, h: Hex) -> Option<Terrain> {
        if h.q < 0 || h.q >= self.width || h.r < 0 || h.r >= self.height {
            return None;
        }
        Some(
            self.terrain
                .iter()
                .rev()
                .find(|(x, _)| *x == h)
                .map(|(_, t)| *t)
                .unwrap_or(self.default_terrain),
        )
    }

    /// Check every invariant; the error names the offending item.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |item, kind, message: String| Err(ValidationError { item, kind, message });
        if self.width <= 0 || self.height <= 0 {
            return err(
                DocItem::Map,
                ErrorKind::Invalid,
                format!("map dimensions must be positive, got {}x{}", self.width, self.height),
            );
        }
        for (i, (h, _)) in self.terrain.iter().enumerate() {
            if self.terrain_at(*h).is_none() {
                return err(
                    DocItem::Terrain(i),
                    ErrorKind::Invalid,
                    format!("terrain hex {h} is out of bounds"),
                );
            }
        }
        let mut types = HashSet::new();
        for (i, t) in self.unit_types.iter().enumerate() {
            if let Err(e) = t.validate() {
                return err(
                    DocItem::UnitType(i),
                    ErrorKind::Invalid,
                    format!("unit type {}: {e}", t.name),
                );
            }
            if !types.insert(t.name.as_str()) {
                return err(
                    DocItem::UnitType(i),
                    ErrorKind::Invalid,
                    format!("unit type {} declared twice", t.name),
                );
            }
        }
        let mut ids = HashSet::new();
        let mut occupied: HashMap<Hex, &str> = HashMap::new();
        for side in Side::BOTH {
            for (i, p) in self.forces[side.index()].iter().enumerate() {
                let item = DocItem::Unit(side, i);
                let Some(ty) = self.unit_types.iter().find(|t| t.name == p.type_name) else {
                    return err(
                        item,
                        ErrorKind::Invalid,
                        format!("unit {} references undeclared type {}", p.id, p.type_name),
                    );
                };
                if !ids.insert(p.id.as_str()) {
                    return err(item, ErrorKind::Invalid, format!("unit id {} declared twice", p.id));
                }
                match self.terrain_at(p.pos) {
                    None => {
                        return err(
                            item,
                            ErrorKind::Placement,
                            format!("unit {} at {} is out of bounds", p.id, p.pos),
                        )
                    }
                    Some(t) if !t.passable() => {
                        return err(
                            item,
                            ErrorKind::Placement,
                            format!("unit {} at {} stands on impassable terrain", p.id, p.pos),
                        )
                    }
                    _ => {}
                }
                if let Some(other) = occupied.insert(p.pos, &p.id) {
                    return err(
                        item,
                        ErrorKind::Placement,
                        format!("units {other} and {} overlap at {}", p.id, p.pos),
                    );
                }
                if p.strength < 1 || p.strength > ty.max_strength {
                    return err(
                        item,
                        ErrorKind::Invalid,
                        format!("unit {} strength {} outside 1..={}", p.id, p.strength, ty.max_strength),
                    );
                }
            }
        }
        if ids.len() > u16::MAX as usize {
            return err(DocItem::Map, ErrorKind::Invalid, "too many units".into());
        }
        for (i, o) in self.objectives.iter().enumerate() {
            if !self.terrain_at(o.hex).is_some_and(Terrain::passable) {
                return err(
                    DocItem::Objective(i),
                    ErrorKind::Invalid,
                    format!("objective at {} is not an in-bounds passable hex", o.hex),
                );
            }
            if !o.weight.is_finite() {
                return err(
                    DocItem::Objective(i),
                    ErrorKind::Invalid,
                    "objective weight must be finite".into(),
                );
            }
        }
        if self.ticks_per_command < 1 {
            return err(
                DocItem::TicksPerCommand,
                ErrorKind::Invalid,
                "ticks_per_command must be at least 1".into(),
            );
        }
        if self.max_ticks < self.ticks_per_command {
            return err(
                DocItem::MaxTicks,
                ErrorKind::Invalid,
                "max_ticks must be at least ticks_per_command".into(),
            );
        }
        Ok(())
    }
}

/// Which part of a document a validation error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DocItem {
    Map,
    Terrain(usize),
    UnitType(usize),
    Unit(Side, usize),
    Objective(usize),
    TicksPerCommand,
    MaxTicks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Placement,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub item: DocItem,
    pub kind: ErrorKind,
    pub message: String,
}
