//! The line-oriented scenario language.
//!
//! ```text
//! scenario "<name>" version <int>
//! map <w> <h>
//! terrain default <type>
//! terrain hex <q> <r> <type>
//! unittype <name> atk <i> def <i> range <i> sight <i> mp <i> maxstr <i>
//! side <blue|red>
//! unit <id> type <name> at <q> <r> strength <i>
//! objective <side> at <q> <r> weight <real>
//! victory <side> hold <real> inflicted <real> suffered <real> moved <real>
//! ticks_per_command <i>
//! max_ticks <i>
//! flag deterministic_combat
//! ```
//!
//! `#` starts a comment. Tokens are separated by whitespace.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use super::doc::{DocItem, ScenarioDoc, UnitPlacement};
use crate::engine::{Hex, Objective, Side, Terrain, UnitType, VictoryWeights};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the error has no single location.
    pub line: usize,
    pub message: String,
}

fn perr<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// Strip a trailing comment, ignoring `#` inside the quoted scenario name.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Tokens<'a> {
    line: usize,
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let t = self.toks.get(self.pos).copied();
        self.pos += 1;
        t.map_or_else(|| perr(self.line, format!("expected {what}")), Ok)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let t = self.next(&format!("`{kw}`"))?;
        if t != kw {
            return perr(self.line, format!("expected `{kw}`, found `{t}`"));
        }
        Ok(())
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let t = self.next(what)?;
        t.parse().or_else(|_| perr(self.line, format!("invalid {what} `{t}`")))
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => perr(self.line, format!("unexpected trailing token `{t}`")),
            None => Ok(()),
        }
    }
}

fn parse_side(t: &mut Tokens<'_>) -> Result<Side, ParseError> {
    let s = t.next("side")?;
    s.parse().or_else(|e: String| perr(t.line, e))
}

fn parse_terrain(t: &mut Tokens<'_>) -> Result<Terrain, ParseError> {
    let s = t.next("terrain type")?;
    s.parse().or_else(|e: String| perr(t.line, e))
}

fn parse_real(t: &mut Tokens<'_>, what: &str) -> Result<f64, ParseError> {
    let v: f64 = t.parse(what)?;
    if !v.is_finite() {
        return perr(t.line, format!("{what} must be finite"));
    }
    Ok(v)
}

fn parse_header(line_no: usize, line: &str) -> Result<(String, u32), ParseError> {
    let rest = line
        .strip_prefix("scenario")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| ParseError {
            line: line_no,
            message: "missing scenario header".into(),
        })?
        .trim_start();
    let rest = rest.strip_prefix('"').ok_or_else(|| ParseError {
        line: line_no,
        message: "scenario name must be quoted".into(),
    })?;
    let end = rest.find('"').ok_or_else(|| ParseError {
        line: line_no,
        message: "unterminated scenario name".into(),
    })?;
    let name = rest[..end].to_string();
    let mut t = Tokens {
        line: line_no,
        toks: rest[end + 1..].split_whitespace().collect(),
        pos: 0,
    };
    t.keyword("version")?;
    let version = t.parse("version number")?;
    t.finish()?;
    Ok((name, version))
}

/// Parse and validate scenario text.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((hline, header)) = lines.next() else {
        return perr(1, "missing scenario header");
    };
    let (name, version) = parse_header(hline, header)?;

    let mut doc = ScenarioDoc::new(name, 0, 0);
    doc.version = version;
    let mut locations: HashMap<DocItem, usize> = HashMap::new();
    let mut map_line = None;
    let mut side: Option<Side> = None;

    for (ln, line) in lines {
        let mut t = Tokens {
            line: ln,
            toks: line.split_whitespace().collect(),
            pos: 0,
        };
        let directive = t.next("directive")?;
        match directive {
            "map" => {
                if map_line.is_some() {
                    return perr(ln, "duplicate `map` directive");
                }
                doc.width = t.parse("map width")?;
                doc.height = t.parse("map height")?;
                map_line = Some(ln);
                locations.insert(DocItem::Map, ln);
            }
            "terrain" => match t.next("`default` or `hex`")? {
                "default" => doc.default_terrain = parse_terrain(&mut t)?,
                "hex" => {
                    let q = t.parse("q coordinate")?;
                    let r = t.parse("r coordinate")?;
                    let ty = parse_terrain(&mut t)?;
                    locations.insert(DocItem::Terrain(doc.terrain.len()), ln);
                    doc.terrain.push((Hex::new(q, r), ty));
                }
                other => return perr(ln, format!("expected `default` or `hex`, found `{other}`")),
            },
            "unittype" => {
                let name = t.next("unit type name")?.to_string();
                t.keyword("atk")?;
                let attack = t.parse("attack")?;
                t.keyword("def")?;
                let defense = t.parse("defense")?;
                t.keyword("range")?;
                let range = t.parse("range")?;
                t.keyword("sight")?;
                let sight = t.parse("sight")?;
                t.keyword("mp")?;
                let mp_per_tick = t.parse("movement points")?;
                t.keyword("maxstr")?;
                let max_strength = t.parse("max strength")?;
                locations.insert(DocItem::UnitType(doc.unit_types.len()), ln);
                doc.unit_types.push(UnitType {
                    name,
                    attack,
                    defense,
                    range,
                    sight,
                    mp_per_tick,
                    max_strength,
                });
            }
            "side" => side = Some(parse_side(&mut t)?),
            "unit" => {
                let Some(s) = side else {
                    return perr(ln, "`unit` before any `side` directive");
                };
                let id = t.next("unit id")?.to_string();
                t.keyword("type")?;
                let type_name = t.next("unit type name")?.to_string();
                t.keyword("at")?;
                let q = t.parse("q coordinate")?;
                let r = t.parse("r coordinate")?;
                t.keyword("strength")?;
                let strength = t.parse("strength")?;
                let list = &mut doc.forces[s.index()];
                locations.insert(DocItem::Unit(s, list.len()), ln);
                list.push(UnitPlacement {
                    id,
                    type_name,
                    pos: Hex::new(q, r),
                    strength,
                });
            }
            "objective" => {
                let s = parse_side(&mut t)?;
                t.keyword("at")?;
                let q = t.parse("q coordinate")?;
                let r = t.parse("r coordinate")?;
                t.keyword("weight")?;
                let weight = parse_real(&mut t, "weight")?;
                locations.insert(DocItem::Objective(doc.objectives.len()), ln);
                doc.objectives.push(Objective {
                    side: s,
                    hex: Hex::new(q, r),
                    weight,
                });
            }
            "victory" => {
                let s = parse_side(&mut t)?;
                t.keyword("hold")?;
                let hold = parse_real(&mut t, "hold weight")?;
                t.keyword("inflicted")?;
                let inflicted = parse_real(&mut t, "inflicted weight")?;
                t.keyword("suffered")?;
                let suffered = parse_real(&mut t, "suffered weight")?;
                t.keyword("moved")?;
                let moved = parse_real(&mut t, "moved weight")?;
                doc.victory[s.index()] = VictoryWeights {
                    hold,
                    inflicted,
                    suffered,
                    moved,
                };
            }
            "ticks_per_command" => {
                doc.ticks_per_command = t.parse("tick count")?;
                locations.insert(DocItem::TicksPerCommand, ln);
            }
            "max_ticks" => {
                doc.max_ticks = t.parse("tick count")?;
                locations.insert(DocItem::MaxTicks, ln);
            }
            "flag" => match t.next("flag name")? {
                "deterministic_combat" => doc.deterministic_combat = true,
                other => return perr(ln, format!("unknown flag `{other}`")),
            },
            "scenario" => return perr(ln, "duplicate scenario header"),
            other => return perr(ln, format!("unknown directive `{other}`")),
        }
        t.finish()?;
    }

    if map_line.is_none() {
        return perr(0, "missing `map` directive");
    }
    doc.validate().map_err(|e| ParseError {
        line: locations
            .get(&e.item)
            .or_else(|| locations.get(&DocItem::Map))
            .copied()
            .unwrap_or(0),
        message: e.message,
    })?;
    Ok(doc)
}

/// Canonical text for a document; `parse_scenario` of the result equals `doc`.
pub fn serialize_scenario(doc: &ScenarioDoc) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario \"{}\" version {}", doc.name, doc.version);
    let _ = writeln!(out, "map {} {}", doc.width, doc.height);
    let _ = writeln!(out, "terrain default {}", doc.default_terrain);
    for (h, t) in &doc.terrain {
        let _ = writeln!(out, "terrain hex {} {} {}", h.q, h.r, t);
    }
    for t in &doc.unit_types {
        let _ = writeln!(
            out,
            "unittype {} atk {} def {} range {} sight {} mp {} maxstr {}",
            t.name, t.attack, t.defense, t.range, t.sight, t.mp_per_tick, t.max_strength
        );
    }
    for side in Side::BOTH {
        let force = &doc.forces[side.index()];
        if force.is_empty() {
            continue;
        }
        let _ = writeln!(out, "side {side}");
        for u in force {
            let _ = writeln!(
                out,
                "unit {} type {} at {} {} strength {}",
                u.id, u.type_name, u.pos.q, u.pos.r, u.strength
            );
        }
    }
    for o in &doc.objectives {
        let _ = writeln!(
            out,
            "objective {} at {} {} weight {:?}",
            o.side, o.hex.q, o.hex.r, o.weight
        );
    }
    for side in Side::BOTH {
        let v = &doc.victory[side.index()];
        let _ = writeln!(
            out,
            "victory {side} hold {:?} inflicted {:?} suffered {:?} moved {:?}",
            v.hold, v.inflicted, v.suffered, v.moved
        );
    }
    let _ = writeln!(out, "ticks_per_command {}", doc.ticks_per_command);
    let _ = writeln!(out, "max_ticks {}", doc.max_ticks);
    if doc.deterministic_combat {
        let _ = writeln!(out, "flag deterministic_combat");
    }
    out
}
