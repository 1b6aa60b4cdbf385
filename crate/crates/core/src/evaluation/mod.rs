//! Matches, tournaments, Nash averaging, Pareto fronts and MAP-Elites.

pub mod game;
pub mod map_elites;
pub mod nash;
pub mod pareto;
pub mod tournament;

pub use game::{
    play_match, run_match, scalar_outcome, Forfeit, GameResult, LoggedDecision, MatchError, MatchOptions, MatchOutput,
};
pub use map_elites::{
    evaluate_params, map_elites_run, map_elites_with, BehaviorDescriptor, Elite, Insertion, MapElitesArchive,
    MapElitesConfig, MapElitesError, ParamRange,
};
pub use nash::{nash_average, NashError, NashResult};
pub use pareto::{dominates, pareto_front, pareto_indices, ParetoError};
pub use tournament::{round_robin, write_report, Entrant, ResultMatrix, Tournament};
