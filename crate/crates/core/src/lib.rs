//! Generalized veto-core voting.
//!
//! This crate tabulates ranked-ballot elections under the generalized
//! `(p, q)`-veto framework: voters carry veto weights `p`, candidates carry
//! initial weights `q`, and a candidate is a legitimate winner exactly when
//! it admits a `(p, q)`-matching between voter weight and the weight of
//! candidates it dominates. The crate provides
//!
//! - the ballot data model with a plain-text ballot format ([`election`]),
//! - matching construction via exact max-flow, with Hall-violation
//!   certificates on failure ([`matching`]),
//! - veto-core membership, both matching-based and by brute-force coalition
//!   enumeration ([`core`]),
//! - the `SerialVeto` and `SimultaneousVeto` rules, bottom trading cycles,
//!   and veto-order synthesis from a matching ([`rules`]),
//! - an exact rational LP oracle for the metric distortion of a candidate
//!   ([`distortion`]),
//! - executable axiom checkers and the documented counterexamples
//!   ([`axioms`]).
//!
//! All tabulation arithmetic is exact (`num_rational::BigRational`); no
//! floating point is used anywhere in rule semantics.

pub mod axioms;
pub mod core;
pub mod distortion;
pub mod election;
pub mod enumerate;
mod flow;
pub mod matching;
pub mod ratio;
pub mod rules;
mod simplex;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

pub use crate::core::{find_blocking, is_prefix_intersecting, veto_core, BlockingPair};
pub use crate::election::{
    parse_election, random_election, render_election, reverse_profile, tally, Election,
    ScoreProfile, WeightDomain, WeightVector,
};
pub use crate::matching::{
    find_admitted_matching, is_valid_matching, neighborhood, tied_winners, Admission, Matching,
    WinnerSet,
};
pub use crate::rules::{
    find_bottom_trading_cycle, serial_veto, simultaneous_veto, swap_along_cycle,
    veto_order_for_matching, BottomTradingCycle, EliminationTrace, RuleOutcome, VetoOrder,
};
