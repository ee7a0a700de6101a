//! Domination graphs, Hall-condition testing, and witnessing
//! `(p, q)`-matchings.
//!
//! A `(p, q)`-matching is a non-negative voter-by-candidate matrix whose
//! row sums are the voter weights `p` and whose column sums are the
//! candidate weights `q`. Candidate `a` *admits* a matching when every
//! positive entry `(v, c)` has `a` weakly preferred to `c` by `v`; such a
//! matching certifies `a`'s membership in the `(p, q)`-veto core.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::election::{check_totals_match, Election, WeightDomain, WeightVector};
use crate::flow::FlowNetwork;
use crate::ratio;
use crate::{Error, Result};

/// A non-negative rational matrix over voters x candidates with declared
/// row and column marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    entries: Vec<Vec<BigRational>>,
    row_marginal: Vec<BigRational>,
    col_marginal: Vec<BigRational>,
}

impl Matching {
    /// Builds a matching from raw entries; marginals are computed.
    /// Rejects negative entries.
    pub fn from_entries(entries: Vec<Vec<BigRational>>) -> Result<Self> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(Error::MatchingMismatch("empty matrix".into()));
        }
        let m = entries[0].len();
        if entries.iter().any(|row| row.len() != m) {
            return Err(Error::MatchingMismatch("ragged matrix".into()));
        }
        if let Some(bad) = entries.iter().flatten().find(|x| x.is_negative()) {
            return Err(Error::MatchingMismatch(format!("negative entry {bad}")));
        }
        let row_marginal = entries.iter().map(|row| row.iter().sum()).collect();
        let col_marginal = (0..m)
            .map(|c| entries.iter().map(|row| &row[c]).sum())
            .collect();
        Ok(Matching {
            entries,
            row_marginal,
            col_marginal,
        })
    }

    pub fn num_voters(&self) -> usize {
        self.entries.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, v: usize, c: usize) -> &BigRational {
        &self.entries[v][c]
    }

    /// Row sums (the voter weights `p` this matching witnesses).
    pub fn row_marginals(&self) -> &[BigRational] {
        &self.row_marginal
    }

    /// Column sums (the candidate weights `q` this matching witnesses).
    pub fn col_marginals(&self) -> &[BigRational] {
        &self.col_marginal
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.is_integer())
    }

    /// Voter `v`'s most preferred candidate among those she gives positive
    /// weight; `None` for an all-zero row.
    pub fn support_top(&self, e: &Election, v: usize) -> Option<usize> {
        e.top_among(v, |c| !self.entries[v][c].is_zero())
    }

    /// True iff every positive entry `(v, c)` lies in `a`'s domination
    /// graph, i.e. `a` is weakly preferred to `c` by `v`.
    pub fn admitted_by(&self, e: &Election, a: usize) -> bool {
        (0..self.num_voters()).all(|v| {
            (0..self.num_candidates())
                .all(|c| self.entries[v][c].is_zero() || e.weakly_prefers(v, a, c))
        })
    }

    pub(crate) fn check_shape(&self, e: &Election) -> Result<()> {
        if self.num_voters() != e.num_voters() || self.num_candidates() != e.num_candidates() {
            return Err(Error::MatchingMismatch(format!(
                "matching is {}x{}, election is {}x{}",
                self.num_voters(),
                self.num_candidates(),
                e.num_voters(),
                e.num_candidates()
            )));
        }
        Ok(())
    }

    /// Serializes to the wire format: entries listed per voter in that
    /// voter's preference order, zero entries omitted, weights in lowest
    /// terms. Voter ids are 1-based.
    pub fn to_json(&self, e: &Election) -> Value {
        let p_total: BigRational = self.row_marginal.iter().sum();
        let mut entries = Vec::new();
        for v in 0..self.num_voters() {
            for &c in e.ranking(v) {
                if !self.entries[v][c].is_zero() {
                    entries.push(json!({
                        "voter": v + 1,
                        "candidate": e.candidate_name(c),
                        "weight": ratio::to_string(&self.entries[v][c]),
                    }));
                }
            }
        }
        json!({ "p_total": ratio::to_string(&p_total), "entries": entries })
    }

    /// Parses the wire format produced by [`Matching::to_json`].
    pub fn from_json(e: &Election, value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::MatchingMismatch(format!("matching json: {msg}"));
        let entries_json = value
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing `entries` array"))?;
        let mut entries =
            vec![vec![BigRational::zero(); e.num_candidates()]; e.num_voters()];
        for item in entries_json {
            let voter = item
                .get("voter")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("entry missing `voter`"))? as usize;
            if voter < 1 || voter > e.num_voters() {
                return Err(Error::UnknownVoter(voter.to_string()));
            }
            let name = item
                .get("candidate")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("entry missing `candidate`"))?;
            let c = e.require_candidate(name)?;
            let weight = item
                .get("weight")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("entry missing `weight`"))?;
            entries[voter - 1][c] += ratio::parse(weight)?;
        }
        let matching = Matching::from_entries(entries)?;
        if let Some(declared) = value.get("p_total").and_then(Value::as_str) {
            let total: BigRational = matching.row_marginal.iter().sum();
            if ratio::parse(declared)? != total {
                return Err(bad("declared p_total disagrees with entries"));
            }
        }
        Ok(matching)
    }
}

/// The tied winners at a matching, together with the per-voter prefix
/// lengths realizing the set as an intersection of top-`k` prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerSet {
    pub winners: BTreeSet<usize>,
    /// `prefix_indices[v] = k_v` with `winners = ∩_v top-k_v(v)`.
    pub prefix_indices: Vec<usize>,
}

impl WinnerSet {
    /// Recomputes the intersection of top-`k_v` prefixes from the stored
    /// indices; equals `winners` by construction.
    pub fn prefix_intersection(&self, e: &Election) -> BTreeSet<usize> {
        (0..e.num_candidates())
            .filter(|&c| (0..e.num_voters()).all(|v| e.rank_of(v, c) < self.prefix_indices[v]))
            .collect()
    }
}

/// Result of a dominance test: either a witnessing matching or a Hall
/// violation.
#[derive(Debug, Clone)]
pub enum Admission {
    /// The candidate admits this matching.
    Matching(Matching),
    /// No admitted matching exists; `coalition` is a voter set `T` with
    /// `p(T) > q(N_a(T))` (the source side of a minimum cut).
    HallViolation { coalition: BTreeSet<usize> },
}

impl Admission {
    pub fn matching(&self) -> Option<&Matching> {
        match self {
            Admission::Matching(m) => Some(m),
            Admission::HallViolation { .. } => None,
        }
    }

    pub fn is_admitted(&self) -> bool {
        matches!(self, Admission::Matching(_))
    }
}

/// The set of candidates ranked weakly below `a` by at least one voter in
/// `voters`: the neighborhood of the coalition in `a`'s domination graph.
/// Empty coalitions have empty neighborhoods; any non-empty coalition's
/// neighborhood contains `a` itself.
pub fn neighborhood(
    e: &Election,
    a: usize,
    voters: impl IntoIterator<Item = usize>,
) -> BTreeSet<usize> {
    assert!(a < e.num_candidates(), "candidate index out of range");
    let mut out = BTreeSet::new();
    for v in voters {
        assert!(v < e.num_voters(), "voter index out of range");
        let cutoff = e.rank_of(v, a);
        for &c in &e.ranking(v)[cutoff..] {
            out.insert(c);
        }
    }
    out
}

/// Tests whether candidate `a` is `(p, q)`-dominant by max-flow on the
/// domination graph with source capacities `p` and sink capacities `q`.
///
/// On success returns a matching that `a` admits; rationals are pre-scaled
/// by the LCM of all denominators so the flow runs over integers, hence
/// integral `p, q` yield an integral matching. On failure returns a
/// Hall-violating coalition.
pub fn find_admitted_matching(
    e: &Election,
    a: usize,
    p: &WeightVector,
    q: &WeightVector,
) -> Result<Admission> {
    assert!(a < e.num_candidates(), "candidate index out of range");
    p.check_shape(e, WeightDomain::Voters)?;
    q.check_shape(e, WeightDomain::Candidates)?;
    check_totals_match(p, q)?;

    let n = e.num_voters();
    let m = e.num_candidates();
    let scale = BigRational::from_integer(ratio::lcm_of_denominators(
        p.weights().iter().chain(q.weights()),
    ));
    let scaled = |w: &BigRational| (w * &scale).to_integer();
    let total: BigInt = scaled(p.total());

    // Nodes: source, voters 1..=n, candidates n+1..=n+m, sink.
    let source = 0;
    let sink = n + m + 1;
    let voter_node = |v: usize| 1 + v;
    let cand_node = |c: usize| 1 + n + c;

    let mut net = FlowNetwork::new(n + m + 2);
    for v in 0..n {
        net.add_edge(source, voter_node(v), scaled(p.get(v)));
    }
    let mut pair_edges = vec![vec![None; m]; n];
    for (v, row) in pair_edges.iter_mut().enumerate() {
        let cutoff = e.rank_of(v, a);
        for &c in &e.ranking(v)[cutoff..] {
            row[c] = Some(net.add_edge(voter_node(v), cand_node(c), total.clone()));
        }
    }
    for c in 0..m {
        net.add_edge(cand_node(c), sink, scaled(q.get(c)));
    }

    if net.max_flow(source, sink) == total {
        let entries = (0..n)
            .map(|v| {
                (0..m)
                    .map(|c| match pair_edges[v][c] {
                        Some(eid) => {
                            BigRational::from_integer(net.flow_on(eid).clone()) / &scale
                        }
                        None => BigRational::zero(),
                    })
                    .collect()
            })
            .collect();
        let matching = Matching::from_entries(entries)?;
        debug_assert!(matching.admitted_by(e, a));
        Ok(Admission::Matching(matching))
    } else {
        let reachable = net.residual_reachable(source);
        let coalition: BTreeSet<usize> =
            (0..n).filter(|&v| reachable[voter_node(v)]).collect();
        debug_assert!(
            p.sum_over(coalition.iter().copied())
                > q.sum_over(neighborhood(e, a, coalition.iter().copied())),
            "min-cut coalition must violate Hall's condition"
        );
        Ok(Admission::HallViolation { coalition })
    }
}

/// The winners tied at `matching`: candidates weakly preferred, by every
/// voter, to that voter's top supported candidate. Voters with all-zero
/// rows impose no constraint. May be empty for an arbitrary matching; only
/// rule-produced matchings are guaranteed a non-empty winner set.
pub fn tied_winners(e: &Election, matching: &Matching) -> Result<WinnerSet> {
    matching.check_shape(e)?;
    let m = e.num_candidates();
    let prefix_indices: Vec<usize> = (0..e.num_voters())
        .map(|v| match matching.support_top(e, v) {
            Some(t) => e.rank_of(v, t) + 1,
            None => m,
        })
        .collect();
    let winners = (0..m)
        .filter(|&c| (0..e.num_voters()).all(|v| e.rank_of(v, c) < prefix_indices[v]))
        .collect();
    Ok(WinnerSet {
        winners,
        prefix_indices,
    })
}

/// True iff `matching` has row sums `p`, column sums `q`, and non-negative
/// entries (non-negativity holds by construction of [`Matching`]).
pub fn is_valid_matching(
    e: &Election,
    matching: &Matching,
    p: &WeightVector,
    q: &WeightVector,
) -> bool {
    matching.check_shape(e).is_ok()
        && p.check_shape(e, WeightDomain::Voters).is_ok()
        && q.check_shape(e, WeightDomain::Candidates).is_ok()
        && matching.row_marginals() == p.weights()
        && matching.col_marginals() == q.weights()
}
