//! The voting rules: `SerialVeto` (one voter vetoes at a time, in a given
//! order) and `SimultaneousVeto` (all voters veto in parallel over
//! continuous time), plus the bottom-trading-cycle machinery that
//! synthesizes a veto order realizing any given integral matching.
//!
//! Both rules start with every candidate eligible — including candidates
//! with zero initial weight — and eliminate a candidate only once its
//! weight is exhausted *and* some voter opposes it. The survivors are
//! exactly the winners tied at the witnessing matching the run constructs,
//! which places them in the `(p, q)`-veto core.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::election::{check_totals_match, Election, WeightDomain, WeightVector};
use crate::matching::{tied_winners, Matching, WinnerSet};
use crate::{Error, Result};

/// A repeated sequence of voters; voter `v` appears exactly `p(v)` times
/// for the voter weights `p` the order realizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VetoOrder {
    sequence: Vec<usize>,
}

impl VetoOrder {
    pub fn new(sequence: Vec<usize>) -> Self {
        VetoOrder { sequence }
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Occurrence counts as a voter weight vector over `num_voters` voters.
    pub fn multiplicities(&self, num_voters: usize) -> Result<WeightVector> {
        let mut counts = vec![BigRational::zero(); num_voters];
        for &v in &self.sequence {
            if v >= num_voters {
                return Err(Error::UnknownVoter((v + 1).to_string()));
            }
            counts[v] += BigRational::one();
        }
        WeightVector::new(WeightDomain::Voters, counts)
    }

    /// Checks the order realizes the declared voter weights exactly.
    pub fn validate_against(&self, p: &WeightVector) -> Result<()> {
        let counts = self.multiplicities(p.len())?;
        if counts.weights() != p.weights() {
            return Err(Error::InvalidOrder(
                "order multiplicities disagree with the declared voter weights".into(),
            ));
        }
        Ok(())
    }
}

/// One discrete event of a `SimultaneousVeto` run, recorded after the
/// elimination pass at its time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// Normalized time in `[0, 1]`.
    pub time: BigRational,
    /// Candidates eliminated at this time.
    pub eliminated: Vec<usize>,
    /// Per-candidate weights at this time (eliminated candidates hold 0).
    pub weights: Vec<BigRational>,
    /// Per-candidate opposition: the positive-weight voters whose bottom
    /// choice among the surviving candidates is this candidate.
    pub opposition: Vec<BTreeSet<usize>>,
}

/// The full discrete-event record of a `SimultaneousVeto` run. Empty for
/// `SerialVeto`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EliminationTrace {
    pub events: Vec<TraceEvent>,
}

impl EliminationTrace {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time of the last event; `1` for every completed run.
    pub fn final_time(&self) -> Option<&BigRational> {
        self.events.last().map(|ev| &ev.time)
    }
}

/// Result of a rule run: the tied winners, the witnessing matching they
/// are tied at, and (for `SimultaneousVeto`) the elimination trace.
#[derive(Debug, Clone)]
pub struct RuleOutcome {
    pub winners: WinnerSet,
    pub witness: Matching,
    pub trace: EliminationTrace,
}

/// An alternating voter/candidate cycle along which one unit of matching
/// weight can be rotated so that every cycle voter ends up holding weight
/// on her bottom remaining choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottomTradingCycle {
    /// `(v_i, c_i)` pairs; the cycle condition links `v_i` to `c_{i+1}`.
    pairs: Vec<(usize, usize)>,
}

impl BottomTradingCycle {
    /// Validates the defining conditions: `m(v_i, c_i) > 0` and
    /// `bot_{[q != 0]}(v_i) = c_{i+1}` cyclically.
    pub fn new(
        e: &Election,
        matching: &Matching,
        q: &WeightVector,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidCycle("empty cycle".into()));
        }
        let q_alive = |c: usize| !q.get(c).is_zero();
        for (i, &(v, c)) in pairs.iter().enumerate() {
            if matching.entry(v, c).is_zero() {
                return Err(Error::InvalidCycle(format!(
                    "entry ({}, {}) is zero",
                    v + 1,
                    e.candidate_name(c)
                )));
            }
            let (_, c_next) = pairs[(i + 1) % pairs.len()];
            let bottom = e
                .bottom_among(v, q_alive)
                .ok_or_else(|| Error::InvalidCycle("no candidate has positive weight".into()))?;
            if bottom != c_next {
                return Err(Error::InvalidCycle(format!(
                    "voter {}'s bottom remaining choice is `{}`, not `{}`",
                    v + 1,
                    e.candidate_name(bottom),
                    e.candidate_name(c_next)
                )));
            }
        }
        Ok(BottomTradingCycle { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Runs `SerialVeto`: candidate weights start at `q`; each voter in the
/// order, in turn, eliminates zero-weight candidates from the bottom of
/// her ranking and then decrements her bottom surviving candidate by one
/// (without eliminating it even if it reaches zero). Survivors are the
/// winners, tied at the matching of recorded decrements.
pub fn serial_veto(e: &Election, q: &WeightVector, order: &VetoOrder) -> Result<RuleOutcome> {
    q.check_shape(e, WeightDomain::Candidates)?;
    if !q.is_integral() {
        return Err(Error::NonIntegral(
            "serial veto requires integral candidate weights; scale by the LCM of denominators"
                .into(),
        ));
    }
    if BigRational::from_integer(order.len().into()) != *q.total() {
        return Err(Error::InvalidOrder(format!(
            "order length {} does not equal the total candidate weight {}",
            order.len(),
            q.total()
        )));
    }
    for &v in order.sequence() {
        if v >= e.num_voters() {
            return Err(Error::UnknownVoter((v + 1).to_string()));
        }
    }

    let m = e.num_candidates();
    let mut weights: Vec<BigRational> = q.weights().to_vec();
    let mut alive = vec![true; m];
    let mut entries = vec![vec![BigRational::zero(); m]; e.num_voters()];

    for &v in order.sequence() {
        let target = loop {
            let b = e
                .bottom_among(v, |c| alive[c])
                .expect("positive remaining weight keeps some candidate alive");
            if weights[b].is_zero() {
                alive[b] = false;
            } else {
                break b;
            }
        };
        weights[target] -= BigRational::one();
        entries[v][target] += BigRational::one();
    }

    let survivors: BTreeSet<usize> = (0..m).filter(|&c| alive[c]).collect();
    assert!(!survivors.is_empty(), "serial veto never eliminates everyone");

    let witness = Matching::from_entries(entries)?;
    let winners = tied_winners(e, &witness)?;
    assert_eq!(
        winners.winners, survivors,
        "survivors must be exactly the winners tied at the recorded matching"
    );
    Ok(RuleOutcome {
        winners,
        witness,
        trace: EliminationTrace::default(),
    })
}

/// Removes, until fixpoint, every surviving candidate whose weight is zero
/// and which is the bottom surviving choice of some active voter. Returns
/// the removed candidates. The fixpoint is order-independent: removals
/// only create new zero-weight bottoms, never rescue one.
fn elimination_closure(
    e: &Election,
    alive: &mut [bool],
    weights: &[BigRational],
    active: &[usize],
) -> Vec<usize> {
    let mut removed = Vec::new();
    loop {
        let mut opposed = vec![false; alive.len()];
        for &v in active {
            if let Some(b) = e.bottom_among(v, |c| alive[c]) {
                opposed[b] = true;
            }
        }
        let round: Vec<usize> = (0..alive.len())
            .filter(|&c| alive[c] && opposed[c] && weights[c].is_zero())
            .collect();
        if round.is_empty() {
            return removed;
        }
        for &c in &round {
            alive[c] = false;
        }
        removed.extend(round);
    }
}

/// Per-candidate opposition sets among the currently alive candidates:
/// which active voters' bottom surviving choice is each candidate.
fn opposition_sets(e: &Election, alive: &[bool], active: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); alive.len()];
    for &v in active {
        if let Some(b) = e.bottom_among(v, |c| alive[c]) {
            sets[b].insert(v);
        }
    }
    sets
}

/// Runs `SimultaneousVeto` by discrete events with exact rational time.
///
/// All voters veto in parallel from time 0 to 1: voter `v` consumes the
/// weight of her bottom surviving candidate at rate `p(v)`, instantly
/// eliminating exhausted candidates she opposes and moving up her ranking.
/// Voters with `p(v) = 0` never reach a candidate, so they neither consume
/// nor eliminate. Candidates that hit weight zero exactly at time 1 are
/// not eliminated; the survivors are the winners, tied at the matching of
/// accumulated consumption.
pub fn simultaneous_veto(
    e: &Election,
    p: &WeightVector,
    q: &WeightVector,
) -> Result<RuleOutcome> {
    p.check_shape(e, WeightDomain::Voters)?;
    q.check_shape(e, WeightDomain::Candidates)?;
    check_totals_match(p, q)?;

    let m = e.num_candidates();
    let active: Vec<usize> = (0..e.num_voters())
        .filter(|&v| p.get(v).is_positive())
        .collect();
    let mut weights: Vec<BigRational> = q.weights().to_vec();
    let mut alive = vec![true; m];
    let mut entries = vec![vec![BigRational::zero(); m]; e.num_voters()];
    let mut time = BigRational::zero();
    let one = BigRational::one();
    let mut events = Vec::new();

    while time < one {
        let eliminated = elimination_closure(e, &mut alive, &weights, &active);
        assert!(alive.iter().any(|&a| a), "some candidate always survives");

        let opposition = opposition_sets(e, &alive, &active);
        let rates: Vec<BigRational> = opposition
            .iter()
            .map(|set| p.sum_over(set.iter().copied()))
            .collect();
        events.push(TraceEvent {
            time: time.clone(),
            eliminated,
            weights: weights.clone(),
            opposition: opposition.clone(),
        });

        let mut delta: Option<BigRational> = None;
        for c in 0..m {
            if alive[c] && rates[c].is_positive() {
                let deadline = &weights[c] / &rates[c];
                if delta.as_ref().is_none_or(|d| deadline < *d) {
                    delta = Some(deadline);
                }
            }
        }
        // Conservation forces the run to land exactly on time 1, but an
        // all-unopposed survivor set would stall the loop; refuse to guess.
        let mut delta = delta.expect("every event leaves at least one opposed candidate");
        assert!(delta.is_positive(), "events advance time strictly");
        let remaining = &one - &time;
        if delta > remaining {
            delta = remaining;
        }

        for c in 0..m {
            if alive[c] && !rates[c].is_zero() {
                weights[c] -= &delta * &rates[c];
                assert!(!weights[c].is_negative());
            }
        }
        for &v in &active {
            let b = e
                .bottom_among(v, |c| alive[c])
                .expect("alive set is non-empty");
            entries[v][b] += &delta * p.get(v);
        }
        time += delta;
    }

    assert_eq!(time, one);
    assert!(
        weights.iter().all(|w| w.is_zero()),
        "all candidate weight is consumed by time 1"
    );
    events.push(TraceEvent {
        time: one,
        eliminated: Vec::new(),
        weights: weights.clone(),
        opposition: opposition_sets(e, &alive, &active),
    });

    let survivors: BTreeSet<usize> = (0..m).filter(|&c| alive[c]).collect();
    let witness = Matching::from_entries(entries)?;
    assert_eq!(witness.row_marginals(), p.weights(), "row marginals are p");
    assert_eq!(witness.col_marginals(), q.weights(), "column marginals are q");
    let winners = tied_winners(e, &witness)?;
    assert_eq!(
        winners.winners, survivors,
        "survivors must be exactly the winners tied at the witness"
    );
    Ok(RuleOutcome {
        winners,
        witness,
        trace: EliminationTrace { events },
    })
}

/// Test-only degenerate rate schedule: voter `order[i]` vetoes alone at
/// rate `N` during `[(i-1)/N, i/N)`, which collapses `SimultaneousVeto`
/// to `SerialVeto`. Shares the elimination and opposition machinery with
/// the event loop above; returns the surviving candidate set.
#[cfg(test)]
pub(crate) fn simultaneous_veto_serial_schedule(
    e: &Election,
    q: &WeightVector,
    order: &VetoOrder,
) -> Result<BTreeSet<usize>> {
    q.check_shape(e, WeightDomain::Candidates)?;
    if BigRational::from_integer(order.len().into()) != *q.total() {
        return Err(Error::InvalidOrder(
            "order length must equal total weight".into(),
        ));
    }
    let m = e.num_candidates();
    let big_n = BigRational::from_integer(order.len().into());
    let mut weights: Vec<BigRational> = q.weights().to_vec();
    let mut alive = vec![true; m];
    let mut time = BigRational::zero();

    for (i, &v) in order.sequence().iter().enumerate() {
        let segment_end = BigRational::from_integer((i + 1).into()) / &big_n;
        let active = [v];
        while time < segment_end {
            elimination_closure(e, &mut alive, &weights, &active);
            let opposition = opposition_sets(e, &alive, &active);
            let b = e.bottom_among(v, |c| alive[c]).expect("non-empty");
            debug_assert!(opposition[b].contains(&v));
            // The single active voter vetoes at rate N.
            let mut delta = &weights[b] / &big_n;
            let remaining = &segment_end - &time;
            if delta > remaining {
                delta = remaining;
            }
            weights[b] -= &delta * &big_n;
            time += delta;
        }
    }
    Ok((0..m).filter(|&c| alive[c]).collect())
}

/// Finds a bottom trading cycle of an integral matching whenever no voter
/// holds positive weight on her bottom remaining choice (and at least two
/// units of weight exist). Returns `None` when some voter already sits on
/// her bottom choice, or when the total weight is at most 1.
///
/// The walk is deterministic: it starts from the lexicographically first
/// positive entry (by voter index, then candidate rank) and always picks
/// the smallest-index voter holding the next candidate.
pub fn find_bottom_trading_cycle(
    e: &Election,
    matching: &Matching,
    q: &WeightVector,
) -> Result<Option<BottomTradingCycle>> {
    matching.check_shape(e)?;
    q.check_shape(e, WeightDomain::Candidates)?;
    if !matching.is_integral() {
        return Err(Error::NonIntegral("matching must be integral".into()));
    }
    if matching.col_marginals() != q.weights() {
        return Err(Error::MatchingMismatch(
            "q must equal the matching's column marginals".into(),
        ));
    }
    if *q.total() <= BigRational::one() {
        return Ok(None);
    }
    let q_alive = |c: usize| !q.get(c).is_zero();
    let n = e.num_voters();
    for v in 0..n {
        let bottom = e.bottom_among(v, q_alive).expect("positive total weight");
        if !matching.entry(v, bottom).is_zero() {
            return Ok(None);
        }
    }

    let first_voter = (0..n)
        .find(|&v| (0..e.num_candidates()).any(|c| !matching.entry(v, c).is_zero()))
        .expect("positive total weight implies a positive entry");
    let first_candidate = e
        .top_among(first_voter, |c| !matching.entry(first_voter, c).is_zero())
        .expect("row has a positive entry");

    let mut pairs: Vec<(usize, usize)> = vec![(first_voter, first_candidate)];
    let mut seen: BTreeMap<usize, usize> = BTreeMap::from([(first_candidate, 0)]);
    loop {
        let (v_last, _) = *pairs.last().unwrap();
        let c_next = e.bottom_among(v_last, q_alive).expect("positive total weight");
        if let Some(&start) = seen.get(&c_next) {
            let cycle = pairs.split_off(start);
            return Ok(Some(BottomTradingCycle::new(e, matching, q, cycle)?));
        }
        let v_next = (0..n)
            .find(|&v| !matching.entry(v, c_next).is_zero())
            .expect("a candidate with positive weight has a positive column entry");
        seen.insert(c_next, pairs.len());
        pairs.push((v_next, c_next));
    }
}

/// Swaps one unit of weight along a bottom trading cycle: each cycle voter
/// moves a unit from her cycle candidate to her bottom remaining choice.
/// Marginals are preserved, and every candidate admitting the original
/// matching admits the result.
pub fn swap_along_cycle(matching: &Matching, cycle: &BottomTradingCycle) -> Result<Matching> {
    if !matching.is_integral() {
        return Err(Error::NonIntegral("matching must be integral".into()));
    }
    let mut entries: Vec<Vec<BigRational>> = (0..matching.num_voters())
        .map(|v| {
            (0..matching.num_candidates())
                .map(|c| matching.entry(v, c).clone())
                .collect()
        })
        .collect();
    let k = cycle.pairs().len();
    for (i, &(v, c)) in cycle.pairs().iter().enumerate() {
        if entries[v][c].is_zero() {
            return Err(Error::InvalidCycle(format!(
                "entry ({}, {c}) has no weight to move",
                v + 1
            )));
        }
        let (_, c_next) = cycle.pairs()[(i + 1) % k];
        entries[v][c] -= BigRational::one();
        entries[v][c_next] += BigRational::one();
    }
    let swapped = Matching::from_entries(entries)?;
    debug_assert_eq!(swapped.row_marginals(), matching.row_marginals());
    debug_assert_eq!(swapped.col_marginals(), matching.col_marginals());
    Ok(swapped)
}

/// Synthesizes a veto order realizing an integral matching: running
/// `SerialVeto` with the result yields winners that contain the winners
/// tied at `matching`.
///
/// Peels one unit at a time: whenever no voter holds weight on her bottom
/// remaining choice, a bottom-trading-cycle swap (which only grows the
/// tied-winner set) creates one; the lexicographically first such voter is
/// emitted and her unit removed.
pub fn veto_order_for_matching(
    e: &Election,
    p: &WeightVector,
    q: &WeightVector,
    matching: &Matching,
) -> Result<VetoOrder> {
    matching.check_shape(e)?;
    p.check_shape(e, WeightDomain::Voters)?;
    q.check_shape(e, WeightDomain::Candidates)?;
    if !p.is_integral() || !q.is_integral() || !matching.is_integral() {
        return Err(Error::NonIntegral(
            "veto order synthesis requires integral weights and matching".into(),
        ));
    }
    if matching.row_marginals() != p.weights() || matching.col_marginals() != q.weights() {
        return Err(Error::MatchingMismatch(
            "matching marginals must equal (p, q)".into(),
        ));
    }

    let n = e.num_voters();
    let m = e.num_candidates();
    let mut cur: Vec<Vec<BigRational>> = (0..n)
        .map(|v| (0..m).map(|c| matching.entry(v, c).clone()).collect())
        .collect();
    let mut qw: Vec<BigRational> = q.weights().to_vec();
    let mut remaining = q.total().to_integer();
    let mut sequence = Vec::new();

    while remaining.is_positive() {
        let voter_on_bottom = |cur: &Vec<Vec<BigRational>>, qw: &Vec<BigRational>| {
            (0..n).find(|&v| {
                let b = e
                    .bottom_among(v, |c| !qw[c].is_zero())
                    .expect("positive remaining weight");
                !cur[v][b].is_zero()
            })
        };
        let voter = match voter_on_bottom(&cur, &qw) {
            Some(v) => v,
            None => {
                let snapshot = Matching::from_entries(cur.clone())?;
                let q_now = WeightVector::new(WeightDomain::Candidates, qw.clone())?;
                let cycle = find_bottom_trading_cycle(e, &snapshot, &q_now)?
                    .expect("a matching with no voter on her bottom has a trading cycle");
                let swapped = swap_along_cycle(&snapshot, &cycle)?;
                cur = (0..n)
                    .map(|v| (0..m).map(|c| swapped.entry(v, c).clone()).collect())
                    .collect();
                voter_on_bottom(&cur, &qw)
                    .expect("swapping puts every cycle voter on her bottom")
            }
        };
        let bottom = e
            .bottom_among(voter, |c| !qw[c].is_zero())
            .expect("positive remaining weight");
        cur[voter][bottom] -= BigRational::one();
        qw[bottom] -= BigRational::one();
        remaining -= 1;
        sequence.push(voter);
    }
    Ok(VetoOrder::new(sequence))
}
