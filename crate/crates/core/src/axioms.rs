//! Executable axiom checkers for the default rule (`SimultaneousVeto`
//! with unit voter weights and plurality candidate weights), plus
//! reproductions of its documented violations.
//!
//! Every failing report carries a replayable counterexample: the
//! election(s) serialized in the ballot format together with both winner
//! sets.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::election::{
    parse_election, render_election, reverse_profile, tally, Election, WeightDomain, WeightVector,
};
use crate::enumerate::permutations;
use crate::rules::simultaneous_veto;
use crate::Result;

/// The checkable axioms of the default rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    AnonymityNeutrality,
    Resolvability,
    Monotonicity,
    MajorityFamily,
    ReversalSymmetry,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::AnonymityNeutrality,
        Axiom::Resolvability,
        Axiom::Monotonicity,
        Axiom::MajorityFamily,
        Axiom::ReversalSymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::AnonymityNeutrality => "anonymity-neutrality",
            Axiom::Resolvability => "resolvability",
            Axiom::Monotonicity => "monotonicity",
            Axiom::MajorityFamily => "majority-family",
            Axiom::ReversalSymmetry => "reversal-symmetry",
        }
    }

    pub fn from_name(name: &str) -> Option<Axiom> {
        Axiom::ALL.into_iter().find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

/// A replayable witness of an axiom failure.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    /// The original election in ballot format.
    pub election: String,
    /// The perturbed election in ballot format.
    pub modified: String,
    pub original_winners: Vec<String>,
    pub modified_winners: Vec<String>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl AxiomReport {
    fn pass(axiom: &str) -> Self {
        AxiomReport {
            axiom: axiom.to_string(),
            verdict: Verdict::Pass,
            counterexample: None,
        }
    }

    fn fail(axiom: &str, counterexample: Counterexample) -> Self {
        AxiomReport {
            axiom: axiom.to_string(),
            verdict: Verdict::Fail,
            counterexample: Some(counterexample),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Winners of the default rule: `SimultaneousVeto` with unit voter
/// weights and plurality candidate weights.
pub fn default_winners(e: &Election) -> Result<BTreeSet<usize>> {
    let p = WeightVector::unit(WeightDomain::Voters, e.num_voters());
    let q = WeightVector::plurality(e);
    Ok(simultaneous_veto(e, &p, &q)?.winners.winners)
}

fn winner_names(e: &Election, winners: &BTreeSet<usize>) -> Vec<String> {
    winners
        .iter()
        .map(|&c| e.candidate_name(c).to_string())
        .collect()
}

/// Checks invariance of the winner set under sampled voter permutations
/// and candidate relabelings: renaming candidates by `pi` and reordering
/// voters must map winners through `pi`.
pub fn check_anonymity_neutrality(e: &Election, seed: u64, samples: usize) -> Result<AxiomReport> {
    let axiom = Axiom::AnonymityNeutrality.name();
    let base = default_winners(e)?;
    let n = e.num_voters();
    let m = e.num_candidates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut voter_perm: Vec<usize> = (0..n).collect();
        voter_perm.shuffle(&mut rng);
        let mut cand_perm: Vec<usize> = (0..m).collect();
        cand_perm.shuffle(&mut rng);

        let rankings = (0..n)
            .map(|v| {
                e.ranking(voter_perm[v])
                    .iter()
                    .map(|&c| cand_perm[c])
                    .collect()
            })
            .collect();
        let permuted = Election::new(e.candidate_names().to_vec(), rankings)?;
        let got = default_winners(&permuted)?;
        let expected: BTreeSet<usize> = base.iter().map(|&c| cand_perm[c]).collect();
        if got != expected {
            return Ok(AxiomReport::fail(
                axiom,
                Counterexample {
                    election: render_election(e),
                    modified: render_election(&permuted),
                    original_winners: winner_names(e, &base),
                    modified_winners: winner_names(&permuted, &got),
                    note: format!(
                        "voters permuted by {voter_perm:?}, candidates relabeled by {cand_perm:?}; \
                         expected winners {:?}",
                        winner_names(&permuted, &expected)
                    ),
                },
            ));
        }
    }
    Ok(AxiomReport::pass(axiom))
}

/// Ranking completions for one added voter who top-ranks `w`: all of them
/// for small candidate sets, otherwise both index-order extremes plus a
/// few seeded shuffles (the axiom constrains only the top position).
fn added_voter_rankings(e: &Election, w: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..e.num_candidates()).filter(|&c| c != w).collect();
    let mut completions: Vec<Vec<usize>> = Vec::new();
    if others.len() <= 3 {
        for perm in permutations(others.len()) {
            completions.push(perm.into_iter().map(|i| others[i]).collect());
        }
    } else {
        completions.push(others.clone());
        completions.push(others.iter().rev().copied().collect());
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..6 {
            let mut sample = others.clone();
            sample.shuffle(&mut rng);
            completions.push(sample);
        }
    }
    completions
        .into_iter()
        .map(|rest| {
            let mut ranking = vec![w];
            ranking.extend(rest);
            ranking
        })
        .collect()
}

/// Checks that adding one voter who top-ranks any current winner `w`
/// makes `w` the unique winner.
pub fn check_resolvability(e: &Election) -> Result<AxiomReport> {
    let axiom = Axiom::Resolvability.name();
    let base = default_winners(e)?;
    for &w in &base {
        for ranking in added_voter_rankings(e, w) {
            let mut rankings: Vec<Vec<usize>> =
                (0..e.num_voters()).map(|v| e.ranking(v).to_vec()).collect();
            rankings.push(ranking);
            let augmented = Election::new(e.candidate_names().to_vec(), rankings)?;
            let got = default_winners(&augmented)?;
            if got != BTreeSet::from([w]) {
                return Ok(AxiomReport::fail(
                    axiom,
                    Counterexample {
                        election: render_election(e),
                        modified: render_election(&augmented),
                        original_winners: winner_names(e, &base),
                        modified_winners: winner_names(&augmented, &got),
                        note: format!(
                            "added a voter top-ranking `{}`; expected it to win alone",
                            e.candidate_name(w)
                        ),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass(axiom))
}

/// Checks that promoting a winner by one adjacent swap in any single
/// ranking keeps it winning. Larger promotions compose from adjacent
/// swaps, so single swaps suffice.
pub fn check_monotonicity(e: &Election) -> Result<AxiomReport> {
    let axiom = Axiom::Monotonicity.name();
    let base = default_winners(e)?;
    for &w in &base {
        for v in 0..e.num_voters() {
            let position = e.rank_of(v, w);
            if position == 0 {
                continue;
            }
            let mut rankings: Vec<Vec<usize>> =
                (0..e.num_voters()).map(|u| e.ranking(u).to_vec()).collect();
            rankings[v].swap(position - 1, position);
            let promoted = Election::new(e.candidate_names().to_vec(), rankings)?;
            let got = default_winners(&promoted)?;
            if !got.contains(&w) {
                return Ok(AxiomReport::fail(
                    axiom,
                    Counterexample {
                        election: render_election(e),
                        modified: render_election(&promoted),
                        original_winners: winner_names(e, &base),
                        modified_winners: winner_names(&promoted, &got),
                        note: format!(
                            "voter {} promoted winner `{}` one place and it lost",
                            v + 1,
                            e.candidate_name(w)
                        ),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass(axiom))
}

/// Checks the mutual-majority family: every candidate set front-ranked
/// (as a set of top positions) by a strict majority of voters must
/// contain all winners. Covers Majority (singletons) and Majority Loser
/// (complement singletons) as special cases.
///
/// A set front-ranked by anyone is some voter's top-`k` prefix, so only
/// the `n * m` per-voter prefixes need counting.
pub fn check_majority_family(e: &Election) -> Result<AxiomReport> {
    let axiom = Axiom::MajorityFamily.name();
    let winners = default_winners(e)?;
    let n = e.num_voters();
    let mut counts: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    for v in 0..n {
        for k in 1..e.num_candidates() {
            let prefix: BTreeSet<usize> = e.ranking(v)[..k].iter().copied().collect();
            *counts.entry(prefix).or_insert(0) += 1;
        }
    }
    for (set, count) in counts {
        if 2 * count > n && !winners.is_subset(&set) {
            let names: Vec<&str> = set.iter().map(|&c| e.candidate_name(c)).collect();
            return Ok(AxiomReport::fail(
                axiom,
                Counterexample {
                    election: render_election(e),
                    modified: render_election(e),
                    original_winners: winner_names(e, &winners),
                    modified_winners: winner_names(e, &winners),
                    note: format!(
                        "a strict majority front-ranks {{{}}} but a winner falls outside it",
                        names.join(", ")
                    ),
                },
            ));
        }
    }
    Ok(AxiomReport::pass(axiom))
}

/// Checks reversal symmetry: a unique winner must not win once every
/// ranking is reversed. Also checks the stepping stone that a unique
/// winner's plurality score strictly exceeds its veto score. Vacuously
/// passes on ties and on single-candidate elections (reversal fixes
/// those, so no rule can dethrone the only candidate).
pub fn check_reversal_symmetry(e: &Election) -> Result<AxiomReport> {
    let axiom = Axiom::ReversalSymmetry.name();
    if e.num_candidates() == 1 {
        return Ok(AxiomReport::pass(axiom));
    }
    let base = default_winners(e)?;
    if base.len() != 1 {
        return Ok(AxiomReport::pass(axiom));
    }
    let w = *base.iter().next().unwrap();
    let scores = tally(e);
    let reversed = reverse_profile(e);
    let reversed_winners = default_winners(&reversed)?;
    if scores.plurality[w] <= scores.veto[w] || reversed_winners.contains(&w) {
        return Ok(AxiomReport::fail(
            axiom,
            Counterexample {
                election: render_election(e),
                modified: render_election(&reversed),
                original_winners: winner_names(e, &base),
                modified_winners: winner_names(&reversed, &reversed_winners),
                note: format!(
                    "unique winner `{}` has plurality {} / veto {}; it must lose after reversal",
                    e.candidate_name(w),
                    scores.plurality[w],
                    scores.veto[w]
                ),
            },
        ));
    }
    Ok(AxiomReport::pass(axiom))
}

/// Unified dispatch for the sweepable axioms.
pub fn check(axiom: Axiom, e: &Election, seed: u64) -> Result<AxiomReport> {
    match axiom {
        Axiom::AnonymityNeutrality => check_anonymity_neutrality(e, seed, 20),
        Axiom::Resolvability => check_resolvability(e),
        Axiom::Monotonicity => check_monotonicity(e),
        Axiom::MajorityFamily => check_majority_family(e),
        Axiom::ReversalSymmetry => check_reversal_symmetry(e),
    }
}

/// A weak Condorcet winner: weakly preferred to every rival by at least
/// half the voters.
pub fn condorcet_winner(e: &Election) -> Option<usize> {
    let n = e.num_voters();
    (0..e.num_candidates()).find(|&a| {
        (0..e.num_candidates()).all(|b| {
            if a == b {
                return true;
            }
            let favor = (0..n).filter(|&v| e.prefers(v, a, b)).count();
            2 * favor >= n
        })
    })
}

/// True iff every voter ranks `dominator` above `dominated`.
pub fn pareto_dominates(e: &Election, dominator: usize, dominated: usize) -> bool {
    (0..e.num_voters()).all(|v| e.prefers(v, dominator, dominated))
}

/// The five-voter instance splitting into three- and two-voter halves
/// whose winner sets fail to intersect-compose.
pub fn consistency_instance() -> (Election, Election, Election) {
    let full = parse_election(
        "candidates a b c d e\n\
         1: a > c > d > b > e\n\
         1: b > c > a > d > e\n\
         1: d > c > b > a > e\n\
         1: c > a > b > d > e\n\
         1: e > d > b > a > c",
    )
    .unwrap();
    let part1 = parse_election(
        "candidates a b c d e\n\
         1: a > c > d > b > e\n\
         1: b > c > a > d > e\n\
         1: d > c > b > a > e",
    )
    .unwrap();
    let part2 = parse_election(
        "candidates a b c d e\n\
         1: c > a > b > d > e\n\
         1: e > d > b > a > c",
    )
    .unwrap();
    (full, part1, part2)
}

/// The two-voter chain instance where every candidate wins although the
/// middle candidates are Pareto dominated.
pub fn pareto_instance(m: usize) -> Election {
    assert!(m >= 3);
    let names: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();
    let first: Vec<usize> = (0..m).collect();
    let mut second: Vec<usize> = vec![m - 1];
    second.extend(1..m - 1);
    second.push(0);
    Election::new(names, vec![first, second]).unwrap()
}

/// Replays the documented violations and asserts they occur exactly:
///
/// - electoral consistency: the five-voter instance elects `{a, b, c}`
///   while its halves elect `{a, b, c, d}` and `{a, b, c, d, e}`;
/// - Pareto: the two-voter chain with five candidates elects everyone,
///   Pareto-dominated candidates included, and every dominator of a
///   dominated winner has plurality score zero;
/// - Condorcet: a seeded search finds an election whose Condorcet winner
///   loses.
///
/// Panics if any reproduction drifts — that is a regression.
pub fn demonstrate_violations() -> Result<Vec<AxiomReport>> {
    let mut reports = Vec::new();

    let (full, part1, part2) = consistency_instance();
    let w_full = default_winners(&full)?;
    let w1 = default_winners(&part1)?;
    let w2 = default_winners(&part2)?;
    let name_set = |e: &Election, s: &BTreeSet<usize>| winner_names(e, s);
    assert_eq!(name_set(&full, &w_full), ["a", "b", "c"]);
    assert_eq!(name_set(&part1, &w1), ["a", "b", "c", "d"]);
    assert_eq!(name_set(&part2, &w2), ["a", "b", "c", "d", "e"]);
    reports.push(AxiomReport {
        axiom: "consistency-violation".into(),
        verdict: Verdict::Pass,
        counterexample: Some(Counterexample {
            election: render_election(&full),
            modified: format!("{}\n{}", render_election(&part1), render_election(&part2)),
            original_winners: name_set(&full, &w_full),
            modified_winners: {
                let mut both = name_set(&part1, &w1);
                both.extend(name_set(&part2, &w2));
                both
            },
            note: "the whole election's winners are not the intersection of its parts'".into(),
        }),
    });

    let pareto = pareto_instance(5);
    let w_pareto = default_winners(&pareto)?;
    assert_eq!(w_pareto.len(), 5, "every candidate ties in the chain instance");
    let scores = tally(&pareto);
    let mut dominated_winners = Vec::new();
    for &a in &w_pareto {
        for b in 0..pareto.num_candidates() {
            if b != a && pareto_dominates(&pareto, b, a) {
                dominated_winners.push(a);
                // The mitigating claim: any dominator of a winning
                // dominated candidate has plurality score zero.
                assert_eq!(
                    scores.plurality[b],
                    0,
                    "dominators of dominated winners have plurality zero"
                );
            }
        }
    }
    dominated_winners.dedup();
    assert_eq!(
        dominated_winners.len(),
        pareto.num_candidates() - 3,
        "the middle candidates c3..c(m-1) are dominated yet win"
    );
    reports.push(AxiomReport {
        axiom: "pareto-violation".into(),
        verdict: Verdict::Pass,
        counterexample: Some(Counterexample {
            election: render_election(&pareto),
            modified: render_election(&pareto),
            original_winners: winner_names(&pareto, &w_pareto),
            modified_winners: winner_names(&pareto, &w_pareto),
            note: "Pareto-dominated candidates are elected; all dominators have plurality 0"
                .into(),
        }),
    });

    let mut condorcet_example = None;
    'search: for seed in 0..20_000u64 {
        let m = 3 + (seed % 3) as usize;
        let n = 2 + (seed % 4) as usize;
        let e = crate::election::random_election(m, n, 0xC04D0 + seed);
        if let Some(w) = condorcet_winner(&e) {
            let winners = default_winners(&e)?;
            if !winners.contains(&w) {
                condorcet_example = Some((e, w, winners));
                break 'search;
            }
        }
    }
    let (e, w, winners) =
        condorcet_example.expect("the seeded search finds a losing Condorcet winner");
    reports.push(AxiomReport {
        axiom: "condorcet-violation".into(),
        verdict: Verdict::Pass,
        counterexample: Some(Counterexample {
            election: render_election(&e),
            modified: render_election(&e),
            original_winners: winner_names(&e, &winners),
            modified_winners: vec![e.candidate_name(w).to_string()],
            note: format!(
                "`{}` is a Condorcet winner but is not elected",
                e.candidate_name(w)
            ),
        }),
    });

    Ok(reports)
}
