//! Ballot data model: elections, score tallies, weight vectors, the plain
//! text ballot format, and seeded random profile generation.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ratio;
use crate::{Error, Result};

/// An election: named candidates and one strict total-order ranking per
/// voter. Voters are identified by their position (0-based internally;
/// rendered 1-based in the ballot format and all JSON output).
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Election {
    candidates: Vec<String>,
    /// `rankings[v][r]` is the candidate index voter `v` ranks at position
    /// `r` (0 = top choice).
    rankings: Vec<Vec<usize>>,
    /// `positions[v][c]` is the rank of candidate `c` under voter `v`.
    positions: Vec<Vec<usize>>,
}

impl Election {
    /// Builds an election, validating that every ranking is a permutation
    /// of the full candidate set and that names are unique.
    pub fn new(candidates: Vec<String>, rankings: Vec<Vec<usize>>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidElection("no candidates".into()));
        }
        if rankings.is_empty() {
            return Err(Error::InvalidElection("no voters".into()));
        }
        let m = candidates.len();
        let mut seen_names = BTreeSet::new();
        for name in &candidates {
            if !seen_names.insert(name.as_str()) {
                return Err(Error::InvalidElection(format!(
                    "duplicate candidate `{name}`"
                )));
            }
        }
        let mut positions = Vec::with_capacity(rankings.len());
        for (v, ranking) in rankings.iter().enumerate() {
            if ranking.len() != m {
                return Err(Error::InvalidElection(format!(
                    "voter {} ranks {} of {} candidates",
                    v + 1,
                    ranking.len(),
                    m
                )));
            }
            let mut pos = vec![usize::MAX; m];
            for (r, &c) in ranking.iter().enumerate() {
                if c >= m {
                    return Err(Error::InvalidElection(format!(
                        "voter {} ranks unknown candidate index {c}",
                        v + 1
                    )));
                }
                if pos[c] != usize::MAX {
                    return Err(Error::InvalidElection(format!(
                        "voter {} ranks `{}` twice",
                        v + 1,
                        candidates[c]
                    )));
                }
                pos[c] = r;
            }
            positions.push(pos);
        }
        Ok(Election {
            candidates,
            rankings,
            positions,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_voters(&self) -> usize {
        self.rankings.len()
    }

    pub fn candidate_names(&self) -> &[String] {
        &self.candidates
    }

    pub fn candidate_name(&self, c: usize) -> &str {
        &self.candidates[c]
    }

    pub fn candidate_index(&self, name: &str) -> Option<usize> {
        self.candidates.iter().position(|n| n == name)
    }

    /// Voter `v`'s full ranking, most preferred first.
    pub fn ranking(&self, v: usize) -> &[usize] {
        &self.rankings[v]
    }

    /// Rank (0 = top) of candidate `c` under voter `v`.
    pub fn rank_of(&self, v: usize, c: usize) -> usize {
        self.positions[v][c]
    }

    /// True iff voter `v` strictly prefers `a` to `b`.
    pub fn prefers(&self, v: usize, a: usize, b: usize) -> bool {
        self.positions[v][a] < self.positions[v][b]
    }

    /// True iff voter `v` weakly prefers `a` to `b` (`a = b` included).
    pub fn weakly_prefers(&self, v: usize, a: usize, b: usize) -> bool {
        self.positions[v][a] <= self.positions[v][b]
    }

    pub fn top(&self, v: usize) -> usize {
        self.rankings[v][0]
    }

    pub fn bottom(&self, v: usize) -> usize {
        *self.rankings[v].last().unwrap()
    }

    /// Voter `v`'s most preferred candidate among `keep`; `None` if the
    /// selection is empty.
    pub fn top_among(&self, v: usize, keep: impl Fn(usize) -> bool) -> Option<usize> {
        self.rankings[v].iter().copied().find(|&c| keep(c))
    }

    /// Voter `v`'s least preferred candidate among `keep`; `None` if the
    /// selection is empty.
    pub fn bottom_among(&self, v: usize, keep: impl Fn(usize) -> bool) -> Option<usize> {
        self.rankings[v].iter().rev().copied().find(|&c| keep(c))
    }

    /// Resolves a candidate name, reporting unknown names as errors.
    pub fn require_candidate(&self, name: &str) -> Result<usize> {
        self.candidate_index(name)
            .ok_or_else(|| Error::UnknownCandidate(name.to_string()))
    }
}

/// Plurality and veto tallies of an election.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreProfile {
    /// `plurality[c]` = number of voters ranking `c` first.
    pub plurality: Vec<usize>,
    /// `veto[c]` = number of voters ranking `c` last.
    pub veto: Vec<usize>,
}

/// Counts first- and last-place votes. Both tallies sum to the number of
/// voters.
pub fn tally(e: &Election) -> ScoreProfile {
    let m = e.num_candidates();
    let mut plurality = vec![0usize; m];
    let mut veto = vec![0usize; m];
    for v in 0..e.num_voters() {
        plurality[e.top(v)] += 1;
        veto[e.bottom(v)] += 1;
    }
    ScoreProfile { plurality, veto }
}

/// Reverses every voter's ranking; candidates and voter order unchanged.
/// An involution that swaps the plurality and veto tallies.
pub fn reverse_profile(e: &Election) -> Election {
    let rankings = (0..e.num_voters())
        .map(|v| e.ranking(v).iter().rev().copied().collect())
        .collect();
    Election::new(e.candidate_names().to_vec(), rankings).expect("reversal preserves validity")
}

/// Whether a weight vector ranges over voters or candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDomain {
    Voters,
    Candidates,
}

impl fmt::Display for WeightDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDomain::Voters => write!(f, "voters"),
            WeightDomain::Candidates => write!(f, "candidates"),
        }
    }
}

/// Non-negative rational weights over voters (`p`) or candidates (`q`),
/// with a strictly positive total. Totals are kept raw: normalization to 1
/// is never required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    domain: WeightDomain,
    weights: Vec<BigRational>,
    total: BigRational,
}

impl WeightVector {
    pub fn new(domain: WeightDomain, weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidWeights(format!("negative weight {w}")));
        }
        let total: BigRational = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        Ok(WeightVector {
            domain,
            weights,
            total,
        })
    }

    /// All-ones weights (total = `len`).
    pub fn unit(domain: WeightDomain, len: usize) -> Self {
        WeightVector::new(domain, vec![BigRational::one(); len]).expect("unit weights valid")
    }

    /// Equal weights summing to `total`.
    pub fn uniform(domain: WeightDomain, len: usize, total: BigRational) -> Result<Self> {
        let share = total / BigRational::from_integer(len.into());
        WeightVector::new(domain, vec![share; len])
    }

    /// Candidate weights equal to plurality scores (total = number of
    /// voters).
    pub fn plurality(e: &Election) -> Self {
        let scores = tally(e);
        let weights = scores
            .plurality
            .iter()
            .map(|&s| BigRational::from_integer(s.into()))
            .collect();
        WeightVector::new(WeightDomain::Candidates, weights).expect("some candidate is ranked top")
    }

    /// Candidate weights equal to k-approval scores: the number of voters
    /// ranking the candidate within their top `k`. `k = 1` is plurality.
    pub fn k_approval(e: &Election, k: usize) -> Result<Self> {
        if k == 0 || k > e.num_candidates() {
            return Err(Error::InvalidWeights(format!(
                "k-approval requires 1 <= k <= {}, got {k}",
                e.num_candidates()
            )));
        }
        let mut scores = vec![0usize; e.num_candidates()];
        for v in 0..e.num_voters() {
            for &c in &e.ranking(v)[..k] {
                scores[c] += 1;
            }
        }
        let weights = scores
            .into_iter()
            .map(|s| BigRational::from_integer(s.into()))
            .collect();
        WeightVector::new(WeightDomain::Candidates, weights)
    }

    pub fn domain(&self) -> WeightDomain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> &BigRational {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn total(&self) -> &BigRational {
        &self.total
    }

    /// Sum of weights over a set of indices.
    pub fn sum_over(&self, indices: impl IntoIterator<Item = usize>) -> BigRational {
        indices
            .into_iter()
            .map(|i| self.weights[i].clone())
            .sum()
    }

    pub fn is_integral(&self) -> bool {
        self.weights.iter().all(|w| w.is_integer())
    }

    /// Checks that this vector ranges over the expected domain with the
    /// expected length for the given election.
    pub(crate) fn check_shape(&self, e: &Election, expected: WeightDomain) -> Result<()> {
        let expected_len = match expected {
            WeightDomain::Voters => e.num_voters(),
            WeightDomain::Candidates => e.num_candidates(),
        };
        if self.domain != expected {
            return Err(Error::InvalidWeights(format!(
                "expected weights over {expected}, got weights over {}",
                self.domain
            )));
        }
        if self.len() != expected_len {
            return Err(Error::InvalidWeights(format!(
                "expected {expected_len} weights over {expected}, got {}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Checks `sum(p) == sum(q)`, the precondition shared by every matching
/// and rule operation.
pub(crate) fn check_totals_match(p: &WeightVector, q: &WeightVector) -> Result<()> {
    if p.total() != q.total() {
        return Err(Error::MarginalMismatch {
            p_total: ratio::to_string(p.total()),
            q_total: ratio::to_string(q.total()),
        });
    }
    Ok(())
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-')
}

/// Parses the plain-text ballot format:
///
/// ```text
/// # comment
/// candidates a b c
/// 2: a > b > c
/// 1: c > b > a
/// ```
///
/// The first non-comment line declares the candidates; each following line
/// is `<multiplicity>: <ranking>` listing every candidate exactly once.
/// Multiplicity expands to that many identical voters; voter ids are
/// assigned in file order after expansion.
pub fn parse_election(text: &str) -> Result<Election> {
    let mut candidates: Option<Vec<String>> = None;
    let mut rankings: Vec<Vec<usize>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        let Some(names) = &candidates else {
            let Some(rest) = line.strip_prefix("candidates") else {
                return Err(Error::parse(
                    line_no,
                    "expected `candidates <name> <name> ...` before any ballots",
                ));
            };
            let mut list = Vec::new();
            for name in rest.split_whitespace() {
                if !valid_name(name) {
                    return Err(Error::parse(
                        line_no,
                        format!("invalid candidate name `{name}` (use [A-Za-z0-9_-]+)"),
                    ));
                }
                if list.iter().any(|n| n == name) {
                    return Err(Error::parse(line_no, format!("duplicate candidate `{name}`")));
                }
                list.push(name.to_string());
            }
            if list.is_empty() {
                return Err(Error::parse(line_no, "no candidates declared"));
            }
            candidates = Some(list);
            continue;
        };

        let Some((mult_str, ranking_str)) = line.split_once(':') else {
            return Err(Error::parse(
                line_no,
                "expected `<multiplicity>: <name> > <name> > ...`",
            ));
        };
        let multiplicity: usize = mult_str.trim().parse().map_err(|_| {
            Error::parse(line_no, format!("invalid multiplicity `{}`", mult_str.trim()))
        })?;
        if multiplicity < 1 {
            return Err(Error::parse(line_no, "multiplicity must be at least 1"));
        }

        let mut ranking = Vec::with_capacity(names.len());
        let mut seen = vec![false; names.len()];
        for part in ranking_str.split('>') {
            let name = part.trim();
            if name.is_empty() {
                return Err(Error::parse(line_no, "empty entry in ranking"));
            }
            let Some(c) = names.iter().position(|n| n == name) else {
                return Err(Error::parse(line_no, format!("unknown candidate `{name}`")));
            };
            if seen[c] {
                return Err(Error::parse(
                    line_no,
                    format!("candidate `{name}` appears twice in ranking"),
                ));
            }
            seen[c] = true;
            ranking.push(c);
        }
        if ranking.len() != names.len() {
            let missing = names
                .iter()
                .enumerate()
                .filter(|(c, _)| !seen[*c])
                .map(|(_, n)| n.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::parse(
                line_no,
                format!("ranking omits candidate(s): {missing}"),
            ));
        }
        for _ in 0..multiplicity {
            rankings.push(ranking.clone());
        }
    }

    let Some(candidates) = candidates else {
        return Err(Error::parse(1, "missing `candidates` line"));
    };
    if rankings.is_empty() {
        return Err(Error::parse(1, "no ballots"));
    }
    Election::new(candidates, rankings)
}

/// Renders an election in the ballot format with multiplicity 1 per voter.
/// `parse_election(render_election(e)) == e`.
pub fn render_election(e: &Election) -> String {
    let mut out = String::from("candidates");
    for name in e.candidate_names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for v in 0..e.num_voters() {
        let names: Vec<&str> = e.ranking(v).iter().map(|&c| e.candidate_name(c)).collect();
        out.push_str("1: ");
        out.push_str(&names.join(" > "));
        out.push('\n');
    }
    out
}

/// Draws an Impartial Culture election: each voter's ranking is an
/// independent uniform permutation. Candidates are named `c1..cm`.
///
/// Deterministic: voter `v`'s ranking comes from a ChaCha8 generator seeded
/// with `seed` on stream `v` (a Fisher-Yates shuffle from the end), so the
/// same `(m, n, seed)` always produces the identical election and adding
/// voters never changes earlier voters' draws.
pub fn random_election(m: usize, n: usize, seed: u64) -> Election {
    assert!(m >= 1 && n >= 1, "need at least one candidate and voter");
    let candidates: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();
    let rankings = (0..n)
        .map(|v| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(v as u64);
            let mut ranking: Vec<usize> = (0..m).collect();
            for i in (1..m).rev() {
                let j = rng.gen_range(0..=i);
                ranking.swap(i, j);
            }
            ranking
        })
        .collect();
    Election::new(candidates, rankings).expect("generated election valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn election(m: usize, rankings: &[&[usize]]) -> Election {
        let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
        Election::new(names, rankings.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn parses_two_voter_tie_instance() {
        let e = parse_election("candidates a b\n1: a > b\n1: b > a").unwrap();
        assert_eq!(e.num_voters(), 2);
        assert_eq!(e.num_candidates(), 2);
        assert_eq!(e.ranking(0), &[0, 1]);
        assert_eq!(e.ranking(1), &[1, 0]);
    }

    #[test]
    fn parses_smallest_input() {
        let e = parse_election("candidates a\n1: a").unwrap();
        assert_eq!((e.num_voters(), e.num_candidates()), (1, 1));
    }

    #[test]
    fn multiplicity_expands_to_identical_voters() {
        let e = parse_election("candidates a b\n3: a > b").unwrap();
        assert_eq!(e.num_voters(), 3);
        for v in 0..3 {
            assert_eq!(e.ranking(v), &[0, 1]);
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let e = parse_election("# header\n\ncandidates a b\n# mid\n1: b > a\n").unwrap();
        assert_eq!(e.num_voters(), 1);
        assert_eq!(e.top(0), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dup = parse_election("candidates a a\n1: a > a").unwrap_err();
        assert!(matches!(dup, Error::Parse { line: 1, .. }), "{dup}");

        let omit = parse_election("candidates a b c\n1: a > b").unwrap_err();
        assert!(matches!(omit, Error::Parse { line: 2, .. }), "{omit}");

        let repeat = parse_election("candidates a b\n1: a > a").unwrap_err();
        assert!(matches!(repeat, Error::Parse { line: 2, .. }), "{repeat}");

        let zero_mult = parse_election("candidates a b\n0: a > b").unwrap_err();
        assert!(matches!(zero_mult, Error::Parse { line: 2, .. }), "{zero_mult}");

        let unknown = parse_election("candidates a b\n1: a > z").unwrap_err();
        assert!(matches!(unknown, Error::Parse { line: 2, .. }), "{unknown}");
    }

    #[test]
    fn render_round_trips() {
        let e = parse_election("candidates a b c\n2: a > c > b\n1: b > a > c").unwrap();
        assert_eq!(parse_election(&render_election(&e)).unwrap(), e);
    }

    #[test]
    fn tally_counts_tops_and_bottoms() {
        // One voter (a > b): plurality a, veto b.
        let e = election(2, &[&[0, 1]]);
        let s = tally(&e);
        assert_eq!(s.plurality, vec![1, 0]);
        assert_eq!(s.veto, vec![0, 1]);
    }

    #[test]
    fn tally_matches_three_candidate_instance() {
        // a > b > c and c > b > a: plurality {a:1, b:0, c:1}, veto same.
        let e = election(3, &[&[0, 1, 2], &[2, 1, 0]]);
        let s = tally(&e);
        assert_eq!(s.plurality, vec![1, 0, 1]);
        assert_eq!(s.veto, vec![1, 0, 1]);
    }

    #[test]
    fn reverse_is_involution_and_swaps_tallies() {
        let e = random_election(4, 6, 7);
        let r = reverse_profile(&e);
        assert_eq!(reverse_profile(&r), e);
        let se = tally(&e);
        let sr = tally(&r);
        assert_eq!(sr.plurality, se.veto);
        assert_eq!(sr.veto, se.plurality);
        assert_eq!(r.ranking(0), e.ranking(0).iter().rev().copied().collect::<Vec<_>>());
    }

    #[test]
    fn random_election_is_deterministic() {
        assert_eq!(random_election(3, 5, 42), random_election(3, 5, 42));
        assert_ne!(random_election(3, 5, 42), random_election(3, 5, 43));
    }

    #[test]
    fn random_election_single_candidate() {
        let e = random_election(1, 4, 9);
        for v in 0..4 {
            assert_eq!(e.ranking(v), &[0]);
        }
    }

    #[test]
    fn random_election_streams_are_prefix_stable() {
        // Adding voters must not change earlier voters' draws.
        let small = random_election(4, 3, 11);
        let large = random_election(4, 10, 11);
        for v in 0..3 {
            assert_eq!(small.ranking(v), large.ranking(v));
        }
    }

    #[test]
    fn random_election_top_frequency_is_uniform() {
        // Over many seeds, each candidate tops voter 0 about 1/3 of the time.
        let trials = 10_000;
        let mut counts = [0usize; 3];
        for seed in 0..trials {
            counts[random_election(3, 1, seed as u64).top(0)] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 3.0).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn weight_vectors_validate() {
        assert!(WeightVector::new(WeightDomain::Voters, vec![]).is_err());
        assert!(
            WeightVector::new(WeightDomain::Voters, vec![ratio::rational(-1, 2)]).is_err()
        );
        assert!(WeightVector::new(
            WeightDomain::Voters,
            vec![BigRational::zero(), BigRational::zero()]
        )
        .is_err());

        let w = WeightVector::new(
            WeightDomain::Voters,
            vec![ratio::rational(1, 2), ratio::rational(3, 2)],
        )
        .unwrap();
        assert_eq!(w.total(), &ratio::integer(2));
        assert!(!w.is_integral());
        assert_eq!(w.sum_over([1]), ratio::rational(3, 2));
    }

    #[test]
    fn plurality_and_k_approval_weights() {
        let e = election(3, &[&[0, 1, 2], &[2, 1, 0]]);
        let plu = WeightVector::plurality(&e);
        assert_eq!(
            plu.weights(),
            &[ratio::integer(1), ratio::integer(0), ratio::integer(1)]
        );
        let k2 = WeightVector::k_approval(&e, 2).unwrap();
        assert_eq!(
            k2.weights(),
            &[ratio::integer(1), ratio::integer(2), ratio::integer(1)]
        );
        assert_eq!(
            WeightVector::k_approval(&e, 3).unwrap().total(),
            &ratio::integer(6)
        );
        assert!(WeightVector::k_approval(&e, 0).is_err());
        assert!(WeightVector::k_approval(&e, 4).is_err());
    }

    #[test]
    fn top_and_bottom_among_subsets() {
        let e = election(4, &[&[2, 0, 3, 1]]);
        assert_eq!(e.top(0), 2);
        assert_eq!(e.bottom(0), 1);
        let keep = |c: usize| c == 0 || c == 3;
        assert_eq!(e.top_among(0, keep), Some(0));
        assert_eq!(e.bottom_among(0, keep), Some(3));
        assert_eq!(e.top_among(0, |_| false), None);
    }
}
