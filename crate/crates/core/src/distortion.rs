//! Exact metric-distortion oracle.
//!
//! The distortion of candidate `c` is the largest ratio `cost(c, d) /
//! cost(x, d)` over all pseudo-metrics `d` consistent with the rankings
//! and all reference candidates `x`. Only voter-candidate distances are
//! modeled; the triangle inequality takes the relaxed four-point form
//! `d(v, c) <= d(v, c') + d(v', c') + d(v', c)`.
//!
//! Each ratio is the value of a linear program (maximize `cost(c)` with
//! `cost(x)` normalized) solved exactly over rationals. The full triangle
//! family is enforced lazily: violated rows are added to the working
//! program until the optimum — or an unbounded ray — satisfies every row,
//! which yields the exact optimum of the complete program.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::election::Election;
use crate::simplex::{maximize, Constraint, Program, Relation, Solution};
use crate::{Error, Result};

/// Default cap on `n * m` for the LP oracle (the program has `n * m`
/// variables and on the order of `n^2 m^2` triangle rows).
pub const DEFAULT_MAX_LP_CELLS: usize = 64;

/// A voter-to-candidate distance table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoterCandidateMetric {
    d: Vec<Vec<BigRational>>,
}

impl VoterCandidateMetric {
    /// Validates non-negativity, per-voter consistency with the rankings,
    /// and the relaxed triangle inequality.
    pub fn new(e: &Election, d: Vec<Vec<BigRational>>) -> Result<Self> {
        let metric = VoterCandidateMetric { d };
        metric.validate(e)?;
        Ok(metric)
    }

    pub fn get(&self, v: usize, c: usize) -> &BigRational {
        &self.d[v][c]
    }

    /// Distances induced by points on a line: `d(v, c) = |pos(v) - pos(c)|`.
    /// A true metric, so all pseudo-metric constraints hold for any
    /// ranking ordered by distance.
    pub fn from_line_embedding(
        voter_positions: &[BigRational],
        candidate_positions: &[BigRational],
    ) -> Self {
        let d = voter_positions
            .iter()
            .map(|pv| {
                candidate_positions
                    .iter()
                    .map(|pc| {
                        let diff = pv - pc;
                        if diff.is_negative() {
                            -diff
                        } else {
                            diff
                        }
                    })
                    .collect()
            })
            .collect();
        VoterCandidateMetric { d }
    }

    fn validate(&self, e: &Election) -> Result<()> {
        let n = e.num_voters();
        let m = e.num_candidates();
        if self.d.len() != n || self.d.iter().any(|row| row.len() != m) {
            return Err(Error::MatchingMismatch(
                "metric does not fit the election".into(),
            ));
        }
        for v in 0..n {
            for c in 0..m {
                if self.d[v][c].is_negative() {
                    return Err(Error::InvalidWeights(format!(
                        "negative distance d({}, {})",
                        v + 1,
                        e.candidate_name(c)
                    )));
                }
            }
            for pair in e.ranking(v).windows(2) {
                if self.d[v][pair[0]] > self.d[v][pair[1]] {
                    return Err(Error::InvalidWeights(format!(
                        "voter {} ranks `{}` above `{}` but sits closer to the latter",
                        v + 1,
                        e.candidate_name(pair[0]),
                        e.candidate_name(pair[1])
                    )));
                }
            }
        }
        for v in 0..n {
            for u in 0..n {
                for a in 0..m {
                    for b in 0..m {
                        if self.d[v][a] > &self.d[v][b] + &self.d[u][b] + &self.d[u][a] {
                            return Err(Error::InvalidWeights(format!(
                                "triangle inequality violated at ({}, {}, {}, {})",
                                v + 1,
                                u + 1,
                                e.candidate_name(a),
                                e.candidate_name(b)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Total distance of all voters to candidate `c`.
pub fn cost(e: &Election, metric: &VoterCandidateMetric, c: usize) -> BigRational {
    assert!(c < e.num_candidates(), "candidate index out of range");
    (0..e.num_voters()).map(|v| metric.get(v, c).clone()).sum()
}

/// An exact distortion value; infinite when some consistent pseudo-metric
/// gives the reference candidate cost zero while `c` has positive cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distortion {
    Finite(BigRational),
    Infinite,
}

impl Distortion {
    pub fn is_finite(&self) -> bool {
        matches!(self, Distortion::Finite(_))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Distortion::Finite(r) => Some(r),
            Distortion::Infinite => None,
        }
    }

    /// True iff the value is at most `bound`.
    pub fn at_most(&self, bound: &BigRational) -> bool {
        match self {
            Distortion::Finite(r) => r <= bound,
            Distortion::Infinite => false,
        }
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Finite(r) => write!(f, "{}", crate::ratio::to_string(r)),
            Distortion::Infinite => write!(f, "infinity"),
        }
    }
}

pub(crate) enum PairValue {
    Bounded(BigRational),
    Unbounded,
}

struct LpBuilder {
    n: usize,
    m: usize,
}

impl LpBuilder {
    fn var(&self, v: usize, c: usize) -> usize {
        v * self.m + c
    }

    /// Coefficients of the relaxed triangle row
    /// `d(v,a) - d(v,b) - d(u,b) - d(u,a) <= 0`.
    fn triangle_row(&self, v: usize, u: usize, a: usize, b: usize) -> Vec<BigRational> {
        let mut coeffs = vec![BigRational::zero(); self.n * self.m];
        coeffs[self.var(v, a)] += BigRational::one();
        coeffs[self.var(v, b)] -= BigRational::one();
        coeffs[self.var(u, b)] -= BigRational::one();
        coeffs[self.var(u, a)] -= BigRational::one();
        coeffs
    }

    /// The row's value at a point (exploits the four-term sparsity).
    fn triangle_violation(
        &self,
        point: &[BigRational],
        v: usize,
        u: usize,
        a: usize,
        b: usize,
    ) -> BigRational {
        &point[self.var(v, a)]
            - &point[self.var(v, b)]
            - &point[self.var(u, b)]
            - &point[self.var(u, a)]
    }

    /// Scans the full triangle family at `point`, returning the most
    /// violated rows (up to `cap`).
    fn violated_rows(&self, point: &[BigRational], cap: usize) -> Vec<(usize, usize, usize, usize)> {
        let mut found: Vec<((usize, usize, usize, usize), BigRational)> = Vec::new();
        for v in 0..self.n {
            for u in 0..self.n {
                if u == v {
                    continue;
                }
                for a in 0..self.m {
                    for b in 0..self.m {
                        if a == b {
                            continue;
                        }
                        let violation = self.triangle_violation(point, v, u, a, b);
                        if violation.is_positive() {
                            found.push(((v, u, a, b), violation));
                        }
                    }
                }
            }
        }
        found.sort_by(|(_, x), (_, y)| y.cmp(x));
        found.truncate(cap);
        found.into_iter().map(|(row, _)| row).collect()
    }
}

/// Value of the single-reference program: maximize `cost(c)` subject to
/// `cost(x) = norm`, consistency, and the full triangle family.
pub(crate) fn pair_value(
    e: &Election,
    c: usize,
    x: usize,
    norm: &BigRational,
) -> PairValue {
    let n = e.num_voters();
    let m = e.num_candidates();
    let builder = LpBuilder { n, m };

    let mut objective = vec![BigRational::zero(); n * m];
    for v in 0..n {
        objective[builder.var(v, c)] = BigRational::one();
    }

    let mut constraints = Vec::new();
    // Consistency between consecutive ranked pairs; transitivity covers
    // the rest.
    for v in 0..n {
        for pair in e.ranking(v).windows(2) {
            let mut coeffs = vec![BigRational::zero(); n * m];
            coeffs[builder.var(v, pair[0])] = BigRational::one();
            coeffs[builder.var(v, pair[1])] = -BigRational::one();
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Le,
                rhs: BigRational::zero(),
            });
        }
    }
    // Normalization of the reference candidate's cost.
    let mut norm_coeffs = vec![BigRational::zero(); n * m];
    for v in 0..n {
        norm_coeffs[builder.var(v, x)] = BigRational::one();
    }
    constraints.push(Constraint {
        coeffs: norm_coeffs,
        relation: Relation::Eq,
        rhs: norm.clone(),
    });
    // Seed triangle rows tying the objective candidate to the reference;
    // the rest of the family is generated on demand.
    for v in 0..n {
        for u in 0..n {
            if u != v && c != x {
                constraints.push(Constraint {
                    coeffs: builder.triangle_row(v, u, c, x),
                    relation: Relation::Le,
                    rhs: BigRational::zero(),
                });
            }
        }
    }

    let mut program = Program {
        num_vars: n * m,
        objective,
        constraints,
    };

    loop {
        match maximize(&program) {
            Solution::Optimal { value, point } => {
                let violated = builder.violated_rows(&point, 32);
                if violated.is_empty() {
                    return PairValue::Bounded(value);
                }
                for (v, u, a, b) in violated {
                    program.constraints.push(Constraint {
                        coeffs: builder.triangle_row(v, u, a, b),
                        relation: Relation::Le,
                        rhs: BigRational::zero(),
                    });
                }
            }
            Solution::Unbounded { point, ray } => {
                // The base point must satisfy the full family, and the ray
                // must not increase any row; otherwise cut and re-solve.
                let mut violated = builder.violated_rows(&point, 32);
                if violated.is_empty() {
                    violated = builder.violated_rows(&ray, 32);
                }
                if violated.is_empty() {
                    return PairValue::Unbounded;
                }
                for (v, u, a, b) in violated {
                    program.constraints.push(Constraint {
                        coeffs: builder.triangle_row(v, u, a, b),
                        relation: Relation::Le,
                        rhs: BigRational::zero(),
                    });
                }
            }
            Solution::Infeasible => {
                unreachable!("the uniform distance table is always feasible")
            }
        }
    }
}

/// Exact metric distortion of candidate `c`: the maximum of the pairwise
/// program value over all reference candidates. At least 1; `Infinite`
/// when some reference program is unbounded (e.g. a candidate ranked last
/// by every voter).
pub fn distortion(e: &Election, c: usize) -> Result<Distortion> {
    distortion_with_limit(e, c, DEFAULT_MAX_LP_CELLS)
}

/// [`distortion`] with an explicit size cap on `n * m`.
pub fn distortion_with_limit(e: &Election, c: usize, max_cells: usize) -> Result<Distortion> {
    if c >= e.num_candidates() {
        return Err(Error::UnknownCandidate(format!("index {c}")));
    }
    let cells = e.num_voters() * e.num_candidates();
    if cells > max_cells {
        return Err(Error::SizeLimit(format!(
            "distortion LP has {cells} voter-candidate cells, limit is {max_cells}"
        )));
    }
    let mut best: Option<BigRational> = None;
    let one = BigRational::one();
    for x in 0..e.num_candidates() {
        if x == c {
            continue;
        }
        match pair_value(e, c, x, &one) {
            PairValue::Unbounded => return Ok(Distortion::Infinite),
            PairValue::Bounded(value) => {
                debug_assert!(value >= one, "the uniform metric witnesses ratio 1");
                if best.as_ref().is_none_or(|b| value > *b) {
                    best = Some(value);
                }
            }
        }
    }
    Ok(Distortion::Finite(best.unwrap_or_else(|| one.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::parse_election;
    use crate::ratio::{integer, rational};

    fn ex_tie() -> Election {
        parse_election("candidates a b\n1: a > b\n1: b > a").unwrap()
    }

    #[test]
    fn cost_sums_distances() {
        // Voter 1 at the midpoint, voter 2 on b: the classic ratio-3
        // witness.
        let e = ex_tie();
        let metric = VoterCandidateMetric::new(
            &e,
            vec![
                vec![rational(1, 2), rational(1, 2)],
                vec![integer(1), integer(0)],
            ],
        )
        .unwrap();
        assert_eq!(cost(&e, &metric, 0), rational(3, 2));
        assert_eq!(cost(&e, &metric, 1), rational(1, 2));
    }

    #[test]
    fn zero_metric_costs_zero() {
        let e = ex_tie();
        let metric =
            VoterCandidateMetric::new(&e, vec![vec![integer(0); 2]; 2]).unwrap();
        assert_eq!(cost(&e, &metric, 0), integer(0));
        assert_eq!(cost(&e, &metric, 1), integer(0));
    }

    #[test]
    fn metric_validation_rejects_inconsistency() {
        let e = ex_tie();
        // Voter 1 ranks a first but is closer to b.
        let bad = VoterCandidateMetric::new(
            &e,
            vec![
                vec![integer(2), integer(1)],
                vec![integer(1), integer(0)],
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn metric_validation_rejects_triangle_violation() {
        let e = ex_tie();
        // d(1,a)=10 but d(1,b)+d(2,b)+d(2,a) = 10 is fine; 11 is not.
        let bad = VoterCandidateMetric::new(
            &e,
            vec![
                vec![integer(9), integer(10)],
                vec![integer(4), integer(3)],
            ],
        );
        assert!(bad.is_ok());
        let worse = VoterCandidateMetric::new(
            &e,
            vec![
                vec![integer(9), integer(20)],
                vec![integer(1), integer(0)],
            ],
        );
        assert!(worse.is_err());
    }

    #[test]
    fn two_opposed_voters_attain_three() {
        let e = ex_tie();
        assert_eq!(
            distortion(&e, 0).unwrap(),
            Distortion::Finite(integer(3))
        );
        assert_eq!(
            distortion(&e, 1).unwrap(),
            Distortion::Finite(integer(3))
        );
    }

    #[test]
    fn single_voter_top_has_distortion_one() {
        let e = parse_election("candidates a b c\n1: a > b > c").unwrap();
        assert_eq!(
            distortion(&e, 0).unwrap(),
            Distortion::Finite(integer(1))
        );
    }

    #[test]
    fn single_voter_bottom_is_unbounded() {
        // d(v, a) = 0 with d(v, b) free is consistent for every scale.
        let e = parse_election("candidates a b\n1: a > b").unwrap();
        assert_eq!(distortion(&e, 1).unwrap(), Distortion::Infinite);
    }

    #[test]
    fn single_candidate_distortion_is_one() {
        let e = parse_election("candidates a\n3: a").unwrap();
        assert_eq!(
            distortion(&e, 0).unwrap(),
            Distortion::Finite(integer(1))
        );
    }

    #[test]
    fn objective_is_homogeneous_in_the_normalization() {
        let e = ex_tie();
        let one = integer(1);
        let two = integer(2);
        let v1 = match pair_value(&e, 0, 1, &one) {
            PairValue::Bounded(v) => v,
            PairValue::Unbounded => panic!("bounded instance"),
        };
        let v2 = match pair_value(&e, 0, 1, &two) {
            PairValue::Bounded(v) => v,
            PairValue::Unbounded => panic!("bounded instance"),
        };
        assert_eq!(v2, &two * &v1);
    }

    #[test]
    fn size_limit_is_enforced() {
        let e = crate::election::random_election(5, 5, 3);
        assert!(matches!(
            distortion_with_limit(&e, 0, 24),
            Err(Error::SizeLimit(_))
        ));
        assert!(distortion_with_limit(&e, 0, 25).is_ok());
    }

    #[test]
    fn line_embedding_is_always_valid() {
        let e = parse_election("candidates a b c\n1: a > b > c\n1: c > b > a").unwrap();
        // Voters at 0 and 10; candidates at 1, 5, 9.
        let metric = VoterCandidateMetric::from_line_embedding(
            &[integer(0), integer(10)],
            &[integer(1), integer(5), integer(9)],
        );
        metric.validate(&e).unwrap();
        assert_eq!(cost(&e, &metric, 1), integer(10));
    }
}
