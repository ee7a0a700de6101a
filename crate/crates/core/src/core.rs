//! The `(p, q)`-veto core: membership via witnessing matchings, the
//! brute-force blocking oracle, and prefix-intersection testing.
//!
//! A coalition `T` blocks candidate `a` with witness `B` when every voter
//! in `T` ranks all of `B` above `a` and `p(T) > total - q(B)`. The core
//! (unblocked candidates) coincides with the dominant candidates, so
//! membership is decided in polynomial time by max-flow; the coalition
//! enumerator here exists as an independent oracle for that equivalence.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::election::{check_totals_match, Election, WeightDomain, WeightVector};
use crate::matching::{find_admitted_matching, neighborhood, Admission, Matching};
use crate::{Error, Result};

/// Coalition enumeration cap for [`find_blocking`]; the search is
/// exponential in the number of voters.
pub const MAX_BLOCKING_VOTERS: usize = 12;

/// A certificate that a coalition blocks a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingPair {
    coalition: BTreeSet<usize>,
    witness: BTreeSet<usize>,
    /// `p(T) - (total - q(B))`, strictly positive.
    margin: BigRational,
}

impl BlockingPair {
    /// Validates that `witness > blocked` for every coalition member and
    /// that the blocking inequality holds strictly.
    pub fn new(
        e: &Election,
        p: &WeightVector,
        q: &WeightVector,
        blocked: usize,
        coalition: BTreeSet<usize>,
        witness: BTreeSet<usize>,
    ) -> Result<Self> {
        if coalition.is_empty() {
            return Err(Error::InvalidWeights("empty blocking coalition".into()));
        }
        for &v in &coalition {
            for &b in &witness {
                if !e.prefers(v, b, blocked) {
                    return Err(Error::InvalidWeights(format!(
                        "voter {} does not rank `{}` above `{}`",
                        v + 1,
                        e.candidate_name(b),
                        e.candidate_name(blocked)
                    )));
                }
            }
        }
        let margin = p.sum_over(coalition.iter().copied())
            - (q.total() - q.sum_over(witness.iter().copied()));
        if !margin.is_positive() {
            return Err(Error::InvalidWeights(format!(
                "coalition does not block: margin {margin}"
            )));
        }
        Ok(BlockingPair {
            coalition,
            witness,
            margin,
        })
    }

    pub fn coalition(&self) -> &BTreeSet<usize> {
        &self.coalition
    }

    pub fn witness(&self) -> &BTreeSet<usize> {
        &self.witness
    }

    pub fn margin(&self) -> &BigRational {
        &self.margin
    }
}

/// Membership certificate for one candidate.
#[derive(Debug, Clone)]
pub enum CoreCertificate {
    /// In the core, witnessed by an admitted matching.
    Member(Matching),
    /// Blocked, witnessed by a coalition and candidate set.
    Blocked(BlockingPair),
}

/// The `(p, q)`-veto core: all candidates admitting some `(p, q)`-matching.
/// Never empty.
pub fn veto_core(e: &Election, p: &WeightVector, q: &WeightVector) -> Result<BTreeSet<usize>> {
    let mut core = BTreeSet::new();
    for a in 0..e.num_candidates() {
        if find_admitted_matching(e, a, p, q)?.is_admitted() {
            core.insert(a);
        }
    }
    assert!(!core.is_empty(), "the veto core is never empty");
    Ok(core)
}

/// Like [`veto_core`], but returns a certificate for every candidate: an
/// admitted matching for members, a blocking pair (derived from the Hall
/// violation) for non-members.
pub fn veto_core_certified(
    e: &Election,
    p: &WeightVector,
    q: &WeightVector,
) -> Result<BTreeMap<usize, CoreCertificate>> {
    let mut out = BTreeMap::new();
    for a in 0..e.num_candidates() {
        let cert = match find_admitted_matching(e, a, p, q)? {
            Admission::Matching(m) => CoreCertificate::Member(m),
            Admission::HallViolation { coalition } => {
                // The complement of the coalition's neighborhood is ranked
                // above `a` by the whole coalition and makes the largest
                // possible witness.
                let hood = neighborhood(e, a, coalition.iter().copied());
                let witness = (0..e.num_candidates())
                    .filter(|c| !hood.contains(c))
                    .collect();
                CoreCertificate::Blocked(BlockingPair::new(e, p, q, a, coalition, witness)?)
            }
        };
        out.insert(a, cert);
    }
    Ok(out)
}

/// Brute-force blocking oracle: enumerates every non-empty coalition `T`,
/// taking as witness the maximal `B = {c : c >_T a}` (enlarging `B` only
/// strengthens the inequality, so the maximal witness dominates).
///
/// Returns the first blocking pair in coalition-bitmask order, or `None`
/// when `a` is in the `(p, q)`-veto core. Intended for desk scale; errors
/// above [`MAX_BLOCKING_VOTERS`].
pub fn find_blocking(
    e: &Election,
    p: &WeightVector,
    q: &WeightVector,
    a: usize,
) -> Result<Option<BlockingPair>> {
    assert!(a < e.num_candidates(), "candidate index out of range");
    p.check_shape(e, WeightDomain::Voters)?;
    q.check_shape(e, WeightDomain::Candidates)?;
    check_totals_match(p, q)?;
    let n = e.num_voters();
    if n > MAX_BLOCKING_VOTERS {
        return Err(Error::SizeLimit(format!(
            "blocking oracle enumerates 2^n coalitions; n = {n} exceeds {MAX_BLOCKING_VOTERS}"
        )));
    }
    for mask in 1u64..(1 << n) {
        let coalition: BTreeSet<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let witness: BTreeSet<usize> = (0..e.num_candidates())
            .filter(|&c| coalition.iter().all(|&v| e.prefers(v, c, a)))
            .collect();
        let lhs = p.sum_over(coalition.iter().copied());
        let rhs = q.total() - q.sum_over(witness.iter().copied());
        if lhs > rhs {
            return Ok(Some(BlockingPair::new(e, p, q, a, coalition, witness)?));
        }
    }
    Ok(None)
}

/// Tests whether `set` is an intersection of per-voter top-`k` prefixes.
/// Returns the minimal indices when it is (`Some(k)` with
/// `set = ∩_v top-k_v(v)`), `None` otherwise.
///
/// The minimal candidate indices are forced: `k_v` must cover the
/// lowest-ranked member of `set` under `v` (0 for the empty set), and if
/// those fail no larger choice can succeed.
pub fn is_prefix_intersecting(e: &Election, set: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let indices: Vec<usize> = (0..e.num_voters())
        .map(|v| {
            set.iter()
                .map(|&c| e.rank_of(v, c) + 1)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let intersection: BTreeSet<usize> = (0..e.num_candidates())
        .filter(|&c| (0..e.num_voters()).all(|v| e.rank_of(v, c) < indices[v]))
        .collect();
    (intersection == *set).then_some(indices)
}

/// The classical proportional veto core, computed directly from the
/// ceiling-form definition: `T` blocks `c` with witness `B` when
/// `ceil(m * |T| / n) - 1 >= m - |B|`. Serves as an independent
/// cross-check of the uniform-weights specialization.
pub fn proportional_veto_core(e: &Election) -> Result<BTreeSet<usize>> {
    let n = e.num_voters();
    let m = e.num_candidates();
    if n > MAX_BLOCKING_VOTERS {
        return Err(Error::SizeLimit(format!(
            "proportional core oracle enumerates 2^n coalitions; n = {n} exceeds {MAX_BLOCKING_VOTERS}"
        )));
    }
    // The ceiling form of the blocking condition, kept verbatim so that
    // the uniform-weights equivalence is tested rather than assumed.
    #[allow(clippy::int_plus_one)]
    let blocked = |a: usize| -> bool {
        (1u64..(1 << n)).any(|mask| {
            let coalition: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
            let witness_size = (0..m)
                .filter(|&c| coalition.iter().all(|&v| e.prefers(v, c, a)))
                .count();
            let ceil_term = BigRational::new(
                BigInt::from(m * coalition.len()),
                BigInt::from(n),
            )
            .ceil()
            .to_integer();
            ceil_term - 1 >= BigInt::from(m - witness_size)
        })
    };
    Ok((0..m).filter(|&a| !blocked(a)).collect())
}
