//! Weight specifications for the `--p` and `--q` flags.

use std::path::PathBuf;

use anyhow::{bail, Context};
use num_rational::BigRational;
use num_traits::Zero;

use veto_core::election::{Election, WeightDomain, WeightVector};
use veto_core::ratio;

/// How to derive a weight vector for an election.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    Plurality,
    Uniform,
    KApproval(usize),
    /// JSON file mapping candidate names (for `q`) or 1-based voter ids
    /// (for `p`) to rationals; missing entries default to zero.
    Explicit(PathBuf),
}

impl WeightSpec {
    pub fn parse(raw: &str) -> anyhow::Result<Self> {
        if raw == "plurality" {
            return Ok(WeightSpec::Plurality);
        }
        if raw == "uniform" {
            return Ok(WeightSpec::Uniform);
        }
        if let Some(k) = raw.strip_prefix("k-approval:") {
            let k = k
                .parse()
                .with_context(|| format!("invalid k in weight spec `{raw}`"))?;
            return Ok(WeightSpec::KApproval(k));
        }
        if let Some(path) = raw.strip_prefix("explicit:") {
            return Ok(WeightSpec::Explicit(PathBuf::from(path)));
        }
        bail!(
            "invalid weight spec `{raw}`; expected plurality, uniform, \
             k-approval:<k>, or explicit:<file>"
        )
    }
}

fn read_explicit(path: &PathBuf) -> anyhow::Result<serde_json::Map<String, serde_json::Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read weight file `{}`", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).context("weight file is not valid JSON")?;
    match value {
        serde_json::Value::Object(map) => Ok(map),
        _ => bail!("weight file must be a JSON object"),
    }
}

fn rational_entry(value: &serde_json::Value) -> anyhow::Result<BigRational> {
    let raw = value
        .as_str()
        .context("weights must be strings like \"2/3\"")?;
    Ok(ratio::parse(raw)?)
}

/// Candidate weights. Natural totals: plurality and uniform sum to the
/// number of voters, k-approval to `k` times that.
pub fn build_q(e: &Election, spec: &WeightSpec) -> anyhow::Result<WeightVector> {
    match spec {
        WeightSpec::Plurality => Ok(WeightVector::plurality(e)),
        WeightSpec::KApproval(k) => Ok(WeightVector::k_approval(e, *k)?),
        WeightSpec::Uniform => {
            let total = ratio::integer(e.num_voters() as i64);
            Ok(WeightVector::uniform(
                WeightDomain::Candidates,
                e.num_candidates(),
                total,
            )?)
        }
        WeightSpec::Explicit(path) => {
            let map = read_explicit(path)?;
            for key in map.keys() {
                if e.candidate_index(key).is_none() {
                    bail!("weight file names unknown candidate `{key}`");
                }
            }
            let weights = e
                .candidate_names()
                .iter()
                .map(|name| match map.get(name) {
                    Some(v) => rational_entry(v),
                    None => Ok(BigRational::zero()),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(WeightVector::new(WeightDomain::Candidates, weights)?)
        }
    }
}

/// Voter weights. `uniform` spreads the candidate total evenly so the
/// marginals always match; explicit weights must match it exactly.
pub fn build_p(
    e: &Election,
    spec: &WeightSpec,
    q_total: &BigRational,
) -> anyhow::Result<WeightVector> {
    match spec {
        WeightSpec::Uniform => Ok(WeightVector::uniform(
            WeightDomain::Voters,
            e.num_voters(),
            q_total.clone(),
        )?),
        WeightSpec::Explicit(path) => {
            let map = read_explicit(path)?;
            for key in map.keys() {
                let id: usize = key
                    .parse()
                    .with_context(|| format!("voter key `{key}` is not a 1-based id"))?;
                if id < 1 || id > e.num_voters() {
                    bail!("voter id {id} out of range 1..={}", e.num_voters());
                }
            }
            let weights = (1..=e.num_voters())
                .map(|id| match map.get(&id.to_string()) {
                    Some(v) => rational_entry(v),
                    None => Ok(BigRational::zero()),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let p = WeightVector::new(WeightDomain::Voters, weights)?;
            if p.total() != q_total {
                bail!(
                    "voter weights sum to {}, candidate weights to {}",
                    ratio::to_string(p.total()),
                    ratio::to_string(q_total)
                );
            }
            Ok(p)
        }
        WeightSpec::Plurality | WeightSpec::KApproval(_) => {
            bail!("plurality/k-approval weights apply to candidates, not voters")
        }
    }
}

/// Scales a rational weight vector to integers by the LCM of its
/// denominators (identity on integral vectors).
pub fn integralize(w: WeightVector) -> WeightVector {
    if w.is_integral() {
        return w;
    }
    let scale = BigRational::from_integer(ratio::lcm_of_denominators(w.weights().iter()));
    WeightVector::new(
        w.domain(),
        w.weights().iter().map(|x| x * &scale).collect(),
    )
    .expect("scaling preserves validity")
}
