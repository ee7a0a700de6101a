//! `veto` — tabulate ranked ballots under generalized veto-core rules.
//!
//! All output is JSON (one document per invocation; JSON lines for
//! `axioms`). Exit codes: 0 success, 1 axiom failure or regression,
//! 2 usage or input error.

mod output;
mod weights;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use veto_core::axioms::{self, Axiom};
use veto_core::core::veto_core_certified;
use veto_core::distortion::{distortion_with_limit, DEFAULT_MAX_LP_CELLS};
use veto_core::election::{parse_election, random_election, Election, WeightVector};
use veto_core::matching::Matching;
use veto_core::ratio;
use veto_core::rules::{serial_veto, simultaneous_veto, veto_order_for_matching, VetoOrder};

use crate::output::{core_json, print_json, rule_outcome_json};
use crate::weights::{build_p, build_q, integralize, WeightSpec};

#[derive(Parser)]
#[command(
    name = "veto",
    about = "Winner computation for generalized veto-core voting rules",
    version
)]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a ballot file with SimultaneousVeto.
    Winners {
        file: PathBuf,
        /// Voter weights: uniform | explicit:<file>.
        #[arg(long, default_value = "uniform")]
        p: String,
        /// Candidate weights: plurality | uniform | k-approval:<k> |
        /// explicit:<file>.
        #[arg(long, default_value = "plurality")]
        q: String,
        /// Omit the elimination trace from the output.
        #[arg(long)]
        no_trace: bool,
    },
    /// Tabulate a ballot file with SerialVeto under an explicit veto order.
    Serial {
        file: PathBuf,
        /// Comma-separated 1-based voter ids, e.g. `1,2,2,3`.
        #[arg(long)]
        order: String,
        #[arg(long, default_value = "plurality")]
        q: String,
    },
    /// Compute the (p, q)-veto core with per-candidate certificates.
    Core {
        file: PathBuf,
        #[arg(long, default_value = "uniform")]
        p: String,
        #[arg(long, default_value = "plurality")]
        q: String,
    },
    /// Exact LP metric distortion of candidates.
    Distortion {
        file: PathBuf,
        /// Candidate name; may repeat. Defaults to all candidates.
        #[arg(long)]
        candidate: Vec<String>,
    },
    /// Sweep axiom checkers over seeded random elections.
    Axioms {
        /// Maximum number of voters per trial.
        #[arg(long)]
        n: usize,
        /// Maximum number of candidates per trial.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Axiom name; may repeat. Defaults to all checks plus the
        /// documented violation reproductions.
        #[arg(long)]
        axiom: Vec<String>,
    },
    /// Synthesize a veto order realizing a matching, then run SerialVeto.
    OrderForMatching {
        file: PathBuf,
        /// Path to a matching JSON document.
        #[arg(long)]
        matching: PathBuf,
    },
    /// Monte-Carlo experiments.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Distribution of veto-core sizes under Impartial Culture.
    CoreSize {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        q: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn load_election(path: &PathBuf) -> anyhow::Result<Election> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read ballot file `{}`", path.display()))?;
    parse_election(&text).with_context(|| format!("in ballot file `{}`", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let pretty = cli.pretty;
    match cli.command {
        Command::Winners {
            file,
            p,
            q,
            no_trace,
        } => {
            let e = load_election(&file)?;
            let q = build_q(&e, &WeightSpec::parse(&q)?)?;
            let p = build_p(&e, &WeightSpec::parse(&p)?, q.total())?;
            let out = simultaneous_veto(&e, &p, &q)?;
            let value = rule_outcome_json(&e, "simultaneous-veto", &out, !no_trace);
            print_json(&value, pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Serial { file, order, q } => {
            let e = load_election(&file)?;
            let q = integralize(build_q(&e, &WeightSpec::parse(&q)?)?);
            let order = parse_order(&e, &order)?;
            let out = serial_veto(&e, &q, &order)?;
            let value = rule_outcome_json(&e, "serial-veto", &out, false);
            print_json(&value, pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Core { file, p, q } => {
            let e = load_election(&file)?;
            let q = build_q(&e, &WeightSpec::parse(&q)?)?;
            let p = build_p(&e, &WeightSpec::parse(&p)?, q.total())?;
            let certificates = veto_core_certified(&e, &p, &q)?;
            print_json(&core_json(&e, &certificates), pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Distortion { file, candidate } => {
            let e = load_election(&file)?;
            let limit = lp_cell_limit()?;
            let indices: Vec<usize> = if candidate.is_empty() {
                (0..e.num_candidates()).collect()
            } else {
                candidate
                    .iter()
                    .map(|name| e.require_candidate(name))
                    .collect::<veto_core::Result<_>>()?
            };
            let mut doc = serde_json::Map::new();
            for c in indices {
                let d = distortion_with_limit(&e, c, limit)?;
                doc.insert(e.candidate_name(c).to_string(), json!(d.to_string()));
            }
            print_json(&doc.into(), pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Axioms {
            n,
            m,
            trials,
            seed,
            axiom,
        } => run_axioms(n, m, trials, seed, &axiom),
        Command::OrderForMatching { file, matching } => {
            let e = load_election(&file)?;
            let text = std::fs::read_to_string(&matching)
                .with_context(|| format!("cannot read matching `{}`", matching.display()))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).context("matching file is not valid JSON")?;
            let matching = Matching::from_json(&e, &value)?;
            let p = WeightVector::new(
                veto_core::election::WeightDomain::Voters,
                matching.row_marginals().to_vec(),
            )?;
            let q = WeightVector::new(
                veto_core::election::WeightDomain::Candidates,
                matching.col_marginals().to_vec(),
            )?;
            let order = veto_order_for_matching(&e, &p, &q, &matching)?;
            let out = serial_veto(&e, &q, &order)?;
            let ids: Vec<usize> = order.sequence().iter().map(|&v| v + 1).collect();
            let winners: Vec<&str> = out
                .winners
                .winners
                .iter()
                .map(|&c| e.candidate_name(c))
                .collect();
            print_json(&json!({ "order": ids, "winners": winners }), pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { experiment } => match experiment {
            Experiment::CoreSize {
                m,
                n,
                trials,
                seed,
                q,
            } => {
                if trials == 0 {
                    bail!("need at least one trial");
                }
                let spec = WeightSpec::parse(&q)?;
                let value = simulate_core_size(m, n, trials, seed, &spec)?;
                print_json(&value, pretty);
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

/// LP size cap: `VETO_MAX_LP_SIZE` overrides the default.
fn lp_cell_limit() -> anyhow::Result<usize> {
    match std::env::var("VETO_MAX_LP_SIZE") {
        Ok(raw) => raw
            .parse()
            .with_context(|| format!("VETO_MAX_LP_SIZE=`{raw}` is not a number")),
        Err(_) => Ok(DEFAULT_MAX_LP_CELLS),
    }
}

fn parse_order(e: &Election, raw: &str) -> anyhow::Result<VetoOrder> {
    let mut sequence = Vec::new();
    for part in raw.split(',') {
        let id: usize = part
            .trim()
            .parse()
            .with_context(|| format!("invalid voter id `{part}` in --order"))?;
        if id < 1 || id > e.num_voters() {
            bail!("voter id {id} out of range 1..={}", e.num_voters());
        }
        sequence.push(id - 1);
    }
    Ok(VetoOrder::new(sequence))
}

fn run_axioms(
    max_n: usize,
    max_m: usize,
    trials: usize,
    seed: u64,
    requested: &[String],
) -> anyhow::Result<ExitCode> {
    if max_n == 0 || max_m == 0 {
        bail!("--n and --m must be at least 1");
    }
    let mut run_violations = requested.is_empty();
    let mut sweep_axioms: Vec<Axiom> = Vec::new();
    if requested.is_empty() {
        sweep_axioms.extend(Axiom::ALL);
    } else {
        for name in requested {
            if name == "violations" {
                run_violations = true;
            } else if let Some(axiom) = Axiom::from_name(name) {
                sweep_axioms.push(axiom);
            } else {
                bail!(
                    "unknown axiom `{name}`; expected one of {} or `violations`",
                    Axiom::ALL.map(|a| a.name()).join(", ")
                );
            }
        }
    }

    let mut all_passed = true;
    for axiom in sweep_axioms {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = None;
        for _ in 0..trials {
            let n = rng.gen_range(1..=max_n);
            let m = rng.gen_range(1..=max_m);
            let e = random_election(m, n, rng.gen());
            let r = axioms::check(axiom, &e, rng.gen())?;
            if !r.passed() {
                report = Some(r);
                break;
            }
        }
        let report = report.unwrap_or(axioms::AxiomReport {
            axiom: axiom.name().to_string(),
            verdict: axioms::Verdict::Pass,
            counterexample: None,
        });
        all_passed &= report.passed();
        println!("{}", serde_json::to_string(&report)?);
    }

    if run_violations {
        // A regression in the stored violations panics; surface it as
        // exit code 1 instead of a crash.
        match std::panic::catch_unwind(axioms::demonstrate_violations) {
            Ok(Ok(reports)) => {
                for report in reports {
                    println!("{}", serde_json::to_string(&report)?);
                }
            }
            Ok(Err(err)) => return Err(err.into()),
            Err(_) => {
                eprintln!("error: violation reproduction regressed");
                return Ok(ExitCode::from(1));
            }
        }
    }

    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn simulate_core_size(
    m: usize,
    n: usize,
    trials: usize,
    seed: u64,
    q_spec: &WeightSpec,
) -> anyhow::Result<serde_json::Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = Vec::with_capacity(trials);
    for _ in 0..trials {
        let e = random_election(m, n, rng.gen());
        let q = build_q(&e, q_spec)?;
        let p = build_p(&e, &WeightSpec::Uniform, q.total())?;
        sizes.push(veto_core::core::veto_core(&e, &p, &q)?.len());
    }

    let total: usize = sizes.iter().sum();
    let mean = BigRational::new(total.into(), trials.into());
    let variance: BigRational = sizes
        .iter()
        .map(|&s| {
            let diff = ratio::integer(s as i64) - &mean;
            &diff * &diff
        })
        .sum::<BigRational>()
        / ratio::integer(trials as i64);
    let mut histogram = serde_json::Map::new();
    for size in 1..=m {
        let count = sizes.iter().filter(|&&s| s == size).count();
        if count > 0 {
            histogram.insert(size.to_string(), json!(count));
        }
    }
    Ok(json!({
        "experiment": "core-size",
        "m": m,
        "n": n,
        "trials": trials,
        "seed": seed,
        "mean": ratio::to_string(&mean),
        "mean_approx": mean.to_f64(),
        "stddev_approx": variance.to_f64().map(f64::sqrt),
        "histogram": histogram,
    }))
}
