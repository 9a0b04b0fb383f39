// Copyright 2026 The stvopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `stvopt` command-line tool.

use clap::{Args, Parser, Subcommand};
use log::info;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use stvopt::constraints::generate_constraints;
use stvopt::engine::run_election;
use stvopt::io::*;
use stvopt::model::{compute_quota, ElectionConfig, RespondentSet, WeightedBallotSet};
use stvopt::optimizer::{optimal_topk_strategy, optimal_win_strategy, selfish_win_strategy, Goal, GoalKind};
use stvopt::reducer::{remove_irrelevant, sequence_bounds};
use stvopt::robustness::{per_sample_optimal, strategy_efficacy, BootstrapConfig};
use stvopt::structure::{Sequence, Structure};
use stvopt::{Error, Result};

#[derive(Parser)]
#[command(name = "stvopt", version, about = "Exact STV tabulation and optimal vote-addition strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the ballots round by round.
    Tally {
        #[command(flatten)]
        common: Common,
    },
    /// Print the inequalities that define an outcome structure.
    Constraints {
        #[command(flatten)]
        common: Common,
        /// Candidate ids from first place to last, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
        /// Round labels, e.g. `LLW`.
        #[arg(long)]
        sequence: String,
    },
    /// Remove candidates that cannot matter under a budget.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_budget: Option<String>,
    },
    /// Cheapest additions that bring a candidate to a goal.
    Strategize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        subject: String,
        /// `topK` (e.g. `top1`, `top2`) or `win`.
        #[arg(long, default_value = "top1")]
        goal: String,
        /// Ballots (`40`) or percent of respondents (`5%`).
        #[arg(long)]
        max_budget: Option<String>,
        /// Only first-place ballots for the subject.
        #[arg(long)]
        selfish: bool,
    },
    /// Bootstrap robustness of strategies.
    Bootstrap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Ballots (`40`) or percent of respondents (`5%`) per sample.
        #[arg(long, visible_alias = "max-budget")]
        budget: Option<String>,
        #[arg(long, default_value = "top1")]
        goal: String,
        /// Also replay this candidate's full-data optimal plan on every sample.
        #[arg(long)]
        subject: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    ballots: PathBuf,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seats: Option<usize>,
    /// Fixed quota instead of the Droop quota.
    #[arg(long)]
    quota: Option<String>,
    /// Directory for JSON and CSV reports.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Print JSON instead of the text report.
    #[arg(long)]
    json: bool,
}

struct Loaded {
    respondents: RespondentSet,
    ballots: WeightedBallotSet,
    run: RunConfig,
    election: ElectionConfig,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let respondents = parse_ballots(&self.ballots).map_err(|e| match e {
            Error::Io(io) => Error::Data(format!("{}: {io}", self.ballots.display())),
            other => other,
        })?;
        let ballots = respondents.to_ballot_set()?;
        let mut run = match &self.config {
            Some(p) => RunConfig::load(p).map_err(|e| match e {
                Error::Io(io) => Error::Data(format!("{}: {io}", p.display())),
                other => other,
            })?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seats {
            run.seats = Some(s);
        }
        if let Some(q) = &self.quota {
            run.quota_override = Some(parse_weight(q).map_err(Error::Config)?);
        }
        let election = run.election_config(ballots.candidates())?;
        info!(
            "{} respondents, {} ballot types, {} candidates",
            respondents.len(),
            ballots.distinct_ballots(),
            ballots.num_candidates()
        );
        Ok(Loaded {
            respondents,
            ballots,
            run,
            election,
        })
    }

    fn emit<T: serde::Serialize>(&self, text: String, report: &T, files: &[(&str, String)]) -> Result<()> {
        let json = serde_json::to_string_pretty(report)?;
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir)?;
            write_file(dir, "report.json", &(json.clone() + "\n"))?;
            write_file(dir, "report.txt", &text)?;
            for (name, body) in files {
                write_file(dir, name, body)?;
            }
        }
        if self.json {
            println!("{json}");
        } else {
            print!("{text}");
        }
        Ok(())
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn budget(flag: &Option<String>, run: &RunConfig, respondents: usize) -> Result<u64> {
    let b = match flag {
        Some(text) => Budget::parse(text)?,
        None => run
            .budget
            .clone()
            .ok_or_else(|| Error::Config("no budget given (--max-budget or config `budget`)".into()))?,
    };
    Ok(b.resolve(respondents))
}

fn parse_goal(text: &str) -> Result<GoalKind> {
    let t = text.trim().to_ascii_lowercase();
    if t == "win" {
        return Ok(GoalKind::Win);
    }
    t.strip_prefix("top")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .map(GoalKind::TopK)
        .ok_or_else(|| Error::Config(format!("goal {text:?} is not `win` or `topK`")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Tally { common } => {
            let l = common.load()?;
            let outcome = run_election(&l.ballots, &l.election)?;
            let report = TallyReport::new(&l.ballots, &l.election, &outcome);
            common.emit(report.render(), &report, &[])
        }
        Command::Constraints {
            common,
            order,
            sequence,
        } => {
            let l = common.load()?;
            let order = order
                .iter()
                .map(|id| l.ballots.require_index(id))
                .collect::<Result<Vec<_>>>()?;
            let structure = Structure::new(order, Sequence::parse(&sequence)?)?;
            let quota = compute_quota(&l.ballots, &l.election)?;
            let set = generate_constraints(&structure, &quota);
            let report = ConstraintReport::new(&l.ballots, &l.election, &set);
            let mut text = set.render(&l.ballots);
            text.push_str(&format!(
                "{} terms; {}\n",
                report.terms,
                if report.satisfied { "satisfied by these ballots" } else { "not satisfied by these ballots" }
            ));
            common.emit(text, &report, &[])
        }
        Command::Reduce { common, max_budget } => {
            let l = common.load()?;
            let b = budget(&max_budget, &l.run, l.respondents.len())?;
            let report = remove_irrelevant(&l.ballots, b, &l.election)?;
            let bounds = sequence_bounds(&l.ballots, b, &l.election)?;
            let summary = ReductionSummary::new(&l.ballots, &report, bounds);
            common.emit(summary.render(), &summary, &[])
        }
        Command::Strategize {
            common,
            subject,
            goal,
            max_budget,
            selfish,
        } => {
            let l = common.load()?;
            let b = budget(&max_budget, &l.run, l.respondents.len())?;
            let s = l.ballots.require_index(&subject)?;
            let kind = parse_goal(&goal)?;
            let found = match (selfish, kind) {
                (true, GoalKind::Win | GoalKind::TopK(1)) => selfish_win_strategy(&l.ballots, s, b, &l.election)?,
                (true, _) => return Err(Error::Config("--selfish supports only win/top1".into())),
                (false, GoalKind::Win) => optimal_win_strategy(&l.ballots, s, b, &l.election)?,
                (false, kind) => optimal_topk_strategy(
                    &l.ballots,
                    &Goal {
                        subject: s,
                        kind,
                        max_budget: b,
                    },
                    &l.election,
                )?,
            };
            let report = StrategyReport::new(&l.ballots, &goal, &found);
            common.emit(report.render(), &report, &[])
        }
        Command::Bootstrap {
            common,
            samples,
            seed,
            budget: budget_flag,
            goal,
            subject,
        } => {
            let l = common.load()?;
            let b = budget(&budget_flag, &l.run, l.respondents.len())?;
            let kind = parse_goal(&goal)?;
            let config = BootstrapConfig::new(
                samples.or(l.run.samples).unwrap_or(100),
                seed.or(l.run.seed).unwrap_or(0),
                b,
                kind,
            )?;
            let report = per_sample_optimal(&l.respondents, &l.election, &config)?;
            let mut files = vec![
                ("baseline.csv", efficacy_csv(&report.baseline)?),
                ("feasibility.csv", feasibility_csv(&report.distribution)?),
                ("distribution.csv", distribution_csv(&report.distribution)?),
                ("reduction.csv", reduction_csv(&report.reduction)?),
            ];
            let mut plan_table = None;
            if let Some(id) = &subject {
                let s = l.ballots.require_index(id)?;
                let goal = Goal {
                    subject: s,
                    kind,
                    max_budget: b,
                };
                let found = optimal_topk_strategy(&l.ballots, &goal, &l.election)?;
                let table = strategy_efficacy(&found.plan, &l.respondents, &l.election, &config)?;
                files.push(("plan_efficacy.csv", efficacy_csv(&table)?));
                plan_table = Some((plan_rows(&l.ballots, &found.plan), table));
            }
            let text = render_bootstrap(&config, &report, plan_table.as_ref());
            let json = serde_json::json!({
                "samples": config.samples,
                "seed": config.seed,
                "budget": config.budget,
                "goal": goal,
                "report": report,
                "plan": plan_table.as_ref().map(|(rows, t)| serde_json::json!({"ballots": rows, "efficacy": t})),
            });
            common.emit(text, &json, &files)
        }
    }
}

fn render_bootstrap(
    config: &BootstrapConfig,
    report: &stvopt::robustness::BootstrapReport,
    plan: Option<&(Vec<PlanRow>, stvopt::robustness::EfficacyTable)>,
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} samples, seed {}, budget {}, goal positions {}",
        config.samples,
        config.seed,
        config.budget,
        config.positions()
    );
    let _ = writeln!(
        out,
        "removal: mean {:.2} candidates",
        report.reduction.removed.iter().sum::<usize>() as f64 / report.reduction.removed.len().max(1) as f64
    );
    let dist = &report.distribution;
    let _ = writeln!(out, "candidate  in-goal  needed  feasible  unresolved  avg-cost  signatures");
    for (c, id) in dist.candidates.iter().enumerate() {
        let row = &dist.per_candidate[c];
        let sigs: Vec<String> = row
            .percentages()
            .iter()
            .map(|(s, p)| format!("{s} {p:.1}%"))
            .collect();
        let line = format!(
            "{id:<10} {:>7.3} {:>7} {:>9} {:>11} {:>9} {}",
            report.baseline.frequency(c),
            row.needed,
            row.feasible,
            row.unresolved,
            row.average_cost().map_or("-".to_string(), |x| format!("{x:.2}")),
            sigs.join(", ")
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    if let Some((rows, table)) = plan {
        let ballots: Vec<String> = rows.iter().map(|r| format!("{} x [{}]", r.count, r.ballot.join(","))).collect();
        let _ = writeln!(out, "full-data plan: {}", if ballots.is_empty() { "none".into() } else { ballots.join(" + ") });
        for (c, id) in table.candidates.iter().enumerate() {
            let _ = writeln!(out, "  {id:<10} {:.3}", table.frequency(c));
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Infeasible { .. }) => {
            eprintln!("infeasible: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
