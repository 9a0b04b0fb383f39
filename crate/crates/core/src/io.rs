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

//! Ballot files, run configuration and report formats.
//!
//! Ballot CSV layout: a header `respondent_id,weight,rank1,...,rankR`, then
//! one respondent per row. An empty id is replaced by `row<line>`, an empty
//! weight means 1, and the ranking ends at the first blank cell. Weights
//! are decimals (`0.75`) or fractions (`2/3`) and are kept exact.

use crate::allocator::StrategyPlan;
use crate::constraints::{ConstraintSet, Relation};
use crate::engine::{ElectionOutcome, RoundKind};
use crate::error::{Error, Result};
use crate::model::{
    Candidate, CandidateIdx, ElectionConfig, RankedBallot, Respondent, RespondentSet, Weight,
    WeightedBallotSet,
};
use crate::optimizer::{Category, ClassifiedStrategy, Method};
use crate::reducer::{ReductionReport, SequenceBounds};
use crate::robustness::{EfficacyTable, ReductionStats, StrategyDistribution};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Serializes an exact weight in the form [`format_weight`] produces.
pub fn ser_weight<S: Serializer>(w: &Weight, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_weight(w))
}

/// Parses `12`, `-0.5`, `3.125` or `7/3` into an exact rational.
pub fn parse_weight(text: &str) -> std::result::Result<Weight, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {t:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {t:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {t:?}"));
        }
        return Ok(Weight::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !digits_ok(whole) || !digits_ok(frac) {
        return Err(format!("not a number: {t:?}"));
    }
    let numer: BigInt = format!("0{whole}{frac}").parse().expect("digits only");
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Weight::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Integer or terminating decimal when exact, otherwise `num/den`.
pub fn format_weight(w: &Weight) -> String {
    if w.is_integer() {
        return w.numer().to_string();
    }
    let mut d = w.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return w.to_string();
    }
    let places = twos.max(fives);
    let scaled = w * Weight::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if w.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// An exact value from [`format_weight`], followed by a rounded decimal
/// when it is a non-terminating fraction.
pub fn readable(exact: &str) -> String {
    match exact.contains('/').then(|| parse_weight(exact)) {
        Some(Ok(w)) => format!("{:.3} ({exact})", weight_to_f64(&w)),
        _ => exact.to_string(),
    }
}

/// Nearest `f64`, for display only.
pub fn weight_to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses ballot CSV text. Candidates are numbered in order of first
/// appearance.
pub fn parse_ballots_str(text: &str) -> Result<RespondentSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "empty ballot file")),
    };
    let columns: Vec<&str> = header.iter().collect();
    let expected_ok = columns.len() >= 3
        && columns[0] == "respondent_id"
        && columns[1] == "weight"
        && columns[2..]
            .iter()
            .enumerate()
            .all(|(i, c)| *c == format!("rank{}", i + 1));
    if !expected_ok {
        return Err(parse_err(1, "header must be respondent_id,weight,rank1,...,rankR"));
    }
    let max_rank = columns.len() - 2;

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut respondents = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() > max_rank + 2 {
            return Err(parse_err(line, format!("{} fields, header has {}", record.len(), max_rank + 2)));
        }
        let id = match record.get(0).unwrap_or("") {
            "" => format!("row{line}"),
            s => s.to_string(),
        };
        let weight = match record.get(1).unwrap_or("") {
            "" => Weight::one(),
            s => parse_weight(s).map_err(|m| parse_err(line, m))?,
        };
        if weight.is_negative() {
            return Err(parse_err(line, "negative weight"));
        }
        let mut ranking: Vec<usize> = Vec::new();
        let mut ended = false;
        for cell in record.iter().skip(2) {
            if cell.is_empty() {
                ended = true;
                continue;
            }
            if ended {
                return Err(parse_err(line, format!("candidate {cell:?} after a blank rank")));
            }
            let next = candidates.len();
            let c = *index.entry(cell.to_string()).or_insert(next);
            if c == next {
                candidates.push(Candidate::new(cell));
            }
            if ranking.contains(&c) {
                return Err(parse_err(line, format!("candidate {cell:?} ranked twice")));
            }
            ranking.push(c);
        }
        respondents.push(Respondent {
            id,
            weight,
            ballot: RankedBallot(ranking),
        });
    }
    if respondents.is_empty() {
        return Err(parse_err(1, "no ballot rows"));
    }
    if candidates.is_empty() {
        return Err(parse_err(1, "no candidate is ranked"));
    }
    Ok(RespondentSet {
        candidates,
        respondents,
    })
}

pub fn parse_ballots(path: &Path) -> Result<RespondentSet> {
    parse_ballots_str(&std::fs::read_to_string(path)?)
}

/// Writes respondents in the ballot CSV layout, with as many rank columns
/// as the longest ranking (at least one).
pub fn emit_ballots(set: &RespondentSet) -> Result<String> {
    let width = set
        .respondents
        .iter()
        .map(|r| r.ballot.len())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let mut header = vec!["respondent_id".to_string(), "weight".to_string()];
    header.extend((1..=width).map(|i| format!("rank{i}")));
    write_row(&mut writer, &header)?;
    for r in &set.respondents {
        let mut row = vec![r.id.clone(), format_weight(&r.weight)];
        row.extend(r.ballot.ranking().iter().map(|&c| set.candidates[c].id.clone()));
        row.resize(width + 2, String::new());
        write_row(&mut writer, &row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

fn write_row(writer: &mut csv::Writer<Vec<u8>>, row: &[String]) -> Result<()> {
    writer.write_record(row).map_err(|e| Error::Data(e.to_string()))
}

/// An addition budget as ballots or as a percentage of respondents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Budget {
    Votes(u64),
    Percent(Weight),
}

impl Budget {
    pub fn parse(text: &str) -> Result<Budget> {
        let t = text.trim();
        if let Some(p) = t.strip_suffix('%') {
            let value = parse_weight(p).map_err(Error::Config)?;
            if value.is_negative() {
                return Err(Error::Config(format!("negative budget {t:?}")));
            }
            return Ok(Budget::Percent(value));
        }
        t.parse()
            .map(Budget::Votes)
            .map_err(|_| Error::Config(format!("budget {t:?} is neither a count nor a percentage")))
    }

    /// Ballots allowed for `respondents` records: `ceil(percent / 100 *
    /// respondents)` for percentages.
    pub fn resolve(&self, respondents: usize) -> u64 {
        match self {
            Budget::Votes(v) => *v,
            Budget::Percent(p) => {
                let votes = p * Weight::from_integer(BigInt::from(respondents)) / Weight::from_integer(BigInt::from(100));
                votes.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
            }
        }
    }
}

/// Settings read from a `key = value` file. `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub seats: Option<usize>,
    pub tie_break: Option<Vec<String>>,
    pub quota_override: Option<Weight>,
    pub budget: Option<Budget>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| parse_err(line, format!("{key}: {what} {value:?}"));
            match key {
                "seats" => cfg.seats = Some(value.parse().map_err(|_| bad("not a count"))?),
                "tie_break" => {
                    cfg.tie_break = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect(),
                    )
                }
                "quota_override" => cfg.quota_override = Some(parse_weight(value).map_err(|m| parse_err(line, m))?),
                "budget" => cfg.budget = Some(Budget::parse(value).map_err(|_| bad("not a budget"))?),
                "samples" => cfg.samples = Some(value.parse().map_err(|_| bad("not a count"))?),
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("not a 64-bit seed"))?),
                other => return Err(parse_err(line, format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Election settings for `candidates`; seats default to 1.
    pub fn election_config(&self, candidates: &[Candidate]) -> Result<ElectionConfig> {
        let n = candidates.len();
        let mut config = ElectionConfig::new(self.seats.unwrap_or(1), n);
        if let Some(order) = &self.tie_break {
            let mut idx = Vec::with_capacity(order.len());
            for id in order {
                let c = candidates
                    .iter()
                    .position(|x| &x.id == id)
                    .ok_or_else(|| Error::UnknownCandidate(id.clone()))?;
                idx.push(c);
            }
            if let Some(missing) = candidates.iter().enumerate().find(|(i, _)| !idx.contains(i)) {
                return Err(Error::Config(format!("tie_break does not list {}", missing.1.id)));
            }
            config = config.with_tie_break(idx);
        }
        if let Some(q) = &self.quota_override {
            config = config.with_quota(q.clone());
        }
        config.validate(n)?;
        Ok(config)
    }
}

/// A value attached to a candidate, for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateValue {
    pub candidate: String,
    pub value: String,
}

fn values<'a>(
    ballots: &WeightedBallotSet,
    entries: impl IntoIterator<Item = (&'a CandidateIdx, &'a Weight)>,
) -> Vec<CandidateValue> {
    entries
        .into_iter()
        .map(|(c, w)| CandidateValue {
            candidate: ballots.candidate_id(*c).to_string(),
            value: format_weight(w),
        })
        .collect()
}

fn ids(ballots: &WeightedBallotSet, cs: &[CandidateIdx]) -> Vec<String> {
    cs.iter().map(|&c| ballots.candidate_id(c).to_string()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub candidate: String,
    pub kind: RoundKind,
    pub position: usize,
    pub tallies: Vec<CandidateValue>,
    pub surplus_fraction: Option<String>,
    pub margin: String,
    pub transfers: Vec<CandidateValue>,
    pub exhausted: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TallyReport {
    pub candidates: Vec<String>,
    pub seats: usize,
    pub quota: String,
    pub total: String,
    pub order: Vec<String>,
    pub sequence: String,
    pub winners: Vec<String>,
    pub rounds: Vec<RoundReport>,
}

impl TallyReport {
    pub fn new(ballots: &WeightedBallotSet, config: &ElectionConfig, outcome: &ElectionOutcome) -> Self {
        let rounds = outcome
            .rounds
            .iter()
            .map(|r| RoundReport {
                round: r.round_index,
                candidate: ballots.candidate_id(r.resolved).to_string(),
                kind: r.kind,
                position: r.position,
                tallies: values(ballots, &r.tallies_before),
                surplus_fraction: r.surplus_fraction.as_ref().map(format_weight),
                margin: format_weight(&r.margin),
                transfers: values(ballots, &r.transfers),
                exhausted: format_weight(&r.exhausted),
            })
            .collect();
        TallyReport {
            candidates: ids(ballots, &(0..ballots.num_candidates()).collect::<Vec<_>>()),
            seats: config.seats,
            quota: format_weight(outcome.quota.value()),
            total: format_weight(&outcome.total),
            order: ids(ballots, &outcome.order),
            sequence: outcome.sequence.to_string(),
            winners: ids(ballots, &outcome.winners),
            rounds,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} seat(s), total {}, quota {}",
            self.seats, self.total, self.quota
        );
        for r in &self.rounds {
            let tallies: Vec<String> = r.tallies.iter().map(|v| format!("{} {}", v.candidate, readable(&v.value))).collect();
            let _ = writeln!(out, "round {}: {}", r.round, tallies.join(", "));
            let what = match r.kind {
                RoundKind::QuotaWin => "wins",
                RoundKind::Elimination => "is eliminated",
                RoundKind::FinalPlacement => "takes the remaining place",
            };
            let _ = writeln!(out, "  {} {what} (margin {})", r.candidate, readable(&r.margin));
            if let Some(f) = &r.surplus_fraction {
                let _ = writeln!(out, "  surplus fraction {f}");
            }
            if !r.transfers.is_empty() {
                let moved: Vec<String> = r.transfers.iter().map(|v| format!("{} +{}", v.candidate, readable(&v.value))).collect();
                let _ = writeln!(out, "  transfers {}, exhausted {}", moved.join(", "), readable(&r.exhausted));
            }
        }
        let _ = writeln!(out, "order {}", self.order.join(" > "));
        let _ = writeln!(out, "sequence {}", self.sequence);
        let _ = writeln!(out, "winners {}", self.winners.join(", "));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundConstraintReport {
    pub round: usize,
    pub candidate: String,
    pub label: String,
    pub tallies: Vec<CandidateValue>,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintReport {
    pub order: Vec<String>,
    pub sequence: String,
    pub quota: String,
    pub terms: usize,
    pub satisfied: bool,
    pub rounds: Vec<RoundConstraintReport>,
}

impl ConstraintReport {
    pub fn new(ballots: &WeightedBallotSet, config: &ElectionConfig, set: &ConstraintSet) -> Self {
        let id = |c: CandidateIdx| ballots.candidate_id(c).to_string();
        let rounds = set
            .rounds
            .iter()
            .map(|r| RoundConstraintReport {
                round: r.round,
                candidate: id(r.candidate),
                label: r.label.to_string(),
                tallies: r
                    .tallies
                    .iter()
                    .map(|(c, e)| CandidateValue {
                        candidate: id(*c),
                        value: e.render(ballots),
                    })
                    .collect(),
                relations: r
                    .relations
                    .iter()
                    .map(|rel| match *rel {
                        Relation::BelowQuota(c) => format!("{} < Q", id(c)),
                        Relation::ReachesQuota(c) => format!("{} >= Q", id(c)),
                        Relation::Beats { winner, loser } => format!("{} beats {}", id(winner), id(loser)),
                    })
                    .collect(),
            })
            .collect();
        ConstraintReport {
            order: ids(ballots, &set.structure.order),
            sequence: set.structure.sequence.to_string(),
            quota: format_weight(set.quota.value()),
            terms: set.term_count(),
            satisfied: set.evaluate(ballots, config),
            rounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RemovedGroupReport {
    pub candidates: Vec<String>,
    pub margin: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionSummary {
    pub budget: u64,
    pub quota: String,
    pub pre_resolved: Vec<String>,
    pub removed: Vec<RemovedGroupReport>,
    pub survivors: Vec<String>,
    pub bounds: SequenceBounds,
}

impl ReductionSummary {
    pub fn new(ballots: &WeightedBallotSet, report: &ReductionReport, bounds: SequenceBounds) -> Self {
        ReductionSummary {
            budget: report.budget,
            quota: format_weight(report.quota.value()),
            pre_resolved: ids(ballots, &report.pre_resolved),
            removed: report
                .removed
                .iter()
                .map(|g| RemovedGroupReport {
                    candidates: ids(ballots, &g.candidates),
                    margin: format_weight(&g.margin),
                })
                .collect(),
            survivors: ids(ballots, &report.survivors),
            bounds,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "budget {}, quota {}", self.budget, self.quota);
        if !self.pre_resolved.is_empty() {
            let _ = writeln!(out, "already at quota: {}", self.pre_resolved.join(", "));
        }
        for g in &self.removed {
            let _ = writeln!(out, "removed {{{}}} (margin {})", g.candidates.join(", "), g.margin);
        }
        let _ = writeln!(out, "survivors: {}", self.survivors.join(", "));
        let _ = writeln!(
            out,
            "at most {} quota win(s); at least {} initial elimination(s)",
            self.bounds.max_wins, self.bounds.min_initial_losses
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanRow {
    pub ballot: Vec<String>,
    pub count: u64,
}

pub fn plan_rows(ballots: &WeightedBallotSet, plan: &StrategyPlan) -> Vec<PlanRow> {
    let mut rows: Vec<PlanRow> = plan
        .additions
        .iter()
        .map(|(b, &count)| PlanRow {
            ballot: ids(ballots, b.ranking()),
            count,
        })
        .collect();
    if plan.padding > 0 {
        rows.push(PlanRow {
            ballot: Vec::new(),
            count: plan.padding,
        });
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseAReport {
    pub detected: bool,
    pub candidate: Option<String>,
    pub baseline_round: Option<usize>,
    pub winning_round: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrategyReport {
    pub subject: String,
    pub goal: String,
    pub cost: u64,
    pub method: Method,
    pub categories: Vec<Category>,
    pub plan: Vec<PlanRow>,
    pub realized_order: Vec<String>,
    pub realized_sequence: String,
    pub case_a: CaseAReport,
}

impl StrategyReport {
    pub fn new(ballots: &WeightedBallotSet, goal: &str, s: &ClassifiedStrategy) -> Self {
        let w = s.case_a.witness.as_ref();
        StrategyReport {
            subject: ballots.candidate_id(s.subject).to_string(),
            goal: goal.to_string(),
            cost: s.cost,
            method: s.method,
            categories: s.categories.iter().copied().collect(),
            plan: plan_rows(ballots, &s.plan),
            realized_order: ids(ballots, &s.realized.order),
            realized_sequence: s.realized.sequence.to_string(),
            case_a: CaseAReport {
                detected: s.case_a.detected,
                candidate: w.map(|w| ballots.candidate_id(w.candidate).to_string()),
                baseline_round: w.map(|w| w.baseline_round),
                winning_round: w.map(|w| w.winning_round),
            },
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} reaches {} with {} added ballot(s)", self.subject, self.goal, self.cost);
        for row in &self.plan {
            let _ = writeln!(out, "  {} x [{}]", row.count, row.ballot.join(","));
        }
        let cats: Vec<&str> = self.categories.iter().map(|c| category_name(*c)).collect();
        let _ = writeln!(out, "categories: {}", if cats.is_empty() { "none".to_string() } else { cats.join(", ") });
        let _ = writeln!(out, "order with plan: {} ({})", self.realized_order.join(" > "), self.realized_sequence);
        if let Some(c) = &self.case_a.candidate {
            let _ = writeln!(
                out,
                "rescue detected: {c} left in round {} without the plan, wins in round {}",
                self.case_a.baseline_round.unwrap_or(0),
                self.case_a.winning_round.unwrap_or(0)
            );
        }
        out
    }
}

pub fn category_name(c: Category) -> &'static str {
    match c {
        Category::Selfish => "selfish",
        Category::AltruisticToLosers => "altruistic-losers",
        Category::AltruisticToWinners => "altruistic-winners",
    }
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        write_row(&mut writer, &row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
}

/// `candidate,frequency,hits,samples`.
pub fn efficacy_csv(table: &EfficacyTable) -> Result<String> {
    let mut rows = vec![vec!["candidate".into(), "frequency".into(), "hits".into(), "samples".into()]];
    for (c, id) in table.candidates.iter().enumerate() {
        rows.push(vec![
            id.clone(),
            format!("{:.4}", table.frequency(c)),
            table.hits[c].to_string(),
            table.samples.to_string(),
        ]);
    }
    csv_string(rows)
}

/// `candidate,needed,feasible,unresolved,feasibility,average_cost`.
pub fn feasibility_csv(dist: &StrategyDistribution) -> Result<String> {
    let mut rows = vec![["candidate", "needed", "feasible", "unresolved", "feasibility", "average_cost"]
        .iter()
        .map(|s| s.to_string())
        .collect()];
    for (id, row) in dist.candidates.iter().zip(&dist.per_candidate) {
        rows.push(vec![
            id.clone(),
            row.needed.to_string(),
            row.feasible.to_string(),
            row.unresolved.to_string(),
            row.feasibility_rate().map_or(String::new(), |r| format!("{r:.4}")),
            row.average_cost().map_or(String::new(), |c| format!("{c:.2}")),
        ]);
    }
    csv_string(rows)
}

/// `candidate,signature,count,percent`, one row per observed signature.
pub fn distribution_csv(dist: &StrategyDistribution) -> Result<String> {
    let mut rows = vec![["candidate", "signature", "count", "percent"].iter().map(|s| s.to_string()).collect()];
    for (id, row) in dist.candidates.iter().zip(&dist.per_candidate) {
        let pct = row.percentages();
        for (sig, count) in &row.signatures {
            rows.push(vec![id.clone(), sig.clone(), count.to_string(), format!("{:.2}", pct[sig])]);
        }
    }
    csv_string(rows)
}

/// `sample,removed`.
pub fn reduction_csv(stats: &ReductionStats) -> Result<String> {
    let mut rows = vec![vec!["sample".to_string(), "removed".to_string()]];
    for (i, r) in stats.removed.iter().enumerate() {
        rows.push(vec![i.to_string(), r.to_string()]);
    }
    csv_string(rows)
}
