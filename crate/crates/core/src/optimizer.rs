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

//! Cheapest additions that bring a subject candidate to a goal position.

use crate::allocator::{optimize_budget, StrategyPlan};
use crate::engine::{replay_with_additions, run_election, ElectionOutcome, RoundKind};
use crate::error::{Error, Result};
use crate::model::{
    compute_quota, droop_quota, int, CandidateIdx, ElectionConfig, RankedBallot, Weight,
    WeightedBallotSet,
};
use crate::reducer::{
    remove_irrelevant, remove_irrelevant_with, sequence_bounds, strict_support, ReduceOptions,
};
use crate::structure::{enumerate_bounded_sequences, orders_with_subject_in_top, Label, Structure};
use log::debug;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

/// Largest number of target structures a single search will cost.
pub const MAX_STRUCTURES: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GoalKind {
    /// First place in the outcome order.
    Win,
    /// Any of the first `p` places.
    TopK(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Goal {
    pub subject: CandidateIdx,
    pub kind: GoalKind,
    pub max_budget: u64,
}

impl Goal {
    pub fn positions(&self) -> usize {
        match self.kind {
            GoalKind::Win => 1,
            GoalKind::TopK(p) => p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    Selfish,
    AltruisticToLosers,
    AltruisticToWinners,
}

/// How a strategy was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    /// The subject already meets the goal.
    AlreadyMet,
    /// First-place ballots sized by the head-to-head strict-support gap.
    HeadToHead,
    /// The smallest number of first-place ballots for the subject.
    SelfVotes,
    /// Minimum over target structures.
    StructureSearch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseAWitness {
    pub candidate: CandidateIdx,
    /// Round in which the candidate left the count without the additions.
    pub baseline_round: usize,
    /// Round in which it wins with them.
    pub winning_round: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseAFlag {
    pub detected: bool,
    pub witness: Option<CaseAWitness>,
}

#[derive(Clone, Debug)]
pub struct ClassifiedStrategy {
    pub subject: CandidateIdx,
    pub plan: StrategyPlan,
    pub cost: u64,
    pub categories: BTreeSet<Category>,
    /// The structure the plan produces on the full instance.
    pub target_structure: Structure,
    pub realized: ElectionOutcome,
    pub case_a: CaseAFlag,
    pub method: Method,
}

fn finish(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    plan: StrategyPlan,
    config: &ElectionConfig,
    method: Method,
) -> Result<ClassifiedStrategy> {
    let realized = replay_with_additions(ballots, &plan, config)?;
    let categories = classify_strategy(&plan, &realized, subject);
    let case_a = detect_case_a(ballots, &plan, &realized, config)?;
    Ok(ClassifiedStrategy {
        subject,
        cost: plan.cost(),
        target_structure: realized.structure(),
        categories,
        case_a,
        realized,
        plan,
        method,
    })
}

/// Cheapest way for `subject` to finish first.
///
/// When the first-choice leader beats every rival's support against it, the
/// subject only has to overtake the leader in their head-to-head, and the
/// gap is spent as first-place ballots for the subject. That shortcut is
/// kept only if replay confirms first place; otherwise (and whenever the
/// precondition fails) the full structure search decides.
pub fn optimal_win_strategy(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    max_budget: u64,
    config: &ElectionConfig,
) -> Result<ClassifiedStrategy> {
    let n = ballots.num_candidates();
    if subject >= n {
        return Err(Error::UnknownCandidate(subject.to_string()));
    }
    let current = run_election(ballots, config)?;
    if current.order[0] == subject {
        return finish(ballots, subject, StrategyPlan::empty(), config, Method::AlreadyMet);
    }
    if let Some(t) = head_to_head_gap(ballots, subject, config) {
        if t <= max_budget {
            let plan = StrategyPlan::single(RankedBallot(vec![subject]), t);
            if replay_with_additions(ballots, &plan, config)?.order[0] == subject {
                return finish(ballots, subject, plan, config, Method::HeadToHead);
            }
        }
    }
    optimal_topk_strategy(
        ballots,
        &Goal {
            subject,
            kind: GoalKind::Win,
            max_budget,
        },
        config,
    )
}

/// Ballots the subject needs to overtake the first-choice leader head to
/// head, when the leader's first choices exceed every rival's support
/// against it. `None` if that precondition fails.
pub fn head_to_head_gap(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    config: &ElectionConfig,
) -> Option<u64> {
    let n = ballots.num_candidates();
    let rank = config.tie_rank(n);
    let fc = ballots.first_choice_totals();
    let leader = (0..n).max_by(|&a, &b| fc[a].cmp(&fc[b]).then(rank[b].cmp(&rank[a])))?;
    if leader == subject {
        return None;
    }
    let rivals: Vec<CandidateIdx> = (0..n).filter(|&c| c != leader).collect();
    let against_leader = strict_support(ballots, &rivals, &[leader]);
    if against_leader.values().any(|s| s >= &fc[leader]) {
        return None;
    }
    let others: Vec<CandidateIdx> = (0..n).filter(|&c| c != subject).collect();
    let leader_final = strict_support(ballots, &others, &[subject])[&leader].clone();
    let subject_final = &against_leader[&subject];
    let gap = leader_final - subject_final;
    let needed = if rank[subject] < rank[leader] {
        gap.ceil()
    } else {
        gap.floor() + int(1)
    };
    let needed = needed.to_integer();
    Some(crate::model::to_u64_saturating(&needed.max(num_bigint::BigInt::from(0))))
}

/// Smallest number of `[subject]` ballots, up to `max_budget`, that puts
/// the subject first. Adding first-place ballots never worsens the
/// subject's position, so a binary search suffices.
pub fn selfish_win_strategy(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    max_budget: u64,
    config: &ElectionConfig,
) -> Result<ClassifiedStrategy> {
    if subject >= ballots.num_candidates() {
        return Err(Error::UnknownCandidate(subject.to_string()));
    }
    let wins = |t: u64| -> Result<bool> {
        let plan = StrategyPlan::single(RankedBallot(vec![subject]), t);
        Ok(replay_with_additions(ballots, &plan, config)?.order[0] == subject)
    };
    if !wins(max_budget)? {
        return Err(Error::Infeasible { budget: max_budget });
    }
    let (mut lo, mut hi) = (0u64, max_budget);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let method = if lo == 0 { Method::AlreadyMet } else { Method::SelfVotes };
    finish(
        ballots,
        subject,
        StrategyPlan::single(RankedBallot(vec![subject]), lo),
        config,
        method,
    )
}

/// Cheapest additions placing the subject within the goal's positions.
///
/// Candidates that cannot matter under `max_budget` added ballots are
/// removed first; every structure of the survivors that satisfies the goal
/// and the sequence bounds is then costed, and the cheapest plan is lifted
/// back to the full instance and confirmed by replay. Ties on cost go to
/// the plan with fewer distinct ballot types, then to enumeration order.
pub fn optimal_topk_strategy(
    ballots: &WeightedBallotSet,
    goal: &Goal,
    config: &ElectionConfig,
) -> Result<ClassifiedStrategy> {
    let n = ballots.num_candidates();
    let subject = goal.subject;
    if subject >= n {
        return Err(Error::UnknownCandidate(subject.to_string()));
    }
    let p = goal.positions();
    if p == 0 || p > n {
        return Err(Error::Config(format!("goal position {p} outside 1..={n}")));
    }
    let current = run_election(ballots, config)?;
    if current.position_of(subject) < p {
        return finish(ballots, subject, StrategyPlan::empty(), config, Method::AlreadyMet);
    }

    let mut report = remove_irrelevant(ballots, goal.max_budget, config)?;
    if report.reduced_index(subject).is_none() && !report.pre_resolved.contains(&subject) {
        // A removed candidate is eliminated before every survivor whatever
        // the additions, so it can only reach slots below them.
        if p <= report.pre_resolved.len() + report.survivors.len() {
            return Err(Error::Infeasible {
                budget: goal.max_budget,
            });
        }
        let options = ReduceOptions {
            protect: vec![subject],
            ..ReduceOptions::default()
        };
        report = remove_irrelevant_with(ballots, goal.max_budget, config, &options)?;
    }
    let found = match report.reduced_index(subject) {
        Some(rs) if p > report.pre_resolved.len() => {
            let lifted = search(
                &report.surviving_ballots,
                rs,
                p - report.pre_resolved.len(),
                goal.max_budget,
                &report.config,
            )?
            .map(|plan| report.lift_plan(&plan));
            match lifted {
                Some(plan) if meets(ballots, &plan, subject, p, config)? => Some(plan),
                Some(_) => {
                    debug!("reduced plan failed on the full instance; searching unreduced");
                    search(ballots, subject, p, goal.max_budget, config)?
                }
                None => None,
            }
        }
        _ => search(ballots, subject, p, goal.max_budget, config)?,
    };
    match found {
        Some(plan) => finish(ballots, subject, plan, config, Method::StructureSearch),
        None => Err(Error::Infeasible {
            budget: goal.max_budget,
        }),
    }
}

fn meets(
    ballots: &WeightedBallotSet,
    plan: &StrategyPlan,
    subject: CandidateIdx,
    p: usize,
    config: &ElectionConfig,
) -> Result<bool> {
    Ok(replay_with_additions(ballots, plan, config)?.position_of(subject) < p)
}

/// Structures of `ballots` with `subject` in the first `p` slots whose
/// sequence respects the feasibility and budget bounds, in deterministic
/// enumeration order.
pub fn candidate_structures(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    p: usize,
    budget: u64,
    config: &ElectionConfig,
) -> Result<Vec<Structure>> {
    let n = ballots.num_candidates();
    let bounds = sequence_bounds(ballots, budget, config)?;
    let seats = config.seats.min(n.saturating_sub(1)).max(1);
    let sequences = if n == 1 {
        crate::structure::enumerate_all_sequences(1)
    } else {
        enumerate_bounded_sequences(n, seats, bounds.max_wins, bounds.min_initial_losses)
    };
    let orders = (1..n as u128).product::<u128>() * p.min(n) as u128;
    let structures = orders * sequences.len() as u128;
    if structures > MAX_STRUCTURES {
        return Err(Error::SearchTooLarge {
            structures,
            limit: MAX_STRUCTURES,
        });
    }
    let mut out = Vec::new();
    for order in orders_with_subject_in_top(n, subject, p, config) {
        for seq in &sequences {
            out.push(Structure {
                order: order.clone(),
                sequence: seq.clone(),
            });
        }
    }
    Ok(out)
}

fn search(
    ballots: &WeightedBallotSet,
    subject: CandidateIdx,
    p: usize,
    max_budget: u64,
    config: &ElectionConfig,
) -> Result<Option<StrategyPlan>> {
    let structures = candidate_structures(ballots, subject, p, max_budget, config)?;
    let screen = Screen::new(ballots, config)?;
    let bound = AtomicU64::new(max_budget);
    let results: Vec<(usize, StrategyPlan)> = structures
        .par_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let cap = bound.load(Ordering::Relaxed);
            if let Some(screen) = &screen {
                if !screen.admits(s, cap) {
                    return None;
                }
            }
            match optimize_budget(ballots, s, cap, config) {
                Ok(plan) => {
                    bound.fetch_min(plan.cost(), Ordering::Relaxed);
                    Some(Ok((i, plan)))
                }
                Err(Error::Infeasible { .. }) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results
        .into_iter()
        .min_by_key(|(i, plan)| (plan.cost(), plan.distinct_types(), *i))
        .map(|(_, plan)| plan))
}

/// Necessary conditions on a structure checked from first-preference
/// tallies over every active set, before any allocation is attempted.
///
/// In a round with active set `A` after winners `D`, a candidate's tally is
/// at least the weight ranking it first among `A ∪ D` (those ballots never
/// passed through a winner) and at most the weight ranking it first among
/// `A` plus every added ballot.
struct Screen {
    /// `firsts[mask][c]`: weight whose first entry within `mask` is `c`.
    firsts: Vec<Vec<Weight>>,
    base_quota: Weight,
    ballots_total: Weight,
    config: ElectionConfig,
}

const SCREEN_MAX_CANDIDATES: usize = 10;

impl Screen {
    fn new(ballots: &WeightedBallotSet, config: &ElectionConfig) -> Result<Option<Screen>> {
        let n = ballots.num_candidates();
        if n > SCREEN_MAX_CANDIDATES {
            return Ok(None);
        }
        let zero = int(0);
        let mut firsts = vec![vec![zero.clone(); n]; 1 << n];
        for (mask, row) in firsts.iter_mut().enumerate() {
            for (b, w) in ballots.iter() {
                if let Some(&c) = b.ranking().iter().find(|&&c| mask & (1 << c) != 0) {
                    row[c] += w;
                }
            }
        }
        Ok(Some(Screen {
            firsts,
            base_quota: compute_quota(ballots, config)?.value().clone(),
            ballots_total: ballots.total_weight(),
            config: config.clone(),
        }))
    }

    fn max_quota(&self, budget: u64) -> Weight {
        match &self.config.quota_override {
            Some(q) => q.clone(),
            None => droop_quota(&(self.ballots_total.clone() + int(budget as i64)), self.config.seats)
                .value()
                .clone(),
        }
    }

    fn admits(&self, structure: &Structure, budget: u64) -> bool {
        let n = structure.order.len();
        let b = int(budget as i64);
        let q_hi = self.max_quota(budget);
        let mut active: usize = (1 << n) - 1;
        let mut departed_winners: usize = 0;
        for round in structure.schedule() {
            if active.count_ones() <= 1 {
                break;
            }
            let upper = &self.firsts[active];
            let lower = &self.firsts[active | departed_winners];
            let c = round.candidate;
            match round.label {
                Label::W => {
                    if &upper[c] + &b < self.base_quota {
                        return false;
                    }
                }
                Label::L => {
                    let members = (0..n).filter(|&x| active & (1 << x) != 0);
                    for x in members {
                        if lower[x] >= q_hi {
                            return false;
                        }
                        if x != c && &upper[x] + &b < lower[c] {
                            return false;
                        }
                    }
                }
            }
            active &= !(1 << c);
            if round.label == Label::W {
                departed_winners |= 1 << c;
            }
        }
        true
    }
}

/// Categories of the added ballots given the outcome they produced.
///
/// A ballot is selfish when it ranks the subject, altruistic to losers when
/// it ranks some other loser before any winner, and altruistic to winners
/// when it ranks some other winner before its last entry. Empty ballots
/// have no category.
pub fn classify_strategy(
    plan: &StrategyPlan,
    realized: &ElectionOutcome,
    subject: CandidateIdx,
) -> BTreeSet<Category> {
    let winners: BTreeSet<CandidateIdx> = realized.winners.iter().copied().collect();
    let mut out = BTreeSet::new();
    for ballot in plan.additions.keys() {
        let r = ballot.ranking();
        if r.contains(&subject) {
            out.insert(Category::Selfish);
        }
        let first_winner = r.iter().position(|c| winners.contains(c)).unwrap_or(r.len());
        if r[..first_winner]
            .iter()
            .any(|&c| c != subject && !winners.contains(&c))
        {
            out.insert(Category::AltruisticToLosers);
        }
        if r.len() >= 2
            && r[..r.len() - 1]
                .iter()
                .any(|&c| c != subject && winners.contains(&c))
        {
            out.insert(Category::AltruisticToWinners);
        }
    }
    out
}

/// Looks for a candidate that the additions rescue from elimination and
/// that later reaches the quota on transfers alone: it receives added
/// first-place ballots, is eliminated without the additions, is still below
/// the quota in the first round with them, and quota-wins in a later round.
pub fn detect_case_a(
    ballots: &WeightedBallotSet,
    plan: &StrategyPlan,
    realized: &ElectionOutcome,
    config: &ElectionConfig,
) -> Result<CaseAFlag> {
    if realized.quota_wins() == 0 {
        return Ok(CaseAFlag::default());
    }
    let baseline = run_election(ballots, config)?;
    let q = realized.quota.value();
    let beneficiaries: BTreeSet<CandidateIdx> =
        plan.additions.keys().filter_map(|b| b.first()).collect();
    for &x in &beneficiaries {
        let before = baseline.round_of(x);
        if before.kind != RoundKind::Elimination {
            continue;
        }
        let after = realized.round_of(x);
        if after.kind != RoundKind::QuotaWin || after.round_index == 1 {
            continue;
        }
        let opening = &realized.rounds[0].tallies_before[&x];
        if opening < q {
            return Ok(CaseAFlag {
                detected: true,
                witness: Some(CaseAWitness {
                    candidate: x,
                    baseline_round: before.round_index,
                    winning_round: after.round_index,
                }),
            });
        }
    }
    Ok(CaseAFlag::default())
}
