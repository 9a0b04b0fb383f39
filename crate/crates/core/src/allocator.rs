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

//! Minimum vote additions reaching a target structure.
//!
//! [`smart_allocate`] works at a fixed quota. It walks the target's rounds
//! in order, tops up whatever tallies fall short of the round's required
//! outcome with whole ballots, and re-tabulates after every round so that
//! fractional surplus effects are always exact. Ballots added earlier whose
//! ranked candidates have all left the count are extended before any new
//! ballot is spent.
//!
//! [`optimize_budget`] scans the budgets whose quotas differ and keeps the
//! cheapest feasible plan, padding with empty ballots when a plan needs the
//! larger quota. Whole-ballot top-ups cannot move a tally by less than one
//! vote, so when the resulting cost is small it also tries every cheaper plan
//! built from short ballots routed through candidates that leave the count
//! earlier, whose surpluses can deliver fractions of a vote.

use crate::engine::{replay_with_additions, RoundKind, Tabulator};
use crate::error::{Error, Result};
use crate::model::{
    droop_quota, int, CandidateIdx, ElectionConfig, Quota, RankedBallot, Weight,
    WeightedBallotSet,
};
use crate::structure::{Label, ScheduledRound, Structure};
use log::{debug, trace};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::BTreeMap;

/// A multiset of added ballots plus empty padding ballots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyPlan {
    pub additions: BTreeMap<RankedBallot, u64>,
    pub padding: u64,
}

impl StrategyPlan {
    pub fn empty() -> Self {
        StrategyPlan::default()
    }

    /// `count` copies of a single ballot.
    pub fn single(ballot: RankedBallot, count: u64) -> Self {
        let mut plan = StrategyPlan::default();
        plan.add(ballot, count);
        plan
    }

    pub fn add(&mut self, ballot: RankedBallot, count: u64) {
        if count == 0 {
            return;
        }
        if ballot.is_empty() {
            self.padding += count;
        } else {
            *self.additions.entry(ballot).or_insert(0) += count;
        }
    }

    /// Non-empty ballots added.
    pub fn votes_used(&self) -> u64 {
        self.additions.values().sum()
    }

    /// Total ballots added, padding included.
    pub fn cost(&self) -> u64 {
        self.votes_used() + self.padding
    }

    pub fn is_empty(&self) -> bool {
        self.cost() == 0
    }

    /// Number of distinct non-empty ballot types.
    pub fn distinct_types(&self) -> usize {
        self.additions.len()
    }

    pub fn with_padding(mut self, padding: u64) -> Self {
        self.padding = padding;
        self
    }

    /// The ballot set with this plan merged in.
    pub fn apply(&self, ballots: &WeightedBallotSet) -> Result<WeightedBallotSet> {
        let mut merged = ballots.clone();
        for (ballot, &count) in &self.additions {
            merged.add(ballot.clone(), int(count as i64))?;
        }
        if self.padding > 0 {
            merged.add(RankedBallot::empty(), int(self.padding as i64))?;
        }
        Ok(merged)
    }

    /// Human-readable rows such as `798 x [N]`.
    pub fn describe(&self, ballots: &WeightedBallotSet) -> Vec<String> {
        let mut rows: Vec<String> = self
            .additions
            .iter()
            .map(|(b, c)| format!("{c} x {}", ballots.format_ballot(b)))
            .collect();
        if self.padding > 0 {
            rows.push(format!("{} x []", self.padding));
        }
        rows
    }
}

/// Shortfall of one round, for diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSlack {
    pub round_index: usize,
    pub candidate: CandidateIdx,
    /// Weight that had to be added to reach the round's required outcome.
    pub added_weight: Weight,
    /// New ballots spent in this round.
    pub new_votes: u64,
    /// Ballots re-used from earlier rounds.
    pub reused_votes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationResult {
    pub feasible: bool,
    pub plan: StrategyPlan,
    /// Non-empty ballots spent.
    pub votes_used: u64,
    pub budget: u64,
    pub quota: Quota,
    pub per_round_slacks: Vec<RoundSlack>,
    /// Why the allocation failed, when it did.
    pub reason: Option<String>,
}

impl AllocationResult {
    fn infeasible(budget: u64, quota: Quota, slacks: Vec<RoundSlack>, reason: String) -> Self {
        AllocationResult {
            feasible: false,
            plan: StrategyPlan::empty(),
            votes_used: 0,
            budget,
            quota,
            per_round_slacks: slacks,
            reason: Some(reason),
        }
    }
}

/// Lower bound on a tally: `>= value` or `> value`.
#[derive(Clone, Debug)]
struct Bound {
    value: Weight,
    strict: bool,
}

impl Bound {
    fn satisfied_by(&self, t: &Weight) -> bool {
        if self.strict {
            t > &self.value
        } else {
            t >= &self.value
        }
    }

    /// Fewest units of `unit` weight lifting `current` over the bound.
    fn units_needed(&self, current: &Weight, unit: &Weight) -> u64 {
        if self.satisfied_by(current) {
            return 0;
        }
        let gap = (&self.value - current) / unit;
        let n: BigInt = if self.strict {
            gap.floor().to_integer() + BigInt::one()
        } else {
            gap.ceil().to_integer()
        };
        n.to_u64().unwrap_or(u64::MAX)
    }
}

/// Working state: the base instance plus grouped added ballots.
#[derive(Clone)]
struct Draft<'a> {
    base: &'a [(Vec<CandidateIdx>, Weight)],
    groups: Vec<(Vec<CandidateIdx>, u64)>,
    n: usize,
    quota: Quota,
    config: &'a ElectionConfig,
}

enum Replay {
    /// Tabulation followed the schedule up to the requested round.
    Reached(Box<Tabulator>),
    /// The normal rule departed from the schedule at this 0-based round.
    Broken(usize),
}

impl<'a> Draft<'a> {
    fn tabulator(&self) -> Tabulator {
        let mut entries: Vec<(Vec<CandidateIdx>, Weight)> = self.base.to_vec();
        for (ranking, count) in &self.groups {
            entries.push((ranking.clone(), int(*count as i64)));
        }
        Tabulator::from_entries(self.n, entries, self.config, self.quota.clone())
    }

    /// Tabulates under the normal rule, checking rounds `0..upto` against
    /// the schedule, and returns the state at the start of round `upto`.
    fn replay(&self, schedule: &[ScheduledRound], upto: usize) -> Replay {
        let mut tab = self.tabulator();
        for (r, step) in schedule.iter().enumerate().take(upto) {
            match tab.next_decision() {
                Some((c, kind)) if c == step.candidate && label_matches(kind, step.label) => {
                    tab.resolve(c, kind)
                }
                _ => return Replay::Broken(r),
            }
        }
        Replay::Reached(Box::new(tab))
    }

    fn group_offset(&self) -> usize {
        self.base.len()
    }

    fn votes(&self) -> u64 {
        self.groups.iter().map(|(_, c)| c).sum()
    }

    fn push(&mut self, ranking: Vec<CandidateIdx>, count: u64) {
        if count == 0 {
            return;
        }
        if let Some(g) = self.groups.iter_mut().find(|(r, _)| *r == ranking) {
            g.1 += count;
        } else {
            self.groups.push((ranking, count));
        }
    }

    /// Moves `count` ballots ranked `ranking` to `ranking` followed by `c`.
    fn extend(&mut self, ranking: &[CandidateIdx], count: u64, c: CandidateIdx) {
        let g = self
            .groups
            .iter()
            .position(|(r, _)| r == ranking)
            .expect("extended group exists");
        self.groups[g].1 -= count;
        let mut longer = ranking.to_vec();
        longer.push(c);
        self.push(longer, count);
        self.groups.retain(|(_, k)| *k > 0);
    }

    fn plan(&self) -> StrategyPlan {
        let mut plan = StrategyPlan::empty();
        for (ranking, count) in &self.groups {
            plan.add(RankedBallot(ranking.clone()), *count);
        }
        plan
    }
}

fn label_matches(kind: RoundKind, label: Label) -> bool {
    matches!(
        (kind, label),
        (RoundKind::Elimination, Label::L)
            | (RoundKind::QuotaWin, Label::W)
            | (RoundKind::FinalPlacement, Label::W)
    )
}

/// Added ballots that are exhausted and can be extended for free.
struct Released {
    ranking: Vec<CandidateIdx>,
    count: u64,
    unit: Weight,
    /// Round in which its last ranked candidate left.
    left_in_round: usize,
}

/// Released ballots of `draft`, which must be the draft `tab` was built from.
fn released_pool(draft: &Draft<'_>, tab: &Tabulator) -> Vec<Released> {
    let offset = draft.group_offset();
    let mut left_in = vec![usize::MAX; draft.n];
    for r in tab.rounds() {
        left_in[r.resolved] = r.round_index;
    }
    let mut out = Vec::new();
    for (g, (ranking, count)) in draft.groups.iter().enumerate() {
        let Some(&last) = ranking.last() else { continue };
        if ranking.iter().any(|&c| tab.is_active(c)) {
            continue;
        }
        let carried = tab.carried(offset + g);
        if !carried.is_positive() {
            continue;
        }
        out.push(Released {
            ranking: ranking.clone(),
            count: *count,
            unit: carried / int(*count as i64),
            left_in_round: left_in[last],
        });
    }
    // Latest departures first: their weight arrives as late as possible.
    out.sort_by(|a, b| {
        b.left_in_round
            .cmp(&a.left_in_round)
            .then_with(|| b.unit.cmp(&a.unit))
            .then_with(|| a.ranking.cmp(&b.ranking))
    });
    out
}

/// Lifts `c` over every bound at the tabulator's current round, extending
/// released ballots from `pool` first and then adding fresh `[c]` ballots.
/// Returns `(fresh, reused)` counts.
fn top_up(
    draft: &mut Draft<'_>,
    tab: &Tabulator,
    c: CandidateIdx,
    bounds: &[Bound],
    pool: &mut [Released],
) -> (u64, u64) {
    let mut current = tab.tally(c).clone();
    let mut reused = 0;
    for rel in pool.iter_mut() {
        if rel.count == 0 {
            continue;
        }
        let need = bounds
            .iter()
            .map(|b| b.units_needed(&current, &rel.unit))
            .max()
            .unwrap_or(0);
        if need == 0 {
            break;
        }
        let take = need.min(rel.count);
        draft.extend(&rel.ranking, take, c);
        rel.count -= take;
        current += &rel.unit * int(take as i64);
        reused += take;
    }
    let fresh = bounds
        .iter()
        .map(|b| b.units_needed(&current, &Weight::one()))
        .max()
        .unwrap_or(0);
    draft.push(vec![c], fresh);
    (fresh, reused)
}

/// Bounds candidate `c` must clear to rank above each of `others`.
fn beat_bounds(tab: &Tabulator, c: CandidateIdx, others: &[CandidateIdx]) -> Vec<Bound> {
    others
        .iter()
        .map(|&o| Bound {
            value: tab.tally(o).clone(),
            strict: !tab.favoured(c, o),
        })
        .collect()
}

/// Computes additions that make `ballots` tabulate to `target` when exactly
/// `budget` ballots are added in total (so the quota is that of the enlarged
/// instance). Padding is included in the plan only when the additions alone
/// would not reach the target. A target the instance already reaches needs
/// no ballots at all, whatever the budget.
pub fn smart_allocate(
    ballots: &WeightedBallotSet,
    target: &Structure,
    budget: u64,
    config: &ElectionConfig,
) -> Result<AllocationResult> {
    target.validate(ballots.num_candidates())?;
    let quota = match &config.quota_override {
        Some(q) => Quota(q.clone()),
        None => droop_quota(&(ballots.total_weight() + int(budget as i64)), config.seats),
    };
    if crate::engine::run_election(ballots, config)?.structure() == *target {
        return Ok(AllocationResult {
            feasible: true,
            plan: StrategyPlan::empty(),
            votes_used: 0,
            budget,
            quota,
            per_round_slacks: Vec::new(),
            reason: None,
        });
    }
    let mut result = allocate_at_quota(ballots, target, quota.clone(), config)?;
    result.budget = budget;
    if !result.feasible {
        return Ok(result);
    }
    if result.votes_used > budget {
        return Ok(AllocationResult::infeasible(
            budget,
            quota,
            result.per_round_slacks,
            format!("needs {} votes", result.votes_used),
        ));
    }
    let plan = result.plan.clone();
    if replay_with_additions(ballots, &plan, config)?.structure() == *target {
        return Ok(result);
    }
    let padded = plan.with_padding(budget - result.votes_used);
    if replay_with_additions(ballots, &padded, config)?.structure() != *target {
        return Ok(AllocationResult::infeasible(
            budget,
            quota,
            result.per_round_slacks,
            "replay does not reach the target".into(),
        ));
    }
    result.plan = padded;
    Ok(result)
}

/// Slack filling at a fixed quota. The returned plan never contains padding.
pub fn allocate_at_quota(
    ballots: &WeightedBallotSet,
    target: &Structure,
    quota: Quota,
    config: &ElectionConfig,
) -> Result<AllocationResult> {
    let n = ballots.num_candidates();
    target.validate(n)?;
    let base: Vec<(Vec<CandidateIdx>, Weight)> = ballots
        .iter()
        .map(|(b, w)| (b.ranking().to_vec(), w.clone()))
        .collect();
    let schedule = target.schedule();
    let draft = Draft {
        base: &base,
        groups: Vec::new(),
        n,
        quota: quota.clone(),
        config,
    };
    match solve(draft, &schedule, 0) {
        Ok((draft, slacks)) => {
            let plan = draft.plan();
            debug!("allocation uses {} votes at quota {}", plan.votes_used(), quota);
            Ok(AllocationResult {
                feasible: true,
                votes_used: plan.votes_used(),
                plan,
                budget: 0,
                quota,
                per_round_slacks: slacks,
                reason: None,
            })
        }
        Err(why) => {
            trace!("allocation infeasible: {why}");
            Ok(AllocationResult::infeasible(0, quota, Vec::new(), why))
        }
    }
}

/// How many times a bridged restart may itself bridge again.
const MAX_BRIDGE_DEPTH: usize = 2;

type Solved<'a> = std::result::Result<(Draft<'a>, Vec<RoundSlack>), String>;

/// Runs the round-by-round allocation from `initial`, whose groups act as
/// seed ballots.
fn solve<'a>(initial: Draft<'a>, schedule: &[ScheduledRound], depth: usize) -> Solved<'a> {
    let n = initial.n;
    let q = initial.quota.value().clone();
    let mut draft = initial.clone();
    let mut slacks = Vec::new();
    for r in 0..n.saturating_sub(1) {
        let step = schedule[r];
        let tab = match draft.replay(schedule, r) {
            Replay::Reached(tab) => tab,
            Replay::Broken(at) => return Err(format!("round {} no longer follows the target", at + 1)),
        };
        let s = step.candidate;
        let others: Vec<CandidateIdx> = tab
            .active_candidates()
            .into_iter()
            .filter(|&c| c != s)
            .collect();
        let before = draft.votes();
        let mut reused_total = 0;
        match step.label {
            Label::L => {
                if tab.active_candidates().iter().any(|&c| tab.tally(c) >= &q) {
                    return Err(format!("round {}: a tally already reaches the quota", r + 1));
                }
                let mut pool = released_pool(&draft, &tab);
                for &o in &others {
                    let bound = Bound {
                        value: tab.tally(s).clone(),
                        strict: !tab.favoured(o, s),
                    };
                    let (_, reused) = top_up(&mut draft, &tab, o, &[bound], &mut pool);
                    reused_total += reused;
                }
            }
            Label::W => {
                let mut bounds = beat_bounds(&tab, s, &others);
                bounds.push(Bound {
                    value: q.clone(),
                    strict: false,
                });
                let (plain, fresh) = plain_win(&draft, schedule, r, &tab, &bounds);
                match plain {
                    Some((d, reused)) => {
                        draft = d;
                        reused_total += reused;
                    }
                    None if r > 0 && fresh > 0 && depth < MAX_BRIDGE_DEPTH => {
                        return bridged(&initial, schedule, r, fresh, depth);
                    }
                    None => return Err(format!("round {}: no top-up keeps earlier rounds", r + 1)),
                }
            }
        }
        let after_tab = match draft.replay(schedule, r + 1) {
            Replay::Reached(t) => t,
            Replay::Broken(at) => return Err(format!("round {} broken after top-up", at + 1)),
        };
        let added = after_tab
            .rounds()
            .last()
            .map(|x| x.tallies_before.get(&s).cloned().unwrap_or_default())
            .unwrap_or_default()
            - tab.tally(s);
        let new_votes = draft.votes() - before;
        if new_votes > 0 || reused_total > 0 {
            slacks.push(RoundSlack {
                round_index: r + 1,
                candidate: s,
                added_weight: added,
                new_votes,
                reused_votes: reused_total,
            });
        }
    }
    if let Replay::Broken(at) = draft.replay(schedule, n) {
        return Err(format!("final replay departs at round {}", at + 1));
    }
    Ok((draft, slacks))
}

/// Direct top-up for a required win in round `r`, with and without reuse of
/// released ballots. Returns the cheapest draft that keeps rounds `0..=r` on
/// schedule, and the number of fresh ballots the direct top-up wanted.
fn plain_win<'a>(
    draft: &Draft<'a>,
    schedule: &[ScheduledRound],
    r: usize,
    tab: &Tabulator,
    bounds: &[Bound],
) -> (Option<(Draft<'a>, u64)>, u64) {
    let s = schedule[r].candidate;
    let mut best: Option<(Draft<'a>, u64)> = None;
    let mut wanted = 0;
    for reuse in [true, false] {
        let mut plain = draft.clone();
        let mut pool = if reuse { released_pool(draft, tab) } else { Vec::new() };
        let (fresh, reused) = top_up(&mut plain, tab, s, bounds, &mut pool);
        wanted = wanted.max(fresh);
        if valid_through(&plain, schedule, r + 1) {
            let better = best.as_ref().map_or(true, |(b, _)| plain.votes() < b.votes());
            if better {
                best = Some((plain, reused));
            }
        }
    }
    (best, wanted)
}

fn valid_through(draft: &Draft<'_>, schedule: &[ScheduledRound], upto: usize) -> bool {
    matches!(draft.replay(schedule, upto), Replay::Reached(_))
}

/// Longest chain of departed candidates a bridging ballot passes through.
const MAX_BRIDGE_CHAIN: usize = 3;

/// Restarts the allocation with `j` seed ballots `[p.., s]`, where every
/// `p` left the count before round `r` and `s` must win round `r`, so the
/// seeded weight reaches `s` only once the chain is gone. Every chain and
/// every `j` up to `fresh` is tried and the cheapest complete allocation kept.
fn bridged<'a>(
    initial: &Draft<'a>,
    schedule: &[ScheduledRound],
    r: usize,
    fresh: u64,
    depth: usize,
) -> Solved<'a> {
    let s = schedule[r].candidate;
    let departed: Vec<CandidateIdx> = schedule[..r].iter().map(|x| x.candidate).collect();
    let mut best: Option<(Draft<'a>, Vec<RoundSlack>)> = None;
    for mut chain in chains(&departed, MAX_BRIDGE_CHAIN) {
        chain.push(s);
        for j in 1..=fresh {
            let floor = initial.votes() + j;
            if best.as_ref().is_some_and(|(b, _)| floor >= b.votes()) {
                break;
            }
            let mut seeded = initial.clone();
            seeded.push(chain.clone(), j);
            if let Ok((d, slacks)) = solve(seeded, schedule, depth + 1) {
                if best.as_ref().map_or(true, |(b, _)| d.votes() < b.votes()) {
                    best = Some((d, slacks));
                }
            }
        }
    }
    best.ok_or_else(|| format!("round {}: no bridging keeps earlier rounds", r + 1))
}

/// Non-empty arrangements of at most `max_len` distinct items, shortest first.
fn chains(items: &[CandidateIdx], max_len: usize) -> Vec<Vec<CandidateIdx>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<CandidateIdx>> = vec![Vec::new()];
    for _ in 0..max_len.min(items.len()) {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &c in items {
                if !prefix.contains(&c) {
                    let mut p = prefix.clone();
                    p.push(c);
                    out.push(p.clone());
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

/// The cheapest plan reaching `target` with at most `max_budget` added
/// ballots, padding included.
///
/// The quota only changes when the total crosses a multiple of `seats + 1`,
/// so every distinct quota level within the budget is tried once; the scan
/// stops as soon as the smallest budget of the next level cannot beat the
/// best cost found.
pub fn optimize_budget(
    ballots: &WeightedBallotSet,
    target: &Structure,
    max_budget: u64,
    config: &ElectionConfig,
) -> Result<StrategyPlan> {
    let levels = quota_levels(ballots, config, max_budget);
    let mut best: Option<StrategyPlan> = None;
    for (lo, hi, quota) in levels {
        if let Some(b) = &best {
            if lo >= b.cost() {
                break;
            }
        }
        let res = allocate_at_quota(ballots, target, quota, config)?;
        if !res.feasible || res.votes_used > hi {
            continue;
        }
        let cost = res.votes_used.max(lo);
        let plan = res.plan.with_padding(cost - res.votes_used);
        if replay_with_additions(ballots, &plan, config)?.structure() != *target {
            debug!("plan at quota level [{lo},{hi}] failed replay");
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => plan.cost() < b.cost(),
        };
        if better {
            best = Some(plan);
        }
    }
    let bound = best.as_ref().map_or(max_budget.saturating_add(1), |b| b.cost());
    if bound >= 2 {
        if let Some(plan) = refine_small(ballots, target, (bound - 1).min(max_budget), config)? {
            best = Some(plan);
        }
    }
    best.ok_or(Error::Infeasible { budget: max_budget })
}

/// Most replays [`refine_small`] may spend on one target.
const REFINE_LIMIT: u128 = 30_000;

/// Longest prefix of departed candidates in a refinement ballot.
const REFINE_PREFIX: usize = 2;

/// Ballots ending at some candidate `x` whose earlier entries all leave the
/// count before `x` does in `target`, with at most [`REFINE_PREFIX`] of them.
fn refinement_types(target: &Structure) -> Vec<RankedBallot> {
    let schedule = target.schedule();
    let mut types = Vec::new();
    for (r, step) in schedule.iter().enumerate() {
        let earlier: Vec<CandidateIdx> = schedule[..r].iter().map(|s| s.candidate).collect();
        types.push(RankedBallot(vec![step.candidate]));
        for mut chain in chains(&earlier, REFINE_PREFIX) {
            chain.push(step.candidate);
            types.push(RankedBallot(chain));
        }
    }
    types
}

fn multiset_count(types: usize, size: u64) -> u128 {
    // C(types + size - 1, size), saturating.
    let mut acc = 1u128;
    for i in 0..size as u128 {
        acc = acc.saturating_mul(types as u128 + i) / (i + 1);
    }
    acc
}

/// Cheapest plan of at most `max_cost` ballots over [`refinement_types`]
/// and padding that reaches `target`, or `None` when there is none or the
/// search would exceed [`REFINE_LIMIT`] replays.
fn refine_small(
    ballots: &WeightedBallotSet,
    target: &Structure,
    max_cost: u64,
    config: &ElectionConfig,
) -> Result<Option<StrategyPlan>> {
    let types = refinement_types(target);
    let mut work = 0u128;
    for size in 0..=max_cost {
        let paddings = (max_cost - size + 1) as u128;
        work = work.saturating_add(multiset_count(types.len(), size).saturating_mul(paddings));
    }
    if work > REFINE_LIMIT {
        return Ok(None);
    }
    for cost in 0..=max_cost {
        let mut found = None;
        for size in 0..=cost {
            let padding = cost - size;
            let mut picks = vec![0usize; size as usize];
            loop {
                let mut plan = StrategyPlan::empty();
                for &t in &picks {
                    plan.add(types[t].clone(), 1);
                }
                plan.padding = padding;
                if replay_with_additions(ballots, &plan, config)?.structure() == *target {
                    found = Some(plan);
                    break;
                }
                if !next_multiset(&mut picks, types.len()) {
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Advances `picks` (non-decreasing indices below `types`) to the next
/// multiset; false once every multiset of this size has been visited.
fn next_multiset(picks: &mut [usize], types: usize) -> bool {
    let Some(i) = picks.iter().rposition(|&p| p + 1 < types) else {
        return false;
    };
    let v = picks[i] + 1;
    for p in &mut picks[i..] {
        *p = v;
    }
    true
}

/// Budget ranges `[lo, hi]` within `0..=max_budget` sharing one quota.
pub fn quota_levels(
    ballots: &WeightedBallotSet,
    config: &ElectionConfig,
    max_budget: u64,
) -> Vec<(u64, u64, Quota)> {
    if let Some(q) = &config.quota_override {
        return vec![(0, max_budget, Quota(q.clone()))];
    }
    let total = ballots.total_weight();
    let seats = BigInt::from(config.seats as u64 + 1);
    let mut out = Vec::new();
    let mut lo = 0u64;
    while lo <= max_budget {
        let t = &total + int(lo as i64);
        let q = droop_quota(&t, config.seats);
        // Next budget at which floor(total / (seats + 1)) increases.
        let floor_total = t.floor().to_integer();
        let next_multiple = (floor_total.div_floor(&seats) + BigInt::one()) * &seats;
        let step = (Weight::from_integer(next_multiple) - &t).ceil().to_integer();
        let step = step.to_u64().unwrap_or(u64::MAX).max(1);
        let hi = lo.saturating_add(step - 1).min(max_budget);
        out.push((lo, hi, q));
        if hi == u64::MAX {
            break;
        }
        lo = hi + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_election;

    fn sf() -> (WeightedBallotSet, ElectionConfig) {
        let set = WeightedBallotSet::from_rows(
            &["E", "M", "N"],
            &[
                (&["E", "M", "N"], 5237),
                (&["E", "N", "M"], 3316),
                (&["E"], 5566),
                (&["M", "E", "N"], 4050),
                (&["M", "N", "E"], 5708),
                (&["M"], 1894),
                (&["N", "E", "M"], 2251),
                (&["N", "M", "E"], 6909),
                (&["N"], 1695),
            ],
        )
        .unwrap();
        let cfg = ElectionConfig::new(1, 3).with_tie_break(vec![1, 0, 2]);
        (set, cfg)
    }

    #[test]
    fn current_structure_costs_nothing() {
        let (set, cfg) = sf();
        let current = run_election(&set, &cfg).unwrap().structure();
        let res = smart_allocate(&set, &current, 500, &cfg).unwrap();
        assert!(res.feasible);
        assert!(res.plan.is_empty());
        let plan = optimize_budget(&set, &current, 0, &cfg).unwrap();
        assert_eq!(plan.cost(), 0);
    }

    #[test]
    fn spoiler_route() {
        let (set, cfg) = sf();
        let target = Structure::from_ids(&set, &["E", "N", "M"], "L,L,W").unwrap();
        let res = smart_allocate(&set, &target, 798, &cfg).unwrap();
        assert!(res.feasible);
        assert_eq!(res.plan, StrategyPlan::single(RankedBallot(vec![2]), 798));
    }

    #[test]
    fn selfish_route() {
        let (set, cfg) = sf();
        let target = Structure::from_ids(&set, &["E", "M", "N"], "L,L,W").unwrap();
        let res = smart_allocate(&set, &target, 2192, &cfg).unwrap();
        assert!(res.feasible);
        assert_eq!(res.plan, StrategyPlan::single(RankedBallot(vec![0]), 2192));
    }

    #[test]
    fn quota_levels_cover_range() {
        let (set, cfg) = sf();
        let levels = quota_levels(&set, &cfg, 10);
        assert_eq!(levels.first().unwrap().0, 0);
        assert_eq!(levels.last().unwrap().1, 10);
        for w in levels.windows(2) {
            assert_eq!(w[0].1 + 1, w[1].0);
            assert!(w[0].2 < w[1].2);
        }
    }
}
