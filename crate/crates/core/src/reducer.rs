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

//! Instance reduction under a budget of `B` added ballots.
//!
//! A bottom group of candidates can be dropped when, whatever `B` ballots are
//! added, its members are all eliminated before anyone reaches the quota.
//! Because no surplus has moved by then, the remaining count is the same as
//! that of the instance with the group deleted from every ballot.

use crate::allocator::StrategyPlan;
use crate::engine::{RoundKind, Tabulator};
use crate::error::Result;
use crate::model::{
    compute_quota, int, CandidateIdx, ElectionConfig, Quota, RankedBallot, Weight,
    WeightedBallotSet,
};
use log::debug;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Weight each member of `l` collects from ballots whose first choice lies
/// in `l`, counting a ballot for a member only if it ranks that member
/// before every candidate of `g`.
pub fn strict_support(
    ballots: &WeightedBallotSet,
    l: &[CandidateIdx],
    g: &[CandidateIdx],
) -> BTreeMap<CandidateIdx, Weight> {
    let mut out: BTreeMap<CandidateIdx, Weight> = l.iter().map(|&c| (c, Weight::zero())).collect();
    for (ballot, w) in ballots.iter() {
        let Some(first) = ballot.first() else { continue };
        if !l.contains(&first) || !w.is_positive() {
            continue;
        }
        for &c in ballot.ranking() {
            if g.contains(&c) {
                break;
            }
            if let Some(s) = out.get_mut(&c) {
                *s += w;
            }
        }
    }
    out
}


/// Deletes the members of `removed` from every ballot. Ballots left empty
/// are kept as exhausted weight, so the total (and with it the quota) is
/// unchanged.
pub fn reduce_ballots(ballots: &WeightedBallotSet, removed: &[CandidateIdx]) -> WeightedBallotSet {
    let keep: Vec<CandidateIdx> = (0..ballots.num_candidates())
        .filter(|c| !removed.contains(c))
        .collect();
    ballots.restrict(&keep)
}

/// Which removal test [`remove_irrelevant_with`] applies to a bottom group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RemovalRule {
    /// Enumerates every partial elimination of the group and checks that a
    /// group member is always strictly last and nobody can reach the quota.
    Exhaustive,
    /// The closed-form pairwise test `B + S[i] < S_j^i[j] < Q` built from
    /// strict supports. Kept for comparison; it can remove candidates that
    /// a suitable addition would rescue.
    Pairwise,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReduceOptions {
    pub rule: RemovalRule,
    /// When the whole bottom group fails, also try it without its member of
    /// highest strict support.
    pub aggressive: bool,
    /// Largest group the exhaustive rule examines.
    pub max_group: usize,
    /// Original indices that must survive; groups stop growing before them.
    pub protect: Vec<CandidateIdx>,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            rule: RemovalRule::Exhaustive,
            aggressive: false,
            max_group: 14,
            protect: Vec::new(),
        }
    }
}

/// A removed group and the smallest gap by which it passed its test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RemovedGroup {
    /// Original candidate indices.
    pub candidates: Vec<CandidateIdx>,
    #[serde(serialize_with = "crate::io::ser_weight")]
    pub margin: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    /// Candidates that already had a quota before any addition, in the order
    /// they win. Their surpluses are moved before removal is attempted.
    pub pre_resolved: Vec<CandidateIdx>,
    pub removed: Vec<RemovedGroup>,
    /// Original indices of the remaining candidates; position `i` here is
    /// index `i` of `surviving_ballots`.
    pub survivors: Vec<CandidateIdx>,
    pub surviving_ballots: WeightedBallotSet,
    /// Configuration for `surviving_ballots`: tie-break restricted to the
    /// survivors and, after pre-resolution, fewer seats and a pinned quota.
    pub config: ElectionConfig,
    pub budget: u64,
    pub quota: Quota,
}

impl ReductionReport {
    pub fn removed_count(&self) -> usize {
        self.removed.iter().map(|g| g.candidates.len()).sum()
    }

    /// Index in `surviving_ballots` of an original candidate.
    pub fn reduced_index(&self, original: CandidateIdx) -> Option<CandidateIdx> {
        self.survivors.iter().position(|&c| c == original)
    }

    /// Maps an addition plan over the original candidates onto the reduced
    /// instance, dropping removed and pre-resolved candidates from every
    /// ballot.
    pub fn project_plan(&self, plan: &StrategyPlan) -> StrategyPlan {
        let mut out = StrategyPlan::empty().with_padding(plan.padding);
        for (ballot, &count) in &plan.additions {
            let ranking: Vec<CandidateIdx> = ballot
                .ranking()
                .iter()
                .filter_map(|&c| self.reduced_index(c))
                .collect();
            out.add(RankedBallot(ranking), count);
        }
        out
    }

    /// Maps a plan over the reduced instance back to original indices.
    pub fn lift_plan(&self, plan: &StrategyPlan) -> StrategyPlan {
        let mut out = StrategyPlan::empty().with_padding(plan.padding);
        for (ballot, &count) in &plan.additions {
            let ranking = ballot.ranking().iter().map(|&c| self.survivors[c]).collect();
            out.add(RankedBallot(ranking), count);
        }
        out
    }
}

/// [`remove_irrelevant_with`] under the default options.
pub fn remove_irrelevant(
    ballots: &WeightedBallotSet,
    budget: u64,
    config: &ElectionConfig,
) -> Result<ReductionReport> {
    remove_irrelevant_with(ballots, budget, config, &ReduceOptions::default())
}

/// Repeatedly grows a group from the bottom of the first-choice ranking and
/// removes it as soon as it passes the configured test, restarting after
/// every removal. The quota is that of the instance without additions,
/// which is the smallest quota any budget can produce.
pub fn remove_irrelevant_with(
    ballots: &WeightedBallotSet,
    budget: u64,
    config: &ElectionConfig,
    options: &ReduceOptions,
) -> Result<ReductionReport> {
    let n = ballots.num_candidates();
    config.validate(n)?;
    let quota = compute_quota(ballots, config)?;
    let q = quota.value().clone();
    let b = int(budget as i64);

    let (pre_resolved, mut current, mut survivors) = pre_resolve(ballots, config, &quota);
    let mut removed = Vec::new();
    let rank = config.tie_rank(n);

    loop {
        let fc = current.first_choice_totals();
        let mut order: Vec<CandidateIdx> = (0..current.num_candidates()).collect();
        // Ascending first choices; among equals the less favoured first.
        order.sort_by(|&x, &y| {
            fc[x]
                .cmp(&fc[y])
                .then_with(|| rank[survivors[y]].cmp(&rank[survivors[x]]))
        });
        let mut group: Vec<CandidateIdx> = Vec::new();
        let mut support: BTreeMap<CandidateIdx, Weight> = BTreeMap::new();
        let mut hit: Option<(Vec<CandidateIdx>, Weight)> = None;
        for &c in order.iter().take(order.len().saturating_sub(1)) {
            if support.values().any(|s| &b + s >= q) {
                break;
            }
            if options.protect.contains(&survivors[c]) {
                break;
            }
            group.push(c);
            let rest: Vec<CandidateIdx> = order.iter().copied().filter(|x| !group.contains(x)).collect();
            support = strict_support(&current, &group, &rest);
            if let Some(m) = group_margin(&current, &group, &b, &q, options) {
                hit = Some((group.clone(), m));
                break;
            }
            if options.aggressive && group.len() >= 2 {
                let top = support
                    .iter()
                    .max_by(|x, y| x.1.cmp(y.1).then_with(|| rank[survivors[*y.0]].cmp(&rank[survivors[*x.0]])))
                    .map(|(c, _)| *c)
                    .expect("group is non-empty");
                let smaller: Vec<CandidateIdx> = group.iter().copied().filter(|&x| x != top).collect();
                if let Some(m) = group_margin(&current, &smaller, &b, &q, options) {
                    hit = Some((smaller, m));
                    break;
                }
            }
        }
        let Some((group, margin)) = hit else { break };
        let original: Vec<CandidateIdx> = group.iter().map(|&c| survivors[c]).collect();
        debug!("removing {:?} with margin {}", original, margin);
        current = reduce_ballots(&current, &group);
        survivors.retain(|c| !original.contains(c));
        let mut sorted = original;
        sorted.sort_unstable();
        removed.push(RemovedGroup {
            candidates: sorted,
            margin,
        });
    }

    let mut reduced_config = config.restrict(&survivors);
    if !pre_resolved.is_empty() {
        reduced_config.seats = config.seats.saturating_sub(pre_resolved.len()).max(1);
        reduced_config.quota_override = Some(q.clone());
    }
    Ok(ReductionReport {
        pre_resolved,
        removed,
        survivors,
        surviving_ballots: current,
        config: reduced_config,
        budget,
        quota,
    })
}

/// Resolves every candidate that holds a quota before any elimination and
/// returns the winners, the remaining ballots (carried weights, exhausted
/// weight kept as empty ballots) and the original indices of the rest.
fn pre_resolve(
    ballots: &WeightedBallotSet,
    config: &ElectionConfig,
    quota: &Quota,
) -> (Vec<CandidateIdx>, WeightedBallotSet, Vec<CandidateIdx>) {
    let n = ballots.num_candidates();
    let mut tab = Tabulator::new(ballots, config, quota.clone());
    let mut winners = Vec::new();
    while tab.active_count() > 1 {
        match tab.next_decision() {
            Some((c, RoundKind::QuotaWin)) => {
                tab.resolve(c, RoundKind::QuotaWin);
                winners.push(c);
            }
            _ => break,
        }
    }
    let all: Vec<CandidateIdx> = (0..n).collect();
    if winners.is_empty() {
        return (winners, ballots.clone(), all);
    }
    let mut state = WeightedBallotSet::new(ballots.candidates().to_vec()).expect("same candidates");
    for c in tab.active_candidates() {
        for &id in tab.pile(c) {
            let ranking: Vec<CandidateIdx> = tab
                .ranking(id)
                .iter()
                .copied()
                .filter(|&x| tab.is_active(x))
                .collect();
            state
                .add(RankedBallot(ranking), tab.carried(id).clone())
                .expect("carried weights are non-negative");
        }
    }
    state
        .add(RankedBallot::empty(), tab.exhausted().clone())
        .expect("exhausted weight is non-negative");
    let keep = tab.active_candidates();
    (winners, state.restrict(&keep), keep)
}

/// Tests one bottom group, returning the smallest slack by which it passes.
fn group_margin(
    ballots: &WeightedBallotSet,
    group: &[CandidateIdx],
    b: &Weight,
    q: &Weight,
    options: &ReduceOptions,
) -> Option<Weight> {
    let n = ballots.num_candidates();
    let rest: Vec<CandidateIdx> = (0..n).filter(|c| !group.contains(c)).collect();
    if group.is_empty() || rest.is_empty() {
        return None;
    }
    match options.rule {
        RemovalRule::Pairwise => pairwise_margin(ballots, group, &rest, b, q),
        RemovalRule::Exhaustive if group.len() <= options.max_group => {
            exhaustive_margin(ballots, group, &rest, b, q)
        }
        RemovalRule::Exhaustive => None,
    }
}

fn pairwise_margin(
    ballots: &WeightedBallotSet,
    group: &[CandidateIdx],
    rest: &[CandidateIdx],
    b: &Weight,
    q: &Weight,
) -> Option<Weight> {
    let s = strict_support(ballots, group, rest);
    let mut margin: Option<Weight> = None;
    for &i in group {
        let upper = b + &s[&i];
        for &j in rest {
            let mut l: Vec<CandidateIdx> = group.iter().copied().filter(|&x| x != i).collect();
            l.push(j);
            let sj = strict_support(ballots, &l, &[])[&j].clone();
            if !(upper < sj && &sj < q) {
                return None;
            }
            let gap = sj - &upper;
            margin = Some(margin.map_or(gap.clone(), |m| m.min(gap)));
        }
    }
    margin
}

/// Walks every set `E` of already-eliminated group members. With `E` gone
/// and everyone else still in, each ballot sits with its first remaining
/// choice. Added ballots can raise any tally by at most `B`; they can never
/// lower one. The group is removable when in every state some remaining
/// member, even after all `B` ballots, is strictly below every non-member,
/// and no tally plus `B` reaches the quota.
fn exhaustive_margin(
    ballots: &WeightedBallotSet,
    group: &[CandidateIdx],
    rest: &[CandidateIdx],
    b: &Weight,
    q: &Weight,
) -> Option<Weight> {
    let n = ballots.num_candidates();
    let entries: Vec<(&[CandidateIdx], &Weight)> = ballots
        .iter()
        .filter(|(r, w)| !r.is_empty() && w.is_positive())
        .map(|(r, w)| (r.ranking(), w))
        .collect();
    let mut margin: Option<Weight> = None;
    let g = group.len();
    for mask in 0u64..((1u64 << g) - 1) {
        let mut out = vec![false; n];
        for (bit, &c) in group.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                out[c] = true;
            }
        }
        let mut hold = vec![Weight::zero(); n];
        for (ranking, w) in &entries {
            if let Some(&c) = ranking.iter().find(|&&c| !out[c]) {
                hold[c] += *w;
            }
        }
        if (0..n).any(|c| !out[c] && &(&hold[c] + b) >= q) {
            return None;
        }
        let low = group
            .iter()
            .filter(|&&c| !out[c])
            .map(|&c| &hold[c] + b)
            .min()
            .expect("mask leaves a member");
        let floor = rest.iter().map(|&c| hold[c].clone()).min().expect("rest non-empty");
        if low >= floor {
            return None;
        }
        let gap = floor - low;
        margin = Some(margin.map_or(gap.clone(), |m| m.min(gap)));
    }
    margin
}

/// Bounds that prune the sequences worth searching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceBounds {
    /// No outcome has more quota wins than this.
    pub max_wins: usize,
    /// Every outcome starts with at least this many eliminations.
    pub min_initial_losses: usize,
}

pub fn sequence_bounds(
    ballots: &WeightedBallotSet,
    budget: u64,
    config: &ElectionConfig,
) -> Result<SequenceBounds> {
    Ok(SequenceBounds {
        max_wins: predict_wins(ballots, budget, config)?,
        min_initial_losses: predict_losses(ballots, budget, config)?,
    })
}

/// Upper bound on the number of quota wins after adding up to `budget`
/// ballots. Only candidates whose full support plus the budget reaches the
/// quota can win, and every win retains a full quota of distinct ballot
/// weight.
pub fn predict_wins(ballots: &WeightedBallotSet, budget: u64, config: &ElectionConfig) -> Result<usize> {
    let n = ballots.num_candidates();
    let q = compute_quota(ballots, config)?.0;
    let b = int(budget as i64);
    let all: Vec<CandidateIdx> = (0..n).collect();
    let full = strict_support(ballots, &all, &[]);
    let capable: Vec<CandidateIdx> = all.iter().copied().filter(|c| &full[c] + &b >= q).collect();
    let mut seen: Vec<CandidateIdx> = Vec::new();
    let mut reaching = Weight::zero();
    for &c in &capable {
        reaching += &strict_support(ballots, &all, &seen)[&c];
        seen.push(c);
    }
    if !q.is_positive() {
        return Ok(config.seats.min(n));
    }
    let wins = ((reaching + b) / &q).floor().to_integer();
    let wins = crate::model::to_u64_saturating(&wins) as usize;
    Ok(wins.min(config.seats))
}

/// Lower bound on the number of eliminations before the first quota win,
/// capped at `n - 1`.
///
/// Before any win, a candidate's tally is its own first choices plus whatever
/// the eliminated candidates' ballots pass on, plus at most `budget` added
/// ballots. Each eliminated candidate passes on no more than the weight of
/// its first-choice ballots that rank someone else. Round `j + 1` is
/// therefore certainly an elimination while, for every candidate, first
/// choices plus the budget plus the `j` largest such amounts of the others
/// stay below the quota.
pub fn predict_losses(ballots: &WeightedBallotSet, budget: u64, config: &ElectionConfig) -> Result<usize> {
    let n = ballots.num_candidates();
    if n <= 1 {
        return Ok(0);
    }
    let q = compute_quota(ballots, config)?.0;
    let b = int(budget as i64);
    let fc = ballots.first_choice_totals();
    let mut passing = vec![Weight::zero(); n];
    for (ballot, w) in ballots.iter() {
        if ballot.len() >= 2 {
            passing[ballot.ranking()[0]] += w;
        }
    }
    let mut losses = 0;
    'rounds: for j in 0..n - 1 {
        for (c, first) in fc.iter().enumerate() {
            let mut others: Vec<&Weight> = (0..n).filter(|&x| x != c).map(|x| &passing[x]).collect();
            others.sort_unstable_by(|x, y| y.cmp(x));
            let inflow: Weight = others.into_iter().take(j).sum();
            if first + &b + inflow >= q {
                break 'rounds;
            }
        }
        losses = j + 1;
    }
    Ok(losses)
}

/// The bound computed exactly as the published procedure states it: the
/// transferable weight of the definitely-losing candidates is stacked onto
/// the leading first-choice tally without the budget. It is not safe in
/// general; [`predict_losses`] is.
pub fn predict_losses_published(
    ballots: &WeightedBallotSet,
    budget: u64,
    config: &ElectionConfig,
) -> Result<usize> {
    let n = ballots.num_candidates();
    if n <= 1 {
        return Ok(0);
    }
    let q = compute_quota(ballots, config)?.0;
    let b = int(budget as i64);
    let mut fc = ballots.first_choice_totals();
    let all: Vec<CandidateIdx> = (0..n).collect();
    let full = strict_support(ballots, &all, &[]);
    fc.sort_unstable_by(|x, y| y.cmp(x));
    let kth = fc[(config.seats - 1).min(n - 1)].clone();
    let losing: Vec<CandidateIdx> = all.iter().copied().filter(|c| &full[c] + &b < kth).collect();
    let outside: Vec<CandidateIdx> = all.iter().copied().filter(|c| !losing.contains(c)).collect();
    let mut t: Vec<Weight> = losing
        .iter()
        .map(|&c| {
            ballots
                .iter()
                .filter(|(r, _)| r.first() == Some(c) && r.ranking().iter().any(|x| outside.contains(x)))
                .fold(Weight::zero(), |acc, (_, w)| acc + w)
        })
        .collect();
    t.sort_unstable_by(|x, y| y.cmp(x));
    let mut i_l = 1;
    while i_l < n - 1 {
        let stacked: Weight = t.iter().take(i_l).sum();
        if stacked + &fc[0] >= q {
            break;
        }
        i_l += 1;
    }
    Ok(i_l)
}
