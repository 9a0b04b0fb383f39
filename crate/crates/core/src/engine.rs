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

//! Round-by-round STV tabulation.
//!
//! Exactly one candidate is resolved per round. If some active candidate
//! holds at least a quota, the highest such tally wins and takes the
//! topmost open slot of the order; its surplus moves on with every
//! contributing ballot scaled by `(tally - quota) / tally`. Otherwise the
//! lowest active candidate is eliminated into the bottommost open slot and
//! its ballots move on at full carried weight. The last remaining candidate
//! fills the one slot left.

use crate::allocator::StrategyPlan;
use crate::error::{Error, Result};
use crate::model::{compute_quota, CandidateIdx, ElectionConfig, Quota, Weight, WeightedBallotSet};
use crate::structure::{Label, Sequence, Structure};
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// How a round resolved its candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RoundKind {
    QuotaWin,
    Elimination,
    FinalPlacement,
}

/// Audit record of one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundOutcome {
    /// 1-based round number.
    pub round_index: usize,
    pub resolved: CandidateIdx,
    pub kind: RoundKind,
    /// 0-based slot in the final order taken by `resolved`.
    pub position: usize,
    /// Tallies of every active candidate at the start of the round.
    pub tallies_before: BTreeMap<CandidateIdx, Weight>,
    /// Fraction of each carried weight passed on after a quota win.
    pub surplus_fraction: Option<Weight>,
    /// `tally - quota` for wins and final placements, `second lowest -
    /// lowest` for eliminations.
    pub margin: Weight,
    /// Weight received by each continuing candidate at the end of the round.
    pub transfers: BTreeMap<CandidateIdx, Weight>,
    /// Weight that found no continuing candidate at the end of the round.
    pub exhausted: Weight,
}

impl RoundOutcome {
    pub fn label(&self) -> Label {
        match self.kind {
            RoundKind::Elimination => Label::L,
            RoundKind::QuotaWin | RoundKind::FinalPlacement => Label::W,
        }
    }
}

/// Full result of a tabulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionOutcome {
    pub order: Vec<CandidateIdx>,
    pub sequence: Sequence,
    pub rounds: Vec<RoundOutcome>,
    pub winners: Vec<CandidateIdx>,
    pub quota: Quota,
    pub total: Weight,
}

impl ElectionOutcome {
    pub fn structure(&self) -> Structure {
        Structure {
            order: self.order.clone(),
            sequence: self.sequence.clone(),
        }
    }

    /// 0-based position of `c` in the order.
    pub fn position_of(&self, c: CandidateIdx) -> usize {
        self.order
            .iter()
            .position(|&x| x == c)
            .expect("candidate appears in the order")
    }

    pub fn quota_wins(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| r.kind == RoundKind::QuotaWin)
            .count()
    }

    /// The round in which `c` was resolved.
    pub fn round_of(&self, c: CandidateIdx) -> &RoundOutcome {
        self.rounds
            .iter()
            .find(|r| r.resolved == c)
            .expect("every candidate is resolved once")
    }
}

/// `share * (tally - quota) / tally`: the part of a contributing share that
/// moves on after a quota win.
pub fn transfer_surplus(tally: &Weight, quota: &Quota, share: &Weight) -> Result<Weight> {
    if tally.is_zero() {
        return Err(Error::Data("surplus transfer from a zero tally".into()));
    }
    Ok(share * (tally - quota.value()) / tally)
}

/// Incremental tabulation state.
///
/// [`run_election`] drives it with the normal decision rule; the allocator
/// drives it along a target structure instead.
#[derive(Clone, Debug)]
pub struct Tabulator {
    quota: Quota,
    tie_rank: Vec<usize>,
    rankings: Vec<Vec<CandidateIdx>>,
    carried: Vec<Weight>,
    cursor: Vec<usize>,
    piles: Vec<Vec<usize>>,
    tally: Vec<Weight>,
    active: Vec<bool>,
    active_count: usize,
    exhausted: Weight,
    retired: Weight,
    total: Weight,
    slots: Vec<Option<CandidateIdx>>,
    top: usize,
    bottom: usize,
    rounds: Vec<RoundOutcome>,
}

impl Tabulator {
    pub fn new(ballots: &WeightedBallotSet, config: &ElectionConfig, quota: Quota) -> Tabulator {
        let entries: Vec<(Vec<CandidateIdx>, Weight)> = ballots
            .iter()
            .map(|(b, w)| (b.ranking().to_vec(), w.clone()))
            .collect();
        Tabulator::from_entries(ballots.num_candidates(), entries, config, quota)
    }

    pub fn from_entries(
        n: usize,
        entries: Vec<(Vec<CandidateIdx>, Weight)>,
        config: &ElectionConfig,
        quota: Quota,
    ) -> Tabulator {
        let mut tab = Tabulator {
            quota,
            tie_rank: config.tie_rank(n),
            rankings: Vec::with_capacity(entries.len()),
            carried: Vec::with_capacity(entries.len()),
            cursor: Vec::with_capacity(entries.len()),
            piles: vec![Vec::new(); n],
            tally: vec![Weight::zero(); n],
            active: vec![true; n],
            active_count: n,
            exhausted: Weight::zero(),
            retired: Weight::zero(),
            total: Weight::zero(),
            slots: vec![None; n],
            top: 0,
            bottom: n,
            rounds: Vec::with_capacity(n),
        };
        for (ranking, weight) in entries {
            let id = tab.rankings.len();
            tab.total += &weight;
            tab.rankings.push(ranking);
            tab.carried.push(weight);
            tab.cursor.push(0);
            tab.place(id, None);
        }
        tab
    }

    /// Moves ballot `id` to its next active preference, starting at its
    /// cursor, or to the exhausted pile.
    fn place(&mut self, id: usize, transfers: Option<&mut BTreeMap<CandidateIdx, Weight>>) {
        let ranking = &self.rankings[id];
        let mut pos = self.cursor[id];
        while pos < ranking.len() && !self.active[ranking[pos]] {
            pos += 1;
        }
        self.cursor[id] = pos;
        let w = &self.carried[id];
        if pos < ranking.len() {
            let c = ranking[pos];
            self.tally[c] += w;
            self.piles[c].push(id);
            if let Some(t) = transfers {
                *t.entry(c).or_insert_with(Weight::zero) += w;
            }
        } else {
            self.exhausted += w;
        }
    }

    pub fn quota(&self) -> &Quota {
        &self.quota
    }

    pub fn n(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, c: CandidateIdx) -> bool {
        self.active[c]
    }

    pub fn active_candidates(&self) -> Vec<CandidateIdx> {
        (0..self.active.len()).filter(|&c| self.active[c]).collect()
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn tally(&self, c: CandidateIdx) -> &Weight {
        &self.tally[c]
    }

    pub fn tallies(&self) -> &[Weight] {
        &self.tally
    }

    pub fn exhausted(&self) -> &Weight {
        &self.exhausted
    }

    /// Weight held by resolved winners: a quota per quota win, plus the
    /// whole pile of a final placement.
    pub fn retired(&self) -> &Weight {
        &self.retired
    }

    pub fn total(&self) -> &Weight {
        &self.total
    }

    pub fn active_weight(&self) -> Weight {
        (0..self.active.len())
            .filter(|&c| self.active[c])
            .fold(Weight::zero(), |acc, c| acc + &self.tally[c])
    }

    pub fn rounds(&self) -> &[RoundOutcome] {
        &self.rounds
    }

    pub fn is_finished(&self) -> bool {
        self.active_count == 0
    }

    /// Ballot indices currently held by `c`.
    pub fn pile(&self, c: CandidateIdx) -> &[usize] {
        &self.piles[c]
    }

    pub fn carried(&self, id: usize) -> &Weight {
        &self.carried[id]
    }

    pub fn ranking(&self, id: usize) -> &[CandidateIdx] {
        &self.rankings[id]
    }

    /// `Greater` when `a` ranks above `b`: higher tally, then tie-break.
    pub fn compare(&self, a: CandidateIdx, b: CandidateIdx) -> Ordering {
        self.tally[a]
            .cmp(&self.tally[b])
            .then_with(|| self.tie_rank[b].cmp(&self.tie_rank[a]))
    }

    /// True when the tie-break favours `a` over `b`.
    pub fn favoured(&self, a: CandidateIdx, b: CandidateIdx) -> bool {
        self.tie_rank[a] < self.tie_rank[b]
    }

    /// Active candidate the normal rule would resolve next, and how.
    pub fn next_decision(&self) -> Option<(CandidateIdx, RoundKind)> {
        let active = self.active_candidates();
        if active.is_empty() {
            return None;
        }
        let q = self.quota.value();
        if active.len() == 1 {
            let c = active[0];
            let kind = if &self.tally[c] >= q {
                RoundKind::QuotaWin
            } else {
                RoundKind::FinalPlacement
            };
            return Some((c, kind));
        }
        let top = active
            .iter()
            .copied()
            .filter(|&c| &self.tally[c] >= q)
            .max_by(|&a, &b| self.compare(a, b));
        if let Some(w) = top {
            return Some((w, RoundKind::QuotaWin));
        }
        let low = active
            .iter()
            .copied()
            .min_by(|&a, &b| self.compare(a, b))
            .expect("at least two active candidates");
        Some((low, RoundKind::Elimination))
    }

    /// Resolves `c` in the next round. `QuotaWin` passes the surplus on,
    /// `Elimination` passes everything on, `FinalPlacement` passes nothing.
    /// The caller is responsible for the choice being legal.
    pub fn resolve(&mut self, c: CandidateIdx, kind: RoundKind) {
        assert!(self.active[c], "candidate is not active");
        let tallies_before: BTreeMap<CandidateIdx, Weight> = self
            .active_candidates()
            .into_iter()
            .map(|x| (x, self.tally[x].clone()))
            .collect();
        let tally = self.tally[c].clone();
        let q = self.quota.value().clone();
        let mut margin = &tally - &q;
        let mut surplus_fraction = None;
        let position;
        match kind {
            RoundKind::Elimination => {
                self.bottom -= 1;
                position = self.bottom;
                margin = self
                    .active_candidates()
                    .into_iter()
                    .filter(|&x| x != c)
                    .map(|x| &self.tally[x] - &tally)
                    .min()
                    .unwrap_or_else(Weight::zero);
            }
            RoundKind::QuotaWin => {
                position = self.top;
                self.top += 1;
            }
            RoundKind::FinalPlacement => {
                position = self.top;
                self.top += 1;
            }
        }
        self.slots[position] = Some(c);
        self.active[c] = false;
        self.active_count -= 1;
        let pile = std::mem::take(&mut self.piles[c]);
        self.tally[c] = Weight::zero();
        let exhausted_before = self.exhausted.clone();
        let mut transfers = BTreeMap::new();
        match kind {
            RoundKind::Elimination => {
                for id in pile {
                    self.place(id, Some(&mut transfers));
                }
            }
            RoundKind::QuotaWin => {
                let fraction = if tally.is_positive() {
                    (&tally - &q) / &tally
                } else {
                    Weight::zero()
                };
                self.retired += &q;
                for id in pile {
                    self.carried[id] = &self.carried[id] * &fraction;
                    self.place(id, Some(&mut transfers));
                }
                surplus_fraction = Some(fraction);
            }
            RoundKind::FinalPlacement => {
                self.retired += &tally;
            }
        }
        let exhausted = &self.exhausted - &exhausted_before;
        self.rounds.push(RoundOutcome {
            round_index: self.rounds.len() + 1,
            resolved: c,
            kind,
            position,
            tallies_before,
            surplus_fraction,
            margin,
            transfers,
            exhausted,
        });
    }

    /// Runs the normal rule to completion.
    pub fn run_to_end(&mut self) {
        while let Some((c, kind)) = self.next_decision() {
            self.resolve(c, kind);
        }
    }

    /// Finalises a completed tabulation.
    pub fn into_outcome(self, k: usize) -> ElectionOutcome {
        let order: Vec<CandidateIdx> = self
            .slots
            .iter()
            .map(|s| s.expect("all slots are filled when tabulation ends"))
            .collect();
        let sequence = Sequence(self.rounds.iter().map(|r| r.label()).collect());
        let winners = order.iter().take(k).copied().collect();
        ElectionOutcome {
            order,
            sequence,
            rounds: self.rounds,
            winners,
            quota: self.quota,
            total: self.total,
        }
    }
}

/// Tabulates an election.
pub fn run_election(ballots: &WeightedBallotSet, config: &ElectionConfig) -> Result<ElectionOutcome> {
    let quota = compute_quota(ballots, config)?;
    run_with_quota(ballots, config, quota)
}

/// Tabulates an election with an explicit quota.
pub fn run_with_quota(
    ballots: &WeightedBallotSet,
    config: &ElectionConfig,
    quota: Quota,
) -> Result<ElectionOutcome> {
    if ballots.num_candidates() == 0 {
        return Err(Error::Data("no candidates".into()));
    }
    let mut tab = Tabulator::new(ballots, config, quota);
    tab.run_to_end();
    Ok(tab.into_outcome(config.seats))
}

/// Merges `plan` (including its empty padding ballots) into `ballots` and
/// tabulates the result. The quota reflects the enlarged total unless it is
/// fixed by the configuration.
pub fn replay_with_additions(
    ballots: &WeightedBallotSet,
    plan: &StrategyPlan,
    config: &ElectionConfig,
) -> Result<ElectionOutcome> {
    let merged = plan.apply(ballots)?;
    run_election(&merged, config)
}
