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

//! Outcome structures: an order over all candidates paired with a sequence
//! of per-round win (`W`) or loss (`L`) labels.
//!
//! Reading a structure: the `W` labels, in round order, claim the order's
//! positions from the top down, and the `L` labels claim positions from the
//! bottom up. The final round is always labelled `W`; its candidate takes
//! whatever slot is left.

use crate::engine::run_election;
use crate::error::{Error, Result};
use crate::model::{CandidateIdx, ElectionConfig, WeightedBallotSet};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    W,
    L,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::W => "W",
            Label::L => "L",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sequence(pub Vec<Label>);

impl Sequence {
    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `W` labels before the final round.
    pub fn early_wins(&self) -> usize {
        let n = self.0.len();
        self.0[..n.saturating_sub(1)]
            .iter()
            .filter(|&&l| l == Label::W)
            .count()
    }

    /// Number of consecutive `L` labels at the start.
    pub fn initial_losses(&self) -> usize {
        self.0.iter().take_while(|&&l| l == Label::L).count()
    }

    /// Parses `"L,W,L,W"`, `"LWLW"` or `"[L, W, L, W]"`.
    pub fn parse(text: &str) -> Result<Sequence> {
        let mut labels = Vec::new();
        for ch in text.chars() {
            match ch {
                'W' | 'w' => labels.push(Label::W),
                'L' | 'l' => labels.push(Label::L),
                ',' | ' ' | '[' | ']' => {}
                other => {
                    return Err(Error::Structure(format!(
                        "unexpected character {other:?} in sequence"
                    )))
                }
            }
        }
        if labels.last() != Some(&Label::W) {
            return Err(Error::Structure("a sequence must end with W".into()));
        }
        Ok(Sequence(labels))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// An order (top first) together with a sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Structure {
    pub order: Vec<CandidateIdx>,
    pub sequence: Sequence,
}

/// What happens in one round of a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduledRound {
    pub candidate: CandidateIdx,
    pub label: Label,
    /// 0-based slot in the order.
    pub position: usize,
}

impl Structure {
    pub fn new(order: Vec<CandidateIdx>, sequence: Sequence) -> Result<Structure> {
        let s = Structure { order, sequence };
        s.validate(s.order.len())?;
        Ok(s)
    }

    /// Builds a structure from candidate ids and a sequence string.
    pub fn from_ids<S: AsRef<str>>(
        ballots: &WeightedBallotSet,
        order: &[S],
        sequence: &str,
    ) -> Result<Structure> {
        let order = order
            .iter()
            .map(|id| ballots.require_index(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let s = Structure::new(order, Sequence::parse(sequence)?)?;
        s.validate(ballots.num_candidates())?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.order.len() != n {
            return Err(Error::Structure(format!(
                "order has {} candidates, instance has {n}",
                self.order.len()
            )));
        }
        if self.sequence.len() != n {
            return Err(Error::Structure("sequence length differs from order".into()));
        }
        let mut seen = vec![false; n];
        for &c in &self.order {
            if c >= n || seen[c] {
                return Err(Error::Structure("order is not a permutation".into()));
            }
            seen[c] = true;
        }
        if n > 0 && self.sequence.0[n - 1] != Label::W {
            return Err(Error::Structure("final label must be W".into()));
        }
        Ok(())
    }

    /// The candidate resolved in each round, with its label and slot.
    pub fn schedule(&self) -> Vec<ScheduledRound> {
        let n = self.order.len();
        let mut top = 0usize;
        let mut bottom = n;
        let mut out = Vec::with_capacity(n);
        for (r, &label) in self.sequence.0.iter().enumerate() {
            let position = if r + 1 == n {
                top
            } else {
                match label {
                    Label::W => {
                        top += 1;
                        top - 1
                    }
                    Label::L => {
                        bottom -= 1;
                        bottom
                    }
                }
            };
            out.push(ScheduledRound {
                candidate: self.order[position],
                label,
                position,
            });
        }
        out
    }

    pub fn format(&self, ballots: &WeightedBallotSet) -> String {
        let ids: Vec<&str> = self.order.iter().map(|&c| ballots.candidate_id(c)).collect();
        format!("({}, {})", ids.join(">"), self.sequence)
    }
}

/// All `2^(n-1)` sequences over `n` rounds, each ending in `W`.
///
/// Sequences are listed in binary counting order with `W < L` in the
/// leading rounds, so `n = 4` gives `WWWW, WWLW, WLWW, ..., LLLW`.
pub fn enumerate_all_sequences(n: usize) -> Vec<Sequence> {
    if n == 0 {
        return Vec::new();
    }
    let free = n - 1;
    (0u64..(1u64 << free))
        .map(|mask| {
            let mut labels: Vec<Label> = (0..free)
                .map(|i| {
                    if mask >> (free - 1 - i) & 1 == 1 {
                        Label::L
                    } else {
                        Label::W
                    }
                })
                .collect();
            labels.push(Label::W);
            Sequence(labels)
        })
        .collect()
}

/// Sequences with at most `k` wins before the final round.
pub fn enumerate_feasible_sequences(n: usize, k: usize) -> Vec<Sequence> {
    enumerate_all_sequences(n)
        .into_iter()
        .filter(|s| s.early_wins() <= k)
        .collect()
}

/// Feasible sequences further restricted to at most `max_wins` early wins
/// and at least `min_initial_losses` leading eliminations.
pub fn enumerate_bounded_sequences(
    n: usize,
    k: usize,
    max_wins: usize,
    min_initial_losses: usize,
) -> Vec<Sequence> {
    let need = min_initial_losses.min(n.saturating_sub(1));
    enumerate_feasible_sequences(n, k)
        .into_iter()
        .filter(|s| s.early_wins() <= max_wins && s.initial_losses() >= need)
        .collect()
}

/// Upper bound `sum_{j=1..k} C(n, j)` on the number of feasible sequences.
pub fn feasible_sequence_bound(n: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for j in 1..=k.min(n) {
        binom = binom * (n - j + 1) as u128 / j as u128;
        total += binom;
    }
    total
}

/// Every permutation of `items`, in lexicographic order of positions.
pub fn permutations(items: &[CandidateIdx]) -> Vec<Vec<CandidateIdx>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(items.len());
    let mut used = vec![false; items.len()];
    permute(items, &mut used, &mut current, &mut out);
    out
}

fn permute(
    items: &[CandidateIdx],
    used: &mut [bool],
    current: &mut Vec<CandidateIdx>,
    out: &mut Vec<Vec<CandidateIdx>>,
) {
    if current.len() == items.len() {
        out.push(current.clone());
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            current.push(items[i]);
            permute(items, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
}

/// Orders over `n` candidates that place `subject` within the first
/// `positions` slots. Other candidates are laid out following the tie-break
/// order so iteration is deterministic.
pub fn orders_with_subject_in_top(
    n: usize,
    subject: CandidateIdx,
    positions: usize,
    config: &ElectionConfig,
) -> Vec<Vec<CandidateIdx>> {
    let rank = config.tie_rank(n);
    let mut others: Vec<CandidateIdx> = (0..n).filter(|&c| c != subject).collect();
    others.sort_by_key(|&c| rank[c]);
    let mut out = Vec::new();
    for perm in permutations(&others) {
        for slot in 0..positions.min(n) {
            let mut order = perm.clone();
            order.insert(slot, subject);
            out.push(order);
        }
    }
    out.sort_by_key(|o| o.iter().map(|&c| rank[c]).collect::<Vec<_>>());
    out.dedup();
    out
}

/// True when tabulating `ballots` produces exactly `structure`.
pub fn check_structure(
    ballots: &WeightedBallotSet,
    structure: &Structure,
    config: &ElectionConfig,
) -> Result<bool> {
    structure.validate(ballots.num_candidates())?;
    let outcome = run_election(ballots, config)?;
    Ok(outcome.structure() == *structure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_sequences_end_in_w() {
        for n in 1..=6 {
            let seqs = enumerate_all_sequences(n);
            assert_eq!(seqs.len(), 1 << (n - 1));
            assert!(seqs.iter().all(|s| *s.0.last().unwrap() == Label::W));
        }
        assert_eq!(enumerate_all_sequences(1), vec![Sequence(vec![Label::W])]);
    }

    #[test]
    fn feasible_counts() {
        assert_eq!(enumerate_feasible_sequences(4, 1).len(), 4);
        assert_eq!(enumerate_feasible_sequences(4, 2).len(), 7);
        assert_eq!(enumerate_feasible_sequences(2, 1).len(), 2);
        assert_eq!(feasible_sequence_bound(4, 1), 4);
        assert_eq!(feasible_sequence_bound(4, 2), 10);
    }

    #[test]
    fn schedule_maps_labels_to_slots() {
        // A>B>C>D with L,W,L,W: D out, A wins, C out, B last.
        let s = Structure::new(vec![0, 1, 2, 3], Sequence::parse("L,W,L,W").unwrap()).unwrap();
        let who: Vec<usize> = s.schedule().iter().map(|r| r.candidate).collect();
        assert_eq!(who, vec![3, 0, 2, 1]);
    }

    #[test]
    fn bounded_sequences_respect_initial_losses() {
        let seqs = enumerate_bounded_sequences(5, 2, 0, 0);
        assert_eq!(seqs, vec![Sequence::parse("LLLLW").unwrap()]);
        let seqs = enumerate_bounded_sequences(4, 2, 2, 2);
        assert!(seqs.iter().all(|s| s.initial_losses() >= 2));
    }

    #[test]
    fn subject_orders() {
        let cfg = ElectionConfig::new(1, 3);
        let orders = orders_with_subject_in_top(3, 2, 1, &cfg);
        assert_eq!(orders.len(), 2);
        assert!(orders.iter().all(|o| o[0] == 2));
    }
}
