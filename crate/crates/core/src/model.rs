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

//! Core data types: candidates, ranked ballots, weighted ballot sets,
//! election configuration, the Droop quota and aggregated counts.
//!
//! Candidates are referred to internally by their index into the
//! instance's candidate list. String identifiers only matter at the
//! boundaries (parsing, reporting).

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Exact vote weight.
pub type Weight = BigRational;

/// Index of a candidate within an instance.
pub type CandidateIdx = usize;

/// Builds an exact weight from an integer.
pub fn int(value: i64) -> Weight {
    BigRational::from_integer(BigInt::from(value))
}

/// Builds an exact weight from a fraction.
pub fn frac(numer: i64, denom: i64) -> Weight {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Smallest integer that is `>= value`.
pub fn ceil_int(value: &Weight) -> BigInt {
    value.ceil().to_integer()
}

/// Converts a non-negative integer-valued weight to `u64`, saturating.
pub fn to_u64_saturating(value: &BigInt) -> u64 {
    if value.is_negative() {
        0
    } else {
        value.to_u64().unwrap_or(u64::MAX)
    }
}

/// A contestant. Equality and ordering look at the identifier only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub display_name: String,
}

impl Candidate {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Candidate {
            display_name: id.clone(),
            id,
        }
    }

    pub fn with_name(id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Candidate {
            id: id.into(),
            display_name: display_name.into(),
        }
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

/// An ordered list of distinct candidates. The empty ballot is a valid
/// padding ballot that only contributes to the total weight.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RankedBallot(pub Vec<CandidateIdx>);

impl RankedBallot {
    pub fn new(ranking: Vec<CandidateIdx>) -> Result<Self> {
        let ballot = RankedBallot(ranking);
        ballot.check_distinct()?;
        Ok(ballot)
    }

    pub fn empty() -> Self {
        RankedBallot(Vec::new())
    }

    pub fn ranking(&self) -> &[CandidateIdx] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<CandidateIdx> {
        self.0.first().copied()
    }

    pub fn starts_with(&self, prefix: &[CandidateIdx]) -> bool {
        self.0.starts_with(prefix)
    }

    pub fn contains(&self, c: CandidateIdx) -> bool {
        self.0.contains(&c)
    }

    fn check_distinct(&self) -> Result<()> {
        for (i, c) in self.0.iter().enumerate() {
            if self.0[..i].contains(c) {
                return Err(Error::DuplicateCandidate(format!("index {c}")));
            }
        }
        Ok(())
    }
}

/// A multiset of ranked ballots with exact non-negative weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedBallotSet {
    candidates: Vec<Candidate>,
    entries: BTreeMap<RankedBallot, Weight>,
}

impl WeightedBallotSet {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, c) in candidates.iter().enumerate() {
            if seen.insert(c.id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate candidate id {}", c.id)));
            }
        }
        Ok(WeightedBallotSet {
            candidates,
            entries: BTreeMap::new(),
        })
    }

    /// Convenience constructor from string ids and `(ranking, weight)` rows.
    pub fn from_rows<S: AsRef<str>>(ids: &[S], rows: &[(&[&str], i64)]) -> Result<Self> {
        let candidates = ids.iter().map(|s| Candidate::new(s.as_ref())).collect();
        let mut set = WeightedBallotSet::new(candidates)?;
        for (ranking, count) in rows {
            let ballot = set.ballot_from_ids(ranking)?;
            set.add(ballot, int(*count))?;
        }
        Ok(set)
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn candidate(&self, idx: CandidateIdx) -> &Candidate {
        &self.candidates[idx]
    }

    pub fn candidate_id(&self, idx: CandidateIdx) -> &str {
        &self.candidates[idx].id
    }

    pub fn index_of(&self, id: &str) -> Option<CandidateIdx> {
        self.candidates.iter().position(|c| c.id == id)
    }

    pub fn require_index(&self, id: &str) -> Result<CandidateIdx> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownCandidate(id.to_string()))
    }

    pub fn ballot_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<RankedBallot> {
        let ranking = ids
            .iter()
            .map(|id| self.require_index(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        RankedBallot::new(ranking).map_err(|_| {
            let joined: Vec<&str> = ids.iter().map(|s| s.as_ref()).collect();
            Error::DuplicateCandidate(joined.join(","))
        })
    }

    /// Adds `weight` copies of `ballot`, merging with an existing entry.
    pub fn add(&mut self, ballot: RankedBallot, weight: Weight) -> Result<()> {
        if weight.is_negative() {
            return Err(Error::Data("negative ballot weight".into()));
        }
        ballot.check_distinct()?;
        if let Some(&bad) = ballot.0.iter().find(|&&c| c >= self.candidates.len()) {
            return Err(Error::UnknownCandidate(format!("index {bad}")));
        }
        if weight.is_zero() {
            return Ok(());
        }
        *self.entries.entry(ballot).or_insert_with(Weight::zero) += weight;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RankedBallot, &Weight)> {
        self.entries.iter()
    }

    pub fn weight_of(&self, ballot: &RankedBallot) -> Weight {
        self.entries.get(ballot).cloned().unwrap_or_else(Weight::zero)
    }

    /// Number of distinct ballots with positive weight.
    pub fn distinct_ballots(&self) -> usize {
        self.entries.len()
    }

    pub fn total_weight(&self) -> Weight {
        self.entries.values().fold(Weight::zero(), |acc, w| acc + w)
    }

    /// First-preference weight of each candidate.
    pub fn first_choice_totals(&self) -> Vec<Weight> {
        let mut totals = vec![Weight::zero(); self.candidates.len()];
        for (ballot, w) in &self.entries {
            if let Some(c) = ballot.first() {
                totals[c] += w;
            }
        }
        totals
    }

    /// Keeps only the candidates in `keep` (in that order), deleting every
    /// other candidate from each ballot. Ballots emptied by the deletion stay
    /// as empty ballots so the total weight is preserved.
    pub fn restrict(&self, keep: &[CandidateIdx]) -> WeightedBallotSet {
        let mut new_index = vec![None; self.candidates.len()];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = Some(new);
        }
        let mut out = WeightedBallotSet {
            candidates: keep.iter().map(|&c| self.candidates[c].clone()).collect(),
            entries: BTreeMap::new(),
        };
        for (ballot, w) in &self.entries {
            let projected: Vec<usize> = ballot.0.iter().filter_map(|&c| new_index[c]).collect();
            *out
                .entries
                .entry(RankedBallot(projected))
                .or_insert_with(Weight::zero) += w;
        }
        out
    }

    /// Merges another set over the same candidate list into this one.
    pub fn merged_with(&self, extra: &[(RankedBallot, Weight)]) -> Result<WeightedBallotSet> {
        let mut out = self.clone();
        for (ballot, w) in extra {
            out.add(ballot.clone(), w.clone())?;
        }
        Ok(out)
    }

    /// Renders a ballot with candidate ids, e.g. `[E,M,N]`.
    pub fn format_ballot(&self, ballot: &RankedBallot) -> String {
        let ids: Vec<&str> = ballot.0.iter().map(|&c| self.candidate_id(c)).collect();
        format!("[{}]", ids.join(","))
    }
}

/// One respondent record. Bootstrap resampling works at this granularity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Respondent {
    pub id: String,
    pub weight: Weight,
    pub ballot: RankedBallot,
}

/// Respondent-level view of an election, as read from a ballot file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RespondentSet {
    pub candidates: Vec<Candidate>,
    pub respondents: Vec<Respondent>,
}

impl RespondentSet {
    pub fn to_ballot_set(&self) -> Result<WeightedBallotSet> {
        let mut set = WeightedBallotSet::new(self.candidates.clone())?;
        for r in &self.respondents {
            set.add(r.ballot.clone(), r.weight.clone())?;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.respondents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.respondents.is_empty()
    }
}

/// Droop quota, an exact vote count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Quota(pub Weight);

impl Quota {
    pub fn value(&self) -> &Weight {
        &self.0
    }
}

impl fmt::Display for Quota {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Seats, tie-break order and optional fixed quota.
///
/// `tie_break` lists candidates from most to least favoured. A tie for the
/// highest tally goes to the more favoured candidate; a tie for the lowest
/// tally eliminates the less favoured one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionConfig {
    pub seats: usize,
    pub tie_break: Vec<CandidateIdx>,
    pub quota_override: Option<Weight>,
}

impl ElectionConfig {
    /// `seats` winners among `n` candidates, tie-break by index order.
    pub fn new(seats: usize, n: usize) -> Self {
        ElectionConfig {
            seats,
            tie_break: (0..n).collect(),
            quota_override: None,
        }
    }

    pub fn with_tie_break(mut self, order: Vec<CandidateIdx>) -> Self {
        self.tie_break = order;
        self
    }

    pub fn with_quota(mut self, quota: Weight) -> Self {
        self.quota_override = Some(quota);
        self
    }

    /// Resolves a tie-break given as candidate ids.
    pub fn tie_break_from_ids<S: AsRef<str>>(
        ballots: &WeightedBallotSet,
        ids: &[S],
    ) -> Result<Vec<CandidateIdx>> {
        ids.iter().map(|s| ballots.require_index(s.as_ref())).collect()
    }

    /// Checks the configuration against an instance with `n` candidates.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.seats == 0 {
            return Err(Error::Config("seats must be positive".into()));
        }
        if n > 1 && self.seats >= n {
            return Err(Error::Config(format!(
                "seats ({}) must be smaller than the number of candidates ({n})",
                self.seats
            )));
        }
        let mut seen = vec![false; n];
        for &c in &self.tie_break {
            if c >= n || seen[c] {
                return Err(Error::Config("tie-break order is not a permutation".into()));
            }
            seen[c] = true;
        }
        if self.tie_break.len() != n {
            return Err(Error::Config(
                "tie-break order must cover every candidate".into(),
            ));
        }
        if let Some(q) = &self.quota_override {
            if !q.is_positive() {
                return Err(Error::Config("quota override must be positive".into()));
            }
        }
        Ok(())
    }

    /// Position of each candidate in the tie-break order (0 = most favoured).
    pub fn tie_rank(&self, n: usize) -> Vec<usize> {
        let mut rank = vec![usize::MAX; n];
        for (pos, &c) in self.tie_break.iter().enumerate() {
            if c < n {
                rank[c] = pos;
            }
        }
        // Candidates missing from the order rank after all listed ones, by index.
        let mut next = self.tie_break.len();
        for r in rank.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        rank
    }

    /// Restricts the configuration to `keep` (old indices, in new-index order).
    pub fn restrict(&self, keep: &[CandidateIdx]) -> ElectionConfig {
        let mut new_index = HashMap::new();
        for (new, &old) in keep.iter().enumerate() {
            new_index.insert(old, new);
        }
        ElectionConfig {
            seats: self.seats,
            tie_break: self
                .tie_break
                .iter()
                .filter_map(|c| new_index.get(c).copied())
                .collect(),
            quota_override: self.quota_override.clone(),
        }
    }
}

/// Droop quota for a given total: `floor(total / (seats + 1)) + 1`.
pub fn droop_quota(total: &Weight, seats: usize) -> Quota {
    let divisor = BigInt::from(seats as u64 + 1);
    let floored = (total.numer() / total.denom()).div_floor(&divisor);
    Quota(BigRational::from_integer(floored + BigInt::one()))
}

/// Quota for an instance, honouring an override.
pub fn compute_quota(ballots: &WeightedBallotSet, config: &ElectionConfig) -> Result<Quota> {
    if let Some(q) = &config.quota_override {
        return Ok(Quota(q.clone()));
    }
    let total = ballots.total_weight();
    if !total.is_positive() {
        return Err(Error::EmptyBallotSet);
    }
    Ok(droop_quota(&total, config.seats))
}

/// Quota for an instance enlarged by `extra` ballots.
pub fn quota_with_extra(ballots: &WeightedBallotSet, config: &ElectionConfig, extra: u64) -> Quota {
    match &config.quota_override {
        Some(q) => Quota(q.clone()),
        None => droop_quota(&(ballots.total_weight() + int(extra as i64)), config.seats),
    }
}

/// Total weight of ballots whose ranking starts with `prefix`.
pub fn aggregate_count(ballots: &WeightedBallotSet, prefix: &[CandidateIdx]) -> Weight {
    ballots
        .iter()
        .filter(|(b, _)| b.starts_with(prefix))
        .fold(Weight::zero(), |acc, (_, w)| acc + w)
}

/// [`aggregate_count`] with candidate ids; unknown ids give zero.
pub fn aggregate_count_ids<S: AsRef<str>>(ballots: &WeightedBallotSet, prefix: &[S]) -> Weight {
    let mut idx = Vec::with_capacity(prefix.len());
    for id in prefix {
        match ballots.index_of(id.as_ref()) {
            Some(i) => idx.push(i),
            None => return Weight::zero(),
        }
    }
    aggregate_count(ballots, &idx)
}
