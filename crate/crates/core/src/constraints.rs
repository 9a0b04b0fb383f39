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

//! Symbolic constraints describing the region of ballot profiles that
//! tabulate to a given structure.
//!
//! Every tally is a sum of terms `V[p] * (1 - Q/T1) * (1 - Q/T2) ...` where
//! `V[p]` is the aggregate count of ballots starting with the prefix `p`
//! and each `Ti` is the tally expression of a candidate the ballots passed
//! through as a quota winner. The term lists grow combinatorially with the
//! number of candidates, so this module is meant for small instances; the
//! tabulator remains the fast way to test membership.

use crate::error::Result;
use crate::model::{CandidateIdx, ElectionConfig, Quota, Weight, WeightedBallotSet};
use crate::structure::{Label, Structure};
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

/// `V[prefix]` scaled by `(1 - Q/T)` for every `T` in `factors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub prefix: Vec<CandidateIdx>,
    pub factors: Vec<Rc<Expr>>,
}

/// A sum of terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn evaluate(&self, counts: &PrefixCounts, quota: &Weight) -> Weight {
        let mut total = Weight::zero();
        for term in &self.terms {
            let base = counts.get(&term.prefix);
            if base.is_zero() {
                continue;
            }
            let mut value = base;
            for f in &term.factors {
                let t = f.evaluate(counts, quota);
                // A zero tally that still meets the quota has no surplus.
                let keep = if t.is_zero() {
                    Weight::zero()
                } else {
                    Weight::one() - quota / &t
                };
                value *= keep;
            }
            total += value;
        }
        total
    }

    /// Text form, e.g. `V[B] + (V[A,B] + V[D,A,B]) * (1 - Q/(V[A] + V[D,A]))`.
    pub fn render(&self, ballots: &WeightedBallotSet) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        // Terms sharing a factor list are printed as one bracketed group.
        let mut groups: Vec<(&[Rc<Expr>], Vec<&Term>)> = Vec::new();
        for term in &self.terms {
            match groups.iter_mut().find(|(f, _)| *f == term.factors.as_slice()) {
                Some(g) => g.1.push(term),
                None => groups.push((term.factors.as_slice(), vec![term])),
            }
        }
        let mut parts = Vec::new();
        for (factors, terms) in groups {
            let vars: Vec<String> = terms.iter().map(|t| variable(ballots, &t.prefix)).collect();
            if factors.is_empty() {
                parts.extend(vars);
                continue;
            }
            let mut s = if vars.len() == 1 {
                vars[0].clone()
            } else {
                format!("({})", vars.join(" + "))
            };
            for f in factors {
                let inner = f.render(ballots);
                if f.len() == 1 {
                    let _ = write!(s, " * (1 - Q/{inner})");
                } else {
                    let _ = write!(s, " * (1 - Q/({inner}))");
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

fn variable(ballots: &WeightedBallotSet, prefix: &[CandidateIdx]) -> String {
    let ids: Vec<&str> = prefix.iter().map(|&c| ballots.candidate_id(c)).collect();
    format!("V[{}]", ids.join(","))
}

/// One inequality. `Beats` holds strictly unless the tie-break favours
/// `winner`, in which case equality is enough.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    BelowQuota(CandidateIdx),
    ReachesQuota(CandidateIdx),
    Beats {
        winner: CandidateIdx,
        loser: CandidateIdx,
    },
}

/// Constraints for one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundConstraints {
    /// 1-based round number.
    pub round: usize,
    pub candidate: CandidateIdx,
    pub label: Label,
    /// Tally expression of every candidate still in the count.
    pub tallies: Vec<(CandidateIdx, Rc<Expr>)>,
    pub relations: Vec<Relation>,
}

impl RoundConstraints {
    pub fn tally(&self, c: CandidateIdx) -> &Expr {
        &self
            .tallies
            .iter()
            .find(|(x, _)| *x == c)
            .expect("relations refer to active candidates")
            .1
    }
}

/// Per-round constraint groups for a structure. The final round carries no
/// constraint and has no group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    pub structure: Structure,
    pub quota: Quota,
    pub rounds: Vec<RoundConstraints>,
}

pub fn generate_constraints(structure: &Structure, quota: &Quota) -> ConstraintSet {
    let n = structure.n();
    let schedule = structure.schedule();
    let mut tallies: Vec<Option<Rc<Expr>>> = (0..n)
        .map(|c| {
            Some(Rc::new(Expr {
                terms: vec![Term {
                    prefix: vec![c],
                    factors: Vec::new(),
                }],
            }))
        })
        .collect();
    let mut processed: Vec<CandidateIdx> = Vec::new();
    let mut rounds = Vec::new();
    for (r, step) in schedule.iter().enumerate().take(n.saturating_sub(1)) {
        let s = step.candidate;
        let active: Vec<CandidateIdx> = (0..n).filter(|&c| tallies[c].is_some()).collect();
        let snapshot: Vec<(CandidateIdx, Rc<Expr>)> = active
            .iter()
            .map(|&c| (c, tallies[c].clone().expect("active")))
            .collect();
        let others: Vec<CandidateIdx> = active.iter().copied().filter(|&c| c != s).collect();
        let relations = match step.label {
            Label::L => {
                let mut rel: Vec<Relation> = active.iter().map(|&c| Relation::BelowQuota(c)).collect();
                rel.extend(others.iter().map(|&o| Relation::Beats { winner: o, loser: s }));
                rel
            }
            Label::W => {
                let mut rel = vec![Relation::ReachesQuota(s)];
                rel.extend(others.iter().map(|&o| Relation::Beats { winner: s, loser: o }));
                rel
            }
        };
        rounds.push(RoundConstraints {
            round: r + 1,
            candidate: s,
            label: step.label,
            tallies: snapshot,
            relations,
        });

        let resolved = tallies[s].take().expect("scheduled candidate is active");
        processed.push(s);
        let factor = (step.label == Label::W).then(|| resolved.clone());
        let mut gained: Vec<Vec<Term>> = vec![Vec::new(); n];
        for term in &resolved.terms {
            let free: Vec<CandidateIdx> = processed
                .iter()
                .copied()
                .filter(|c| !term.prefix.contains(c))
                .collect();
            for skip in arrangements(&free) {
                for &c in &others {
                    let mut prefix = term.prefix.clone();
                    prefix.extend_from_slice(&skip);
                    prefix.push(c);
                    let mut factors = term.factors.clone();
                    factors.extend(factor.clone());
                    gained[c].push(Term { prefix, factors });
                }
            }
        }
        for &c in &others {
            if gained[c].is_empty() {
                continue;
            }
            let mut expr = (**tallies[c].as_ref().expect("active")).clone();
            expr.terms.append(&mut gained[c]);
            tallies[c] = Some(Rc::new(expr));
        }
    }
    ConstraintSet {
        structure: structure.clone(),
        quota: quota.clone(),
        rounds,
    }
}

/// Every ordering of every subset of `items`, the empty one first.
fn arrangements(items: &[CandidateIdx]) -> Vec<Vec<CandidateIdx>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<CandidateIdx>> = vec![Vec::new()];
    for _ in 0..items.len() {
        let mut next = Vec::new();
        for p in &frontier {
            for &c in items {
                if !p.contains(&c) {
                    let mut q = p.clone();
                    q.push(c);
                    out.push(q.clone());
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Aggregate counts of every prefix of every ballot.
struct PrefixCounts(HashMap<Vec<CandidateIdx>, Weight>);

impl PrefixCounts {
    fn new(ballots: &WeightedBallotSet) -> Self {
        let mut map: HashMap<Vec<CandidateIdx>, Weight> = HashMap::new();
        for (b, w) in ballots.iter() {
            let r = b.ranking();
            for len in 1..=r.len() {
                *map.entry(r[..len].to_vec()).or_insert_with(Weight::zero) += w;
            }
        }
        PrefixCounts(map)
    }

    fn get(&self, prefix: &[CandidateIdx]) -> Weight {
        self.0.get(prefix).cloned().unwrap_or_else(Weight::zero)
    }
}

impl ConstraintSet {
    /// True when `ballots` satisfy every round's constraints, with ties
    /// settled by the configured tie-break.
    pub fn evaluate(&self, ballots: &WeightedBallotSet, config: &ElectionConfig) -> bool {
        let counts = PrefixCounts::new(ballots);
        let q = self.quota.value();
        let rank = config.tie_rank(ballots.num_candidates());
        for round in &self.rounds {
            let values: HashMap<CandidateIdx, Weight> = round
                .tallies
                .iter()
                .map(|(c, e)| (*c, e.evaluate(&counts, q)))
                .collect();
            let ok = round.relations.iter().all(|rel| match *rel {
                Relation::BelowQuota(c) => &values[&c] < q,
                Relation::ReachesQuota(c) => &values[&c] >= q,
                Relation::Beats { winner, loser } => {
                    let (a, b) = (&values[&winner], &values[&loser]);
                    a > b || (a == b && rank[winner] < rank[loser])
                }
            });
            if !ok {
                return false;
            }
        }
        true
    }

    /// Number of `V[...]` terms across all tally expressions, factors
    /// excluded.
    pub fn term_count(&self) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| r.tallies.iter())
            .map(|(_, e)| e.len())
            .sum()
    }

    /// Human-readable listing, one block per round.
    pub fn render(&self, ballots: &WeightedBallotSet) -> String {
        let id = |c: CandidateIdx| ballots.candidate_id(c).to_string();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "structure {} with Q = {}",
            self.structure.format(ballots),
            self.quota
        );
        for round in &self.rounds {
            let verb = match round.label {
                Label::W => "wins",
                Label::L => "is eliminated",
            };
            let _ = writeln!(out, "round {}: {} {verb}", round.round, id(round.candidate));
            for (c, e) in &round.tallies {
                let _ = writeln!(out, "  {} = {}", id(*c), e.render(ballots));
            }
            let others: Vec<String> = round
                .tallies
                .iter()
                .map(|(c, _)| *c)
                .filter(|&c| c != round.candidate)
                .map(id)
                .collect();
            match round.label {
                Label::L => {
                    let all: Vec<String> = round.tallies.iter().map(|(c, _)| id(*c)).collect();
                    let _ = writeln!(out, "  Q > {}", all.join(", "));
                    let _ = writeln!(out, "  {} > {}", others.join(", "), id(round.candidate));
                }
                Label::W => {
                    let _ = writeln!(out, "  {} >= Q", id(round.candidate));
                    if !others.is_empty() {
                        let _ = writeln!(out, "  {} > {}", id(round.candidate), others.join(", "));
                    }
                }
            }
        }
        out
    }
}

/// Structure membership decided by the symbolic constraints instead of the
/// tabulator. Agrees with [`crate::structure::check_structure`].
pub fn check_structure_symbolic(
    ballots: &WeightedBallotSet,
    structure: &Structure,
    config: &ElectionConfig,
) -> Result<bool> {
    structure.validate(ballots.num_candidates())?;
    let quota = crate::model::compute_quota(ballots, config)?;
    Ok(generate_constraints(structure, &quota).evaluate(ballots, config))
}
