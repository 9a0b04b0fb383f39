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

//! Exact Single Transferable Vote tabulation and optimal vote-addition
//! strategies.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: candidates, ballots, configuration, quota.
//! * [`engine`]: the round-by-round tabulator with Weighted Inclusive
//!   Gregory surplus transfers.
//! * [`structure`] and [`constraints`]: outcome structures (order plus
//!   per-round win/loss labels) and the symbolic inequalities bounding them.
//! * [`allocator`]: minimum-cost additions reaching a target structure.
//! * [`reducer`]: strict support, candidate removal and sequence bounds.
//! * [`optimizer`]: end-to-end strategy search and classification.
//! * [`robustness`]: bootstrap evaluation of strategies.
//! * [`io`]: CSV/JSON ballot and report formats.

pub mod allocator;
pub mod constraints;
pub mod engine;
pub mod error;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod reducer;
pub mod robustness;
pub mod structure;

pub use error::{Error, Result};
pub use model::{
    aggregate_count, compute_quota, int, Candidate, CandidateIdx, ElectionConfig, Quota,
    RankedBallot, Respondent, RespondentSet, WeightedBallotSet, Weight,
};
