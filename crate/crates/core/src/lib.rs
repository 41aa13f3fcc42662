// SPDX-License-Identifier: Apache-2.0

//! Minimum-discomfort relaxation of bipartite allocation constraints under
//! participation guarantees.

pub mod guarantee;
pub mod matching;
pub mod model;
pub mod rational;
pub mod oracle;
pub mod solver;
pub mod io;
pub mod datagen;
pub mod experiments;
