//! Budget-constrained interactive search for hidden target vertices in a
//! rooted label hierarchy.
//!
//! A session asks at most `b` questions of the form "does the subtree of `q`
//! contain a target?" and then returns up to `k` vertices whose summed tree
//! distance to the targets is as small as the answers allow. Questions are
//! chosen by expected reduction of that penalty:
//!
//! * [`single`]: one target, linear-time gains (STBIS);
//! * [`dp`]: several targets, exact gains from a tree knapsack DP (kBM-DP);
//! * [`topk`]: several targets, fast approximate gains (kBM-Topk);
//! * [`dp_plus`]: kBM-DP with bound-based pruning (kBM-DP+);
//! * [`bing`]: the pruning-count baselines.
//!
//! [`engine::Searcher`] drives a session against a simulated [`oracle`] or a
//! human, and [`bench`] runs whole experiment sweeps.
//!
//! ```
//! use std::sync::Arc;
//! use kbm_igs::{fixtures, Algorithm, Searcher, TargetSet, TruthfulOracle};
//!
//! let h = Arc::new(fixtures::toy10());
//! let targets = TargetSet::from_labels(&h, &["v5", "v8"]).unwrap();
//! let mut search = Searcher::new(h.clone(), Algorithm::KbmDp, 2, 2).unwrap();
//! let outcome = search.run_with(TruthfulOracle::new(targets)).unwrap();
//! let picked: Vec<_> = outcome.selection.members().iter().map(|&v| h.key(v)).collect();
//! assert_eq!(picked, ["v3", "v5"]);
//! ```

pub mod bench;
pub mod bing;
pub mod dp;
pub mod dp_plus;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod gain;
pub mod hierarchy;
pub mod oracle;
pub mod penalty;
pub mod session;
pub mod single;
pub mod synth;
pub mod topk;

pub use engine::{Algorithm, Outcome, Searcher};
pub use error::Error;
pub use gain::GainRow;
pub use hierarchy::{Format, Hierarchy, HierarchyError, VertexId};
pub use oracle::{Answer, NoisyOracle, NoisyOracleConfig, Oracle, TargetSet, TruthfulOracle};
pub use penalty::{set_penalty, SelectionSet};
pub use session::{Mode, SessionError, SessionState};
