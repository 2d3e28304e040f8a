//! Data arrangement on complete regular trees.
//!
//! Guest graphs are embedded into the leaves of a complete `d`-ary host tree so
//! that the summed leaf-to-leaf distance over guest edges is small. The crate
//! provides the host index arithmetic, an approximation algorithm for complete
//! binary guests with exact closed forms, optimal balanced partitions and the
//! lower bound built from them, exhaustive oracles for tiny instances, and the
//! star gadgets of the NP-hardness reduction.

pub mod approx;
pub mod arrangement;
pub mod bounds;
pub mod error;
pub mod gadgets;
pub mod guest;
pub mod io;
pub mod oracle;
pub mod partition;
pub mod regular_tree;
pub mod table;

pub use arrangement::{Arrangement, DistanceProfile};
pub use error::{DaptError, Result};
pub use guest::GuestGraph;
pub use partition::BalancedPartition;
pub use regular_tree::HostTree;
