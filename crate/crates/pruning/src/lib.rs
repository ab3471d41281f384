//! Lottery-ticket machinery: pruning schedules, global magnitude pruning,
//! keep/prune masks, rewind snapshots, winning and random tickets, and the
//! masked-training contract that keeps pruned positions at exactly zero
//! through an entire training run.

pub mod error;
pub mod mask;
pub mod masked;
pub mod prune;
pub mod rewind;
pub mod schedule;
pub mod snapshot;
pub mod ticket;

pub use error::{PruneError, PruneResult};
pub use mask::{sparsity_report, MaskEntry, PruneMask, SparsityReport};
pub use masked::{apply_ticket, masked_optimizer_step};
pub use prune::{global_magnitude_prune, one_shot_prune, PruneScope};
pub use rewind::{RewindPolicy, RewindUnit};
pub use schedule::PruneSchedule;
pub use snapshot::{ModelSnapshot, SnapshotStore};
pub use ticket::{make_random_ticket, make_winning_ticket, Provenance, Ticket};
