//! Accounts, posts, favourites, follows and notifications over an
//! append-only event log.

mod event;
mod mentions;
mod store;
mod types;

pub use event::{Event, EventLog, LogEntry, LogReadError};
pub use mentions::parse_mentions;
pub use store::{check_body, ReplayError, Store, StoreError};
pub use types::*;
