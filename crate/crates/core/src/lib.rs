//! No-regret learning toolkit: online learners, bandit and swap-regret
//! reductions, equilibrium certification in repeated games, manipulation of
//! no-regret followers, bid inference and collusion auditing.

pub mod audit;
pub mod bandit;
pub mod error;
pub mod game;
pub mod inference;
pub mod learners;
pub mod log_io;
pub mod market;
pub mod regret;
pub mod simplex;
pub mod stackelberg;
pub mod streams;
pub mod swap;
pub mod types;

pub use error::{Error, Result};
pub use types::{ActionDistribution, Deviation, Feedback, PayoffStream, PayoffVector, PlayLog, RegretReport, Round};
