pub mod error;
pub mod group;
pub mod cayley;
pub mod stallings;
pub mod metric_core;
pub mod core_maps;
pub mod displacement;
pub mod chains;
pub mod report;

pub use error::{Error, Result};
pub use group::{Alphabet, BackendKind, Group, Letter, Presentation, Word};

pub type Rational = num_rational::Ratio<i64>;
