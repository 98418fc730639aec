//! 16-point hierarchical QAM: constellation, sensing-aware MAP detection and
//! a Monte Carlo error-rate estimator.

mod constellation;
mod detector;
mod montecarlo;

pub use constellation::{build_constellation, modulate, HqamConstellation, Word, HP_MASK, LP_MASK};
pub use detector::{map_detect, MapDetector};
pub use montecarlo::{monte_carlo_ber, LinkChannel, McBer};
