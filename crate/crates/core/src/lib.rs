//! Hierarchical 16-QAM transmission over a cognitive-radio channel with
//! imperfect spectrum sensing.
//!
//! * [`special`]: Gaussian Q, Lambert W₀ and the ₂F₁ pattern behind the
//!   Nakagami averages.
//! * [`channel`]: sensing statistics, fading and the channel relation.
//! * [`hqam`]: constellation, MAP detector and a Monte Carlo BER estimator.
//! * [`ber`]: closed-form instantaneous and fading-averaged error rates.
//! * [`power`]: optimal power allocation under transmit and interference
//!   limits.
//! * [`link`]: image transmission with threshold ARQ.
//!
//! All powers, variances and gains are linear. See [`units`] for dB.

pub mod ber;
pub mod channel;
pub mod error;
pub mod hqam;
pub mod link;
pub mod power;
pub mod rng;
pub mod special;
pub mod units;

pub use ber::{BerKind, BerPair, ModulationCoeffs, Scenario};
pub use channel::{ChannelEnv, Decision, FadingSpec, PrimaryState, SensingModel};
pub use error::{Error, Result};
pub use hqam::HqamConstellation;
pub use power::{Constraints, DualState, PowerLimit, PowerPolicy, SampleSet};
