//! Joint multi-user precoding, OFDM modulation and peak-to-average power
//! ratio reduction for the massive MU-MIMO-OFDM downlink, together with the
//! baseline precoders, a coded 16-QAM link and the Monte-Carlo harness that
//! compares them.

pub mod comms;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod numerics;
pub mod precoders;
pub mod solver;
pub mod system;

pub use error::{Error, Result};
