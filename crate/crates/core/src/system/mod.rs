//! OFDM / MU-MIMO system model: tone plans, channels, frames and the joint
//! precoding constraint operator.

mod channel;
mod frame;
mod operator;
mod tones;

pub use channel::ChannelRealization;
pub use frame::{antennas_to_users, normalize_frame, users_to_antennas, FreqFrame, StackedSignal};
pub use operator::{
    build_pmp_problem, to_complex, to_real, PmpOperator, PmpProblem, RealPmpOperator, RealPmpProblem,
    TargetPrecoder,
};
pub use tones::TonePlan;
