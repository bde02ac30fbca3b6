//! Policy/value network, replay buffer and checkpoints.

mod checkpoint;
mod network;
mod replay;

pub use checkpoint::{architecture_hash, load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use network::{
    BatchNorm, Example, ForwardCache, Gradients, Linear, LossParts, Mode, Network, NetworkConfig, NormGrad,
    Output, ParamGroup, DIVERGENCE_NORM, PROB_FLOOR,
};
pub use replay::{encode_state, encoding_len, ReplayBuffer, ReplayRecord};
