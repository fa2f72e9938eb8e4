use crate::netmodel::DeviceId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("LR {0} has no SR within the coverage radius")]
    OrphanLr(DeviceId),
    #[error("{channels} sub-channels cannot give each of {srs} SRs a channel")]
    InsufficientChannels { srs: usize, channels: usize },
    #[error(
        "instance with {srs} SRs, {lrs} LRs and {channels} channels is too large for exhaustive search"
    )]
    InstanceTooLarge { srs: usize, lrs: usize, channels: usize },
    #[error("admission of {admitted} bits exceeds the {available} bits held by device {device}")]
    QueueUnderflow {
        device: DeviceId,
        admitted: f64,
        available: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
