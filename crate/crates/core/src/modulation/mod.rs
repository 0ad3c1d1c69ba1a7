//! Forward reference of the distortion-aware blocks.
//!
//! Offsets are computed from latitude/window condition maps only, so one
//! offset field serves every image that shares a raster size. DAAB samples
//! keys and values from the offset-warped features inside each attention
//! window; DACB is a 3×3 deformable convolution without modulation masks.

mod attention;
mod condition;
mod deform;
mod heatmap;
mod offset;
mod tensor;
mod weights;

pub use attention::{daab_forward, window_attention, AttentionWeights, DaabWeights};
pub use condition::{build_cd, build_cw, ConditionMaps};
pub use deform::{dacb_forward, ConvWeights, DacbWeights};
pub use heatmap::{offsets_heatmap, OffsetHeatmap, OffsetPoint};
pub use offset::{offset_net_forward, OffsetNetWeights, DEFAULT_HIDDEN};
pub use tensor::{FeatureMap, Matrix};
pub use weights::BlockWeights;

/// Channels of a DAAB offset field: one `(Δy, Δx)` pair.
pub const DAAB_OFFSET_CHANNELS: usize = 2;
/// Channels of a DACB offset field: `(Δy, Δx)` for each of the nine taps, row-major.
pub const DACB_OFFSET_CHANNELS: usize = 18;
