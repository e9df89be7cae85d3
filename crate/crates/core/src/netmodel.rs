//! Analytical cost model for the ResNet+LSTM family.
//!
//! Every architecture expands to the same canonical stack:
//!
//! ```text
//! input -> conv1d(k, 32) -> batchnorm -> relu
//!       -> B x [conv1d -> batchnorm -> relu -> dropout -> conv1d -> batchnorm -> add-skip -> relu]
//!       -> lstm(2^z) -> dense(C) -> softmax
//! ```
//!
//! Convolutions use stride 1 and "same" padding, so the sequence length is
//! preserved. When a block changes the channel count, its skip path carries
//! a 1x1 projection convolution whose cost is booked on the `add-skip` layer.
//!
//! Parameter accounting:
//!
//! | layer     | parameters                  |
//! |-----------|-----------------------------|
//! | conv1d    | `k·Cin·Cout + Cout`         |
//! | batchnorm | `4·C` (γ, β, mean, variance) |
//! | lstm      | `4·(din·h + h² + h)`        |
//! | dense     | `h·C + C`                   |
//!
//! FLOP accounting (one multiply-accumulate = 2 FLOPs):
//!
//! | layer     | FLOPs                                  |
//! |-----------|----------------------------------------|
//! | conv1d    | `2·k·Cin·Cout·L + Cout·L`              |
//! | batchnorm | `2·C·L` (folded scale and shift)       |
//! | relu      | `C·L`                                  |
//! | dropout   | `0` (identity at inference)            |
//! | add-skip  | `C·L` plus the projection conv, if any |
//! | lstm      | `2·4·(din·h + h²)·T + 5·h·T`           |
//! | dense     | `2·h·C`                                |
//! | softmax   | `3·C`                                  |

use alloc::vec::Vec;
use core::fmt;

use crate::archspace::{ArchParams, ArchitectureSpace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("input length must be positive")]
    EmptyInput,
    #[error("input channels must be positive")]
    NoChannels,
    #[error("at least 2 classes are required, got {0}")]
    TooFewClasses(usize),
    #[error("kernel width and base filters must be positive")]
    ZeroWidth,
    #[error("architecture space is empty")]
    EmptySpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub input_len: u64,
    pub input_channels: u64,
    pub kernel: u64,
    pub base_filters: u64,
    pub num_classes: u64,
    pub bytes_per_param: u64,
}

impl NetConfig {
    pub fn with_classes(num_classes: usize) -> Self {
        Self {
            num_classes: num_classes as u64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_len == 0 {
            return Err(NetError::EmptyInput);
        }
        if self.input_channels == 0 {
            return Err(NetError::NoChannels);
        }
        if self.num_classes < 2 {
            return Err(NetError::TooFewClasses(self.num_classes as usize));
        }
        if self.kernel == 0 || self.base_filters == 0 || self.bytes_per_param == 0 {
            return Err(NetError::ZeroWidth);
        }
        Ok(())
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            input_len: 256,
            input_channels: 1,
            kernel: 16,
            base_filters: 32,
            num_classes: 2,
            bytes_per_param: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Conv1d,
    BatchNorm,
    Relu,
    Dropout,
    AddSkip,
    Lstm,
    Dense,
    Softmax,
}

impl LayerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LayerKind::Conv1d => "conv1d",
            LayerKind::BatchNorm => "batchnorm",
            LayerKind::Relu => "relu",
            LayerKind::Dropout => "dropout",
            LayerKind::AddSkip => "add-skip",
            LayerKind::Lstm => "lstm",
            LayerKind::Dense => "dense",
            LayerKind::Softmax => "softmax",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One layer of an expanded network. For the LSTM, dense and softmax layers
/// `output_len` is 1 (a single vector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_channels: u64,
    pub out_channels: u64,
    pub output_len: u64,
    pub params: u64,
    pub flops: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSummary {
    pub layers: Vec<LayerSpec>,
    pub param_count: u64,
    pub storage_bytes: u64,
    pub flops: u64,
}

impl NetworkSummary {
    /// Checks that every layer consumes the previous layer's output width.
    pub fn shapes_chain(&self) -> bool {
        self.layers
            .windows(2)
            .all(|w| w[0].out_channels == w[1].in_channels)
    }
}

/// Filter count of each residual block, `base·2^floor((i−1)/x)` for block i.
pub fn filter_schedule(arch: &ArchParams, base_filters: u64) -> Vec<u64> {
    let x = u32::from(arch.filter_interval());
    (0..u32::from(arch.blocks()))
        .map(|i| base_filters << (i / x))
        .collect()
}

struct Builder {
    layers: Vec<LayerSpec>,
    channels: u64,
    len: u64,
}

impl Builder {
    fn push(
        &mut self,
        kind: LayerKind,
        out_channels: u64,
        output_len: u64,
        params: u64,
        flops: u64,
    ) {
        self.layers.push(LayerSpec {
            kind,
            in_channels: self.channels,
            out_channels,
            output_len,
            params,
            flops,
        });
        self.channels = out_channels;
        self.len = output_len;
    }

    fn conv(&mut self, kernel: u64, filters: u64) {
        let (params, flops) = conv_cost(kernel, self.channels, filters, self.len);
        self.push(LayerKind::Conv1d, filters, self.len, params, flops);
    }

    fn batchnorm(&mut self) {
        let c = self.channels;
        self.push(LayerKind::BatchNorm, c, self.len, 4 * c, 2 * c * self.len);
    }

    fn relu(&mut self) {
        let c = self.channels;
        self.push(LayerKind::Relu, c, self.len, 0, c * self.len);
    }

    fn dropout(&mut self) {
        let c = self.channels;
        self.push(LayerKind::Dropout, c, self.len, 0, 0);
    }

    fn add_skip(&mut self, block_input: u64) {
        let c = self.channels;
        let (params, flops) = if block_input == c {
            (0, 0)
        } else {
            conv_cost(1, block_input, c, self.len)
        };
        self.push(
            LayerKind::AddSkip,
            c,
            self.len,
            params,
            flops + c * self.len,
        );
    }
}

fn conv_cost(kernel: u64, cin: u64, cout: u64, len: u64) -> (u64, u64) {
    (
        kernel * cin * cout + cout,
        2 * kernel * cin * cout * len + cout * len,
    )
}

/// Expands `arch` into its canonical stack and totals its costs.
pub fn build(arch: &ArchParams, cfg: &NetConfig) -> Result<NetworkSummary, NetError> {
    cfg.validate()?;
    let mut b = Builder {
        layers: Vec::with_capacity(8 * usize::from(arch.blocks()) + 6),
        channels: cfg.input_channels,
        len: cfg.input_len,
    };

    b.conv(cfg.kernel, cfg.base_filters);
    b.batchnorm();
    b.relu();

    for filters in filter_schedule(arch, cfg.base_filters) {
        let block_input = b.channels;
        b.conv(cfg.kernel, filters);
        b.batchnorm();
        b.relu();
        b.dropout();
        b.conv(cfg.kernel, filters);
        b.batchnorm();
        b.add_skip(block_input);
        b.relu();
    }

    let steps = b.len;
    let din = b.channels;
    let h = arch.lstm_cells();
    b.push(
        LayerKind::Lstm,
        h,
        1,
        4 * (din * h + h * h + h),
        2 * 4 * (din * h + h * h) * steps + 5 * h * steps,
    );
    let c = cfg.num_classes;
    b.push(LayerKind::Dense, c, 1, h * c + c, 2 * h * c);
    b.push(LayerKind::Softmax, c, 1, 0, 3 * c);

    let param_count = b.layers.iter().map(|l| l.params).sum::<u64>();
    let flops = b.layers.iter().map(|l| l.flops).sum();
    Ok(NetworkSummary {
        layers: b.layers,
        param_count,
        storage_bytes: param_count * cfg.bytes_per_param,
        flops,
    })
}

/// Largest storage footprint over `space`, used as `S_MAX`.
pub fn s_max(space: &ArchitectureSpace, cfg: &NetConfig) -> Result<u64, NetError> {
    let mut best = None;
    for arch in space {
        let s = build(arch, cfg)?.storage_bytes;
        best = Some(best.map_or(s, |b: u64| b.max(s)));
    }
    best.ok_or(NetError::EmptySpace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn arch(b: u8, x: u8, z: u8) -> ArchParams {
        ArchParams::new(b, x, z).unwrap()
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(
            filter_schedule(&arch(5, 2, 4), 32),
            vec![32, 32, 64, 64, 128]
        );
        assert!(filter_schedule(&arch(0, 1, 4), 32).is_empty());
        assert_eq!(filter_schedule(&arch(4, 4, 4), 32), vec![32, 32, 32, 32]);
    }

    #[test]
    fn zero_block_hand_count() {
        let net = build(&arch(0, 1, 4), &NetConfig::default()).unwrap();
        assert_eq!(net.param_count, 3842);
        assert_eq!(net.storage_bytes, 15368);
        assert!(net.shapes_chain());
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = NetConfig {
            num_classes: 1,
            ..NetConfig::default()
        };
        assert_eq!(build(&arch(0, 1, 4), &cfg), Err(NetError::TooFewClasses(1)));
        let cfg = NetConfig {
            input_len: 0,
            ..NetConfig::default()
        };
        assert_eq!(build(&arch(0, 1, 4), &cfg), Err(NetError::EmptyInput));
    }

    #[test]
    fn projection_only_when_width_changes() {
        let net = build(&arch(2, 1, 4), &NetConfig::default()).unwrap();
        let skips: Vec<_> = net
            .layers
            .iter()
            .filter(|l| l.kind == LayerKind::AddSkip)
            .collect();
        // block 1: 32 -> 32, no projection; block 2: 32 -> 64, projection
        assert_eq!(skips[0].params, 0);
        assert_eq!(skips[1].params, 32 * 64 + 64);
    }

    #[test]
    fn s_max_cases() {
        let cfg = NetConfig::default();
        let single = ArchitectureSpace::from_members(vec![arch(3, 2, 5)]);
        assert_eq!(
            s_max(&single, &cfg).unwrap(),
            build(&arch(3, 2, 5), &cfg).unwrap().storage_bytes
        );
        let empty = ArchitectureSpace::from_members(vec![]);
        assert_eq!(s_max(&empty, &cfg), Err(NetError::EmptySpace));
    }
}
