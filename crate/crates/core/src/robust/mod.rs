//! Error- and deletion-robust torn-paper codecs.
pub mod del;
pub mod sub;
pub mod windows;

use serde::{Deserialize, Serialize};

use crate::alphabet::{QString, SegmentCollection};
use crate::codec::{code_redundancy, Codeword};
use crate::ecc::BecKind;
use crate::error::{param_err, Result};
use crate::params::CodeParams;

pub use del::{lhat_max, lhat_max_formula, robust_decode_del, robust_encode_del, DelDecodeReport, DeletionCodec};
pub use sub::{
    build_z, reconstruct, restrict, robust_decode_sub, robust_encode_sub, BlockStatus, ReconstructionState,
    SubDecodeReport, SubstitutionCodec, ZEntry, ZMap,
};
pub use windows::{classify_window, ind_prime, windows, Classification, Validity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Substitution,
    Deletion,
}

impl std::str::FromStr for NoiseModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "substitution" | "sub" => Ok(NoiseModel::Substitution),
            "deletion" | "del" => Ok(NoiseModel::Deletion),
            _ => Err(param_err!("unknown noise model {s:?}")),
        }
    }
}

/// Robust codec settings, stored under the `robust` key of a params record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustConfig {
    pub t: usize,
    pub model: NoiseModel,
    /// Burst-erasure code of the deletion codec.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bec: Option<BecKind>,
}

impl RobustConfig {
    pub fn substitution(t: usize) -> Self {
        Self { t, model: NoiseModel::Substitution, bec: None }
    }

    pub fn deletion(t: usize, bec: BecKind) -> Self {
        Self { t, model: NoiseModel::Deletion, bec: Some(bec) }
    }

    /// The BEC kind, defaulting to interleaved parity for `t ≤ 1`.
    pub fn bec_kind(&self) -> BecKind {
        self.bec.unwrap_or(if self.t <= 1 { BecKind::InterleavedParity } else { BecKind::InterleavedRs })
    }
}

/// A params record with an optional robust configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsEnvelope {
    #[serde(flatten)]
    pub params: CodeParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<RobustConfig>,
}

impl ParamsEnvelope {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }

    /// Parses and re-derives the params, rejecting inconsistent records.
    pub fn from_json(text: &str) -> Result<Self> {
        let env: ParamsEnvelope =
            serde_json::from_str(text).map_err(|e| param_err!("malformed params JSON: {e}"))?;
        let derived = env.params.raw().derive()?;
        if derived != env.params {
            return Err(param_err!("serialized params disagree with their re-derivation"));
        }
        Ok(env)
    }
}

/// The noiseless codec or a robust one, as selected by an optional [`RobustConfig`].
#[derive(Clone, Debug)]
pub enum AnyCodec {
    Plain(CodeParams),
    Sub(SubstitutionCodec),
    Del(DeletionCodec),
}

impl AnyCodec {
    pub fn new(params: CodeParams, robust: Option<&RobustConfig>) -> Result<Self> {
        Ok(match robust {
            None => AnyCodec::Plain(params),
            Some(r) if r.model == NoiseModel::Substitution => AnyCodec::Sub(SubstitutionCodec::new(params, r.t)?),
            Some(r) => AnyCodec::Del(DeletionCodec::new(params, r.t, r.bec_kind())?),
        })
    }

    pub fn params(&self) -> &CodeParams {
        match self {
            AnyCodec::Plain(p) => p,
            AnyCodec::Sub(c) => c.params(),
            AnyCodec::Del(c) => c.params(),
        }
    }

    pub fn message_len(&self) -> usize {
        match self {
            AnyCodec::Plain(p) => p.message_len(),
            AnyCodec::Sub(c) => c.message_len(),
            AnyCodec::Del(c) => c.message_len(),
        }
    }

    pub fn encode(&self, x: &QString) -> Result<Codeword> {
        match self {
            AnyCodec::Plain(p) => crate::codec::encode(x, p),
            AnyCodec::Sub(c) => c.encode(x),
            AnyCodec::Del(c) => c.encode(x),
        }
    }

    pub fn decode(&self, received: &SegmentCollection) -> Result<QString> {
        match self {
            AnyCodec::Plain(p) => crate::codec::decode(received, p),
            AnyCodec::Sub(c) => c.decode(received),
            AnyCodec::Del(c) => c.decode(received),
        }
    }
}

/// Extra redundancy of a robust codec over the noiseless one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRedundancy {
    pub model: NoiseModel,
    pub t: usize,
    /// Information blocks given up to the outer code.
    pub blocks: usize,
    /// `blocks·m`: the exact extra redundancy.
    pub extra: usize,
    /// Blocks given up according to the closed form (`2t`, or `⌈ρ_BEC/N⌉·⌊f/(f−1)⌋`).
    pub formula_blocks: usize,
    pub formula_extra: usize,
    /// Length of the burst-erasure redundancy `ρ_BEC` (deletion only).
    pub bec_redundancy: Option<usize>,
    /// `n·k − log_q |C|` of the robust code.
    pub total: usize,
}

impl DeltaRedundancy {
    /// Whether the implemented `ρ` exceeds the closed form (small `f`).
    pub fn exceeds_formula(&self) -> bool {
        self.blocks > self.formula_blocks
    }
}

/// Computes the extra redundancy and checks that the robust code's message
/// length agrees with `code_redundancy + extra`.
pub fn delta_redundancy(params: &CodeParams, config: &RobustConfig) -> Result<DeltaRedundancy> {
    let base = code_redundancy(params);
    let (blocks, formula_blocks, bec_redundancy, message_len) = match config.model {
        NoiseModel::Substitution => {
            let c = SubstitutionCodec::new(*params, config.t)?;
            (2 * config.t, 2 * config.t, None, c.message_len())
        }
        NoiseModel::Deletion => {
            let c = DeletionCodec::new(*params, config.t, config.bec_kind())?;
            (c.rho(), c.rho_formula(), Some(c.bec().redundancy_len()), c.message_len())
        }
    };
    let extra = blocks * params.m;
    let total = params.total_len() - message_len;
    debug_assert_eq!(total, base + extra);
    Ok(DeltaRedundancy {
        model: config.model,
        t: config.t,
        blocks,
        extra,
        formula_blocks,
        formula_extra: formula_blocks * params.m,
        bec_redundancy,
        total,
    })
}
