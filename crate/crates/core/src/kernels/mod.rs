//! Signature kernels between trajectories and Gram matrices over datasets.
//!
//! Four interchangeable backends compute the pairwise kernel:
//!
//! | backend        | value                                                    |
//! |----------------|----------------------------------------------------------|
//! | `pde`          | untruncated kernel, finite-difference Goursat solution   |
//! | `truncated_dp` | exact level-`L` truncated kernel by dynamic programming  |
//! | `rfsf_dp`      | diagonally projected random Fourier signature features   |
//! | `rfsf_trp`     | tensor-random-projected random Fourier signature features|

mod cache;
mod gram;
mod pde;
mod rff;
mod signature;
mod truncated;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{decode_cache, encode_cache, read_cache, write_cache, CacheHeader};
pub use gram::{gram, mix_gram, GramMatrix, PRESCALE_WARNING_VARIATION};
pub use pde::{goursat_corner, sig_kernel_pde};
pub use rff::{
    rbf_kernel, rfsf_dp_features, rfsf_dp_with, rfsf_features, rfsf_full_with, rfsf_trp_features,
    rfsf_trp_with, RffWeights, TrpProjections,
};
pub use signature::{
    tensor_concat_product, truncated_signature, truncated_signature_with_budget,
    TruncatedSignature, DEFAULT_ELEMENT_BUDGET,
};
pub use truncated::{
    discrete_kernel_from_products, exact_kernel_from_products, increment_products,
    lifted_increment_products, sig_kernel_lifted, sig_kernel_truncated,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Backend {
    Pde,
    TruncatedDp,
    RfsfDp,
    RfsfTrp,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Pde => "pde",
            Backend::TruncatedDp => "truncated_dp",
            Backend::RfsfDp => "rfsf_dp",
            Backend::RfsfTrp => "rfsf_trp",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pde" => Ok(Backend::Pde),
            "truncated_dp" => Ok(Backend::TruncatedDp),
            "rfsf_dp" => Ok(Backend::RfsfDp),
            "rfsf_trp" => Ok(Backend::RfsfTrp),
            other => Err(Error::InvalidConfig(format!("unknown backend '{other}'"))),
        }
    }
}

/// Kernel backend and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub backend: Backend,
    /// Truncation level `L` (truncated and random-feature backends).
    pub level: usize,
    /// Dyadic refinement order of the PDE grid.
    pub pde_refinement: u32,
    /// Random Fourier feature count `D`.
    pub rff_dim: usize,
    /// RBF bandwidth `h` of the random-feature base kernel.
    pub bandwidth: f64,
    pub seed: u64,
    pub normalize: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            backend: Backend::TruncatedDp,
            level: 5,
            pde_refinement: 4,
            rff_dim: 256,
            bandwidth: 1.0,
            seed: 0,
            normalize: true,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.level == 0 {
            return Err(Error::InvalidConfig("level must be >= 1".into()));
        }
        if self.rff_dim == 0 {
            return Err(Error::InvalidConfig("rff_dim must be >= 1".into()));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if self.pde_refinement > 16 {
            return Err(Error::InvalidConfig(format!(
                "pde_refinement {} is too large (max 16)",
                self.pde_refinement
            )));
        }
        Ok(())
    }
}
