//! Channel-use counts with all constant prefactors set to one.
//!
//! Compressed-sensing tomography of a rank-`r` state costs `t(r) = r²d²`
//! uses. Reconstructing from `n` output states therefore costs about
//! `n · t(r_out)`, which gives the per-method counts below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceMethod {
    Mixed,
    Pure,
    Choi,
    Sqpt,
}

impl ResourceMethod {
    pub const ALL: [ResourceMethod; 4] = [Self::Mixed, Self::Pure, Self::Choi, Self::Sqpt];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mixed => "mixed",
            Self::Pure => "pure",
            Self::Choi => "choi",
            Self::Sqpt => "sqpt",
        }
    }
}

impl fmt::Display for ResourceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ResourceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown resource method '{s}'")))
    }
}

/// Whether the channel is close enough to unitary that its outputs on pure
/// inputs are (nearly) pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NearUnitary,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceQuery {
    pub n_qubits: u32,
    /// Rank of the output states; only consulted by the pure method in the
    /// general regime.
    pub r_out: u64,
    pub method: ResourceMethod,
    pub regime: Regime,
}

/// Largest register for which every count fits in a `u128`.
pub const MAX_RESOURCE_QUBITS: u32 = 28;

fn dim(n_qubits: u32) -> u128 {
    1u128 << n_qubits
}

/// Compressed-sensing cost `r²d²` of a rank-`r` state in dimension `d`.
pub fn state_tomography_uses(rank: u64, d: u128) -> u128 {
    let r = rank as u128;
    r * r * d * d
}

pub fn channel_uses(q: &ResourceQuery) -> Result<u128> {
    if q.n_qubits == 0 || q.n_qubits > MAX_RESOURCE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "resource counts support 1..={MAX_RESOURCE_QUBITS} qubits, got {}",
            q.n_qubits
        )));
    }
    let d = dim(q.n_qubits);
    if q.r_out == 0 || q.r_out as u128 > d {
        return Err(Error::InvalidRank {
            rank: q.r_out,
            dim: d as u64,
        });
    }
    Ok(match (q.method, q.regime) {
        // Full-rank outputs regardless of the regime.
        (ResourceMethod::Mixed, _) => d.pow(4),
        (ResourceMethod::Pure, Regime::NearUnitary) => d.pow(3),
        (ResourceMethod::Pure, Regime::General) => (q.r_out as u128).pow(2) * d.pow(3),
        (ResourceMethod::Choi, Regime::NearUnitary) => d.pow(4),
        (ResourceMethod::Choi, Regime::General) => {
            return Err(Error::Unsupported(
                "the Choi route assumes a rank-one Choi matrix and has no general-regime count".into(),
            ))
        }
        (ResourceMethod::Sqpt, _) => q.n_qubits as u128 * 16u128.pow(q.n_qubits),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceRow {
    pub n_qubits: u32,
    pub method: ResourceMethod,
    pub regime: Regime,
    pub r_out: u64,
    pub channel_uses: u128,
}

/// Counts for every method and regime, over `n_range` and the given output
/// ranks. Ranks exceeding `2^N` are skipped for that `N`.
pub fn resource_table(n_range: impl IntoIterator<Item = u32>, r_outs: &[u64]) -> Result<Vec<ResourceRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        for method in ResourceMethod::ALL {
            // Process tomography makes no near-unitary assumption.
            let regime = if method == ResourceMethod::Sqpt {
                Regime::General
            } else {
                Regime::NearUnitary
            };
            let q = ResourceQuery {
                n_qubits: n,
                r_out: 1,
                method,
                regime,
            };
            rows.push(ResourceRow {
                n_qubits: n,
                method,
                regime,
                r_out: 1,
                channel_uses: channel_uses(&q)?,
            });
        }
        for &r in r_outs.iter().filter(|&&r| r >= 1 && (r as u128) <= dim(n.min(MAX_RESOURCE_QUBITS))) {
            let q = ResourceQuery {
                n_qubits: n,
                r_out: r,
                method: ResourceMethod::Pure,
                regime: Regime::General,
            };
            rows.push(ResourceRow {
                n_qubits: n,
                method: ResourceMethod::Pure,
                regime: Regime::General,
                r_out: r,
                channel_uses: channel_uses(&q)?,
            });
        }
    }
    Ok(rows)
}

pub fn format_resource_table(rows: &[ResourceRow]) -> String {
    let mut out = format!("{:>3}  {:<6} {:<13} {:>6}  {:>24}\n", "N", "method", "regime", "r_out", "channel_uses");
    for r in rows {
        let regime = match r.regime {
            Regime::NearUnitary => "near_unitary",
            Regime::General => "general",
        };
        out.push_str(&format!(
            "{:>3}  {:<6} {:<13} {:>6}  {:>24}\n",
            r.n_qubits, r.method, regime, r.r_out, r.channel_uses
        ));
    }
    out
}
