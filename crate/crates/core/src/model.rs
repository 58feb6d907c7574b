//! Physical and protocol constants shared by every other module.
//!
//! Unit conventions: all times in seconds, all sizes in bits, all rates in
//! bits/second. Config files may give sizes in bytes via `*_bytes` keys.

use crate::kv;
use std::ops::Deref;
use thiserror::Error;

pub const BITS_PER_BYTE: f64 = 8.0;

pub fn bits_from_bytes(bytes: f64) -> f64 {
    bytes * BITS_PER_BYTE
}

pub fn bytes_from_bits(bits: f64) -> f64 {
    bits / BITS_PER_BYTE
}

/// System-wide constants of the fronthaul PON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Line rate per wavelength, bits/s.
    pub r_e: f64,
    /// Configured eCPRI traffic rate per ONU, bits/s.
    pub r_c: f64,
    /// Scheduling delay budget, s.
    pub d_b: f64,
    /// Required registration window duration, s.
    pub t_reg: f64,
    /// Maximum gap between registration windows, s.
    pub t_gap: f64,
    /// Guard band per slot, s.
    pub guard: f64,
    /// eCPRI basic frame size, bits.
    pub alpha: f64,
    /// Maximum Ethernet payload size, bits.
    pub e_max: f64,
    /// Ethernet header size, bits.
    pub l_hdr: f64,
}

impl Default for SystemParams {
    /// 10G EPON carrying 614.4 Mbps eCPRI per ONU, 150 us delay budget,
    /// 250 us registration window at most every 100 ms, 1 us guard band,
    /// 16-byte eCPRI frames in 1500-byte Ethernet payloads with 26-byte
    /// headers.
    fn default() -> Self {
        SystemParams {
            r_e: 10e9,
            r_c: 614.4e6,
            d_b: 150e-6,
            t_reg: 250e-6,
            t_gap: 100e-3,
            guard: 1e-6,
            alpha: bits_from_bytes(16.0),
            e_max: bits_from_bytes(1500.0),
            l_hdr: bits_from_bytes(26.0),
        }
    }
}

impl SystemParams {
    /// Worst-case frame inter-arrival time `alpha / R_C`, s.
    pub fn frame_interval(&self) -> f64 {
        self.alpha / self.r_c
    }

    /// Applies config-file overrides onto `self`. Recognized keys:
    /// `r_e_bps`, `r_c_bps`, `d_b_s`, `t_reg_s`, `t_gap_s`, `g_s`,
    /// `alpha_bytes`, `e_max_bytes`, `l_hdr_bytes` (sizes also accepted
    /// with a `_bits` suffix).
    pub fn apply_kv(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, (key, value)) in kv::parse(text)?.into_iter().enumerate() {
            let v = kv::parse_f64(idx + 1, &key, &value)?;
            match key.as_str() {
                "r_e_bps" => self.r_e = v,
                "r_c_bps" => self.r_c = v,
                "d_b_s" => self.d_b = v,
                "t_reg_s" => self.t_reg = v,
                "t_gap_s" => self.t_gap = v,
                "g_s" => self.guard = v,
                "alpha_bytes" => self.alpha = bits_from_bytes(v),
                "e_max_bytes" => self.e_max = bits_from_bytes(v),
                "l_hdr_bytes" => self.l_hdr = bits_from_bytes(v),
                "alpha_bits" => self.alpha = v,
                "e_max_bits" => self.e_max = v,
                "l_hdr_bits" => self.l_hdr = v,
                _ => return Err(ConfigError::UnknownKey(key)),
            }
        }
        Ok(())
    }

    /// Defaults overridden by a config-file text.
    pub fn from_kv_str(text: &str) -> Result<SystemParams, ConfigError> {
        let mut params = SystemParams::default();
        params.apply_kv(text)?;
        Ok(params)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Kv(#[from] kv::KvError),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
}

/// Parameters that passed [`validate_params`]. Immutable afterwards; safe to
/// share across concurrent sweep workers.
#[derive(Debug, Clone, Copy)]
pub struct ValidatedParams(SystemParams);

impl Deref for ValidatedParams {
    type Target = SystemParams;

    fn deref(&self) -> &SystemParams {
        &self.0
    }
}

impl AsRef<SystemParams> for ValidatedParams {
    fn as_ref(&self) -> &SystemParams {
        &self.0
    }
}

#[derive(Debug, Error)]
#[error("invalid system parameters: {}", violations.join("; "))]
pub struct InvalidParams {
    pub violations: Vec<String>,
}

/// Checks every invariant and returns the parameters unchanged on success.
/// All violations are reported at once, by name.
pub fn validate_params(p: SystemParams) -> Result<ValidatedParams, InvalidParams> {
    let mut violations = Vec::new();
    let fields = [
        ("r_e", p.r_e),
        ("r_c", p.r_c),
        ("d_b", p.d_b),
        ("t_reg", p.t_reg),
        ("t_gap", p.t_gap),
        ("g", p.guard),
        ("alpha", p.alpha),
        ("e_max", p.e_max),
        ("l_hdr", p.l_hdr),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            violations.push(format!("{name} must be finite (got {value})"));
        } else if value <= 0.0 {
            violations.push(format!("{name} must be strictly positive (got {value})"));
        }
    }
    if p.r_c.is_finite() && p.r_e.is_finite() && p.r_c >= p.r_e {
        violations.push(format!("R_C < R_E violated (R_C={}, R_E={})", p.r_c, p.r_e));
    }
    if p.alpha.is_finite() && p.e_max.is_finite() && p.alpha > p.e_max {
        violations.push(format!(
            "alpha <= E_max violated (alpha={}, E_max={})",
            p.alpha, p.e_max
        ));
    }
    if violations.is_empty() {
        Ok(ValidatedParams(p))
    } else {
        Err(InvalidParams { violations })
    }
}

/// Wavelength count and ONUs per wavelength outside registration periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub w: u32,
    pub n: u32,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("need at least 2 upstream wavelengths, got {0}")]
    TooFewWavelengths(u32),
    #[error("need at least 1 ONU per wavelength, got {0}")]
    NoOnus(u32),
}

impl Topology {
    pub fn new(n: u32, w: u32) -> Result<Topology, TopologyError> {
        if w < 2 {
            return Err(TopologyError::TooFewWavelengths(w));
        }
        if n < 1 {
            return Err(TopologyError::NoOnus(n));
        }
        Ok(Topology { w, n })
    }

    /// Total ONUs in the system.
    pub fn total_onus(&self) -> u32 {
        self.n * self.w
    }
}
