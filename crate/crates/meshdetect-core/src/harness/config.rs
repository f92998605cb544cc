//! Run configuration: the factorial experiment matrix plus every model and
//! detector parameter, loadable from a plain `key = value` text file.

use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorKind, DetectorParams};
use crate::mesh::MacParams;
use crate::signal::SignalParams;

/// One cell of the configuration matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub n_nodes: u32,
    pub snr_db: f64,
}

impl ConfigEntry {
    /// Deployment square side: 350 m at 10 nodes, 750 m at 50; other sizes
    /// scale the area with the node count.
    pub fn side_m(&self) -> f64 {
        match self.n_nodes {
            10 => 350.0,
            50 => 750.0,
            n => 350.0 * (n as f64 / 10.0).sqrt(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}n_{}db", self.n_nodes, self.snr_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub configurations: Vec<ConfigEntry>,
    pub duration_hr: f64,
    pub replicates: u32,
    pub master_seed: u64,
    pub detectors: Vec<DetectorKind>,
    pub radio_range_m: f64,
    pub signal: SignalParams,
    pub mac: MacParams,
    pub detector_params: DetectorParams,
    pub roc_enabled: bool,
    pub roc_multipliers: Vec<f64>,
    pub lipski_k_sweep: Vec<f64>,
    pub trace_enabled: bool,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            configurations: vec![
                ConfigEntry { n_nodes: 10, snr_db: 18.0 },
                ConfigEntry { n_nodes: 10, snr_db: 12.0 },
            ],
            duration_hr: 24.0,
            replicates: 5,
            master_seed: 7,
            detectors: DetectorKind::ALL.to_vec(),
            radio_range_m: 200.0,
            signal: SignalParams::default(),
            mac: MacParams::default(),
            detector_params: DetectorParams::default(),
            roc_enabled: false,
            roc_multipliers: crate::metrics::default_multipliers(),
            lipski_k_sweep: vec![3.0, 5.0, 8.0],
            trace_enabled: false,
            out_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: v.into(),
        reason: "not a number".into(),
    })
}

fn parse_u64(key: &str, v: &str) -> Result<u64, ConfigError> {
    v.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: v.into(),
        reason: "not an integer".into(),
    })
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            reason: "not a boolean".into(),
        }),
    }
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64), ConfigError> {
    let parts = parse_f64_list(key, v)?;
    if parts.len() != 2 {
        return Err(ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            reason: "expected two comma-separated numbers".into(),
        });
    }
    Ok((parts[0], parts[1]))
}

impl RunConfig {
    /// Parse a plain-text `key = value` document. Lines starting with `#`
    /// and blank lines are ignored; later keys override earlier ones.
    pub fn from_kv_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        let mut nodes: Option<Vec<f64>> = None;
        let mut snrs: Option<Vec<f64>> = None;
        let mut explicit_configs: Option<Vec<ConfigEntry>> = None;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "nodes" => nodes = Some(parse_f64_list(key, value)?),
                "snr_db" => snrs = Some(parse_f64_list(key, value)?),
                "configs" => {
                    let mut entries = Vec::new();
                    for part in value.split(',').filter(|s| !s.trim().is_empty()) {
                        let (n, s) = part.split_once(':').ok_or_else(|| ConfigError::BadValue {
                            key: key.into(),
                            value: part.into(),
                            reason: "expected nodes:snr".into(),
                        })?;
                        entries.push(ConfigEntry {
                            n_nodes: parse_u64(key, n)? as u32,
                            snr_db: parse_f64(key, s)?,
                        });
                    }
                    explicit_configs = Some(entries);
                }
                _ => config.apply_override(key, value)?,
            }
        }

        if let Some(entries) = explicit_configs {
            config.configurations = entries;
        } else if nodes.is_some() || snrs.is_some() {
            let nodes = nodes.unwrap_or_else(|| vec![10.0]);
            let snrs = snrs.unwrap_or_else(|| vec![18.0, 12.0]);
            config.configurations = nodes
                .iter()
                .flat_map(|&n| {
                    snrs.iter().map(move |&s| ConfigEntry {
                        n_nodes: n as u32,
                        snr_db: s,
                    })
                })
                .collect();
        }
        Ok(config)
    }

    /// Apply a single `key = value` override (also used for CLI flags).
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let s = &mut self.signal;
        let m = &mut self.mac;
        let d = &mut self.detector_params;
        match key {
            "duration_hr" => self.duration_hr = parse_f64(key, value)?,
            "replicates" => self.replicates = parse_u64(key, value)? as u32,
            "master_seed" | "seed" => self.master_seed = parse_u64(key, value)?,
            "radio_range_m" | "range_m" => self.radio_range_m = parse_f64(key, value)?,
            "roc" => self.roc_enabled = parse_bool(key, value)?,
            "trace" => self.trace_enabled = parse_bool(key, value)?,
            "k_sweep" => self.lipski_k_sweep = parse_f64_list(key, value)?,
            "roc_multipliers" => self.roc_multipliers = parse_f64_list(key, value)?,
            "out_dir" => self.out_dir = Some(value.to_string()),
            "detectors" => {
                let mut kinds = Vec::new();
                for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                    kinds.push(DetectorKind::parse(part).ok_or_else(|| ConfigError::BadValue {
                        key: key.into(),
                        value: part.into(),
                        reason: "unknown detector (expected tsnfa,lipski,ca,os,cusum)".into(),
                    })?);
                }
                self.detectors = kinds;
            }

            "signal.base_noise_power" => s.base_noise_power = parse_f64(key, value)?,
            "signal.drift_excursion_db" => s.drift_excursion_db = parse_f64(key, value)?,
            "signal.drift_period_s" => s.drift_period_s = parse_f64(key, value)?,
            "signal.mains_freq_hz" => s.mains_freq_hz = parse_f64(key, value)?,
            "signal.mains_amp_factor" => s.mains_amp_factor = parse_f64(key, value)?,
            "signal.burst_freq_range_hz" => s.burst_freq_range_hz = parse_pair(key, value)?,
            "signal.burst_rate_per_hr" => s.burst_rate_per_hr = parse_f64(key, value)?,
            "signal.burst_duration_s" => s.burst_duration_s = parse_pair(key, value)?,
            "signal.burst_amp_factor_max" => s.burst_amp_factor_max = parse_f64(key, value)?,
            "signal.burst_bin_range" => s.burst_bin_range = parse_pair(key, value)?,
            "signal.burst_refractory_s" => s.burst_refractory_s = parse_f64(key, value)?,
            "signal.burst_alias_range_hz" => s.burst_alias_range_hz = parse_pair(key, value)?,
            "signal.regime_rate_per_hr" => s.regime_rate_per_hr = parse_f64(key, value)?,
            "signal.regime_duration_s" => s.regime_duration_s = parse_pair(key, value)?,
            "signal.regime_energy_range" => s.regime_energy_range = parse_pair(key, value)?,
            "signal.regime_alias_range_hz" => s.regime_alias_range_hz = parse_pair(key, value)?,
            "signal.event_band_hz" => s.event_band_hz = parse_pair(key, value)?,
            "signal.event_carrier_range_hz" => s.event_carrier_range_hz = parse_pair(key, value)?,
            "signal.event_duration_s" => s.event_duration_s = parse_f64(key, value)?,
            "signal.event_decay_tau_s" => s.event_decay_tau_s = parse_f64(key, value)?,
            "signal.event_rate_per_hr" => s.event_rate_per_hr = parse_f64(key, value)?,
            "signal.snr_jitter_db" => s.snr_jitter_db = parse_f64(key, value)?,

            "mac.cw_min" => m.cw_min = parse_u64(key, value)? as u32,
            "mac.cw_max" => m.cw_max = parse_u64(key, value)? as u32,
            "mac.slot_s" => m.slot_s = parse_f64(key, value)?,
            "mac.max_retries" => m.max_retries = parse_u64(key, value)? as u32,
            "mac.phy_bitrate_bps" => m.phy_bitrate_bps = parse_f64(key, value)?,
            "mac.payload_bytes" => m.payload_bytes = parse_u64(key, value)? as u32,
            "mac.header_bytes" => m.header_bytes = parse_u64(key, value)? as u32,
            "mac.collision_cap" => m.collision_cap = parse_f64(key, value)?,

            "det.tsnfa.zeta" => d.tsnfa.zeta = parse_f64(key, value)?,
            "det.tsnfa.stage1_depth" => d.tsnfa.stage1_depth = parse_u64(key, value)? as usize,
            "det.tsnfa.stage2_depth" => d.tsnfa.stage2_depth = parse_u64(key, value)? as usize,
            "det.lipski.k" => d.lipski.k = parse_f64(key, value)?,
            "det.lipski.n_bins_min" => d.lipski.n_bins_min = parse_u64(key, value)? as usize,
            "det.lipski.cal_frames" => d.lipski.cal_frames = parse_u64(key, value)?,
            "det.lipski.alpha" => d.lipski.alpha = parse_f64(key, value)?,
            "det.cfar.n_ref" => {
                d.cfar.n_ref = parse_u64(key, value)? as usize;
                d.cfar.alpha_ca = crate::detectors::cfar_alpha_ca(d.cfar.n_ref as u32, 1e-3);
                d.cfar.os_rank = 3 * d.cfar.n_ref / 4;
            }
            "det.cfar.alpha_ca" => d.cfar.alpha_ca = parse_f64(key, value)?,
            "det.cfar.alpha_os" => d.cfar.alpha_os = parse_f64(key, value)?,
            "det.cfar.os_rank" => d.cfar.os_rank = parse_u64(key, value)? as usize,
            "det.cusum.alpha_fa" => d.cusum.alpha_fa = parse_f64(key, value)?,
            "det.cusum.snr_factor" => d.cusum.snr_factor = parse_f64(key, value)?,
            "det.cusum.k_end_factor" => d.cusum.k_end_factor = parse_f64(key, value)?,
            "det.cusum.cal_frames" => d.cusum.cal_frames = parse_u64(key, value)?,
            "det.cusum.trim_fraction" => d.cusum.trim_fraction = parse_f64(key, value)?,
            "det.cusum.rearm_fraction" => d.cusum.rearm_fraction = parse_f64(key, value)?,

            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Frames per run at the fixed 1.28 s frame period.
    pub fn frames_total(&self) -> u64 {
        (self.duration_hr * 3600.0 / self.signal.frame_period_s()).round() as u64
    }

    /// Every resolved parameter as a reproducible text document.
    pub fn echo_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push(
            "configs",
            self.configurations
                .iter()
                .map(|c| format!("{}:{}", c.n_nodes, c.snr_db))
                .collect::<Vec<_>>()
                .join(","),
        );
        push("duration_hr", format!("{}", self.duration_hr));
        push("replicates", format!("{}", self.replicates));
        push("master_seed", format!("{}", self.master_seed));
        push(
            "detectors",
            self.detectors.iter().map(|d| d.label().to_string()).collect::<Vec<_>>().join(","),
        );
        push("radio_range_m", format!("{}", self.radio_range_m));
        push("roc", format!("{}", self.roc_enabled));
        push("trace", format!("{}", self.trace_enabled));
        push(
            "k_sweep",
            self.lipski_k_sweep.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        push(
            "roc_multipliers",
            self.roc_multipliers.iter().map(|k| format!("{k}")).collect::<Vec<_>>().join(","),
        );

        let s = &self.signal;
        push("signal.base_noise_power", format!("{}", s.base_noise_power));
        push("signal.drift_excursion_db", format!("{}", s.drift_excursion_db));
        push("signal.drift_period_s", format!("{}", s.drift_period_s));
        push("signal.mains_freq_hz", format!("{}", s.mains_freq_hz));
        push("signal.mains_amp_factor", format!("{}", s.mains_amp_factor));
        push("signal.burst_freq_range_hz", format!("{},{}", s.burst_freq_range_hz.0, s.burst_freq_range_hz.1));
        push("signal.burst_rate_per_hr", format!("{}", s.burst_rate_per_hr));
        push("signal.burst_duration_s", format!("{},{}", s.burst_duration_s.0, s.burst_duration_s.1));
        push("signal.burst_amp_factor_max", format!("{}", s.burst_amp_factor_max));
        push("signal.burst_bin_range", format!("{},{}", s.burst_bin_range.0, s.burst_bin_range.1));
        push("signal.burst_refractory_s", format!("{}", s.burst_refractory_s));
        push("signal.burst_alias_range_hz", format!("{},{}", s.burst_alias_range_hz.0, s.burst_alias_range_hz.1));
        push("signal.regime_rate_per_hr", format!("{}", s.regime_rate_per_hr));
        push("signal.regime_duration_s", format!("{},{}", s.regime_duration_s.0, s.regime_duration_s.1));
        push("signal.regime_energy_range", format!("{},{}", s.regime_energy_range.0, s.regime_energy_range.1));
        push("signal.regime_alias_range_hz", format!("{},{}", s.regime_alias_range_hz.0, s.regime_alias_range_hz.1));
        push("signal.event_band_hz", format!("{},{}", s.event_band_hz.0, s.event_band_hz.1));
        push("signal.event_carrier_range_hz", format!("{},{}", s.event_carrier_range_hz.0, s.event_carrier_range_hz.1));
        push("signal.event_duration_s", format!("{}", s.event_duration_s));
        push("signal.event_decay_tau_s", format!("{}", s.event_decay_tau_s));
        push("signal.event_rate_per_hr", format!("{}", s.event_rate_per_hr));
        push("signal.snr_jitter_db", format!("{}", s.snr_jitter_db));

        let m = &self.mac;
        push("mac.cw_min", format!("{}", m.cw_min));
        push("mac.cw_max", format!("{}", m.cw_max));
        push("mac.slot_s", format!("{}", m.slot_s));
        push("mac.max_retries", format!("{}", m.max_retries));
        push("mac.phy_bitrate_bps", format!("{}", m.phy_bitrate_bps));
        push("mac.payload_bytes", format!("{}", m.payload_bytes));
        push("mac.header_bytes", format!("{}", m.header_bytes));
        push("mac.collision_cap", format!("{}", m.collision_cap));

        let d = &self.detector_params;
        push("det.tsnfa.zeta", format!("{}", d.tsnfa.zeta));
        push("det.tsnfa.stage1_depth", format!("{}", d.tsnfa.stage1_depth));
        push("det.tsnfa.stage2_depth", format!("{}", d.tsnfa.stage2_depth));
        push("det.lipski.k", format!("{}", d.lipski.k));
        push("det.lipski.n_bins_min", format!("{}", d.lipski.n_bins_min));
        push("det.lipski.cal_frames", format!("{}", d.lipski.cal_frames));
        push("det.lipski.alpha", format!("{}", d.lipski.alpha));
        push("det.cfar.n_ref", format!("{}", d.cfar.n_ref));
        push("det.cfar.alpha_ca", format!("{}", d.cfar.alpha_ca));
        push("det.cfar.alpha_os", format!("{}", d.cfar.alpha_os));
        push("det.cfar.os_rank", format!("{}", d.cfar.os_rank));
        push("det.cusum.alpha_fa", format!("{}", d.cusum.alpha_fa));
        push("det.cusum.snr_factor", format!("{}", d.cusum.snr_factor));
        push("det.cusum.k_end_factor", format!("{}", d.cusum.k_end_factor));
        push("det.cusum.cal_frames", format!("{}", d.cusum.cal_frames));
        push("det.cusum.trim_fraction", format!("{}", d.cusum.trim_fraction));
        push("det.cusum.rearm_fraction", format!("{}", d.cusum.rearm_fraction));
        out
    }
}
