//! TTI-level single-cell downlink environment.
//!
//! One resource block group carries all `n_rb` resource blocks, so each TTI
//! the scheduler picks exactly one UE. Per TTI the environment:
//!
//! 1. transmits to the chosen UE (a new transport block at the MCS implied
//!    by its delayed SINR report and OLLA offset, or a HARQ retransmission
//!    at the stored MCS),
//! 2. resolves ACK/NACK against the true SINR, updates OLLA and HARQ,
//! 3. applies the throughput average update to every UE,
//! 4. advances every UE's channel and re-estimates every `I_n`.
//!
//! Three independent random streams are derived from the episode seed: UE
//! placement, channel evolution and decoding. The channel stream is consumed
//! identically whatever the scheduling decisions are, and decoding draws one
//! uniform per TTI, so two environments reset with the same seed see the
//! same channels (common random numbers).

pub mod channel;
pub mod link;
pub mod mcs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use channel::{ChannelSample, FadingState};
pub use link::{apply_olla, decode_outcome, BlerModel, HarqOutcome, HarqProcess, OllaParams};
pub use mcs::{select_mcs, McsEntry, McsTable};

use crate::error::{config_err, contract_err, Result};
use crate::sched::ThroughputTracker;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_ue: usize,
    pub bandwidth_hz: f64,
    /// Resource blocks aggregated into the single RBG.
    pub n_rb: u32,
    pub rb_bandwidth_hz: f64,
    pub tti_s: f64,
    pub target_bler: f64,
    /// Width of the logistic BLER curve.
    pub bler_slope_db: f64,
    pub olla_step_down_db: f64,
    pub olla_step_up_db: f64,
    pub olla_limit_db: f64,
    pub feedback_delay_ttis: usize,
    pub max_harq_retx: u32,
    /// Per-UE average SNR is uniform in this interval.
    pub avg_snr_range_db: [f64; 2],
    /// Per-TTI correlation of the complex fading gain; 0 is i.i.d.
    pub fading_correlation: f64,
    /// Averaging window `W` of the throughput tracker.
    pub pf_window: f64,
    /// Initial value of every `T_n`.
    pub t_init: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_ue: 5,
            bandwidth_hz: 10e6,
            n_rb: 50,
            rb_bandwidth_hz: 180e3,
            tti_s: 1e-3,
            target_bler: 0.1,
            bler_slope_db: 0.5,
            olla_step_down_db: 0.9,
            olla_step_up_db: 0.1,
            olla_limit_db: 10.0,
            feedback_delay_ttis: 4,
            max_harq_retx: 3,
            avg_snr_range_db: [0.0, 20.0],
            fading_correlation: 0.0,
            pf_window: ThroughputTracker::DEFAULT_WINDOW,
            t_init: ThroughputTracker::DEFAULT_EPSILON,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ue < 2 {
            return Err(config_err(format!("n_ue = {} but at least 2 UEs are required", self.n_ue)));
        }
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return Err(config_err("target_bler must lie in (0, 1)"));
        }
        if !(self.olla_step_down_db > 0.0) {
            return Err(config_err("olla_step_down_db must be positive"));
        }
        let balanced = self.olla_step_down_db * self.target_bler / (1.0 - self.target_bler);
        if (self.olla_step_up_db - balanced).abs() > 1e-9 {
            return Err(config_err(format!(
                "olla_step_up_db must equal step_down * bler / (1 - bler) = {balanced}"
            )));
        }
        if !(self.olla_limit_db > 0.0) {
            return Err(config_err("olla_limit_db must be positive"));
        }
        if self.n_rb == 0 || !(self.rb_bandwidth_hz > 0.0) || !(self.tti_s > 0.0) {
            return Err(config_err("n_rb, rb_bandwidth_hz and tti_s must be positive"));
        }
        if f64::from(self.n_rb) * self.rb_bandwidth_hz > self.bandwidth_hz * (1.0 + 1e-12) {
            return Err(config_err("RBG is wider than the carrier bandwidth"));
        }
        if !(self.bler_slope_db > 0.0) {
            return Err(config_err("bler_slope_db must be positive"));
        }
        let [lo, hi] = self.avg_snr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(config_err("avg_snr_range_db must be a finite [low, high] interval"));
        }
        if !(0.0..1.0).contains(&self.fading_correlation) {
            return Err(config_err("fading_correlation must lie in [0, 1)"));
        }
        if !(self.pf_window >= 1.0) || !(self.t_init > 0.0) {
            return Err(config_err("pf_window must be >= 1 and t_init positive"));
        }
        Ok(())
    }

    /// Parses and validates a TOML table of `SimConfig` fields.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bits carried per TTI by one unit of spectral efficiency.
    pub fn bits_per_se(&self) -> f64 {
        f64::from(self.n_rb) * self.rb_bandwidth_hz * self.tti_s
    }

    fn bler_model(&self) -> BlerModel {
        BlerModel {
            target_bler: self.target_bler,
            slope_db: self.bler_slope_db,
        }
    }

    fn olla_params(&self) -> OllaParams {
        OllaParams {
            step_up_db: self.olla_step_up_db,
            step_down_db: self.olla_step_down_db,
            limit_db: self.olla_limit_db,
        }
    }
}

/// Radio state of one UE.
#[derive(Debug, Clone)]
pub struct UeContext {
    pub ue_id: usize,
    pub avg_snr_db: f64,
    pub olla_offset_db: f64,
    pub harq: HarqProcess,
    /// The current `I_n` estimate, bits per TTI.
    pub last_instantaneous_rate: f64,
    pub channel: ChannelSample,
    fading: FadingState,
}

impl UeContext {
    fn new<R: Rng + ?Sized>(ue_id: usize, avg_snr_db: f64, cfg: &SimConfig, rng: &mut R) -> Self {
        let fading =
            FadingState::new(avg_snr_db, cfg.fading_correlation, cfg.feedback_delay_ttis, rng);
        Self {
            ue_id,
            avg_snr_db,
            olla_offset_db: 0.0,
            harq: HarqProcess::default(),
            last_instantaneous_rate: 0.0,
            channel: ChannelSample {
                ue_id,
                fading_power: 1.0,
                sinr_true_db: avg_snr_db,
                sinr_reported_db: avg_snr_db,
            },
            fading,
        }
    }
}

/// Advances the UE's fading process by one TTI and stores the new sample.
pub fn draw_channel<R: Rng + ?Sized>(ue: &mut UeContext, rng: &mut R) -> ChannelSample {
    ue.channel = ue.fading.advance(ue.ue_id, rng);
    ue.channel
}

/// `I_n` in bits per TTI: spectral efficiency of the MCS selected from the
/// reported SINR and OLLA offset, times the RBG bandwidth and TTI length.
pub fn estimate_instantaneous_rate(ue: &UeContext, table: &McsTable, cfg: &SimConfig) -> f64 {
    let pos = table.select_position(ue.channel.sinr_reported_db, ue.olla_offset_db);
    table.entries()[pos].spectral_efficiency * cfg.bits_per_se()
}

/// Raw MDP state: per-UE instantaneous rate `I_n` and average `T_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiObservation {
    pub tti: u64,
    pub inst_rate: Vec<f64>,
    pub avg_rate: Vec<f64>,
}

impl TtiObservation {
    pub fn n_ue(&self) -> usize {
        self.inst_rate.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtiResult {
    pub tti: u64,
    pub scheduled_ue: usize,
    pub ack: bool,
    pub retransmission: bool,
    /// `index` field of the MCS used.
    pub mcs_index: u8,
    /// Zero on NACK.
    pub delivered_bits: u64,
    /// `I_n(t)` for every UE, as seen when the decision was made.
    pub per_ue_inst_rate: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CellEnv {
    config: SimConfig,
    table: McsTable,
    bler: BlerModel,
    olla: OllaParams,
    ues: Vec<UeContext>,
    tracker: ThroughputTracker,
    channel_rng: ChaCha8Rng,
    decode_rng: ChaCha8Rng,
    tti: u64,
    episode_seed: u64,
    delivered: Vec<f64>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl CellEnv {
    /// Builds the environment and resets it with `config.seed`.
    pub fn new(config: SimConfig, table: McsTable) -> Result<Self> {
        config.validate()?;
        if table.is_empty() {
            return Err(config_err("MCS table is empty"));
        }
        let tracker = ThroughputTracker::new(config.n_ue, config.pf_window, config.t_init)?;
        let mut env = Self {
            bler: config.bler_model(),
            olla: config.olla_params(),
            ues: Vec::new(),
            tracker,
            channel_rng: stream_rng(config.seed, 1),
            decode_rng: stream_rng(config.seed, 2),
            tti: 0,
            episode_seed: config.seed,
            delivered: vec![0.0; config.n_ue],
            table,
            config,
        };
        env.reset(env.config.seed);
        Ok(env)
    }

    pub fn with_default_table(config: SimConfig) -> Result<Self> {
        Self::new(config, McsTable::lte_cqi())
    }

    /// Starts a new episode: UE average SNRs are drawn from `episode_seed`,
    /// OLLA and HARQ are cleared, `T_n` returns to its initial value and the
    /// feedback pipeline is primed so that TTI 0 has delayed reports.
    pub fn reset(&mut self, episode_seed: u64) -> TtiObservation {
        let cfg = &self.config;
        let mut placement = stream_rng(episode_seed, 0);
        self.channel_rng = stream_rng(episode_seed, 1);
        self.decode_rng = stream_rng(episode_seed, 2);
        let [lo, hi] = cfg.avg_snr_range_db;
        let snrs: Vec<f64> = (0..cfg.n_ue)
            .map(|_| if hi > lo { placement.random_range(lo..=hi) } else { lo })
            .collect();
        self.ues = snrs
            .into_iter()
            .enumerate()
            .map(|(n, snr)| UeContext::new(n, snr, cfg, &mut self.channel_rng))
            .collect();
        for _ in 0..=cfg.feedback_delay_ttis {
            for ue in &mut self.ues {
                draw_channel(ue, &mut self.channel_rng);
            }
        }
        self.tracker.reset();
        self.tti = 0;
        self.episode_seed = episode_seed;
        self.refresh_rates();
        self.observation()
    }

    fn refresh_rates(&mut self) {
        for ue in &mut self.ues {
            ue.last_instantaneous_rate = estimate_instantaneous_rate(ue, &self.table, &self.config);
        }
    }

    pub fn observation(&self) -> TtiObservation {
        TtiObservation {
            tti: self.tti,
            inst_rate: self.ues.iter().map(|u| u.last_instantaneous_rate).collect(),
            avg_rate: self.tracker.averages().to_vec(),
        }
    }

    /// Serves `scheduled_ue` for one TTI and advances the environment.
    pub fn step(&mut self, scheduled_ue: usize) -> Result<(TtiResult, TtiObservation)> {
        if scheduled_ue >= self.ues.len() {
            return Err(contract_err(format!(
                "scheduled UE {scheduled_ue} out of range for {} UEs",
                self.ues.len()
            )));
        }
        let per_ue_inst_rate: Vec<f64> =
            self.ues.iter().map(|u| u.last_instantaneous_rate).collect();
        let bits_per_se = self.config.bits_per_se();
        let max_retx = self.config.max_harq_retx;

        let ue = &mut self.ues[scheduled_ue];
        let retransmission = ue.harq.active;
        if !retransmission {
            let pos = self
                .table
                .select_position(ue.channel.sinr_reported_db, ue.olla_offset_db);
            let tb = (self.table.entries()[pos].spectral_efficiency * bits_per_se).floor() as u64;
            ue.harq.start(pos, tb);
        }
        let mcs = self.table.entries()[ue.harq.mcs];
        let ack = decode_outcome(&mcs, ue.channel.sinr_true_db, &self.bler, &mut self.decode_rng);
        ue.olla_offset_db = apply_olla(ue.olla_offset_db, ack, &self.olla);
        let delivered_bits = match ue.harq.feedback(ack, max_retx) {
            HarqOutcome::Delivered(bits) => bits,
            HarqOutcome::Pending | HarqOutcome::Dropped => 0,
        };

        self.delivered.iter_mut().for_each(|d| *d = 0.0);
        self.delivered[scheduled_ue] = delivered_bits as f64;
        self.tracker.update(&self.delivered)?;

        let result = TtiResult {
            tti: self.tti,
            scheduled_ue,
            ack,
            retransmission,
            mcs_index: mcs.index,
            delivered_bits,
            per_ue_inst_rate,
        };

        self.tti += 1;
        for ue in &mut self.ues {
            draw_channel(ue, &mut self.channel_rng);
        }
        self.refresh_rates();
        Ok((result, self.observation()))
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn table(&self) -> &McsTable {
        &self.table
    }

    pub fn ues(&self) -> &[UeContext] {
        &self.ues
    }

    pub fn tracker(&self) -> &ThroughputTracker {
        &self.tracker
    }

    pub fn tti(&self) -> u64 {
        self.tti
    }

    pub fn episode_seed(&self) -> u64 {
        self.episode_seed
    }

    pub fn n_ue(&self) -> usize {
        self.config.n_ue
    }

    /// Largest achievable `I_n`: the top MCS over the whole RBG.
    pub fn max_rate(&self) -> f64 {
        self.table.max_spectral_efficiency() * self.config.bits_per_se()
    }

    /// Current channel samples, one per UE.
    pub fn channels(&self) -> impl Iterator<Item = &ChannelSample> {
        self.ues.iter().map(|u| &u.channel)
    }
}
