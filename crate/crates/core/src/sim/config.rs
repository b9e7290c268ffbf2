/// When the trajectory stores a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Recording {
    /// At time 0, after every jump, and at `t_end` unless absorbed.
    EveryJump,
    /// At `0, dt, 2 dt, ... <= t_end`; values are right-continuous.
    Grid(f64),
}

/// Which events go to the trajectory's event log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventLogging {
    None,
    Instantaneous,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    /// Master seed; the stream used is `(seed, replicate)`.
    pub seed: u64,
    pub replicate: u64,
    pub record: Recording,
    pub rtol: f64,
    pub atol: f64,
    /// Time tolerance for localising guard crossings.
    pub event_tol: f64,
    pub max_step: Option<f64>,
    /// Negative-rate clamps are always counted; only this many are logged.
    pub max_clamp_warnings: u64,
    /// Bound on consecutive zero-time instantaneous firings.
    pub max_instantaneous_chain: u64,
    /// Bound on jumps per unit of model time in the hybrid engine.
    pub max_jump_rate: f64,
    pub log: EventLogging,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_end: 1.0,
            seed: 0,
            replicate: 0,
            record: Recording::EveryJump,
            rtol: 1e-6,
            atol: 1e-9,
            event_tol: 1e-9,
            max_step: None,
            max_clamp_warnings: 10,
            max_instantaneous_chain: 1_000_000,
            max_jump_rate: 1e6,
            log: EventLogging::Instantaneous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("t_end must be positive and finite, got {0}")]
    TEnd(f64),
    #[error("grid spacing must be positive and finite, got {0}")]
    Grid(f64),
    #[error("tolerances must be positive")]
    Tolerance,
}

impl SimConfig {
    pub fn new(t_end: f64, seed: u64) -> Self {
        SimConfig {
            t_end,
            seed,
            ..SimConfig::default()
        }
    }

    pub fn with_grid(mut self, dt: f64) -> Self {
        self.record = Recording::Grid(dt);
        self
    }

    pub fn with_replicate(mut self, r: u64) -> Self {
        self.replicate = r;
        self
    }

    pub fn with_log(mut self, log: EventLogging) -> Self {
        self.log = log;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::TEnd(self.t_end));
        }
        if let Recording::Grid(dt) = self.record {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError::Grid(dt));
            }
        }
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !(positive(self.rtol) && positive(self.atol) && positive(self.event_tol)) {
            return Err(ConfigError::Tolerance);
        }
        if let Some(h) = self.max_step {
            if !positive(h) {
                return Err(ConfigError::Tolerance);
            }
        }
        Ok(())
    }

    /// Grid times `k * dt` not exceeding `t_end`.
    pub fn grid_times(&self) -> Option<Vec<f64>> {
        match self.record {
            Recording::EveryJump => None,
            Recording::Grid(dt) => {
                let n = (self.t_end / dt * (1.0 + 1e-12)).floor() as usize;
                Some((0..=n).map(|k| k as f64 * dt).collect())
            }
        }
    }
}
