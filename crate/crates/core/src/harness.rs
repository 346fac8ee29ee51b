//! Scenario registry, dispatch and report emission.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::algebra::RingSpec;
use crate::characterize::{
    closed_form_verify, eq12_verify, lemma1_verify, lemma3_verify, lemma4_verify, lemma5_verify,
    remark1_verify, remark2_counterexample, remark3_verify, theorem1_verify, theorem2_search,
    theorem3_verify, CharacterizeError, Report,
};
use crate::padic::DEFAULT_PRECISION;

/// Environment variable holding the default master seed.
pub const SEED_ENV: &str = "CHARFIELD_SEED";

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: u64 = 100;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Characterize(#[from] CharacterizeError),
}

type Result<T> = std::result::Result<T, HarnessError>;

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::BadConfig(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    Lemma1,
    ClosedForm,
    Theorem1,
    Theorem2,
    Remark1,
    Remark2,
    Theorem3,
    Remark3,
    Lemma3,
    Lemma4,
    Lemma5,
    Eq12,
}

impl Scenario {
    pub const ALL: [Scenario; 12] = [
        Scenario::Lemma1,
        Scenario::ClosedForm,
        Scenario::Theorem1,
        Scenario::Theorem2,
        Scenario::Remark1,
        Scenario::Remark2,
        Scenario::Theorem3,
        Scenario::Remark3,
        Scenario::Lemma3,
        Scenario::Lemma4,
        Scenario::Lemma5,
        Scenario::Eq12,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scenario::Lemma1 => "lemma1",
            Scenario::ClosedForm => "closed_form",
            Scenario::Theorem1 => "theorem1",
            Scenario::Theorem2 => "theorem2",
            Scenario::Remark1 => "remark1",
            Scenario::Remark2 => "remark2",
            Scenario::Theorem3 => "theorem3",
            Scenario::Remark3 => "remark3",
            Scenario::Lemma3 => "lemma3",
            Scenario::Lemma4 => "lemma4",
            Scenario::Lemma5 => "lemma5",
            Scenario::Eq12 => "eq12",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.id() == s)
            .ok_or_else(|| bad(format!("unknown scenario `{s}`")))
    }
}

/// Everything a scenario run depends on. Parameters a scenario does not use
/// are ignored; missing required ones are a configuration error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub field: Option<RingSpec>,
    pub p: Option<u64>,
    pub m: Option<u32>,
    pub level: Option<u32>,
    pub prec: u32,
    pub trials: u64,
    pub seed: u64,
    pub radius: u64,
    pub denom_bound: u64,
    pub timing: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            field: None,
            p: None,
            m: None,
            level: None,
            prec: DEFAULT_PRECISION,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            radius: 3,
            denom_bound: 2,
            timing: false,
        }
    }

    pub fn field(mut self, f: RingSpec) -> Self {
        self.field = Some(f);
        self
    }

    pub fn p(mut self, p: u64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn need_field(&self) -> Result<&RingSpec> {
        self.field
            .as_ref()
            .ok_or_else(|| bad(format!("{} needs --field", self.scenario)))
    }

    fn need_p(&self) -> Result<u64> {
        self.p
            .ok_or_else(|| bad(format!("{} needs --p", self.scenario)))
    }

    /// Checks ranges that would otherwise surface as verifier errors.
    pub fn validate(&self) -> Result<()> {
        use Scenario::*;
        match self.scenario {
            Lemma1 | ClosedForm | Theorem1 | Remark1 | Remark2 => {
                let f = self.need_field()?;
                if !f.is_finite() || !f.is_field() {
                    return Err(bad(format!(
                        "{} needs a finite field, got {f}",
                        self.scenario
                    )));
                }
                let two = f.characteristic() == 2;
                if two != (self.scenario == Remark1) {
                    return Err(bad(format!(
                        "{} needs {} characteristic, got {f}",
                        self.scenario,
                        if self.scenario == Remark1 {
                            "even"
                        } else {
                            "odd"
                        }
                    )));
                }
            }
            Theorem2 => {
                if self.denom_bound == 0 {
                    return Err(bad("--denom-bound must be at least 1"));
                }
            }
            Theorem3 | Lemma5 => {
                let p = self.need_p()?;
                if p == 2 || !crate::arith::is_prime(p) {
                    return Err(bad(format!(
                        "{} needs an odd prime, got {p}",
                        self.scenario
                    )));
                }
            }
            Lemma3 | Lemma4 | Eq12 => {
                let p = self.need_p()?;
                if !crate::arith::is_prime(p) || (self.scenario == Eq12 && p == 2) {
                    return Err(bad(format!("{} cannot use p = {p}", self.scenario)));
                }
            }
            Remark3 => {}
        }
        if self.scenario == Theorem3 && self.effective_level() <= self.m.unwrap_or(0) {
            return Err(bad("--level must exceed --m"));
        }
        if self.scenario == Remark3 && self.effective_level() <= self.m.unwrap_or(0) + 1 {
            return Err(bad("--level must exceed --m + 1"));
        }
        if self.scenario == Lemma3 && self.prec < 4 {
            return Err(bad("--prec must be at least 4"));
        }
        Ok(())
    }

    /// Level used by the scenario, with per-scenario defaults.
    pub fn effective_level(&self) -> u32 {
        self.level.unwrap_or(match self.scenario {
            Scenario::Remark3 => self.m.unwrap_or(0) + 2,
            Scenario::Lemma4 | Scenario::Lemma5 => 4,
            _ => 3,
        })
    }
}

/// Runs a validated scenario. Failed checks are reported in the returned
/// report; only configuration and internal errors are `Err`.
pub fn run(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let (trials, seed, level) = (config.trials, config.seed, config.effective_level());
    let m = config.m.unwrap_or(0);
    let mut report = match config.scenario {
        Scenario::Lemma1 => lemma1_verify(config.need_field()?, trials, seed)?,
        Scenario::ClosedForm => closed_form_verify(config.need_field()?, trials, seed)?,
        Scenario::Theorem1 => theorem1_verify(config.need_field()?, trials, seed)?,
        Scenario::Theorem2 => theorem2_search(config.radius, config.denom_bound, trials, seed)?,
        Scenario::Remark1 => remark1_verify(config.need_field()?, trials, seed)?,
        Scenario::Remark2 => remark2_counterexample(config.need_field()?)?,
        Scenario::Theorem3 => theorem3_verify(config.need_p()?, m, level, trials, seed)?,
        Scenario::Remark3 => remark3_verify(m, level)?,
        Scenario::Lemma3 => lemma3_verify(config.need_p()?, config.prec, trials, seed)?,
        Scenario::Lemma4 => lemma4_verify(config.need_p()?, level, trials, seed)?,
        Scenario::Lemma5 => lemma5_verify(config.need_p()?, level, trials, seed)?,
        Scenario::Eq12 => eq12_verify(config.need_p()?, level)?,
    };
    report.seed = seed;
    if config.timing {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

/// Writes the canonical JSON form of `report` to `path`.
pub fn emit(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_canonical_json()).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// 0 when every check held, 1 when a counterexample was found.
pub fn exit_code(report: &Report) -> i32 {
    if report.pass {
        0
    } else {
        1
    }
}

/// The master seed from `CHARFIELD_SEED`, or the built-in default.
pub fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| bad(format!("{SEED_ENV}={s} is not a u64"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
