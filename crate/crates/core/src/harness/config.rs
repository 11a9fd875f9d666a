//! Flat `key = value` sweep configuration.

use crate::error::{Error, Result};
use crate::learners::SelectionRule;
use crate::qcore::state::DEFAULT_CAP;
use crate::shadows::ShadowScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Neighbouring-pair gates on the first `region_width` qubits.
    Concentrated,
    /// Neighbouring-pair gates anywhere on the line.
    RandomPlacement,
}

impl Case {
    pub(crate) fn code(self) -> u64 {
        match self {
            Case::Concentrated => 1,
            Case::RandomPlacement => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    State,
    UnitaryChoi,
    UnitaryNoAncilla,
}

/// Number of median-of-means batches used when evaluating `N` snapshots.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchRule {
    /// `⌈2 ln(2|net|/δ)⌉`, odd, capped at `N`.
    Auto { delta: f64 },
    /// A fixed odd count, capped at `N`.
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepConfig {
    pub case: Case,
    pub n_total: usize,
    pub g_range: Vec<usize>,
    pub n_range: Vec<usize>,
    pub trials: usize,
    pub gate_set_seed: u64,
    pub trial_seed_base: u64,
    pub fidelity_thresholds: Vec<f64>,
    pub mode: SweepMode,
    pub gate_set_size: usize,
    /// Width of the qubit window in the concentrated case.
    pub region_width: usize,
    /// Largest allowed gate support; defaults to the cap (halved for Choi
    /// states, 8 for the ancilla-free learner).
    pub max_active: Option<usize>,
    pub cap: usize,
    pub shadow_scheme: ShadowScheme,
    pub selection_rule: SelectionRule,
    pub batches: BatchRule,
    pub enumeration_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            case: Case::Concentrated,
            n_total: 10_000,
            g_range: (1..=10).collect(),
            n_range: (1..=100).collect(),
            trials: 1000,
            gate_set_seed: 1,
            trial_seed_base: 2,
            fidelity_thresholds: vec![0.999],
            mode: SweepMode::State,
            gate_set_size: 2,
            region_width: 4,
            max_active: None,
            cap: DEFAULT_CAP,
            shadow_scheme: ShadowScheme::HaarDirect,
            selection_rule: SelectionRule::OverlapArgmax,
            batches: BatchRule::Auto { delta: 0.05 },
            enumeration_cap: crate::nets::DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// `a..b` (exclusive), `a..=b` (inclusive), or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| Error::Config(format!("bad integer {t:?}: {e}")));
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if v.is_empty() {
        return Err(Error::Config(format!("range {s:?} is empty")));
    }
    Ok(v)
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut batch_delta = 0.05;
        let mut fixed_batches = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let bad = |e: &dyn std::fmt::Display| Error::Config(format!("line {}: {key}: {e}", i + 1));
            let int = |v: &str| v.parse::<usize>().map_err(|e| bad(&e));
            let u64v = |v: &str| v.parse::<u64>().map_err(|e| bad(&e));
            match key {
                "case" => {
                    cfg.case = match value {
                        "concentrated" | "a" => Case::Concentrated,
                        "random_placement" | "b" => Case::RandomPlacement,
                        other => return Err(bad(&format!("unknown case {other:?}"))),
                    }
                }
                "mode" => {
                    cfg.mode = match value {
                        "state" => SweepMode::State,
                        "unitary_choi" => SweepMode::UnitaryChoi,
                        "unitary_no_ancilla" => SweepMode::UnitaryNoAncilla,
                        other => return Err(bad(&format!("unknown mode {other:?}"))),
                    }
                }
                "n_total" => cfg.n_total = int(value)?,
                "g_range" => cfg.g_range = parse_range(value).map_err(|e| bad(&e))?,
                "n_range" => cfg.n_range = parse_range(value).map_err(|e| bad(&e))?,
                "trials" => cfg.trials = int(value)?,
                "gate_set_seed" => cfg.gate_set_seed = u64v(value)?,
                "trial_seed_base" => cfg.trial_seed_base = u64v(value)?,
                "fidelity_thresholds" => {
                    cfg.fidelity_thresholds = value
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|e| bad(&e)))
                        .collect::<Result<_>>()?
                }
                "gate_set_size" => cfg.gate_set_size = int(value)?,
                "region_width" => cfg.region_width = int(value)?,
                "max_active" => cfg.max_active = Some(int(value)?),
                "cap" => cfg.cap = int(value)?,
                "shadow_scheme" => cfg.shadow_scheme = value.parse().map_err(|e| bad(&e))?,
                "selection_rule" => cfg.selection_rule = value.parse().map_err(|e| bad(&e))?,
                "mom_batches" => {
                    fixed_batches = match value {
                        "auto" => None,
                        v => Some(int(v)?),
                    }
                }
                "mom_delta" => batch_delta = value.parse::<f64>().map_err(|e| bad(&e))?,
                "enumeration_cap" => cfg.enumeration_cap = int(value)?,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", i + 1))),
            }
        }
        cfg.batches = match fixed_batches {
            Some(k) => BatchRule::Fixed(k),
            None => BatchRule::Auto { delta: batch_delta },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges and parameters; support feasibility is checked by
    /// [`SweepConfig::effective_max_active`] users.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.g_range.is_empty() || self.n_range.is_empty() {
            return err("G and N ranges must be nonempty".into());
        }
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if self.n_range.contains(&0) {
            return err("N values must be positive".into());
        }
        if self.n_range.windows(2).any(|w| w[0] >= w[1]) {
            return err("N range must be strictly increasing".into());
        }
        if self.gate_set_size == 0 {
            return err("gate set must contain at least one gate".into());
        }
        if self.n_total < 2 {
            return err("need at least two qubits".into());
        }
        if self.case == Case::Concentrated && (self.region_width < 2 || self.region_width > self.n_total) {
            return err(format!("region width {} must lie in 2..={}", self.region_width, self.n_total));
        }
        if self.fidelity_thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return err("fidelity thresholds must lie in [0, 1]".into());
        }
        match self.batches {
            BatchRule::Auto { delta } if !(delta > 0.0 && delta < 1.0) => return err(format!("mom_delta {delta} outside (0, 1)")),
            BatchRule::Fixed(0) => return err("mom_batches must be positive".into()),
            _ => {}
        }
        Ok(())
    }

    pub fn effective_max_active(&self) -> usize {
        self.max_active.unwrap_or(match self.mode {
            SweepMode::State => self.cap,
            SweepMode::UnitaryChoi => self.cap / 2,
            SweepMode::UnitaryNoAncilla => self.cap.min(8),
        })
    }

    /// Batch count for `n` snapshots over a net of `m` candidates: the rule's
    /// count, capped at `n`, kept odd.
    pub fn batches_for(&self, n: usize, m: usize) -> usize {
        let k = match self.batches {
            BatchRule::Auto { delta } => crate::shadows::guarantee_batches(delta, m),
            BatchRule::Fixed(k) => k | 1,
        };
        let k = k.min(n);
        if k % 2 == 0 { k - 1 } else { k }
    }
}
