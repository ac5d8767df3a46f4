use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every rate a reservoir or error model can use, in 1/time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateSet {
    /// Spontaneous excitation / wave launch.
    pub kappa_u: f64,
    /// Spontaneous decay `e -> m` (or `e -> g` for two-level ancillas).
    pub kappa_d: f64,
    /// Spontaneous return `m -> g`.
    pub kappa_t: f64,
    /// Neighbor-stimulated transitions.
    pub kappa_st: f64,
    /// Conditioned data resets.
    pub kappa_r: f64,
    /// Bond correlators.
    pub kappa_c: f64,
    /// `f -> e` reset transition of four-level ancillas.
    pub kappa_f: f64,
    /// Bit flips.
    pub kappa_x: f64,
    /// Phase flips.
    pub kappa_z: f64,
    /// Total perturbation rate per data site.
    pub kappa_p: f64,
}

/// Names of the fields of [`RateSet`], used for sweeps and overrides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateName {
    KappaU,
    KappaD,
    KappaT,
    KappaSt,
    KappaR,
    KappaC,
    KappaF,
    KappaX,
    KappaZ,
    KappaP,
    /// The summarized up rate `(1/kappa_u + 1/kappa_t)^-1`; setting it
    /// assigns `kappa_u = kappa_t = 2 * value`.
    EffectiveUp,
}

impl RateName {
    pub const FIELDS: [RateName; 10] = [
        RateName::KappaU,
        RateName::KappaD,
        RateName::KappaT,
        RateName::KappaSt,
        RateName::KappaR,
        RateName::KappaC,
        RateName::KappaF,
        RateName::KappaX,
        RateName::KappaZ,
        RateName::KappaP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RateName::KappaU => "kappa_u",
            RateName::KappaD => "kappa_d",
            RateName::KappaT => "kappa_t",
            RateName::KappaSt => "kappa_st",
            RateName::KappaR => "kappa_r",
            RateName::KappaC => "kappa_c",
            RateName::KappaF => "kappa_f",
            RateName::KappaX => "kappa_x",
            RateName::KappaZ => "kappa_z",
            RateName::KappaP => "kappa_p",
            RateName::EffectiveUp => "effective_up",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        RateName::FIELDS
            .iter()
            .copied()
            .chain(std::iter::once(RateName::EffectiveUp))
            .find(|r| r.as_str() == s)
    }
}

impl fmt::Display for RateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl RateSet {
    pub fn get(&self, name: RateName) -> f64 {
        match name {
            RateName::KappaU => self.kappa_u,
            RateName::KappaD => self.kappa_d,
            RateName::KappaT => self.kappa_t,
            RateName::KappaSt => self.kappa_st,
            RateName::KappaR => self.kappa_r,
            RateName::KappaC => self.kappa_c,
            RateName::KappaF => self.kappa_f,
            RateName::KappaX => self.kappa_x,
            RateName::KappaZ => self.kappa_z,
            RateName::KappaP => self.kappa_p,
            RateName::EffectiveUp => self.effective_up(),
        }
    }

    pub fn set(&mut self, name: RateName, value: f64) {
        match name {
            RateName::KappaU => self.kappa_u = value,
            RateName::KappaD => self.kappa_d = value,
            RateName::KappaT => self.kappa_t = value,
            RateName::KappaSt => self.kappa_st = value,
            RateName::KappaR => self.kappa_r = value,
            RateName::KappaC => self.kappa_c = value,
            RateName::KappaF => self.kappa_f = value,
            RateName::KappaX => self.kappa_x = value,
            RateName::KappaZ => self.kappa_z = value,
            RateName::KappaP => self.kappa_p = value,
            RateName::EffectiveUp => {
                self.kappa_u = 2.0 * value;
                self.kappa_t = 2.0 * value;
            }
        }
    }

    pub fn with(mut self, name: RateName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Sets `kappa_x = kappa_z = kappa_p / 2`.
    pub fn with_equal_flips(mut self) -> Self {
        self.kappa_x = self.kappa_p / 2.0;
        self.kappa_z = self.kappa_p / 2.0;
        self
    }

    /// Every field multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for name in RateName::FIELDS {
            out.set(name, self.get(name) * factor);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for name in RateName::FIELDS {
            let v = self.get(name);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Rates(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Fails unless every named rate is strictly positive.
    pub fn require_positive(&self, names: &[RateName]) -> Result<()> {
        self.validate()?;
        for &name in names {
            if self.get(name) <= 0.0 {
                return Err(Error::Rates(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }

    /// `(1/kappa_u + 1/kappa_t)^-1`; zero if either is zero.
    pub fn effective_up(&self) -> f64 {
        if self.kappa_u <= 0.0 || self.kappa_t <= 0.0 {
            return 0.0;
        }
        if self.kappa_t.is_infinite() {
            return self.kappa_u;
        }
        if self.kappa_u.is_infinite() {
            return self.kappa_t;
        }
        1.0 / (1.0 / self.kappa_u + 1.0 / self.kappa_t)
    }

    /// Largest field value.
    pub fn max_rate(&self) -> f64 {
        RateName::FIELDS.iter().map(|&r| self.get(r)).fold(0.0, f64::max)
    }
}

/// Per-index replacements of the uniform rates. Index `k` is the 0-based
/// position of the operator family member (data site, bond or ancilla).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateMap {
    pub overrides: BTreeMap<usize, RateSet>,
}

impl RateMap {
    pub fn at<'a>(&'a self, base: &'a RateSet, k: usize) -> &'a RateSet {
        self.overrides.get(&k).unwrap_or(base)
    }

    pub fn validate(&self) -> Result<()> {
        self.overrides.values().try_for_each(RateSet::validate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_up_is_harmonic() {
        let r = RateSet { kappa_u: 2.0, kappa_t: 2.0, ..Default::default() };
        assert_eq!(r.effective_up(), 1.0);
        let r = RateSet { kappa_u: 3.0, kappa_t: f64::INFINITY, ..Default::default() };
        assert_eq!(r.effective_up(), 3.0);
    }

    #[test]
    fn effective_up_axis_sets_both_rates() {
        let r = RateSet::default().with(RateName::EffectiveUp, 5.0);
        assert_eq!((r.kappa_u, r.kappa_t), (10.0, 10.0));
        assert!((r.effective_up() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(RateSet { kappa_c: -1.0, ..Default::default() }.validate().is_err());
        assert!(RateSet { kappa_c: f64::NAN, ..Default::default() }.validate().is_err());
        let r = RateSet { kappa_c: 1.0, ..Default::default() };
        assert!(r.require_positive(&[RateName::KappaC]).is_ok());
        assert!(r.require_positive(&[RateName::KappaR]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for r in RateName::FIELDS {
            assert_eq!(RateName::parse(r.as_str()), Some(r));
        }
        assert_eq!(RateName::parse("effective_up"), Some(RateName::EffectiveUp));
    }
}
