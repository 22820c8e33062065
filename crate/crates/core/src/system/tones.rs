use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Partition of the `W` DFT bins into active (data-carrying) and inactive
/// (spectrally nulled) tones. Indices are zero-based DFT bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TonePlanDoc", into = "TonePlanDoc")]
pub struct TonePlan {
    w: usize,
    active: Vec<usize>,
    inactive: Vec<usize>,
}

/// JSON form: `{"W": 128, "active": [2, 3, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TonePlanDoc {
    #[serde(rename = "W")]
    w: usize,
    active: Vec<usize>,
}

impl TryFrom<TonePlanDoc> for TonePlan {
    type Error = Error;
    fn try_from(doc: TonePlanDoc) -> Result<Self> {
        TonePlan::new(doc.w, doc.active)
    }
}

impl From<TonePlan> for TonePlanDoc {
    fn from(plan: TonePlan) -> Self {
        TonePlanDoc {
            w: plan.w,
            active: plan.active,
        }
    }
}

impl TonePlan {
    /// Builds a plan from any collection of distinct active bins `< w`.
    pub fn new(w: usize, active: impl IntoIterator<Item = usize>) -> Result<Self> {
        if w == 0 {
            return Err(Error::config("W", "must be at least 1"));
        }
        let mut mask = vec![false; w];
        for bin in active {
            if bin >= w {
                return Err(Error::config("active", format!("bin {bin} outside 0..{w}")));
            }
            if std::mem::replace(&mut mask[bin], true) {
                return Err(Error::config("active", format!("bin {bin} listed twice")));
            }
        }
        let active: Vec<usize> = (0..w).filter(|&b| mask[b]).collect();
        if active.is_empty() {
            return Err(Error::config("active", "at least one active tone is required"));
        }
        let inactive = (0..w).filter(|&b| !mask[b]).collect();
        Ok(TonePlan { w, active, inactive })
    }

    /// Every tone active.
    pub fn all_active(w: usize) -> Result<Self> {
        TonePlan::new(w, 0..w)
    }

    /// IEEE 802.11n 40 MHz data tones: DC-centred subcarriers ±2..±58
    /// without the pilots ±11, ±25, ±53, mapped to bins by `k mod 128`.
    pub fn ieee80211n_40mhz() -> Self {
        const W: i64 = 128;
        let bins = (-58..=58_i64)
            .filter(|k| k.abs() >= 2 && ![11, 25, 53].contains(&k.abs()))
            .map(|k| k.rem_euclid(W) as usize);
        TonePlan::new(W as usize, bins).expect("static tone plan is valid")
    }

    /// Total number of tones `W`.
    pub fn len(&self) -> usize {
        self.w
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0
    }

    /// Active bins, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Inactive bins, ascending.
    pub fn inactive(&self) -> &[usize] {
        &self.inactive
    }

    pub fn is_active(&self, bin: usize) -> bool {
        self.active.binary_search(&bin).is_ok()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ieee_plan_has_108_data_tones() {
        let plan = TonePlan::ieee80211n_40mhz();
        assert_eq!(plan.len(), 128);
        assert_eq!(plan.active().len(), 108);
        assert_eq!(plan.active().len() + plan.inactive().len(), 128);
        assert!(!plan.is_active(0));
        // pilots and guard band are inactive, ±2 and ±58 are active
        for k in [11_i64, -11, 25, -25, 53, -53, 1, -1, 59, -59, 64] {
            assert!(!plan.is_active(k.rem_euclid(128) as usize), "{k}");
        }
        for k in [2_i64, -2, 58, -58, 12, -54] {
            assert!(plan.is_active(k.rem_euclid(128) as usize), "{k}");
        }
    }

    #[test]
    fn json_round_trip() {
        let plan = TonePlan::new(8, [1, 2, 6]).unwrap();
        let s = plan.to_json().unwrap();
        assert_eq!(s, r#"{"W":8,"active":[1,2,6]}"#);
        assert_eq!(TonePlan::from_json(&s).unwrap(), plan);
        assert_eq!(plan.inactive(), &[0, 3, 4, 5, 7]);
    }

    #[test]
    fn rejects_invalid_plans() {
        assert!(TonePlan::new(8, []).is_err());
        assert!(TonePlan::new(8, [8]).is_err());
        assert!(TonePlan::new(8, [1, 1]).is_err());
        assert!(TonePlan::from_json(r#"{"W":4,"active":[5]}"#).is_err());
        assert!(TonePlan::from_json(r#"{"W":4,"active":[1],"extra":0}"#).is_err());
    }
}
