//! Perishable-inventory MDP: FIFO dynamics, profit reward, demand
//! distributions from (recalibrated) forecasts, exact finite-horizon dynamic
//! programming and episode simulation.

mod dp;
mod pmf;
mod sim;
mod state;

pub use dp::{dp_plan, dp_plan_from, Plan, PlanState};
pub use pmf::{demand_pmf, DemandPmf};
pub use sim::{simulate_episode, simulate_receding, DayLog, Episode};
pub use state::{transition, InventoryState, Lot, Transition, MAX_SHELF_LIFE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Longest supported delivery lead time in days.
pub const MAX_LEAD_TIME: u32 = 4;

/// Environment and planner parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpConfig {
    /// Sale price per unit.
    pub price: f64,
    /// Purchase cost per unit.
    pub cost: f64,
    pub pack_size: u32,
    /// Weekdays (0 = Monday) on which orders may be placed.
    pub order_weekdays: Vec<u8>,
    /// Weekday of planning day 0.
    pub start_weekday: u8,
    /// Days from order to arrival; 1 means the order is received at the end
    /// of the day it is placed and can be sold the next day.
    pub lead_time_days: u32,
    /// Shelf life `L` of newly received items, in days.
    pub shelf_life: u32,
    pub horizon: usize,
    pub max_order_packs: u32,
    /// Largest demand value `Dmax` carried by demand distributions.
    pub demand_cap: u32,
    /// Cap on units on hand plus on order; orders that would exceed it are
    /// not considered.
    pub inventory_cap: u32,
    /// Cap on the number of distinct (day, state) entries the planner may
    /// tabulate.
    pub max_states: usize,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            price: 1.99,
            cost: 1.29,
            pack_size: 12,
            order_weekdays: vec![0, 2, 4],
            start_weekday: 0,
            lead_time_days: 1,
            shelf_life: 5,
            horizon: 14,
            max_order_packs: 4,
            demand_cap: 48,
            inventory_cap: 48,
            max_states: 2_000_000,
        }
    }
}

impl MdpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.price > 0.0 && self.price.is_finite()) || !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::input("price and cost must be positive"));
        }
        if self.pack_size == 0 {
            return Err(Error::input("pack_size must be at least 1"));
        }
        if self.lead_time_days == 0 || self.lead_time_days > MAX_LEAD_TIME {
            return Err(Error::input(format!("lead_time_days must be in 1..={MAX_LEAD_TIME}")));
        }
        if self.shelf_life == 0 || self.shelf_life as usize > MAX_SHELF_LIFE {
            return Err(Error::input(format!("shelf_life must be in 1..={MAX_SHELF_LIFE}")));
        }
        if self.horizon == 0 {
            return Err(Error::input("horizon must be at least 1 day"));
        }
        if self.order_weekdays.iter().any(|&d| d > 6) || self.start_weekday > 6 {
            return Err(Error::input("weekdays are numbered 0 (Monday) to 6"));
        }
        if self.inventory_cap > u32::from(u16::MAX) {
            return Err(Error::input("inventory_cap is limited to 65535 units"));
        }
        Ok(())
    }

    /// Whether an order may be placed on planning day `day`.
    pub fn is_order_day(&self, day: usize) -> bool {
        let weekday = (usize::from(self.start_weekday) + day) % 7;
        self.order_weekdays.iter().any(|&d| usize::from(d) == weekday)
    }
}

/// Daily profit: revenue from sales minus the cost of units ordered.
pub fn reward<T: Real>(sold: u32, ordered: u32, cfg: &MdpConfig) -> T {
    T::lit(f64::from(sold) * cfg.price - f64::from(ordered) * cfg.cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_examples() {
        let cfg = MdpConfig::default();
        assert!((reward::<f64>(4, 12, &cfg) + 7.52).abs() < 1e-12);
        assert_eq!(reward::<f64>(0, 0, &cfg), 0.0);
        assert!((reward::<f64>(12, 0, &cfg) - 23.88).abs() < 1e-12);
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = MdpConfig::default();
        cfg.validate().unwrap();
        assert!(cfg.is_order_day(0) && !cfg.is_order_day(1) && cfg.is_order_day(7));
    }

    #[test]
    fn config_validation() {
        let bad = MdpConfig {
            pack_size: 0,
            ..MdpConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MdpConfig {
            shelf_life: 40,
            ..MdpConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MdpConfig {
            order_weekdays: vec![7],
            ..MdpConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = MdpConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<MdpConfig>(&text).unwrap(), cfg);
        let partial: MdpConfig = serde_json::from_str(r#"{"horizon": 3}"#).unwrap();
        assert_eq!(partial.horizon, 3);
        assert!(serde_json::from_str::<MdpConfig>(r#"{"horizn": 3}"#).is_err());
    }
}
