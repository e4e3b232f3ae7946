use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inventory::dp::{dp_plan_from, Plan, PlanState};
use crate::inventory::pmf::DemandPmf;
use crate::inventory::state::{transition, InventoryState};
use crate::inventory::{reward, MdpConfig};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct DayLog<T> {
    pub day: usize,
    pub order_units: u32,
    pub demand: u32,
    pub units_before: u32,
    /// Units received at the end of the day.
    pub arrivals: u32,
    pub sold: u32,
    pub spoiled: u32,
    pub units_after: u32,
    pub reward: T,
    /// Stock after the day, as `units@life` lots.
    pub state: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode<T> {
    pub cumulative_reward: T,
    pub days: Vec<DayLog<T>>,
}

impl<T: Real> Episode<T> {
    pub fn total_sold(&self) -> u32 {
        self.days.iter().map(|d| d.sold).sum()
    }

    pub fn total_spoiled(&self) -> u32 {
        self.days.iter().map(|d| d.spoiled).sum()
    }

    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("day,order,demand,sold,spoiled,reward,state\n");
        for d in &self.days {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                d.day, d.order_units, d.demand, d.sold, d.spoiled, d.reward, d.state
            );
        }
        out
    }
}

struct Runner<'a, T> {
    cfg: &'a MdpConfig,
    state: PlanState,
    total: CompensatedSum<T>,
    days: Vec<DayLog<T>>,
}

impl<'a, T: Real> Runner<'a, T> {
    fn new(cfg: &'a MdpConfig, start: PlanState) -> Self {
        Self {
            cfg,
            state: start,
            total: CompensatedSum::new(),
            days: Vec::new(),
        }
    }

    fn step(&mut self, packs: u32, demand: u32) {
        let ordered = packs * self.cfg.pack_size;
        let arriving = if self.state.pipeline.is_empty() {
            ordered
        } else {
            let first = self.state.pipeline.remove(0);
            self.state.pipeline.push(ordered);
            first
        };
        let before = self.state.on_hand.total();
        let t = transition(&self.state.on_hand, demand, arriving, self.cfg.shelf_life);
        let r: T = reward(t.sold, ordered, self.cfg);
        self.total.add(r);
        self.days.push(DayLog {
            day: self.days.len(),
            order_units: ordered,
            demand,
            units_before: before,
            arrivals: arriving,
            sold: t.sold,
            spoiled: t.spoiled,
            units_after: t.next.total(),
            reward: r,
            state: t.next.digest(),
        });
        self.state.on_hand = t.next;
    }

    fn finish(self) -> Episode<T> {
        Episode {
            cumulative_reward: self.total.value(),
            days: self.days,
        }
    }
}

/// Follows a precomputed plan against realised demands for its horizon.
pub fn simulate_episode<T: Real>(plan: &mut Plan<T>, demands: &[u32]) -> Result<Episode<T>> {
    let horizon = plan.horizon();
    if demands.len() < horizon {
        return Err(Error::input(format!(
            "demand trace has {} days, plan horizon is {horizon}",
            demands.len()
        )));
    }
    let cfg = plan.config().clone();
    let mut run = Runner::new(&cfg, plan.start().clone());
    for (day, &demand) in demands[..horizon].iter().enumerate() {
        let (packs, _) = plan.decide(day, &run.state)?;
        run.step(packs, demand);
    }
    Ok(run.finish())
}

/// Replans every day over the next `min(horizon, days left)` days and
/// applies only the first decision. `pmfs[t]` is the demand distribution
/// used for trace day `t`.
pub fn simulate_receding<T: Real>(
    cfg: &MdpConfig,
    pmfs: &[DemandPmf<T>],
    demands: &[u32],
    start: &InventoryState,
) -> Result<Episode<T>> {
    cfg.validate()?;
    if pmfs.len() < demands.len() {
        return Err(Error::input(format!(
            "{} demand distributions for a {}-day trace",
            pmfs.len(),
            demands.len()
        )));
    }
    let mut run = Runner::new(cfg, PlanState::new(start.clone(), cfg));
    for (day, &demand) in demands.iter().enumerate() {
        let window = cfg.horizon.min(demands.len() - day);
        let local = MdpConfig {
            horizon: window,
            start_weekday: ((usize::from(cfg.start_weekday) + day) % 7) as u8,
            ..cfg.clone()
        };
        let mut plan = dp_plan_from(&local, &pmfs[day..day + window], &run.state)?;
        let (packs, _) = plan.decide(0, &run.state)?;
        run.step(packs, demand);
    }
    Ok(run.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::dp_plan;

    fn cfg() -> MdpConfig {
        MdpConfig {
            horizon: 4,
            pack_size: 4,
            max_order_packs: 2,
            demand_cap: 8,
            inventory_cap: 16,
            shelf_life: 3,
            ..MdpConfig::default()
        }
    }

    #[test]
    fn zero_demand_never_orders() {
        let c = cfg();
        let pmfs = vec![DemandPmf::<f64>::point_mass(0, 8).unwrap(); 4];
        let mut plan = dp_plan(&c, &pmfs, &InventoryState::empty()).unwrap();
        let ep = simulate_episode(&mut plan, &[0; 4]).unwrap();
        assert_eq!(ep.cumulative_reward, 0.0);
        assert!(ep.days.iter().all(|d| d.order_units == 0));
    }

    #[test]
    fn known_demand_is_met_exactly() {
        let c = MdpConfig {
            order_weekdays: (0..7).collect(),
            ..cfg()
        };
        let pmfs = vec![DemandPmf::<f64>::point_mass(4, 8).unwrap(); 4];
        let start = InventoryState::from_pairs(&[(4, 3)]).unwrap();
        let mut plan = dp_plan(&c, &pmfs, &start).unwrap();
        let ep = simulate_episode(&mut plan, &[4; 4]).unwrap();
        // order one pack on each of the first three days, none on the last
        let orders: Vec<u32> = ep.days.iter().map(|d| d.order_units).collect();
        assert_eq!(orders, vec![4, 4, 4, 0]);
        assert_eq!(ep.total_sold(), 16);
        assert!(f64::abs(ep.cumulative_reward - (16.0 * c.price - 12.0 * c.cost)) < 1e-9);
        assert!((ep.cumulative_reward - plan.value()).abs() < 1e-9);
    }

    #[test]
    fn receding_matches_fixed_plan_on_deterministic_demand() {
        let c = MdpConfig {
            order_weekdays: (0..7).collect(),
            ..cfg()
        };
        let pmfs = vec![DemandPmf::<f64>::point_mass(3, 8).unwrap(); 4];
        let mut plan = dp_plan(&c, &pmfs, &InventoryState::empty()).unwrap();
        let fixed = simulate_episode(&mut plan, &[3; 4]).unwrap();
        let rec = simulate_receding(&c, &pmfs, &[3; 4], &InventoryState::empty()).unwrap();
        assert!(f64::abs(fixed.cumulative_reward - rec.cumulative_reward) < 1e-9);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = cfg();
        let pmfs = vec![DemandPmf::<f64>::point_mass(0, 8).unwrap(); 4];
        let ep = simulate_receding(&c, &pmfs, &[0, 0], &InventoryState::empty()).unwrap();
        let csv = ep.trajectory_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("day,order,demand,sold,spoiled,reward,state\n"));
    }

    #[test]
    fn short_trace_is_rejected() {
        let c = cfg();
        let pmfs = vec![DemandPmf::<f64>::point_mass(0, 8).unwrap(); 4];
        let mut plan = dp_plan(&c, &pmfs, &InventoryState::empty()).unwrap();
        assert!(simulate_episode(&mut plan, &[0; 2]).unwrap_err().is_input());
    }
}
