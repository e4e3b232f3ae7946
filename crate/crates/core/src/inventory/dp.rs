use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::error::{Error, Result};
use crate::inventory::pmf::DemandPmf;
use crate::inventory::state::{InventoryState, MAX_SHELF_LIFE};
use crate::inventory::{reward, MdpConfig, MAX_LEAD_TIME};
use crate::scalar::Real;

const PIPE_LEN: usize = MAX_LEAD_TIME as usize - 1;

/// Inventory on hand plus orders already placed but not yet received.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PlanState {
    pub on_hand: InventoryState,
    /// `pipeline[i]` units arrive at the end of day `i` from now; length is
    /// `lead_time_days - 1`.
    pub pipeline: Vec<u32>,
}

impl PlanState {
    pub fn new(on_hand: InventoryState, cfg: &MdpConfig) -> Self {
        Self {
            on_hand,
            pipeline: vec![0; cfg.lead_time_days as usize - 1],
        }
    }

    pub fn total_committed(&self) -> u32 {
        self.on_hand.total() + self.pipeline.iter().sum::<u32>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    counts: [u16; MAX_SHELF_LIFE],
    pipe: [u16; PIPE_LEN],
}

impl Key {
    fn total(&self) -> u32 {
        self.counts.iter().map(|&c| u32::from(c)).sum()
    }

    fn pipe_total(&self) -> u32 {
        self.pipe.iter().map(|&c| u32::from(c)).sum()
    }
}

/// Multiplicative hasher for the fixed-size state keys.
#[derive(Default)]
struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.0 = (self.0.rotate_left(5) ^ u64::from_le_bytes(buf)).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
        }
    }
}

type Table<T> = HashMap<Key, (T, u32), BuildHasherDefault<KeyHasher>>;

/// FIFO sale, ageing and arrival on the fixed-size count vector; mirrors
/// [`crate::inventory::transition`].
fn step(counts: &[u16; MAX_SHELF_LIFE], demand: u32, arriving: u32, shelf_life: usize) -> ([u16; MAX_SHELF_LIFE], u32) {
    let mut remaining = demand;
    let mut left = *counts;
    for q in left.iter_mut() {
        let take = u32::from(*q).min(remaining);
        *q -= take as u16;
        remaining -= take;
        if remaining == 0 {
            break;
        }
    }
    let spoiled = u32::from(left[0]);
    let mut next = [0u16; MAX_SHELF_LIFE];
    next[..MAX_SHELF_LIFE - 1].copy_from_slice(&left[1..]);
    next[shelf_life - 1] += arriving as u16;
    (next, spoiled)
}

/// Exact finite-horizon plan: backward induction over the states reachable
/// from the start, tabulated lazily per day.
#[derive(Debug)]
pub struct Plan<T: Real> {
    cfg: MdpConfig,
    pmfs: Vec<DemandPmf<T>>,
    // tail[t][k] = P(demand >= k) on day t
    tails: Vec<Vec<T>>,
    tables: Vec<Table<T>>,
    start: PlanState,
    value: T,
    entries: usize,
}

impl<T: Real> Plan<T> {
    pub fn config(&self) -> &MdpConfig {
        &self.cfg
    }

    pub fn start(&self) -> &PlanState {
        &self.start
    }

    /// Optimal expected profit over the horizon from the start state.
    pub fn value(&self) -> T {
        self.value
    }

    pub fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    /// Number of tabulated (day, state) entries.
    pub fn table_size(&self) -> usize {
        self.entries
    }

    fn key_of(&self, s: &PlanState) -> Result<Key> {
        if s.on_hand.max_life() > self.cfg.shelf_life {
            return Err(Error::input(
                "state holds items with more than the configured shelf life",
            ));
        }
        if s.pipeline.len() != self.cfg.lead_time_days as usize - 1 {
            return Err(Error::input("pipeline length does not match the lead time"));
        }
        if s.total_committed() > self.cfg.inventory_cap {
            return Err(Error::Resource {
                what: format!(
                    "{} units on hand and on order exceed the inventory cap",
                    s.total_committed()
                ),
                cap: self.cfg.inventory_cap as usize,
            });
        }
        let mut pipe = [0u16; PIPE_LEN];
        for (slot, &q) in pipe.iter_mut().zip(&s.pipeline) {
            *slot = q as u16;
        }
        Ok(Key {
            counts: s.on_hand.to_counts(),
            pipe,
        })
    }

    /// Optimal order (in packs) on `day` from `state`, and that state's
    /// optimal value-to-go.
    pub fn decide(&mut self, day: usize, state: &PlanState) -> Result<(u32, T)> {
        if day >= self.cfg.horizon {
            return Err(Error::input(format!(
                "day {day} is beyond the {}-day horizon",
                self.cfg.horizon
            )));
        }
        let key = self.key_of(state)?;
        let v = self.solve(day, key)?;
        let packs = self.tables[day][&key].1;
        Ok((packs, v))
    }

    fn solve(&mut self, day: usize, key: Key) -> Result<T> {
        if day == self.cfg.horizon {
            return Ok(T::zero());
        }
        if let Some(&(v, _)) = self.tables[day].get(&key) {
            return Ok(v);
        }
        let pack = self.cfg.pack_size;
        let lead = self.cfg.lead_time_days as usize;
        let shelf = self.cfg.shelf_life as usize;
        let on_hand = key.total();
        let committed = on_hand + key.pipe_total();
        let max_packs = if self.cfg.is_order_day(day) {
            let room = self.cfg.inventory_cap.saturating_sub(committed) / pack;
            self.cfg.max_order_packs.min(room)
        } else {
            0
        };
        let price = T::lit(self.cfg.price);

        let mut best: Option<(T, u32)> = None;
        for packs in 0..=max_packs {
            let ordered = packs * pack;
            let (arriving, pipe) = if lead == 1 {
                (ordered, [0u16; PIPE_LEN])
            } else {
                let mut pipe = [0u16; PIPE_LEN];
                pipe[..lead - 2].copy_from_slice(&key.pipe[1..lead - 1]);
                pipe[lead - 2] = ordered as u16;
                (u32::from(key.pipe[0]), pipe)
            };
            let mut expected = reward::<T>(0, ordered, &self.cfg);
            // demands below the stock on hand, then the lumped tail
            let dmax = self.pmfs[day].dmax();
            for d in 0..=on_hand.min(dmax) {
                let prob = if d == on_hand {
                    self.tails[day][d as usize]
                } else {
                    self.pmfs[day].prob(d)
                };
                if prob == T::zero() {
                    continue;
                }
                let (counts, _) = step(&key.counts, d, arriving, shelf);
                let future = self.solve(day + 1, Key { counts, pipe })?;
                expected = expected + prob * (price * T::from_u32(d).expect("u32 fits") + future);
            }
            let better = match best {
                None => true,
                Some((v, _)) => expected > v + T::lit(1e-12) * (T::one() + v.abs()),
            };
            if better {
                best = Some((expected, packs));
            }
        }
        let (v, packs) = best.expect("at least one action");
        self.entries += 1;
        if self.entries > self.cfg.max_states {
            return Err(Error::Resource {
                what: "dynamic-programming state table".to_string(),
                cap: self.cfg.max_states,
            });
        }
        self.tables[day].insert(key, (v, packs));
        Ok(v)
    }
}

/// [`dp_plan_from`] with nothing on order.
pub fn dp_plan<T: Real>(cfg: &MdpConfig, pmfs: &[DemandPmf<T>], start: &InventoryState) -> Result<Plan<T>> {
    dp_plan_from(cfg, pmfs, &PlanState::new(start.clone(), cfg))
}

/// Solves `V_t(s) = max_a sum_d pmf_t(d) [reward(sold, a) + V_{t+1}(s')]`
/// with `V_horizon = 0`. Orders are restricted to order days and to
/// multiples of the pack size; ties go to the smaller order.
pub fn dp_plan_from<T: Real>(cfg: &MdpConfig, pmfs: &[DemandPmf<T>], start: &PlanState) -> Result<Plan<T>> {
    cfg.validate()?;
    if pmfs.len() < cfg.horizon {
        return Err(Error::input(format!(
            "{} demand distributions for a {}-day horizon",
            pmfs.len(),
            cfg.horizon
        )));
    }
    let pmfs = pmfs[..cfg.horizon].to_vec();
    let tails = pmfs
        .iter()
        .map(|pmf| {
            let mut tail = vec![T::zero(); pmf.probs().len() + 1];
            for k in (0..pmf.probs().len()).rev() {
                tail[k] = tail[k + 1] + pmf.probs()[k];
            }
            tail
        })
        .collect();
    let mut plan = Plan {
        cfg: cfg.clone(),
        pmfs,
        tails,
        tables: (0..cfg.horizon).map(|_| Table::default()).collect(),
        start: start.clone(),
        value: T::zero(),
        entries: 0,
    };
    let key = plan.key_of(start)?;
    plan.value = plan.solve(0, key)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::transition;

    fn cfg(horizon: usize) -> MdpConfig {
        MdpConfig {
            horizon,
            order_weekdays: vec![0, 1, 2, 3, 4, 5, 6],
            demand_cap: 6,
            inventory_cap: 24,
            pack_size: 4,
            max_order_packs: 2,
            shelf_life: 3,
            ..MdpConfig::default()
        }
    }

    fn uniform(dmax: u32) -> DemandPmf<f64> {
        DemandPmf::new(vec![1.0 / f64::from(dmax + 1); dmax as usize + 1]).unwrap()
    }

    #[test]
    fn step_matches_transition() {
        let s = InventoryState::from_pairs(&[(2, 1), (3, 2), (4, 3)]).unwrap();
        for d in 0..12 {
            for a in [0, 5] {
                let t = transition(&s, d, a, 3);
                let (counts, spoiled) = step(&s.to_counts(), d, a, 3);
                assert_eq!(InventoryState::from_counts(&counts), t.next);
                assert_eq!(spoiled, t.spoiled);
            }
        }
    }

    #[test]
    fn losing_margin_never_orders() {
        let c = MdpConfig {
            price: 1.0,
            cost: 2.0,
            ..cfg(5)
        };
        let pmfs = vec![uniform(6); 5];
        let mut plan = dp_plan(&c, &pmfs, &InventoryState::empty()).unwrap();
        assert_eq!(plan.value(), 0.0);
        let start = plan.start().clone();
        assert_eq!(plan.decide(0, &start).unwrap().0, 0);
    }

    #[test]
    fn single_day_without_ordering() {
        let c = MdpConfig {
            order_weekdays: vec![],
            ..cfg(1)
        };
        let pmf = uniform(6);
        let start = InventoryState::from_pairs(&[(3, 2)]).unwrap();
        let plan = dp_plan(&c, std::slice::from_ref(&pmf), &start).unwrap();
        let expected: f64 = (0..=6).map(|d| pmf.prob(d) * f64::from(d.min(3))).sum::<f64>() * c.price;
        assert!((plan.value() - expected).abs() < 1e-12);
    }

    #[test]
    fn lead_time_delays_arrival() {
        // with a two-day lead and a two-day horizon, an order never sells
        let c = MdpConfig {
            lead_time_days: 2,
            ..cfg(2)
        };
        let pmfs = vec![DemandPmf::<f64>::point_mass(4, 6).unwrap(); 2];
        let plan = dp_plan(&c, &pmfs, &InventoryState::empty()).unwrap();
        assert_eq!(plan.value(), 0.0);
        let c1 = MdpConfig { lead_time_days: 1, ..c };
        let plan1 = dp_plan(&c1, &pmfs, &InventoryState::empty()).unwrap();
        assert!(plan1.value() > 0.0);
    }

    #[test]
    fn over_cap_start_is_resource_error() {
        let start = InventoryState::from_pairs(&[(30, 2)]).unwrap();
        let err = dp_plan(&cfg(2), &vec![uniform(6); 2], &start).unwrap_err();
        assert!(matches!(err, Error::Resource { cap: 24, .. }));
    }

    #[test]
    fn state_table_cap_is_enforced() {
        let c = MdpConfig {
            max_states: 3,
            ..cfg(6)
        };
        let err = dp_plan(&c, &vec![uniform(6); 6], &InventoryState::empty()).unwrap_err();
        assert!(matches!(err, Error::Resource { cap: 3, .. }));
    }

    #[test]
    fn too_few_distributions() {
        assert!(dp_plan(&cfg(3), &[uniform(6)], &InventoryState::empty()).is_err());
    }
}
