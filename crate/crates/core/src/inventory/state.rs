use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the shelf life the compact state can represent.
pub const MAX_SHELF_LIFE: usize = 16;

/// One lot of identical items: `units` expiring in `life` days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lot {
    pub units: u32,
    pub life: u32,
}

/// Inventory in canonical form: at most one lot per remaining shelf life,
/// no empty lots, sorted by remaining life (oldest first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct InventoryState {
    lots: Vec<Lot>,
}

impl InventoryState {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonicalizes an arbitrary multiset of lots.
    pub fn new(lots: impl IntoIterator<Item = Lot>) -> Result<Self> {
        let mut lots: Vec<Lot> = lots.into_iter().collect();
        if let Some(bad) = lots.iter().find(|l| l.life == 0) {
            return Err(Error::input(format!("lot of {} units has zero shelf life", bad.units)));
        }
        lots.sort_by_key(|l| l.life);
        let mut merged: Vec<Lot> = Vec::with_capacity(lots.len());
        for lot in lots.into_iter().filter(|l| l.units > 0) {
            match merged.last_mut() {
                Some(last) if last.life == lot.life => last.units += lot.units,
                _ => merged.push(lot),
            }
        }
        Ok(Self { lots: merged })
    }

    /// Convenience constructor from `(units, life)` pairs.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(units, life)| Lot { units, life }))
    }

    pub fn lots(&self) -> &[Lot] {
        &self.lots
    }

    pub fn total(&self) -> u32 {
        self.lots.iter().map(|l| l.units).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.lots.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.lots.iter().all(|l| l.units > 0 && l.life > 0) && self.lots.windows(2).all(|w| w[0].life < w[1].life)
    }

    pub fn max_life(&self) -> u32 {
        self.lots.last().map_or(0, |l| l.life)
    }

    /// Compact text form, e.g. `3@2;12@5`, or `-` when empty.
    pub fn digest(&self) -> String {
        if self.lots.is_empty() {
            return "-".to_string();
        }
        self.lots
            .iter()
            .map(|l| format!("{}@{}", l.units, l.life))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub(crate) fn to_counts(&self) -> [u16; MAX_SHELF_LIFE] {
        let mut c = [0u16; MAX_SHELF_LIFE];
        for l in &self.lots {
            c[l.life as usize - 1] = l.units as u16;
        }
        c
    }

    #[cfg(test)]
    pub(crate) fn from_counts(c: &[u16; MAX_SHELF_LIFE]) -> Self {
        Self {
            lots: c
                .iter()
                .enumerate()
                .filter(|(_, &q)| q > 0)
                .map(|(i, &q)| Lot {
                    units: u32::from(q),
                    life: i as u32 + 1,
                })
                .collect(),
        }
    }
}

impl fmt::Display for InventoryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest())
    }
}

/// Outcome of one day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub next: InventoryState,
    pub sold: u32,
    pub spoiled: u32,
}

/// One day of dynamics: sell oldest-first (lost sales beyond stock), age the
/// remaining lots and discard the expired ones, then receive `arriving`
/// units with full shelf life.
pub fn transition(s: &InventoryState, demand: u32, arriving: u32, shelf_life: u32) -> Transition {
    let mut remaining = demand;
    let mut sold = 0;
    let mut spoiled = 0;
    let mut next = Vec::with_capacity(s.lots.len() + 1);
    for lot in &s.lots {
        let take = lot.units.min(remaining);
        remaining -= take;
        sold += take;
        let left = lot.units - take;
        if left == 0 {
            continue;
        }
        if lot.life <= 1 {
            spoiled += left;
        } else {
            next.push(Lot {
                units: left,
                life: lot.life - 1,
            });
        }
    }
    if arriving > 0 {
        match next.last_mut() {
            Some(last) if last.life == shelf_life => last.units += arriving,
            _ => next.push(Lot {
                units: arriving,
                life: shelf_life,
            }),
        }
    }
    let next = if next.windows(2).all(|w| w[0].life < w[1].life) {
        InventoryState { lots: next }
    } else {
        InventoryState::new(next).expect("lives are positive")
    };
    Transition { next, sold, spoiled }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(pairs: &[(u32, u32)]) -> InventoryState {
        InventoryState::from_pairs(pairs).unwrap()
    }

    #[test]
    fn fifo_sale() {
        let t = transition(&st(&[(2, 1), (3, 2)]), 4, 0, 5);
        assert_eq!(t.next, st(&[(1, 1)]));
        assert_eq!((t.sold, t.spoiled), (4, 0));
    }

    #[test]
    fn unsold_oldest_lot_expires() {
        let t = transition(&st(&[(2, 1)]), 0, 12, 5);
        assert_eq!(t.next, st(&[(12, 5)]));
        assert_eq!((t.sold, t.spoiled), (0, 2));
    }

    #[test]
    fn lost_sales_on_empty_shelf() {
        let t = transition(&InventoryState::empty(), 7, 0, 5);
        assert!(t.next.is_empty());
        assert_eq!((t.sold, t.spoiled), (0, 0));
    }

    #[test]
    fn canonical_form_merges_and_sorts() {
        let s = st(&[(3, 4), (0, 2), (2, 1), (4, 4)]);
        assert_eq!(s.lots(), &[Lot { units: 2, life: 1 }, Lot { units: 7, life: 4 }]);
        assert!(s.is_canonical());
        assert_eq!(s.digest(), "2@1;7@4");
        assert!(InventoryState::from_pairs(&[(1, 0)]).is_err());
    }

    #[test]
    fn arrival_merges_with_same_life_lot() {
        // shelf life 1: arrivals can coincide with nothing older
        let t = transition(&st(&[(5, 3)]), 1, 6, 2);
        assert_eq!(t.next, st(&[(10, 2)]));
    }

    #[test]
    fn counts_round_trip() {
        let s = st(&[(2, 1), (12, 5)]);
        assert_eq!(InventoryState::from_counts(&s.to_counts()), s);
    }
}
