use crate::error::{Error, Result};
use crate::lattice::{ControlPolicy, TreeModel};
use crate::stoptimes::StoppingTime;

/// Default bound on the number of items an explicit enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// Mixed-radix counter over one digit per internal node.
///
/// Yields either every control policy (`|C|^internal` items) or every
/// stop/continue decision map (`2^internal` items), in lexicographic order of
/// the digits by node id.
pub struct PolicyEnumeration<'a> {
    tree: &'a TreeModel,
    radix: usize,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> PolicyEnumeration<'a> {
    fn new(tree: &'a TreeModel, radix: usize, cap: u128) -> Result<Self> {
        let internal = tree.level(tree.depth()).start;
        let total = Self::count_for(radix, internal);
        if total > cap {
            return Err(Error::CapExceeded { what: "explicit policy enumeration".into(), needed: total, cap });
        }
        Ok(Self { tree, radix, digits: vec![0; internal], done: false })
    }

    fn count_for(radix: usize, internal: usize) -> u128 {
        (radix as u128).checked_pow(internal as u32).unwrap_or(u128::MAX)
    }

    /// All control policies.
    pub fn controls(tree: &'a TreeModel, cap: u128) -> Result<Self> {
        Self::new(tree, tree.num_controls(), cap)
    }

    /// All stop/continue decision maps.
    pub fn decisions(tree: &'a TreeModel, cap: u128) -> Result<Self> {
        Self::new(tree, 2, cap)
    }

    /// Number of items the enumeration yields.
    pub fn count(&self) -> u128 {
        Self::count_for(self.radix, self.digits.len())
    }

    fn advance(&mut self) {
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.radix {
                return;
            }
            *d = 0;
        }
        self.done = true;
    }

    /// Next control policy (terminal nodes carry control 0).
    pub fn next_policy(&mut self) -> Option<ControlPolicy> {
        if self.done {
            return None;
        }
        let mut choice = self.digits.clone();
        choice.resize(self.tree.num_nodes(), 0);
        self.advance();
        Some(ControlPolicy::from_choices(choice))
    }

    /// Next decision map, as the stopping time it induces.
    pub fn next_stopping(&mut self) -> Option<StoppingTime> {
        if self.done {
            return None;
        }
        let digits = self.digits.clone();
        self.advance();
        Some(StoppingTime::from_decisions(self.tree, |v| digits.get(v).is_some_and(|&d| d == 1)))
    }
}
