//! Finite Abelian groups as products of cyclic factors.
//!
//! Elements are dense indices 0..M in mixed-radix encoding, first factor
//! most significant: in Z_2 x Z_4 the tuple (1, 2) has index 1*4 + 2 = 6.
//! Addition and negation are componentwise modular arithmetic on the
//! decoded digits.

use crate::error::{Error, Result};

/// Hard ceiling for operations that enumerate subgroups or supports.
pub const MAX_ENUMERABLE_ORDER: usize = 256;

/// Element of a [`FiniteAbelianGroup`], identified by its dense index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(usize);

impl GroupElement {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Direct product of cyclic groups Z_{n_1} x ... x Z_{n_t}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    order: usize,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: &[usize]) -> Result<Self> {
        if cyclic_orders.is_empty() {
            return Err(Error::validation("group needs at least one cyclic factor"));
        }
        if let Some(&bad) = cyclic_orders.iter().find(|&&n| n < 2) {
            return Err(Error::validation(format!(
                "cyclic factor order {bad} is below 2"
            )));
        }
        let mut order: usize = 1;
        for &n in cyclic_orders {
            order = order
                .checked_mul(n)
                .ok_or_else(|| Error::capability("group order overflows usize"))?;
        }
        Ok(Self {
            orders: cyclic_orders.to_vec(),
            order,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cyclic_orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(0)
    }

    /// Checked constructor for an element from its dense index.
    pub fn element(&self, index: usize) -> Result<GroupElement> {
        if index >= self.order {
            return Err(Error::domain(format!(
                "element index {index} out of range for group of order {}",
                self.order
            )));
        }
        Ok(GroupElement(index))
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(GroupElement)
    }

    /// Mixed-radix digits of an element, one per cyclic factor.
    pub fn decode(&self, g: GroupElement) -> Vec<usize> {
        self.check(g);
        let mut digits = vec![0; self.orders.len()];
        let mut rest = g.0;
        for (slot, &n) in digits.iter_mut().zip(&self.orders).rev() {
            *slot = rest % n;
            rest /= n;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> Result<GroupElement> {
        if digits.len() != self.orders.len() {
            return Err(Error::domain(format!(
                "expected {} digits, got {}",
                self.orders.len(),
                digits.len()
            )));
        }
        let mut index = 0;
        for (&d, &n) in digits.iter().zip(&self.orders) {
            if d >= n {
                return Err(Error::domain(format!("digit {d} out of range for Z_{n}")));
            }
            index = index * n + d;
        }
        Ok(GroupElement(index))
    }

    pub fn add(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        GroupElement(self.add_index(a.0, b.0))
    }

    pub fn neg(&self, a: GroupElement) -> GroupElement {
        GroupElement(self.neg_index(a.0))
    }

    pub fn sub(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        self.add(a, self.neg(b))
    }

    /// Index-level addition used in convolution loops. Digits are processed
    /// least significant first with a running stride, so no scratch space.
    pub(crate) fn add_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        let mut index = 0;
        let mut stride = 1;
        let mut ra = a;
        let mut rb = b;
        for &n in self.orders.iter().rev() {
            index += ((ra % n + rb % n) % n) * stride;
            stride *= n;
            ra /= n;
            rb /= n;
        }
        index
    }

    pub(crate) fn neg_index(&self, a: usize) -> usize {
        debug_assert!(a < self.order);
        let mut index = 0;
        let mut stride = 1;
        let mut ra = a;
        for &n in self.orders.iter().rev() {
            let d = ra % n;
            index += if d == 0 { 0 } else { (n - d) * stride };
            stride *= n;
            ra /= n;
        }
        index
    }

    /// Negation table for all indices, used by convolution.
    pub(crate) fn neg_table(&self) -> Vec<usize> {
        (0..self.order).map(|i| self.neg_index(i)).collect()
    }

    fn check(&self, g: GroupElement) {
        assert!(
            g.0 < self.order,
            "element index {} does not belong to a group of order {}",
            g.0,
            self.order
        );
    }

    fn guard_enumerable(&self) -> Result<()> {
        if self.order > MAX_ENUMERABLE_ORDER {
            return Err(Error::capability(format!(
                "subgroup enumeration is limited to order {MAX_ENUMERABLE_ORDER}, group has {}",
                self.order
            )));
        }
        Ok(())
    }

    /// Closure of a generating set: the smallest subgroup containing it.
    /// Returned sorted by index, always contains the identity.
    pub fn generated_subgroup(&self, generators: &[GroupElement]) -> Result<Vec<GroupElement>> {
        self.guard_enumerable()?;
        for &g in generators {
            self.check(g);
        }
        let mut member = vec![false; self.order];
        member[0] = true;
        let mut frontier: Vec<usize> = vec![0];
        let mut gens: Vec<usize> = generators.iter().map(|g| g.0).collect();
        gens.sort_unstable();
        gens.dedup();
        while let Some(h) = frontier.pop() {
            for &g in &gens {
                let s = self.add_index(h, g);
                if !member[s] {
                    member[s] = true;
                    frontier.push(s);
                }
            }
        }
        Ok(member
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| GroupElement(i))
            .collect())
    }

    /// Whether some subgroup of the given order exists. For Abelian groups
    /// this is exactly divisibility of the group order.
    pub fn has_subgroup_of_order(&self, target_order: usize) -> bool {
        target_order >= 1 && self.order % target_order == 0
    }

    /// Constructs a subgroup of exactly `target_order` containing `base`
    /// (`base` must itself be a subgroup, e.g. from [`generated_subgroup`]).
    /// Returns `None` when no such subgroup exists.
    ///
    /// Grows by one generator at a time; in a finite Abelian group a strict
    /// subgroup whose order properly divides the target always admits a
    /// prime-order extension step, so the greedy loop cannot dead-end.
    ///
    /// [`generated_subgroup`]: Self::generated_subgroup
    pub fn extend_subgroup_to_order(
        &self,
        base: &[GroupElement],
        target_order: usize,
    ) -> Result<Option<Vec<GroupElement>>> {
        self.guard_enumerable()?;
        if target_order == 0 || self.order % target_order != 0 {
            return Ok(None);
        }
        let mut current = self.generated_subgroup(base)?;
        if target_order % current.len() != 0 {
            return Ok(None);
        }
        while current.len() < target_order {
            let mut best: Option<Vec<GroupElement>> = None;
            for g in self.elements() {
                if current.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = current.clone();
                gens.push(g);
                let grown = self.generated_subgroup(&gens)?;
                if grown.len() <= target_order && target_order % grown.len() == 0 {
                    match &best {
                        Some(b) if b.len() <= grown.len() => {}
                        _ => best = Some(grown),
                    }
                }
            }
            match best {
                Some(b) => current = b,
                None => return Ok(None),
            }
        }
        Ok(Some(current))
    }

    /// Any subgroup of the requested order, if one exists.
    pub fn subgroup_of_order(&self, target_order: usize) -> Result<Option<Vec<GroupElement>>> {
        self.extend_subgroup_to_order(&[], target_order)
    }

    /// All subgroups of exactly `target_order` (sorted element lists). Meant
    /// for small orders; every candidate is generated from element subsets
    /// of the closure lattice reachable from cyclic subgroups.
    pub fn subgroups_of_order(&self, target_order: usize) -> Result<Vec<Vec<GroupElement>>> {
        self.guard_enumerable()?;
        if target_order == 0 || self.order % target_order != 0 {
            return Ok(Vec::new());
        }
        if target_order == 1 {
            return Ok(vec![vec![self.zero()]]);
        }
        let mut found: Vec<Vec<GroupElement>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        // Cyclic subgroups of the right order.
        for g in self.elements() {
            let h = self.generated_subgroup(&[g])?;
            if h.len() == target_order && seen.insert(h.clone()) {
                found.push(h);
            }
        }
        // Non-cyclic subgroups of small order: join pairs of cyclic ones.
        for a in self.elements() {
            for b in self.elements().filter(|&b| b > a) {
                let h = self.generated_subgroup(&[a, b])?;
                if h.len() == target_order && seen.insert(h.clone()) {
                    found.push(h);
                }
            }
        }
        Ok(found)
    }

    /// Witness that `support` lies inside a coset of a subgroup of the given
    /// order, or `None` when no such coset exists.
    pub fn coset_support_witness(
        &self,
        support: &[GroupElement],
        target_order: usize,
    ) -> Result<Option<CosetWitness>> {
        self.guard_enumerable()?;
        if support.is_empty() {
            return Err(Error::domain("coset witness needs a nonempty support"));
        }
        for &s in support {
            self.check(s);
        }
        if support.len() > target_order {
            return Ok(None);
        }
        // Shift the support to the identity: support lies in c + H exactly
        // when support - s0 lies in H for any fixed s0 in the support.
        let s0 = support[0];
        let shifted: Vec<GroupElement> = support.iter().map(|&s| self.sub(s, s0)).collect();
        let subgroup = match self.extend_subgroup_to_order(&shifted, target_order)? {
            Some(h) => h,
            None => return Ok(None),
        };
        // Canonical offset: smallest index in the coset s0 + H.
        let offset = subgroup
            .iter()
            .map(|&h| self.add(s0, h))
            .min()
            .expect("subgroup is nonempty");
        Ok(Some(CosetWitness { subgroup, offset }))
    }
}

/// Subgroup plus offset such that a queried support is contained in
/// `offset + subgroup`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetWitness {
    pub subgroup: Vec<GroupElement>,
    pub offset: GroupElement,
}
