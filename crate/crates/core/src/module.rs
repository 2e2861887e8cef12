//! Finite modules over the Boolean semiring `B` and the generalized field `F_inf`.
//!
//! A [`FinModule`] stores its addition (and, for `F_inf`, negation) as dense
//! tables over element IDs `0..n`. Both flavors are idempotent commutative
//! monoids-with-structure; they differ in the role of the distinguished zero:
//! neutral for `B`, absorbing for `F_inf`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest carrier a module may have.
pub const MAX_CARRIER: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    B,
    Finf,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::B => write!(f, "B"),
            Flavor::Finf => write!(f, "Finf"),
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Flavor::B),
            "Finf" | "finf" | "F_inf" | "Finfty" => Ok(Flavor::Finf),
            other => Err(Error::InvalidParameter(format!("unknown flavor {other:?}"))),
        }
    }
}

/// A finite module with dense element IDs.
#[derive(Debug, Clone)]
pub struct FinModule {
    flavor: Flavor,
    names: Vec<String>,
    zero: usize,
    add: Vec<u16>,
    neg: Option<Vec<u16>>,
    free_rank: Option<usize>,
}

impl PartialEq for FinModule {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor
            && self.names == other.names
            && self.zero == other.zero
            && self.add == other.add
            && self.neg == other.neg
    }
}

impl Eq for FinModule {}

impl FinModule {
    /// Builds a module from explicit tables, checking only structure
    /// (sizes, closure, unique names). Axioms are checked by [`FinModule::validate`].
    pub fn from_tables(
        flavor: Flavor,
        names: Vec<String>,
        zero: usize,
        add: Vec<Vec<usize>>,
        neg: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = names.len();
        check_carrier(n)?;
        if n == 0 {
            return Err(Error::Structural("empty carrier".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Structural(format!("duplicate element name {name:?}")));
            }
        }
        if zero >= n {
            return Err(Error::Structural(format!("zero index {zero} out of range")));
        }
        if add.len() != n {
            return Err(Error::Structural(format!(
                "addition table has {} rows, expected {n}",
                add.len()
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (a, row) in add.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!(
                    "addition row {a} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (b, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::Structural(format!(
                        "add({a},{b}) = {v} is not an element"
                    )));
                }
                flat.push(v as u16);
            }
        }
        let neg = match (flavor, neg) {
            (Flavor::B, None) => None,
            (Flavor::B, Some(_)) => {
                return Err(Error::Structural("flavor B module carries a negation table".into()))
            }
            (Flavor::Finf, None) => {
                return Err(Error::Structural("flavor Finf module lacks a negation table".into()))
            }
            (Flavor::Finf, Some(t)) => {
                if t.len() != n {
                    return Err(Error::Structural(format!(
                        "negation table has {} entries, expected {n}",
                        t.len()
                    )));
                }
                let mut out = Vec::with_capacity(n);
                for (a, &v) in t.iter().enumerate() {
                    if v >= n {
                        return Err(Error::Structural(format!("neg({a}) = {v} is not an element")));
                    }
                    out.push(v as u16);
                }
                Some(out)
            }
        };
        Ok(FinModule { flavor, names, zero, add: flat, neg, free_rank: None })
    }

    /// Builds a module by evaluating the operations on every ID.
    pub fn from_fn(
        flavor: Flavor,
        names: Vec<String>,
        zero: usize,
        add: impl Fn(usize, usize) -> usize,
        neg: Option<&dyn Fn(usize) -> usize>,
    ) -> Result<Self> {
        let n = names.len();
        check_carrier(n)?;
        let rows = (0..n).map(|a| (0..n).map(|b| add(a, b)).collect()).collect();
        let neg = neg.map(|f| (0..n).map(f).collect());
        Self::from_tables(flavor, names, zero, rows, neg)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.len() + b] as usize
    }

    /// Negation; `None` for flavor `B`.
    #[inline]
    pub fn neg(&self, a: usize) -> Option<usize> {
        self.neg.as_ref().map(|t| t[a] as usize)
    }

    pub fn has_neg(&self) -> bool {
        self.neg.is_some()
    }

    /// Sum of a sequence; the empty sum is zero for `B` and undefined for `F_inf`.
    pub fn sum(&self, items: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut it = items.into_iter();
        match it.next() {
            Some(first) => Some(it.fold(first, |acc, x| self.add(acc, x))),
            None => (self.flavor == Flavor::B).then_some(self.zero),
        }
    }

    /// Rank if this module was produced by [`free_module`].
    pub fn free_rank(&self) -> Option<usize> {
        self.free_rank
    }

    /// Marks the module as free of the given rank after checking that its
    /// tables coincide with those of [`free_module`] under the identity on IDs.
    pub fn certify_free(mut self, rank: usize) -> Result<Self> {
        let reference = free_module(self.flavor, rank)?;
        let r = &reference.module;
        if r.len() != self.len()
            || r.zero != self.zero
            || r.add != self.add
            || r.neg != self.neg
        {
            return Err(Error::NotFree(format!("tables differ from the free module of rank {rank}")));
        }
        self.free_rank = Some(rank);
        Ok(self)
    }

    pub fn add_row(&self, a: usize) -> Vec<usize> {
        let n = self.len();
        self.add[a * n..(a + 1) * n].iter().map(|&v| v as usize).collect()
    }

    pub fn add_table(&self) -> Vec<Vec<usize>> {
        self.elements().map(|a| self.add_row(a)).collect()
    }

    pub fn neg_table(&self) -> Option<Vec<usize>> {
        self.neg.as_ref().map(|t| t.iter().map(|&v| v as usize).collect())
    }

    /// Copy with a single addition entry overwritten.
    pub fn with_add_entry(&self, a: usize, b: usize, value: usize) -> Result<Self> {
        let n = self.len();
        if a >= n || b >= n || value >= n {
            return Err(Error::Structural(format!("entry ({a},{b}) -> {value} out of range")));
        }
        let mut out = self.clone();
        out.add[a * n + b] = value as u16;
        out.free_rank = None;
        Ok(out)
    }

    /// Copy with a single negation entry overwritten.
    pub fn with_neg_entry(&self, a: usize, value: usize) -> Result<Self> {
        let n = self.len();
        let mut out = self.clone();
        match out.neg.as_mut() {
            Some(t) if a < n && value < n => t[a] = value as u16,
            Some(_) => {
                return Err(Error::Structural(format!("entry {a} -> {value} out of range")))
            }
            None => return Err(Error::Structural("module has no negation table".into())),
        }
        out.free_rank = None;
        Ok(out)
    }

    /// Copy with elements renamed.
    pub fn renamed(&self, names: Vec<String>) -> Result<Self> {
        let add = self.add_table();
        let mut out = Self::from_tables(self.flavor, names, self.zero, add, self.neg_table())?;
        out.free_rank = self.free_rank;
        Ok(out)
    }

    /// Checks every axiom of the module's flavor. One witness is kept per
    /// violated axiom.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let z = self.zero;
        let mut report = ValidationReport::default();

        for a in 0..n {
            if self.add(a, a) != a {
                report.push(Axiom::Idempotence, vec![a]);
                break;
            }
        }
        'comm: for a in 0..n {
            for b in a + 1..n {
                if self.add(a, b) != self.add(b, a) {
                    report.push(Axiom::Commutativity, vec![a, b]);
                    break 'comm;
                }
            }
        }
        'assoc: for a in 0..n {
            for b in 0..n {
                let ab = self.add(a, b);
                for c in 0..n {
                    if self.add(ab, c) != self.add(a, self.add(b, c)) {
                        report.push(Axiom::Associativity, vec![a, b, c]);
                        break 'assoc;
                    }
                }
            }
        }
        match self.flavor {
            Flavor::B => {
                for a in 0..n {
                    if self.add(z, a) != a || self.add(a, z) != a {
                        report.push(Axiom::NeutralZero, vec![z, a]);
                        break;
                    }
                }
            }
            Flavor::Finf => {
                let neg = |a| self.neg(a).expect("Finf module has negation");
                for a in 0..n {
                    if self.add(z, a) != z || self.add(a, z) != z {
                        report.push(Axiom::AbsorbingZero, vec![z, a]);
                        break;
                    }
                }
                if neg(z) != z {
                    report.push(Axiom::NegZero, vec![z]);
                }
                for a in 0..n {
                    if self.add(a, neg(a)) != z {
                        report.push(Axiom::NegCancels, vec![a]);
                        break;
                    }
                }
                for a in 0..n {
                    if neg(neg(a)) != a {
                        report.push(Axiom::NegInvolution, vec![a]);
                        break;
                    }
                }
                'dist: for a in 0..n {
                    for b in 0..n {
                        if neg(self.add(a, b)) != self.add(neg(a), neg(b)) {
                            report.push(Axiom::NegDistributes, vec![a, b]);
                            break 'dist;
                        }
                    }
                }
            }
        }
        report
    }

    /// The relation `a <= b` iff `a + b = b`, checked to be a partial order.
    pub fn induced_order(&self) -> Result<PartialOrder> {
        let n = self.len();
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = self.add(a, b) == b;
            }
        }
        let order = PartialOrder { n, leq };
        order.check_laws()?;
        Ok(order)
    }

    /// Least subset containing `seed` and zero, closed under addition (and negation).
    pub fn generated_submodule(&self, seed: &[usize]) -> Vec<usize> {
        let n = self.len();
        let mut inside = vec![false; n];
        let mut members = Vec::new();
        let push = |x: usize, inside: &mut Vec<bool>, members: &mut Vec<usize>| {
            if !inside[x] {
                inside[x] = true;
                members.push(x);
            }
        };
        push(self.zero, &mut inside, &mut members);
        for &s in seed {
            push(s, &mut inside, &mut members);
        }
        // Worklist closure: each new member is combined with every earlier one.
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            if let Some(nx) = self.neg(x) {
                push(nx, &mut inside, &mut members);
            }
            for j in 0..=i {
                let s = self.add(x, members[j]);
                push(s, &mut inside, &mut members);
            }
            i += 1;
        }
        members.sort_unstable();
        members
    }

    /// Restricts the module to a closed subset. Returns the submodule and the
    /// inclusion map (submodule ID -> ambient ID).
    pub fn submodule(&self, elements: &[usize]) -> Result<(FinModule, Vec<usize>)> {
        let mut elems: Vec<usize> = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        let mut index = BTreeMap::new();
        for (i, &e) in elems.iter().enumerate() {
            if e >= self.len() {
                return Err(Error::InvalidParameter(format!("element {e} out of range")));
            }
            index.insert(e, i);
        }
        let zero = *index
            .get(&self.zero)
            .ok_or_else(|| Error::InvalidParameter("subset does not contain zero".into()))?;
        let lookup = |x: usize| {
            index.get(&x).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("subset not closed: {} escapes", self.name(x)))
            })
        };
        let mut rows = Vec::with_capacity(elems.len());
        for &a in &elems {
            let mut row = Vec::with_capacity(elems.len());
            for &b in &elems {
                row.push(lookup(self.add(a, b))?);
            }
            rows.push(row);
        }
        let neg = match self.flavor {
            Flavor::B => None,
            Flavor::Finf => Some(
                elems
                    .iter()
                    .map(|&a| lookup(self.neg(a).expect("Finf has negation")))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let names = elems.iter().map(|&e| self.names[e].clone()).collect();
        let sub = FinModule::from_tables(self.flavor, names, zero, rows, neg)?;
        Ok((sub, elems))
    }

    /// Quotient by a congruence. Returns the quotient and the projection map.
    pub fn quotient(&self, c: &Congruence) -> Result<(FinModule, Vec<usize>)> {
        if c.carrier_len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "congruence on {} elements applied to a module of {}",
                c.carrier_len(),
                self.len()
            )));
        }
        c.check_compatible(self)?;
        let k = c.classes().len();
        let rep: Vec<usize> = c.classes().iter().map(|cl| cl[0]).collect();
        let names = c
            .classes()
            .iter()
            .map(|cl| {
                if cl.len() == 1 {
                    self.names[cl[0]].clone()
                } else {
                    let parts: Vec<&str> = cl.iter().map(|&x| self.name(x)).collect();
                    format!("[{}]", parts.join("|"))
                }
            })
            .collect();
        let rows = (0..k)
            .map(|i| (0..k).map(|j| c.class_of(self.add(rep[i], rep[j]))).collect())
            .collect();
        let neg = self
            .neg
            .as_ref()
            .map(|_| (0..k).map(|i| c.class_of(self.neg(rep[i]).unwrap())).collect());
        let q = FinModule::from_tables(self.flavor, names, c.class_of(self.zero), rows, neg)?;
        let proj = self.elements().map(|a| c.class_of(a)).collect();
        Ok((q, proj))
    }

    /// Join-irreducible elements: nonzero elements that are not the sum of
    /// the elements strictly below them. Zero is excluded in both flavors:
    /// every hom fixes it.
    pub fn join_irreducibles(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&x| {
                if x == self.zero {
                    return false;
                }
                let below = (0..n).filter(|&y| y != x && self.add(y, x) == x);
                match self.sum(below) {
                    Some(s) => s != x,
                    // F_inf element with nothing strictly below it.
                    None => true,
                }
            })
            .collect()
    }

    /// Canonical generating set used by hom search: join-irreducibles for `B`;
    /// for `F_inf` one representative (the lower ID) of each `{x, -x}` pair of
    /// irreducibles, the negatives being implied.
    pub fn generators(&self) -> Vec<usize> {
        let irr = self.join_irreducibles();
        match self.flavor {
            Flavor::B => irr,
            Flavor::Finf => irr
                .into_iter()
                .filter(|&x| x <= self.neg(x).unwrap())
                .collect(),
        }
    }

    /// Decides whether the induced order is a distributive lattice.
    pub fn is_distributive_lattice(&self) -> Result<Distributivity> {
        if self.flavor != Flavor::B {
            return Err(Error::InvalidParameter(
                "distributivity check applies to flavor B".into(),
            ));
        }
        let order = self.induced_order()?;
        let n = self.len();
        let mut meet = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                match order.meet(a, b) {
                    Some(m) => meet[a * n + b] = m,
                    None => return Ok(Distributivity::MissingMeet(a, b)),
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let lhs = meet[a * n + self.add(b, c)];
                    let rhs = self.add(meet[a * n + b], meet[a * n + c]);
                    if lhs != rhs {
                        return Ok(Distributivity::Fails(a, b, c));
                    }
                }
            }
        }
        Ok(Distributivity::Distributive)
    }
}

fn check_carrier(n: usize) -> Result<()> {
    if n > MAX_CARRIER {
        Err(Error::TooLarge(n))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distributivity {
    Distributive,
    MissingMeet(usize, usize),
    /// `a ∧ (b ∨ c) != (a ∧ b) ∨ (a ∧ c)`
    Fails(usize, usize, usize),
}

impl Distributivity {
    pub fn holds(&self) -> bool {
        matches!(self, Distributivity::Distributive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Commutativity,
    Associativity,
    Idempotence,
    NeutralZero,
    AbsorbingZero,
    NegCancels,
    NegInvolution,
    NegDistributes,
    NegZero,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Commutativity => "commutativity",
            Axiom::Associativity => "associativity",
            Axiom::Idempotence => "idempotence",
            Axiom::NeutralZero => "neutral element",
            Axiom::AbsorbingZero => "absorbing element",
            Axiom::NegCancels => "a + (-a) = 0",
            Axiom::NegInvolution => "-(-a) = a",
            Axiom::NegDistributes => "-(a + b) = (-a) + (-b)",
            Axiom::NegZero => "-0 = 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, axiom: Axiom, witness: Vec<usize>) {
        self.violations.push(Violation { axiom, witness });
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> Option<&Violation> {
        self.violations.iter().find(|v| v.axiom == axiom)
    }
}

/// A partial order on element IDs stored as a dense relation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialOrder {
    n: usize,
    leq: Vec<bool>,
}

impl PartialOrder {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    fn check_laws(&self) -> Result<()> {
        let n = self.n;
        for a in 0..n {
            if !self.leq(a, a) {
                return Err(Error::NotAPartialOrder(format!("{a} <= {a} fails")));
            }
            for b in 0..n {
                if a != b && self.leq(a, b) && self.leq(b, a) {
                    return Err(Error::NotAPartialOrder(format!("antisymmetry fails at ({a},{b})")));
                }
                if !self.leq(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.leq(b, c) && !self.leq(a, c) {
                        return Err(Error::NotAPartialOrder(format!(
                            "transitivity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn minimum(&self) -> Option<usize> {
        (0..self.n).find(|&a| (0..self.n).all(|b| self.leq(a, b)))
    }

    pub fn maximum(&self) -> Option<usize> {
        (0..self.n).find(|&a| (0..self.n).all(|b| self.leq(b, a)))
    }

    /// Greatest lower bound, if one exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.n).filter(|&x| self.leq(x, a) && self.leq(x, b)).collect();
        lower
            .iter()
            .copied()
            .find(|&m| lower.iter().all(|&x| self.leq(x, m)))
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) && !(0..n).any(|c| self.lt(a, c) && self.lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// A partition of a module's carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl Congruence {
    /// Builds a partition, normalizing class order by smallest member.
    pub fn new(n: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = classes
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        classes.sort();
        for (i, cl) in classes.iter().enumerate() {
            for &x in cl {
                if x >= n {
                    return Err(Error::InvalidParameter(format!("element {x} out of range")));
                }
                if class_of[x] != usize::MAX {
                    return Err(Error::InvalidParameter(format!("element {x} in two classes")));
                }
                class_of[x] = i;
            }
        }
        if let Some(x) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidParameter(format!("element {x} in no class")));
        }
        Ok(Congruence { classes, class_of })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..n).map(|x| vec![x]).collect()).expect("singletons partition")
    }

    pub fn total(n: usize) -> Self {
        Self::new(n, vec![(0..n).collect()]).expect("one class partition")
    }

    /// Least congruence identifying each given pair.
    pub fn generated(m: &FinModule, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = m.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        fn union(p: &mut [usize], a: usize, b: usize) -> bool {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra == rb {
                return false;
            }
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            p[hi] = lo;
            true
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("pair ({a},{b}) out of range")));
            }
            union(&mut parent, a, b);
        }
        loop {
            let mut changed = false;
            for x in 0..n {
                let r = find(&mut parent, x);
                if r == x {
                    continue;
                }
                for c in 0..n {
                    changed |= union(&mut parent, m.add(x, c), m.add(r, c));
                }
                if let (Some(nx), Some(nr)) = (m.neg(x), m.neg(r)) {
                    changed |= union(&mut parent, nx, nr);
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        Self::new(n, groups.into_values().collect())
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn carrier_len(&self) -> usize {
        self.class_of.len()
    }

    /// Checks operation compatibility; the error names a witness pair whose
    /// sum (or negation) lands in the wrong class.
    pub fn check_compatible(&self, m: &FinModule) -> Result<()> {
        let k = self.classes.len();
        let mut table = vec![usize::MAX; k * k];
        for a in m.elements() {
            for b in m.elements() {
                let slot = self.class_of[a] * k + self.class_of[b];
                let c = self.class_of[m.add(a, b)];
                if table[slot] == usize::MAX {
                    table[slot] = c;
                } else if table[slot] != c {
                    return Err(Error::IncompatibleCongruence(a, b));
                }
            }
        }
        if m.has_neg() {
            let mut img = vec![usize::MAX; k];
            for a in m.elements() {
                let c = self.class_of[m.neg(a).unwrap()];
                let slot = &mut img[self.class_of[a]];
                if *slot == usize::MAX {
                    *slot = c;
                } else if *slot != c {
                    return Err(Error::IncompatibleCongruence(a, a));
                }
            }
        }
        Ok(())
    }
}

/// A free module together with its distinguished generators.
///
/// Flavor `B`: element ID is the bitmask of the subset. Flavor `F_inf`: the
/// ID's base-3 digits give the sign on each generator (0 absent, 1 plus,
/// 2 minus); ID 0 is the zero element, which the empty support would
/// otherwise denote.
#[derive(Debug, Clone)]
pub struct FreeModule {
    pub module: Arc<FinModule>,
    pub rank: usize,
    pub generators: Vec<usize>,
}

/// The free module of rank `k`.
pub fn free_module(flavor: Flavor, k: usize) -> Result<FreeModule> {
    let module = match flavor {
        Flavor::B => {
            if k > 16 {
                return Err(Error::TooLarge(1usize.checked_shl(k as u32).unwrap_or(usize::MAX)));
            }
            let n = 1usize << k;
            let names = (0..n).map(|m| free_b_name(m, k)).collect();
            FinModule::from_fn(flavor, names, 0, |a, b| a | b, None)?
        }
        Flavor::Finf => {
            let n = 3usize
                .checked_pow(k as u32)
                .filter(|&n| n <= MAX_CARRIER)
                .ok_or(Error::TooLarge(usize::MAX))?;
            let digits: Vec<Vec<u8>> = (0..n).map(|id| base3_digits(id, k)).collect();
            let powers: Vec<usize> = (0..k).map(|i| 3usize.pow(i as u32)).collect();
            let add = |a: usize, b: usize| {
                if a == 0 || b == 0 {
                    return 0;
                }
                let (da, db) = (&digits[a], &digits[b]);
                let mut out = 0;
                for i in 0..k {
                    let d = match (da[i], db[i]) {
                        (0, y) => y,
                        (x, 0) => x,
                        (x, y) if x == y => x,
                        _ => return 0,
                    };
                    out += d as usize * powers[i];
                }
                out
            };
            let neg = |a: usize| {
                digits[a].iter().zip(&powers).map(|(&d, &p)| [0, 2, 1][d as usize] * p).sum()
            };
            let names = (0..n).map(|id| free_finf_name(&digits[id])).collect();
            FinModule::from_fn(flavor, names, 0, add, Some(&neg))?
        }
    };
    let mut module = module;
    module.free_rank = Some(k);
    let generators = match flavor {
        Flavor::B => (0..k).map(|i| 1usize << i).collect(),
        Flavor::Finf => (0..k).map(|i| 3usize.pow(i as u32)).collect(),
    };
    Ok(FreeModule { module: Arc::new(module), rank: k, generators })
}

impl FreeModule {
    pub fn flavor(&self) -> Flavor {
        self.module.flavor()
    }

    /// Element with the given coefficient vector (entries in `{-1, 0, 1}`;
    /// only `{0, 1}` for `B`). The all-zero vector is the zero element.
    pub fn encode(&self, coeffs: &[i8]) -> Result<usize> {
        if coeffs.len() != self.rank {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector of length {} for rank {}",
                coeffs.len(),
                self.rank
            )));
        }
        let mut id = 0usize;
        for (i, &c) in coeffs.iter().enumerate() {
            let digit = match (self.flavor(), c) {
                (_, 0) => 0,
                (_, 1) => 1,
                (Flavor::Finf, -1) => 2,
                _ => return Err(Error::InvalidParameter(format!("coefficient {c} not allowed"))),
            };
            id += digit
                * match self.flavor() {
                    Flavor::B => 1usize << i,
                    Flavor::Finf => 3usize.pow(i as u32),
                };
        }
        Ok(id)
    }

    /// Coefficient vector of an element (inverse of [`FreeModule::encode`]).
    pub fn decode(&self, id: usize) -> Vec<i8> {
        match self.flavor() {
            Flavor::B => (0..self.rank).map(|i| ((id >> i) & 1) as i8).collect(),
            Flavor::Finf => base3_digits(id, self.rank)
                .into_iter()
                .map(|d| [0i8, 1, -1][d as usize])
                .collect(),
        }
    }

    /// Evaluates the unique hom sending generator `i` to `images[i]` on an element.
    pub fn evaluate_extension(&self, target: &FinModule, images: &[usize], id: usize) -> usize {
        if self.flavor() == Flavor::Finf && id == 0 {
            return target.zero();
        }
        let terms = self
            .decode(id)
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0)
            .map(|(i, c)| {
                if c > 0 {
                    images[i]
                } else {
                    target.neg(images[i]).expect("Finf target has negation")
                }
            })
            .collect::<Vec<_>>();
        target.sum(terms).unwrap_or(target.zero())
    }
}

/// Free module of a given rank handled symbolically, without tables. Used
/// where the carrier would exceed [`MAX_CARRIER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeSpace {
    pub flavor: Flavor,
    pub rank: usize,
}

/// An element of a [`FreeSpace`]: its coefficient vector, or `None` for the
/// absorbing zero of `F_inf`. Flavor `B` uses the all-zero vector as zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeElem(Option<Vec<i8>>);

impl FreeElem {
    pub fn coeffs(&self) -> Option<&[i8]> {
        self.0.as_deref()
    }
}

impl FreeSpace {
    pub fn new(flavor: Flavor, rank: usize) -> Self {
        FreeSpace { flavor, rank }
    }

    pub fn zero(&self) -> FreeElem {
        match self.flavor {
            Flavor::B => FreeElem(Some(vec![0; self.rank])),
            Flavor::Finf => FreeElem(None),
        }
    }

    pub fn generator(&self, i: usize) -> FreeElem {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        FreeElem(Some(v))
    }

    /// Element from coefficients; for `F_inf` the all-zero vector is zero.
    pub fn elem(&self, coeffs: Vec<i8>) -> Result<FreeElem> {
        if coeffs.len() != self.rank {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector of length {} for rank {}",
                coeffs.len(),
                self.rank
            )));
        }
        let allowed: &[i8] = match self.flavor {
            Flavor::B => &[0, 1],
            Flavor::Finf => &[-1, 0, 1],
        };
        if let Some(c) = coeffs.iter().find(|c| !allowed.contains(c)) {
            return Err(Error::InvalidParameter(format!("coefficient {c} not allowed")));
        }
        if self.flavor == Flavor::Finf && coeffs.iter().all(|&c| c == 0) {
            return Ok(FreeElem(None));
        }
        Ok(FreeElem(Some(coeffs)))
    }

    pub fn add(&self, a: &FreeElem, b: &FreeElem) -> FreeElem {
        let (Some(x), Some(y)) = (&a.0, &b.0) else {
            return FreeElem(None);
        };
        let mut out = Vec::with_capacity(self.rank);
        for (&p, &q) in x.iter().zip(y) {
            out.push(match (p, q) {
                (0, c) | (c, 0) => c,
                (p, q) if p == q => p,
                _ => return FreeElem(None),
            });
        }
        FreeElem(Some(out))
    }

    pub fn neg(&self, a: &FreeElem) -> FreeElem {
        match self.flavor {
            Flavor::B => a.clone(),
            Flavor::Finf => FreeElem(a.0.as_ref().map(|v| v.iter().map(|c| -c).collect())),
        }
    }

    /// Evaluates the unique hom sending generator `i` to `images[i]`.
    pub fn evaluate(&self, target: &FinModule, images: &[usize], e: &FreeElem) -> usize {
        let Some(v) = &e.0 else {
            return target.zero();
        };
        let terms = v.iter().zip(images).filter(|(c, _)| **c != 0).map(|(&c, &img)| {
            if c > 0 {
                img
            } else {
                target.neg(img).expect("Finf target has negation")
            }
        });
        target.sum(terms.collect::<Vec<_>>()).unwrap_or(target.zero())
    }

    pub fn format(&self, e: &FreeElem) -> String {
        match &e.0 {
            None => "0".into(),
            Some(v) => {
                let digits: Vec<u8> = v.iter().map(|&c| [0u8, 1, 2][c.rem_euclid(3) as usize]).collect();
                match self.flavor {
                    Flavor::B => {
                        let mask = v.iter().enumerate().fold(0, |m, (i, &c)| m | ((c as usize) << i));
                        free_b_name(mask, self.rank)
                    }
                    Flavor::Finf => free_finf_name(&digits),
                }
            }
        }
    }
}

impl FreeModule {
    /// Views a module built by [`free_module`] (or certified free) as free.
    pub fn from_module(m: Arc<FinModule>) -> Result<Self> {
        let rank = m
            .free_rank()
            .ok_or_else(|| Error::NotFree(format!("{}-element module has no free basis", m.len())))?;
        let generators = match m.flavor() {
            Flavor::B => (0..rank).map(|i| 1usize << i).collect(),
            Flavor::Finf => (0..rank).map(|i| 3usize.pow(i as u32)).collect(),
        };
        Ok(FreeModule { module: m, rank, generators })
    }

    pub fn space(&self) -> FreeSpace {
        FreeSpace::new(self.flavor(), self.rank)
    }

    /// The element ID of a symbolic element.
    pub fn id_of(&self, e: &FreeElem) -> Result<usize> {
        match e.coeffs() {
            None => Ok(self.module.zero()),
            Some(c) => self.encode(c),
        }
    }
}

fn base3_digits(mut id: usize, k: usize) -> Vec<u8> {
    let mut out = vec![0u8; k];
    for d in out.iter_mut() {
        *d = (id % 3) as u8;
        id /= 3;
    }
    out
}

fn free_b_name(mask: usize, k: usize) -> String {
    if mask == 0 {
        return "0".into();
    }
    (0..k)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| format!("A{}", i + 1))
        .collect::<Vec<_>>()
        .join("+")
}

fn free_finf_name(digits: &[u8]) -> String {
    let mut s = String::new();
    for (i, &d) in digits.iter().enumerate() {
        match d {
            1 => {
                if !s.is_empty() {
                    s.push('+');
                }
                s.push_str(&format!("A{}", i + 1));
            }
            2 => s.push_str(&format!("-A{}", i + 1)),
            _ => {}
        }
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

/// The two-element Boolean semiring as a module over itself.
pub fn boolean() -> FinModule {
    free_module(Flavor::B, 1)
        .expect("rank 1")
        .module
        .renamed(vec!["0".into(), "1".into()])
        .expect("distinct names")
}

/// `F_inf` as a module over itself, elements `0, 1, -1`.
pub fn finf() -> FinModule {
    free_module(Flavor::Finf, 1)
        .expect("rank 1")
        .module
        .renamed(vec!["0".into(), "1".into(), "-1".into()])
        .expect("distinct names")
}

/// The one-element module of either flavor.
pub fn trivial(flavor: Flavor) -> FinModule {
    let neg: Option<Vec<usize>> = (flavor == Flavor::Finf).then(|| vec![0]);
    FinModule::from_tables(flavor, vec!["0".into()], 0, vec![vec![0]], neg).expect("one element")
}

/// A `B`-module given as a finite join-semilattice with bottom by its order
/// relation; joins are computed as least upper bounds.
pub fn lattice_from_order(names: &[&str], leq: impl Fn(usize, usize) -> bool) -> Result<FinModule> {
    let n = names.len();
    let mut rows = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let upper: Vec<usize> = (0..n).filter(|&c| leq(a, c) && leq(b, c)).collect();
            let join = upper
                .iter()
                .copied()
                .find(|&j| upper.iter().all(|&c| leq(j, c)))
                .ok_or_else(|| Error::Structural(format!("no join for ({a},{b})")))?;
            rows[a][b] = join;
        }
    }
    let zero = (0..n)
        .find(|&z| (0..n).all(|b| leq(z, b)))
        .ok_or_else(|| Error::Structural("no bottom element".into()))?;
    FinModule::from_tables(Flavor::B, names.iter().map(|s| s.to_string()).collect(), zero, rows, None)
}

/// The chain `0 < 1 < ... < k-1`.
pub fn chain(k: usize) -> FinModule {
    let names: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    lattice_from_order(&refs, |a, b| a <= b).expect("chain is a lattice")
}

/// The diamond `M_3`: bottom, three pairwise incomparable atoms, top.
pub fn diamond_m3() -> FinModule {
    lattice_from_order(&["0", "a", "b", "c", "1"], |x, y| {
        x == y || x == 0 || y == 4
    })
    .expect("M3 is a lattice")
}

/// The pentagon `N_5`: `0 < a < c < 1` and `0 < b < 1`.
pub fn pentagon_n5() -> FinModule {
    // 0:0 1:a 2:b 3:c 4:1
    lattice_from_order(&["0", "a", "b", "c", "1"], |x, y| {
        x == y || x == 0 || y == 4 || (x == 1 && y == 3)
    })
    .expect("N5 is a lattice")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_semiring_is_valid() {
        let b = boolean();
        assert!(b.validate().is_valid());
        assert_eq!(b.add(0, 1), 1);
        assert_eq!(b.add(1, 1), 1);
    }

    #[test]
    fn one_element_module_valid_for_both_flavors() {
        assert!(trivial(Flavor::B).validate().is_valid());
        assert!(trivial(Flavor::Finf).validate().is_valid());
    }

    #[test]
    fn finf_with_neutral_zero_reports_absorbing_violation() {
        let f = finf();
        // 0 + 1 = 1 instead of 0
        let bad = f.with_add_entry(0, 1, 1).unwrap().with_add_entry(1, 0, 1).unwrap();
        let report = bad.validate();
        let v = report.violates(Axiom::AbsorbingZero).expect("absorbing violation");
        assert_eq!(v.witness, vec![0, 1]);
        assert_eq!(v.axiom.to_string(), "absorbing element");
    }

    #[test]
    fn malformed_tables_are_structural_errors() {
        let err = FinModule::from_tables(Flavor::B, vec!["0".into(), "1".into()], 0, vec![vec![0, 1], vec![1, 7]], None)
            .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let err = FinModule::from_tables(Flavor::B, vec!["0".into(), "1".into()], 0, vec![vec![0, 1]], None)
            .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let err = FinModule::from_tables(Flavor::Finf, vec!["0".into()], 0, vec![vec![0]], None).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let err = FinModule::from_tables(Flavor::B, vec!["x".into(), "x".into()], 0, vec![vec![0, 1], vec![1, 1]], None)
            .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn induced_order_on_scalars() {
        let b = boolean().induced_order().unwrap();
        assert!(b.leq(0, 1) && !b.leq(1, 0));
        assert_eq!(b.minimum(), Some(0));

        let f = finf();
        let o = f.induced_order().unwrap();
        // ids: 0 -> "0", 1 -> "1", 2 -> "-1"
        assert!(o.leq(1, 0) && o.leq(2, 0));
        assert!(!o.leq(1, 2) && !o.leq(2, 1));
        assert_eq!(o.maximum(), Some(0));
    }

    #[test]
    fn corrupted_order_is_rejected() {
        // a + b = b and b + a = a for distinct a, b breaks antisymmetry.
        let m = chain(3).with_add_entry(1, 2, 2).unwrap().with_add_entry(2, 1, 1).unwrap();
        assert!(matches!(m.induced_order(), Err(Error::NotAPartialOrder(_))));
    }

    #[test]
    fn free_module_sizes_and_zero() {
        let fb = free_module(Flavor::B, 3).unwrap();
        assert_eq!(fb.module.len(), 8);
        assert!(fb.module.validate().is_valid());
        let f1 = free_module(Flavor::Finf, 1).unwrap();
        assert_eq!(f1.module.len(), 3);
        let f2 = free_module(Flavor::Finf, 2).unwrap();
        assert_eq!(f2.module.len(), 9);
        assert!(f2.module.validate().is_valid());
        let m = &f2.module;
        let a1 = f2.encode(&[1, 0]).unwrap();
        let na1_na2 = f2.encode(&[-1, -1]).unwrap();
        assert_eq!(m.add(a1, na1_na2), m.zero());
        assert_eq!(m.name(na1_na2), "-A1-A2");
    }

    #[test]
    fn rank_one_free_finf_is_isomorphic_to_scalars() {
        let f1 = free_module(Flavor::Finf, 1).unwrap();
        let s = finf();
        assert_eq!(f1.module.add_table(), s.add_table());
        assert_eq!(f1.module.neg_table(), s.neg_table());
    }

    #[test]
    fn free_b_order_is_inclusion_and_irreducibles_are_singletons() {
        let fb = free_module(Flavor::B, 3).unwrap();
        let o = fb.module.induced_order().unwrap();
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(o.leq(a, b), a & !b == 0);
            }
        }
        assert_eq!(fb.module.join_irreducibles(), vec![1, 2, 4]);
    }

    #[test]
    fn encode_decode_inverse() {
        let f = free_module(Flavor::Finf, 3).unwrap();
        for id in f.module.elements().skip(1) {
            assert_eq!(f.encode(&f.decode(id)).unwrap(), id);
        }
    }

    #[test]
    fn generated_submodule_whole_carrier() {
        let m = diamond_m3();
        let all: Vec<usize> = m.elements().collect();
        assert_eq!(m.generated_submodule(&all), all);
    }

    #[test]
    fn quotient_identity_and_total() {
        let m = free_module(Flavor::B, 2).unwrap().module;
        let (q, _) = m.quotient(&Congruence::identity(4)).unwrap();
        assert_eq!(q.add_table(), m.add_table());
        let (q, proj) = m.quotient(&Congruence::total(4)).unwrap();
        assert_eq!(q.len(), 1);
        assert!(proj.iter().all(|&c| c == 0));
        assert!(q.validate().is_valid());
    }

    #[test]
    fn quotient_of_free_rank_two_to_chain() {
        let m = free_module(Flavor::B, 2).unwrap().module;
        // {A1} ~ {A1, A2}
        let c = Congruence::generated(&m, &[(1, 3)]).unwrap();
        assert_eq!(c.classes(), &[vec![0], vec![1, 3], vec![2]]);
        let (q, _) = m.quotient(&c).unwrap();
        assert_eq!(q.len(), 3);
        assert!(q.validate().is_valid());
        let o = q.induced_order().unwrap();
        // total order: every pair comparable
        for a in 0..3 {
            for b in 0..3 {
                assert!(o.leq(a, b) || o.leq(b, a));
            }
        }
    }

    #[test]
    fn incompatible_partition_is_rejected_with_witness() {
        let m = free_module(Flavor::B, 2).unwrap().module;
        // {A1} ~ {A2} alone is not closed: A1 + A1 = A1 but A2 + A1 = A1+A2.
        let c = Congruence::new(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
        assert!(matches!(m.quotient(&c), Err(Error::IncompatibleCongruence(_, _))));
    }

    #[test]
    fn distributivity_verdicts() {
        assert!(chain(4).is_distributive_lattice().unwrap().holds());
        assert!(matches!(
            diamond_m3().is_distributive_lattice().unwrap(),
            Distributivity::Fails(_, _, _)
        ));
        assert!(matches!(
            pentagon_n5().is_distributive_lattice().unwrap(),
            Distributivity::Fails(_, _, _)
        ));
        assert!(free_module(Flavor::B, 3).unwrap().module.is_distributive_lattice().unwrap().holds());
    }

    #[test]
    fn carrier_cap_is_enforced() {
        assert!(matches!(free_module(Flavor::Finf, 11), Err(Error::TooLarge(_))));
        assert!(matches!(free_module(Flavor::B, 17), Err(Error::TooLarge(_))));
    }

    #[test]
    fn finf_generators_pick_one_sign_per_pair() {
        let f = free_module(Flavor::Finf, 2).unwrap();
        assert_eq!(f.module.generators(), f.generators);
        assert_eq!(f.module.join_irreducibles().len(), 4);
    }
}
