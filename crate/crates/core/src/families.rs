//! The indexed lattices `D_n` and their signed mirrors `E_n`, the nine-element
//! lattice `D0` with its signed twin `E0`, and the canonical morphisms between
//! them.
//!
//! Elements are labelled `a_ik` for `(i, k)` in the index set
//! `{(i,i)} ∪ {(i,i+1)} ∪ {(i+1,i)} ∪ {(i-1,i+1)}` inside `1..=n`. In `D_n`
//! addition is the componentwise max with an extra bottom `O`; in `E_n` it is
//! the componentwise min on each sign, a mixed-sign sum is the absorbing `0`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hom::{compose, enumerate_homs, Hom, HomConstraints, SearchOptions};
use crate::module::{free_module, FinModule, Flavor, FreeElem, FreeModule, FreeSpace};

pub type Index = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    D(usize),
    E(usize),
    D0,
    E0,
}

impl Family {
    pub fn flavor(self) -> Flavor {
        match self {
            Family::D(_) | Family::D0 => Flavor::B,
            Family::E(_) | Family::E0 => Flavor::Finf,
        }
    }

    /// Largest index occurring in a label.
    pub fn top_index(self) -> usize {
        match self {
            Family::D(n) | Family::E(n) => n,
            Family::D0 | Family::E0 => 4,
        }
    }

    pub fn build(self) -> Result<IndexedLattice> {
        match self {
            Family::D(n) => construct_dn(n),
            Family::E(n) => construct_en(n),
            Family::D0 => Ok(construct_d0()),
            Family::E0 => Ok(construct_e0()),
        }
    }

    pub fn name(self) -> String {
        match self {
            Family::D(n) => format!("D_{n}"),
            Family::E(n) => format!("E_{n}"),
            Family::D0 => "D0".into(),
            Family::E0 => "E0".into(),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    /// Accepts `D0`, `E0`, `D<n>`, `E<n>`, `D_<n>`, `E_<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown family {s:?}"));
        let (head, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        match (head, rest) {
            ("D", "0") => Ok(Family::D0),
            ("E", "0") => Ok(Family::E0),
            ("D", r) => r.parse().map(Family::D).map_err(|_| bad()),
            ("E", r) => r.parse().map(Family::E).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// A family member with its `(i, k)` labels.
#[derive(Debug, Clone)]
pub struct IndexedLattice {
    pub family: Family,
    pub module: Arc<FinModule>,
    labels: BTreeMap<Index, usize>,
}

impl IndexedLattice {
    pub fn flavor(&self) -> Flavor {
        self.family.flavor()
    }

    /// The element `a_ik` (the positive one for `E`).
    pub fn elem(&self, i: usize, k: usize) -> usize {
        self.get(i, k).unwrap_or_else(|| panic!("no element a_{i}{k} in {}", self.family.name()))
    }

    pub fn get(&self, i: usize, k: usize) -> Option<usize> {
        self.labels.get(&(i, k)).copied()
    }

    /// The element `-a_ik` (flavor `F_inf` only).
    pub fn neg_elem(&self, i: usize, k: usize) -> usize {
        self.module.neg(self.elem(i, k)).expect("signed family")
    }

    pub fn labels(&self) -> impl Iterator<Item = (Index, usize)> + '_ {
        self.labels.iter().map(|(&ix, &id)| (ix, id))
    }

    /// Label of an element, if it is some positive `a_ik`.
    pub fn index_of(&self, id: usize) -> Option<Index> {
        self.labels.iter().find(|(_, &v)| v == id).map(|(&ix, _)| ix)
    }

    /// The eight corner elements: bottom diamond then top diamond.
    pub fn corners(&self) -> [usize; 8] {
        let t = self.family.top_index();
        [
            self.elem(1, 1),
            self.elem(1, 2),
            self.elem(2, 1),
            self.elem(2, 2),
            self.elem(t - 1, t - 1),
            self.elem(t - 1, t),
            self.elem(t, t - 1),
            self.elem(t, t),
        ]
    }
}

/// The index set of `D_n`, ordered by `(i + k, i)`.
pub fn index_set(n: usize) -> Vec<Index> {
    let mut out = Vec::new();
    for i in 1..=n {
        out.push((i, i));
        if i < n {
            out.push((i, i + 1));
            out.push((i + 1, i));
        }
        if i >= 2 && i < n {
            out.push((i - 1, i + 1));
        }
    }
    out.sort_by_key(|&(i, k)| (i + k, i));
    out
}

fn d0_index_set() -> Vec<Index> {
    vec![(1, 1), (1, 2), (2, 1), (2, 2), (3, 3), (3, 4), (4, 3), (4, 4)]
}

fn label(prefix: &str, (i, k): Index) -> String {
    if i < 10 && k < 10 {
        format!("{prefix}_{i}{k}")
    } else {
        format!("{prefix}_{i},{k}")
    }
}

fn build_b(family: Family, prefix: &str, index: &[Index]) -> Result<IndexedLattice> {
    // id 0 is the bottom O; a_ik has id 1 + position.
    let pos: BTreeMap<Index, usize> = index.iter().enumerate().map(|(p, &ix)| (ix, p + 1)).collect();
    let mut names = vec!["O".to_string()];
    names.extend(index.iter().map(|&ix| label(prefix, ix)));
    let join = |a: usize, b: usize| -> usize {
        match (a, b) {
            (0, x) | (x, 0) => x,
            _ => {
                let (i, k) = index[a - 1];
                let (l, m) = index[b - 1];
                pos[&(i.max(l), k.max(m))]
            }
        }
    };
    for &(i, k) in index {
        for &(l, m) in index {
            if !pos.contains_key(&(i.max(l), k.max(m))) {
                return Err(Error::Structural(format!(
                    "index set not closed under max at {:?} {:?}",
                    (i, k),
                    (l, m)
                )));
            }
        }
    }
    let module = FinModule::from_fn(Flavor::B, names, 0, join, None)?;
    Ok(IndexedLattice { family, module: Arc::new(module), labels: pos })
}

fn build_finf(family: Family, prefix: &str, index: &[Index]) -> Result<IndexedLattice> {
    // id 0 is 0; a_ik has id 1 + p, -a_ik has id 1 + len + p.
    let len = index.len();
    let pos: BTreeMap<Index, usize> = index.iter().enumerate().map(|(p, &ix)| (ix, p + 1)).collect();
    for &(i, k) in index {
        for &(l, m) in index {
            if !pos.contains_key(&(i.min(l), k.min(m))) {
                return Err(Error::Structural(format!(
                    "index set not closed under min at {:?} {:?}",
                    (i, k),
                    (l, m)
                )));
            }
        }
    }
    let mut names = vec!["0".to_string()];
    names.extend(index.iter().map(|&ix| label(prefix, ix)));
    names.extend(index.iter().map(|&ix| format!("-{}", label(prefix, ix))));
    let split = |x: usize| -> (bool, usize) {
        if x <= len {
            (true, x - 1)
        } else {
            (false, x - 1 - len)
        }
    };
    let add = |a: usize, b: usize| -> usize {
        if a == 0 || b == 0 {
            return 0;
        }
        let ((sa, pa), (sb, pb)) = (split(a), split(b));
        if sa != sb {
            return 0;
        }
        let (i, k) = index[pa];
        let (l, m) = index[pb];
        let p = pos[&(i.min(l), k.min(m))];
        if sa {
            p
        } else {
            p + len
        }
    };
    let neg = |a: usize| -> usize {
        match a {
            0 => 0,
            x if x <= len => x + len,
            x => x - len,
        }
    };
    let module = FinModule::from_fn(Flavor::Finf, names, 0, add, Some(&neg))?;
    Ok(IndexedLattice { family, module: Arc::new(module), labels: pos })
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("family parameter n = {n} must be at least 2")));
    }
    Ok(())
}

/// `D_n`, a distributive lattice of `4n - 3` elements.
pub fn construct_dn(n: usize) -> Result<IndexedLattice> {
    check_n(n)?;
    build_b(Family::D(n), "a", &index_set(n))
}

/// `E_n`, the `F_inf`-module of `8n - 7` elements.
pub fn construct_en(n: usize) -> Result<IndexedLattice> {
    check_n(n)?;
    build_finf(Family::E(n), "a", &index_set(n))
}

pub fn construct_d0() -> IndexedLattice {
    build_b(Family::D0, "A", &d0_index_set()).expect("D0 index set is closed")
}

pub fn construct_e0() -> IndexedLattice {
    build_finf(Family::E0, "A", &d0_index_set()).expect("E0 index set is closed")
}

/// Images of the free generators `A_1 .. A_{2n-1}` under the canonical surjection.
pub fn section_generators(n: usize, flavor: Flavor) -> Vec<Index> {
    let mut out = Vec::with_capacity(2 * n - 1);
    match flavor {
        Flavor::B => {
            out.extend([(1, 1), (1, 2), (2, 1)]);
            for i in 2..n {
                out.push((i - 1, i + 1));
                out.push((i + 1, i));
            }
        }
        Flavor::Finf => {
            // The general pattern only starts at i = 2; the first three are explicit.
            out.extend([(n, n), (n, n - 1), (n - 1, n)]);
            for i in 2..n {
                out.push((n - i, n - i + 2));
                out.push((n - i + 1, n - i));
            }
        }
    }
    out
}

/// A splittable surjection `g` from the free module of rank `2n - 1` onto a
/// family member, with its right inverse `h`.
///
/// The free side is kept symbolic since for `E_n` its carrier (`3^(2n-1)`)
/// outgrows the table cap quickly; [`Section::materialize`] builds the
/// tabulated homs when the rank allows.
#[derive(Debug, Clone)]
pub struct Section {
    pub family: IndexedLattice,
    pub space: FreeSpace,
    /// `g(A_j)` for each generator.
    pub generator_images: Vec<usize>,
    /// `h(x)` for each element of the family.
    pub h: Vec<FreeElem>,
}

impl Section {
    pub fn g(&self, e: &FreeElem) -> usize {
        self.space.evaluate(&self.family.module, &self.generator_images, e)
    }

    /// Checks that `h` preserves zero, sums and negation, and that `g ∘ h = id`.
    pub fn verify(&self) -> Result<()> {
        let m = &self.family.module;
        let sp = &self.space;
        if self.h[m.zero()] != sp.zero() {
            return Err(Error::NotAHom("h does not preserve zero".into()));
        }
        for a in m.elements() {
            for b in a..m.len() {
                if self.h[m.add(a, b)] != sp.add(&self.h[a], &self.h[b]) {
                    return Err(Error::NotAHom(format!(
                        "h({} + {}) differs from h({}) + h({})",
                        m.name(a),
                        m.name(b),
                        m.name(a),
                        m.name(b)
                    )));
                }
            }
            if let Some(na) = m.neg(a) {
                if self.h[na] != sp.neg(&self.h[a]) {
                    return Err(Error::NotAHom(format!("h(-{}) differs from -h", m.name(a))));
                }
            }
            if self.g(&self.h[a]) != a {
                return Err(Error::NotSplittable(format!("g(h({})) != {}", m.name(a), m.name(a))));
            }
        }
        Ok(())
    }

    /// Tabulated `(free module, g, h)` with `h` attached to `g` as a verified
    /// right inverse. Fails with [`Error::TooLarge`] past the carrier cap.
    pub fn materialize(&self) -> Result<(FreeModule, Hom, Hom)> {
        let free = free_module(self.space.flavor, self.space.rank)?;
        let m = self.family.module.clone();
        let g = Hom::from_generator_images(&free, m.clone(), &self.generator_images)?;
        let hmap = self.h.iter().map(|e| free.id_of(e)).collect::<Result<Vec<_>>>()?;
        let h = Hom::new(m, free.module.clone(), hmap)?;
        let g = g.with_right_inverse(h.clone())?;
        Ok((free, g, h))
    }
}

/// The canonical splitting of `D_n` (flavor `B`) or `E_n` (flavor `F_inf`).
///
/// `h` sends each element to the sum of the generators whose `g`-image lies
/// below it (negated for negative elements). The result is verified before
/// it is returned.
pub fn canonical_section(n: usize, flavor: Flavor) -> Result<Section> {
    let family = match flavor {
        Flavor::B => construct_dn(n)?,
        Flavor::Finf => construct_en(n)?,
    };
    let m = family.module.clone();
    let space = FreeSpace::new(flavor, 2 * n - 1);
    let generator_images: Vec<usize> =
        section_generators(n, flavor).iter().map(|&(i, k)| family.elem(i, k)).collect();
    let order = m.induced_order()?;
    let below = |x: usize| -> Result<FreeElem> {
        space.elem(generator_images.iter().map(|&gi| order.leq(gi, x) as i8).collect())
    };
    let mut h = vec![space.zero(); m.len()];
    match flavor {
        Flavor::B => {
            for x in m.elements().filter(|&x| x != m.zero()) {
                h[x] = below(x)?;
            }
        }
        Flavor::Finf => {
            for (_, x) in family.labels() {
                let hx = below(x)?;
                h[m.neg(x).unwrap()] = space.neg(&hx);
                h[x] = hx;
            }
        }
    }
    let s = Section { family, space, generator_images, h };
    s.verify()?;
    Ok(s)
}

fn require_corner_n(n: usize) -> Result<()> {
    if n <= 3 {
        return Err(Error::InvalidParameter(format!("corner maps need n > 3, got {n}")));
    }
    Ok(())
}

/// The corner embedding `D0 -> D_n` (flavor `B`) or `E0 -> E_n` (flavor `F_inf`).
pub fn corner_embedding(n: usize, flavor: Flavor) -> Result<Hom> {
    require_corner_n(n)?;
    let (small, big) = match flavor {
        Flavor::B => (construct_d0(), construct_dn(n)?),
        Flavor::Finf => (construct_e0(), construct_en(n)?),
    };
    corner_embedding_between(&small, &big)
}

/// The corner embedding into an already-built family member.
pub fn corner_embedding_between(small: &IndexedLattice, big: &IndexedLattice) -> Result<Hom> {
    let (sm, bm) = (&small.module, &big.module);
    let mut map = vec![bm.zero(); sm.len()];
    for (s, b) in small.corners().into_iter().zip(big.corners()) {
        map[s] = b;
        if let (Some(ns), Some(nb)) = (sm.neg(s), bm.neg(b)) {
            map[ns] = nb;
        }
    }
    let f = Hom::new(sm.clone(), bm.clone(), map)?;
    if let Err(v) = f.check() {
        return Err(Error::NotAHom(format!("corner embedding: {v}")));
    }
    Ok(f)
}

/// The case-defined retraction `j: D_n -> D0` of the corner embedding.
fn retraction_b(n: usize, dn: &IndexedLattice, d0: &IndexedLattice) -> Result<Vec<usize>> {
    let mut map = vec![0usize; dn.module.len()];
    let leq = |(i, k): Index, (l, m): Index| i <= l && k <= m;
    for ((k, l), id) in dn.labels() {
        let target = if k <= 2 && l <= 2 {
            (k, l)
        } else if leq((1, 2), (k, l)) && leq((k, l), (n - 1, n - 1)) && (k, l) != (2, 2) {
            (3, 3)
        } else if (k, l) == (n - 1, n) || (k, l) == (n - 2, n) {
            (3, 4)
        } else if (k, l) == (n, n - 1) {
            (4, 3)
        } else if (k, l) == (n, n) {
            (4, 4)
        } else {
            return Err(Error::InvalidParameter(format!(
                "retraction formula does not cover a_{k}{l} in D_{n}"
            )));
        };
        map[id] = d0.elem(target.0, target.1);
    }
    Ok(map)
}

/// The left inverse of [`corner_embedding`]. For flavor `F_inf` it is the
/// case formula conjugated by the order-reversing index flips
/// `(i, k) -> (n+1-k, n+1-i)` of `E_n` and `(i, k) -> (5-k, 5-i)` of `E0`.
pub fn corner_retraction(n: usize, flavor: Flavor) -> Result<Hom> {
    require_corner_n(n)?;
    let dn = construct_dn(n)?;
    let d0 = construct_d0();
    let jd = retraction_b(n, &dn, &d0)?;
    let r = match flavor {
        Flavor::B => Hom::new(dn.module.clone(), d0.module.clone(), jd)?,
        Flavor::Finf => {
            let en = construct_en(n)?;
            let e0 = construct_e0();
            let mut map = vec![e0.module.zero(); en.module.len()];
            for ((i, k), x) in en.labels() {
                let flipped = dn.elem(n + 1 - k, n + 1 - i);
                let (a, b) = d0.index_of(jd[flipped]).expect("j lands on a labelled element");
                let y = e0.elem(5 - b, 5 - a);
                map[x] = y;
                map[en.module.neg(x).unwrap()] = e0.module.neg(y).unwrap();
            }
            Hom::new(en.module.clone(), e0.module.clone(), map)?
        }
    };
    if let Err(v) = r.check() {
        return Err(Error::NotAHom(format!("corner retraction for n = {n}: {v}")));
    }
    Ok(r)
}

/// The corner embedding with its retraction attached as a verified left inverse.
pub fn split_corner_embedding(n: usize, flavor: Flavor) -> Result<Hom> {
    let i = corner_embedding(n, flavor)?;
    let j = corner_retraction(n, flavor)?;
    let j = Hom::new(i.target().clone(), i.source().clone(), j.map().to_vec())?;
    i.with_left_inverse(j)
}

/// Corner-pinning constraints `a_corner -> b_corner` for `src -> tgt`.
pub fn corner_constraints(src: &IndexedLattice, tgt: &IndexedLattice) -> HomConstraints {
    src.corners()
        .into_iter()
        .zip(tgt.corners())
        .fold(HomConstraints::new(), |c, (a, b)| c.pin(a, b))
        .injective()
}

/// All injective homs between two family members fixing the eight corners.
pub fn rigidity_check(n: usize, m: usize, flavor: Flavor, opts: SearchOptions) -> Result<Vec<Hom>> {
    let (src, tgt) = match flavor {
        Flavor::B => (construct_dn(n)?, construct_dn(m)?),
        Flavor::Finf => (construct_en(n)?, construct_en(m)?),
    };
    enumerate_homs(&src.module, &tgt.module, &corner_constraints(&src, &tgt), opts)
}

/// Checks that `f ∘ w` is the identity.
pub fn is_split_pair(f: &Hom, w: &Hom) -> bool {
    compose(f, w).map(|c| c.is_identity()).unwrap_or(false)
}
