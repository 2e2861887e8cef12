//! Module homomorphisms: verification, composition, one-sided inverses, and
//! exhaustive enumeration of hom-sets.
//!
//! [`enumerate_homs`] backtracks over the canonical generating set of the
//! source (see [`FinModule::generators`]), extends each partial assignment
//! along sum decompositions, and prunes as soon as an already-determined sum
//! disagrees. Every completed assignment is then re-verified over all pairs,
//! since the source is in general a proper quotient of the free module on its
//! generators. [`brute_force_homs`] filters all total maps and serves as the
//! reference for it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::module::{FinModule, Flavor, FreeModule};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Why a map fails to be a homomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomViolation {
    /// `f(0) != 0`
    Zero,
    /// `f(a + b) != f(a) + f(b)`
    Add(usize, usize),
    /// `f(-a) != -f(a)`
    Neg(usize),
}

impl fmt::Display for HomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomViolation::Zero => write!(f, "zero is not preserved"),
            HomViolation::Add(a, b) => write!(f, "sum of ({a}, {b}) is not preserved"),
            HomViolation::Neg(a) => write!(f, "negation of {a} is not preserved"),
        }
    }
}

/// A total map between two modules of the same flavor.
#[derive(Debug, Clone)]
pub struct Hom {
    source: Arc<FinModule>,
    target: Arc<FinModule>,
    map: Vec<usize>,
    verdict: OnceLock<Option<HomViolation>>,
    left_inverse: Option<Box<Hom>>,
    right_inverse: Option<Box<Hom>>,
}

impl PartialEq for Hom {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
            && same_module(&self.source, &other.source)
            && same_module(&self.target, &other.target)
    }
}

impl Eq for Hom {}

pub(crate) fn same_module(a: &Arc<FinModule>, b: &Arc<FinModule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Hom {
    /// Wraps a total map. Homomorphy is not required here; see [`Hom::check`].
    pub fn new(source: Arc<FinModule>, target: Arc<FinModule>, map: Vec<usize>) -> Result<Self> {
        if source.flavor() != target.flavor() {
            return Err(Error::FlavorMismatch(source.flavor(), target.flavor()));
        }
        if map.len() != source.len() {
            return Err(Error::InvalidParameter(format!(
                "map has {} entries, source has {} elements",
                map.len(),
                source.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&v| v >= target.len()) {
            return Err(Error::InvalidParameter(format!("image {bad} is not a target element")));
        }
        Ok(Hom {
            source,
            target,
            map,
            verdict: OnceLock::new(),
            left_inverse: None,
            right_inverse: None,
        })
    }

    pub fn identity(m: Arc<FinModule>) -> Self {
        let map = m.elements().collect();
        Hom::new(m.clone(), m, map).expect("identity is total")
    }

    /// The map sending everything to zero.
    pub fn zero_map(source: Arc<FinModule>, target: Arc<FinModule>) -> Result<Self> {
        let map = vec![target.zero(); source.len()];
        Hom::new(source, target, map)
    }

    /// The unique hom out of a free module with the given generator images.
    pub fn from_generator_images(
        free: &FreeModule,
        target: Arc<FinModule>,
        images: &[usize],
    ) -> Result<Self> {
        if images.len() != free.rank {
            return Err(Error::InvalidParameter(format!(
                "{} images for rank {}",
                images.len(),
                free.rank
            )));
        }
        if free.flavor() != target.flavor() {
            return Err(Error::FlavorMismatch(free.flavor(), target.flavor()));
        }
        if let Some(&bad) = images.iter().find(|&&v| v >= target.len()) {
            return Err(Error::InvalidParameter(format!("image {bad} is not a target element")));
        }
        let map = free
            .module
            .elements()
            .map(|id| free.evaluate_extension(&target, images, id))
            .collect();
        Hom::new(free.module.clone(), target, map)
    }

    pub fn source(&self) -> &Arc<FinModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinModule> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    /// Verifies zero, sum and negation preservation. The verdict is cached.
    pub fn check(&self) -> std::result::Result<(), HomViolation> {
        match self.verdict.get_or_init(|| hom_violation(&self.source, &self.target, &self.map)) {
            None => Ok(()),
            Some(v) => Err(*v),
        }
    }

    pub fn is_hom(&self) -> bool {
        self.check().is_ok()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.map.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &v in &self.map {
            seen[v] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_identity(&self) -> bool {
        same_module(&self.source, &self.target) && self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn left_inverse(&self) -> Option<&Hom> {
        self.left_inverse.as_deref()
    }

    pub fn right_inverse(&self) -> Option<&Hom> {
        self.right_inverse.as_deref()
    }

    /// Attaches `w` as a verified left inverse (`w ∘ self = id`).
    pub fn with_left_inverse(mut self, w: Hom) -> Result<Self> {
        let composite = compose(&w, &self)?;
        if !composite.is_identity() {
            return Err(Error::NotSplittable("candidate is not a left inverse".into()));
        }
        self.left_inverse = Some(Box::new(w));
        Ok(self)
    }

    /// Attaches `w` as a verified right inverse (`self ∘ w = id`).
    pub fn with_right_inverse(mut self, w: Hom) -> Result<Self> {
        let composite = compose(&self, &w)?;
        if !composite.is_identity() {
            return Err(Error::NotSplittable("candidate is not a right inverse".into()));
        }
        self.right_inverse = Some(Box::new(w));
        Ok(self)
    }

    /// Element names of the map, `source name -> target name`.
    pub fn describe(&self) -> Vec<(String, String)> {
        self.map
            .iter()
            .enumerate()
            .map(|(a, &b)| (self.source.name(a).to_string(), self.target.name(b).to_string()))
            .collect()
    }
}

fn hom_violation(src: &FinModule, tgt: &FinModule, map: &[usize]) -> Option<HomViolation> {
    if map[src.zero()] != tgt.zero() {
        return Some(HomViolation::Zero);
    }
    for a in src.elements() {
        for b in a..src.len() {
            if map[src.add(a, b)] != tgt.add(map[a], map[b]) {
                return Some(HomViolation::Add(a, b));
            }
        }
    }
    if let Flavor::Finf = src.flavor() {
        for a in src.elements() {
            if map[src.neg(a).unwrap()] != tgt.neg(map[a]).unwrap() {
                return Some(HomViolation::Neg(a));
            }
        }
    }
    None
}

/// `g ∘ f`.
pub fn compose(g: &Hom, f: &Hom) -> Result<Hom> {
    if !same_module(&f.target, &g.source) {
        return Err(Error::ObjectMismatch("target of f is not the source of g".into()));
    }
    let map = f.map.iter().map(|&x| g.map[x]).collect();
    let h = Hom::new(f.source.clone(), g.target.clone(), map)?;
    if f.is_hom() && g.is_hom() {
        if let Err(v) = h.check() {
            return Err(Error::NotAHom(format!("composite of homs fails: {v}")));
        }
    }
    Ok(h)
}

/// Restrictions on the maps a search may return.
#[derive(Debug, Clone, Default)]
pub struct HomConstraints {
    pinned: Vec<(usize, usize)>,
    allowed: BTreeMap<usize, Vec<usize>>,
    require_injective: bool,
}

impl HomConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Requires `f(a) = b`. Pinning one element to two values makes the
    /// constraint set unsatisfiable.
    pub fn pin(mut self, a: usize, b: usize) -> Self {
        self.pinned.push((a, b));
        self
    }

    /// Requires `f(a)` to lie in `values`.
    pub fn restrict(mut self, a: usize, values: Vec<usize>) -> Self {
        match self.allowed.get_mut(&a) {
            Some(prev) => prev.retain(|v| values.contains(v)),
            None => {
                self.allowed.insert(a, values);
            }
        }
        self
    }

    pub fn injective(mut self) -> Self {
        self.require_injective = true;
        self
    }

    pub fn requires_injective(&self) -> bool {
        self.require_injective
    }

    pub fn pins(&self) -> &[(usize, usize)] {
        &self.pinned
    }

    fn domains(&self, src: &FinModule, tgt: &FinModule) -> Result<Vec<Option<Vec<bool>>>> {
        let mut dom: Vec<Option<Vec<bool>>> = vec![None; src.len()];
        let mut narrow = |a: usize, ok: &dyn Fn(usize) -> bool| -> Result<()> {
            if a >= src.len() {
                return Err(Error::InvalidParameter(format!("constrained element {a} out of range")));
            }
            let slot = dom[a].get_or_insert_with(|| vec![true; tgt.len()]);
            for (v, s) in slot.iter_mut().enumerate() {
                *s &= ok(v);
            }
            Ok(())
        };
        for &(a, b) in &self.pinned {
            if b >= tgt.len() {
                return Err(Error::InvalidParameter(format!("pinned image {b} out of range")));
            }
            narrow(a, &|v| v == b)?;
        }
        for (&a, vals) in &self.allowed {
            narrow(a, &|v| vals.contains(&v))?;
        }
        Ok(dom)
    }

    /// Whether a total map satisfies these constraints.
    pub fn admits(&self, map: &[usize]) -> bool {
        if self.pinned.iter().any(|&(a, b)| map.get(a) != Some(&b)) {
            return false;
        }
        if self.allowed.iter().any(|(&a, vals)| !map.get(a).is_some_and(|v| vals.contains(v))) {
            return false;
        }
        if self.require_injective {
            let mut sorted = map.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Maximum number of search nodes (partial assignments plus full
    /// verification passes) before the search reports [`Error::BudgetExceeded`].
    pub budget: u64,
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: DEFAULT_BUDGET, parallel: true }
    }
}

impl SearchOptions {
    pub fn with_budget(budget: u64) -> Self {
        SearchOptions { budget, ..Self::default() }
    }
}

/// All homs `M -> N` satisfying `c`, in lexicographic order of their maps.
pub fn enumerate_homs(
    m: &Arc<FinModule>,
    n: &Arc<FinModule>,
    c: &HomConstraints,
    opts: SearchOptions,
) -> Result<Vec<Hom>> {
    let plan = Plan::new(m, n, c)?;
    let mut maps = plan.run_all(opts)?;
    maps.sort_unstable();
    maps.into_iter().map(|map| Hom::new(m.clone(), n.clone(), map)).collect()
}

/// Number of homs `M -> N` satisfying `c`.
pub fn count_homs(
    m: &Arc<FinModule>,
    n: &Arc<FinModule>,
    c: &HomConstraints,
    opts: SearchOptions,
) -> Result<usize> {
    Ok(Plan::new(m, n, c)?.run_all(opts)?.len())
}

/// The first hom found in search order, or `None` once the search space is
/// exhausted.
pub fn find_hom(
    m: &Arc<FinModule>,
    n: &Arc<FinModule>,
    c: &HomConstraints,
    opts: SearchOptions,
) -> Result<Option<Hom>> {
    let plan = Plan::new(m, n, c)?;
    match plan.run_first(opts)? {
        Some(map) => Ok(Some(Hom::new(m.clone(), n.clone(), map)?)),
        None => Ok(None),
    }
}

/// Reference enumeration: tests every total map.
pub fn brute_force_homs(
    m: &Arc<FinModule>,
    n: &Arc<FinModule>,
    c: &HomConstraints,
    budget: u64,
) -> Result<Vec<Hom>> {
    if m.flavor() != n.flavor() {
        return Err(Error::FlavorMismatch(m.flavor(), n.flavor()));
    }
    let total = (n.len() as u64).checked_pow(m.len() as u32);
    if total.is_none_or(|t| t > budget) {
        return Err(Error::BudgetExceeded(budget));
    }
    let size = n.len();
    let mut map = vec![0usize; m.len()];
    let mut out = Vec::new();
    loop {
        if c.admits(&map) && hom_violation(m, n, &map).is_none() {
            out.push(Hom::new(m.clone(), n.clone(), map.clone())?);
        }
        // Odometer, last position fastest: visits maps in lexicographic order.
        let mut i = map.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            map[i] += 1;
            if map[i] < size {
                break;
            }
            map[i] = 0;
        }
    }
}

/// A hom `w` with `w ∘ f = id`, or `None` if none exists.
pub fn find_left_inverse(f: &Hom, opts: SearchOptions) -> Result<Option<Hom>> {
    let mut c = HomConstraints::new();
    for a in f.source.elements() {
        c = c.pin(f.apply(a), a);
    }
    let found = find_hom(&f.target, &f.source, &c, opts)?;
    if let Some(w) = &found {
        debug_assert!(compose(w, f)?.is_identity());
    }
    Ok(found)
}

/// A hom `w` with `f ∘ w = id`, or `None` if none exists.
pub fn find_right_inverse(f: &Hom, opts: SearchOptions) -> Result<Option<Hom>> {
    let mut preimages = vec![Vec::new(); f.target.len()];
    for a in f.source.elements() {
        preimages[f.apply(a)].push(a);
    }
    if preimages.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let mut c = HomConstraints::new();
    for (y, pre) in preimages.into_iter().enumerate() {
        c = c.restrict(y, pre);
    }
    let found = find_hom(&f.target, &f.source, &c, opts)?;
    if let Some(w) = &found {
        debug_assert!(compose(f, w)?.is_identity());
    }
    Ok(found)
}

const UNSET: usize = usize::MAX;

/// Precomputed search structure for one `(M, N, constraints)` triple.
struct Plan<'a> {
    src: &'a FinModule,
    tgt: &'a FinModule,
    /// Generator element IDs in assignment order.
    gens: Vec<usize>,
    /// For `F_inf`: the element `-g` for each generator.
    gen_negs: Vec<Option<usize>>,
    /// Elements fixed before any generator is assigned (zero).
    initial: Vec<usize>,
    /// `ready[k]`: elements whose image is determined once generator `k` is assigned.
    ready: Vec<Vec<usize>>,
    /// Sum decomposition of each element as `(generator index, negated)` literals.
    decomp: Vec<Vec<(usize, bool)>>,
    /// `sum_pairs[z]`: pairs `(x, y)`, `x <= y`, with `x + y = z`.
    sum_pairs: Vec<Vec<(usize, usize)>>,
    domain: Vec<Option<Vec<bool>>>,
    injective: bool,
    constraints: &'a HomConstraints,
}

struct State {
    image: Vec<usize>,
    used: Vec<u32>,
    computed: Vec<usize>,
}

struct Budget {
    limit: u64,
    spent: AtomicU64,
    aborted: AtomicBool,
}

impl Budget {
    fn tick(&self) -> bool {
        if self.aborted.load(Ordering::Relaxed) {
            return false;
        }
        if self.spent.fetch_add(1, Ordering::Relaxed) >= self.limit {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }
}

impl<'a> Plan<'a> {
    fn new(src: &'a FinModule, tgt: &'a FinModule, c: &'a HomConstraints) -> Result<Self> {
        if src.flavor() != tgt.flavor() {
            return Err(Error::FlavorMismatch(src.flavor(), tgt.flavor()));
        }
        let order = src.induced_order()?;
        let n = src.len();
        let irreducibles = src.join_irreducibles();

        let mut gens = src.generators();
        let downset = |x: usize| (0..n).filter(|&y| order.leq(y, x)).count();
        gens.sort_by_key(|&g| (downset(g), g));
        let gen_index: BTreeMap<usize, (usize, bool)> = gens
            .iter()
            .enumerate()
            .flat_map(|(k, &g)| {
                let mut v = vec![(g, (k, false))];
                if let Some(ng) = src.neg(g) {
                    v.push((ng, (k, true)));
                }
                v
            })
            .collect();
        let gen_negs = gens.iter().map(|&g| src.neg(g)).collect();

        let mut decomp = vec![Vec::new(); n];
        let mut initial = Vec::new();
        let mut ready = vec![Vec::new(); gens.len()];
        for x in 0..n {
            if x == src.zero() {
                initial.push(x);
                continue;
            }
            let lits: Vec<(usize, bool)> = if let Some(&lit) = gen_index.get(&x) {
                vec![lit]
            } else {
                // Maximal irreducibles below x; their sum is x.
                let below: Vec<usize> =
                    irreducibles.iter().copied().filter(|&r| order.leq(r, x)).collect();
                below
                    .iter()
                    .copied()
                    .filter(|&r| !below.iter().any(|&s| order.lt(r, s)))
                    .map(|r| gen_index[&r])
                    .collect()
            };
            let last = lits.iter().map(|l| l.0).max().ok_or_else(|| {
                Error::Structural(format!("element {x} has no generator decomposition"))
            })?;
            ready[last].push(x);
            decomp[x] = lits;
        }

        let mut sum_pairs = vec![Vec::new(); n];
        for a in 0..n {
            for b in a..n {
                sum_pairs[src.add(a, b)].push((a, b));
            }
        }

        Ok(Plan {
            src,
            tgt,
            gens,
            gen_negs,
            initial,
            ready,
            decomp,
            sum_pairs,
            domain: c.domains(src, tgt)?,
            injective: c.requires_injective(),
            constraints: c,
        })
    }

    fn fresh_state(&self) -> Option<State> {
        let mut st = State {
            image: vec![UNSET; self.src.len()],
            used: vec![0; self.tgt.len()],
            computed: Vec::new(),
        };
        let zero_img = self.tgt.zero();
        for &x in &self.initial {
            if !self.set(&mut st, x, zero_img) {
                return None;
            }
        }
        Some(st)
    }

    fn allowed(&self, x: usize, v: usize) -> bool {
        self.domain[x].as_ref().is_none_or(|d| d[v])
    }

    fn set(&self, st: &mut State, x: usize, v: usize) -> bool {
        if !self.allowed(x, v) || (self.injective && st.used[v] > 0) {
            return false;
        }
        st.image[x] = v;
        st.used[v] += 1;
        st.computed.push(x);
        true
    }

    fn unset_to(&self, st: &mut State, mark: usize) {
        while st.computed.len() > mark {
            let x = st.computed.pop().unwrap();
            st.used[st.image[x]] -= 1;
            st.image[x] = UNSET;
        }
    }

    fn literal_image(&self, st: &State, (k, negated): (usize, bool)) -> usize {
        let v = st.image[self.gens[k]];
        if negated {
            self.tgt.neg(v).expect("Finf target has negation")
        } else {
            v
        }
    }

    /// Assigns generator `k` to `v`, extends to the newly determined
    /// elements, and checks every relation among determined elements that
    /// involves a new one.
    fn assign(&self, st: &mut State, k: usize, v: usize) -> bool {
        let mark = st.computed.len();
        let g = self.gens[k];
        if !self.set(st, g, v) {
            return false;
        }
        if let Some(ng) = self.gen_negs[k] {
            let nv = self.tgt.neg(v).expect("Finf target has negation");
            if ng != g && !self.set(st, ng, nv) {
                return false;
            }
        }
        for &x in &self.ready[k] {
            if st.image[x] != UNSET {
                continue;
            }
            let img = self.decomp[x]
                .iter()
                .map(|&lit| self.literal_image(st, lit))
                .reduce(|a, b| self.tgt.add(a, b))
                .expect("nonempty decomposition");
            if !self.set(st, x, img) {
                return false;
            }
        }
        for i in mark..st.computed.len() {
            let x = st.computed[i];
            let fx = st.image[x];
            for j in 0..st.computed.len() {
                let y = st.computed[j];
                let s = self.src.add(x, y);
                if st.image[s] != UNSET && st.image[s] != self.tgt.add(fx, st.image[y]) {
                    return false;
                }
            }
            for &(a, b) in &self.sum_pairs[x] {
                let (fa, fb) = (st.image[a], st.image[b]);
                if fa != UNSET && fb != UNSET && self.tgt.add(fa, fb) != fx {
                    return false;
                }
            }
            if let Some(nx) = self.src.neg(x) {
                let fnx = st.image[nx];
                if fnx != UNSET && fnx != self.tgt.neg(fx).unwrap() {
                    return false;
                }
            }
        }
        true
    }

    fn candidates(&self, k: usize) -> Vec<usize> {
        let g = self.gens[k];
        self.tgt
            .elements()
            .filter(|&v| self.allowed(g, v))
            .filter(|&v| match self.gen_negs[k] {
                Some(ng) => self.allowed(ng, self.tgt.neg(v).unwrap()),
                None => true,
            })
            .collect()
    }

    fn verify_leaf(&self, st: &State) -> bool {
        st.image.iter().all(|&v| v != UNSET)
            && self.constraints.admits(&st.image)
            && hom_violation(self.src, self.tgt, &st.image).is_none()
    }

    /// Depth-first search from generator `k`. The visitor returns `true` to stop.
    fn dfs(
        &self,
        st: &mut State,
        k: usize,
        cands: &[Vec<usize>],
        budget: &Budget,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        if !budget.tick() {
            return Err(Error::BudgetExceeded(budget.limit));
        }
        if k == self.gens.len() {
            if self.verify_leaf(st) {
                return Ok(visit(&st.image));
            }
            return Ok(false);
        }
        for &v in &cands[k] {
            let mark = st.computed.len();
            if self.assign(st, k, v) && self.dfs(st, k + 1, cands, budget, visit)? {
                self.unset_to(st, mark);
                return Ok(true);
            }
            self.unset_to(st, mark);
        }
        Ok(false)
    }

    fn budget(&self, opts: SearchOptions) -> Budget {
        Budget { limit: opts.budget, spent: AtomicU64::new(0), aborted: AtomicBool::new(false) }
    }

    fn run_all(&self, opts: SearchOptions) -> Result<Vec<Vec<usize>>> {
        let budget = self.budget(opts);
        let cands: Vec<Vec<usize>> = (0..self.gens.len()).map(|k| self.candidates(k)).collect();
        let collect_from = |first: Option<usize>| -> Result<Vec<Vec<usize>>> {
            let mut out = Vec::new();
            let Some(mut st) = self.fresh_state() else {
                return Ok(out);
            };
            let mut push = |img: &[usize]| {
                out.push(img.to_vec());
                false
            };
            match first {
                None => {
                    self.dfs(&mut st, 0, &cands, &budget, &mut push)?;
                }
                Some(v) => {
                    if self.assign(&mut st, 0, v) {
                        self.dfs(&mut st, 1, &cands, &budget, &mut push)?;
                    }
                }
            }
            Ok(out)
        };
        if opts.parallel && !self.gens.is_empty() && cands[0].len() > 1 {
            if !budget.tick() {
                return Err(Error::BudgetExceeded(budget.limit));
            }
            let parts: Vec<Result<Vec<Vec<usize>>>> =
                cands[0].par_iter().map(|&v| collect_from(Some(v))).collect();
            let mut out = Vec::new();
            for p in parts {
                out.extend(p?);
            }
            Ok(out)
        } else {
            collect_from(None)
        }
    }

    fn run_first(&self, opts: SearchOptions) -> Result<Option<Vec<usize>>> {
        let budget = self.budget(opts);
        let cands: Vec<Vec<usize>> = (0..self.gens.len()).map(|k| self.candidates(k)).collect();
        let Some(mut st) = self.fresh_state() else {
            return Ok(None);
        };
        let mut found = None;
        self.dfs(&mut st, 0, &cands, &budget, &mut |img| {
            found = Some(img.to_vec());
            true
        })?;
        Ok(found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{boolean, chain, diamond_m3, finf, free_module, trivial, Congruence};

    fn arc(m: FinModule) -> Arc<FinModule> {
        Arc::new(m)
    }

    #[test]
    fn endomorphisms_of_b() {
        let b = arc(boolean());
        let homs = enumerate_homs(&b, &b, &HomConstraints::new(), SearchOptions::default()).unwrap();
        let maps: Vec<&[usize]> = homs.iter().map(|h| h.map()).collect();
        assert_eq!(maps, vec![&[0, 0][..], &[0, 1][..]]);
    }

    #[test]
    fn constant_zero_maps_are_homs() {
        let fb = free_module(Flavor::B, 2).unwrap().module;
        assert!(Hom::zero_map(fb.clone(), fb).unwrap().is_hom());
        let f1 = free_module(Flavor::Finf, 1).unwrap().module;
        assert!(Hom::zero_map(f1, arc(finf())).unwrap().is_hom());
    }

    #[test]
    fn flavor_mismatch_is_an_error() {
        let b = arc(boolean());
        let f = arc(finf());
        assert!(matches!(Hom::new(b.clone(), f.clone(), vec![0, 0]), Err(Error::FlavorMismatch(..))));
        assert!(matches!(
            enumerate_homs(&b, &f, &HomConstraints::new(), SearchOptions::default()),
            Err(Error::FlavorMismatch(..))
        ));
    }

    #[test]
    fn compose_rejects_mismatched_objects() {
        let b = arc(boolean());
        let c3 = arc(chain(3));
        let f = Hom::identity(b.clone());
        let g = Hom::identity(c3);
        assert!(matches!(compose(&g, &f), Err(Error::ObjectMismatch(_))));
    }

    #[test]
    fn identity_is_a_two_sided_unit() {
        let m = arc(diamond_m3());
        let homs = enumerate_homs(&m, &m, &HomConstraints::new(), SearchOptions::default()).unwrap();
        let id = Hom::identity(m);
        for f in &homs {
            assert_eq!(&compose(&id, f).unwrap(), f);
            assert_eq!(&compose(f, &id).unwrap(), f);
        }
    }

    #[test]
    fn conflicting_pins_give_no_homs() {
        let m = arc(chain(3));
        let c = HomConstraints::new().pin(1, 1).pin(1, 2);
        assert!(enumerate_homs(&m, &m, &c, SearchOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn fully_pinned_to_zero_gives_constant_zero() {
        let f1 = free_module(Flavor::Finf, 1).unwrap().module;
        let f2 = free_module(Flavor::Finf, 2).unwrap().module;
        let mut c = HomConstraints::new();
        for a in f2.elements() {
            c = c.pin(a, 0);
        }
        let homs = brute_force_homs(&f2, &f1, &c, DEFAULT_BUDGET).unwrap();
        assert_eq!(homs.len(), 1);
        assert!(homs[0].map().iter().all(|&v| v == 0));
        assert_eq!(enumerate_homs(&f2, &f1, &c, SearchOptions::default()).unwrap(), homs);
    }

    #[test]
    fn brute_force_budget_is_reported() {
        let m = arc(chain(9));
        assert!(matches!(
            brute_force_homs(&m, &m, &HomConstraints::new(), 1000),
            Err(Error::BudgetExceeded(1000))
        ));
    }

    #[test]
    fn search_budget_is_reported() {
        let m = free_module(Flavor::B, 4).unwrap().module;
        let r = enumerate_homs(&m, &m, &HomConstraints::new(), SearchOptions::with_budget(10));
        assert!(matches!(r, Err(Error::BudgetExceeded(10))));
    }

    #[test]
    fn chain_inclusion_into_m3_retracts() {
        // 0 < a < 1 inside M3 = {0, a, b, c, 1}: collapsing b, c onto 1 retracts it.
        let c3 = arc(chain(3));
        let m3 = arc(diamond_m3());
        let incl = Hom::new(c3, m3, vec![0, 1, 4]).unwrap();
        assert!(incl.is_hom() && incl.is_injective());
        let r = find_left_inverse(&incl, SearchOptions::default()).unwrap().unwrap();
        assert!(compose(&r, &incl).unwrap().is_identity());
    }

    #[test]
    fn m3_into_free_rank_three_does_not_split() {
        // a -> {1,2}, b -> {1,3}, c -> {2,3}
        let m3 = arc(diamond_m3());
        let f3 = free_module(Flavor::B, 3).unwrap().module;
        let f = Hom::new(m3.clone(), f3.clone(), vec![0, 0b011, 0b101, 0b110, 0b111]).unwrap();
        assert!(f.is_hom() && f.is_injective());
        assert_eq!(find_left_inverse(&f, SearchOptions::default()).unwrap(), None);
        let all = brute_force_homs(&f3, &m3, &HomConstraints::new(), DEFAULT_BUDGET).unwrap();
        assert!(!all.is_empty());
        assert!(all.iter().all(|w| !compose(w, &f).unwrap().is_identity()));
    }

    #[test]
    fn quotient_projection_is_a_surjective_hom() {
        let m = free_module(Flavor::B, 2).unwrap().module;
        let c = Congruence::generated(&m, &[(1, 3)]).unwrap();
        let (q, proj) = m.quotient(&c).unwrap();
        let p = Hom::new(m, arc(q), proj).unwrap();
        assert!(p.is_hom() && p.is_surjective());
        assert!(find_right_inverse(&p, SearchOptions::default()).unwrap().is_some());
    }

    #[test]
    fn trivial_target_has_only_zero_map() {
        for flavor in [Flavor::B, Flavor::Finf] {
            let t = arc(trivial(flavor));
            let x = free_module(flavor, 2).unwrap().module;
            let homs = enumerate_homs(&x, &t, &HomConstraints::new(), SearchOptions::default()).unwrap();
            assert_eq!(homs.len(), 1);
            assert!(!homs[0].is_injective());
        }
    }

    #[test]
    fn left_inverse_attachment_is_verified() {
        let b = arc(boolean());
        let c3 = arc(chain(3));
        let f = Hom::new(b.clone(), c3.clone(), vec![0, 2]).unwrap();
        let bad = Hom::new(c3.clone(), b.clone(), vec![0, 0, 0]).unwrap();
        assert!(f.clone().with_left_inverse(bad).is_err());
        let good = Hom::new(c3, b, vec![0, 0, 1]).unwrap();
        assert!(f.with_left_inverse(good).unwrap().left_inverse().is_some());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let m = arc(diamond_m3());
        let n = free_module(Flavor::B, 3).unwrap().module;
        let c = HomConstraints::new();
        let par = enumerate_homs(&m, &n, &c, SearchOptions::default()).unwrap();
        let seq =
            enumerate_homs(&m, &n, &c, SearchOptions { parallel: false, ..Default::default() }).unwrap();
        assert_eq!(par, seq);
    }
}
