//! Finite representation categories: hom catalogs under a morphism class,
//! principal projectives, and the factorization checker behind
//! non-Noetherianity witnesses.
//!
//! Generation of `e_f` in a principal projective by the images of earlier
//! levels reduces to factorization of `f`, so no coefficient ring is ever
//! built.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{corner_embedding_between, Family};
use crate::hom::{compose, enumerate_homs, find_left_inverse, Hom, HomConstraints, SearchOptions};
use crate::module::{FinModule, Flavor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismClass {
    All,
    Injections,
    SplittableInjections,
}

impl fmt::Display for MorphismClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MorphismClass::All => "all",
            MorphismClass::Injections => "injections",
            MorphismClass::SplittableInjections => "splittable-injections",
        })
    }
}

impl std::str::FromStr for MorphismClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "all" | "homs" => Ok(MorphismClass::All),
            "injections" | "inj" => Ok(MorphismClass::Injections),
            "splittable-injections" | "split" | "splittable" => Ok(MorphismClass::SplittableInjections),
            _ => Err(Error::InvalidParameter(format!("unknown morphism class {s:?}"))),
        }
    }
}

type Catalog = Arc<OnceLock<Result<Arc<Vec<Hom>>>>>;

/// A full subcategory on finitely many modules, with morphisms restricted
/// to a class. Hom catalogs are computed on first use and cached.
#[derive(Debug)]
pub struct CategorySpec {
    flavor: Flavor,
    class: MorphismClass,
    names: Vec<String>,
    objects: Vec<Arc<FinModule>>,
    opts: SearchOptions,
    catalogs: Mutex<HashMap<(usize, usize), Catalog>>,
}

impl CategorySpec {
    pub fn new(flavor: Flavor, class: MorphismClass, opts: SearchOptions) -> Self {
        CategorySpec {
            flavor,
            class,
            names: Vec::new(),
            objects: Vec::new(),
            opts,
            catalogs: Mutex::new(HashMap::new()),
        }
    }

    /// Adds an object and returns its index.
    pub fn add_object(&mut self, name: impl Into<String>, m: Arc<FinModule>) -> Result<usize> {
        if m.flavor() != self.flavor {
            return Err(Error::FlavorMismatch(self.flavor, m.flavor()));
        }
        let name = name.into();
        if self.names.contains(&name) {
            return Err(Error::InvalidParameter(format!("duplicate object name {name:?}")));
        }
        self.names.push(name);
        self.objects.push(m);
        Ok(self.objects.len() - 1)
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn class(&self) -> MorphismClass {
        self.class
    }

    pub fn options(&self) -> SearchOptions {
        self.opts
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn object(&self, i: usize) -> &Arc<FinModule> {
        &self.objects[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.objects.len() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("object index {i} out of range")))
        }
    }

    /// `Hom(X, Y)` in the class, in lexicographic order. Splittable
    /// injections carry a verified left inverse.
    pub fn hom_catalog(&self, x: usize, y: usize) -> Result<Arc<Vec<Hom>>> {
        self.check_index(x)?;
        self.check_index(y)?;
        let cell = self.catalogs.lock().expect("catalog lock").entry((x, y)).or_default().clone();
        cell.get_or_init(|| self.compute_catalog(x, y).map(Arc::new)).clone()
    }

    fn compute_catalog(&self, x: usize, y: usize) -> Result<Vec<Hom>> {
        let (src, tgt) = (&self.objects[x], &self.objects[y]);
        let mut c = HomConstraints::new();
        if self.class != MorphismClass::All {
            c = c.injective();
        }
        let homs = enumerate_homs(src, tgt, &c, self.opts)?;
        match self.class {
            MorphismClass::SplittableInjections => {
                let mut out = Vec::new();
                for f in homs {
                    if let Some(w) = find_left_inverse(&f, self.opts)? {
                        out.push(f.with_left_inverse(w)?);
                    }
                }
                Ok(out)
            }
            _ => Ok(homs),
        }
    }

    /// Whether `f` belongs to the class. Attaches a certificate for
    /// splittable injections.
    pub fn classify(&self, f: &Hom) -> Result<Option<Hom>> {
        if !f.is_hom() {
            return Ok(None);
        }
        match self.class {
            MorphismClass::All => Ok(Some(f.clone())),
            MorphismClass::Injections => Ok(f.is_injective().then(|| f.clone())),
            MorphismClass::SplittableInjections => {
                if !f.is_injective() {
                    return Ok(None);
                }
                if f.left_inverse().is_some() {
                    return Ok(Some(f.clone()));
                }
                match find_left_inverse(f, self.opts)? {
                    Some(w) => Ok(Some(f.clone().with_left_inverse(w)?)),
                    None => Ok(None),
                }
            }
        }
    }

    /// Does `f : X0 -> Yi` factor as `q ∘ p` through `Yj`, with `p` and `q`
    /// in the class?
    ///
    /// Every `p : X0 -> Yj` in the class is tried; `q` is then searched with
    /// `q(p(x)) = f(x)` pinned. A budget overrun yields
    /// [`Factorization::Inconclusive`], never a negative answer.
    pub fn factors_through(&self, f: &Hom, yj: usize) -> Factorization {
        match self.try_factor(f, yj) {
            Ok(Some((p, q))) => Factorization::Factors { p, q },
            Ok(None) => Factorization::None,
            Err(Error::BudgetExceeded(b)) => Factorization::Inconclusive(format!("budget of {b} exceeded")),
            Err(e) => Factorization::Inconclusive(e.to_string()),
        }
    }

    fn try_factor(&self, f: &Hom, yj: usize) -> Result<Option<(Hom, Hom)>> {
        let x0 = self.locate(f.source())?;
        let target = f.target().clone();
        let mid = self.objects[yj].clone();
        for p in self.hom_catalog(x0, yj)?.iter() {
            let mut c = HomConstraints::new();
            for x in p.source().elements() {
                c = c.pin(p.apply(x), f.apply(x));
            }
            if self.class != MorphismClass::All {
                c = c.injective();
            }
            for q in enumerate_homs(&mid, &target, &c, self.opts)? {
                let Some(q) = self.classify(&q)? else { continue };
                let composite = compose(&q, p)?;
                if composite.map() != f.map() {
                    return Err(Error::Structural("factorization failed to re-verify".into()));
                }
                return Ok(Some((p.clone(), q)));
            }
        }
        Ok(None)
    }

    fn locate(&self, m: &Arc<FinModule>) -> Result<usize> {
        self.objects
            .iter()
            .position(|o| Arc::ptr_eq(o, m))
            .or_else(|| self.objects.iter().position(|o| **o == **m))
            .ok_or_else(|| Error::ObjectMismatch("module is not an object of the category".into()))
    }

    /// Ranks of `P_X(Y) = k[Hom(X, Y)]` for every object `Y`.
    pub fn principal_projective_profile(&self, x: usize) -> Result<Vec<(String, usize)>> {
        (0..self.len()).map(|y| Ok((self.names[y].clone(), self.hom_catalog(x, y)?.len()))).collect()
    }

    pub fn principal_projective(&self, x: usize) -> Result<PrincipalProjective<'_>> {
        self.check_index(x)?;
        Ok(PrincipalProjective { spec: self, base: x })
    }

    /// Checks that none of the `f_i : X0 -> Y_i` factors through an earlier
    /// `Y_j`. Levels are numbered from 1.
    pub fn witness_verify(&self, ys: &[usize], fs: &[Hom]) -> Result<WitnessReport> {
        if ys.len() != fs.len() {
            return Err(Error::InvalidParameter("one morphism per level is required".into()));
        }
        let mut levels = Vec::with_capacity(fs.len());
        for (i, (&yi, f)) in ys.iter().zip(fs).enumerate() {
            if *self.objects[yi] != **f.target() {
                return Err(Error::ObjectMismatch(format!("f_{} does not land in {}", i + 1, self.names[yi])));
            }
            if self.classify(f)?.is_none() {
                return Err(Error::InvalidParameter(format!("f_{} is not in class {}", i + 1, self.class)));
            }
            let checks = ys[..i].iter().enumerate().map(|(j, &yj)| (j + 1, self.factors_through(f, yj))).collect();
            levels.push(WitnessLevel { index: i + 1, object: self.names[yi].clone(), morphism: f.clone(), checks });
        }
        Ok(WitnessReport { levels })
    }
}

#[derive(Debug, Clone)]
pub enum Factorization {
    Factors { p: Hom, q: Hom },
    None,
    Inconclusive(String),
}

impl Factorization {
    pub fn factors(&self) -> bool {
        matches!(self, Factorization::Factors { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Factorization::Inconclusive(_))
    }
}

/// `Y |-> k[Hom(X, Y)]`, represented by its bases.
pub struct PrincipalProjective<'a> {
    spec: &'a CategorySpec,
    base: usize,
}

impl PrincipalProjective<'_> {
    pub fn basis(&self, y: usize) -> Result<Arc<Vec<Hom>>> {
        self.spec.hom_catalog(self.base, y)
    }

    /// The action of `g : Y -> Z` on the basis vector `e_f`: the index of
    /// `g ∘ f` in the basis of `P_X(Z)`. `None` if `g ∘ f` leaves the class.
    pub fn act(&self, g: &Hom, y: usize, z: usize, f_index: usize) -> Result<Option<usize>> {
        let basis_y = self.basis(y)?;
        let f = basis_y
            .get(f_index)
            .ok_or_else(|| Error::InvalidParameter(format!("no basis vector {f_index}")))?;
        let gf = compose(g, f)?;
        Ok(self.basis(z)?.iter().position(|h| h.map() == gf.map()))
    }
}

#[derive(Debug, Clone)]
pub struct WitnessLevel {
    pub index: usize,
    pub object: String,
    pub morphism: Hom,
    /// `(j, verdict)` for each earlier level `j`.
    pub checks: Vec<(usize, Factorization)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub levels: Vec<WitnessLevel>,
}

impl WitnessReport {
    /// `Fails` if some `f_i` factors; otherwise `Inconclusive` if some search
    /// ran out of budget; otherwise `Holds`.
    pub fn verdict(&self) -> WitnessVerdict {
        let all = || self.levels.iter().flat_map(|l| l.checks.iter().map(|(_, v)| v));
        if all().any(Factorization::factors) {
            WitnessVerdict::Fails
        } else if all().any(Factorization::is_inconclusive) {
            WitnessVerdict::Inconclusive
        } else {
            WitnessVerdict::Holds
        }
    }

    /// The verdict restricted to the first `n` levels.
    pub fn truncated(&self, n: usize) -> WitnessReport {
        WitnessReport { levels: self.levels.iter().take(n).cloned().collect() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<_> = self
            .levels
            .iter()
            .map(|l| {
                let checks: Vec<_> = l
                    .checks
                    .iter()
                    .map(|(j, v)| {
                        let (verdict, detail) = match v {
                            Factorization::Factors { p, q } => (
                                "factors",
                                serde_json::json!({ "p": p.map(), "q": q.map() }),
                            ),
                            Factorization::None => ("no-factorization", serde_json::Value::Null),
                            Factorization::Inconclusive(why) => ("inconclusive", serde_json::json!(why)),
                        };
                        serde_json::json!({ "through": j, "verdict": verdict, "detail": detail })
                    })
                    .collect();
                serde_json::json!({
                    "level": l.index,
                    "object": l.object,
                    "morphism": l.morphism.map(),
                    "checks": checks,
                })
            })
            .collect();
        serde_json::json!({ "verdict": self.verdict(), "levels": levels })
    }
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            writeln!(f, "level {} ({}):", l.index, l.object)?;
            if l.checks.is_empty() {
                writeln!(f, "  no earlier levels")?;
            }
            for (j, v) in &l.checks {
                let text = match v {
                    Factorization::Factors { .. } => "factors".to_string(),
                    Factorization::None => "no factorization".to_string(),
                    Factorization::Inconclusive(why) => format!("inconclusive ({why})"),
                };
                writeln!(f, "  through level {j}: {text}")?;
            }
        }
        let verdict = match self.verdict() {
            WitnessVerdict::Holds => format!("witness holds up to N = {}", self.levels.len()),
            WitnessVerdict::Fails => "witness fails".to_string(),
            WitnessVerdict::Inconclusive => "witness inconclusive".to_string(),
        };
        writeln!(f, "{verdict}")
    }
}

/// The standard witness family: `X0 = D0` (or `E0`), `Y_i = D_{i+3}` (or
/// `E_{i+3}`) for `i = 1..=max_n`, and `f_i` the corner embeddings. Extra
/// objects may be appended to the category without changing the family.
pub struct CornerWitness {
    pub spec: CategorySpec,
    pub x0: usize,
    pub ys: Vec<usize>,
    pub fs: Vec<Hom>,
}

pub fn corner_witness(flavor: Flavor, max_n: usize, class: MorphismClass, opts: SearchOptions) -> Result<CornerWitness> {
    corner_witness_with(flavor, max_n, class, opts, &[])
}

/// As [`corner_witness`], with additional family members as objects.
pub fn corner_witness_with(
    flavor: Flavor,
    max_n: usize,
    class: MorphismClass,
    opts: SearchOptions,
    extra: &[Family],
) -> Result<CornerWitness> {
    let (base, member): (Family, fn(usize) -> Family) = match flavor {
        Flavor::B => (Family::D0, Family::D),
        Flavor::Finf => (Family::E0, Family::E),
    };
    let mut spec = CategorySpec::new(flavor, class, opts);
    let small = base.build()?;
    let x0 = spec.add_object(base.name(), small.module.clone())?;
    let mut ys = Vec::new();
    let mut fs = Vec::new();
    for i in 1..=max_n {
        let fam = member(i + 3);
        let big = fam.build()?;
        ys.push(spec.add_object(fam.name(), big.module.clone())?);
        let f = corner_embedding_between(&small, &big)?;
        fs.push(Hom::new(spec.object(x0).clone(), spec.object(*ys.last().unwrap()).clone(), f.map().to_vec())?);
    }
    for fam in extra {
        let name = fam.name();
        if spec.index_of(&name).is_none() {
            let built = fam.build()?;
            spec.add_object(name, built.module.clone())?;
        }
    }
    Ok(CornerWitness { spec, x0, ys, fs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{boolean, chain, trivial};

    fn b_spec(class: MorphismClass, objects: Vec<FinModule>) -> CategorySpec {
        let mut spec = CategorySpec::new(Flavor::B, class, SearchOptions::default());
        for (i, m) in objects.into_iter().enumerate() {
            spec.add_object(format!("X{i}"), Arc::new(m)).unwrap();
        }
        spec
    }

    #[test]
    fn catalogs_by_class() {
        let spec = b_spec(MorphismClass::All, vec![chain(3), trivial(Flavor::B)]);
        assert_eq!(spec.hom_catalog(0, 1).unwrap().len(), 1);
        let inj = b_spec(MorphismClass::Injections, vec![chain(3), trivial(Flavor::B)]);
        assert!(inj.hom_catalog(0, 1).unwrap().is_empty());
        assert_eq!(inj.hom_catalog(1, 1).unwrap().len(), 1);
    }

    #[test]
    fn identity_factors_through_itself() {
        let spec = b_spec(MorphismClass::Injections, vec![chain(3)]);
        let id = Hom::identity(spec.object(0).clone());
        let v = spec.factors_through(&id, 0);
        let Factorization::Factors { p, q } = v else { panic!("identity must factor") };
        assert_eq!(compose(&q, &p).unwrap(), id);
    }

    #[test]
    fn splittable_catalog_has_certificates() {
        let spec = b_spec(MorphismClass::SplittableInjections, vec![boolean(), chain(3)]);
        let cat = spec.hom_catalog(0, 1).unwrap();
        assert!(!cat.is_empty());
        for f in cat.iter() {
            let w = f.left_inverse().unwrap();
            assert!(compose(w, f).unwrap().is_identity());
        }
    }

    #[test]
    fn principal_projective_action() {
        let spec = b_spec(MorphismClass::All, vec![boolean(), chain(3)]);
        let p = spec.principal_projective(0).unwrap();
        let profile = spec.principal_projective_profile(0).unwrap();
        assert_eq!(profile, vec![("X0".to_string(), 2), ("X1".to_string(), 3)]);
        let id = Hom::identity(spec.object(1).clone());
        for k in 0..3 {
            assert_eq!(p.act(&id, 1, 1, k).unwrap(), Some(k));
        }
    }

    #[test]
    fn degenerate_family_fails() {
        let mut spec = CategorySpec::new(Flavor::B, MorphismClass::Injections, SearchOptions::default());
        let x = spec.add_object("X", Arc::new(boolean())).unwrap();
        let y = spec.add_object("Y", Arc::new(chain(3))).unwrap();
        let f = spec.hom_catalog(x, y).unwrap()[0].clone();
        let report = spec.witness_verify(&[y, y], &[f.clone(), f]).unwrap();
        assert_eq!(report.verdict(), WitnessVerdict::Fails);
        assert_eq!(report.truncated(1).verdict(), WitnessVerdict::Holds);
    }

    #[test]
    fn tiny_budget_is_inconclusive() {
        let w = corner_witness(Flavor::B, 2, MorphismClass::Injections, SearchOptions::with_budget(10)).unwrap();
        let report = w.spec.witness_verify(&w.ys, &w.fs).unwrap();
        assert_eq!(report.verdict(), WitnessVerdict::Inconclusive);
    }

    #[test]
    fn corner_witness_b() {
        let w = corner_witness(Flavor::B, 2, MorphismClass::Injections, SearchOptions::default()).unwrap();
        let report = w.spec.witness_verify(&w.ys, &w.fs).unwrap();
        assert_eq!(report.verdict(), WitnessVerdict::Holds, "{report}");
        eprintln!("{:?}", w.spec.principal_projective_profile(w.x0).unwrap());
    }
}
