//! Reference implementations used only by tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use semimod::{FinModule, Flavor};

/// Syntax trees over `k` generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Zero,
    Gen(usize),
    Neg(Box<Term>),
    Sum(Box<Term>, Box<Term>),
}

/// Normal form of a term: `None` is the absorbing zero of `F_inf`;
/// otherwise the set of signed generators occurring in the flattened sum
/// (the empty set is the neutral zero of `B`).
pub type Normal = Option<BTreeSet<(usize, bool)>>;

/// Rewrites a term to normal form using only the module axioms:
/// associativity and commutativity flatten sums into sets, idempotence
/// removes repeats, negation is pushed to the leaves by distributivity and
/// involution, and for `F_inf` a zero summand or a pair `x, -x` (which sums
/// to zero) absorbs the whole sum. For `B` zero is neutral and dropped.
pub fn normalize(t: &Term, flavor: Flavor) -> Normal {
    fn go(t: &Term, negated: bool, flavor: Flavor, out: &mut BTreeSet<(usize, bool)>) -> bool {
        match t {
            Term::Zero => flavor == Flavor::B,
            Term::Gen(i) => {
                out.insert((*i, flavor == Flavor::Finf && negated));
                true
            }
            Term::Neg(inner) => go(inner, !negated, flavor, out),
            Term::Sum(a, b) => go(a, negated, flavor, out) && go(b, negated, flavor, out),
        }
    }
    let mut set = BTreeSet::new();
    if !go(t, false, flavor, &mut set) {
        return None;
    }
    if flavor == Flavor::Finf {
        if set.is_empty() {
            return None;
        }
        if set.iter().any(|&(i, s)| set.contains(&(i, !s))) {
            return None;
        }
    }
    Some(set)
}

/// The free module on `k` generators as the set of normal forms reachable
/// from the generators and zero by sums and negations, closed to a fixpoint.
pub struct TermAlgebra {
    pub flavor: Flavor,
    pub elements: Vec<Normal>,
    /// A representative term for each element.
    pub terms: Vec<Term>,
    index: HashMap<Normal, usize>,
}

impl TermAlgebra {
    pub fn closure(flavor: Flavor, k: usize) -> Self {
        let mut alg = TermAlgebra { flavor, elements: Vec::new(), terms: Vec::new(), index: HashMap::new() };
        alg.insert(Term::Zero);
        for i in 0..k {
            alg.insert(Term::Gen(i));
        }
        let mut done = 0;
        while done < alg.terms.len() {
            let n = alg.terms.len();
            for a in 0..n {
                let b_start = if a < done { done } else { 0 };
                for b in b_start..n {
                    let t = Term::Sum(Box::new(alg.terms[a].clone()), Box::new(alg.terms[b].clone()));
                    alg.insert(t);
                }
                if flavor == Flavor::Finf {
                    alg.insert(Term::Neg(Box::new(alg.terms[a].clone())));
                }
            }
            done = n;
        }
        alg
    }

    fn insert(&mut self, t: Term) {
        let nf = normalize(&t, self.flavor);
        if !self.index.contains_key(&nf) {
            self.index.insert(nf.clone(), self.elements.len());
            self.elements.push(nf);
            self.terms.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let t = Term::Sum(Box::new(self.terms[a].clone()), Box::new(self.terms[b].clone()));
        self.index[&normalize(&t, self.flavor)]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.index[&normalize(&Term::Neg(Box::new(self.terms[a].clone())), self.flavor)]
    }
}

/// Evaluates a term in a module, generator `i` going to `images[i]`.
pub fn eval(t: &Term, m: &FinModule, images: &[usize]) -> usize {
    match t {
        Term::Zero => m.zero(),
        Term::Gen(i) => images[*i],
        Term::Neg(a) => m.neg(eval(a, m, images)).expect("negation"),
        Term::Sum(a, b) => m.add(eval(a, m, images), eval(b, m, images)),
    }
}

/// Checks that evaluation `TermAlgebra -> m` is a bijective hom.
pub fn term_algebra_matches(alg: &TermAlgebra, m: &FinModule, images: &[usize]) -> Result<(), String> {
    if alg.len() != m.len() {
        return Err(format!("term algebra has {} elements, module {}", alg.len(), m.len()));
    }
    let phi: Vec<usize> = alg.terms.iter().map(|t| eval(t, m, images)).collect();
    let distinct: BTreeSet<usize> = phi.iter().copied().collect();
    if distinct.len() != m.len() {
        return Err("evaluation is not injective".into());
    }
    for a in 0..alg.len() {
        for b in 0..alg.len() {
            if phi[alg.add(a, b)] != m.add(phi[a], phi[b]) {
                return Err(format!("sum of {:?} and {:?} not preserved", alg.terms[a], alg.terms[b]));
            }
        }
        if alg.flavor == Flavor::Finf && phi[alg.neg(a)] != m.neg(phi[a]).unwrap() {
            return Err(format!("negation of {:?} not preserved", alg.terms[a]));
        }
    }
    Ok(())
}

/// Or/and product of 0/1 matrices given as rows.
pub fn boolean_product(a: &[Vec<i8>], b: &[Vec<i8>]) -> Vec<Vec<i8>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| row.iter().zip(b).any(|(&x, brow)| x == 1 && brow[j] == 1) as i8).collect())
        .collect()
}

/// Number of distinct rows.
pub fn distinct_rows(a: &[Vec<i8>]) -> usize {
    a.iter().collect::<BTreeSet<_>>().len()
}
