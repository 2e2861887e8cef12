//! Matrices over `B` and `F_inf` as homs between free modules, the
//! distinct-rows factorization, and duals of free `B`-modules.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{compose, enumerate_homs, find_left_inverse, Hom, HomConstraints, SearchOptions};
use crate::module::{boolean, free_module, FinModule, Flavor, FreeElem, FreeModule, FreeSpace};

/// A `rows x cols` matrix. Column `j` is the image of generator `j`, so the
/// matrix describes a hom from the free module of rank `cols` to the free
/// module of rank `rows`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    flavor: Flavor,
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl Matrix {
    /// Builds a matrix from its rows. `cols` is only consulted when `rows`
    /// is empty.
    pub fn new(flavor: Flavor, rows: Vec<Vec<i8>>, cols: usize) -> Result<Self> {
        let width = rows.first().map_or(cols, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("rows of unequal length".into()));
        }
        let entries: Vec<i8> = rows.concat();
        if let Some(&bad) = entries.iter().find(|&&e| !allowed(flavor, e)) {
            return Err(Error::InvalidParameter(format!("entry {bad} not allowed over {flavor}")));
        }
        Ok(Matrix { flavor, rows: rows.len(), cols: width, entries })
    }

    pub fn from_fn(flavor: Flavor, rows: usize, cols: usize, f: impl Fn(usize, usize) -> i8) -> Result<Self> {
        let rows = (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect();
        Matrix::new(flavor, rows, cols)
    }

    pub fn identity(flavor: Flavor, n: usize) -> Self {
        Matrix::from_fn(flavor, n, n, |i, j| (i == j) as i8).expect("0/1 entries")
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<i8> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.flavor, self.cols, self.rows, |i, j| self.get(j, i)).expect("same entries")
    }

    fn target_space(&self) -> FreeSpace {
        FreeSpace::new(self.flavor, self.rows)
    }

    /// Image of a free element under the hom described by the matrix.
    pub fn apply(&self, x: &FreeElem) -> Result<FreeElem> {
        let space = self.target_space();
        let Some(v) = x.coeffs() else {
            return Ok(space.zero());
        };
        if v.len() != self.cols {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut acc = space.zero();
        let mut first = true;
        for (j, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let col = space.elem(self.column(j))?;
            let term = if c > 0 { col } else { space.neg(&col) };
            acc = if first { term } else { space.add(&acc, &term) };
            first = false;
        }
        Ok(acc)
    }

    /// The product `self * other`: the matrix of the composite hom. Over `B`
    /// this is the usual or/and product. Over `F_inf` a column of the product
    /// is the sum, in the free module, of the signed columns of `self`
    /// selected by the corresponding column of `other`; a sign clash or an
    /// all-zero summand makes the whole column zero.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch(self.flavor, other.flavor));
        }
        if self.cols != other.rows {
            return Err(Error::InvalidParameter(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let src = other.target_space();
        let mut columns = Vec::with_capacity(other.cols);
        for j in 0..other.cols {
            let x = src.elem(other.column(j))?;
            let y = self.apply(&x)?;
            columns.push(y.coeffs().map_or(vec![0; self.rows], <[i8]>::to_vec));
        }
        Matrix::from_fn(self.flavor, self.rows, other.cols, |i, j| columns[j][i])
    }

    /// Row indices grouped by equal content, groups in order of first
    /// occurrence.
    pub fn row_classes(&self) -> Vec<Vec<usize>> {
        let mut index: HashMap<&[i8], usize> = HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..self.rows {
            let k = *index.entry(self.row(i)).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[k].push(i);
        }
        classes
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|e| format!("{e:>2}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn allowed(flavor: Flavor, e: i8) -> bool {
    match flavor {
        Flavor::B => e == 0 || e == 1,
        Flavor::Finf => (-1..=1).contains(&e),
    }
}

/// The matrix of a hom between free modules.
pub fn matrix_of_hom(f: &Hom) -> Result<Matrix> {
    let src = FreeModule::from_module(f.source().clone())?;
    let tgt = FreeModule::from_module(f.target().clone())?;
    let columns: Vec<Vec<i8>> = src.generators.iter().map(|&g| tgt.decode(f.apply(g))).collect();
    Matrix::from_fn(src.flavor(), tgt.rank, src.rank, |i, j| columns[j][i])
}

/// The hom `free(cols) -> free(rows)` described by a matrix.
pub fn hom_of_matrix(a: &Matrix) -> Result<Hom> {
    let src = free_module(a.flavor, a.cols)?;
    let tgt = free_module(a.flavor, a.rows)?;
    hom_of_matrix_between(a, &src, &tgt)
}

fn hom_of_matrix_between(a: &Matrix, src: &FreeModule, tgt: &FreeModule) -> Result<Hom> {
    if src.rank != a.cols || tgt.rank != a.rows {
        return Err(Error::ObjectMismatch(format!(
            "{}x{} matrix between ranks {} and {}",
            a.rows, a.cols, src.rank, tgt.rank
        )));
    }
    let images = (0..a.cols).map(|j| tgt.encode(&a.column(j))).collect::<Result<Vec<_>>>()?;
    Hom::from_generator_images(src, tgt.module.clone(), &images)
}

/// `A = duplicator * reduced`, where `reduced` keeps the distinct rows of `A`
/// in order of first occurrence and `duplicator` is a 0/1 matrix with one 1
/// per row. The duplicator is a splittable injection; `certificate` is a
/// left inverse of it.
///
/// Over `F_inf` rows are deduplicated by exact equality; rows equal up to
/// sign stay distinct.
#[derive(Debug, Clone)]
pub struct RowFactorization {
    pub reduced: Matrix,
    pub duplicator: Matrix,
    /// Row `r` of `A` is row `class_of[r]` of `reduced`.
    pub class_of: Vec<usize>,
    /// The left inverse of the duplicator: picks the first row of each class.
    pub certificate: Matrix,
}

impl RowFactorization {
    /// Checks the product identity and `certificate * duplicator = I`.
    pub fn verify(&self, original: &Matrix) -> Result<bool> {
        let l = self.reduced.rows;
        Ok(self.duplicator.mul(&self.reduced)? == *original
            && self.certificate.mul(&self.duplicator)? == Matrix::identity(original.flavor, l))
    }

    /// The duplicator as a hom with its left inverse attached, checked as homs.
    pub fn duplicator_hom(&self) -> Result<Hom> {
        let d = hom_of_matrix(&self.duplicator)?;
        let w = hom_of_matrix_between(
            &self.certificate,
            &FreeModule::from_module(d.target().clone())?,
            &FreeModule::from_module(d.source().clone())?,
        )?;
        if !d.is_hom() || !w.is_hom() {
            return Err(Error::NotAHom("matrix hom failed verification".into()));
        }
        d.with_left_inverse(w)
    }
}

pub fn distinct_row_factorization(a: &Matrix) -> Result<RowFactorization> {
    let classes = a.row_classes();
    let l = classes.len();
    let mut class_of = vec![0; a.rows];
    for (k, class) in classes.iter().enumerate() {
        for &r in class {
            class_of[r] = k;
        }
    }
    let reduced = Matrix::new(a.flavor, classes.iter().map(|c| a.row(c[0]).to_vec()).collect(), a.cols)?;
    let duplicator = Matrix::from_fn(a.flavor, a.rows, l, |r, k| (class_of[r] == k) as i8)?;
    // Over B the certificate keeps the lowest row of each class and drops the
    // rest. Over F_inf dropping a row sends it to the absorbing zero, so each
    // row is sent back to its class instead (the transpose of the duplicator).
    let certificate = match a.flavor {
        Flavor::B => Matrix::from_fn(a.flavor, l, a.rows, |k, r| (classes[k][0] == r) as i8)?,
        Flavor::Finf => duplicator.transpose(),
    };
    Ok(RowFactorization { reduced, duplicator, class_of, certificate })
}

/// `Hom(B^n, B)` with pointwise addition. Functional `k` is the one whose
/// value on generator `i` is bit `i` of `k`, so IDs match `free_module(B, n)`.
#[derive(Debug, Clone)]
pub struct Dual {
    pub rank: usize,
    pub module: Arc<FinModule>,
    pub functionals: Vec<Hom>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl Dual {
    /// ID of a functional on the predual, given as a hom.
    pub fn id_of(&self, w: &Hom) -> Option<usize> {
        self.lookup.get(w.map()).copied()
    }
}

/// The dual of the free `B`-module of rank `n`, built by enumerating
/// functionals and certified free of rank `n` with the evaluation basis.
pub fn dualize_free(flavor: Flavor, n: usize, opts: SearchOptions) -> Result<Dual> {
    dualize(&free_module(flavor, n)?, opts)
}

/// Dual of a free module (given as a table module with a free basis).
pub fn dualize(m: &FreeModule, opts: SearchOptions) -> Result<Dual> {
    if m.flavor() != Flavor::B {
        return Err(Error::InvalidParameter(
            "duals are only free over B; over F_inf the evaluation functionals sum to zero".into(),
        ));
    }
    let scalars = Arc::new(boolean());
    let homs = enumerate_homs(&m.module, &scalars, &HomConstraints::new(), opts)?;
    let mut slots: Vec<Option<Hom>> = vec![None; 1 << m.rank];
    for w in homs {
        let mask = m.generators.iter().enumerate().fold(0, |acc, (i, &g)| acc | (w.apply(g) << i));
        slots[mask] = Some(w);
    }
    let functionals: Vec<Hom> = slots
        .into_iter()
        .enumerate()
        .map(|(k, w)| w.ok_or_else(|| Error::Structural(format!("no functional with coordinates {k:b}"))))
        .collect::<Result<_>>()?;
    let lookup: HashMap<Vec<usize>, usize> =
        functionals.iter().enumerate().map(|(k, w)| (w.map().to_vec(), k)).collect();
    let pointwise = |a: usize, b: usize| -> usize {
        let map: Vec<usize> = m
            .module
            .elements()
            .map(|x| scalars.add(functionals[a].apply(x), functionals[b].apply(x)))
            .collect();
        lookup[&map]
    };
    let names = (0..functionals.len()).map(|k| dual_name(k, m.rank)).collect();
    let zero = lookup[&vec![0; m.module.len()]];
    let module = FinModule::from_fn(Flavor::B, names, zero, pointwise, None)?.certify_free(m.rank)?;
    Ok(Dual { rank: m.rank, module: Arc::new(module), functionals, lookup })
}

fn dual_name(mask: usize, rank: usize) -> String {
    if mask == 0 {
        return "0".into();
    }
    (0..rank).filter(|i| mask >> i & 1 == 1).map(|i| format!("A{}*", i + 1)).collect::<Vec<_>>().join("+")
}

/// `f* : N* -> M*`, `w |-> w ∘ f`, for `f : M -> N` between free modules.
pub fn dualize_hom(f: &Hom, opts: SearchOptions) -> Result<(Dual, Dual, Hom)> {
    let m = FreeModule::from_module(f.source().clone())?;
    let n = FreeModule::from_module(f.target().clone())?;
    let dm = dualize(&m, opts)?;
    let dn = dualize(&n, opts)?;
    let star = dual_map(f, &dn, &dm)?;
    Ok((dm, dn, star))
}

fn dual_map(f: &Hom, dn: &Dual, dm: &Dual) -> Result<Hom> {
    let map = dn
        .functionals
        .iter()
        .map(|w| {
            let pulled = compose(w, f)?;
            dm.id_of(&pulled).ok_or_else(|| Error::Structural("pullback is not a functional".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Hom::new(dn.module.clone(), dm.module.clone(), map)
}

/// Factorization of the dual of a splittable injection `f : B^n -> B[S]*`.
///
/// With `f* : B[S]** -> (B^n)*` and `B[S] ≅ B[S]**` by evaluation, the
/// composite `B[S] -> (B^n)*` factors as `residual ∘ induced`, where
/// `induced : B[S] -> B[T]` comes from the surjection of `S` onto the set `T`
/// of distinct images of the basis.
#[derive(Debug, Clone)]
pub struct DualFactorization {
    /// `surjection[s]` is the element of `T` hit by `s`.
    pub surjection: Vec<usize>,
    pub t_size: usize,
    pub induced: Hom,
    pub residual: Hom,
    /// `f* ∘ ev` as a hom `B[S] -> (B^n)*`.
    pub composite: Hom,
}

impl DualFactorization {
    pub fn verify(&self) -> Result<bool> {
        let n = self.residual.target().free_rank().unwrap_or(0);
        Ok(compose(&self.residual, &self.induced)? == self.composite
            && self.induced.is_surjective()
            && (n >= usize::BITS as usize || self.t_size <= 1 << n))
    }
}

pub fn dual_factorization(f: &Hom, opts: SearchOptions) -> Result<DualFactorization> {
    if f.source().flavor() != Flavor::B {
        return Err(Error::InvalidParameter("dual factorization is defined over B".into()));
    }
    if !f.is_hom() {
        return Err(Error::NotAHom("input map".into()));
    }
    if !f.is_injective() {
        return Err(Error::NotSplittable("map is not injective".into()));
    }
    if f.left_inverse().is_none() && find_left_inverse(f, opts)?.is_none() {
        return Err(Error::NotSplittable("no left inverse exists".into()));
    }
    // dn is B[S]**, dm is (B^n)*. The target of f is B[S]*, its element with
    // mask k being the functional on B[S] reading off the bits of k.
    let (dm, dn, star) = dualize_hom(f, opts)?;
    let bs = free_module(Flavor::B, dn.rank)?;
    let ev_images: Vec<usize> = (0..bs.rank)
        .map(|s| {
            let map: Vec<usize> = f.target().elements().map(|k| (k >> s) & 1).collect();
            dn.lookup
                .get(&map)
                .copied()
                .ok_or_else(|| Error::Structural("evaluation is not a functional".into()))
        })
        .collect::<Result<_>>()?;
    let ev = Hom::from_generator_images(&bs, dn.module.clone(), &ev_images)?;
    let composite = compose(&star, &ev)?;

    let basis_images: Vec<usize> = bs.generators.iter().map(|&g| composite.apply(g)).collect();
    let mut t_of_image: HashMap<usize, usize> = HashMap::new();
    let mut reps = Vec::new();
    let surjection: Vec<usize> = basis_images
        .iter()
        .map(|&img| {
            *t_of_image.entry(img).or_insert_with(|| {
                reps.push(img);
                reps.len() - 1
            })
        })
        .collect();
    let t = free_module(Flavor::B, reps.len())?;
    let induced_images: Vec<usize> = surjection.iter().map(|&k| t.generators[k]).collect();
    let induced = Hom::from_generator_images(&bs, t.module.clone(), &induced_images)?;
    let residual = Hom::from_generator_images(&t, dm.module.clone(), &reps)?;
    let out = DualFactorization { surjection, t_size: reps.len(), induced, residual, composite };
    if !out.verify()? {
        return Err(Error::Structural("dual factorization failed verification".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(rows: Vec<Vec<i8>>) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        Matrix::new(Flavor::B, rows, cols).unwrap()
    }

    #[test]
    fn example_factorization() {
        let a = b(vec![vec![1, 1], vec![1, 1], vec![0, 1]]);
        let fact = distinct_row_factorization(&a).unwrap();
        assert_eq!(fact.reduced, b(vec![vec![1, 1], vec![0, 1]]));
        assert_eq!(fact.duplicator, b(vec![vec![1, 0], vec![1, 0], vec![0, 1]]));
        assert!(fact.verify(&a).unwrap());
        let d = fact.duplicator_hom().unwrap();
        assert!(d.is_injective());
        assert!(d.left_inverse().is_some());
    }

    #[test]
    fn finf_factorization_certificate() {
        let a = Matrix::new(Flavor::Finf, vec![vec![1, -1], vec![1, -1], vec![-1, 1]], 2).unwrap();
        let fact = distinct_row_factorization(&a).unwrap();
        assert_eq!(fact.reduced.rows(), 2);
        assert!(fact.verify(&a).unwrap());
        assert!(fact.duplicator_hom().unwrap().left_inverse().is_some());

        // Dropping rows is not a left inverse over F_inf.
        let drop = Matrix::new(Flavor::Finf, vec![vec![1, 0, 0], vec![0, 0, 1]], 3).unwrap();
        assert_ne!(drop.mul(&fact.duplicator).unwrap(), Matrix::identity(Flavor::Finf, 2));
    }

    #[test]
    fn matrix_hom_roundtrip() {
        let a = b(vec![vec![1, 0, 1], vec![0, 1, 1]]);
        let f = hom_of_matrix(&a).unwrap();
        assert!(f.is_hom());
        assert_eq!(matrix_of_hom(&f).unwrap(), a);

        let m = Matrix::new(Flavor::Finf, vec![vec![1, -1], vec![0, 1]], 2).unwrap();
        let f = hom_of_matrix(&m).unwrap();
        assert!(f.is_hom());
        assert_eq!(matrix_of_hom(&f).unwrap(), m);
    }

    #[test]
    fn product_matches_composition() {
        for (flavor, x, y) in [
            (Flavor::B, vec![vec![1, 0], vec![1, 1], vec![0, 1]], vec![vec![0, 1, 1], vec![1, 0, 1]]),
            (Flavor::Finf, vec![vec![1, 0], vec![-1, 1], vec![0, 1]], vec![vec![0, 1, -1], vec![1, 1, 0]]),
        ] {
            let x = Matrix::new(flavor, x, 0).unwrap();
            let y = Matrix::new(flavor, y, 0).unwrap();
            let (fx, fy) = (hom_of_matrix(&x).unwrap(), hom_of_matrix(&y).unwrap());
            let composite = compose(&fx, &fy).unwrap();
            assert_eq!(matrix_of_hom(&composite).unwrap(), x.mul(&y).unwrap(), "{flavor}");
        }
    }

    #[test]
    fn finf_product_collapses_on_clash() {
        let a = Matrix::new(Flavor::Finf, vec![vec![1, -1]], 2).unwrap();
        let x = Matrix::new(Flavor::Finf, vec![vec![1], vec![1]], 1).unwrap();
        assert_eq!(a.mul(&x).unwrap().to_rows(), vec![vec![0]]);
    }

    #[test]
    fn dual_is_free_and_transposes() {
        let d = dualize_free(Flavor::B, 3, SearchOptions::default()).unwrap();
        assert_eq!(d.module.len(), 8);
        assert_eq!(d.module.free_rank(), Some(3));

        let a = b(vec![vec![1, 0, 1], vec![0, 1, 1]]);
        let f = hom_of_matrix(&a).unwrap();
        let (_, _, star) = dualize_hom(&f, SearchOptions::default()).unwrap();
        assert_eq!(matrix_of_hom(&star).unwrap(), a.transpose());
        let (_, _, star2) = dualize_hom(&star, SearchOptions::default()).unwrap();
        assert_eq!(matrix_of_hom(&star2).unwrap(), a);
    }

    #[test]
    fn finf_duals_rejected() {
        assert!(dualize_free(Flavor::Finf, 2, SearchOptions::default()).is_err());
    }

    #[test]
    fn dual_factorization_of_duplicator() {
        let a = b(vec![vec![1, 0], vec![1, 0], vec![0, 1]]);
        let f = hom_of_matrix(&a).unwrap();
        let df = dual_factorization(&f, SearchOptions::default()).unwrap();
        assert!(df.verify().unwrap());
        assert_eq!(df.surjection, vec![0, 0, 1]);
        assert_eq!(df.t_size, 2);
    }

    #[test]
    fn dual_factorization_needs_split() {
        let a = b(vec![vec![1, 1]]);
        let f = hom_of_matrix(&a).unwrap();
        assert!(matches!(dual_factorization(&f, SearchOptions::default()), Err(Error::NotSplittable(_))));
    }
}
