use semimod::hom::find_left_inverse;
use semimod::linear::{distinct_row_factorization, dual_factorization, dualize_free, dualize_hom, hom_of_matrix, matrix_of_hom, Matrix};
use semimod::module::FreeSpace;
use semimod::{Flavor, Hom, SearchOptions};

fn b(rows: Vec<Vec<i8>>) -> Matrix {
    let cols = rows.first().map_or(0, Vec::len);
    Matrix::new(Flavor::B, rows, cols).unwrap()
}

#[test]
fn identity_matrix_is_identity_hom() {
    for flavor in [Flavor::B, Flavor::Finf] {
        let f = hom_of_matrix(&Matrix::identity(flavor, 3)).unwrap();
        assert!(f.is_identity());
        assert_eq!(matrix_of_hom(&Hom::identity(f.source().clone())).unwrap(), Matrix::identity(flavor, 3));
    }
}

#[test]
fn column_of_ones_hits_the_full_subset() {
    let a = b(vec![vec![1], vec![1]]);
    let f = hom_of_matrix(&a).unwrap();
    assert_eq!(f.target().name(f.apply(1)), "A1+A2");
    let space = FreeSpace::new(Flavor::B, 1);
    assert_eq!(a.apply(&space.generator(0)).unwrap().coeffs(), Some(&[1i8, 1][..]));
}

#[test]
fn distinct_rows_keep_the_matrix() {
    let a = b(vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
    let fact = distinct_row_factorization(&a).unwrap();
    assert_eq!(fact.reduced, a);
    assert_eq!(fact.duplicator, Matrix::identity(Flavor::B, 3));
}

#[test]
fn dual_of_b2_has_four_elements() {
    let d = dualize_free(Flavor::B, 2, SearchOptions::default()).unwrap();
    assert_eq!(d.module.len(), 4);
    assert_eq!(d.functionals.len(), 4);
}

#[test]
fn dual_of_identity_keeps_the_basis() {
    let id = hom_of_matrix(&Matrix::identity(Flavor::B, 3)).unwrap();
    let df = dual_factorization(&id, SearchOptions::default()).unwrap();
    assert_eq!(df.surjection, vec![0, 1, 2]);
    assert_eq!(df.t_size, 3);
    assert!(df.residual.is_injective() && df.residual.is_surjective());
}

#[test]
fn agreeing_basis_duals_collapse() {
    // B^1 -> B[{s,t}]*, A1 |-> e_s* + e_t*.
    let f = hom_of_matrix(&b(vec![vec![1], vec![1]])).unwrap();
    let df = dual_factorization(&f, SearchOptions::default()).unwrap();
    assert_eq!(df.t_size, 1);
    assert_eq!(df.surjection, vec![0, 0]);
}

#[test]
fn dual_of_split_injection_is_onto() {
    // Duplicators of several shapes.
    for rows in [vec![vec![1, 0], vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0], vec![0, 1], vec![1, 0]]] {
        let f = hom_of_matrix(&b(rows)).unwrap();
        assert!(find_left_inverse(&f, SearchOptions::default()).unwrap().is_some());
        let (_, _, star) = dualize_hom(&f, SearchOptions::default()).unwrap();
        assert!(star.is_surjective());
    }
}

#[test]
fn double_dual_matches() {
    let a = b(vec![vec![1, 1, 0], vec![0, 1, 1]]);
    let f = hom_of_matrix(&a).unwrap();
    let (_, _, star) = dualize_hom(&f, SearchOptions::default()).unwrap();
    let (_, _, star2) = dualize_hom(&star, SearchOptions::default()).unwrap();
    assert_eq!(matrix_of_hom(&star2).unwrap(), a);
}

#[test]
fn non_free_endpoints_are_rejected() {
    let c = std::sync::Arc::new(semimod::module::chain(3));
    assert!(matrix_of_hom(&Hom::identity(c.clone())).is_err());
    assert!(dualize_hom(&Hom::identity(c), SearchOptions::default()).is_err());
}
