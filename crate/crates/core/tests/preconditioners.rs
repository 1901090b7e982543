use std::collections::BTreeMap;

use bandenc::matcore::*;
use bandenc::precond::tpai::toeplitz_row_solve;
use bandenc::precond::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scaled_mesh(nx: usize, ny: usize) -> BandedMatrix {
    let a = generate_test_matrix(&MatrixSource::mesh_2d(nx, ny)).unwrap().matrix;
    diagonal_scale(&a).unwrap().0
}

#[test]
fn spai_rows_invert_a_on_their_pattern() {
    let a = scaled_mesh(8, 8);
    let ad = a.to_dense();
    for level in 0..3 {
        let pattern = RowPattern::graph_distance(&a, level + 1);
        let p = spai_infill(&a, level).unwrap();
        let pa = p.to_dense() * &ad;
        for j in 0..a.n() {
            for &c in pattern.row(j) {
                let want = if c == j { 1.0 } else { 0.0 };
                assert!((pa[(j, c)] - want).abs() < 1e-10, "level {level} row {j} col {c}");
            }
            for c in 0..a.n() {
                if !pattern.contains(j, c) {
                    assert_eq!(p.get(j, c), 0.0);
                }
            }
        }
    }
}

#[test]
fn spai_diagonal_counts_on_large_meshes() {
    for m in [16, 32] {
        let a = scaled_mesh(m, m);
        for i in 0..4usize {
            let p = spai_infill(&a, i).unwrap();
            let pa = banded_multiply(&p, &a).unwrap();
            let (nz, _) = drop_zero_diagonals(&pa, default_drop_tol(&pa));
            assert_eq!(p.num_diagonals(), 5 + 2 * i * (i + 3), "P, mesh {m} level {i}");
            assert_eq!(pa.num_diagonals(), 5 + 2 * (i + 1) * (i + 4), "PA, mesh {m} level {i}");
            assert_eq!(nz.num_diagonals(), 9 + 4 * i, "nonzero PA, mesh {m} level {i}");
        }
    }
}

#[test]
fn spai_reduces_frobenius_residual_with_infill() {
    let a = scaled_mesh(16, 16);
    let n = a.n();
    let mut last = f64::INFINITY;
    for i in 0..4 {
        let p = spai_infill(&a, i).unwrap();
        let r = BandedMatrix::identity(n)
            .add_scaled(-1.0, &banded_multiply(&p, &a).unwrap())
            .unwrap()
            .frobenius_norm();
        assert!(r < last, "level {i}: {r} >= {last}");
        last = r;
    }
}

#[test]
fn tpai_matches_closed_forms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let a: f64 = rng.random_range(-0.45..=0.45);
        let c: f64 = rng.random_range(-0.45..=0.45);
        let hat: BTreeMap<i64, f64> = [(1, a), (0, 1.0), (-1, c)].into();

        let tri = toeplitz_row_solve(&hat, &(-1..=1).collect()).unwrap();
        let want = tridiagonal_closed_form(a, 1.0, c);
        for (k, w) in [1, 0, -1].into_iter().zip(want) {
            assert!((tri[&k] - w).abs() < 1e-12);
        }

        let m = BandedMatrix::toeplitz(32, &hat).unwrap();
        let t = tpai(&m, 1).unwrap();
        let want = pentadiagonal_closed_form(a, 1.0, c);
        for (k, w) in [2, 1, 0, -1, -2].into_iter().zip(want) {
            assert!((t.coefficients[&k] - w).abs() < 1e-12, "a={a} c={c} k={k}");
        }
    }
}

#[test]
fn tpai_offsets_grow_by_two_per_level_and_side() {
    let a = scaled_mesh(16, 16);
    for (level, want) in [(0, 5), (1, 11), (2, 17), (3, 23)] {
        let t = tpai(&a, level).unwrap();
        assert_eq!(t.coefficients.len(), want);
        assert_eq!(t.p.num_diagonals(), want);
    }
}
