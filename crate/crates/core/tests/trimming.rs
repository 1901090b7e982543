use bandenc::bencode::*;
use bandenc::emu::*;
use bandenc::matcore::*;
use bandenc::precond::*;
use bandenc::trim::*;

fn spai_product(m: usize, level: usize) -> (BandedMatrix, Vec<f64>) {
    let raw = generate_test_matrix(&MatrixSource::mesh_2d(m, m)).unwrap().matrix;
    let (a, d) = diagonal_scale(&raw).unwrap();
    let p = spai_infill(&a, level).unwrap();
    let pa = banded_multiply(&p, &a).unwrap();
    let (pa, _) = drop_zero_diagonals(&pa, default_drop_tol(&pa));
    let dinv_ones: Vec<f64> = d.main_diagonal().iter().map(|v| 1.0 / v).collect();
    let b = p.mul_vec(&dinv_ones);
    (pa, b)
}

#[test]
fn collapsed_circuits_emulate_identically() {
    let (pa, _) = spai_product(8, 1);
    for f in [0.0, 0.02, 0.16] {
        let filtered = filter_matrix(&pa, f);
        let plain = encode_banded(&filtered).unwrap();
        let mut trimmed = plain.clone();
        trimmed.circuit = collapse_rotations(&plain.circuit);
        assert!(trimmed.summary().rotations < plain.summary().rotations);
        let b0 = extract_block(&plain).unwrap();
        let b1 = extract_block(&trimmed).unwrap();
        let diff = (&b0 - &b1).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12, "f={f}: {diff}");
        let rep = verify_encoding(&trimmed, &filtered.to_dense(), 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}

#[test]
fn counts_shrink_as_bins_widen() {
    let (pa, b) = spai_product(16, 3);
    let mut last: Option<TrimStats> = None;
    for f in DEFAULT_F_GRID {
        let t = trim_encoding(&pa, f).unwrap();
        let s = trimming_metrics(&pa, &t.filtered, &b, &t.before.circuit, &t.after.circuit, f).unwrap();
        assert!(s.unique_angles_after <= s.unique_angles_before);
        assert!(s.rotations_after <= s.rotations_before);
        if let Some(p) = last {
            assert!(s.unique_angles_after <= p.unique_angles_after, "f={f}");
            assert!(s.rotations_after <= p.rotations_after, "f={f}");
        }
        last = Some(s);
    }
}

#[test]
fn bins_pass_audit_on_mesh_diagonals() {
    let (pa, _) = spai_product(16, 2);
    for f in DEFAULT_F_GRID {
        let (filtered, bins) = filter_matrix_with_bins(&pa, f);
        for (k, list) in &bins {
            let values = pa.diagonal(*k).unwrap();
            let mut seen = vec![false; values.len()];
            for b in list {
                let mean = b.mean(values).abs();
                assert!(b.hi - b.lo <= f * mean + 1e-15);
                for &i in &b.members {
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
            for w in list.windows(2) {
                assert!(w[0].hi < w[1].lo);
            }
            for (v, w) in values.iter().zip(filtered.diagonal(*k).unwrap()) {
                assert_eq!(v.partial_cmp(&0.0), w.partial_cmp(&0.0));
            }
        }
    }
}
