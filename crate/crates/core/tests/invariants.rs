use nhse_core::characteristic::solve_hn;
use nhse_core::dense::{dense_eigenvalues, match_spectra};
use nhse_core::model::{build_hn_matrix, build_ssh_matrix, HnParams, Model, SshParams};
use nhse_core::ssh::solve_ssh_exact;
use nhse_core::winding::{critical_v0_for_energy, log_grid, pbc_winding};
use nhse_core::Complex64;
use proptest::prelude::*;

fn spread(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hn_exact_matches_dense(n in 3usize..24, g in -1.2f64..1.2, v0 in -60.0f64..60.0) {
        let p = HnParams::new(n, g, v0).unwrap();
        let exact: Vec<Complex64> = solve_hn(&p).unwrap().iter().map(|m| m.energy).collect();
        let dense = dense_eigenvalues(&build_hn_matrix(&p).unwrap()).unwrap();
        let d = match_spectra(&exact, &dense).unwrap().max_distance;
        prop_assert!(d < 1e-7 * spread(&dense), "distance {d}");
        let sum: Complex64 = exact.iter().sum();
        prop_assert!((sum - v0).norm() < 1e-8 * spread(&dense) * n as f64);
    }

    #[test]
    fn ssh_exact_matches_dense(n in 2usize..12, g in -1.0f64..1.0, tp in 0.3f64..2.5, v0 in -20.0f64..20.0) {
        let p = SshParams::new(n, g, tp, v0).unwrap();
        let modes = solve_ssh_exact(&p).unwrap();
        prop_assert_eq!(modes.len(), 2 * n);
        let exact: Vec<Complex64> = modes.iter().map(|m| m.energy).collect();
        let dense = dense_eigenvalues(&build_ssh_matrix(&p).unwrap()).unwrap();
        let d = match_spectra(&exact, &dense).unwrap().max_distance;
        prop_assert!(d < 1e-7 * spread(&dense), "distance {d}");
        let conj: Vec<Complex64> = exact.iter().map(|e| e.conj()).collect();
        prop_assert!(match_spectra(&exact, &conj).unwrap().max_distance < 1e-7 * spread(&dense));
    }

    #[test]
    fn hn_winding_at_band_centre_follows_g(n in 3usize..30, g in 0.05f64..1.5, flip in any::<bool>()) {
        let g = if flip { -g } else { g };
        let m = Model::Hn(HnParams::new(n, g, 0.0).unwrap());
        let w = pbc_winding(&m, Complex64::new(0.0, 0.0), 64).unwrap().winding;
        prop_assert_eq!(w, g.signum() as i64);
    }

    #[test]
    fn critical_impurity_puts_reference_on_spectrum(k in 0.2f64..2.9, shrink in 0.1f64..0.9) {
        // A point inside the PBC loop of N = 10, g = 0.5.
        let p = HnParams::new(10, 0.5, 0.0).unwrap();
        let er = 2.0 * shrink * Complex64::new(k, 0.5).cos();
        let model = Model::Hn(p);
        let vc = critical_v0_for_energy(&model, er).unwrap();
        let values = dense_eigenvalues(&model.set_v0(vc).matrix().unwrap()).unwrap();
        let d = values.iter().map(|z| (z - er).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(d < 1e-7 * vc.norm().max(1.0), "distance {d} at Vc {vc}");
    }

    #[test]
    fn log_grid_keeps_endpoints(a in -6.0f64..3.0, span in 0.1f64..8.0, count in 2usize..200) {
        let (lo, hi) = (10f64.powf(a), 10f64.powf(a + span));
        let grid = log_grid(lo, hi, count).unwrap();
        prop_assert_eq!(grid.len(), count);
        prop_assert_eq!(grid[0], lo);
        prop_assert_eq!(grid[count - 1], hi);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
