use std::f64::consts::PI;

use ness_core::lax::Model;
use ness_core::liouvillian::{embed, fixed_point};
use ness_core::observables::{
    current_at_bond, current_reduced, density_profile, log_partition_fn, magnetization_profile, partition_fn,
    transition, transition_reduced, vacuum_power_full, vacuum_proportionality, VertexOp,
};
use ness_core::sparse::SparseMat;
use ness_core::verify::{sun_solution, xxz_solution};
use ness_core::C64;

#[test]
fn sun_current_vertex_is_proportional_to_transfer_on_vacua() {
    for n_phys in [2usize, 3, 4] {
        for gam in [0.5, 1.0, 2.0] {
            let (lax, _, _) = sun_solution(n_phys, gam, 4).unwrap();
            let t = transition_reduced(&lax);
            let last = n_phys - 1;
            let m = (last * last) as f64;
            let mut left_sum: Option<VertexOp> = None;
            for k in 0..last {
                let j = current_reduced(&lax, last, k).unwrap();
                let (c, res) = vacuum_proportionality(j.reduced(), t.reduced(), false);
                assert!(res < 1e-12, "N={n_phys} k={k}: {res}");
                assert!((c - C64::new(-8.0 / (m * gam), 0.0)).norm() < 1e-12, "N={n_phys} k={k}: {c}");
                left_sum = Some(match left_sum {
                    None => j,
                    Some(acc) => acc.add(&j, C64::new(1.0, 0.0)),
                });
            }
            let j = left_sum.unwrap();
            let (c, res) = vacuum_proportionality(j.reduced(), t.reduced(), true);
            assert!(res < 1e-12);
            assert!((c - C64::new(-8.0 / (last as f64 * gam), 0.0)).norm() < 1e-12, "N={n_phys}: {c}");
        }
    }
}

#[test]
fn reduced_and_full_transfer_agree() {
    for g in [0.0, 0.4] {
        let (lax, _, _) = xxz_solution(g, 1.0, 7).unwrap();
        for n in 0..=5 {
            let full = vacuum_power_full(&transition(&lax), n).unwrap();
            let z = partition_fn(&lax, n).unwrap();
            assert!((full - z).norm() <= 1e-12 * z.norm().max(1.0));
        }
    }
}

#[test]
fn profile_matches_oracle() {
    for g in [0.0, 0.3, PI / 3.0] {
        for n in 2..=5 {
            let (lax, _, drive) = xxz_solution(g, 1.0, n + 2).unwrap();
            let rho = fixed_point(Model::Xxz { gamma: g }, n, &drive).unwrap().rho.matrix;
            let sz = SparseMat::from_diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
            for (j, m) in magnetization_profile(&lax, n).unwrap().iter().enumerate() {
                let direct = (embed(&sz, 2, j, 1, n).to_dense() * &rho).trace();
                assert!((direct.re - m).abs() < 1e-8 && direct.im.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn long_chains_stay_finite_and_antisymmetric() {
    let (lax, _, _) = xxz_solution(0.0, 1.0, 258).unwrap();
    let prof = magnetization_profile(&lax, 256).unwrap();
    assert!(prof.iter().all(|m| m.is_finite() && m.abs() <= 1.0 + 1e-9));
    // the isotropic profile is odd about the centre
    for j in 0..128 {
        assert!((prof[j] + prof[255 - j]).abs() < 1e-8);
    }
    assert!(log_partition_fn(&lax, 256).unwrap().re.is_finite());
    let dens = density_profile(&lax, 256).unwrap();
    assert!(dens.iter().all(|p| (p[0] + p[1] - 1.0).norm() < 1e-9));
}

#[test]
fn current_is_bond_independent_for_su3() {
    let (lax, _, _) = sun_solution(3, 1.0, 7).unwrap();
    let n = 5;
    let first = current_at_bond(&lax, n, 0, 2, 0).unwrap();
    for b in 1..n - 1 {
        assert!((current_at_bond(&lax, n, b, 2, 0).unwrap() - first).norm() < 1e-10);
    }
}
