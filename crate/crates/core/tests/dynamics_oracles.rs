mod common;

use common::*;
use dissnet::darkstate::{aleph_state, max_concurrence_formula};
use dissnet::dynamics::{
    build_liouvillian, evolve, evolve_with, steady_state, EvolveOptions, SteadyMethod, SteadyOptions,
};
use dissnet::hilbert::{hermitian_eigenvalues, PureState};
use dissnet::max_abs;
use dissnet::optimizer::{maximize_stationary_concurrence, OptimizerOptions};
use dissnet::topology::NetworkGraph;
use dissnet::Operator;
use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;

fn test_graphs() -> Vec<NetworkGraph> {
    let mut r = rng(1);
    let mut out = vec![chain(3), ring(4), ring(3), named(dissnet::topology::NamedTopology::Star, 4)];
    // arbitrary couplings, rates and onsite energies
    let edges = [(0, 1, 0.7, 0.3), (1, 2, -1.2, 1.5), (2, 3, 0.4, 0.9), (0, 3, 1.1, 0.2)];
    let omega = (0..4).map(|_| r.random_range(-2.0..2.0)).collect();
    out.push(NetworkGraph::new(4, &edges, omega).unwrap());
    out
}

#[test]
fn generator_matches_reference_model() {
    let mut r = rng(2);
    for g in test_graphs() {
        for cap in 1..=g.n() {
            let b = basis(g.n(), cap);
            let spec = build_liouvillian(&g, b.clone()).unwrap();
            let (h, jumps) = reference_model(&g, &b);
            assert!(max_abs((spec.hamiltonian() - &h).iter()) < 1e-14);
            for _ in 0..5 {
                let x = random_matrix(b.dim(), &mut r);
                let diff = spec.apply_raw(&x) - reference_generator(&h, &jumps, &x);
                assert!(max_abs(diff.iter()) < 1e-12);
            }
        }
    }
}

#[test]
fn truncated_and_full_evolution_agree() {
    let mut r = rng(3);
    for g in test_graphs() {
        let small = basis(g.n(), 1);
        let full = basis(g.n(), g.n());
        let psi = random_pure(&small, 1, &mut r);
        let opts = EvolveOptions { dt: Some(0.002), ..Default::default() };
        let a = evolve_with(&build_liouvillian(&g, small.clone()).unwrap(), &psi.to_density(), 3.0, &opts, |_, _| {})
            .unwrap();
        let rho_full = psi.embed(&full).unwrap().to_density();
        let b = evolve_with(&build_liouvillian(&g, full.clone()).unwrap(), &rho_full, 3.0, &opts, |_, _| {}).unwrap();
        assert!(a.embed(&full).unwrap().trace_distance(&b).unwrap() < 1e-12);
    }
}

#[test]
fn excitation_number_never_increases() {
    let mut r = rng(4);
    for g in test_graphs() {
        let b = basis(g.n(), g.n());
        let spec = build_liouvillian(&g, b.clone()).unwrap();
        let rho = random_density(&b, g.n(), &mut r);
        let traj = evolve(&spec, &rho, 4.0, &EvolveOptions { record_every: 10, ..Default::default() }).unwrap();
        for (x, y) in traj.states.iter().tuple_windows() {
            assert!(y.excitation_number() <= x.excitation_number() + 1e-12);
            assert!(y.min_eigenvalue() > -1e-9);
            assert!((y.trace() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn kernel_and_long_time_steady_states_agree() {
    let mut r = rng(5);
    for g in [chain(2), chain(3), ring(3), ring(4), named(dissnet::topology::NamedTopology::Star, 4)] {
        for cap in [1, 2] {
            let b = basis(g.n(), cap);
            let spec = build_liouvillian(&g, b.clone()).unwrap();
            let rho = random_density(&b, cap, &mut r);
            let k = steady_state(&spec, &rho, &SteadyOptions::with_method(SteadyMethod::KernelProjection)).unwrap();
            let l = steady_state(&spec, &rho, &SteadyOptions::with_method(SteadyMethod::LongTime)).unwrap();
            let d = k.trace_distance(&l).unwrap();
            assert!(d < 1e-6, "n={} cap={cap}: {d:e}", g.n());
        }
    }
}

/// Stationary `⟨ℵ|ρ|ℵ⟩` as a linear functional of the initial state, from
/// the Heisenberg picture: `X = lim e^{tL†}(|ℵ⟩⟨ℵ|)`.
fn stationary_aleph_observable(g: &NetworkGraph) -> (Operator, std::sync::Arc<dissnet::hilbert::ExcitationBasis>) {
    let b = basis(g.n(), g.n());
    let (h, jumps) = reference_model(g, &b);
    let a = aleph_state(g, &b).unwrap().to_density().into_matrix();
    let x1 = heisenberg_evolve(&h, &jumps, &a, 200.0, 0.04);
    let x2 = heisenberg_evolve(&h, &jumps, &x1, 50.0, 0.04);
    assert!(max_abs((&x1 - &x2).iter()) < 1e-10, "Heisenberg evolution not settled");
    (x2, b)
}

#[test]
fn single_excitation_bound_from_heisenberg_picture() {
    for n in [3usize, 4] {
        let g = chain(n);
        let (x, b) = stationary_aleph_observable(&g);
        for (n_exc, m) in (1..=n).flat_map(|ne| (ne..=n).map(move |m| (ne, m))) {
            let supports: Vec<Vec<usize>> = if n == 3 { (0..n).combinations(m).collect() } else { vec![(0..m).collect()] };
            for support in supports {
                let mask: u32 = support.iter().map(|&v| 1u32 << v).sum();
                let coords: Vec<usize> =
                    (0..b.dim()).filter(|&i| b.weight(i) <= n_exc && b.state(i) & !mask == 0).collect();
                let sub = DMatrix::from_fn(coords.len(), coords.len(), |i, j| x[(coords[i], coords[j])]);
                let top = *hermitian_eigenvalues(&sub).last().unwrap();
                let best_possible = 2.0 * top / n as f64;
                let formula = max_concurrence_formula(n, m).unwrap();
                assert!(
                    (best_possible - formula).abs() < 1e-8,
                    "n={n} N={n_exc} support={support:?}: {best_possible} vs {formula}"
                );
                if support.len() == m && support[0] == 0 {
                    let opts = OptimizerOptions { seed: 3, ..Default::default() };
                    let budget = if n_exc == 1 { 10_000 } else { 2000 };
                    let r = maximize_stationary_concurrence(&g, n_exc, &support, budget, &opts).unwrap();
                    assert!(r.best_value <= best_possible + 1e-6, "{} > {}", r.best_value, best_possible);
                    if n_exc == 1 {
                        assert!(r.best_value >= best_possible - 1e-4, "n={n} m={m}: {} < {best_possible} evals {}", r.best_value, r.evaluations);
                    }
                }
            }
        }
    }
}

#[test]
fn aleph_population_is_the_only_memory() {
    // the steady state depends on the initial state only through
    // ⟨0|ρ|0⟩-independent quantities p and the 0–ℵ coherence
    let g = chain(4);
    let b = basis(4, 2);
    let spec = build_liouvillian(&g, b.clone()).unwrap();
    let aleph = aleph_state(&g, &b).unwrap();
    let mut r = rng(6);
    for _ in 0..5 {
        let psi = random_pure(&b, 2, &mut r);
        let s = steady_state(&spec, &psi.to_density(), &SteadyOptions::default()).unwrap();
        let p = s.expectation(&aleph).unwrap();
        let vac = PureState::vacuum(b.clone());
        assert!((s.expectation(&vac).unwrap() + p - 1.0).abs() < 1e-10);
        assert!(s.population_above(1) < 1e-10);
    }
}
