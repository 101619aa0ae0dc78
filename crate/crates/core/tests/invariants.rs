use proptest::prelude::*;
use qaoa_mc_core::ising::magnetization;
use qaoa_mc_core::mcmc::random_configuration;
use qaoa_mc_core::rng::seeded;
use qaoa_mc_core::spectral::{
    absolute_spectral_gap, build_transition_matrix, symmetrize, verify_detailed_balance,
};
use qaoa_mc_core::{
    BoltzmannTarget, ChainState, PhaseTable, ProposalKernel, QaoaParameters, SpinConfiguration,
    SpinGlassInstance, Statevector,
};

fn angles(max_p: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_p).prop_flat_map(|p| {
        (
            prop::collection::vec(-3.2f64..3.2, p),
            prop::collection::vec(-3.2f64..3.2, p),
        )
    })
}

fn kernels(inst: &SpinGlassInstance, theta: f64, p: usize) -> Vec<ProposalKernel> {
    let n = inst.n();
    vec![
        ProposalKernel::local(n).unwrap(),
        ProposalKernel::uniform(n).unwrap(),
        ProposalKernel::qaoa(inst, QaoaParameters::single(p, theta).unwrap()).unwrap(),
    ]
}

/// `inst` with spin `j` renamed to `perm[j]`.
fn relabel(inst: &SpinGlassInstance, perm: &[usize]) -> SpinGlassInstance {
    let n = inst.n();
    let mut couplings = vec![0.0; n * (n - 1) / 2];
    for j in 1..n {
        for k in 0..j {
            let (a, b) = (perm[j].max(perm[k]), perm[j].min(perm[k]));
            couplings[a * (a - 1) / 2 + b] = inst.coupling(j, k);
        }
    }
    let mut fields = vec![0.0; n];
    for j in 0..n {
        fields[perm[j]] = inst.fields()[j];
    }
    SpinGlassInstance::new(n, couplings, fields, inst.seed()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn layers_preserve_norm(n in 1usize..=6, seed: u64, (betas, gammas) in angles(20), x: usize) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let table = PhaseTable::new(&inst).unwrap();
        let x = SpinConfiguration::new(x % (1 << n), n).unwrap();
        let mut state = Statevector::basis(n, x).unwrap();
        for (&b, &g) in betas.iter().zip(&gammas) {
            state.apply_mixer_layer(b);
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
            state.apply_problem_layer(g, &table).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
        let params = QaoaParameters::new(betas, gammas).unwrap();
        state.evolve_symmetric_qaoa(x, &params, &table).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circuit_q_is_symmetric_and_stochastic(n in 1usize..=5, seed: u64, (betas, gammas) in angles(6)) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let kernel = ProposalKernel::qaoa(&inst, QaoaParameters::new(betas, gammas).unwrap()).unwrap();
        let q = kernel.exact_q_matrix().unwrap();
        prop_assert!(q.asymmetry() <= 1e-10);
        prop_assert!(q.max_column_error() <= 1e-10);
        prop_assert!(q.columns().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn chains_are_reversible_with_bounded_spectrum(
        n in 2usize..=5,
        seed: u64,
        temperature in 0.05f64..20.0,
        theta in 0.01f64..3.0,
        p in 1usize..=6,
    ) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let target = BoltzmannTarget::new(inst.clone(), temperature).unwrap();
        let exact = target.enumerate().unwrap();
        for kernel in kernels(&inst, theta, p) {
            let q = kernel.exact_q_matrix().unwrap();
            let transition = build_transition_matrix(&exact, &q).unwrap();
            prop_assert!(transition.max_column_error() <= 1e-10);
            prop_assert!(verify_detailed_balance(&exact, &transition).unwrap() <= 1e-9);
            let s = symmetrize(&exact, &q).unwrap();
            prop_assert!(s.asymmetry() <= 1e-10);
            let eig = s.eigenvalues().unwrap();
            prop_assert!(eig.iter().all(|&v| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&v)));
            prop_assert!((eig.last().unwrap() - 1.0).abs() <= 1e-9);
            let delta = absolute_spectral_gap(&s).unwrap();
            prop_assert!((0.0..=1.0).contains(&delta));
        }
    }

    #[test]
    fn gap_is_invariant_under_spin_relabeling(
        seed: u64,
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
        theta in 0.01f64..1.0,
    ) {
        let inst = SpinGlassInstance::generate(4, seed).unwrap();
        let renamed = relabel(&inst, &perm);
        for (a, b) in kernels(&inst, theta, 3).iter().zip(kernels(&renamed, theta, 3).iter()) {
            let gap = |inst: &SpinGlassInstance, k: &ProposalKernel| {
                let exact = BoltzmannTarget::new(inst.clone(), 0.5).unwrap().enumerate().unwrap();
                absolute_spectral_gap(&symmetrize(&exact, &k.exact_q_matrix().unwrap()).unwrap()).unwrap()
            };
            prop_assert!((gap(&inst, a) - gap(&renamed, b)).abs() <= 1e-10);
        }
    }

    #[test]
    fn global_flip_without_fields(n in 1usize..=10, seed: u64) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let inst = SpinGlassInstance::new(n, inst.couplings().to_vec(), vec![0.0; n], seed).unwrap();
        let mask = (1usize << n) - 1;
        for z in 0..=mask {
            let x = SpinConfiguration::new(z, n).unwrap();
            let flipped = SpinConfiguration::new(z ^ mask, n).unwrap();
            prop_assert!((inst.energy(x) - inst.energy(flipped)).abs() <= 1e-12);
            prop_assert_eq!(magnetization(x, n), -magnetization(flipped, n));
        }
    }

    #[test]
    fn chain_energy_cache_tracks_state(n in 1usize..=6, seed: u64, theta in 0.01f64..1.0, temperature in 0.05f64..5.0) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let target = BoltzmannTarget::new(inst.clone(), temperature).unwrap();
        for kernel in kernels(&inst, theta, 2) {
            let init = random_configuration(n, &mut seeded(seed));
            let mut chain = ChainState::new(&target, init, seed ^ 1).unwrap();
            for _ in 0..200 {
                let out = chain.metropolis_step(&kernel, &target).unwrap();
                prop_assert!((0.0..=1.0).contains(&out.acceptance));
                prop_assert!((chain.current_energy() - inst.energy(chain.current())).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn distribution_is_normalized(n in 1usize..=8, seed: u64, temperature in 0.01f64..100.0) {
        let inst = SpinGlassInstance::generate(n, seed).unwrap();
        let exact = BoltzmannTarget::new(inst, temperature).unwrap().enumerate().unwrap();
        prop_assert!((exact.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}
