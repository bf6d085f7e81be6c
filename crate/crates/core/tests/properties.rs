use proptest::prelude::*;

use react_core::encoding::{self, BitGenome, EncodingSpec};
use react_core::env::{Environment, GridAction, GridSpec, GridState, ReachSpec, ReachState};
use react_core::evolution::{EvolutionConfig, Evolver};
use react_core::policy::{GaussianController, Policy, TabularPolicy};
use react_core::rollout::{self, Outcome};

fn genome(len: usize) -> impl Strategy<Value = BitGenome> {
    proptest::collection::vec(any::<bool>(), len).prop_map(BitGenome::from_bits)
}

#[test]
fn discrete_decode_is_surjective_with_two_multiplicities() {
    for m in 1..=8u32 {
        for (lo, hi) in [(0i64, 8i64), (1, 9), (-3, 3), (0, 0), (5, 6)] {
            let span = (hi - lo + 1) as u64;
            if span > 1 << m {
                continue;
            }
            let spec = EncodingSpec::discrete(m, &[(lo, hi)]).unwrap();
            let mut counts = vec![0u64; span as usize];
            for code in 0..1u64 << m {
                let v = spec.decode(&BitGenome::from_values(&[code], m)).unwrap()[0];
                assert_eq!(v.fract(), 0.0);
                counts[(v as i64 - lo) as usize] += 1;
            }
            assert!(
                counts.iter().all(|&c| c > 0),
                "m={m} [{lo},{hi}] not surjective"
            );
            let mut distinct: Vec<u64> = counts.clone();
            distinct.sort_unstable();
            distinct.dedup();
            assert!(distinct.len() <= 2);
            if let [a, b] = distinct[..] {
                assert_eq!(b - a, 1);
            }
            let stats = spec.occurrence_stats(0).unwrap();
            assert_eq!(stats.lower_count, distinct[0]);
            assert_eq!(stats.higher_count, *distinct.last().unwrap());
        }
    }
}

proptest! {
    #[test]
    fn continuous_decode_is_monotone_and_exact_at_ends(m in 1u32..=16, lo in -5.0f64..0.0, width in 0.01f64..10.0, a in any::<u64>(), b in any::<u64>()) {
        let spec = EncodingSpec::continuous(m, &[(lo, lo + width)]).unwrap();
        let mask = (1u64 << m) - 1;
        let (a, b) = ((a & mask).min(b & mask), (a & mask).max(b & mask));
        let va = spec.decode(&BitGenome::from_values(&[a], m)).unwrap()[0];
        let vb = spec.decode(&BitGenome::from_values(&[b], m)).unwrap()[0];
        prop_assert!(va <= vb);
        prop_assert_eq!(spec.decode(&BitGenome::zeros(m as usize)).unwrap()[0], lo);
        prop_assert_eq!(spec.decode(&BitGenome::ones(m as usize)).unwrap()[0], lo + width);
    }

    #[test]
    fn operators_preserve_length(g in genome(12), h in genome(12), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = encoding::mutate(&g, &mut rng).unwrap();
        prop_assert_eq!(m.len(), 12);
        prop_assert_eq!(m.hamming_distance(&g), 1);
        let c = encoding::crossover(&g, &h, &mut rng).unwrap();
        prop_assert_eq!(c.len(), 12);
        let cut = (0..=12).find(|&k| c.bits()[..k] == g.bits()[..k] && c.bits()[k..] == h.bits()[k..]);
        prop_assert!(cut.is_some());
    }

    #[test]
    fn genome_string_roundtrip(g in genome(20)) {
        let text = g.to_string();
        prop_assert_eq!(text.parse::<BitGenome>().unwrap(), g);
    }

    #[test]
    fn gaussian_certainty_falls_with_distance(mean in -3.0f64..3.0, d1 in 0.0f64..2.0, extra in 0.0f64..2.0) {
        let g = GaussianController::default();
        let near = g.window_mass(mean, mean + d1);
        let far = g.window_mass(mean, mean + d1 + extra);
        prop_assert!(far <= near + 1e-15);
        prop_assert!((0.0..=1.0).contains(&near));
    }

    #[test]
    fn tabular_greedy_maximizes_certainty(q in proptest::collection::vec(-10.0f64..10.0, 4), beta in 0.05f64..5.0) {
        let spec = GridSpec::flat_grid11();
        let mut t = TabularPolicy::for_grid(&spec, beta).unwrap();
        let s = GridState::new(3, 4);
        for (a, v) in GridAction::ALL.iter().zip(&q) {
            t.set_value(s, *a, *v).unwrap();
        }
        let chosen = t.act(&spec, &s);
        let best = GridAction::ALL.iter().map(|a| t.certainty(&spec, &s, a)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(t.certainty(&spec, &s, &chosen), best);
        let total: f64 = GridAction::ALL.iter().map(|a| t.certainty(&spec, &s, a)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_rollouts_are_pure_and_bounded(row in 1i32..10, col in 1i32..10, seed in 0u64..50) {
        let spec = GridSpec::holey_grid11();
        let s = GridState::new(row, col);
        prop_assume!(spec.validate_initial(&s).is_valid());
        let mut t = TabularPolicy::for_grid(&spec, 1.0).unwrap();
        // arbitrary but fixed table
        let mut x = seed;
        for r in 0..11 {
            for c in 0..11 {
                for a in GridAction::ALL {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    t.set_value(GridState::new(r, c), a, (x >> 40) as f64 / 1e6).unwrap();
                }
            }
        }
        let a = rollout::generate(&spec, &t, s).unwrap();
        let b = rollout::generate(&spec, &t, s).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.length() <= a.raw_length + 1);
        let reached = *a.rewards.last().unwrap() == spec.step_cost + spec.target_reward;
        prop_assert_eq!(a.outcome == Outcome::ReachedTarget, reached);
    }

    #[test]
    fn reach_rollouts_stay_in_bounds(e in proptest::collection::vec(-0.15f64..0.15, 3), g in proptest::collection::vec(-0.15f64..0.15, 3)) {
        let env = ReachSpec::default();
        let t = rollout::generate(&env, &GaussianController::default(), ReachState { effector: e, target: g }).unwrap();
        prop_assert_eq!(t.raw_length, 50);
        prop_assert!(t.states.iter().flatten().all(|x| x.abs() <= 0.15));
        prop_assert!(t.certainties.iter().all(|c| (0.0..=1.0).contains(c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_invariants(seed in any::<u64>(), n in 2usize..8, pc in 0.0f64..=1.0, pm in 0.0f64..=1.0, bits in 4u32..=7) {
        let spec = GridSpec::holey_grid11();
        let policy = TabularPolicy::for_grid(&spec, 0.5).unwrap();
        let cfg = EvolutionConfig {
            population_size: n,
            generations: 6,
            crossover_probability: pc,
            mutation_probability: pm,
            bits_per_dim: bits,
            seed,
            ..Default::default()
        };
        let mut ev = Evolver::new(&spec, &policy, cfg.clone()).unwrap();
        let mut pop = ev.init_population().unwrap();
        let mut best = pop.max_joint();
        let mut ids = Vec::new();
        for g in 1..=6 {
            pop = ev.step(pop, g).unwrap().0;
            prop_assert_eq!(pop.len(), n);
            prop_assert!(pop.demonstrations_match());
            prop_assert!(pop.max_joint() >= best);
            best = pop.max_joint();
            for i in &pop.individuals {
                prop_assert!(ev.decode_valid(&i.genome).unwrap().is_some());
                prop_assert_eq!(i.fitness.joint, i.fitness.global_diversity + i.fitness.local_distance);
            }
            ids.push(pop.ids());
        }
        let again = Evolver::new(&spec, &policy, cfg).unwrap().run().unwrap();
        prop_assert_eq!(again.population.ids(), pop.ids());
        let replayed: Vec<Vec<u64>> = again.history[1..].iter().map(|r| r.individuals.iter().map(|i| i.id).collect()).collect();
        prop_assert_eq!(replayed, ids);
    }
}
