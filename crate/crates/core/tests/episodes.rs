use d2d_core::agents::{
    evaluate_allocation, exhaustive_oracle, GreedyDistancePolicy, OracleSearch, Policy,
    PolicyContext,
};
use d2d_core::config::GatingRule;
use d2d_core::env::{EnvStepResult, JointAction};
use d2d_core::pathloss::PathlossConfig;
use d2d_core::{D2dEnv, Mode, PairId, ScenarioConfig};
use proptest::prelude::*;

fn trace(config: &ScenarioConfig, seed: u64, actions: &[JointAction]) -> Vec<EnvStepResult> {
    let mut env = D2dEnv::new(config.clone()).unwrap();
    env.reset(Some(seed)).unwrap();
    actions.iter().map(|a| env.step(a).unwrap()).collect()
}

fn joint(indices: &[usize]) -> JointAction {
    indices
        .iter()
        .enumerate()
        .map(|(n, &i)| (PairId(n), i))
        .collect()
}

#[test]
fn episode_trace_is_a_function_of_config_seed_and_actions() {
    let config = ScenarioConfig::default().with_due_pairs(4);
    let actions: Vec<JointAction> = (0..10)
        .map(|k| joint(&[k * 7, 500 - k, 21 * k, 3]))
        .collect();
    assert_eq!(trace(&config, 17, &actions), trace(&config, 17, &actions));
    assert_ne!(trace(&config, 17, &actions), trace(&config, 18, &actions));
}

#[test]
fn shared_reward_is_total_over_one_hundred() {
    let config = ScenarioConfig::default().with_due_pairs(3);
    for r in trace(&config, 2, &[joint(&[0, 100, 300])]) {
        let expected = r.info.metrics.total_capacity_mbps / 100.0;
        assert!(r.rewards.values().all(|&v| v == expected));
    }
}

#[test]
fn greedy_policy_stays_on_the_power_grid() {
    let mut config = ScenarioConfig::default().with_due_pairs(5);
    config.due_power_levels = 3;
    let mut env = D2dEnv::new(config).unwrap();
    let obs = env.reset(Some(4)).unwrap();
    let ctx = PolicyContext::from_env(&env);
    let mut rng = d2d_core::rng::substream(0, d2d_core::rng::Stream::Policy);
    let actions = GreedyDistancePolicy::default()
        .act(&obs, &ctx, &mut rng)
        .unwrap();
    for index in actions.values() {
        // grid is {0, 10, 20}; 11 snaps to 10
        assert_eq!(ctx.action_space.decode(*index).unwrap().1, 10.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observation_length_depends_only_on_cues_and_rbs(
        seed in any::<u64>(),
        rbs in 1usize..30,
        cue_frac in 0.0f64..1.0,
        pairs in 1usize..8,
    ) {
        let mut config = ScenarioConfig::default().with_due_pairs(pairs);
        config.num_rbs = rbs;
        config.num_cues = 1 + ((rbs - 1) as f64 * cue_frac) as usize;
        let mut env = D2dEnv::new(config.clone()).unwrap();
        let obs = env.reset(Some(seed)).unwrap();
        let expected = 5 + 2 * config.num_cues + rbs;
        prop_assert_eq!(env.spaces().observation_len, expected);
        prop_assert!(obs.values().all(|o| o.len() == expected));
    }

    #[test]
    fn frame_accounting(
        seed in any::<u64>(),
        raw in prop::collection::vec(0usize..525, 0..12),
        rx_gating in any::<bool>(),
    ) {
        let mut config = ScenarioConfig::default().with_due_pairs(raw.len());
        if rx_gating {
            config.gating = GatingRule::RxPowerDbm;
        }
        let r = trace(&config, seed, &[joint(&raw)]).remove(0);
        let m = &r.info.metrics;
        let reports = &r.info.reports;
        prop_assert!((m.total_capacity_mbps - (m.cue_capacity_mbps + m.due_capacity_mbps)).abs() < 1e-9);
        prop_assert_eq!(m.per_rb_occupancy.iter().sum::<usize>(), 25 + raw.len());
        prop_assert_eq!(m.gated_link_count, reports.iter().filter(|l| l.gated).count());
        for l in reports {
            prop_assert!(l.capacity_mbps >= 0.0);
            if l.gated {
                prop_assert_eq!(l.capacity_mbps, 0.0);
            }
        }
        let due: f64 = reports.iter().filter(|l| l.mode == Mode::D2d).map(|l| l.capacity_mbps).sum();
        prop_assert!((due - m.due_capacity_mbps).abs() < 1e-9);
    }

    #[test]
    fn oracle_is_at_least_as_good_as_any_single_allocation(
        seed in any::<u64>(),
        rbs in 1usize..=3,
        pairs in 1usize..=2,
        picks in prop::collection::vec((0usize..3, 0usize..2), 2),
    ) {
        let mut config = ScenarioConfig::default().with_due_pairs(pairs);
        config.num_rbs = rbs;
        config.num_cues = 1;
        config.due_power_levels = 2;
        config.pathloss_model = PathlossConfig::FreeSpace { exponent: 2.0 };
        let mut env = D2dEnv::new(config.clone()).unwrap();
        env.reset(Some(seed)).unwrap();
        let ctx = PolicyContext::from_env(&env);
        let grid = config.due_power_grid();
        let best = exhaustive_oracle(ctx.roster, ctx.config, ctx.model, ctx.traffic, &OracleSearch::powers(&grid)).unwrap();
        let assignment: Vec<(usize, f64)> = picks[..pairs].iter().map(|&(k, p)| (k % rbs, grid[p])).collect();
        let total = evaluate_allocation(ctx.roster, ctx.config, ctx.model, ctx.traffic, &assignment).unwrap();
        prop_assert!(best.total_capacity_mbps >= total);
        let replay = evaluate_allocation(ctx.roster, ctx.config, ctx.model, ctx.traffic, &best.assignment).unwrap();
        prop_assert_eq!(replay, best.total_capacity_mbps);
    }
}
