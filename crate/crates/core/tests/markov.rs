mod common;

use pathwager::markov::{analyze, fairness_check, invariant_measure, steady_state_fortunes, stopping_analysis};
use pathwager::sim::{run, SimulationConfig};
use pathwager::{build_profile, chooser_transition_matrix, solve, GameGraph};

fn expected_final_fortune(g: &GameGraph) -> Vec<f64> {
    // E_i = sum_j P_ij * (v_i / v_j) * E_j with E fixed on terminals, by iteration
    let sol = solve::<f64>(g).unwrap();
    let p = chooser_transition_matrix(&sol, g).unwrap();
    let v = &sol.values;
    let n = g.node_count();
    let mut e: Vec<f64> = (0..n).map(|i| if g.is_terminal(i) { v[i] } else { 0.0 }).collect();
    for _ in 0..20_000 {
        e = (0..n)
            .map(|i| {
                if g.is_terminal(i) {
                    e[i]
                } else {
                    g.successors(i).iter().map(|&j| p[(i, j)] * v[i] / v[j] * e[j]).sum()
                }
            })
            .collect();
    }
    e
}

#[test]
fn stopping_quantities_on_the_corpus() {
    for case in common::corpus(40, 12).into_iter().filter(|c| c.is_terminating()) {
        let g = &case.graph;
        let sol = solve::<f64>(g).unwrap();
        let st = stopping_analysis(&sol, g, 500).unwrap();
        for (r, &i) in st.non_terminal.iter().enumerate() {
            assert!(st.tau[r] >= 1.0 - 1e-12, "{}", case.name);
            let row: f64 = (0..st.terminal.len()).map(|c| st.terminal_probs[(r, c)]).sum();
            assert!((row - 1.0).abs() < 1e-10, "{}", case.name);
            let mass: f64 = st.stop_dist.iter().map(|q| q[r]).sum();
            let mean: f64 = st
                .stop_dist
                .iter()
                .enumerate()
                .map(|(t, q)| (t + 1) as f64 * q[r])
                .sum();
            assert!((mass + st.tail_mass[r] - 1.0).abs() < 1e-10, "{}", case.name);
            assert!(
                (mean - st.tau[r]).abs() < 1e-8,
                "{}: {mean} vs {}",
                case.name,
                st.tau[r]
            );
            let e = expected_final_fortune(g);
            assert!((e[i] - sol.values[i]).abs() < 1e-9 * sol.values[i], "{}", case.name);
        }
    }
}

#[test]
fn fan_and_loop_examples() {
    let fan = common::fan(&[2.0, 4.0]);
    let sol = solve::<f64>(&fan).unwrap();
    let st = stopping_analysis(&sol, &fan, 10).unwrap();
    assert!((st.tau[0] - 1.0).abs() < 1e-15);
    assert!((st.stop_dist[0][0] - 1.0).abs() < 1e-15);
    assert!((st.hit_probability(0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);

    let g = common::loop_graph();
    let sol = solve::<f64>(&g).unwrap();
    let st = stopping_analysis(&sol, &g, 30).unwrap();
    assert!((st.tau[0] - 2.0).abs() < 1e-12);
    for (t, q) in st.stop_dist.iter().enumerate() {
        assert!((q[0] - 0.5f64.powi(t as i32 + 1)).abs() < 1e-15);
    }
    assert!(stopping_analysis(&sol, &g, 0).is_err());
}

#[test]
fn invariant_measures() {
    for case in common::corpus(40, 12).into_iter().filter(|c| !c.is_terminating()) {
        let g = &case.graph;
        let sol = solve::<f64>(g).unwrap();
        let inv = invariant_measure(&sol, g).unwrap();
        let p = chooser_transition_matrix(&sol, g).unwrap();
        let moved = p.transpose_mul_vec(&inv.mu);
        let gap = moved
            .iter()
            .zip(&inv.mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-10, "{}: {gap}", case.name);
        assert!(inv.mu.iter().all(|&m| m > 0.0));
        assert!((inv.mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let steady = steady_state_fortunes(&sol, g, None).unwrap();
        assert!((steady.shape.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        if (0..g.node_count()).all(|i| g.out_degree(i) >= 2) {
            for (s, m) in steady.shape.iter().zip(&inv.mu) {
                assert!((s - m).abs() < 1e-10, "{}", case.name);
            }
        }
    }
    let k3 = common::complete_k3();
    let sol = solve::<f64>(&k3).unwrap();
    let mu = invariant_measure(&sol, &k3).unwrap().mu;
    assert!(mu.iter().all(|m| (m - 1.0 / 3.0).abs() < 1e-12));

    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let g21 = pathwager::oracle::build_window_game(2, 1).unwrap();
    let mu = invariant_measure(&solve(&g21).unwrap(), &g21).unwrap().mu;
    let start = g21.index_of("1").unwrap();
    assert!((mu[start] - phi * phi / (phi * phi + 1.0)).abs() < 1e-10);

    let mut previous = 0.0;
    for n in 2..=10 {
        let g = pathwager::oracle::build_window_game(n, 1).unwrap();
        let mu = invariant_measure(&solve(&g).unwrap(), &g).unwrap().mu;
        let lie = mu
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != g.index_of("1").unwrap())
            .map(|(_, m)| *m)
            .next()
            .unwrap();
        // the lie rate stays below the allowed 1/n and closes in on it relatively
        let share = n as f64 * lie;
        assert!(share > previous && share < 1.0, "n={n}: {share}");
        previous = share;
    }
}

#[test]
fn fairness_verdicts_agree() {
    for case in common::corpus(60, 12) {
        let sol = solve::<f64>(&case.graph).unwrap();
        let f = fairness_check(&sol, &case.graph);
        assert!(f.consistent(), "{}: {f:?}", case.name);
    }
    let sym = common::fan(&[1.0, 1.0]);
    assert!(fairness_check(&solve::<f64>(&sym).unwrap(), &sym).fair);
    let g = pathwager::oracle::build_window_game(3, 1).unwrap();
    let sol = solve::<f64>(&g).unwrap();
    let f = fairness_check(&sol, &g);
    assert!(!f.fair && f.reason.contains("out-degree 1"), "{}", f.reason);
    assert!(sol.growth() < 1.0);
}

#[test]
fn simulated_steady_state_constant() {
    let g = pathwager::oracle::build_window_game(2, 1).unwrap();
    let sol = solve::<f64>(&g).unwrap();
    let profile = build_profile(&sol, &g, 1.0).unwrap();
    let start = g.index_of("1").unwrap();
    let r = sol.growth();
    let cfg = SimulationConfig::new(start, 20_000, 7)
        .max_steps(200)
        .discount(r)
        .checkpoints([200]);
    let result = run(&g, &profile, &cfg).unwrap();
    let steady = steady_state_fortunes(&sol, &g, Some(&result)).unwrap();
    let c = steady.constant.unwrap();
    assert!(c.ci_low <= c.ci_high && c.std_error > 0.0);
    // the fortune is a mean-v_start martingale once discounted by r
    assert!((c.estimate - c.predicted).abs() <= 4.0 * c.std_error, "{c:?}");
}

#[test]
fn report_json_is_keyed_by_label() {
    let g = common::loop_graph();
    let sol = solve::<f64>(&g).unwrap();
    let doc = analyze(&sol, &g, 50).unwrap().to_json(&g);
    assert!(doc["tau"]["1"].is_number(), "{doc}");
    let g = common::complete_k3();
    let sol = solve::<f64>(&g).unwrap();
    let doc = analyze(&sol, &g, 50).unwrap().to_json(&g);
    assert!(doc["invariant_measure"]["2"].is_number(), "{doc}");
}
