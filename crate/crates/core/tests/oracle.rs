mod common;

use std::collections::BTreeSet;

use pathwager::markov::invariant_measure;
use pathwager::oracle::{
    build_forbidden_pattern_game, build_stopping_variant, build_window_game, gn1_reference, parse_pattern,
    parse_pattern_file, stop_probability_closed_form, Outcome,
};
use pathwager::{build_profile, chooser_transition_matrix, solve, Error, GraphClass, OracleKind, OracleSpec};

fn normalised(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Strings of length `len` avoiding every pattern as a substring.
fn avoiding(patterns: &[&str], len: usize) -> BTreeSet<String> {
    (0..1u32 << len)
        .map(|bits| {
            (0..len)
                .map(|b| if bits >> b & 1 == 1 { 'L' } else { 'T' })
                .collect::<String>()
        })
        .filter(|w| patterns.iter().all(|p| !w.contains(p)))
        .collect()
}

#[test]
fn window_languages() {
    for n in 1..=4 {
        for k in 0..n {
            let g = build_window_game(n, k).unwrap();
            assert!(
                g.node_count() <= 1 << (n - 1),
                "window ({n},{k}) has {} nodes",
                g.node_count()
            );
            let start = g.index_of("1").unwrap();
            for len in [1, 5, 10] {
                assert_eq!(
                    common::realisable_strings(&g, start, len),
                    common::legal_window_strings(n, k, len),
                    "window ({n},{k}) length {len}"
                );
            }
        }
    }
    assert!(build_window_game(0, 0).is_err());
    assert!(build_window_game(3, 3).is_err());
}

#[test]
fn one_lie_windows_match_the_reference() {
    for n in 2..=10 {
        let g = build_window_game(n, 1).unwrap();
        assert_eq!(g.node_count(), n);
        assert_eq!(g.classify(), GraphClass::StronglyConnectedAperiodic);
        let reference = gn1_reference(n).unwrap();
        assert!((reference.lambda - common::lambda_by_bisection(n)).abs() < 1e-12);
        let sol = solve::<f64>(&g).unwrap();
        let spectral = sol.spectral.as_ref().unwrap();
        assert!(
            (spectral.r - reference.r).abs() < 1e-12,
            "n={n}: {} vs {}",
            spectral.r,
            reference.r
        );

        let order: Vec<usize> = (1..=n).map(|i| g.index_of(&i.to_string()).unwrap()).collect();
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        assert!(
            close(&pick(&spectral.right), &normalised(&reference.x), 1e-10),
            "n={n} right"
        );
        assert!(
            close(&pick(&spectral.left), &normalised(&reference.y), 1e-10),
            "n={n} left"
        );
        let mu = invariant_measure(&sol, &g).unwrap().mu;
        assert!(close(&pick(&mu), &reference.mu, 1e-10), "n={n} mu");

        let start = order[0];
        let profile = build_profile(&sol, &g, 1.0).unwrap();
        let node = profile.node(start).unwrap();
        for (k, &j) in g.successors(start).iter().enumerate() {
            let want = match g.edge_label(start, j) {
                Some("truth") => reference.oracle_truth_prob,
                _ => reference.oracle_lie_prob,
            };
            assert!((node.chooser[k] - want).abs() < 1e-12, "n={n}");
        }
        // w = 1 - 2 p_min doubles the chooser error
        assert!(
            (node.wager - reference.bettor_wager).abs() < 2e-12,
            "n={n}: {} vs {}",
            node.wager,
            reference.bettor_wager
        );
    }
    assert!(gn1_reference(1).is_err());
}

#[test]
fn stopping_variant_matches_the_closed_form() {
    for n in 2..=10 {
        let g = build_stopping_variant(n).unwrap();
        assert!(g.classify().is_terminating());
        let sol = solve::<f64>(&g).unwrap();
        let p = chooser_transition_matrix(&sol, &g).unwrap();
        let stop = g.terminals()[0];
        for i in 1..=n {
            let node = g.index_of(&i.to_string()).unwrap();
            let got = p[(node, stop)];
            assert!(
                (got - stop_probability_closed_form(n, i)).abs() < 1e-10,
                "n={n} i={i}: {got}"
            );
        }
    }
    assert!(build_stopping_variant(1).is_err());
}

#[test]
fn pattern_games_accept_the_right_streams() {
    for set in [
        vec!["LL"],
        vec!["LTL"],
        vec!["LL", "LTL"],
        vec!["LLL"],
        vec!["LTTL", "LLL"],
    ] {
        let patterns: Vec<Vec<Outcome>> = set.iter().map(|p| parse_pattern(p).unwrap()).collect();
        let g = build_forbidden_pattern_game(&patterns).unwrap();
        assert_eq!(g.classify(), GraphClass::StronglyConnectedAperiodic);
        let start = g.index_of("ε").unwrap();
        for len in [1, 6, 11] {
            assert_eq!(
                common::realisable_strings(&g, start, len),
                avoiding(&set, len),
                "{set:?} length {len}"
            );
        }
    }
    // forbidding two lies in a row is the one-lie window of two
    let pair = build_forbidden_pattern_game(&[parse_pattern("lie lie").unwrap()]).unwrap();
    let window = build_window_game(2, 1).unwrap();
    let a = solve::<f64>(&pair).unwrap();
    let b = solve::<f64>(&window).unwrap();
    assert!((a.growth() - b.growth()).abs() < 1e-14);
}

#[test]
fn pattern_errors() {
    let p = |t: &str| parse_pattern(t).unwrap();
    assert!(matches!(
        build_forbidden_pattern_game(&[p("LL"), p("LLT")]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        build_forbidden_pattern_game(&[p("LL"), p("LL")]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(build_forbidden_pattern_game(&[]).is_err());
    assert!(build_forbidden_pattern_game(&[p("T"), p("L")]).is_err());
    assert!(parse_pattern("LX").is_err());
    assert_eq!(parse_pattern("lie, truth lie").unwrap(), p("LTL"));
    let file = parse_pattern_file("# forbidden\nLL\n\n lie truth lie # trailing\n").unwrap();
    assert_eq!(file, vec![p("LL"), p("LTL")]);
}

#[test]
fn specifications_parse_and_build() {
    assert_eq!(
        OracleSpec::parse("window:3,1").unwrap().kind,
        OracleKind::Window { n: 3, k: 1 }
    );
    assert_eq!(
        OracleSpec::parse("window-stop:4").unwrap().kind,
        OracleKind::WindowWithStop { n: 4, k: 1 }
    );
    for bad in ["window:3", "window", "bogus:1,1", "window:a,b"] {
        assert!(OracleSpec::parse(bad).is_err(), "{bad}");
    }
    let mut spec = OracleSpec::parse("window:3,1").unwrap();
    assert_eq!(spec.build().unwrap(), build_window_game(3, 1).unwrap());
    spec.start_label = "start".into();
    let g = spec.build().unwrap();
    assert!(g.index_of("start").is_some() && g.index_of("1").is_none());
    spec.start_label = "2".into();
    assert!(spec.build().is_err());
    let two = OracleSpec::parse("window-stop:4,2").unwrap().build().unwrap();
    assert!(two.classify().is_terminating());
}
