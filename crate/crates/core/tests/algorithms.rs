mod common;

use common::*;
use graphmatch::engine::MarkTable;
use graphmatch::{
    expand_once, expand_when_stuck, irma, parallel_ews, parallel_irma, parallel_repairing_iteration,
    repairing_iteration, score_matching, weight, EwsConfig, Graph, IrmaConfig, Pair, ParallelConfig,
};

#[test]
fn ews_on_six_clique_recovers_everything() {
    let g = clique(6);
    let inst = self_instance(&g, 0);
    let seed = identity(2);
    let r = expand_when_stuck(&inst.g1, &inst.g2, &seed, &EwsConfig::default()).unwrap();
    let m = score_matching(&r.matching, &inst.truth, &inst.g1, &inst.g2);
    assert_eq!(m.precision, 1.0);
    assert_eq!(m.recall, 1.0);
}

#[test]
fn expand_once_on_six_clique_recovers_everything() {
    let g = clique(6);
    let inst = self_instance(&g, 0);
    for rng in 0..10 {
        let r = expand_once(&inst.g1, &inst.g2, &identity(2), rng, &EwsConfig::default()).unwrap();
        let m = score_matching(&r.matching, &inst.truth, &inst.g1, &inst.g2);
        assert_eq!(m.recall, 1.0, "rng {rng}");
    }
}

#[test]
fn seeded_path_pair_has_perfect_precision() {
    // Two adjacent seeds on a connected s=1 graph. Every pair it admits must
    // be true since all mark counts favor the identity.
    let inst = er_instance(300, 8.0, 1.0, 0, 4);
    let (g1, g2) = (&inst.g1, &inst.g2);
    let (a, b) = g1.edges().next().unwrap();
    let seed = [
        Pair { u: a, v: inst.truth.image(a).unwrap() },
        Pair { u: b, v: inst.truth.image(b).unwrap() },
    ];
    let r = expand_when_stuck(g1, g2, &seed, &EwsConfig::default()).unwrap();
    let m = score_matching(&r.matching, &inst.truth, g1, g2);
    assert_eq!(m.precision, 1.0);
    assert_eq!(m.reachable_recall, 1.0);
}

#[test]
fn untouched_component_stays_unmatched() {
    // Triangle plus a separate 4-clique; seeds only in the triangle.
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (3, 5), (3, 6), (4, 5), (4, 6), (5, 6)];
    let g = Graph::from_edges(7, &edges).unwrap();
    let r = expand_when_stuck(&g, &g, &identity(2), &EwsConfig::default()).unwrap();
    for p in r.matching.pairs() {
        assert!(p.u.0 < 3 && p.v.0 < 3, "{p:?}");
    }
}

#[test]
fn scale_free_precision_exceeds_recall_and_er_is_easier() {
    let ba = ba_instance(1000, 5, 0.5, 50, 2);
    let r = expand_when_stuck(&ba.g1, &ba.g2, &ba.seed, &EwsConfig::default()).unwrap();
    let m_ba = score_matching(&r.matching, &ba.truth, &ba.g1, &ba.g2);
    assert!(m_ba.precision > m_ba.recall, "{m_ba:?}");

    let ba8 = ba_instance(1000, 5, 0.8, 50, 2);
    let er8 = er_instance(1000, 10.0, 0.8, 50, 2);
    let f1 = |i: &graphmatch::Instance| {
        let r = expand_when_stuck(&i.g1, &i.g2, &i.seed, &EwsConfig::default()).unwrap();
        score_matching(&r.matching, &i.truth, &i.g1, &i.g2).f1
    };
    let (f_ba, f_er) = (f1(&ba8), f1(&er8));
    assert!(f_er > 0.9, "er f1 {f_er}");
    assert!(f_ba < f_er, "ba {f_ba} er {f_er}");
}

#[test]
fn runs_are_deterministic() {
    let inst = ba_instance(800, 4, 0.7, 30, 9);
    let cfg = IrmaConfig {
        ews: EwsConfig {
            trace: true,
            ..EwsConfig::default()
        },
        ..IrmaConfig::default()
    };
    let a = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, Some(&inst.truth)).unwrap();
    let b = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, Some(&inst.truth)).unwrap();
    assert_eq!(a.snapshots.len(), b.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.matching.sorted_pairs(), y.matching.sorted_pairs());
        assert_eq!(x.metrics, y.metrics);
        assert_eq!(x.stats, y.stats);
    }
    assert_eq!(a.trace, b.trace);
    let o1 = expand_once(&inst.g1, &inst.g2, &inst.seed, 5, &cfg.ews).unwrap();
    let o2 = expand_once(&inst.g1, &inst.g2, &inst.seed, 5, &cfg.ews).unwrap();
    assert_eq!(o1.trace, o2.trace);
}

#[test]
fn repair_with_empty_previous_marks_is_a_plain_round() {
    let inst = er_instance(400, 10.0, 0.8, 20, 3);
    let snap = repairing_iteration(&inst.g1, &inst.g2, &inst.seed, &MarkTable::new(), 2).unwrap();
    // A plain round without artificial seeds: same as EWS with the cap at zero.
    let cfg = EwsConfig {
        artificial_cap_factor: Some(0.0),
        trace: false,
    };
    let r = expand_when_stuck(&inst.g1, &inst.g2, &inst.seed, &cfg).unwrap();
    assert_eq!(snap.matching.sorted_pairs(), r.matching.sorted_pairs());
}

#[test]
fn previous_marks_alone_qualify_a_pair() {
    let g = path(5);
    let mut prev = MarkTable::new();
    for _ in 0..5 {
        prev.increment(Pair::new(4, 4));
    }
    let snap = repairing_iteration(&g, &g, &identity(1), &prev, 2).unwrap();
    assert!(snap.matching.contains(Pair::new(4, 4)));
}

#[test]
fn clique_is_a_fixed_point_of_repair() {
    let g = clique(6);
    let seed = identity(2);
    let r = expand_when_stuck(&g, &g, &seed, &EwsConfig::default()).unwrap();
    let snap = repairing_iteration(&g, &g, &seed, &r.marks, 2).unwrap();
    assert_eq!(snap.matching.sorted_pairs(), r.matching.sorted_pairs());
    let par = parallel_repairing_iteration(&g, &g, &seed, &r.marks, 2, &ParallelConfig { workers: 3 }).unwrap();
    assert_eq!(par.matching.sorted_pairs(), r.matching.sorted_pairs());
}

#[test]
fn parallel_repair_adds_single_qualifying_pair() {
    let g = path(6);
    let mut prev = MarkTable::new();
    prev.increment(Pair::new(3, 3));
    prev.increment(Pair::new(3, 3));
    prev.increment(Pair::new(4, 5));
    let snap = parallel_repairing_iteration(&g, &g, &identity(1), &prev, 2, &ParallelConfig::default()).unwrap();
    assert_eq!(snap.matching.sorted_pairs(), vec![Pair::new(0, 0), Pair::new(3, 3)]);
}

#[test]
fn huge_delta_stops_after_one_repair() {
    let inst = er_instance(500, 10.0, 0.7, 30, 1);
    let cfg = IrmaConfig {
        delta: 10.0,
        explore: false,
        ..IrmaConfig::default()
    };
    let run = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, None).unwrap();
    assert_eq!(run.snapshots.len(), 2);
    assert_eq!(run.phase1_last, 1);
}

#[test]
fn phase_one_respects_stop_rule() {
    for rng in 0..4 {
        let inst = er_instance(800, 8.0, 0.6, 40, rng);
        let cfg = IrmaConfig::default();
        let run = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, None).unwrap();
        let w: Vec<usize> = run.snapshots.iter().map(|s| s.weight).collect();
        let last = run.phase1_last;
        for i in 0..last {
            let before = if i == 0 { 0 } else { w[i - 1] };
            assert!(w[i] as f64 > (1.0 + cfg.delta) * before as f64, "rng {rng} weights {w:?}");
        }
        assert!(!(w[last] as f64 > (1.0 + cfg.delta) * w[last - 1] as f64) || run.truncated);
    }
}

#[test]
fn parallel_ews_matches_sequential_on_clique() {
    let g = clique(6);
    let seed = identity(2);
    let seq = expand_when_stuck(&g, &g, &seed, &EwsConfig::default()).unwrap();
    let par = parallel_ews(&g, &g, &seed, &EwsConfig::default(), &ParallelConfig { workers: 4 }).unwrap();
    assert_eq!(par.matching.sorted_pairs(), seq.matching.sorted_pairs());
}

#[test]
fn worker_count_does_not_change_results() {
    let inst = ba_instance(1500, 4, 0.7, 40, 11);
    let cfg = IrmaConfig::default();
    let runs: Vec<_> = [1, 4, 8]
        .iter()
        .map(|&w| parallel_irma(&inst.g1, &inst.g2, &inst.seed, &cfg, &ParallelConfig { workers: w }, None).unwrap())
        .collect();
    for r in &runs[1..] {
        assert_eq!(r.snapshots.len(), runs[0].snapshots.len());
        for (x, y) in r.snapshots.iter().zip(&runs[0].snapshots) {
            assert_eq!(x.matching.sorted_pairs(), y.matching.sorted_pairs());
            assert_eq!(x.stats, y.stats);
        }
        let (a, b) = (r.snapshots.last().unwrap(), runs[0].snapshots.last().unwrap());
        assert_eq!(
            a.marks.as_ref().unwrap().sorted_entries(),
            b.marks.as_ref().unwrap().sorted_entries()
        );
    }
    let e: Vec<_> = [1, 4, 8]
        .iter()
        .map(|&w| parallel_ews(&inst.g1, &inst.g2, &inst.seed, &cfg.ews, &ParallelConfig { workers: w }).unwrap())
        .collect();
    for r in &e[1..] {
        assert_eq!(r.marks.sorted_entries(), e[0].marks.sorted_entries());
        assert_eq!(r.matching.sorted_pairs(), e[0].matching.sorted_pairs());
    }
}

/// Largest BFS distance from the seed's left endpoints.
fn seed_eccentricity(g: &Graph, seed: &[Pair]) -> usize {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = std::collections::VecDeque::new();
    for p in seed {
        dist[p.u.index()] = 0;
        queue.push_back(p.u);
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.adj(v) {
            if dist[w.index()] == usize::MAX {
                dist[w.index()] = dist[v.index()] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().filter(|&d| d != usize::MAX).max().unwrap()
}

// Threshold-2 growth can detour around a vertex with one matched
// neighbor, so the bound is only a sanity check on dense instances.
#[test]
fn epochs_are_bounded_by_seed_eccentricity() {
    for n in 4..9 {
        let g = clique(n);
        let r = parallel_ews(&g, &g, &identity(2), &EwsConfig::default(), &ParallelConfig { workers: 2 }).unwrap();
        assert!(r.stats.epochs <= 2, "clique {n}: {} epochs", r.stats.epochs);
    }
    for rng in 0..10 {
        let inst = er_instance(40, 16.0, 1.0, 0, rng);
        let g = &inst.g1;
        let (a, b) = g.edges().next().unwrap();
        let seed = [
            Pair { u: a, v: inst.truth.image(a).unwrap() },
            Pair { u: b, v: inst.truth.image(b).unwrap() },
        ];
        let cfg = EwsConfig {
            artificial_cap_factor: Some(0.0),
            trace: false,
        };
        let r = parallel_ews(g, &inst.g2, &seed, &cfg, &ParallelConfig { workers: 2 }).unwrap();
        let ecc = seed_eccentricity(g, &seed);
        assert!(r.stats.epochs <= ecc + 1, "rng {rng}: {} epochs, eccentricity {ecc}", r.stats.epochs);
    }
}

#[test]
fn parallel_needs_more_seed_on_scale_free() {
    let mut seq = 0.0;
    let mut par = 0.0;
    for rep in 0..5 {
        let inst = ba_instance(2000, 5, 0.6, 20, 100 + rep);
        let s = expand_when_stuck(&inst.g1, &inst.g2, &inst.seed, &EwsConfig::default()).unwrap();
        let p = parallel_ews(&inst.g1, &inst.g2, &inst.seed, &EwsConfig::default(), &ParallelConfig { workers: 4 }).unwrap();
        seq += score_matching(&s.matching, &inst.truth, &inst.g1, &inst.g2).f1 / 5.0;
        par += score_matching(&p.matching, &inst.truth, &inst.g1, &inst.g2).f1 / 5.0;
    }
    assert!(par <= seq + 1e-9, "parallel {par} sequential {seq}");
}

#[test]
fn parallel_irma_tracks_sequential_on_scale_free() {
    let mut seq = 0.0;
    let mut par = 0.0;
    for rep in 0..5 {
        let inst = ba_instance(2000, 5, 0.6, 100, 200 + rep);
        let cfg = IrmaConfig::default();
        let s = irma(&inst.g1, &inst.g2, &inst.seed, &cfg, Some(&inst.truth)).unwrap();
        let p = parallel_irma(&inst.g1, &inst.g2, &inst.seed, &cfg, &ParallelConfig { workers: 4 }, Some(&inst.truth)).unwrap();
        seq += s.final_snapshot().metrics.as_ref().unwrap().f1 / 5.0;
        par += p.final_snapshot().metrics.as_ref().unwrap().f1 / 5.0;
    }
    assert!((seq - par).abs() <= 0.05, "parallel {par} sequential {seq}");
}

#[test]
fn weight_agrees_with_edge_scan() {
    let inst = er_instance(300, 6.0, 0.7, 40, 8);
    let r = expand_when_stuck(&inst.g1, &inst.g2, &inst.seed, &EwsConfig::default()).unwrap();
    assert_eq!(weight(&inst.g1, &inst.g2, &r.matching), shared_edges(&inst.g1, &inst.g2, r.matching.pairs()));
}
