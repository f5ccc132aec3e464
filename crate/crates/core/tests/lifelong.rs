use std::time::Instant;

use sumlife_core::features::SplitTag;
use sumlife_core::lifelong::{
    evaluate, run_sequence, task_rng, time_warp, train_task, LifelongReport, Restart, ResultMatrix, TaskSequence,
    TrainConfig,
};
use sumlife_core::measures::meta_track;
use sumlife_core::nn::{Architecture, Network};
use sumlife_core::summary::{SummaryModel, SummaryOptions};
use sumlife_core::synthetic::{disjoint_ring_snapshot, drift_sequence, eight_class_snapshot};

fn single(g: sumlife_core::rdf::SnapshotGraph) -> TaskSequence {
    TaskSequence::build(vec![g], SummaryModel::Ac1, SummaryOptions::default(), 1).unwrap()
}

#[test]
fn mlp_overfits_eight_classes() {
    let start = Instant::now();
    let seq = single(eight_class_snapshot(5));
    let cfg = TrainConfig::new(Architecture::Mlp);
    let run = run_sequence(&seq, &cfg, Restart::Warm, 11).unwrap();
    let net = &run.checkpoints[0].network;
    let train = evaluate(net, &seq.tasks[0], SplitTag::Train, cfg.batch_cap, seq.model).unwrap();
    assert!(train.accuracy >= 0.99, "train {}", train.accuracy);
    assert!(run.matrix.get(0, 0) >= 0.95, "test {}", run.matrix.get(0, 0));
    eprintln!("overfit: {:?}", start.elapsed());
}

#[test]
fn every_architecture_beats_chance() {
    // Eight balanced classes: chance is 0.125.
    for (arch, floor) in [
        (Architecture::GraphMlp, 0.9),
        (Architecture::Gcn, 0.25),
        (Architecture::GcnEdges, 0.25),
    ] {
        let start = Instant::now();
        let seq = single(eight_class_snapshot(6));
        let cfg = TrainConfig::new(arch);
        let run = run_sequence(&seq, &cfg, Restart::Warm, 3).unwrap();
        eprintln!("{arch}: R = {:?} in {:?}", run.matrix.r, start.elapsed());
        assert!(run.matrix.get(0, 0) >= floor, "{arch}: {}", run.matrix.get(0, 0));
    }
}

#[test]
fn drift_sequence_is_diagonal_dominant() {
    let seq = TaskSequence::build(drift_sequence(2, 400), SummaryModel::Ac1, SummaryOptions::default(), 4).unwrap();
    let summaries: Vec<_> = seq.tasks.iter().map(|t| t.summary.graph.clone()).collect();
    let track = meta_track(&summaries).unwrap();
    for (i, e) in track.entries.iter().enumerate() {
        assert_eq!(seq.classes[i].width(), e.cumulative_seen);
        if i > 0 {
            assert!(seq.predicates[i - 1].is_prefix_of(&seq.predicates[i]));
        }
    }
    let cfg = TrainConfig::new(Architecture::Mlp);
    let warm = run_sequence(&seq, &cfg, Restart::Warm, 8).unwrap();
    let r = &warm.matrix;
    for i in 0..3 {
        for j in 0..i {
            assert!(r.get(i, i) > r.get(j, i), "R = {:?}", r.r);
        }
    }
    let report = LifelongReport::from_matrix(r).unwrap();
    let again = LifelongReport::from_matrix(&ResultMatrix::from_csv(&r.to_csv()).unwrap()).unwrap();
    assert_eq!(report, again);

    let cold = run_sequence(&seq, &cfg, Restart::Cold, 8).unwrap();
    assert_eq!(cold.matrix.r[0], warm.matrix.r[0]);
    assert_eq!(cold.checkpoints[0], warm.checkpoints[0]);
    let rerun = run_sequence(&seq, &cfg, Restart::Warm, 8).unwrap();
    assert_eq!(rerun.matrix, warm.matrix);
    assert_eq!(rerun.checkpoints, warm.checkpoints);
}

#[test]
fn repeated_snapshot_rows_are_flat() {
    let g = eight_class_snapshot(9);
    let graphs = ["2020-01", "2020-02", "2020-03"]
        .iter()
        .map(|ts| {
            let mut b = sumlife_core::rdf::GraphBuilder::new();
            for t in g.triples() {
                b.add_iri_triple(
                    g.terms().lexical(t.subject),
                    g.terms().lexical(t.predicate),
                    g.terms().lexical(t.object),
                );
            }
            b.finish(ts)
        })
        .collect();
    let seq = TaskSequence::build(graphs, SummaryModel::Ac1, SummaryOptions::default(), 1).unwrap();
    let run = run_sequence(&seq, &TrainConfig::new(Architecture::Mlp), Restart::Warm, 2).unwrap();
    for row in &run.matrix.r {
        for x in row {
            assert!((x - row[0]).abs() <= 0.02);
        }
    }
}

#[test]
fn time_warp_on_disjoint_and_drifting_tasks() {
    let cfg = TrainConfig::new(Architecture::Mlp);
    let seq = single(eight_class_snapshot(1));
    let run = run_sequence(&seq, &cfg, Restart::Warm, 5).unwrap();
    let old = &run.checkpoints[0];

    let same = time_warp(old, eight_class_snapshot(1), &cfg, 1).unwrap();
    assert_eq!(same.frozen, run.matrix.get(0, 0));

    let disjoint = time_warp(old, disjoint_ring_snapshot("other", 8, 500, 3, "2021-01-01"), &cfg, 1).unwrap();
    assert!(disjoint.frozen < 0.05, "{disjoint:?}");
    assert_eq!(disjoint.frozen_unseen_fraction, 1.0);

    let pair = drift_sequence(7, 400);
    let first = single(pair[0].clone());
    let base = run_sequence(&first, &cfg, Restart::Warm, 5).unwrap();
    let warp = time_warp(&base.checkpoints[0], pair[1].clone(), &cfg, 1).unwrap();
    assert!((warp.retrained - warp.fresh).abs() <= 0.05, "{warp:?}");
}

#[test]
fn single_task_matrix_is_test_accuracy() {
    let seq = single(eight_class_snapshot(4));
    let cfg = TrainConfig::new(Architecture::Mlp);
    let run = run_sequence(&seq, &cfg, Restart::Cold, 1).unwrap();
    let mut rng = task_rng(1, 0);
    let mut net = Network::new(
        cfg.arch,
        cfg.hyper,
        seq.predicates[0].width(),
        seq.classes[0].width(),
        &mut rng,
    )
    .unwrap();
    train_task(&mut net, &seq.tasks[0], &cfg, seq.model, &mut rng).unwrap();
    let acc = evaluate(&net, &seq.tasks[0], SplitTag::Test, cfg.batch_cap, seq.model).unwrap();
    assert_eq!(run.matrix.r, vec![vec![acc.accuracy]]);
}
