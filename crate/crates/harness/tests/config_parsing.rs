use lt_harness::{ExperimentConfig, TaskSelector, Variant};

#[test]
fn minimal_cartpole_config_fills_documented_defaults() {
    let cfg = ExperimentConfig::parse(
        "experiment.name = cp\ntask.name = cartpole\nseeds = 1,2,3\n",
    )
    .unwrap();
    assert_eq!(cfg.seeds, vec![1, 2, 3]);
    assert_eq!(cfg.schedule.rate, 0.2);
    assert_eq!(cfg.schedule.iterations, 20);
    assert_eq!(cfg.rewind.point, 1);
    let TaskSelector::Rl {
        model,
        trainer,
        protocol,
        ..
    } = &cfg.task
    else {
        panic!("wrong task");
    };
    assert_eq!(trainer.workers, 32);
    assert_eq!(trainer.n_steps, 4);
    assert_eq!(protocol.epochs, 20);
    assert_eq!(protocol.per_epoch, 160);
    assert_eq!(protocol.window, 100);
    assert_eq!(
        *model,
        lt_models::ModelConfig::MlpActorCritic {
            obs_dim: 4,
            actions: 2,
            hidden: vec![128, 128, 128]
        }
    );
}

#[test]
fn acrobot_defaults_follow_its_protocol_row() {
    let cfg =
        ExperimentConfig::parse("experiment.name = ab\ntask.name = acrobot\nseeds = 1\n").unwrap();
    let TaskSelector::Rl { protocol, model, .. } = &cfg.task else {
        panic!()
    };
    assert_eq!(protocol.per_epoch, 320);
    assert_eq!(
        *model,
        lt_models::ModelConfig::MlpActorCritic {
            obs_dim: 6,
            actions: 3,
            hidden: vec![256, 256, 256]
        }
    );
}

#[test]
fn unknown_keys_are_usage_errors() {
    let err = ExperimentConfig::parse(
        "experiment.name = x\ntask.name = cartpole\nseeds = 1\nprune.rat = 0.2\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("prune.rat"), "{err}");
}

#[test]
fn malformed_lines_and_duplicates_are_rejected() {
    assert!(ExperimentConfig::parse("experiment.name\n").is_err());
    assert!(
        ExperimentConfig::parse("experiment.name = a\nexperiment.name = b\n").is_err()
    );
    assert!(ExperimentConfig::parse(
        "experiment.name = x\ntask.name = warehouse\nseeds = 1\n"
    )
    .is_err());
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let cfg = ExperimentConfig::parse(
        "# pruning setup\nexperiment.name = c  # inline\n\ntask.name = cartpole\nseeds = 4\n",
    )
    .unwrap();
    assert_eq!(cfg.name, "c");
    assert_eq!(cfg.seeds, vec![4]);
}

#[test]
fn hash_is_stable_and_override_sensitive() {
    let a = ExperimentConfig::parse("experiment.name = x\ntask.name = cartpole\nseeds = 1\n")
        .unwrap();
    let b = ExperimentConfig::parse(
        "seeds = 1\ntask.name = cartpole\nexperiment.name = x\n", // reordered
    )
    .unwrap();
    assert_eq!(a.hash(), b.hash());
    let c = a.with_overrides(Some(vec![2]), None, None).unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn variant_overrides_rewrite_name_and_fields() {
    let base = ExperimentConfig::parse(
        "experiment.name = lm1\ntask.name = lm\nseeds = 1\nrewind.point = 1\n",
    )
    .unwrap();
    let nr = base.with_overrides(None, None, Some(Variant::NoRewind)).unwrap();
    assert_eq!(nr.name, "lm1-no-rewind");
    assert!(nr.rewind.is_initialization());
    assert_eq!(nr.variant().name(), "no-rewind");

    let os = base.with_overrides(None, None, Some(Variant::OneShot)).unwrap();
    assert_eq!(os.name, "lm1-one-shot");
    assert_eq!(os.variant().name(), "one-shot");
}

#[test]
fn lm_task_reads_corpus_and_model_keys() {
    let cfg = ExperimentConfig::parse(
        "experiment.name = lm\ntask.name = lm\nseeds = 1\n\
         corpus.vocab_cap = 800\ncorpus.max_train_tokens = 5000\n\
         model.hidden_size = 64\nmodel.embed = 48\nbptt.seq_len = 25\nbptt.epochs = 2\n",
    )
    .unwrap();
    let TaskSelector::Lm {
        vocab_cap,
        max_train_tokens,
        model_hidden,
        model_embed,
        bptt,
        ..
    } = &cfg.task
    else {
        panic!()
    };
    assert_eq!(*vocab_cap, 800);
    assert_eq!(*max_train_tokens, Some(5000));
    assert_eq!(*model_hidden, 64);
    assert_eq!(*model_embed, 48);
    assert_eq!(bptt.seq_len, 25);
    assert_eq!(bptt.epochs, 2);
}

#[test]
fn seq2seq_task_reads_synth_keys() {
    let cfg = ExperimentConfig::parse(
        "experiment.name = s\ntask.name = seq2seq\nseeds = 1\n\
         synth.kind = copy\nsynth.vocab = 16\nsynth.min_len = 2\nsynth.max_len = 5\n\
         synth.train = 64\nsynth.test = 16\nseq2seq.epochs = 3\n",
    )
    .unwrap();
    let TaskSelector::Seq2Seq { task, epochs, .. } = &cfg.task else {
        panic!()
    };
    assert_eq!(task.vocab, 16);
    assert_eq!(*epochs, 3);
}

#[test]
fn bad_values_name_the_key() {
    for (text, needle) in [
        ("experiment.name = x\ntask.name = cartpole\nseeds = 1\nprune.rate = 1.5\n", "rate"),
        ("experiment.name = x\ntask.name = cartpole\nseeds = one\n", "seed"),
        (
            "experiment.name = x\ntask.name = cartpole\nseeds = 1\ntrainer.gamma = nope\n",
            "trainer.gamma",
        ),
        (
            "experiment.name = x\ntask.name = cartpole\nseeds = 1\nrewind.unit = sometimes\n",
            "rewind.unit",
        ),
    ] {
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains(needle), "{err} missing {needle}");
    }
}
