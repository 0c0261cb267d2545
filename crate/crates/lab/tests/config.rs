//! INI parsing, defaults and flag precedence.

use std::path::Path;

use ftp_core::Rule;
use ftp_lab::{ArchFamily, LabError, Overrides, RunConfig};

#[test]
fn ini_sections_set_fields() {
    let text = "\
[run]
algo = bp
arch = cnn
seeds = 4, 5, 6

[train]
epochs = 7
gamma = 0.5
hidden = 64,32
milestones = 3

[hardware]
bits = 4
alpha = 0.0, 0.05
";
    let c = RunConfig::from_ini_str(text, Path::new("t.ini")).unwrap();
    assert_eq!(c.algo, Rule::Bp);
    assert_eq!(c.arch, ArchFamily::Cnn);
    assert_eq!(c.seeds, vec![4, 5, 6]);
    assert_eq!(c.epochs(), 7);
    assert_eq!(c.hidden, vec![64, 32]);
    assert_eq!(c.alpha, vec![0.0, 0.05]);
    let t = c.train_config(4);
    assert_eq!(t.gamma, 0.5);
    assert_eq!(t.lr_at(2), 0.01);
    assert!((t.lr_at(3) - 0.001).abs() < 1e-18);
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    for text in ["[train]\nlearning_rate = 0.1\n", "[optimizer]\nlr = 0.1\n", "lr = 0.1\n"] {
        let e = RunConfig::from_ini_str(text, Path::new("t.ini")).unwrap_err();
        assert!(matches!(e, LabError::Config(_)), "{text}: {e}");
        assert_eq!(e.exit_code(), 2);
    }
    let e = RunConfig::from_ini_str("[train]\nepochs = many\n", Path::new("t.ini")).unwrap_err();
    assert!(e.to_string().contains("train.epochs"), "{e}");
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.ini");
    std::fs::write(&p, "[run]\nalgo = pepita\nseeds = 1,2\n[train]\ngamma = 0.3\n").unwrap();
    let o = Overrides {
        config: Some(p.clone()),
        algo: Some("ftp".into()),
        seed: Some(9),
        ..Overrides::default()
    };
    let c = o.resolve().unwrap();
    assert_eq!(c.algo, Rule::Ftp);
    assert_eq!(c.seeds, vec![9]);
    assert_eq!(c.gamma, 0.3);
    let bad = Overrides {
        algo: Some("dtp".into()),
        ..Overrides::default()
    };
    assert!(matches!(bad.resolve(), Err(LabError::Config(_))));
}

#[test]
fn validation_catches_unusable_settings() {
    let mut c = RunConfig {
        arch: ArchFamily::Rnn,
        algo: Rule::Pepita,
        ..RunConfig::default()
    };
    assert!(c.validate().is_err());
    c.algo = Rule::Ftp;
    assert!(c.validate().unwrap().is_empty());
    c.gamma = 3.0;
    assert_eq!(c.validate().unwrap().len(), 1);
    c.gamma = -1.0;
    assert!(c.validate().is_err());
    let c = RunConfig {
        bits: 1,
        ..RunConfig::default()
    };
    assert!(c.validate().is_err());
}
