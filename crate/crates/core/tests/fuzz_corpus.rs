//! Replays the checked-in fuzz corpus through the fuzz entry points.

use std::fs;
use std::path::PathBuf;

use papm_core::fuzzing::{eval_jet_input, load_spec_input, parse_expression_input};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_expression_seeds() {
    for (_, data) in seeds("parse_expression") {
        parse_expression_input(&data);
    }
}

#[test]
fn load_spec_seeds() {
    for (_, data) in seeds("load_spec") {
        load_spec_input(&data);
    }
}

#[test]
fn eval_jet_seeds() {
    for (_, data) in seeds("eval_jet") {
        eval_jet_input(&data);
    }
}
