#![allow(dead_code)]

use std::path::PathBuf;

use easpec_core::{parse_program, parse_state, Program, State};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn read(file: &str) -> String {
    let path = corpus_dir().join(file);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn program(name: &str) -> Program {
    parse_program(&read(&format!("{name}.ea"))).unwrap_or_else(|e| panic!("{name}.ea: {e}"))
}

pub fn state(name: &str, p: &Program) -> State {
    parse_state(&read(&format!("{name}.eas")), p.vocab())
        .unwrap_or_else(|e| panic!("{name}.eas: {e}"))
}

/// Program file and the state it is specialized against.
pub const CORPUS: &[(&str, &str)] = &[
    ("strcpy", "strcpy"),
    ("selfint", "selfint_swap_sum"),
    ("selfint", "selfint_count"),
    ("selfint", "selfint_gcd"),
    ("counter", "counter"),
    ("mode_flip", "mode_flip"),
    ("list_walk", "list_walk"),
    ("power", "power"),
    ("swap_sum", "target_swap_sum"),
    ("count", "target_count"),
    ("gcd", "target_gcd"),
];
