#![allow(dead_code)]

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparsetree::Dataset;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsetree"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_csv(dir: &Path, name: &str, ds: &Dataset) -> PathBuf {
    let path = dir.join(name);
    ds.write_csv(File::create(&path).unwrap()).unwrap();
    path
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Label equals feature `b`; feature `a` is noise.
pub fn separable() -> Dataset {
    let rows: Vec<Vec<bool>> = (0..100).map(|i| vec![i % 3 == 0, i >= 55]).collect();
    let labels: Vec<bool> = (0..100).map(|i| i >= 55).collect();
    Dataset::from_rows(vec!["a".into(), "b".into()], "y", &rows, &labels).unwrap()
}
