//! Bundled models, partitions, stubs and query files.

use crate::model::BioPepaSystem;
use crate::parser::parse_named;

pub const MODULE1: &str = include_str!("../corpus/module1.biopepa");
pub const MODULE7: &str = include_str!("../corpus/module7.biopepa");
pub const COMPOSED: &str = include_str!("../corpus/composed.biopepa");
pub const COMPOSED_PARTITION: &str = include_str!("../corpus/composed.partition.toml");
pub const MODULE1_STUBS: &str = include_str!("../corpus/module1.stubs.toml");
pub const MODULE1_FIXED25_STUBS: &str = include_str!("../corpus/module1.fixed25.stubs.toml");
pub const MODULE7_STUBS: &str = include_str!("../corpus/module7.stubs.toml");
pub const MODULE1_QUERIES: &str = include_str!("../corpus/module1.queries");
pub const MODULE7_QUERIES: &str = include_str!("../corpus/module7.queries");

fn load(text: &str, name: &str) -> BioPepaSystem {
    parse_named(text, name).expect("bundled model parses")
}

pub fn module1() -> BioPepaSystem {
    load(MODULE1, "module1.biopepa")
}

pub fn module7() -> BioPepaSystem {
    load(MODULE7, "module7.biopepa")
}

pub fn composed() -> BioPepaSystem {
    load(COMPOSED, "composed.biopepa")
}
