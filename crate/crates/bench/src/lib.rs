//! Inputs shared by the benchmarks.

use std::collections::BTreeMap;

use qsys_core::generate::generate;
use qsys_core::{AlgebraObject, Category, Tolerance};

/// A scrambled semisimple algebra with the given matrix block sizes.
pub fn scrambled(blocks: &[usize], seed: u64) -> (Category, AlgebraObject) {
    let list = blocks.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let params = BTreeMap::from([("blocks".to_string(), list)]);
    let inst = generate("scrambled-semisimple", &params, seed)
        .and_then(|f| f.build(Tolerance::default()))
        .expect("generated instance builds");
    let a = inst.algebras["A"].clone();
    (inst.category, a)
}
