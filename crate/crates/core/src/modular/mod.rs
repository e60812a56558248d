//! Residue-ring images, CRT products, rectification to integer sets and the
//! local-to-global builder.

mod construct;
mod residue_set;
mod search;

pub use construct::{
    build_separating_set, target_threshold, BuildOptions, Certification, ConstructionReport,
    LocalSolution, Outcome, StopRule,
};
pub use residue_set::{
    combined_modulus, crt_product, modular_image, modular_image_cardinality, rectify,
    sandwich_bounds, ResidueSet, CRT_PRODUCT_CAP,
};
pub use search::{local_ratio_search, SearchBudget};
