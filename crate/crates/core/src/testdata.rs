//! Shipped reference crystal data.

use crate::dispersion::CrystalSpec;

/// Contents of `data/bbo.crystal`: BBO cut for degenerate type-I PDC at 352 nm.
pub const BBO_TEXT: &str = include_str!("../../../data/bbo.crystal");

/// The reference BBO crystal (33.436°, 4 mm, 352 nm pump).
pub fn bbo() -> CrystalSpec {
    CrystalSpec::parse(BBO_TEXT).expect("shipped BBO data parses")
}
