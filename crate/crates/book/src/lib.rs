//! The guide in `book/` cannot run its listings against this workspace, so
//! each chapter is included here as module docs and `cargo test --doc`
//! checks it. A failing doc-test names the chapter module.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/design.md")]
pub mod design {}
#[doc = include_str!("../../../book/src/kinematics.md")]
pub mod kinematics {}
#[doc = include_str!("../../../book/src/sensitivity.md")]
pub mod sensitivity {}
#[doc = include_str!("../../../book/src/metrology.md")]
pub mod metrology {}
#[doc = include_str!("../../../book/src/fabrication.md")]
pub mod fabrication {}
#[doc = include_str!("../../../book/src/gcode.md")]
pub mod gcode {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
