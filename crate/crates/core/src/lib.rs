//! Task algebra, possibility backends and bounded model search for
//! constructor-theoretic statements about information and work.

pub mod algebra;
pub mod backend;
pub mod checker;
pub mod conservation;
pub mod derive;
pub mod dsl;
pub mod info_media;
pub mod quantum;
pub mod relation;
pub mod work_media;
