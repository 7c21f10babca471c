//! Resolvable block designs for 36 varieties in blocks of six.

pub mod canon;
pub mod design;
pub mod efficiency;
pub mod error;
pub mod exact;
pub mod format;
pub mod iso;
pub mod search;
pub mod sylvester;
pub mod families;
