pub mod channel;
pub mod decoder;
pub mod design;
pub mod diversity;
pub mod lattice;
pub mod linalg;
pub mod manifold;
pub mod par;
pub mod sfcode;
pub mod sim;
pub mod spherewrap;
