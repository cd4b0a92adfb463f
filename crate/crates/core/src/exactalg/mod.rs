//! Exact polynomial arithmetic over the rationals.

pub mod coord;
pub mod deriv;
pub mod mono;
pub mod parse;
pub mod poly;
pub mod rat;
pub mod ring;

pub use coord::CoordChange;
pub use deriv::Derivation;
pub use mono::Mono;
pub use parse::parse_poly;
pub use poly::Poly;
pub use rat::Rat;
pub use ring::Ring;
