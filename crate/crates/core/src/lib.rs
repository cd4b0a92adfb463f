pub mod blowup;
pub mod contact;
pub mod error;
pub mod exactalg;
pub mod filtration;
pub mod invariant;
pub mod linalg;
pub mod report;
pub mod driver;
