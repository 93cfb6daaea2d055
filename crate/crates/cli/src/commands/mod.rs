pub mod energy;
pub mod paircount;
pub mod plasmon;
pub mod spectrum;
pub mod validate;
