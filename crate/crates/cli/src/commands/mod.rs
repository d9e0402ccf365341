pub mod build;
pub mod eval;
pub mod generate;
pub mod mutate;
pub mod optimize;
pub mod sal;
pub mod train;
