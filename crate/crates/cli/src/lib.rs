pub mod app;
pub mod bench;
pub mod plot;

pub use app::run;
