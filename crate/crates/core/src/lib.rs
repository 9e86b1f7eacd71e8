pub mod cli;
pub mod clustering;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod labeling;
pub mod matching;
pub mod synthesis;
