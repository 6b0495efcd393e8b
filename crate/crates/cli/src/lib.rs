pub mod commands;
pub mod io;
