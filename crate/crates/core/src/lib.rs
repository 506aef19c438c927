pub mod error;
pub mod forward;
pub mod invisible;
pub mod io;
pub mod model;
pub mod numerics;
pub mod recover;
