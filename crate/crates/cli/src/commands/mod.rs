pub mod boundary;
pub mod compute;
pub mod invert;
pub mod phi_star;
pub mod synth;
