pub mod asm;
pub mod bench;
pub mod bits;
pub mod convcode;
pub mod isa;
pub mod micro;
pub mod workloads;
