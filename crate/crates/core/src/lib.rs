pub mod demos;
pub mod extract;
pub mod formula;
pub mod kernel;
pub mod normal_form;
pub mod oracles;
pub mod random;
pub mod sexpr;
pub mod sst;
