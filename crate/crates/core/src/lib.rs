pub mod automata;
pub mod constructions;
pub mod exactnum;
pub mod quantum;
pub mod recognition;
