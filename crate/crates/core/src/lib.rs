pub mod modring;
pub mod qmat;
pub mod weyl;
pub mod clifford;
pub mod stabilizer;
pub mod frames;
pub mod gross;
pub mod nogo;
pub mod wsim;
