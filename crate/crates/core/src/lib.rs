pub mod rat;
pub mod sparse;
pub mod poly;
pub mod complex;
pub mod bar;
pub mod dcrit;
pub mod mf;
pub mod hochschild;
pub mod derham;
pub mod extproj;
pub mod scenario;
