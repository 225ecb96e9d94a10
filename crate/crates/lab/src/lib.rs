pub mod catalog;
pub mod fileformat;
pub mod report;
pub mod verify;
