#![allow(dead_code)]

pub mod chp;
pub mod unitary;
