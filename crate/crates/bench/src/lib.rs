//! Shared fixtures for the criterion benchmarks.

use modfun::scalar::Rational;
use modfun::ModularFunctorData;

pub fn su2(level: u32) -> ModularFunctorData {
    modfun::catalog::su2_level(level).expect("level >= 1")
}

pub fn t_one() -> Rational {
    Rational::from_integer(1.into())
}
