//! Built-in reference systems used by the CLI and the test suites.

use crate::word::{Alphabet, SadicSystem, Substitution, TauParams, TauSource, Word};

/// Stationary `tau_{m,n,r}` over the identity seed on `{0,1}`.
pub fn repeated_tau(m: u64, n: u64, r: u64) -> SadicSystem {
    SadicSystem::new(
        Substitution::identity(2),
        TauSource::Explicit {
            list: vec![TauParams::from_u64(m, n, r).expect("valid fixture parameters")],
            repeat_last: true,
        },
        Alphabet::binary(),
    )
    .expect("valid fixture system")
}

/// The substitution 0 -> 001, 1 -> 00001 iterated from 0.
pub fn example_1_2() -> SadicSystem {
    repeated_tau(3, 5, 0)
}

/// The substitution 0 -> 00000011, 1 -> 0000000011 iterated from 0.
pub fn example_1_3() -> SadicSystem {
    repeated_tau(7, 9, 1)
}

/// Seed pi(0) = a, pi(1) = ab with the divisibility-driven choice between
/// omega_1 = tau_{3,5,0} and omega_2 = tau_{5,7,0}.
pub fn example_1_4() -> SadicSystem {
    let pi = Substitution::new(vec![Word::new(vec![0]), Word::new(vec![0, 1])])
        .expect("valid seed images");
    SadicSystem::new(
        pi,
        TauSource::Rule {
            omega1: TauParams::from_u64(3, 5, 0).unwrap(),
            omega2: TauParams::from_u64(5, 7, 0).unwrap(),
        },
        Alphabet::new(vec!['a', 'b']),
    )
    .expect("valid fixture system")
}

/// Look a builtin up by its conventional id.
pub fn by_name(name: &str) -> Option<SadicSystem> {
    match name {
        "1.2" => Some(example_1_2()),
        "1.3" => Some(example_1_3()),
        "1.4" => Some(example_1_4()),
        _ => None,
    }
}
