#![no_main]

use libfuzzer_sys::fuzz_target;

use hedgelp::market::{payoff_table_from_csv, GridSpec, Modulus, TradeBound};
use hedgelp::scalar::rat_from_decimal;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let kappa = rat_from_decimal("0.1").unwrap();
    for (n, trunc, periods) in [(1u32, 2u32, 1u32), (2, 4, 2), (1, 3, 3)] {
        let grid = GridSpec::new(n, trunc, periods, kappa.clone(), TradeBound::Unbounded).unwrap();
        let _ = payoff_table_from_csv(text, &grid, false, Modulus::None);
        let _ = payoff_table_from_csv(text, &grid, true, Modulus::Slope(kappa.clone()));
    }
});
