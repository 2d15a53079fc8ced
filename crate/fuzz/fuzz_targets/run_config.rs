#![no_main]

use libfuzzer_sys::fuzz_target;

// Config ingestion must never panic: arbitrary JSON either parses into a
// validated RunConfig or yields structured errors.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mut config) = hedgelp::config::parse_config(text) else {
        return;
    };
    let _ = config.effective_json();
    let _ = config.grid_for_hedging();
    let _ = config.grid_for_band_probe();
    if let Some(cell) = config.cell.clone() {
        let _ = hedgelp::config::parse_cell_spec(&cell);
    }
    // bound the enumeration so pathological grids stay cheap; skip table
    // payoffs (they read files)
    config.enumeration_cap = config.enumeration_cap.min(2048);
    if !matches!(config.payoff, hedgelp::config::PayoffCfg::Table { .. }) {
        let _ = config.instance(std::path::Path::new("."));
    }
});
