#![no_main]

use ergomax_harness::campaign::plan;
use ergomax_harness::config::CampaignConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = CampaignConfig::from_json(text) {
        if config.corpus.instances <= 64 && config.corpus.p_grid.len() <= 16 {
            let _ = plan(&config);
        }
    }
});
